/*
 * witness.hpp — search for event pairs that expose surviving coherence.
 *
 * A pair of rank-1 subsystem projectors (P1, P2) is "suitable" when the
 * coincidence probability differs between a composite pure state and its
 * decohered mixture over a beable's branches. The optimizer climbs the
 * absolute gap over unit-vector parameters with random restarts; the grid
 * certificate evaluates a deterministic parameter grid as an independent
 * lower bound on the same supremum.
 */
#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "reldec/common.hpp"
#include "reldec/qstate.hpp"
#include "reldec/rng.hpp"
#include "reldec/states.hpp"

namespace reldec {

struct WitnessResult {
    Projector p1;
    Projector p2;
    double gap;  // |interference_term(psi, beable, p1, p2)|, recomputed from scratch
    std::int64_t evaluations;
    std::optional<double> certificate;
    std::string note;
};

namespace detail {

// Signed coincidence gap for rank-1 projectors given as unit vectors,
// evaluated by contracting two tensor factors. No allocation per call
// beyond the accumulator loop; grids hit this millions of times.
class InterferenceObjective {
public:
    InterferenceObjective(const Ket& psi, const BeableObservable& beable, int factor1, int factor2)
        : f1_(factor1), f2_(factor2) {
        const SubsystemLayout& layout = psi.layout();
        d1_ = layout.dim(f1_);
        d2_ = layout.dim(f2_);
        s1_ = layout.stride(f1_);
        s2_ = layout.stride(f2_);
        for (int flat = 0; flat < layout.total_dim(); ++flat)
            if (layout.digit(flat, f1_) == 0 && layout.digit(flat, f2_) == 0)
                rest_bases_.push_back(flat);

        states_.push_back(psi.amplitudes());
        scales_.push_back(1.0);
        for (const Branch& b : branch_decompose(psi, beable)) {
            states_.push_back(b.ket.amplitudes());
            scales_.push_back(-b.weight);
        }
        branch_count_ = static_cast<int>(states_.size()) - 1;
    }

    int branch_count() const { return branch_count_; }
    int dim1() const { return d1_; }
    int dim2() const { return d2_; }

    double gap(const cvector& v1, const cvector& v2) const {
        double total = 0.0;
        for (std::size_t k = 0; k < states_.size(); ++k) {
            const cvector& amps = states_[k];
            double prob = 0.0;
            for (const int base : rest_bases_) {
                complexd acc = 0.0;
                for (int i = 0; i < d1_; ++i) {
                    const complexd c1 = std::conj(v1(i));
                    for (int j = 0; j < d2_; ++j)
                        acc += c1 * std::conj(v2(j)) * amps(base + i * s1_ + j * s2_);
                }
                prob += std::norm(acc);
            }
            total += scales_[k] * prob;
        }
        return total;
    }

private:
    int f1_, f2_, d1_, d2_, s1_, s2_;
    int branch_count_ = 0;
    std::vector<int> rest_bases_;
    std::vector<cvector> states_;
    std::vector<double> scales_;
};

inline double next_gaussian(RngStream& s) {
    const double u1 = 1.0 - s.next_double();  // (0, 1]
    const double u2 = s.next_double();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

inline cvector normalized_block(const cvector& v) {
    const double n = v.norm();
    if (n < 1e-12) {
        cvector e = cvector::Zero(v.size());
        e(0) = 1.0;
        return e;
    }
    return v / n;
}

// Picks the searched subsystems: p2 lives where the beable does, p1 on the
// requested label or, for a two-factor layout, the remaining one.
inline std::pair<int, int> witness_factors(const Ket& psi, const BeableObservable& beable,
                                           const std::optional<std::string>& p1_subsystem) {
    const SubsystemLayout& layout = psi.layout();
    const int f2 = layout.index_of(beable.subsystem());
    int f1 = -1;
    if (p1_subsystem) {
        f1 = layout.index_of(*p1_subsystem);
        require(f1 != f2, "witness: p1 subsystem must differ from the beable subsystem");
    } else {
        require(layout.factor_count() == 2,
                "witness: p1 subsystem must be named explicitly on layouts with more than two factors");
        f1 = 1 - f2;
    }
    return {f1, f2};
}

}  // namespace detail

// Random-restart hill climbing over unit-vector parameters of the two
// rank-1 projectors, with finite-difference ascent and geometrically
// decaying step size. The best gap is non-decreasing in the restart count
// for a fixed seed; ties keep the earliest restart.
inline WitnessResult optimize_witness(const Ket& psi, const BeableObservable& beable, int restarts,
                                      int steps, std::uint64_t seed,
                                      const std::optional<std::string>& p1_subsystem = std::nullopt) {
    require(restarts >= 1 && steps >= 1, "witness: restarts and steps must be positive");
    const auto [f1, f2] = detail::witness_factors(psi, beable, p1_subsystem);
    const SubsystemLayout& layout = psi.layout();
    const int d1 = layout.dim(f1);
    const int d2 = layout.dim(f2);

    const auto result_with = [&](const cvector& v1, const cvector& v2, std::int64_t evals,
                                 std::string note) {
        Projector p1 = Projector::onto_ket(detail::normalized_block(v1), layout.label(f1));
        Projector p2 = Projector::onto_ket(detail::normalized_block(v2), layout.label(f2));
        const double gap = std::abs(interference_term(psi, beable, p1, p2));
        return WitnessResult{std::move(p1), std::move(p2), gap, evals, std::nullopt, std::move(note)};
    };

    const detail::InterferenceObjective objective(psi, beable, f1, f2);
    if (objective.branch_count() < 2)
        return result_with(cvector::Unit(d1, 0), cvector::Unit(d2, 0), 0,
                           "no coherence to witness: the state has a single branch");

    const int n_params = 2 * (d1 + d2);
    const auto unpack = [&](const std::vector<double>& x, cvector& v1, cvector& v2) {
        for (int i = 0; i < d1; ++i) v1(i) = complexd(x[2 * i], x[2 * i + 1]);
        for (int j = 0; j < d2; ++j)
            v2(j) = complexd(x[2 * d1 + 2 * j], x[2 * d1 + 2 * j + 1]);
        v1 = detail::normalized_block(v1);
        v2 = detail::normalized_block(v2);
    };

    std::int64_t evals = 0;
    cvector v1(d1), v2(d2);
    const auto value_at = [&](const std::vector<double>& x) {
        unpack(x, v1, v2);
        ++evals;
        return std::abs(objective.gap(v1, v2));
    };

    double best = -1.0;
    cvector best_v1 = cvector::Unit(d1, 0), best_v2 = cvector::Unit(d2, 0);
    const RngStream root = RngStream::root(seed);
    for (int r = 0; r < restarts; ++r) {
        RngStream s = root.split(static_cast<std::uint64_t>(r));
        std::vector<double> x(static_cast<std::size_t>(n_params));
        for (double& xi : x) xi = detail::next_gaussian(s);
        double fx = value_at(x);
        double step = 0.3;
        std::vector<double> grad(static_cast<std::size_t>(n_params));
        std::vector<double> trial(static_cast<std::size_t>(n_params));
        for (int it = 0; it < steps && step > 1e-8; ++it) {
            const double h = 1e-5;
            double gnorm2 = 0.0;
            for (int k = 0; k < n_params; ++k) {
                trial = x;
                trial[static_cast<std::size_t>(k)] += h;
                const double fp = value_at(trial);
                trial[static_cast<std::size_t>(k)] -= 2.0 * h;
                const double fm = value_at(trial);
                grad[static_cast<std::size_t>(k)] = (fp - fm) / (2.0 * h);
                gnorm2 += grad[static_cast<std::size_t>(k)] * grad[static_cast<std::size_t>(k)];
            }
            if (gnorm2 < 1e-24) break;
            const double gnorm = std::sqrt(gnorm2);
            trial = x;
            for (int k = 0; k < n_params; ++k)
                trial[static_cast<std::size_t>(k)] += step * grad[static_cast<std::size_t>(k)] / gnorm;
            const double ft = value_at(trial);
            if (ft > fx) {
                x = trial;
                fx = ft;
                step = std::min(0.5, step * 1.25);
            } else {
                step *= 0.5;
            }
        }
        if (fx > best) {
            best = fx;
            unpack(x, best_v1, best_v2);
        }
    }
    return result_with(best_v1, best_v2, evals, "");
}

// Deterministic exhaustive grid over the projector parameters, a lower
// bound on the witness supremum. `resolution` is the per-angle point count
// for a qubit pair; higher-dimensional factors share the same evaluation
// budget (resolution^4), so their per-angle count shrinks accordingly.
inline double grid_certificate(const Ket& psi, const BeableObservable& beable, int resolution,
                               const std::optional<std::string>& p1_subsystem = std::nullopt) {
    require(resolution >= 2, "witness grid: resolution must be at least 2");
    const auto [f1, f2] = detail::witness_factors(psi, beable, p1_subsystem);
    const SubsystemLayout& layout = psi.layout();
    const int d1 = layout.dim(f1);
    const int d2 = layout.dim(f2);
    require(d1 <= 4 && d2 <= 4, "witness grid: subsystem dimensions above 4 are not exhaustively searchable");

    const detail::InterferenceObjective objective(psi, beable, f1, f2);
    if (objective.branch_count() < 2) return 0.0;

    const int n_angles = 2 * (d1 - 1) + 2 * (d2 - 1);
    const double budget = std::pow(static_cast<double>(resolution), 4.0);
    // Round, don't truncate: a qubit pair must get exactly `resolution`
    // points per angle.
    const int per_angle =
        std::max(2, static_cast<int>(std::llround(std::pow(budget, 1.0 / n_angles))));

    // All unit vectors of one factor on the angle grid: d-1 polar angles in
    // [0, pi/2] (inclusive), d-1 phases in [0, 2pi) (exclusive).
    const auto enumerate_vectors = [per_angle](int d) {
        std::vector<cvector> out;
        const int polar_count = d - 1;
        std::vector<int> idx(static_cast<std::size_t>(2 * (d - 1)), 0);
        const double polar_step = (std::numbers::pi / 2.0) / (per_angle - 1);
        const double phase_step = (2.0 * std::numbers::pi) / per_angle;
        while (true) {
            cvector v(d);
            double sines = 1.0;
            for (int k = 0; k < d; ++k) {
                double mag = sines;
                if (k < polar_count) {
                    const double theta = idx[static_cast<std::size_t>(k)] * polar_step;
                    mag *= std::cos(theta);
                    sines *= std::sin(theta);
                }
                const double phase =
                    k == 0 ? 0.0 : idx[static_cast<std::size_t>(polar_count + k - 1)] * phase_step;
                v(k) = std::polar(mag, phase);
            }
            out.push_back(std::move(v));
            int p = 0;
            for (; p < 2 * (d - 1); ++p) {
                if (++idx[static_cast<std::size_t>(p)] < per_angle) break;
                idx[static_cast<std::size_t>(p)] = 0;
            }
            if (p == 2 * (d - 1)) break;
        }
        return out;
    };

    const std::vector<cvector> side1 = enumerate_vectors(d1);
    const std::vector<cvector> side2 = enumerate_vectors(d2);
    double best = 0.0;
    for (const cvector& v1 : side1)
        for (const cvector& v2 : side2) best = std::max(best, std::abs(objective.gap(v1, v2)));
    return best;
}

}  // namespace reldec
