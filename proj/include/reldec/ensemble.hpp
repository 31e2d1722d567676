/*
 * ensemble.hpp — sampled populations with definite beable values.
 *
 * An Ensemble tags each of N individual systems with one beable value and,
 * optionally, simulated measurement records. The subensemble sharing one
 * value has no composite quantum state of its own; what can be verified
 * about it statistically is that its object-side description matches the
 * conditional subsystem state, and that value frequencies converge to the
 * projector weights. Both checks live here.
 *
 * Sampling contract: member j of build_ensemble(psi, beable, n, seed) draws
 * from RngStream::root(seed).split(0).split(j), so the population is
 * bit-identical for any worker count.
 */
#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "reldec/common.hpp"
#include "reldec/parallel.hpp"
#include "reldec/qstate.hpp"
#include "reldec/rng.hpp"
#include "reldec/states.hpp"

namespace reldec {

struct MeasurementRecord {
    std::string observable_id;
    double value;
};

struct IndividualSystem {
    int beable_value;
    std::vector<MeasurementRecord> records;
};

struct Ensemble {
    Ket state;
    BeableObservable beable;
    std::vector<IndividualSystem> members;
    std::uint64_t seed;

    std::int64_t size() const { return static_cast<std::int64_t>(members.size()); }

    std::vector<std::int64_t> counts() const {
        std::vector<std::int64_t> n(static_cast<std::size_t>(beable.value_count()), 0);
        for (const auto& m : members) ++n[static_cast<std::size_t>(m.beable_value)];
        return n;
    }
};

namespace detail {

inline int draw_categorical(const std::vector<double>& weights, double u) {
    double acc = 0.0;
    for (std::size_t i = 0; i < weights.size(); ++i) {
        acc += weights[i];
        if (u < acc) return static_cast<int>(i);
    }
    return static_cast<int>(weights.size()) - 1;  // u landed in rounding dust
}

inline std::vector<double> beable_weights(const Ket& psi, const BeableObservable& beable) {
    std::vector<double> w;
    w.reserve(static_cast<std::size_t>(beable.value_count()));
    for (int i = 0; i < beable.value_count(); ++i)
        w.push_back(event_probability(psi, beable.value_projector(i)));
    return w;
}

}  // namespace detail

// One Born-rule draw of a beable value; deterministic given the stream.
inline int sample_beable_value(const Ket& psi, const BeableObservable& beable, RngStream& stream) {
    return detail::draw_categorical(detail::beable_weights(psi, beable), stream.next_double());
}

inline Ensemble build_ensemble(const Ket& psi, const BeableObservable& beable, std::int64_t n,
                               std::uint64_t seed, int threads = 1) {
    require(n >= 1, "ensemble: need at least one member");
    psi.layout().index_of(beable.subsystem());
    const std::vector<double> weights = detail::beable_weights(psi, beable);
    Ensemble e{psi, beable, std::vector<IndividualSystem>(static_cast<std::size_t>(n)), seed};
    const RngStream member_root = RngStream::root(seed).split(0);
    parallel_for(n, threads, [&](std::int64_t j) {
        RngStream s = member_root.split(static_cast<std::uint64_t>(j));
        e.members[static_cast<std::size_t>(j)].beable_value =
            detail::draw_categorical(weights, s.next_double());
    });
    return e;
}

// ----------------------------------------------------------------------
// Frequency convergence

struct FrequencyEntry {
    int value_index;
    std::string value_name;
    std::int64_t count;
    double frequency;  // count / N
    double weight;     // Born weight of this value
    double z;          // (frequency - weight) / binomial standard error
};

struct ConvergenceReport {
    std::vector<FrequencyEntry> entries;
    std::int64_t n;
    std::uint64_t seed;
    double z_crit;
    bool pass;
};

inline ConvergenceReport frequency_report(const Ensemble& e, double z_crit = 3.0) {
    const std::vector<double> weights = detail::beable_weights(e.state, e.beable);
    const std::vector<std::int64_t> counts = e.counts();
    const std::int64_t n = e.size();
    std::int64_t total = 0;
    ConvergenceReport report{{}, n, e.seed, z_crit, true};
    for (int i = 0; i < e.beable.value_count(); ++i) {
        const double w = weights[static_cast<std::size_t>(i)];
        const std::int64_t count = counts[static_cast<std::size_t>(i)];
        total += count;
        const double freq = static_cast<double>(count) / static_cast<double>(n);
        // A weight of exactly 0 or 1 makes the binomial spread degenerate;
        // such values get z = 0 by convention.
        double z = 0.0;
        if (w > branch_tol && w < 1.0 - branch_tol)
            z = (freq - w) / std::sqrt(w * (1.0 - w) / static_cast<double>(n));
        if (std::abs(z) > z_crit) report.pass = false;
        report.entries.push_back(
            FrequencyEntry{i, e.beable.value_names()[static_cast<std::size_t>(i)], count, freq, w, z});
    }
    require(total == n, "ensemble: member counts do not conserve N");
    return report;
}

// ----------------------------------------------------------------------
// Subensemble measurement statistics

// An observable resolved into its distinct eigenvalues and eigenprojectors:
// the minimal measurement it induces.
struct SpectralResolution {
    std::vector<double> values;
    std::vector<cmatrix> projectors;
};

inline SpectralResolution spectral_resolution(const Observable& c) {
    Eigen::SelfAdjointEigenSolver<cmatrix> es(c.matrix());
    const auto& vals = es.eigenvalues();
    const double group_tol = 1e-9 * (1.0 + vals.cwiseAbs().maxCoeff());
    SpectralResolution r;
    int start = 0;
    for (int i = 1; i <= static_cast<int>(vals.size()); ++i) {
        if (i < static_cast<int>(vals.size()) && vals(i) - vals(start) <= group_tol) continue;
        cmatrix p = cmatrix::Zero(c.dim(), c.dim());
        double value = 0.0;
        for (int k = start; k < i; ++k) {
            p += es.eigenvectors().col(k) * es.eigenvectors().col(k).adjoint();
            value += vals(k);
        }
        r.values.push_back(value / (i - start));
        r.projectors.push_back(std::move(p));
        start = i;
    }
    return r;
}

struct SubensembleStats {
    double mean;
    double standard_error;
    std::int64_t count;
};

// Simulates an ideal measurement of `c` on every member of subensemble
// `value_index`, appending one record per member. Outcomes are drawn from
// the conditional state the subensemble's object side is in; the stored
// beable tags are left untouched (the conditioning event only reveals
// them). Per-member draws use stream.split(member index).
inline SubensembleStats subensemble_average(Ensemble& e, int value_index, const Observable& c,
                                            const std::vector<std::string>& keep,
                                            const RngStream& stream, int threads = 1) {
    require(value_index >= 0 && value_index < e.beable.value_count(),
            "subensemble: value index out of range");
    std::vector<std::int64_t> members;
    for (std::int64_t j = 0; j < e.size(); ++j)
        if (e.members[static_cast<std::size_t>(j)].beable_value == value_index) members.push_back(j);
    require(!members.empty(), "subensemble: no members carry value index " +
                                  std::to_string(value_index));

    const ConditionalState cond =
        conditional_subsystem_state(e.state, e.beable.value_projector(value_index));
    const std::vector<std::string> keep_ordered = e.state.layout().ordered_subset(keep);
    const DensityOperator rho = (keep_ordered == cond.state.layout().labels())
                                    ? cond.state
                                    : partial_trace(cond.state, keep_ordered);
    require(c.dim() == rho.dim(),
            "subensemble: observable dimension does not match the conditional state");

    const SpectralResolution spec = spectral_resolution(c);
    std::vector<double> born;
    born.reserve(spec.values.size());
    double total = 0.0;
    for (const auto& p : spec.projectors) {
        const double pk = std::max(0.0, rho.matrix().cwiseProduct(p.transpose()).sum().real());
        born.push_back(pk);
        total += pk;
    }
    for (double& pk : born) pk /= total;

    parallel_for(static_cast<std::int64_t>(members.size()), threads, [&](std::int64_t idx) {
        const std::int64_t j = members[static_cast<std::size_t>(idx)];
        RngStream s = stream.split(static_cast<std::uint64_t>(j));
        const int outcome = detail::draw_categorical(born, s.next_double());
        e.members[static_cast<std::size_t>(j)].records.push_back(
            MeasurementRecord{c.id(), spec.values[static_cast<std::size_t>(outcome)]});
    });

    double mean = 0.0;
    for (std::int64_t j : members)
        mean += e.members[static_cast<std::size_t>(j)].records.back().value;
    const auto n = static_cast<double>(members.size());
    mean /= n;
    double var = 0.0;
    for (std::int64_t j : members) {
        const double d = e.members[static_cast<std::size_t>(j)].records.back().value - mean;
        var += d * d;
    }
    const double standard_error =
        members.size() > 1 ? std::sqrt(var / ((n - 1.0) * n)) : 0.0;
    return SubensembleStats{mean, standard_error, static_cast<std::int64_t>(members.size())};
}

inline SubensembleStats subensemble_average(Ensemble& e, int value_index, const Observable& c,
                                            const RngStream& stream, int threads = 1) {
    return subensemble_average(e, value_index, c, e.state.layout().complement({e.beable.subsystem()}),
                               stream, threads);
}

// ----------------------------------------------------------------------
// Conditional subsystem-state verification

struct TheoremEntry {
    int value_index;
    std::string value_name;
    double weight;
    std::int64_t count;
    bool skipped;
    std::string note;
    double mean;
    double standard_error;
    double theory;  // Tr(C rho_i) on the conditional state
    bool pass;
};

struct TheoremReport {
    std::vector<TheoremEntry> entries;
    std::string observable_id;
    std::int64_t n;
    std::uint64_t seed;
    double z_crit;
    bool pass;
    std::string note;
};

// Builds an ensemble and compares each subensemble's sampled mean of `c`
// against the conditional-state prediction. Indices with negligible weight
// or an empty subensemble are reported as skipped, not failed.
inline TheoremReport verify_conditional_state_theorem(const Ket& psi, const BeableObservable& beable,
                                                      const Observable& c,
                                                      const std::vector<std::string>& keep,
                                                      std::int64_t n, std::uint64_t seed,
                                                      double z_crit = 3.0, int threads = 1) {
    Ensemble e = build_ensemble(psi, beable, n, seed, threads);
    const RngStream measure_root = RngStream::root(seed).split(1);
    const std::vector<std::int64_t> counts = e.counts();

    const std::vector<std::string> keep_ordered = psi.layout().ordered_subset(keep);
    TheoremReport report{{},     c.id(), n, seed, z_crit, true,
                         "simulated measurements leave stored beable tags unchanged"};
    int compared = 0;
    for (int i = 0; i < beable.value_count(); ++i) {
        TheoremEntry entry{i, beable.value_names()[static_cast<std::size_t>(i)], 0.0,
                           counts[static_cast<std::size_t>(i)], false, "", 0.0, 0.0, 0.0, true};
        entry.weight = event_probability(psi, beable.value_projector(i));
        if (entry.weight <= branch_tol) {
            entry.skipped = true;
            entry.note = "weight below branch tolerance";
        } else if (entry.count == 0) {
            entry.skipped = true;
            entry.note = "empty subensemble at this sample size";
        } else {
            const SubensembleStats stats =
                subensemble_average(e, i, c, keep_ordered, measure_root, threads);
            const DensityOperator cond_full =
                conditional_subsystem_state(psi, beable.value_projector(i)).state;
            const DensityOperator rho = (keep_ordered == cond_full.layout().labels())
                                            ? cond_full
                                            : partial_trace(cond_full, keep_ordered);
            entry.mean = stats.mean;
            entry.standard_error = stats.standard_error;
            entry.theory = (rho.matrix() * c.matrix()).trace().real();
            // algebra_tol absorbs rounding when the subensemble is
            // dispersion-free and the standard error is exactly zero.
            entry.pass = std::abs(entry.mean - entry.theory) <=
                         z_crit * entry.standard_error + algebra_tol;
            ++compared;
        }
        if (!entry.skipped && !entry.pass) report.pass = false;
        report.entries.push_back(std::move(entry));
    }
    require(compared > 0, "theorem check: no subensemble was populated; increase the sample size");
    return report;
}

inline TheoremReport verify_conditional_state_theorem(const Ket& psi, const BeableObservable& beable,
                                                      const Observable& c, std::int64_t n,
                                                      std::uint64_t seed, double z_crit = 3.0,
                                                      int threads = 1) {
    return verify_conditional_state_theorem(psi, beable, c,
                                            psi.layout().complement({beable.subsystem()}), n, seed,
                                            z_crit, threads);
}

}  // namespace reldec
