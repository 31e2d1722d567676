/*
 * qstate.hpp — closed-form state layer.
 *
 * Branch decompositions, decohered mixtures, partial traces, conditional
 * subsystem states, ideal-occurrence (Lüders) conditioning, coincidence
 * probabilities and their interference gap. All functions are pure; inputs
 * are validated value types from states.hpp.
 *
 * Subsystem operators are never materialized at full dimension unless a
 * product is genuinely needed: expectation values and projections contract
 * one tensor factor directly (O(D·d) instead of O(D^2)).
 */
#pragma once

#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "reldec/common.hpp"
#include "reldec/layout.hpp"
#include "reldec/states.hpp"

namespace reldec {

// ----------------------------------------------------------------------
// Factor-local linear algebra

// Applies a d x d matrix to one tensor factor of a flat vector.
inline cvector apply_on_factor(const cvector& v, const SubsystemLayout& layout, int factor,
                               const cmatrix& m) {
    const int d = layout.dim(factor);
    require(m.rows() == d && m.cols() == d,
            "operator dimension does not match subsystem '" + layout.label(factor) + "'");
    const int stride = layout.stride(factor);
    const int outer = layout.total_dim() / (d * stride);
    cvector out = cvector::Zero(v.size());
    for (int p = 0; p < outer; ++p) {
        const int base = p * d * stride;
        for (int i = 0; i < d; ++i)
            for (int j = 0; j < d; ++j) {
                if (m(i, j) == complexd(0.0, 0.0)) continue;
                const complexd mij = m(i, j);
                const int row = base + i * stride;
                const int col = base + j * stride;
                for (int s = 0; s < stride; ++s) out[row + s] += mij * v[col + s];
            }
    }
    return out;
}

// rho -> (1 (x) m (x) 1) rho, acting on the given factor of the row space.
inline cmatrix apply_on_factor_left(const cmatrix& rho, const SubsystemLayout& layout, int factor,
                                    const cmatrix& m) {
    cmatrix out(rho.rows(), rho.cols());
    for (int c = 0; c < rho.cols(); ++c) out.col(c) = apply_on_factor(rho.col(c), layout, factor, m);
    return out;
}

// rho -> rho (1 (x) m (x) 1).
inline cmatrix apply_on_factor_right(const cmatrix& rho, const SubsystemLayout& layout, int factor,
                                     const cmatrix& m) {
    return apply_on_factor_left(rho.adjoint(), layout, factor, m.adjoint()).adjoint();
}

// Dense embedding of a subsystem operator into the full space.
inline cmatrix embed_on_factor(const cmatrix& m, const SubsystemLayout& layout, int factor) {
    const int d = layout.dim(factor);
    require(m.rows() == d && m.cols() == d,
            "operator dimension does not match subsystem '" + layout.label(factor) + "'");
    const int stride = layout.stride(factor);
    const int total = layout.total_dim();
    const int outer = total / (d * stride);
    cmatrix out = cmatrix::Zero(total, total);
    for (int p = 0; p < outer; ++p)
        for (int i = 0; i < d; ++i)
            for (int j = 0; j < d; ++j) {
                if (m(i, j) == complexd(0.0, 0.0)) continue;
                const int row = (p * d + i) * stride;
                const int col = (p * d + j) * stride;
                for (int s = 0; s < stride; ++s) out(row + s, col + s) = m(i, j);
            }
    return out;
}

namespace detail {

inline int factor_of_projector(const SubsystemLayout& layout, const Projector& q) {
    require(!q.on_whole_space(), "projector must be attached to a named subsystem here");
    const int f = layout.index_of(*q.subsystem());
    require(q.dim() == layout.dim(f),
            "projector dimension does not match subsystem '" + *q.subsystem() + "'");
    return f;
}

}  // namespace detail

// ----------------------------------------------------------------------
// Construction helpers

inline Ket basis_ket(const SubsystemLayout& layout, int flat_index) {
    cvector v = cvector::Zero(layout.total_dim());
    v(flat_index) = 1.0;
    return Ket(std::move(v), layout);
}

// Normalizes a raw amplitude vector. For building test and library states;
// external inputs are validated, not renormalized.
inline Ket normalized_ket(cvector raw, const SubsystemLayout& layout) {
    const double n = raw.norm();
    require(n > 0.0, "cannot normalize the zero vector");
    return Ket(raw / n, layout);
}

// Recombines weighted branch kets into the composite superposition
// sum_i sqrt(w_i) |psi_i>. The result must come out normalized: this is a
// validation, not a renormalization.
inline Ket ket_from_branches(const SubsystemLayout& layout, const std::vector<double>& weights,
                             const std::vector<Ket>& kets) {
    require(!weights.empty() && weights.size() == kets.size(),
            "branch form: need matching, non-empty weight and ket lists");
    cvector sum = cvector::Zero(layout.total_dim());
    for (std::size_t i = 0; i < kets.size(); ++i) {
        require(kets[i].layout() == layout, "branch form: branch ket layout mismatch");
        require(weights[i] >= 0.0, "branch form: negative weight");
        sum += std::sqrt(weights[i]) * kets[i].amplitudes();
    }
    return Ket(std::move(sum), layout);
}

// ----------------------------------------------------------------------
// Operations

inline Ket tensor_product(const Ket& a, const Ket& b) {
    const SubsystemLayout layout = a.layout().concat(b.layout());  // rejects duplicate labels
    cvector out(layout.total_dim());
    const int db = b.dim();
    for (int i = 0; i < a.dim(); ++i)
        for (int j = 0; j < db; ++j) out(i * db + j) = a.amplitudes()(i) * b.amplitudes()(j);
    return Ket(std::move(out), layout);
}

inline double event_probability(const Ket& psi, const Projector& q) {
    if (q.on_whole_space()) {
        require(q.dim() == psi.dim(), "projector dimension does not match the state");
        return clamp_probability(psi.amplitudes().dot(q.matrix() * psi.amplitudes()).real());
    }
    const int f = detail::factor_of_projector(psi.layout(), q);
    const cvector projected = apply_on_factor(psi.amplitudes(), psi.layout(), f, q.matrix());
    return clamp_probability(projected.squaredNorm());
}

inline double event_probability(const DensityOperator& rho, const Projector& q) {
    if (q.on_whole_space()) {
        require(q.dim() == rho.dim(), "projector dimension does not match the state");
        return clamp_probability(rho.matrix().cwiseProduct(q.matrix().transpose()).sum().real());
    }
    const int f = detail::factor_of_projector(rho.layout(), q);
    return clamp_probability(
        apply_on_factor_right(rho.matrix(), rho.layout(), f, q.matrix()).trace().real());
}

// Splits a composite pure state into normalized branches, one per beable
// value with weight above branch_tol. Values at or below the tolerance are
// treated as non-occurring and dropped.
inline std::vector<Branch> branch_decompose(const Ket& psi, const BeableObservable& beable) {
    const int f = psi.layout().index_of(beable.subsystem());
    require(beable.subsystem_dim() == psi.layout().dim(f),
            "beable dimension does not match subsystem '" + beable.subsystem() + "'");
    std::vector<Branch> branches;
    for (int i = 0; i < beable.value_count(); ++i) {
        const cvector projected =
            apply_on_factor(psi.amplitudes(), psi.layout(), f, beable.projectors()[static_cast<std::size_t>(i)].matrix());
        const double w = projected.squaredNorm();
        if (w <= branch_tol) continue;
        branches.push_back(Branch{w, Ket(projected / std::sqrt(w), psi.layout()), i});
    }
    require(!branches.empty(), "branch decomposition: every beable value has negligible weight");
    return branches;
}

// The branch set with its coherence discarded: sum_i w_i |psi_i><psi_i|.
// Trace equals the total retained weight.
inline DensityOperator decohered_mixture(const std::vector<Branch>& branches) {
    require(!branches.empty(), "decohered mixture: empty branch list");
    const SubsystemLayout& layout = branches.front().ket.layout();
    cmatrix m = cmatrix::Zero(layout.total_dim(), layout.total_dim());
    for (const Branch& b : branches) {
        require(b.ket.layout() == layout, "decohered mixture: branch layouts differ");
        m += b.weight * (b.ket.amplitudes() * b.ket.amplitudes().adjoint());
    }
    return DensityOperator(std::move(m), layout);
}

inline DensityOperator partial_trace(const DensityOperator& rho,
                                     const std::vector<std::string>& keep) {
    const SubsystemLayout& layout = rho.layout();
    require(!keep.empty(), "partial trace: keep set must be non-empty");
    const std::vector<int> kept = layout.factors_of(keep);
    require(kept.size() == keep.size(), "partial trace: duplicate labels in keep set");
    require(static_cast<int>(kept.size()) < layout.factor_count(),
            "partial trace: keep set must be a proper subset");

    std::vector<int> traced;
    for (int f = 0; f < layout.factor_count(); ++f)
        if (std::find(kept.begin(), kept.end(), f) == kept.end()) traced.push_back(f);

    const SubsystemLayout out_layout = layout.sublayout(kept);
    const int dk = out_layout.total_dim();
    int dt = 1;
    for (int f : traced) dt *= layout.dim(f);

    // Flat offsets contributed by kept and traced digit groups; a full index
    // is always offs_kept[a] + offs_traced[t].
    std::vector<int> offs_kept(static_cast<std::size_t>(dk), 0);
    for (int a = 0; a < dk; ++a) {
        int rest = a;
        for (std::size_t k = kept.size(); k-- > 0;) {
            const int d = layout.dim(kept[k]);
            offs_kept[static_cast<std::size_t>(a)] += (rest % d) * layout.stride(kept[k]);
            rest /= d;
        }
    }
    std::vector<int> offs_traced(static_cast<std::size_t>(dt), 0);
    for (int t = 0; t < dt; ++t) {
        int rest = t;
        for (std::size_t k = traced.size(); k-- > 0;) {
            const int d = layout.dim(traced[k]);
            offs_traced[static_cast<std::size_t>(t)] += (rest % d) * layout.stride(traced[k]);
            rest /= d;
        }
    }

    cmatrix out = cmatrix::Zero(dk, dk);
    for (int a = 0; a < dk; ++a)
        for (int b = 0; b < dk; ++b) {
            complexd sum = 0.0;
            for (int t = 0; t < dt; ++t)
                sum += rho.matrix()(offs_kept[static_cast<std::size_t>(a)] + offs_traced[static_cast<std::size_t>(t)],
                                    offs_kept[static_cast<std::size_t>(b)] + offs_traced[static_cast<std::size_t>(t)]);
            out(a, b) = sum;
        }
    return DensityOperator(std::move(out), out_layout);
}

struct ConditionalState {
    double weight;
    DensityOperator state;
};

// The subsystem state relative to the occurrence of q on another factor:
// weight w = <psi|q|psi>, state = w^-1 Tr_q( q |psi><psi| q ) over the
// remaining factors. Occurrence weight at or below branch_tol means the
// condition is impossible for this state and is an error.
inline ConditionalState conditional_subsystem_state(const Ket& psi, const Projector& q) {
    const int f = detail::factor_of_projector(psi.layout(), q);
    const cvector projected = apply_on_factor(psi.amplitudes(), psi.layout(), f, q.matrix());
    const double w = projected.squaredNorm();
    require(w > branch_tol, "conditional state: state is orthogonal to the conditioning event");
    const Ket branch(projected / std::sqrt(w), psi.layout());
    const std::vector<std::string> keep = psi.layout().complement({*q.subsystem()});
    return ConditionalState{w, partial_trace(pure_density(branch), keep)};
}

// Ideal-occurrence conditioning on the full state: rho -> (Tr rho q)^-1 q rho q.
inline ConditionalState luders_conditioning(const DensityOperator& rho, const Projector& q) {
    const double w = event_probability(rho, q);
    require(w > branch_tol, "conditioning: event has negligible probability in this state");
    cmatrix conditioned;
    if (q.on_whole_space()) {
        conditioned = q.matrix() * rho.matrix() * q.matrix();
    } else {
        const int f = detail::factor_of_projector(rho.layout(), q);
        conditioned = apply_on_factor_left(
            apply_on_factor_right(rho.matrix(), rho.layout(), f, q.matrix()), rho.layout(), f,
            q.matrix());
    }
    return ConditionalState{w, DensityOperator(conditioned / w, rho.layout())};
}

namespace detail {

inline std::pair<int, int> coincidence_factors(const SubsystemLayout& layout, const Projector& p1,
                                               const Projector& p2) {
    const int f1 = factor_of_projector(layout, p1);
    const int f2 = factor_of_projector(layout, p2);
    require(f1 != f2, "coincidence: projectors must act on distinct subsystems");
    return {f1, f2};
}

}  // namespace detail

// Joint occurrence probability of two single-subsystem events.
inline double coincidence_probability(const Ket& psi, const Projector& p1, const Projector& p2) {
    const auto [f1, f2] = detail::coincidence_factors(psi.layout(), p1, p2);
    const cvector v = apply_on_factor(apply_on_factor(psi.amplitudes(), psi.layout(), f2, p2.matrix()),
                                      psi.layout(), f1, p1.matrix());
    return clamp_probability(v.squaredNorm());
}

inline double coincidence_probability(const DensityOperator& rho, const Projector& p1,
                                      const Projector& p2) {
    const auto [f1, f2] = detail::coincidence_factors(rho.layout(), p1, p2);
    const cmatrix m = apply_on_factor_right(
        apply_on_factor_right(rho.matrix(), rho.layout(), f1, p1.matrix()), rho.layout(), f2,
        p2.matrix());
    return clamp_probability(m.trace().real());
}

// Difference between the coincidence probability in the pure state and in
// its decohered mixture over the beable's branches: the cross terms that
// witness surviving coherence. Zero whenever the events commute with every
// branch projector.
inline double interference_term(const Ket& psi, const BeableObservable& beable,
                                const Projector& p1, const Projector& p2) {
    const double pure = coincidence_probability(psi, p1, p2);
    const double mixed =
        coincidence_probability(decohered_mixture(branch_decompose(psi, beable)), p1, p2);
    return pure - mixed;
}

struct RelativeKet {
    double weight;
    Ket ket;
};

// Relative state for a rank-1 condition |phi><phi| on one subsystem: the
// normalized contraction of psi against phi, a pure state on the remaining
// factors.
inline RelativeKet everett_relative_state(const Ket& psi, const Ket& phi) {
    require(phi.layout().factor_count() == 1,
            "relative state: conditioning ket must live on a single subsystem");
    const std::string& label = phi.layout().label(0);
    const int f = psi.layout().index_of(label);
    require(phi.dim() == psi.layout().dim(f),
            "relative state: conditioning ket dimension does not match subsystem '" + label + "'");

    const int d = phi.dim();
    const int stride = psi.layout().stride(f);
    const int outer = psi.dim() / (d * stride);
    cvector out = cvector::Zero(psi.dim() / d);
    for (int p = 0; p < outer; ++p)
        for (int j = 0; j < d; ++j) {
            const complexd cj = std::conj(phi.amplitudes()(j));
            if (cj == complexd(0.0, 0.0)) continue;
            for (int s = 0; s < stride; ++s)
                out(p * stride + s) += cj * psi.amplitudes()((p * d + j) * stride + s);
        }
    const double w = out.squaredNorm();
    require(w > branch_tol, "relative state: state is orthogonal to the conditioning ket");

    std::vector<int> kept;
    for (int k = 0; k < psi.layout().factor_count(); ++k)
        if (k != f) kept.push_back(k);
    return RelativeKet{w, Ket(out / std::sqrt(w), psi.layout().sublayout(kept))};
}

}  // namespace reldec
