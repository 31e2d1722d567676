/*
 * states.hpp — value types of the state layer.
 *
 * Ket, DensityOperator, Projector, BeableObservable and Branch are immutable
 * after construction and validate their defining invariants up front, so the
 * operations in qstate.hpp can assume well-formed inputs.
 */
#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "reldec/common.hpp"
#include "reldec/layout.hpp"

namespace reldec {

class Ket {
public:
    Ket(cvector amplitudes, SubsystemLayout layout)
        : amps_(std::move(amplitudes)), layout_(std::move(layout)) {
        require(amps_.size() == layout_.total_dim(),
                "ket: amplitude count does not match the layout dimension");
        const double n2 = amps_.squaredNorm();
        require(std::abs(n2 - 1.0) <= algebra_tol,
                "ket: squared norm is " + std::to_string(n2) + ", expected 1");
    }

    const cvector& amplitudes() const { return amps_; }
    const SubsystemLayout& layout() const { return layout_; }
    int dim() const { return static_cast<int>(amps_.size()); }

    complexd overlap(const Ket& other) const {
        require(layout_ == other.layout_, "ket: overlap requires identical layouts");
        return amps_.dot(other.amps_);  // conjugates *this
    }

private:
    cvector amps_;
    SubsystemLayout layout_;
};

class DensityOperator {
public:
    DensityOperator(cmatrix matrix, SubsystemLayout layout)
        : m_(std::move(matrix)), layout_(std::move(layout)) {
        require(m_.rows() == layout_.total_dim() && m_.cols() == layout_.total_dim(),
                "density operator: matrix shape does not match the layout dimension");
        require(is_hermitian(m_), "density operator: matrix is not Hermitian");
        // Mixtures over a branch set may lose the weight of dropped
        // (below-branch_tol) branches, so the trace check budgets for it.
        const double trace_tol = algebra_tol + layout_.total_dim() * branch_tol;
        require(std::abs(m_.trace().real() - 1.0) <= trace_tol &&
                    std::abs(m_.trace().imag()) <= trace_tol,
                "density operator: trace is not 1");
    }

    const cmatrix& matrix() const { return m_; }
    const SubsystemLayout& layout() const { return layout_; }
    int dim() const { return static_cast<int>(m_.rows()); }

    // Smallest eigenvalue; positive semidefiniteness is asserted as a
    // floor at -algebra_tol to tolerate rounding.
    double min_eigenvalue() const {
        Eigen::SelfAdjointEigenSolver<cmatrix> es(m_, Eigen::EigenvaluesOnly);
        return es.eigenvalues().minCoeff();
    }

    double purity() const { return (m_ * m_).trace().real(); }

    // Extracts the state vector of a pure density operator (largest
    // eigenvalue within algebra_tol of 1). The phase is fixed by making the
    // largest-magnitude amplitude real and positive, so the result is
    // deterministic.
    Ket to_ket() const {
        Eigen::SelfAdjointEigenSolver<cmatrix> es(m_);
        const auto& vals = es.eigenvalues();
        int top = static_cast<int>(vals.size()) - 1;  // ascending order
        require(std::abs(vals(top) - 1.0) <= 1e2 * algebra_tol,
                "density operator: not a pure state (top eigenvalue " +
                    std::to_string(vals(top)) + ")");
        cvector v = es.eigenvectors().col(top);
        int lead = 0;
        for (int i = 1; i < v.size(); ++i)
            if (std::abs(v(i)) > std::abs(v(lead))) lead = i;
        v *= std::conj(v(lead)) / std::abs(v(lead));
        v /= v.norm();
        return Ket(std::move(v), layout_);
    }

private:
    cmatrix m_;
    SubsystemLayout layout_;
};

inline DensityOperator pure_density(const Ket& psi) {
    return DensityOperator(psi.amplitudes() * psi.amplitudes().adjoint(), psi.layout());
}

// A projector attached to one named subsystem, or to the whole space when
// the subsystem is left empty. Idempotence and hermiticity are checked once
// here; downstream operations rely on it.
class Projector {
public:
    Projector(cmatrix matrix, std::optional<std::string> subsystem = std::nullopt)
        : m_(std::move(matrix)), subsystem_(std::move(subsystem)) {
        require(m_.rows() == m_.cols() && m_.rows() >= 1, "projector: matrix must be square");
        require(is_hermitian(m_), "projector: matrix is not Hermitian");
        require(max_abs(m_ * m_ - m_) <= algebra_tol, "projector: matrix is not idempotent");
    }

    const cmatrix& matrix() const { return m_; }
    const std::optional<std::string>& subsystem() const { return subsystem_; }
    bool on_whole_space() const { return !subsystem_.has_value(); }
    int dim() const { return static_cast<int>(m_.rows()); }

    static Projector onto_basis_state(int dim, int k, std::optional<std::string> subsystem = std::nullopt) {
        cmatrix m = cmatrix::Zero(dim, dim);
        m(k, k) = 1.0;
        return Projector(std::move(m), std::move(subsystem));
    }

    static Projector onto_ket(const cvector& v, std::optional<std::string> subsystem = std::nullopt) {
        require(std::abs(v.squaredNorm() - 1.0) <= algebra_tol,
                "projector: defining vector must be normalized");
        return Projector(v * v.adjoint(), std::move(subsystem));
    }

private:
    cmatrix m_;
    std::optional<std::string> subsystem_;
};

// A complete family of mutually orthogonal projectors on one subsystem;
// the discrete value set an individual system can carry.
class BeableObservable {
public:
    BeableObservable(std::string subsystem, std::vector<Projector> projectors,
                     std::vector<std::string> value_names = {})
        : subsystem_(std::move(subsystem)),
          projectors_(std::move(projectors)),
          value_names_(std::move(value_names)) {
        require(projectors_.size() >= 2, "beable: needs at least two projectors");
        const int d = projectors_.front().dim();
        cmatrix sum = cmatrix::Zero(d, d);
        for (std::size_t i = 0; i < projectors_.size(); ++i) {
            require(projectors_[i].dim() == d, "beable: projector dimensions differ");
            for (std::size_t j = i + 1; j < projectors_.size(); ++j)
                require(max_abs(projectors_[i].matrix() * projectors_[j].matrix()) <= algebra_tol,
                        "beable: projectors " + std::to_string(i) + " and " + std::to_string(j) +
                            " are not orthogonal");
            sum += projectors_[i].matrix();
        }
        require(max_abs(sum - cmatrix::Identity(d, d)) <= algebra_tol,
                "beable: projectors do not sum to the identity");
        if (value_names_.empty()) {
            for (std::size_t i = 0; i < projectors_.size(); ++i)
                value_names_.push_back("v" + std::to_string(i));
        }
        require(value_names_.size() == projectors_.size(),
                "beable: one value name per projector required");
    }

    const std::string& subsystem() const { return subsystem_; }
    const std::vector<Projector>& projectors() const { return projectors_; }
    const std::vector<std::string>& value_names() const { return value_names_; }
    int value_count() const { return static_cast<int>(projectors_.size()); }
    int subsystem_dim() const { return projectors_.front().dim(); }

    // Convenience: the value projector bound to this beable's subsystem.
    Projector value_projector(int index) const {
        return Projector(projectors_.at(static_cast<std::size_t>(index)).matrix(), subsystem_);
    }

    // The full computational basis of one subsystem as a beable.
    static BeableObservable computational_basis(std::string subsystem, int dim,
                                                std::vector<std::string> value_names = {}) {
        std::vector<Projector> ps;
        ps.reserve(static_cast<std::size_t>(dim));
        for (int k = 0; k < dim; ++k) ps.push_back(Projector::onto_basis_state(dim, k));
        return BeableObservable(std::move(subsystem), std::move(ps), std::move(value_names));
    }

private:
    std::string subsystem_;
    std::vector<Projector> projectors_;
    std::vector<std::string> value_names_;
};

// One term of a beable-labelled decomposition: the renormalized projection
// of a composite state onto one value, with its statistical weight.
struct Branch {
    double weight;
    Ket ket;
    int value_index;
};

// A Hermitian observable with a purely discrete spectrum, as measured on
// conditional subsystem states. `id` tags measurement records.
class Observable {
public:
    Observable(cmatrix matrix, std::string id)
        : m_(std::move(matrix)), id_(std::move(id)) {
        require(m_.rows() == m_.cols() && m_.rows() >= 1, "observable: matrix must be square");
        require(is_hermitian(m_), "observable: matrix is not Hermitian");
    }

    const cmatrix& matrix() const { return m_; }
    const std::string& id() const { return id_; }
    int dim() const { return static_cast<int>(m_.rows()); }

    static Observable pauli_x() { cmatrix m(2, 2); m << 0, 1, 1, 0; return Observable(m, "sigma_x"); }
    static Observable pauli_y() {
        cmatrix m(2, 2);
        m << complexd(0, 0), complexd(0, -1), complexd(0, 1), complexd(0, 0);
        return Observable(m, "sigma_y");
    }
    static Observable pauli_z() { cmatrix m(2, 2); m << 1, 0, 0, -1; return Observable(m, "sigma_z"); }
    static Observable identity(int dim) { return Observable(cmatrix::Identity(dim, dim), "identity"); }

private:
    cmatrix m_;
    std::string id_;
};

}  // namespace reldec
