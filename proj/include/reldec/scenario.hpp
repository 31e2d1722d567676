/*
 * scenario.hpp — declarative object/subject scenarios.
 *
 * A scenario owns a composite state, a table of named beables, and an
 * ordered list of steps acting on a movable object/subject split:
 *
 *   shift    — move subsystems across the cut
 *   convert  — attach a beable to a subject-side subsystem
 *   measure  — decompose the object description relative to the subject's
 *              beable values and verify it statistically
 *   witness  — search for a coincidence pair exposing coherence inside the
 *              object, relative to the current (converted) subject
 *
 * Steps are grouped by a discussion id. Within one discussion the split is
 * fixed: shift/convert may only precede that discussion's measure/witness
 * steps, and a discussion id cannot reappear later. A run never pairs a
 * decoherence claim and a coherence claim under the same subject tag; specs
 * that would are rejected.
 */
#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "reldec/common.hpp"
#include "reldec/ensemble.hpp"
#include "reldec/qstate.hpp"
#include "reldec/rng.hpp"
#include "reldec/states.hpp"
#include "reldec/witness.hpp"

namespace reldec {

// ----------------------------------------------------------------------
// Split

enum class CutDirection { toward_object, toward_subject };

// An ordered partition of the scenario's subsystems into the described part
// (object) and the part carrying a beable (subject). The two sides always
// stay disjoint and jointly cover the layout.
struct Split {
    std::vector<std::string> object;
    std::vector<std::string> subject;
    std::optional<BeableObservable> subject_beable;
};

inline void validate_split(const Split& split, const SubsystemLayout& layout) {
    std::set<std::string> seen;
    for (const auto& l : split.object) {
        layout.index_of(l);
        require(seen.insert(l).second, "split: label '" + l + "' listed twice");
    }
    for (const auto& l : split.subject) {
        layout.index_of(l);
        require(seen.insert(l).second, "split: label '" + l + "' on both sides");
    }
    require(static_cast<int>(seen.size()) == layout.factor_count(),
            "split: object and subject must jointly cover the layout");
    if (split.subject_beable) {
        const auto& b = *split.subject_beable;
        require(std::find(split.subject.begin(), split.subject.end(), b.subsystem()) !=
                    split.subject.end(),
                "split: subject beable must act on a subject-side subsystem");
    }
}

inline Split shift_cut(Split split, const std::vector<std::string>& labels_to_move,
                       CutDirection direction, std::vector<std::string>* notes = nullptr) {
    auto& source = direction == CutDirection::toward_object ? split.subject : split.object;
    auto& target = direction == CutDirection::toward_object ? split.object : split.subject;
    for (const auto& label : labels_to_move) {
        auto it = std::find(source.begin(), source.end(), label);
        require(it != source.end(), "shift: label '" + label + "' is not on the source side");
        source.erase(it);
        target.push_back(label);
        if (direction == CutDirection::toward_object && split.subject_beable &&
            split.subject_beable->subsystem() == label) {
            split.subject_beable.reset();
            if (notes)
                notes->push_back("beable on '" + label +
                                 "' discarded: its subsystem moved to the object side");
        }
    }
    return split;
}

inline Split convert_environment_to_subject(Split split, BeableObservable beable,
                                            bool replace = false) {
    require(std::find(split.subject.begin(), split.subject.end(), beable.subsystem()) !=
                split.subject.end(),
            "convert: beable subsystem '" + beable.subsystem() + "' is not on the subject side");
    require(!split.subject_beable || replace,
            "convert: split already carries a subject beable (use replace)");
    split.subject_beable = std::move(beable);
    return split;
}

// ----------------------------------------------------------------------
// Scenario specification

// Observable given either as an explicit matrix or as a builtin name
// (sigma_x, sigma_y, sigma_z, identity), resolved against the object space.
struct ObservableSpec {
    std::string id;
    std::optional<cmatrix> matrix;
};

inline Observable resolve_observable(const ObservableSpec& spec, int dim) {
    if (spec.matrix) {
        require(spec.matrix->rows() == dim,
                "observable '" + spec.id + "': dimension " + std::to_string(spec.matrix->rows()) +
                    " does not match the object space dimension " + std::to_string(dim));
        return Observable(*spec.matrix, spec.id);
    }
    if (spec.id == "sigma_x" || spec.id == "sigma_y" || spec.id == "sigma_z") {
        require(dim == 2, "observable '" + spec.id + "': object space dimension must be 2");
        if (spec.id == "sigma_x") return Observable::pauli_x();
        if (spec.id == "sigma_y") return Observable::pauli_y();
        return Observable::pauli_z();
    }
    if (spec.id == "identity") return Observable::identity(dim);
    throw std::invalid_argument("observable '" + spec.id + "': unknown builtin name");
}

struct ScenarioStep {
    enum class Kind { shift, convert, measure, witness };
    Kind kind;
    std::string discussion;

    // shift
    std::vector<std::string> move;
    CutDirection direction = CutDirection::toward_subject;

    // convert
    std::string beable_name;
    bool replace = false;

    // measure
    std::optional<ObservableSpec> observable;
    std::optional<std::vector<double>> expected_weights;

    // witness
    std::string witness_beable;
    std::optional<std::string> p1_subsystem;
    int restarts = 16;
    int ascent_steps = 300;
    std::optional<double> min_gap;
    bool certify = false;
    int certificate_resolution = 64;
};

struct ScenarioSpec {
    std::string name;
    SubsystemLayout layout;
    Ket initial_state;
    std::vector<std::pair<std::string, BeableObservable>> beables;  // insertion order kept
    Split initial_split;
    std::vector<ScenarioStep> steps;
    std::int64_t default_shots = 100000;
    std::uint64_t default_seed = 1;

    const BeableObservable& beable(const std::string& name) const {
        for (const auto& [n, b] : beables)
            if (n == name) return b;
        throw std::invalid_argument("scenario: unknown beable '" + name + "'");
    }
};

struct RunOptions {
    std::optional<std::int64_t> shots;
    std::optional<std::uint64_t> seed;
    double z_crit = 3.0;
    int threads = 1;
};

// ----------------------------------------------------------------------
// Reports

struct SubjectTag {
    std::vector<std::string> subject_labels;
    std::string beable_name;       // empty when the subject is unconverted
    std::string beable_subsystem;  // empty when the subject is unconverted

    std::string to_string() const {
        std::string s;
        for (const auto& l : subject_labels) {
            if (!s.empty()) s += "+";
            s += l;
        }
        s += "/";
        s += beable_name.empty() ? "unconverted" : beable_name + "@" + beable_subsystem;
        return s;
    }
};

struct Assertion {
    std::string name;
    double observed;
    double expected;
    std::string comparator;  // "<=", ">=", "==", "~=" (within algebra_tol)
    bool pass;
};

struct MeasurePayload {
    SubjectTag subject;
    std::vector<std::string> object_labels;
    std::vector<double> weights;  // per beable value index; dropped values carry 0
    std::vector<int> surviving_indices;
    std::vector<cmatrix> conditional_objects;  // aligned with surviving_indices
    double recomposition_residual;  // max |sum_i w_i rho_i - Tr_subject rho|
    ConvergenceReport frequency;
    TheoremReport theorem;
};

struct WitnessPayload {
    SubjectTag subject;
    std::vector<std::string> object_labels;
    WitnessResult result;
};

struct SplitSnapshot {
    std::vector<std::string> object;
    std::vector<std::string> subject;
    std::string beable_name;  // empty if unconverted
};

struct StepReport {
    int index;
    ScenarioStep::Kind kind;
    std::string discussion;
    SplitSnapshot split_after;
    std::vector<std::string> notes;
    std::vector<Assertion> assertions;
    std::optional<MeasurePayload> measure;
    std::optional<WitnessPayload> witness;
};

struct Claim {
    std::string subject_tag;
    std::string kind;  // "decoherence" | "coherence"
    int step_index;
};

struct ScenarioReport {
    std::string name;
    std::int64_t shots;
    std::uint64_t seed;
    double z_crit;
    std::vector<StepReport> steps;
    std::vector<Claim> claims;
    bool pass;
};

// ----------------------------------------------------------------------
// Runner

namespace detail {

inline void validate_step_order(const std::vector<ScenarioStep>& steps) {
    std::set<std::string> closed;
    std::string current;
    bool claims_began = false;
    for (std::size_t k = 0; k < steps.size(); ++k) {
        const auto& step = steps[k];
        require(!step.discussion.empty(), "scenario: step " + std::to_string(k) +
                                              " is missing a discussion id");
        if (step.discussion != current) {
            require(closed.find(step.discussion) == closed.end(),
                    "scenario: discussion '" + step.discussion + "' reappears after being closed");
            if (!current.empty()) closed.insert(current);
            current = step.discussion;
            claims_began = false;
        }
        const bool is_claim = step.kind == ScenarioStep::Kind::measure ||
                              step.kind == ScenarioStep::Kind::witness;
        if (is_claim)
            claims_began = true;
        else
            require(!claims_began, "scenario: step " + std::to_string(k) +
                                       " changes the split mid-discussion '" + current + "'");
    }
    // One discussion cannot claim both decoherence and coherence: its split
    // (hence its subject tag) is fixed.
    std::map<std::string, std::set<ScenarioStep::Kind>> kinds;
    for (const auto& step : steps)
        if (step.kind == ScenarioStep::Kind::measure || step.kind == ScenarioStep::Kind::witness)
            kinds[step.discussion].insert(step.kind);
    for (const auto& [d, ks] : kinds)
        require(ks.size() == 1, "scenario: discussion '" + d +
                                    "' mixes measure and witness claims under one subject");
}

inline SubjectTag subject_tag_of(const Split& split) {
    SubjectTag tag;
    tag.subject_labels = split.subject;
    if (split.subject_beable) {
        tag.beable_subsystem = split.subject_beable->subsystem();
    }
    return tag;
}

}  // namespace detail

inline ScenarioReport run_scenario(const ScenarioSpec& spec, const RunOptions& options = {}) {
    detail::validate_step_order(spec.steps);
    validate_split(spec.initial_split, spec.layout);
    require(spec.initial_state.layout() == spec.layout,
            "scenario: initial state layout differs from the declared layout");

    const std::int64_t shots = options.shots.value_or(spec.default_shots);
    const std::uint64_t seed = options.seed.value_or(spec.default_seed);
    require(shots >= 1, "scenario: shots must be at least 1");

    ScenarioReport report{spec.name, shots, seed, options.z_crit, {}, {}, true};
    Split split = spec.initial_split;
    const Ket& state = spec.initial_state;
    // Beable names attached to the split, for tags and snapshots.
    std::string attached_beable_name;

    for (int k = 0; k < static_cast<int>(spec.steps.size()); ++k) {
        const ScenarioStep& step = spec.steps[static_cast<std::size_t>(k)];
        StepReport sr;
        sr.index = k;
        sr.kind = step.kind;
        sr.discussion = step.discussion;
        const std::uint64_t step_seed = derive_seed(seed, static_cast<std::uint64_t>(k));

        try {
            switch (step.kind) {
                case ScenarioStep::Kind::shift: {
                    const bool had_beable = split.subject_beable.has_value();
                    split = shift_cut(split, step.move, step.direction, &sr.notes);
                    if (had_beable && !split.subject_beable) attached_beable_name.clear();
                    validate_split(split, spec.layout);
                    break;
                }
                case ScenarioStep::Kind::convert: {
                    split = convert_environment_to_subject(split, spec.beable(step.beable_name),
                                                           step.replace);
                    attached_beable_name = step.beable_name;
                    break;
                }
                case ScenarioStep::Kind::measure: {
                    require(split.subject_beable.has_value(),
                            "measure: the subject carries no beable; convert first");
                    require(!split.object.empty(), "measure: the object side is empty");
                    const BeableObservable& beable = *split.subject_beable;
                    const std::vector<std::string> object =
                        spec.layout.ordered_subset(split.object);

                    MeasurePayload payload;
                    payload.subject = detail::subject_tag_of(split);
                    payload.subject.beable_name = attached_beable_name;
                    payload.object_labels = object;

                    const std::vector<Branch> branches = branch_decompose(state, beable);
                    payload.weights.assign(static_cast<std::size_t>(beable.value_count()), 0.0);
                    const DensityOperator rho_object = partial_trace(pure_density(state), object);
                    cmatrix recomposed =
                        cmatrix::Zero(rho_object.dim(), rho_object.dim());
                    for (const Branch& b : branches) {
                        payload.weights[static_cast<std::size_t>(b.value_index)] = b.weight;
                        payload.surviving_indices.push_back(b.value_index);
                        const DensityOperator cond = partial_trace(pure_density(b.ket), object);
                        payload.conditional_objects.push_back(cond.matrix());
                        recomposed += b.weight * cond.matrix();
                    }
                    payload.recomposition_residual = max_abs(recomposed - rho_object.matrix());

                    const Ensemble ensemble =
                        build_ensemble(state, beable, shots, step_seed, options.threads);
                    payload.frequency = frequency_report(ensemble, options.z_crit);
                    require(step.observable.has_value(), "measure: an observable is required");
                    const Observable c = resolve_observable(*step.observable, rho_object.dim());
                    payload.theorem = verify_conditional_state_theorem(
                        state, beable, c, object, shots, step_seed, options.z_crit, options.threads);

                    sr.assertions.push_back(Assertion{"recomposition_residual",
                                                      payload.recomposition_residual, algebra_tol,
                                                      "<=",
                                                      payload.recomposition_residual <= algebra_tol});
                    if (step.expected_weights) {
                        require(step.expected_weights->size() == payload.weights.size(),
                                "measure: expected_weights length does not match the beable");
                        for (std::size_t i = 0; i < payload.weights.size(); ++i) {
                            const double diff =
                                std::abs(payload.weights[i] - (*step.expected_weights)[i]);
                            sr.assertions.push_back(Assertion{"weight[" + std::to_string(i) + "]",
                                                              payload.weights[i],
                                                              (*step.expected_weights)[i], "~=",
                                                              diff <= algebra_tol});
                        }
                    }
                    sr.assertions.push_back(Assertion{"frequency_pass",
                                                      payload.frequency.pass ? 1.0 : 0.0, 1.0, "==",
                                                      payload.frequency.pass});
                    sr.assertions.push_back(Assertion{"theorem_pass", payload.theorem.pass ? 1.0 : 0.0,
                                                      1.0, "==", payload.theorem.pass});

                    report.claims.push_back(
                        Claim{payload.subject.to_string(), "decoherence", k});
                    sr.measure = std::move(payload);
                    break;
                }
                case ScenarioStep::Kind::witness: {
                    require(split.subject_beable.has_value(),
                            "witness: the subject carries no beable; convert first");
                    require(!split.object.empty(), "witness: the object side is empty");
                    const BeableObservable& witnessed = spec.beable(step.witness_beable);
                    require(std::find(split.object.begin(), split.object.end(),
                                      witnessed.subsystem()) != split.object.end(),
                            "witness: beable '" + step.witness_beable +
                                "' does not act inside the object");

                    // The subject is non-empty (it carries the beable), so the
                    // object is a proper subset; its reduced state must be pure
                    // for a branch decomposition to exist.
                    const std::vector<std::string> object =
                        spec.layout.ordered_subset(split.object);
                    const Ket object_state = partial_trace(pure_density(state), object).to_ket();

                    WitnessPayload payload{detail::subject_tag_of(split), object,
                                           optimize_witness(object_state, witnessed, step.restarts,
                                                            step.ascent_steps, step_seed,
                                                            step.p1_subsystem)};
                    payload.subject.beable_name = attached_beable_name;
                    if (step.certify)
                        payload.result.certificate = grid_certificate(
                            object_state, witnessed, step.certificate_resolution, step.p1_subsystem);

                    if (step.min_gap)
                        sr.assertions.push_back(Assertion{"witness_gap", payload.result.gap,
                                                          *step.min_gap, ">=",
                                                          payload.result.gap >= *step.min_gap});
                    if (payload.result.gap > algebra_tol)
                        report.claims.push_back(
                            Claim{payload.subject.to_string(), "coherence", k});
                    sr.witness = std::move(payload);
                    break;
                }
            }
        } catch (const std::exception& e) {
            throw std::invalid_argument("scenario '" + spec.name + "', step " + std::to_string(k) +
                                        " (" + step.discussion + "): " + e.what());
        }

        sr.split_after =
            SplitSnapshot{split.object, split.subject, attached_beable_name};
        for (const Assertion& a : sr.assertions)
            if (!a.pass) report.pass = false;
        report.steps.push_back(std::move(sr));
    }

    // No subject tag may carry both claim kinds in one run.
    std::map<std::string, std::set<std::string>> by_tag;
    for (const Claim& c : report.claims) by_tag[c.subject_tag].insert(c.kind);
    for (const auto& [tag, kinds] : by_tag)
        require(kinds.size() == 1, "scenario '" + spec.name + "': subject '" + tag +
                                       "' carries both a decoherence and a coherence claim");
    return report;
}

}  // namespace reldec
