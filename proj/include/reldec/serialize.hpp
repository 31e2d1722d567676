/*
 * serialize.hpp — JSON spec parsing and report emission.
 *
 * Complex numbers travel as [re, im] pairs everywhere. Parsing validates
 * rather than repairs: a state given in branch form must already combine to
 * a normalized vector, and every diagnostic names the offending field.
 * Report emission is deterministic (ordered keys, shortest round-trip
 * number formatting, no timestamps), so identical runs produce identical
 * bytes.
 */
#pragma once

#include <charconv>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "reldec/ensemble.hpp"
#include "reldec/qstate.hpp"
#include "reldec/scenario.hpp"
#include "reldec/states.hpp"
#include "reldec/witness.hpp"

namespace reldec::io {

using json = nlohmann::ordered_json;

inline constexpr int schema_version = 1;

// ----------------------------------------------------------------------
// Parsing

[[noreturn]] inline void fail(const std::string& path, const std::string& what) {
    throw std::invalid_argument("spec field '" + path + "': " + what);
}

inline const json& member(const json& j, const std::string& key, const std::string& path) {
    if (!j.is_object()) fail(path, "expected an object");
    const auto it = j.find(key);
    if (it == j.end()) fail(path + "." + key, "missing");
    return *it;
}

inline const json* opt_member(const json& j, const std::string& key) {
    if (!j.is_object()) return nullptr;
    const auto it = j.find(key);
    return it == j.end() ? nullptr : &*it;
}

inline double parse_number(const json& j, const std::string& path) {
    if (!j.is_number()) fail(path, "expected a number");
    return j.get<double>();
}

inline complexd parse_complex(const json& j, const std::string& path) {
    if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number())
        fail(path, "expected a complex number as [re, im]");
    return complexd(j[0].get<double>(), j[1].get<double>());
}

inline cvector parse_amplitudes(const json& j, const std::string& path) {
    if (!j.is_array() || j.empty()) fail(path, "expected a non-empty array of [re, im] pairs");
    cvector v(static_cast<Eigen::Index>(j.size()));
    for (std::size_t i = 0; i < j.size(); ++i)
        v(static_cast<Eigen::Index>(i)) = parse_complex(j[i], path + "[" + std::to_string(i) + "]");
    return v;
}

inline cmatrix parse_matrix(const json& j, const std::string& path) {
    if (!j.is_array() || j.empty()) fail(path, "expected a non-empty array of matrix rows");
    const std::size_t rows = j.size();
    cmatrix m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(rows));
    for (std::size_t r = 0; r < rows; ++r) {
        const std::string row_path = path + "[" + std::to_string(r) + "]";
        if (!j[r].is_array() || j[r].size() != rows)
            fail(row_path, "expected a square matrix row of length " + std::to_string(rows));
        for (std::size_t c = 0; c < rows; ++c)
            m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
                parse_complex(j[r][c], row_path + "[" + std::to_string(c) + "]");
    }
    return m;
}

inline SubsystemLayout parse_layout(const json& j, const std::string& path) {
    const json& jl = member(j, "labels", path);
    const json& jd = member(j, "dims", path);
    if (!jl.is_array() || !jd.is_array() || jl.size() != jd.size())
        fail(path, "labels and dims must be arrays of equal length");
    std::vector<std::string> labels;
    std::vector<int> dims;
    for (std::size_t i = 0; i < jl.size(); ++i) {
        if (!jl[i].is_string()) fail(path + ".labels[" + std::to_string(i) + "]", "expected a string");
        if (!jd[i].is_number_integer()) fail(path + ".dims[" + std::to_string(i) + "]", "expected an integer");
        labels.push_back(jl[i].get<std::string>());
        dims.push_back(jd[i].get<int>());
    }
    try {
        return SubsystemLayout(std::move(dims), std::move(labels));
    } catch (const std::exception& e) {
        fail(path, e.what());
    }
}

// A state is either explicit amplitudes or a weighted branch form
// {weights, kets}; the latter is combined and then *validated* as
// normalized, never silently renormalized.
inline Ket parse_state(const json& j, const SubsystemLayout& layout, const std::string& path) {
    if (const json* ja = opt_member(j, "amplitudes")) {
        const cvector v = parse_amplitudes(*ja, path + ".amplitudes");
        try {
            return Ket(v, layout);
        } catch (const std::exception& e) {
            fail(path + ".amplitudes", e.what());
        }
    }
    if (const json* jb = opt_member(j, "branches")) {
        const json& jw = member(*jb, "weights", path + ".branches");
        const json& jk = member(*jb, "kets", path + ".branches");
        if (!jw.is_array() || !jk.is_array() || jw.size() != jk.size() || jw.empty())
            fail(path + ".branches", "weights and kets must be non-empty arrays of equal length");
        std::vector<double> weights;
        std::vector<Ket> kets;
        for (std::size_t i = 0; i < jw.size(); ++i) {
            weights.push_back(parse_number(jw[i], path + ".branches.weights[" + std::to_string(i) + "]"));
            const std::string ket_path = path + ".branches.kets[" + std::to_string(i) + "]";
            const cvector v = parse_amplitudes(jk[i], ket_path);
            try {
                kets.push_back(Ket(v, layout));
            } catch (const std::exception& e) {
                fail(ket_path, e.what());
            }
        }
        try {
            return ket_from_branches(layout, weights, kets);
        } catch (const std::exception& e) {
            fail(path + ".branches", e.what());
        }
    }
    fail(path, "expected either 'amplitudes' or 'branches'");
}

inline BeableObservable parse_beable(const json& j, const SubsystemLayout& layout,
                                     const std::string& path) {
    const json& js = member(j, "subsystem", path);
    if (!js.is_string()) fail(path + ".subsystem", "expected a subsystem label");
    const std::string subsystem = js.get<std::string>();
    if (!layout.has_label(subsystem)) fail(path + ".subsystem", "unknown label '" + subsystem + "'");
    const int dim = layout.dim(layout.index_of(subsystem));

    std::vector<std::string> values;
    if (const json* jv = opt_member(j, "values")) {
        if (!jv->is_array()) fail(path + ".values", "expected an array of strings");
        for (const auto& v : *jv) values.push_back(v.get<std::string>());
    }

    const json& jp = member(j, "projectors", path);
    try {
        if (jp.is_string() && jp.get<std::string>() == "computational-basis")
            return BeableObservable::computational_basis(subsystem, dim, std::move(values));
        if (const json* jg = opt_member(jp, "basis_groups")) {
            // Coarse-grained basis intervals: each group is a set of basis
            // indices merged into one projector.
            std::vector<Projector> ps;
            for (std::size_t g = 0; g < jg->size(); ++g) {
                cmatrix m = cmatrix::Zero(dim, dim);
                for (const auto& idx : (*jg)[g]) {
                    const int k = idx.get<int>();
                    if (k < 0 || k >= dim)
                        fail(path + ".projectors.basis_groups[" + std::to_string(g) + "]",
                             "basis index out of range");
                    m(k, k) = 1.0;
                }
                ps.emplace_back(std::move(m));
            }
            return BeableObservable(subsystem, std::move(ps), std::move(values));
        }
        if (jp.is_array()) {
            std::vector<Projector> ps;
            for (std::size_t i = 0; i < jp.size(); ++i)
                ps.emplace_back(parse_matrix(jp[i], path + ".projectors[" + std::to_string(i) + "]"));
            return BeableObservable(subsystem, std::move(ps), std::move(values));
        }
    } catch (const std::invalid_argument& e) {
        if (std::string(e.what()).rfind("spec field", 0) == 0) throw;
        fail(path, e.what());
    }
    fail(path + ".projectors",
         "expected 'computational-basis', {'basis_groups': ...} or an array of matrices");
}

inline ObservableSpec parse_observable_spec(const json& j, const std::string& path) {
    ObservableSpec spec;
    const json& ji = member(j, "id", path);
    if (!ji.is_string()) fail(path + ".id", "expected a string");
    spec.id = ji.get<std::string>();
    if (const json* jm = opt_member(j, "matrix")) spec.matrix = parse_matrix(*jm, path + ".matrix");
    return spec;
}

inline CutDirection parse_direction(const json& j, const std::string& path) {
    if (j.is_string() && j.get<std::string>() == "toward-object") return CutDirection::toward_object;
    if (j.is_string() && j.get<std::string>() == "toward-subject") return CutDirection::toward_subject;
    fail(path, "expected 'toward-object' or 'toward-subject'");
}

inline std::vector<std::string> parse_label_list(const json& j, const std::string& path) {
    if (!j.is_array()) fail(path, "expected an array of subsystem labels");
    std::vector<std::string> out;
    for (const auto& l : j) {
        if (!l.is_string()) fail(path, "expected an array of subsystem labels");
        out.push_back(l.get<std::string>());
    }
    return out;
}

inline ScenarioStep parse_step(const json& j, const std::string& path) {
    ScenarioStep step;
    const json& jop = member(j, "op", path);
    const std::string op = jop.is_string() ? jop.get<std::string>() : "";
    const json& jd = member(j, "discussion", path);
    if (!jd.is_string()) fail(path + ".discussion", "expected a string");
    step.discussion = jd.get<std::string>();

    if (op == "shift") {
        step.kind = ScenarioStep::Kind::shift;
        step.move = parse_label_list(member(j, "move", path), path + ".move");
        step.direction = parse_direction(member(j, "direction", path), path + ".direction");
    } else if (op == "convert") {
        step.kind = ScenarioStep::Kind::convert;
        step.beable_name = member(j, "beable", path).get<std::string>();
        if (const json* jr = opt_member(j, "replace")) step.replace = jr->get<bool>();
    } else if (op == "measure") {
        step.kind = ScenarioStep::Kind::measure;
        step.observable = parse_observable_spec(member(j, "observable", path), path + ".observable");
        if (const json* ja = opt_member(j, "assert")) {
            if (const json* jw = opt_member(*ja, "expected_weights")) {
                std::vector<double> w;
                for (std::size_t i = 0; i < jw->size(); ++i)
                    w.push_back(parse_number((*jw)[i],
                                             path + ".assert.expected_weights[" + std::to_string(i) + "]"));
                step.expected_weights = std::move(w);
            }
        }
    } else if (op == "witness") {
        step.kind = ScenarioStep::Kind::witness;
        step.witness_beable = member(j, "beable", path).get<std::string>();
        if (const json* jp = opt_member(j, "p1_subsystem")) step.p1_subsystem = jp->get<std::string>();
        if (const json* jr = opt_member(j, "restarts")) step.restarts = jr->get<int>();
        if (const json* js = opt_member(j, "steps")) step.ascent_steps = js->get<int>();
        if (const json* jc = opt_member(j, "certify")) step.certify = jc->get<bool>();
        if (const json* jr = opt_member(j, "resolution")) step.certificate_resolution = jr->get<int>();
        if (const json* ja = opt_member(j, "assert"))
            if (const json* jg = opt_member(*ja, "min_gap"))
                step.min_gap = parse_number(*jg, path + ".assert.min_gap");
    } else {
        fail(path + ".op", "expected one of shift, convert, measure, witness");
    }
    return step;
}

inline ScenarioSpec parse_scenario(const json& j) {
    const std::string root = "scenario";
    SubsystemLayout layout = parse_layout(member(j, "layout", root), root + ".layout");
    Ket state = parse_state(member(j, "state", root), layout, root + ".state");

    ScenarioSpec spec{member(j, "name", root).get<std::string>(),
                      layout,
                      std::move(state),
                      {},
                      Split{},
                      {},
                      100000,
                      1};

    const json& jb = member(j, "beables", root);
    if (!jb.is_object() || jb.empty()) fail(root + ".beables", "expected a non-empty object");
    for (const auto& [name, def] : jb.items())
        spec.beables.emplace_back(name, parse_beable(def, layout, root + ".beables." + name));

    const json& jsplit = member(j, "initial_split", root);
    spec.initial_split.object =
        parse_label_list(member(jsplit, "object", root + ".initial_split"), root + ".initial_split.object");
    spec.initial_split.subject =
        parse_label_list(member(jsplit, "subject", root + ".initial_split"), root + ".initial_split.subject");

    if (const json* js = opt_member(j, "sampling")) {
        if (const json* jn = opt_member(*js, "shots")) spec.default_shots = jn->get<std::int64_t>();
        if (const json* jseed = opt_member(*js, "seed")) spec.default_seed = jseed->get<std::uint64_t>();
    }

    const json& jsteps = member(j, "steps", root);
    if (!jsteps.is_array() || jsteps.empty()) fail(root + ".steps", "expected a non-empty array");
    for (std::size_t k = 0; k < jsteps.size(); ++k)
        spec.steps.push_back(parse_step(jsteps[k], root + ".steps[" + std::to_string(k) + "]"));
    return spec;
}

// Shared input for the verify-theorem / frequencies / witness commands.
struct ProblemSpec {
    SubsystemLayout layout;
    Ket state;
    BeableObservable beable;
    std::optional<ObservableSpec> observable;
    std::optional<std::vector<std::string>> keep;
    std::optional<std::string> p1_subsystem;
};

inline ProblemSpec parse_problem(const json& j) {
    const std::string root = "problem";
    SubsystemLayout layout = parse_layout(member(j, "layout", root), root + ".layout");
    Ket state = parse_state(member(j, "state", root), layout, root + ".state");
    BeableObservable beable = parse_beable(member(j, "beable", root), layout, root + ".beable");
    ProblemSpec spec{std::move(layout), std::move(state), std::move(beable), {}, {}, {}};
    if (const json* jo = opt_member(j, "observable"))
        spec.observable = parse_observable_spec(*jo, root + ".observable");
    if (const json* jk = opt_member(j, "keep"))
        spec.keep = parse_label_list(*jk, root + ".keep");
    if (const json* jp = opt_member(j, "p1_subsystem")) spec.p1_subsystem = jp->get<std::string>();
    return spec;
}

// ----------------------------------------------------------------------
// Emission

inline json complex_to_json(const complexd& c) { return json::array({c.real(), c.imag()}); }

inline json vector_to_json(const cvector& v) {
    json out = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(complex_to_json(v(i)));
    return out;
}

inline json matrix_to_json(const cmatrix& m) {
    json out = json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        json row = json::array();
        for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(complex_to_json(m(r, c)));
        out.push_back(std::move(row));
    }
    return out;
}

inline json to_json(const ConvergenceReport& r) {
    json entries = json::array();
    for (const auto& e : r.entries)
        entries.push_back(json{{"index", e.value_index},
                               {"value", e.value_name},
                               {"count", e.count},
                               {"frequency", e.frequency},
                               {"weight", e.weight},
                               {"z", e.z}});
    return json{{"n", r.n},   {"seed", r.seed},        {"zcrit", r.z_crit},
                {"pass", r.pass}, {"entries", std::move(entries)}};
}

inline json to_json(const TheoremReport& r) {
    json entries = json::array();
    for (const auto& e : r.entries) {
        json je{{"index", e.value_index}, {"value", e.value_name}, {"weight", e.weight},
                {"count", e.count},       {"skipped", e.skipped}};
        if (e.skipped) {
            je["note"] = e.note;
        } else {
            je["mean"] = e.mean;
            je["stderr"] = e.standard_error;
            je["theory"] = e.theory;
            je["pass"] = e.pass;
        }
        entries.push_back(std::move(je));
    }
    return json{{"observable", r.observable_id},
                {"n", r.n},
                {"seed", r.seed},
                {"zcrit", r.z_crit},
                {"pass", r.pass},
                {"note", r.note},
                {"entries", std::move(entries)}};
}

inline json to_json(const WitnessResult& r) {
    json out{{"gap", r.gap}, {"evaluations", r.evaluations}};
    if (r.certificate) out["certificate"] = *r.certificate;
    if (!r.note.empty()) out["note"] = r.note;
    out["p1"] = json{{"subsystem", r.p1.subsystem() ? json(*r.p1.subsystem()) : json()},
                     {"matrix", matrix_to_json(r.p1.matrix())}};
    out["p2"] = json{{"subsystem", r.p2.subsystem() ? json(*r.p2.subsystem()) : json()},
                     {"matrix", matrix_to_json(r.p2.matrix())}};
    return out;
}

inline json to_json(const SubjectTag& tag) {
    return json{{"labels", tag.subject_labels},
                {"beable", tag.beable_name},
                {"beable_subsystem", tag.beable_subsystem},
                {"tag", tag.to_string()}};
}

inline const char* step_kind_name(ScenarioStep::Kind kind) {
    switch (kind) {
        case ScenarioStep::Kind::shift: return "shift";
        case ScenarioStep::Kind::convert: return "convert";
        case ScenarioStep::Kind::measure: return "measure";
        case ScenarioStep::Kind::witness: return "witness";
    }
    return "?";
}

inline json to_json(const StepReport& sr) {
    json out{{"index", sr.index},
             {"op", step_kind_name(sr.kind)},
             {"discussion", sr.discussion},
             {"split", json{{"object", sr.split_after.object},
                            {"subject", sr.split_after.subject},
                            {"beable", sr.split_after.beable_name}}}};
    if (!sr.notes.empty()) out["notes"] = sr.notes;
    if (!sr.assertions.empty()) {
        json asserts = json::array();
        for (const auto& a : sr.assertions)
            asserts.push_back(json{{"name", a.name},
                                   {"observed", a.observed},
                                   {"expected", a.expected},
                                   {"comparator", a.comparator},
                                   {"pass", a.pass}});
        out["assertions"] = std::move(asserts);
    }
    if (sr.measure) {
        const MeasurePayload& m = *sr.measure;
        json conditional = json::array();
        for (const auto& c : m.conditional_objects) conditional.push_back(matrix_to_json(c));
        out["measure"] = json{{"subject", to_json(m.subject)},
                              {"object", m.object_labels},
                              {"weights", m.weights},
                              {"surviving_indices", m.surviving_indices},
                              {"conditional_states", std::move(conditional)},
                              {"recomposition_residual", m.recomposition_residual},
                              {"frequency", to_json(m.frequency)},
                              {"theorem", to_json(m.theorem)}};
    }
    if (sr.witness) {
        out["witness"] = json{{"subject", to_json(sr.witness->subject)},
                              {"object", sr.witness->object_labels},
                              {"result", to_json(sr.witness->result)}};
    }
    return out;
}

inline json to_json(const ScenarioReport& r) {
    json steps = json::array();
    for (const auto& s : r.steps) steps.push_back(to_json(s));
    json claims = json::array();
    for (const auto& c : r.claims)
        claims.push_back(json{{"subject", c.subject_tag}, {"kind", c.kind}, {"step", c.step_index}});
    return json{{"schema", schema_version},
                {"report", "scenario"},
                {"name", r.name},
                {"shots", r.shots},
                {"seed", r.seed},
                {"zcrit", r.z_crit},
                {"pass", r.pass},
                {"steps", std::move(steps)},
                {"claims", std::move(claims)}};
}

// Top-level envelopes for the single-purpose commands.
inline json envelope(const char* kind, json body) {
    json out{{"schema", schema_version}, {"report", kind}};
    for (auto& [k, v] : body.items()) out[k] = std::move(v);
    return out;
}

// ----------------------------------------------------------------------
// CSV summaries: one row per assertion-like quantity.

inline std::string csv_number(double x) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), x);
    return std::string(buf, res.ptr);
}

inline void csv_row(std::string& out, std::initializer_list<std::string> cells) {
    bool first = true;
    for (const auto& c : cells) {
        if (!first) out += ",";
        out += c;
        first = false;
    }
    out += "\n";
}

inline std::string to_csv(const ConvergenceReport& r) {
    std::string out;
    csv_row(out, {"kind", "item", "assertion", "observed", "expected", "pass"});
    for (const auto& e : r.entries)
        csv_row(out, {"frequencies", e.value_name, "abs_z_within_zcrit", csv_number(std::abs(e.z)),
                      csv_number(r.z_crit), std::abs(e.z) <= r.z_crit ? "true" : "false"});
    return out;
}

inline std::string to_csv(const TheoremReport& r) {
    std::string out;
    csv_row(out, {"kind", "item", "assertion", "observed", "expected", "pass"});
    for (const auto& e : r.entries) {
        if (e.skipped) {
            csv_row(out, {"theorem", e.value_name, "skipped:" + e.note, "", "", "true"});
        } else {
            csv_row(out, {"theorem", e.value_name, "mean_within_tolerance",
                          csv_number(std::abs(e.mean - e.theory)),
                          csv_number(r.z_crit * e.standard_error), e.pass ? "true" : "false"});
        }
    }
    return out;
}

inline std::string to_csv(const WitnessResult& r) {
    std::string out;
    csv_row(out, {"kind", "item", "assertion", "observed", "expected", "pass"});
    csv_row(out, {"witness", "gap", "reported", csv_number(r.gap), "", "true"});
    if (r.certificate)
        csv_row(out, {"witness", "certificate", "grid_lower_bound", csv_number(*r.certificate), "", "true"});
    return out;
}

inline std::string to_csv(const ScenarioReport& r) {
    std::string out;
    csv_row(out, {"step", "op", "discussion", "assertion", "observed", "expected", "pass"});
    for (const auto& s : r.steps)
        for (const auto& a : s.assertions)
            csv_row(out, {std::to_string(s.index), step_kind_name(s.kind), s.discussion, a.name,
                          csv_number(a.observed), csv_number(a.expected), a.pass ? "true" : "false"});
    return out;
}

}  // namespace reldec::io
