#include "reldec/scenario.hpp"

#include <cmath>

#include "gtest/gtest.h"
#include "reldec/builtin_scenarios.hpp"
#include "reldec/serialize.hpp"

using namespace reldec;

namespace {

const double inv_sqrt2 = 1.0 / std::sqrt(2.0);

SubsystemLayout layout123() { return SubsystemLayout({2, 2, 2}, {"1", "2", "3"}); }

BeableObservable pointer_on(const std::string& label) {
    return BeableObservable::computational_basis(label, 2, {"up", "down"});
}

ScenarioSpec parse_builtin(const std::string& name) {
    return io::parse_scenario(io::json::parse(builtin_scenarios().at(name)));
}

RunOptions quick_run(std::int64_t shots = 20000) {
    RunOptions options;
    options.shots = shots;
    return options;
}

// Object {1,2}, subject {3} with a beable, plus a two-branch entangled state
// between 1 and 2; handy for claim-conflict checks.
ScenarioSpec coherent_object_spec() {
    cvector v = cvector::Zero(8);
    v(0) = inv_sqrt2;  // |0 0 0>
    v(6) = inv_sqrt2;  // |1 1 0>
    ScenarioSpec spec{"conflict-probe",
                      layout123(),
                      Ket(v, layout123()),
                      {{"pointer", pointer_on("2")}, {"observer", pointer_on("3")}},
                      Split{{"1", "2"}, {"3"}, std::nullopt},
                      {},
                      20000,
                      5};
    return spec;
}

}  // namespace

// ----------------------------------------------------------------------
// Split operations

TEST(split, broadening_the_object_moves_labels_across_the_cut) {
    Split split{{"1"}, {"2", "rest"}, std::nullopt};
    const Split after = shift_cut(split, {"2"}, CutDirection::toward_object);
    EXPECT_EQ(after.object, (std::vector<std::string>{"1", "2"}));
    EXPECT_EQ(after.subject, (std::vector<std::string>{"rest"}));
}

TEST(split, shifting_an_unrelated_label_keeps_the_beable) {
    Split split{{"1"}, {"2", "rest"}, pointer_on("2")};
    std::vector<std::string> notes;
    const Split after = shift_cut(split, {"rest"}, CutDirection::toward_object, &notes);
    EXPECT_TRUE(after.subject_beable.has_value());
    EXPECT_EQ(after.subject, (std::vector<std::string>{"2"}));
    EXPECT_TRUE(notes.empty());
}

TEST(split, moving_the_beable_subsystem_to_the_object_drops_it) {
    Split split{{"1"}, {"2", "rest"}, pointer_on("2")};
    std::vector<std::string> notes;
    const Split after = shift_cut(split, {"2"}, CutDirection::toward_object, &notes);
    EXPECT_FALSE(after.subject_beable.has_value());
    ASSERT_EQ(notes.size(), 1u);
    EXPECT_NE(notes[0].find("discarded"), std::string::npos);
}

TEST(split, moving_no_labels_is_the_identity) {
    Split split{{"1"}, {"2"}, pointer_on("2")};
    const Split after = shift_cut(split, {}, CutDirection::toward_subject);
    EXPECT_EQ(after.object, split.object);
    EXPECT_EQ(after.subject, split.subject);
    EXPECT_TRUE(after.subject_beable.has_value());
}

TEST(split, rejects_moving_labels_from_the_wrong_side) {
    Split split{{"1"}, {"2"}, std::nullopt};
    EXPECT_THROW(shift_cut(split, {"1"}, CutDirection::toward_object), std::invalid_argument);
    EXPECT_THROW(shift_cut(split, {"2"}, CutDirection::toward_subject), std::invalid_argument);
}

TEST(split, coverage_and_disjointness_survive_random_shifts) {
    const SubsystemLayout layout({2, 2, 2, 2}, {"a", "b", "c", "d"});
    Split split{{"a", "b"}, {"c", "d"}, std::nullopt};
    RngStream s = RngStream::root(31);
    for (int i = 0; i < 200; ++i) {
        const auto& source = (s.next_u64() & 1) ? split.object : split.subject;
        if (source.empty()) continue;
        const std::string label = source[s.next_u64() % source.size()];
        const CutDirection dir = std::find(split.object.begin(), split.object.end(), label) !=
                                         split.object.end()
                                     ? CutDirection::toward_subject
                                     : CutDirection::toward_object;
        split = shift_cut(split, {label}, dir);
        ASSERT_NO_THROW(validate_split(split, layout));
    }
}

TEST(convert, attaches_a_beable_to_the_subject_side) {
    Split split{{"1"}, {"2", "rest"}, std::nullopt};
    const Split after = convert_environment_to_subject(split, pointer_on("2"));
    ASSERT_TRUE(after.subject_beable.has_value());
    EXPECT_EQ(after.subject_beable->subsystem(), "2");
}

TEST(convert, rejects_object_side_beables) {
    Split split{{"1", "2"}, {"rest"}, std::nullopt};
    EXPECT_THROW(convert_environment_to_subject(split, pointer_on("2")), std::invalid_argument);
}

TEST(convert, replacement_must_be_explicit) {
    Split split{{"1"}, {"2", "3"}, pointer_on("2")};
    EXPECT_THROW(convert_environment_to_subject(split, pointer_on("3")), std::invalid_argument);
    const Split after = convert_environment_to_subject(split, pointer_on("3"), true);
    EXPECT_EQ(after.subject_beable->subsystem(), "3");
}

// ----------------------------------------------------------------------
// Step-order rules

TEST(step_order, rejects_split_changes_mid_discussion) {
    ScenarioSpec spec = coherent_object_spec();
    spec.steps = {
        ScenarioStep{.kind = ScenarioStep::Kind::convert, .discussion = "d", .beable_name = "observer"},
        ScenarioStep{.kind = ScenarioStep::Kind::witness, .discussion = "d", .witness_beable = "pointer",
                     .p1_subsystem = "1"},
        ScenarioStep{.kind = ScenarioStep::Kind::shift, .discussion = "d", .move = {"2"},
                     .direction = CutDirection::toward_subject},
    };
    EXPECT_THROW(run_scenario(spec, quick_run()), std::invalid_argument);
}

TEST(step_order, rejects_reopened_discussions) {
    ScenarioSpec spec = coherent_object_spec();
    spec.steps = {
        ScenarioStep{.kind = ScenarioStep::Kind::convert, .discussion = "a", .beable_name = "observer"},
        ScenarioStep{.kind = ScenarioStep::Kind::shift, .discussion = "b", .move = {},
                     .direction = CutDirection::toward_subject},
        ScenarioStep{.kind = ScenarioStep::Kind::shift, .discussion = "a", .move = {},
                     .direction = CutDirection::toward_subject},
    };
    EXPECT_THROW(run_scenario(spec, quick_run()), std::invalid_argument);
}

TEST(step_order, rejects_mixed_claims_in_one_discussion) {
    ScenarioSpec spec = coherent_object_spec();
    ScenarioStep measure{.kind = ScenarioStep::Kind::measure, .discussion = "d"};
    measure.observable = ObservableSpec{"identity", std::nullopt};
    spec.steps = {
        ScenarioStep{.kind = ScenarioStep::Kind::convert, .discussion = "d", .beable_name = "observer"},
        measure,
        ScenarioStep{.kind = ScenarioStep::Kind::witness, .discussion = "d", .witness_beable = "pointer",
                     .p1_subsystem = "1"},
    };
    EXPECT_THROW(run_scenario(spec, quick_run()), std::invalid_argument);
}

// The same subject tag may not end up claiming both decoherence and
// coherence across discussions either.
TEST(step_order, rejects_contradictory_claims_under_one_subject_tag) {
    ScenarioSpec spec = coherent_object_spec();
    ScenarioStep measure{.kind = ScenarioStep::Kind::measure, .discussion = "second"};
    measure.observable = ObservableSpec{"identity", std::nullopt};
    spec.steps = {
        ScenarioStep{.kind = ScenarioStep::Kind::convert, .discussion = "first",
                     .beable_name = "observer"},
        ScenarioStep{.kind = ScenarioStep::Kind::witness, .discussion = "first",
                     .witness_beable = "pointer", .p1_subsystem = "1"},
        measure,
    };
    try {
        run_scenario(spec, quick_run());
        FAIL() << "expected the contradictory claims to be rejected";
    } catch (const std::invalid_argument& e) {
        EXPECT_NE(std::string(e.what()).find("both a decoherence and a coherence claim"),
                  std::string::npos)
            << e.what();
    }
}

TEST(runner, measure_requires_a_converted_subject) {
    ScenarioSpec spec = coherent_object_spec();
    ScenarioStep measure{.kind = ScenarioStep::Kind::measure, .discussion = "d"};
    measure.observable = ObservableSpec{"identity", std::nullopt};
    spec.steps = {measure};
    EXPECT_THROW(run_scenario(spec, quick_run()), std::invalid_argument);
}

// ----------------------------------------------------------------------
// Built-in scenarios

TEST(builtin, measurement_scenario_passes) {
    const ScenarioReport r = run_scenario(parse_builtin("measurement"), quick_run());
    EXPECT_TRUE(r.pass);
    ASSERT_EQ(r.steps.size(), 3u);
    const auto& measure = r.steps[2];
    ASSERT_TRUE(measure.measure.has_value());
    EXPECT_NEAR(measure.measure->weights[0], 0.36, algebra_tol);
    EXPECT_NEAR(measure.measure->weights[1], 0.64, algebra_tol);
    EXPECT_LE(measure.measure->recomposition_residual, algebra_tol);
    EXPECT_TRUE(measure.measure->theorem.pass);
    EXPECT_TRUE(measure.measure->frequency.pass);
    ASSERT_EQ(r.claims.size(), 1u);
    EXPECT_EQ(r.claims[0].kind, "decoherence");
    EXPECT_EQ(r.claims[0].subject_tag, "2/pointer@2");
}

TEST(builtin, wigner_holds_decoherence_and_coherence_under_distinct_subjects) {
    const ScenarioReport r = run_scenario(parse_builtin("wigner"), quick_run());
    EXPECT_TRUE(r.pass);

    ASSERT_EQ(r.claims.size(), 2u);
    EXPECT_EQ(r.claims[0].kind, "decoherence");
    EXPECT_EQ(r.claims[0].subject_tag, "2+3/friend-sees@2");
    EXPECT_EQ(r.claims[1].kind, "coherence");
    EXPECT_EQ(r.claims[1].subject_tag, "3/wigner-sees@3");

    const auto& measure = r.steps[1];
    ASSERT_TRUE(measure.measure.has_value());
    EXPECT_EQ(measure.measure->object_labels, (std::vector<std::string>{"1"}));
    EXPECT_EQ(measure.measure->subject.beable_subsystem, "2");

    const auto& witness = r.steps[4];
    ASSERT_TRUE(witness.witness.has_value());
    EXPECT_EQ(witness.witness->object_labels, (std::vector<std::string>{"1", "2"}));
    EXPECT_GE(witness.witness->result.gap, 0.2);

    // The shift between the two views discards the friend's beable and says so.
    ASSERT_FALSE(r.steps[2].notes.empty());
    EXPECT_NE(r.steps[2].notes[0].find("discarded"), std::string::npos);
}

TEST(builtin, cat_alternatives_swap_roles_with_identical_weights) {
    const ScenarioReport ci = run_scenario(parse_builtin("cat-i"), quick_run());
    const ScenarioReport cii = run_scenario(parse_builtin("cat-ii"), quick_run());
    EXPECT_TRUE(ci.pass);
    EXPECT_TRUE(cii.pass);

    const MeasurePayload& mi = *ci.steps[1].measure;
    const MeasurePayload& mii = *cii.steps[1].measure;
    ASSERT_EQ(mi.weights.size(), mii.weights.size());
    for (std::size_t k = 0; k < mi.weights.size(); ++k)
        EXPECT_NEAR(mi.weights[k], mii.weights[k], algebra_tol);

    EXPECT_EQ(mi.object_labels, (std::vector<std::string>{"contraption"}));
    EXPECT_EQ(mi.subject.subject_labels, (std::vector<std::string>{"cat"}));
    EXPECT_EQ(mii.object_labels, (std::vector<std::string>{"cat"}));
    EXPECT_EQ(mii.subject.subject_labels, (std::vector<std::string>{"contraption"}));
}

TEST(builtin, zurek_skips_the_unoccupied_matter_distribution) {
    const ScenarioReport r = run_scenario(parse_builtin("zurek"), quick_run());
    EXPECT_TRUE(r.pass);
    const MeasurePayload& m = *r.steps[1].measure;
    EXPECT_NEAR(m.weights[0], 0.5, algebra_tol);
    EXPECT_NEAR(m.weights[1], 0.5, algebra_tol);
    EXPECT_NEAR(m.weights[2], 0.0, algebra_tol);
    ASSERT_EQ(m.theorem.entries.size(), 3u);
    EXPECT_TRUE(m.theorem.entries[2].skipped);
}

TEST(builtin, every_builtin_parses_and_passes) {
    for (const auto& [name, text] : builtin_scenarios()) {
        const ScenarioReport r = run_scenario(io::parse_scenario(io::json::parse(text)), quick_run(10000));
        EXPECT_TRUE(r.pass) << name;
    }
}

// ----------------------------------------------------------------------
// Determinism

TEST(determinism, identical_options_give_identical_report_bytes) {
    const ScenarioSpec spec = parse_builtin("wigner");
    const std::string a = io::to_json(run_scenario(spec, quick_run())).dump(2);
    const std::string b = io::to_json(run_scenario(spec, quick_run())).dump(2);
    EXPECT_EQ(a, b);
}

TEST(determinism, reports_do_not_depend_on_worker_count) {
    const ScenarioSpec spec = parse_builtin("measurement");
    RunOptions serial = quick_run();
    RunOptions parallel = quick_run();
    parallel.threads = 8;
    EXPECT_EQ(io::to_json(run_scenario(spec, serial)).dump(2),
              io::to_json(run_scenario(spec, parallel)).dump(2));
}

TEST(determinism, seed_changes_the_samples) {
    const ScenarioSpec spec = parse_builtin("measurement");
    RunOptions a = quick_run();
    a.seed = 1;
    RunOptions b = quick_run();
    b.seed = 2;
    EXPECT_NE(io::to_json(run_scenario(spec, a)).dump(2), io::to_json(run_scenario(spec, b)).dump(2));
}
