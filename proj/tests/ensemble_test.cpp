#include "reldec/ensemble.hpp"

#include <cmath>
#include <random>

#include "gtest/gtest.h"
#include "support/oracles.hpp"

using namespace reldec;
namespace oracle = reldec::testing;

namespace {

const double inv_sqrt2 = 1.0 / std::sqrt(2.0);

SubsystemLayout layout12() { return SubsystemLayout({2, 2}, {"1", "2"}); }

Ket bell_state() {
    cvector v = cvector::Zero(4);
    v(0) = inv_sqrt2;
    v(3) = inv_sqrt2;
    return Ket(v, layout12());
}

// sqrt(w)|00> + sqrt(1-w)|11>
Ket weighted_pair(double w) {
    cvector v = cvector::Zero(4);
    v(0) = std::sqrt(w);
    v(3) = std::sqrt(1.0 - w);
    return Ket(v, layout12());
}

BeableObservable pointer_beable() {
    return BeableObservable::computational_basis("2", 2, {"up", "down"});
}

}  // namespace

// ----------------------------------------------------------------------
// sample_beable_value

TEST(sampling, eigenstate_always_gives_its_index) {
    const Ket psi = basis_ket(layout12(), 3);  // |1 1>
    RngStream s = RngStream::root(5);
    for (int i = 0; i < 200; ++i) EXPECT_EQ(sample_beable_value(psi, pointer_beable(), s), 1);
}

TEST(sampling, bell_state_long_run_frequency_is_half) {
    RngStream s = RngStream::root(12);
    const Ket psi = bell_state();
    const BeableObservable beable = pointer_beable();
    int ups = 0;
    const int n = 100000;
    for (int i = 0; i < n; ++i)
        if (sample_beable_value(psi, beable, s) == 0) ++ups;
    EXPECT_NEAR(static_cast<double>(ups) / n, 0.5, 3.0 * std::sqrt(0.25 / n));
}

TEST(sampling, skewed_weights_within_binomial_error) {
    RngStream s = RngStream::root(77);
    const Ket psi = weighted_pair(0.9);
    const BeableObservable beable = pointer_beable();
    int first = 0;
    const int n = 100000;
    for (int i = 0; i < n; ++i)
        if (sample_beable_value(psi, beable, s) == 0) ++first;
    EXPECT_NEAR(static_cast<double>(first) / n, 0.9, 3.0 * std::sqrt(0.09 / n));
}

// ----------------------------------------------------------------------
// build_ensemble

TEST(ensemble, single_member_is_valid) {
    const Ensemble e = build_ensemble(bell_state(), pointer_beable(), 1, 9);
    ASSERT_EQ(e.size(), 1);
    EXPECT_GE(e.members[0].beable_value, 0);
    EXPECT_LT(e.members[0].beable_value, 2);
}

TEST(ensemble, counts_conserve_population) {
    const Ensemble e = build_ensemble(bell_state(), pointer_beable(), 100000, 3);
    const auto counts = e.counts();
    EXPECT_EQ(counts[0] + counts[1], 100000);
    EXPECT_NEAR(static_cast<double>(counts[0]) / 100000.0, 0.5, 4.8e-3);  // 3 sigma
}

TEST(ensemble, bit_identical_for_fixed_seed) {
    const Ensemble a = build_ensemble(bell_state(), pointer_beable(), 5000, 1234);
    const Ensemble b = build_ensemble(bell_state(), pointer_beable(), 5000, 1234);
    for (std::int64_t j = 0; j < a.size(); ++j)
        ASSERT_EQ(a.members[static_cast<std::size_t>(j)].beable_value,
                  b.members[static_cast<std::size_t>(j)].beable_value);
}

TEST(ensemble, independent_of_worker_count) {
    const Ensemble serial = build_ensemble(bell_state(), pointer_beable(), 20000, 42, 1);
    const Ensemble parallel = build_ensemble(bell_state(), pointer_beable(), 20000, 42, 8);
    for (std::int64_t j = 0; j < serial.size(); ++j)
        ASSERT_EQ(serial.members[static_cast<std::size_t>(j)].beable_value,
                  parallel.members[static_cast<std::size_t>(j)].beable_value);
}

// Member j is exactly one categorical draw from the documented stream.
TEST(ensemble, member_streams_match_documented_derivation) {
    const Ket psi = bell_state();
    const BeableObservable beable = pointer_beable();
    const Ensemble e = build_ensemble(psi, beable, 500, 2718);
    const RngStream member_root = RngStream::root(2718).split(0);
    for (std::int64_t j = 0; j < e.size(); ++j) {
        RngStream s = member_root.split(static_cast<std::uint64_t>(j));
        EXPECT_EQ(e.members[static_cast<std::size_t>(j)].beable_value,
                  sample_beable_value(psi, beable, s));
    }
}

TEST(ensemble, rejects_empty_population) {
    EXPECT_THROW(build_ensemble(bell_state(), pointer_beable(), 0, 1), std::invalid_argument);
}

// ----------------------------------------------------------------------
// frequency_report

TEST(frequencies, eigenstate_gives_degenerate_report) {
    const Ensemble e = build_ensemble(basis_ket(layout12(), 0), pointer_beable(), 1000, 6);
    const ConvergenceReport r = frequency_report(e);
    EXPECT_TRUE(r.pass);
    EXPECT_EQ(r.entries[0].count, 1000);
    EXPECT_EQ(r.entries[0].frequency, 1.0);
    EXPECT_EQ(r.entries[0].z, 0.0);  // weight 1: z = 0 by convention
    EXPECT_EQ(r.entries[1].z, 0.0);  // weight 0: z = 0 by convention
}

TEST(frequencies, exact_split_has_zero_z) {
    Ensemble e{bell_state(), pointer_beable(), {}, 0};
    for (int i = 0; i < 50000; ++i) e.members.push_back(IndividualSystem{0, {}});
    for (int i = 0; i < 50000; ++i) e.members.push_back(IndividualSystem{1, {}});
    const ConvergenceReport r = frequency_report(e);
    EXPECT_NEAR(r.entries[0].z, 0.0, 1e-12);
    EXPECT_TRUE(r.pass);
}

TEST(frequencies, half_percent_excess_fails_at_three_sigma) {
    Ensemble e{bell_state(), pointer_beable(), {}, 0};
    for (int i = 0; i < 50500; ++i) e.members.push_back(IndividualSystem{0, {}});
    for (int i = 0; i < 49500; ++i) e.members.push_back(IndividualSystem{1, {}});
    const ConvergenceReport r = frequency_report(e, 3.0);
    EXPECT_NEAR(r.entries[0].z, 3.1623, 1e-3);
    EXPECT_FALSE(r.pass);
    EXPECT_TRUE(frequency_report(e, 3.2).pass);
}

// Each index's z is asymptotically standard normal, so at z_crit = 3 the
// per-seed pass rate must be at least 95%.
TEST(frequencies, pass_rate_over_one_hundred_seeds) {
    const Ket psi = bell_state();
    const BeableObservable beable = pointer_beable();
    int passed = 0;
    for (std::uint64_t seed = 0; seed < 100; ++seed)
        if (frequency_report(build_ensemble(psi, beable, 100000, seed), 3.0).pass) ++passed;
    EXPECT_GE(passed, 95);
}

// ----------------------------------------------------------------------
// subensemble_average

TEST(subensemble, conditioned_bell_is_dispersion_free_for_sigma_z) {
    Ensemble e = build_ensemble(bell_state(), pointer_beable(), 20000, 11);
    const SubensembleStats stats =
        subensemble_average(e, 0, Observable::pauli_z(), RngStream::root(11).split(1));
    EXPECT_EQ(stats.mean, 1.0);
    EXPECT_EQ(stats.standard_error, 0.0);
    EXPECT_EQ(stats.count, e.counts()[0]);
}

TEST(subensemble, identity_observable_is_constant) {
    Ensemble e = build_ensemble(bell_state(), pointer_beable(), 5000, 13);
    const SubensembleStats stats =
        subensemble_average(e, 1, Observable::identity(2), RngStream::root(13).split(1));
    EXPECT_EQ(stats.mean, 1.0);
    EXPECT_EQ(stats.standard_error, 0.0);
}

TEST(subensemble, sigma_x_mean_vanishes_within_sampling_error) {
    Ensemble e = build_ensemble(bell_state(), pointer_beable(), 100000, 17);
    const SubensembleStats stats =
        subensemble_average(e, 0, Observable::pauli_x(), RngStream::root(17).split(1));
    EXPECT_LE(std::abs(stats.mean), 3.0 / std::sqrt(static_cast<double>(stats.count)));
}

TEST(subensemble, appends_records_only_to_members_of_the_value) {
    Ensemble e = build_ensemble(bell_state(), pointer_beable(), 2000, 19);
    subensemble_average(e, 0, Observable::pauli_z(), RngStream::root(19).split(1));
    for (const auto& m : e.members) {
        if (m.beable_value == 0) {
            ASSERT_EQ(m.records.size(), 1u);
            EXPECT_EQ(m.records[0].observable_id, "sigma_z");
        } else {
            EXPECT_TRUE(m.records.empty());
        }
    }
}

TEST(subensemble, records_independent_of_worker_count) {
    Ensemble serial = build_ensemble(bell_state(), pointer_beable(), 20000, 23);
    Ensemble parallel = serial;
    subensemble_average(serial, 0, Observable::pauli_x(), RngStream::root(23).split(1), 1);
    subensemble_average(parallel, 0, Observable::pauli_x(), RngStream::root(23).split(1), 8);
    for (std::int64_t j = 0; j < serial.size(); ++j) {
        const auto& a = serial.members[static_cast<std::size_t>(j)];
        const auto& b = parallel.members[static_cast<std::size_t>(j)];
        ASSERT_EQ(a.records.size(), b.records.size());
        for (std::size_t k = 0; k < a.records.size(); ++k)
            ASSERT_EQ(a.records[k].value, b.records[k].value);
    }
}

TEST(subensemble, rejects_empty_subensemble) {
    Ensemble e = build_ensemble(basis_ket(layout12(), 0), pointer_beable(), 100, 29);
    EXPECT_THROW(subensemble_average(e, 1, Observable::pauli_z(), RngStream::root(29).split(1)),
                 std::invalid_argument);
}

// ----------------------------------------------------------------------
// verify_conditional_state_theorem

TEST(theorem, bell_with_sigma_z_pins_both_subensembles) {
    const TheoremReport r = verify_conditional_state_theorem(
        bell_state(), pointer_beable(), Observable::pauli_z(), 100000, 31);
    ASSERT_EQ(r.entries.size(), 2u);
    EXPECT_TRUE(r.pass);
    EXPECT_NEAR(r.entries[0].theory, 1.0, algebra_tol);
    EXPECT_NEAR(r.entries[1].theory, -1.0, algebra_tol);
    EXPECT_LE(std::abs(r.entries[0].mean - 1.0), 3.0 * r.entries[0].standard_error + algebra_tol);
    EXPECT_LE(std::abs(r.entries[1].mean + 1.0), 3.0 * r.entries[1].standard_error + algebra_tol);
}

TEST(theorem, product_state_theory_is_first_factor_expectation) {
    std::mt19937_64 rng(33);
    const cvector phi_vec = oracle::random_ket_vector(rng, 2);
    const Ket phi(phi_vec, SubsystemLayout({2}, {"1"}));
    cvector chi(2);
    chi << 1.0, 0.0;
    const Ket psi = tensor_product(phi, Ket(chi, SubsystemLayout({2}, {"2"})));

    const Observable c = Observable::pauli_z();
    const TheoremReport r = verify_conditional_state_theorem(psi, pointer_beable(), c, 50000, 37);
    EXPECT_TRUE(r.pass);
    const double expected = (phi_vec.adjoint() * c.matrix() * phi_vec)(0, 0).real();
    for (const auto& entry : r.entries) {
        if (!entry.skipped) {
            EXPECT_NEAR(entry.theory, expected, algebra_tol);
        }
    }
}

TEST(theorem, zero_weight_value_is_skipped_not_failed) {
    // Beable with a third value the state never occupies.
    const SubsystemLayout layout({2, 3}, {"1", "2"});
    cvector v = cvector::Zero(6);
    v(0) = inv_sqrt2;  // |0, 0>
    v(4) = inv_sqrt2;  // |1, 1>
    const Ket psi(v, layout);
    const BeableObservable beable = BeableObservable::computational_basis("2", 3);

    const TheoremReport r =
        verify_conditional_state_theorem(psi, beable, Observable::pauli_z(), 20000, 41);
    ASSERT_EQ(r.entries.size(), 3u);
    EXPECT_TRUE(r.entries[2].skipped);
    EXPECT_EQ(r.entries[2].note, "weight below branch tolerance");
    EXPECT_TRUE(r.pass);
}

TEST(theorem, tiny_weight_with_empty_subensemble_is_skipped) {
    const Ket psi = weighted_pair(1.0 - 1e-4);
    const TheoremReport r =
        verify_conditional_state_theorem(psi, pointer_beable(), Observable::pauli_z(), 10, 43);
    ASSERT_EQ(r.entries.size(), 2u);
    EXPECT_FALSE(r.entries[0].skipped);
    EXPECT_TRUE(r.entries[1].skipped);
    EXPECT_EQ(r.entries[1].note, "empty subensemble at this sample size");
    EXPECT_TRUE(r.pass);
}

TEST(theorem, random_three_level_instance_passes_at_four_sigma) {
    std::mt19937_64 rng(47);
    const SubsystemLayout layout({3, 3}, {"1", "2"});
    const Ket psi(oracle::random_ket_vector(rng, 9), layout);
    const BeableObservable beable = oracle::random_beable(rng, "2", 3, 3);
    const Observable c(oracle::random_hermitian(rng, 3), "c1");
    const TheoremReport r = verify_conditional_state_theorem(psi, beable, c, 200000, 53, 4.0);
    EXPECT_TRUE(r.pass);
}

TEST(theorem, reports_identical_across_worker_counts) {
    const TheoremReport a = verify_conditional_state_theorem(
        bell_state(), pointer_beable(), Observable::pauli_x(), 30000, 59, 3.0, 1);
    const TheoremReport b = verify_conditional_state_theorem(
        bell_state(), pointer_beable(), Observable::pauli_x(), 30000, 59, 3.0, 8);
    ASSERT_EQ(a.entries.size(), b.entries.size());
    for (std::size_t i = 0; i < a.entries.size(); ++i) {
        EXPECT_EQ(a.entries[i].mean, b.entries[i].mean);
        EXPECT_EQ(a.entries[i].standard_error, b.entries[i].standard_error);
        EXPECT_EQ(a.entries[i].count, b.entries[i].count);
    }
}

// The w_i and Tr(C rho_i) targets used by reports, re-derived through dense
// embeddings and the brute-force partial trace.
TEST(theorem, theory_targets_match_brute_force_at_small_dimension) {
    std::mt19937_64 rng(61);
    for (int trial = 0; trial < 15; ++trial) {
        std::uniform_int_distribution<int> dim_pick(2, 4);
        const int d1 = dim_pick(rng), d2 = dim_pick(rng);
        const SubsystemLayout layout({d1, d2}, {"1", "2"});
        const Ket psi(oracle::random_ket_vector(rng, d1 * d2), layout);
        const BeableObservable beable = oracle::random_beable(rng, "2", d2, 2);
        const cmatrix c = oracle::random_hermitian(rng, d1);

        const cmatrix rho_full = psi.amplitudes() * psi.amplitudes().adjoint();
        for (int i = 0; i < beable.value_count(); ++i) {
            const cmatrix q_full = oracle::brute_embed(
                beable.projectors()[static_cast<std::size_t>(i)].matrix(), layout, 1);
            const double w_brute = (psi.amplitudes().adjoint() * q_full * psi.amplitudes())(0, 0).real();
            const double w = event_probability(psi, beable.value_projector(i));
            EXPECT_NEAR(w, w_brute, algebra_tol);
            if (w <= branch_tol) continue;

            const cmatrix cond_brute =
                oracle::brute_partial_trace(q_full * rho_full * q_full, layout, {"1"}) / w_brute;
            const double theory_brute = (cond_brute * c).trace().real();
            const auto [wc, rho] = conditional_subsystem_state(psi, beable.value_projector(i));
            EXPECT_NEAR((rho.matrix() * c).trace().real(), theory_brute, algebra_tol);
        }
    }
}
