#include "quasifree/golden.hpp"

#include <catch_amalgamated.hpp>

#include <cmath>

using namespace quasifree;

TEST_CASE("golden_pair_is_well_formed", "[golden]") {
    const auto s = golden_s(), s2 = golden_s2();
    REQUIRE(s.dim() == 3);
    REQUIRE(s.matrix()(0, 0) == 2.0 / 6.0);
    REQUIRE(s.matrix()(2, 1) == -1.0 / 6.0);
    REQUIRE(s2.matrix()(0, 0) == 0.5);
    REQUIRE(check_covariance(s.matrix(), golden_involution()).ok());
    REQUIRE(check_covariance(s2.matrix(), golden_involution()).ok());
}

TEST_CASE("golden_run_reproduces_every_closed_form", "[golden]") {
    const auto report = run_golden();
    const double r3 = std::sqrt(3.0), r2 = std::sqrt(2.0);

    REQUIRE(report.eig_s.size() == 3);
    REQUIRE(std::abs(report.eig_s[0] - (3 - r3) / 6) < 1e-12);
    REQUIRE(std::abs(report.eig_s[1] - 0.5) < 1e-12);
    REQUIRE(std::abs(report.eig_s[2] - (3 + r3) / 6) < 1e-12);
    REQUIRE(std::abs(report.eig_s2[0] - (3 - r2) / 6) < 1e-12);
    REQUIRE(std::abs(report.eig_s2[2] - (3 + r2) / 6) < 1e-12);
    REQUIRE(std::abs(report.eig_mix[0] - 0.25) < 1e-12);
    REQUIRE(std::abs(report.eig_mix[1] - 0.50) < 1e-12);
    REQUIRE(std::abs(report.eig_mix[2] - 0.75) < 1e-12);

    REQUIRE(std::abs(report.value_s - (-r3 / 3)) < 1e-12);
    REQUIRE(std::abs(report.value_s2 - (-r2 / 3)) < 1e-12);
    REQUIRE(std::abs(report.value_mix - (-0.5)) < 1e-12);
    REQUIRE(std::abs(report.cross_value_s2 - (-2 * r3 / 9)) < 1e-12);
}

TEST_CASE("golden_normal_forms_do_not_mix_affinely", "[golden]") {
    const auto report = run_golden();
    REQUIRE(report.normal_form_verdict == Verdict::not_affine);
    REQUIRE(std::abs(report.normal_form_discrepancy - (0.5 - (std::sqrt(3.0) + std::sqrt(2.0)) / 6)) <
            1e-12);
    REQUIRE(report.normal_form_discrepancy < -0.02);
}

TEST_CASE("golden_states_do_mix_affinely", "[golden]") {
    const auto report = run_golden();
    REQUIRE(report.state_sweep_verdict == Verdict::affine);
    REQUIRE(report.state_sweep_max <= 1e-12);
}

TEST_CASE("golden_pair_side_conditions", "[golden]") {
    const auto report = run_golden();
    REQUIRE(report.diff_rank == 2);
    REQUIRE(report.commutator > 1e-6);
    REQUIRE(report.necessary.holds);
    REQUIRE(report.necessary.max_residual < 1e-12);
}

TEST_CASE("golden_run_passes_its_own_gate", "[golden]") {
    REQUIRE(run_golden().passed());
    REQUIRE(run_golden().passed(1e-12));
}
