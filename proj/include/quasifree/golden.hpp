#pragma once

#include "quasifree/affine.hpp"
#include "quasifree/car_rep.hpp"
#include "quasifree/covariance.hpp"
#include "quasifree/numerics.hpp"
#include "quasifree/state.hpp"

#include <cmath>
#include <vector>

namespace quasifree {

/// Built-in non-commuting pair on C^3 (entries are exact multiples of 1/6)
/// whose occupation numbers involve sqrt(3) and sqrt(2). It is the standard
/// demonstration that equal symmetrized Gamma-forms do not make a pair's
/// normal forms mix affinely: each operator's top occupation probability is
/// strictly concave along the segment between them.
inline Involution golden_involution() { return Involution::standard(3); }

inline CovarianceOperator golden_s() {
    Matrix s(3, 3);
    s << 2, 0, 1, 0, 4, -1, 1, -1, 3;
    return CovarianceOperator::validated(s / 6.0, golden_involution());
}

inline CovarianceOperator golden_s2() {
    Matrix s(3, 3);
    s << 3, 0, 1, 0, 3, -1, 1, -1, 3;
    return CovarianceOperator::validated(s / 6.0, golden_involution());
}

/// Everything the golden run computes, with the expected closed forms beside
/// the measured values. The "normal form" comparison reads the witness matrix
/// diag(-1,1) (x) I in each state's own normal form (occupation operator of
/// the leading mode); the state-level sweep compares the states as
/// functionals on one common representation. The two disagree by design:
/// this pair's states mix affinely, its normal forms do not.
struct GoldenReport {
    std::vector<double> eig_s, eig_s2, eig_mix;   // ascending
    double value_s = 0, value_s2 = 0, value_mix = 0;  // normal-form witness values
    double normal_form_discrepancy = 0;  // 1/2 (value_s + value_s2) - value_mix
    Verdict normal_form_verdict = Verdict::affine;
    double cross_value_s2 = 0;     // second state on the first state's witness element
    double state_sweep_max = 0;    // max |D| of the definitional monomial sweep
    Verdict state_sweep_verdict = Verdict::not_affine;
    int diff_rank = 0;
    double commutator = 0;
    NecessaryCheck necessary;

    // closed forms
    std::vector<double> expected_eig_s, expected_eig_s2, expected_eig_mix;
    double expected_value_s = 0, expected_value_s2 = 0, expected_value_mix = 0;
    double expected_discrepancy_magnitude = 0;  // |1/2 - (sqrt 3 + sqrt 2)/6|
    double expected_cross_value_s2 = 0;         // -2 sqrt(3)/9

    bool passed(double tol = 1e-12) const {
        const auto all_close = [tol](const std::vector<double>& a, const std::vector<double>& b) {
            if (a.size() != b.size()) return false;
            for (std::size_t i = 0; i < a.size(); ++i)
                if (std::abs(a[i] - b[i]) > tol) return false;
            return true;
        };
        return all_close(eig_s, expected_eig_s) && all_close(eig_s2, expected_eig_s2) &&
               all_close(eig_mix, expected_eig_mix) &&
               std::abs(value_s - expected_value_s) <= tol &&
               std::abs(value_s2 - expected_value_s2) <= tol &&
               std::abs(value_mix - expected_value_mix) <= tol &&
               std::abs(std::abs(normal_form_discrepancy) - expected_discrepancy_magnitude) <=
                   tol &&
               normal_form_verdict == Verdict::not_affine &&
               std::abs(cross_value_s2 - expected_cross_value_s2) <= tol &&
               state_sweep_verdict == Verdict::affine && state_sweep_max <= 1e-10 &&
               diff_rank == 2 && commutator > 1e-6 && necessary.holds;
    }
};

inline GoldenReport run_golden() {
    const auto s = golden_s();
    const auto s2 = golden_s2();
    const auto mix = mixture(s, s2, 0.5);

    GoldenReport report;
    const auto ascending = [](const CovarianceOperator& c) {
        const auto eig = herm_eig(c.matrix());
        return std::vector<double>(eig.values.data(), eig.values.data() + eig.values.size());
    };
    report.eig_s = ascending(s);
    report.eig_s2 = ascending(s2);
    report.eig_mix = ascending(mix);

    // witness matrix diag(-1,1) (x) I: in a state's own normal form it is
    // i c_1 c_2, so its value is 1 - 2 alpha_1
    Matrix site(2, 2);
    site << -1, 0, 0, 1;
    const Matrix witness = kron(site, Matrix::Identity(2, 2));
    const auto basis_s = adapted_diagonalize(s);
    const auto basis_s2 = adapted_diagonalize(s2);
    const auto basis_mix = adapted_diagonalize(mix);
    report.value_s = normal_form_value(basis_s.alphas, Parity::odd, witness).real();
    report.value_s2 = normal_form_value(basis_s2.alphas, Parity::odd, witness).real();
    report.value_mix = normal_form_value(basis_mix.alphas, Parity::odd, witness).real();
    report.normal_form_discrepancy =
        0.5 * (report.value_s + report.value_s2) - report.value_mix;
    report.normal_form_verdict = std::abs(report.normal_form_discrepancy) > 1e-8
                                     ? Verdict::not_affine
                                     : Verdict::affine;

    // the same matrix as a fixed element over the first state's frame
    const auto rep = build_rep(1, Parity::odd);
    const AlgebraElement fixed{rep, witness};
    report.cross_value_s2 = evaluate(s2, basis_s, fixed).real();

    const auto sweep = numeric_test(s, s2, default_lambda_grid(s.dim()), basis_s);
    report.state_sweep_max = sweep.max_discrepancy;
    report.state_sweep_verdict = sweep.verdict;
    report.diff_rank = sweep.diff_rank;
    report.commutator = commutator_norm(s, s2);
    report.necessary = necessary_check(s, s2);

    const double r3 = std::sqrt(3.0), r2 = std::sqrt(2.0);
    report.expected_eig_s = {(3 - r3) / 6, 0.5, (3 + r3) / 6};
    report.expected_eig_s2 = {(3 - r2) / 6, 0.5, (3 + r2) / 6};
    report.expected_eig_mix = {0.25, 0.5, 0.75};
    report.expected_value_s = -r3 / 3;
    report.expected_value_s2 = -r2 / 3;
    report.expected_value_mix = -0.5;
    report.expected_discrepancy_magnitude = std::abs(0.5 - (r3 + r2) / 6);
    report.expected_cross_value_s2 = -2 * r3 / 9;
    return report;
}

}  // namespace quasifree
