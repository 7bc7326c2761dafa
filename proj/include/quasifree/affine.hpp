#pragma once

#include "quasifree/covariance.hpp"
#include "quasifree/numerics.hpp"
#include "quasifree/state.hpp"

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <exception>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <utility>
#include <vector>

namespace quasifree {

enum class Verdict { affine, not_affine };
enum class Method { analytic, numeric };

inline const char* to_string(Verdict v) { return v == Verdict::affine ? "affine" : "not_affine"; }
inline const char* to_string(Method m) { return m == Method::analytic ? "analytic" : "numeric"; }

/// Outcome of an affinity decision. Witness indices are Majorana labels over
/// the deciding frame (the joint frame for the analytic path, the reference
/// frame for the numeric path). For the numeric path lambda_grid/lambda_max
/// record the max |D| found at each grid point.
struct AffineReport {
    Verdict verdict = Verdict::affine;
    Method method = Method::numeric;
    std::optional<std::vector<int>> witness_monomial;
    std::optional<double> witness_lambda;
    double max_discrepancy = 0.0;
    int diff_rank = 0;
    bool commuting = false;
    std::optional<std::vector<std::pair<double, double>>> joint_alphas;
    std::vector<double> lambda_grid;
    std::vector<double> lambda_max;
    double decision_tol = 0.0;
};

namespace detail {

inline void require_same_space(const CovarianceOperator& s, const CovarianceOperator& s2) {
    if (s.dim() != s2.dim())
        throw validation_error("affine: operators have different dimensions");
    if (max_abs(Matrix(s.gamma().matrix() - s2.gamma().matrix())) > 1e-12)
        throw validation_error("affine: operators carry different involutions");
}

}  // namespace detail

/// lambda S + (1-lambda) S2, revalidated.
inline CovarianceOperator mixture(const CovarianceOperator& s, const CovarianceOperator& s2,
                                  double lambda) {
    detail::require_same_space(s, s2);
    if (!(lambda >= 0.0 && lambda <= 1.0))
        throw validation_error("mixture: lambda must lie in [0, 1]");
    return CovarianceOperator::validated(lambda * s.matrix() + (1.0 - lambda) * s2.matrix(),
                                         s.gamma());
}

/// Interior grid {j/(floor(k/2)+2) : j = 1..floor(k/2)+1}. Each monomial
/// discrepancy is a polynomial in lambda of degree <= floor(k/2) vanishing at
/// 0 and 1, so vanishing on this grid decides identical vanishing.
inline std::vector<double> default_lambda_grid(Index k) {
    const Index points = k / 2 + 1;
    std::vector<double> grid;
    grid.reserve(points);
    for (Index j = 1; j <= points; ++j)
        grid.push_back(static_cast<double>(j) / static_cast<double>(points + 1));
    return grid;
}

/// Closed-form decision for commuting pairs: affine iff the joint spectra
/// (alpha_i, alpha_i') differ at no more than one index. When they differ at
/// two or more, the two largest gaps yield an explicit degree-4 witness
/// monomial whose discrepancy at lambda = 1/2 is the product of the gaps.
/// Near the alpha_tol boundary this count and the numeric test's
/// decision_tol can legitimately disagree; both samplers used in the tests
/// stay orders of magnitude away from it.
inline AffineReport decide_commuting(const CovarianceOperator& s, const CovarianceOperator& s2,
                                     double alpha_tol = 1e-8, double commute_tol = 1e-10,
                                     double pair_tol = 1e-8) {
    detail::require_same_space(s, s2);
    const auto joint = simultaneous_adapted_diagonalize(s, s2, commute_tol, pair_tol);

    std::vector<std::size_t> differing;
    for (std::size_t i = 0; i < joint.alphas.size(); ++i)
        if (std::abs(joint.alphas[i].first - joint.alphas[i].second) > alpha_tol)
            differing.push_back(i);

    AffineReport report;
    report.method = Method::analytic;
    report.commuting = true;
    report.diff_rank = difference_rank(s, s2);
    report.joint_alphas = joint.alphas;
    report.decision_tol = alpha_tol;

    if (differing.size() <= 1) {
        report.verdict = Verdict::affine;
        return report;
    }
    std::stable_sort(differing.begin(), differing.end(), [&](std::size_t a, std::size_t b) {
        return std::abs(joint.alphas[a].first - joint.alphas[a].second) >
               std::abs(joint.alphas[b].first - joint.alphas[b].second);
    });
    const std::size_t i = std::min(differing[0], differing[1]);
    const std::size_t j = std::max(differing[0], differing[1]);
    report.verdict = Verdict::not_affine;
    report.witness_monomial = std::vector<int>{2 * static_cast<int>(i) + 1,
                                               2 * static_cast<int>(i) + 2,
                                               2 * static_cast<int>(j) + 1,
                                               2 * static_cast<int>(j) + 2};
    report.witness_lambda = 0.5;
    report.max_discrepancy = std::abs((joint.alphas[i].first - joint.alphas[i].second) *
                                      (joint.alphas[j].first - joint.alphas[j].second));
    return report;
}

/// Definitional test: sweeps D(A, lambda) = lambda phi_S(A) + (1-lambda)
/// phi_S2(A) - phi_mix(A) over every Majorana monomial A of the reference
/// frame and every grid lambda. Mixtures are formed directly from the
/// matrices without revalidation, so the test also applies to Hermitian
/// probes that fail the involution compatibility condition.
inline AffineReport numeric_test(const CovarianceOperator& s, const CovarianceOperator& s2,
                                 const std::vector<double>& lambdas,
                                 const GammaAdaptedBasis& ref_basis,
                                 double decision_tol = 1e-8) {
    detail::require_same_space(s, s2);
    if (s.dim() > 7)
        throw resource_error("numeric_test: dimension " + std::to_string(s.dim()) +
                             " exceeds the monomial-sweep cap of 7");
    if (ref_basis.dim() != s.dim())
        throw validation_error("numeric_test: reference frame dimension mismatch");
    if (lambdas.empty())
        throw validation_error("numeric_test: need at least one lambda");
    for (double l : lambdas)
        if (!(l > 0.0 && l < 1.0))
            throw validation_error("numeric_test: lambdas must lie in (0, 1)");

    const Matrix tp_s = majorana_table(s, ref_basis);
    const Matrix tp_s2 = majorana_table(s2, ref_basis);
    std::vector<Matrix> tp_mix;
    tp_mix.reserve(lambdas.size());
    for (double l : lambdas) {
        const auto mix = CovarianceOperator::unchecked(
            l * s.matrix() + (1.0 - l) * s2.matrix(), s.gamma());
        tp_mix.push_back(majorana_table(mix, ref_basis));
    }

    const int m = static_cast<int>(tp_s.rows());
    const int label_base = ref_basis.parity == Parity::odd ? 0 : 1;

    AffineReport report;
    report.method = Method::numeric;
    report.commuting = commutator_norm(s, s2) <= 1e-10;
    report.diff_rank = difference_rank(s, s2);
    report.decision_tol = decision_tol;
    report.lambda_grid = lambdas;
    report.lambda_max.assign(lambdas.size(), 0.0);

    std::vector<Index> rows;
    for (std::uint32_t mask = 0; mask < (std::uint32_t(1) << m); ++mask) {
        rows.clear();
        for (int b = 0; b < m; ++b)
            if (mask & (std::uint32_t(1) << b)) rows.push_back(b);
        if (rows.size() % 2) continue;
        const Complex phi_s = wick_from_table(tp_s, rows);
        const Complex phi_s2 = wick_from_table(tp_s2, rows);
        for (std::size_t li = 0; li < lambdas.size(); ++li) {
            const double l = lambdas[li];
            const Complex d = l * phi_s + (1.0 - l) * phi_s2 - wick_from_table(tp_mix[li], rows);
            const double mag = std::abs(d);
            report.lambda_max[li] = std::max(report.lambda_max[li], mag);
            if (mag > report.max_discrepancy) {
                report.max_discrepancy = mag;
                std::vector<int> labels;
                labels.reserve(rows.size());
                for (Index r : rows) labels.push_back(static_cast<int>(r) + label_base);
                report.witness_monomial = std::move(labels);
                report.witness_lambda = l;
            }
        }
    }
    report.verdict =
        report.max_discrepancy <= decision_tol ? Verdict::affine : Verdict::not_affine;
    if (report.verdict == Verdict::affine) {
        report.witness_monomial.reset();
        report.witness_lambda.reset();
    }
    return report;
}

inline AffineReport numeric_test(const CovarianceOperator& s, const CovarianceOperator& s2,
                                 const std::vector<double>& lambdas, double decision_tol = 1e-8) {
    return numeric_test(s, s2, lambdas, adapted_diagonalize(s), decision_tol);
}

inline AffineReport numeric_test(const CovarianceOperator& s, const CovarianceOperator& s2) {
    // No tolerance shortcut here: a lone brace-enclosed double must keep
    // binding to the lambda-grid overload, never to a tolerance.
    return numeric_test(s, s2, default_lambda_grid(s.dim()), adapted_diagonalize(s));
}

/// Agreement of the symmetrized Gamma-forms: max over basis pairs of
/// |B_S(e_p,e_q) + B_S(e_q,e_p) - B_S2(e_p,e_q) - B_S2(e_q,e_p)| with
/// B(xi,eta) = (S xi, Gamma eta). Agreement is necessary for affinity; every
/// pair satisfying the involution compatibility condition passes identically,
/// so a failure certifies that one operator violates it.
struct NecessaryCheck {
    bool holds = false;
    double max_residual = 0.0;
    double tolerance = 0.0;
};

inline NecessaryCheck necessary_check(const CovarianceOperator& s, const CovarianceOperator& s2,
                                      double tol = 1e-10) {
    detail::require_same_space(s, s2);
    const Matrix f = s.gamma().matrix().adjoint() * (s.matrix() - s2.matrix());
    const double residual = max_abs(Matrix(f + f.transpose()));
    return {residual <= tol, residual, tol};
}

/// Pair samplers for the difference-rank search. Seeds fully determine the
/// draw; k and gamma fix the space.
enum class SampleMode { random, commuting, rank2_perturbation };

inline const char* to_string(SampleMode m) {
    switch (m) {
        case SampleMode::random: return "random";
        case SampleMode::commuting: return "commuting";
        default: return "rank2_perturbation";
    }
}

inline std::optional<SampleMode> sample_mode_from_string(const std::string& name) {
    if (name == "random") return SampleMode::random;
    if (name == "commuting") return SampleMode::commuting;
    if (name == "rank2_perturbation") return SampleMode::rank2_perturbation;
    return std::nullopt;
}

struct SampledPair {
    CovarianceOperator s;
    CovarianceOperator s2;
};

inline SampledPair sample_pair(SampleMode mode, Index k, const Involution& gamma,
                               std::uint64_t seed) {
    switch (mode) {
        case SampleMode::random:
            return {random_covariance(k, gamma, 0.9, derive_seed(seed, 1)),
                    random_covariance(k, gamma, 0.9, derive_seed(seed, 2))};
        case SampleMode::commuting: {
            const auto frame = random_frame(k, gamma, derive_seed(seed, 1));
            Rng rng(derive_seed(seed, 2));
            std::vector<double> a(frame.n()), a2(frame.n());
            for (auto& v : a) v = rng.uniform();
            for (auto& v : a2) v = rng.uniform();
            return {covariance_from_frame(frame, a), covariance_from_frame(frame, a2)};
        }
        default: {
            // Gamma-odd rank-2 bump t (vv* - (Gv)(Gv)*) on a spectrum kept
            // inside [0.15, 0.85], so the sum stays a valid operator.
            const auto s = random_covariance(k, gamma, 0.7, derive_seed(seed, 1));
            Rng rng(derive_seed(seed, 2));
            const Vector v = rng.vector(k);
            const Vector gv = gamma.apply(v);
            const Matrix bump = v * v.adjoint() - gv * gv.adjoint();
            const auto eig = herm_eig(bump);
            const double norm =
                std::max(std::abs(eig.values.minCoeff()), std::abs(eig.values.maxCoeff()));
            const double t = 0.14 * (0.25 + 0.75 * rng.uniform()) / std::max(norm, 1e-9);
            return {s, CovarianceOperator::validated(s.matrix() + t * bump, gamma)};
        }
    }
}

struct HistogramCell {
    Verdict verdict = Verdict::affine;
    int rank = 0;
    std::int64_t count = 0;
};

/// A flagged trial, reproducible from (mode, trial, trial_seed); the sampled
/// matrices ride along so reports are self-contained, and files lists any
/// JSON dumps written for it.
struct CampaignFinding {
    SampleMode mode = SampleMode::random;
    int trial = 0;
    std::uint64_t trial_seed = 0;
    Verdict verdict = Verdict::affine;
    int rank = 0;
    double max_discrepancy = 0.0;
    Matrix s;
    Matrix s2;
    std::vector<std::string> files;
};

struct CampaignReport {
    Index k = 0;
    int trials_per_mode = 0;
    std::uint64_t seed = 0;
    double decision_tol = 0.0;
    std::vector<SampleMode> modes;
    std::vector<double> lambda_grid;
    std::vector<HistogramCell> histogram;  // sorted by (verdict, rank)
    std::vector<std::vector<double>> lambda_max;  // per mode, aligned with lambda_grid
    std::vector<CampaignFinding> counterexamples;  // affine verdict, rank not in {0, 2}
    std::vector<CampaignFinding> violations;       // rank 1

    bool counterexample_found() const { return !counterexamples.empty(); }
    bool violation_found() const { return !violations.empty(); }
};

struct ConjectureOptions {
    int trials = 100;
    std::uint64_t seed = 1;
    std::vector<SampleMode> modes = {SampleMode::random, SampleMode::commuting,
                                     SampleMode::rank2_perturbation};
    std::vector<double> lambdas;  // empty: default grid for k
    double decision_tol = 1e-8;
    int threads = 0;  // 0: hardware count
};

/// Randomized search for difference ranks other than 2 among affine pairs.
/// Runs trials-per-mode independent draws, decides each pair numerically,
/// and aggregates (verdict, rank) counts. Trial results depend only on
/// (seed, trial, mode), so reports are identical regardless of scheduling.
inline CampaignReport explore_conjecture(Index k, const Involution& gamma,
                                         const ConjectureOptions& opts = {}) {
    if (k > 7)
        throw resource_error("explore_conjecture: dimension exceeds the cap of 7");
    if (k != gamma.dim())
        throw validation_error("explore_conjecture: dimension does not match the involution");
    if (opts.trials < 1)
        throw validation_error("explore_conjecture: need at least one trial");
    for (std::size_t i = 0; i < opts.modes.size(); ++i)
        for (std::size_t j = i + 1; j < opts.modes.size(); ++j)
            if (opts.modes[i] == opts.modes[j])
                throw validation_error("explore_conjecture: duplicate sample mode");

    CampaignReport report;
    report.k = k;
    report.trials_per_mode = opts.trials;
    report.seed = opts.seed;
    report.decision_tol = opts.decision_tol;
    report.modes = opts.modes;
    report.lambda_grid = opts.lambdas.empty() ? default_lambda_grid(k) : opts.lambdas;

    struct Outcome {
        Verdict verdict = Verdict::affine;
        int rank = 0;
        double max_discrepancy = 0.0;
        std::vector<double> lambda_max;
        Matrix s;
        Matrix s2;
        std::uint64_t trial_seed = 0;
    };
    const std::size_t total = opts.modes.size() * static_cast<std::size_t>(opts.trials);
    std::vector<Outcome> outcomes(total);

    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_lock;
    const auto worker = [&] {
        for (;;) {
            const std::size_t slot = next.fetch_add(1);
            if (slot >= total) return;
            try {
                const std::size_t mode_idx = slot / opts.trials;
                const int trial = static_cast<int>(slot % opts.trials);
                const SampleMode mode = opts.modes[mode_idx];
                const std::uint64_t trial_seed =
                    derive_seed(opts.seed, static_cast<std::uint64_t>(trial),
                                static_cast<std::uint64_t>(mode) + 1);
                const auto pair = sample_pair(mode, k, gamma, trial_seed);
                const auto decision =
                    numeric_test(pair.s, pair.s2, report.lambda_grid, opts.decision_tol);
                Outcome& out = outcomes[slot];
                out.verdict = decision.verdict;
                out.rank = decision.diff_rank;
                out.max_discrepancy = decision.max_discrepancy;
                out.lambda_max = decision.lambda_max;
                out.s = pair.s.matrix();
                out.s2 = pair.s2.matrix();
                out.trial_seed = trial_seed;
            } catch (...) {
                std::lock_guard<std::mutex> guard(failure_lock);
                if (!failure) failure = std::current_exception();
                return;
            }
        }
    };

    int threads = opts.threads > 0 ? opts.threads
                                   : static_cast<int>(std::thread::hardware_concurrency());
    threads = std::clamp(threads, 1, 16);
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
    if (failure) std::rethrow_exception(failure);

    std::vector<HistogramCell> cells;
    report.lambda_max.assign(opts.modes.size(),
                             std::vector<double>(report.lambda_grid.size(), 0.0));
    for (std::size_t slot = 0; slot < total; ++slot) {
        const Outcome& out = outcomes[slot];
        const std::size_t mode_idx = slot / opts.trials;
        const SampleMode mode = opts.modes[mode_idx];
        auto cell = std::find_if(cells.begin(), cells.end(), [&](const HistogramCell& c) {
            return c.verdict == out.verdict && c.rank == out.rank;
        });
        if (cell == cells.end()) {
            cells.push_back({out.verdict, out.rank, 1});
        } else {
            ++cell->count;
        }
        for (std::size_t li = 0; li < out.lambda_max.size(); ++li)
            report.lambda_max[mode_idx][li] =
                std::max(report.lambda_max[mode_idx][li], out.lambda_max[li]);

        const bool counterexample =
            out.verdict == Verdict::affine && out.rank != 0 && out.rank != 2;
        const bool violation = out.rank == 1;
        if (counterexample || violation) {
            CampaignFinding finding;
            finding.mode = mode;
            finding.trial = static_cast<int>(slot % opts.trials);
            finding.trial_seed = out.trial_seed;
            finding.verdict = out.verdict;
            finding.rank = out.rank;
            finding.max_discrepancy = out.max_discrepancy;
            finding.s = out.s;
            finding.s2 = out.s2;
            if (counterexample) report.counterexamples.push_back(finding);
            if (violation) report.violations.push_back(finding);
        }
    }
    std::sort(cells.begin(), cells.end(), [](const HistogramCell& a, const HistogramCell& b) {
        if (a.verdict != b.verdict) return a.verdict < b.verdict;
        return a.rank < b.rank;
    });
    report.histogram = std::move(cells);
    return report;
}

}  // namespace quasifree
