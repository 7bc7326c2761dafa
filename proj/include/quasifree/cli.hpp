#pragma once

#include "quasifree/affine.hpp"
#include "quasifree/covariance.hpp"
#include "quasifree/golden.hpp"
#include "quasifree/matrix_io.hpp"
#include "quasifree/report_io.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

namespace quasifree {

/// Writes a flagged campaign pair (S, S2, involution) as JSON files under dir
/// and returns the paths, in a deterministic naming scheme.
inline std::vector<std::string> write_finding_pair(const CampaignFinding& finding,
                                                   const Involution& gamma,
                                                   const std::string& dir,
                                                   const std::string& prefix) {
    namespace fs = std::filesystem;
    fs::create_directories(dir);
    std::ostringstream stem;
    stem << prefix << "_" << to_string(finding.mode) << "_trial" << finding.trial;
    const std::string base = (fs::path(dir) / stem.str()).string();
    const std::vector<std::string> paths = {base + "_S.json", base + "_S2.json",
                                            base + "_gamma.json"};
    save_matrix(paths[0], finding.s);
    save_matrix(paths[1], finding.s2);
    save_involution(paths[2], gamma);
    return paths;
}

namespace cli_detail {

constexpr int exit_ok = 0;
constexpr int exit_negative = 1;
constexpr int exit_usage = 2;
constexpr int exit_counterexample = 3;

struct RunConfig {
    std::string op_path, op2_path, gamma_path, out_path, dump_dir;
    std::string format = "text";
    std::vector<std::string> mode_names;
    std::vector<double> lambdas;
    double tol = -1.0;  // subcommand-specific default when < 0
    std::uint64_t seed = 1;
    int trials = 100;
    Index dim = 4;
    bool dump = false;
};

inline std::string fmt(double v) {
    std::ostringstream s;
    s << std::setprecision(15) << v;
    return s.str();
}

inline void deliver(const std::string& text, const RunConfig& cfg, std::ostream& out) {
    if (cfg.out_path.empty()) {
        out << text;
        return;
    }
    std::ofstream file(cfg.out_path);
    if (!file)
        throw io_error("cannot open " + cfg.out_path + " for writing");
    file << text;
    if (!file)
        throw io_error("write to " + cfg.out_path + " failed");
}

inline Involution gamma_for(const RunConfig& cfg, Index k) {
    if (cfg.gamma_path.empty()) return Involution::standard(k);
    auto gamma = load_involution(cfg.gamma_path);
    if (gamma.dim() != k)
        throw io_error("involution dimension " + std::to_string(gamma.dim()) +
                       " does not match the operator dimension " + std::to_string(k));
    return gamma;
}

inline std::string describe_witness(const AffineReport& r) {
    if (!r.witness_monomial) return "none";
    std::ostringstream s;
    s << "c_{";
    for (std::size_t i = 0; i < r.witness_monomial->size(); ++i)
        s << (i ? "," : "") << (*r.witness_monomial)[i];
    s << "}";
    if (r.witness_lambda) s << " at lambda = " << fmt(*r.witness_lambda);
    return s.str();
}

inline int cmd_validate(const RunConfig& cfg, std::ostream& out) {
    const Matrix s = load_matrix(cfg.op_path);
    if (s.rows() != s.cols())
        throw io_error("operator must be square, got " + std::to_string(s.rows()) + "x" +
                       std::to_string(s.cols()));
    const auto gamma = gamma_for(cfg, s.rows());
    const auto check = check_covariance(s, gamma, cfg.tol > 0 ? cfg.tol : 1e-10);

    if (cfg.format == "json") {
        ordered_json j;
        j["schema"] = report_schema;
        j["kind"] = "validate";
        j["k"] = s.rows();
        j["check"] = covariance_check_to_json(check);
        deliver(j.dump(2) + "\n", cfg, out);
    } else {
        std::ostringstream text;
        text << "covariance validation on C^" << s.rows() << "\n"
             << "  " << check.describe() << "\n"
             << "  valid: " << (check.ok() ? "yes" : "no") << "\n";
        deliver(text.str(), cfg, out);
    }
    return check.ok() ? exit_ok : exit_negative;
}

inline int cmd_affine(const RunConfig& cfg, std::ostream& out) {
    const Matrix m = load_matrix(cfg.op_path);
    const Matrix m2 = load_matrix(cfg.op2_path);
    if (m.rows() != m.cols() || m2.rows() != m2.cols())
        throw io_error("operators must be square");
    if (m.rows() != m2.rows())
        throw io_error("operator dimensions differ: " + std::to_string(m.rows()) + " vs " +
                       std::to_string(m2.rows()));
    const auto gamma = gamma_for(cfg, m.rows());
    const auto s = CovarianceOperator::validated(m, gamma);
    const auto s2 = CovarianceOperator::validated(m2, gamma);

    const double decision_tol = cfg.tol > 0 ? cfg.tol : 1e-8;
    AffineReport report;
    if (commutator_norm(s, s2) <= 1e-10) {
        report = decide_commuting(s, s2);
    } else {
        const auto grid = cfg.lambdas.empty() ? default_lambda_grid(s.dim()) : cfg.lambdas;
        report = numeric_test(s, s2, grid, decision_tol);
    }
    const auto necessary = necessary_check(s, s2);

    if (cfg.format == "json") {
        ordered_json j = affine_report_to_json(report);
        j["necessary"] = necessary_check_to_json(necessary);
        if (cfg.dump) {
            j["S"] = matrix_to_json(s.matrix());
            j["S2"] = matrix_to_json(s2.matrix());
            j["gamma"] = involution_to_json(gamma);
        }
        deliver(j.dump(2) + "\n", cfg, out);
    } else {
        std::ostringstream text;
        text << "affinity of a pair on C^" << s.dim() << "\n"
             << "  verdict: " << to_string(report.verdict) << " (" << to_string(report.method)
             << ")\n"
             << "  commuting: " << (report.commuting ? "yes" : "no") << "\n"
             << "  max discrepancy: " << fmt(report.max_discrepancy) << " (tol "
             << fmt(report.decision_tol) << ")\n"
             << "  witness: " << describe_witness(report) << "\n"
             << "  rank of S - S2: " << report.diff_rank << "\n"
             << "  symmetrized forms agree: " << (necessary.holds ? "yes" : "no")
             << " (residual " << fmt(necessary.max_residual) << ")\n";
        if (report.joint_alphas) {
            text << "  joint spectra (alpha, alpha'):";
            for (const auto& [a, a2] : *report.joint_alphas)
                text << " (" << fmt(a) << ", " << fmt(a2) << ")";
            text << "\n";
        }
        if (cfg.dump) {
            text << "  S:\n" << s.matrix() << "\n  S2:\n" << s2.matrix() << "\n";
        }
        deliver(text.str(), cfg, out);
    }
    return report.verdict == Verdict::affine ? exit_ok : exit_negative;
}

inline int cmd_golden(const RunConfig& cfg, std::ostream& out) {
    const auto report = run_golden();
    if (cfg.format == "json") {
        deliver(golden_report_to_json(report).dump(2) + "\n", cfg, out);
    } else {
        const auto eigline = [](const std::vector<double>& v) {
            std::ostringstream s;
            for (std::size_t i = 0; i < v.size(); ++i) s << (i ? ", " : "") << fmt(v[i]);
            return s.str();
        };
        std::ostringstream text;
        text << "golden pair on C^3\n"
             << "  eigenvalues S:       " << eigline(report.eig_s) << "\n"
             << "  eigenvalues S2:      " << eigline(report.eig_s2) << "\n"
             << "  eigenvalues mixture: " << eigline(report.eig_mix) << "\n"
             << "  normal-form values of diag(-1,1)(x)I: S " << fmt(report.value_s) << ", S2 "
             << fmt(report.value_s2) << ", mixture " << fmt(report.value_mix) << "\n"
             << "  normal-form comparison: discrepancy "
             << fmt(report.normal_form_discrepancy) << " -> "
             << to_string(report.normal_form_verdict) << "\n"
             << "  S2 on the fixed element over S's frame: " << fmt(report.cross_value_s2)
             << "\n"
             << "  state-level monomial sweep: max discrepancy "
             << fmt(report.state_sweep_max) << " -> " << to_string(report.state_sweep_verdict)
             << "\n"
             << "  (the states mix affinely; the normal-form occupation numbers do not)\n"
             << "  rank of S - S2: " << report.diff_rank << "\n"
             << "  commutator norm: " << fmt(report.commutator) << "\n"
             << "  symmetrized forms agree: " << (report.necessary.holds ? "yes" : "no")
             << "\n"
             << "  reproduction: " << (report.passed() ? "PASS" : "FAIL") << "\n";
        deliver(text.str(), cfg, out);
    }
    return report.passed() ? exit_ok : exit_negative;
}

inline int cmd_conjecture(const RunConfig& cfg, std::ostream& out) {
    const auto gamma = cfg.gamma_path.empty() ? Involution::standard(cfg.dim)
                                              : load_involution(cfg.gamma_path);
    if (gamma.dim() != cfg.dim)
        throw io_error("involution dimension does not match --dim");

    ConjectureOptions opts;
    opts.trials = cfg.trials;
    opts.seed = cfg.seed;
    opts.lambdas = cfg.lambdas;
    if (cfg.tol > 0) opts.decision_tol = cfg.tol;
    if (!cfg.mode_names.empty()) {
        opts.modes.clear();
        for (const auto& name : cfg.mode_names) {
            const auto mode = sample_mode_from_string(name);
            if (!mode) throw io_error("unknown sample mode " + name);
            opts.modes.push_back(*mode);
        }
    }

    auto report = explore_conjecture(cfg.dim, gamma, opts);
    if (!cfg.dump_dir.empty()) {
        for (auto& f : report.counterexamples)
            f.files = write_finding_pair(f, gamma, cfg.dump_dir, "counterexample");
        for (auto& f : report.violations)
            f.files = write_finding_pair(f, gamma, cfg.dump_dir, "violation");
    }

    if (cfg.format == "json") {
        deliver(campaign_report_to_json(report).dump(2) + "\n", cfg, out);
    } else {
        std::ostringstream text;
        text << "difference-rank campaign on C^" << report.k << ": " << report.trials_per_mode
             << " trials per mode, seed " << report.seed << "\n";
        for (const auto& cell : report.histogram)
            text << "  " << to_string(cell.verdict) << " rank " << cell.rank << ": "
                 << cell.count << "\n";
        for (std::size_t i = 0; i < report.modes.size(); ++i) {
            text << "  max |D| per lambda, " << to_string(report.modes[i]) << ":";
            for (double v : report.lambda_max[i]) text << " " << fmt(v);
            text << "\n";
        }
        text << "  counterexamples: " << report.counterexamples.size()
             << ", rank-1 violations: " << report.violations.size() << "\n";
        for (const auto& f : report.counterexamples)
            text << "    counterexample: mode " << to_string(f.mode) << " trial " << f.trial
                 << " rank " << f.rank << "\n";
        for (const auto& f : report.violations)
            text << "    violation: mode " << to_string(f.mode) << " trial " << f.trial << "\n";
        deliver(text.str(), cfg, out);
    }
    return report.counterexample_found() || report.violation_found() ? exit_counterexample
                                                                     : exit_ok;
}

}  // namespace cli_detail

/// Batch front end. Returns the process exit code: 0 success/affine,
/// 1 negative verdict, 2 usage or input error, 3 campaign counterexample.
inline int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    using namespace cli_detail;
    RunConfig cfg;

    CLI::App app{"quasi-free state laboratory on finite self-dual CAR algebras"};
    app.require_subcommand(1);

    auto* validate = app.add_subcommand("validate", "check that an operator is a covariance operator");
    validate->add_option("--op", cfg.op_path, "operator matrix (JSON)")->required();
    validate->add_option("--gamma", cfg.gamma_path, "involution file (default: standard)");
    validate->add_option("--tol", cfg.tol, "involution-compatibility tolerance");

    auto* affine = app.add_subcommand("affine", "decide the affine property of a pair");
    affine->add_option("--op", cfg.op_path, "first operator (JSON)")->required();
    affine->add_option("--op2", cfg.op2_path, "second operator (JSON)")->required();
    affine->add_option("--gamma", cfg.gamma_path, "involution file (default: standard)");
    affine->add_option("--lambda", cfg.lambdas, "interior mixture weight (repeatable)")
        ->check(CLI::Range(std::nextafter(0.0, 1.0), std::nextafter(1.0, 0.0)));
    affine->add_option("--tol", cfg.tol, "decision tolerance");
    affine->add_flag("--dump", cfg.dump, "include the matrices in the report");

    auto* golden = app.add_subcommand("golden", "reproduce the built-in C^3 pair");

    auto* conjecture = app.add_subcommand("conjecture", "difference-rank search campaign");
    conjecture->add_option("--dim", cfg.dim, "space dimension k")->required()
        ->check(CLI::Range(Index(1), Index(7)));
    conjecture->add_option("--gamma", cfg.gamma_path, "involution file (default: standard)");
    conjecture->add_option("--trials", cfg.trials, "trials per mode")->check(CLI::PositiveNumber);
    conjecture->add_option("--seed", cfg.seed, "campaign seed");
    conjecture->add_option("--mode", cfg.mode_names,
                           "sample mode: random, commuting, rank2_perturbation (repeatable)");
    conjecture->add_option("--lambda", cfg.lambdas, "interior mixture weight (repeatable)")
        ->check(CLI::Range(std::nextafter(0.0, 1.0), std::nextafter(1.0, 0.0)));
    conjecture->add_option("--tol", cfg.tol, "decision tolerance");
    conjecture->add_option("--dump", cfg.dump_dir, "directory for flagged-pair JSON dumps");

    for (auto* sub : {validate, affine, golden, conjecture}) {
        sub->add_option("--format", cfg.format, "text or json")
            ->check(CLI::IsMember({"text", "json"}));
        sub->add_option("--out", cfg.out_path, "write the report to a file instead of stdout");
    }

    std::vector<const char*> argv;
    argv.push_back("quasifree");
    for (const auto& a : args) argv.push_back(a.c_str());
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? exit_ok : exit_usage;
    }

    try {
        if (validate->parsed()) return cmd_validate(cfg, out);
        if (affine->parsed()) return cmd_affine(cfg, out);
        if (golden->parsed()) return cmd_golden(cfg, out);
        return cmd_conjecture(cfg, out);
    } catch (const io_error& e) {
        err << "input error: " << e.what() << "\n";
        return exit_usage;
    } catch (const validation_error& e) {
        err << "input error: " << e.what() << "\n";
        return exit_usage;
    } catch (const precondition_error& e) {
        err << "input error: " << e.what() << "\n";
        return exit_usage;
    } catch (const resource_error& e) {
        err << "resource error: " << e.what() << "\n";
        return exit_usage;
    } catch (const internal_error& e) {
        err << "internal error: " << e.what() << "\n";
        return exit_usage;
    }
}

}  // namespace quasifree
