#pragma once

#include "quasifree/affine.hpp"
#include "quasifree/covariance.hpp"
#include "quasifree/golden.hpp"
#include "quasifree/matrix_io.hpp"

#include <optional>
#include <string>
#include <vector>

namespace quasifree {

inline constexpr const char* report_schema = "1";

namespace detail {

inline const json& require_field(const json& j, const char* name) {
    if (!j.is_object() || !j.contains(name))
        throw io_error(std::string("report: missing field ") + name);
    return j[name];
}

inline Verdict verdict_from_string(const std::string& s) {
    if (s == "affine") return Verdict::affine;
    if (s == "not_affine") return Verdict::not_affine;
    throw io_error("report: unknown verdict " + s);
}

inline Method method_from_string(const std::string& s) {
    if (s == "analytic") return Method::analytic;
    if (s == "numeric") return Method::numeric;
    throw io_error("report: unknown method " + s);
}

inline SampleMode mode_from_string_checked(const std::string& s) {
    const auto mode = sample_mode_from_string(s);
    if (!mode) throw io_error("report: unknown sample mode " + s);
    return *mode;
}

}  // namespace detail

inline ordered_json necessary_check_to_json(const NecessaryCheck& nc) {
    ordered_json j;
    j["holds"] = nc.holds;
    j["max_residual"] = nc.max_residual;
    j["tolerance"] = nc.tolerance;
    return j;
}

inline NecessaryCheck necessary_check_from_json(const json& j) {
    NecessaryCheck nc;
    nc.holds = detail::require_field(j, "holds").get<bool>();
    nc.max_residual = detail::require_field(j, "max_residual").get<double>();
    nc.tolerance = detail::require_field(j, "tolerance").get<double>();
    return nc;
}

inline ordered_json covariance_check_to_json(const CovarianceCheck& check) {
    ordered_json j;
    j["hermiticity"] = check.hermiticity;
    j["spectrum_low"] = check.spectrum_low;
    j["spectrum_high"] = check.spectrum_high;
    j["gamma_residual"] = check.gamma_residual;
    j["herm_tol"] = check.herm_tol;
    j["spectrum_tol"] = check.spectrum_tol;
    j["gamma_tol"] = check.gamma_tol;
    j["hermitian_ok"] = check.hermitian_ok;
    j["spectrum_ok"] = check.spectrum_ok;
    j["gamma_ok"] = check.gamma_ok;
    j["ok"] = check.ok();
    return j;
}

inline ordered_json affine_report_to_json(const AffineReport& r) {
    ordered_json j;
    j["schema"] = report_schema;
    j["kind"] = "affine";
    j["verdict"] = to_string(r.verdict);
    j["method"] = to_string(r.method);
    if (r.witness_monomial) j["witness_monomial"] = *r.witness_monomial;
    if (r.witness_lambda) j["witness_lambda"] = *r.witness_lambda;
    j["max_discrepancy"] = r.max_discrepancy;
    j["diff_rank"] = r.diff_rank;
    j["commuting"] = r.commuting;
    if (r.joint_alphas) {
        ordered_json pairs = ordered_json::array();
        for (const auto& [a, a2] : *r.joint_alphas) pairs.push_back({a, a2});
        j["joint_alphas"] = std::move(pairs);
    }
    j["lambda_grid"] = r.lambda_grid;
    j["lambda_max"] = r.lambda_max;
    j["decision_tol"] = r.decision_tol;
    return j;
}

inline AffineReport affine_report_from_json(const json& j) {
    AffineReport r;
    r.verdict = detail::verdict_from_string(detail::require_field(j, "verdict").get<std::string>());
    r.method = detail::method_from_string(detail::require_field(j, "method").get<std::string>());
    if (j.contains("witness_monomial"))
        r.witness_monomial = j["witness_monomial"].get<std::vector<int>>();
    if (j.contains("witness_lambda")) r.witness_lambda = j["witness_lambda"].get<double>();
    r.max_discrepancy = detail::require_field(j, "max_discrepancy").get<double>();
    r.diff_rank = detail::require_field(j, "diff_rank").get<int>();
    r.commuting = detail::require_field(j, "commuting").get<bool>();
    if (j.contains("joint_alphas")) {
        std::vector<std::pair<double, double>> pairs;
        for (const auto& p : j["joint_alphas"])
            pairs.emplace_back(p.at(0).get<double>(), p.at(1).get<double>());
        r.joint_alphas = std::move(pairs);
    }
    r.lambda_grid = detail::require_field(j, "lambda_grid").get<std::vector<double>>();
    r.lambda_max = detail::require_field(j, "lambda_max").get<std::vector<double>>();
    r.decision_tol = detail::require_field(j, "decision_tol").get<double>();
    return r;
}

inline ordered_json campaign_finding_to_json(const CampaignFinding& f) {
    ordered_json j;
    j["mode"] = to_string(f.mode);
    j["trial"] = f.trial;
    j["trial_seed"] = f.trial_seed;
    j["verdict"] = to_string(f.verdict);
    j["rank"] = f.rank;
    j["max_discrepancy"] = f.max_discrepancy;
    j["S"] = matrix_to_json(f.s);
    j["S2"] = matrix_to_json(f.s2);
    j["files"] = f.files;
    return j;
}

inline CampaignFinding campaign_finding_from_json(const json& j) {
    CampaignFinding f;
    f.mode = detail::mode_from_string_checked(detail::require_field(j, "mode").get<std::string>());
    f.trial = detail::require_field(j, "trial").get<int>();
    f.trial_seed = detail::require_field(j, "trial_seed").get<std::uint64_t>();
    f.verdict = detail::verdict_from_string(detail::require_field(j, "verdict").get<std::string>());
    f.rank = detail::require_field(j, "rank").get<int>();
    f.max_discrepancy = detail::require_field(j, "max_discrepancy").get<double>();
    f.s = matrix_from_json(detail::require_field(j, "S"));
    f.s2 = matrix_from_json(detail::require_field(j, "S2"));
    f.files = detail::require_field(j, "files").get<std::vector<std::string>>();
    return f;
}

inline ordered_json campaign_report_to_json(const CampaignReport& r) {
    ordered_json j;
    j["schema"] = report_schema;
    j["kind"] = "campaign";
    j["k"] = r.k;
    j["trials"] = r.trials_per_mode;
    j["seed"] = r.seed;
    j["decision_tol"] = r.decision_tol;
    ordered_json modes = ordered_json::array();
    for (SampleMode m : r.modes) modes.push_back(to_string(m));
    j["modes"] = std::move(modes);
    j["lambda_grid"] = r.lambda_grid;
    ordered_json histogram = ordered_json::array();
    for (const auto& cell : r.histogram) {
        ordered_json c;
        c["verdict"] = to_string(cell.verdict);
        c["rank"] = cell.rank;
        c["count"] = cell.count;
        histogram.push_back(std::move(c));
    }
    j["histogram"] = std::move(histogram);
    ordered_json lambda_max = ordered_json::array();
    for (std::size_t i = 0; i < r.modes.size(); ++i) {
        ordered_json entry;
        entry["mode"] = to_string(r.modes[i]);
        entry["max"] = r.lambda_max[i];
        lambda_max.push_back(std::move(entry));
    }
    j["lambda_max"] = std::move(lambda_max);
    ordered_json cx = ordered_json::array();
    for (const auto& f : r.counterexamples) cx.push_back(campaign_finding_to_json(f));
    j["counterexamples"] = std::move(cx);
    ordered_json vi = ordered_json::array();
    for (const auto& f : r.violations) vi.push_back(campaign_finding_to_json(f));
    j["violations"] = std::move(vi);
    return j;
}

inline CampaignReport campaign_report_from_json(const json& j) {
    CampaignReport r;
    r.k = detail::require_field(j, "k").get<Index>();
    r.trials_per_mode = detail::require_field(j, "trials").get<int>();
    r.seed = detail::require_field(j, "seed").get<std::uint64_t>();
    r.decision_tol = detail::require_field(j, "decision_tol").get<double>();
    for (const auto& m : detail::require_field(j, "modes"))
        r.modes.push_back(detail::mode_from_string_checked(m.get<std::string>()));
    r.lambda_grid = detail::require_field(j, "lambda_grid").get<std::vector<double>>();
    for (const auto& c : detail::require_field(j, "histogram")) {
        HistogramCell cell;
        cell.verdict =
            detail::verdict_from_string(detail::require_field(c, "verdict").get<std::string>());
        cell.rank = detail::require_field(c, "rank").get<int>();
        cell.count = detail::require_field(c, "count").get<std::int64_t>();
        r.histogram.push_back(cell);
    }
    for (const auto& entry : detail::require_field(j, "lambda_max"))
        r.lambda_max.push_back(detail::require_field(entry, "max").get<std::vector<double>>());
    for (const auto& f : detail::require_field(j, "counterexamples"))
        r.counterexamples.push_back(campaign_finding_from_json(f));
    for (const auto& f : detail::require_field(j, "violations"))
        r.violations.push_back(campaign_finding_from_json(f));
    return r;
}

inline ordered_json golden_report_to_json(const GoldenReport& r) {
    ordered_json j;
    j["schema"] = report_schema;
    j["kind"] = "golden";
    j["eigenvalues"] = {{"S", r.eig_s}, {"S2", r.eig_s2}, {"mixture", r.eig_mix}};
    ordered_json nf;
    nf["value_S"] = r.value_s;
    nf["value_S2"] = r.value_s2;
    nf["value_mixture"] = r.value_mix;
    nf["discrepancy"] = r.normal_form_discrepancy;
    nf["verdict"] = to_string(r.normal_form_verdict);
    j["normal_form"] = std::move(nf);
    j["cross_value_S2"] = r.cross_value_s2;
    ordered_json sweep;
    sweep["max_discrepancy"] = r.state_sweep_max;
    sweep["verdict"] = to_string(r.state_sweep_verdict);
    j["state_sweep"] = std::move(sweep);
    j["diff_rank"] = r.diff_rank;
    j["commutator"] = r.commutator;
    j["necessary"] = necessary_check_to_json(r.necessary);
    ordered_json exp;
    exp["eigenvalues_S"] = r.expected_eig_s;
    exp["eigenvalues_S2"] = r.expected_eig_s2;
    exp["eigenvalues_mixture"] = r.expected_eig_mix;
    exp["value_S"] = r.expected_value_s;
    exp["value_S2"] = r.expected_value_s2;
    exp["value_mixture"] = r.expected_value_mix;
    exp["discrepancy_magnitude"] = r.expected_discrepancy_magnitude;
    exp["cross_value_S2"] = r.expected_cross_value_s2;
    j["expected"] = std::move(exp);
    j["passed"] = r.passed();
    return j;
}

}  // namespace quasifree
