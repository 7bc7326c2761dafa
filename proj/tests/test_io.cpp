#include "quasifree/matrix_io.hpp"

#include "quasifree/cli.hpp"
#include "quasifree/golden.hpp"
#include "quasifree/report_io.hpp"

#include <catch_amalgamated.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <string>

using namespace quasifree;

namespace {

struct TempDir {
    std::filesystem::path path;

    explicit TempDir(const std::string& name)
        : path(std::filesystem::temp_directory_path() / name) {
        std::filesystem::remove_all(path);
        std::filesystem::create_directories(path);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path, ec);
    }

    std::string file(const std::string& name) const { return (path / name).string(); }
};

}  // namespace

TEST_CASE("matrix_json_round_trip_is_exact", "[io]") {
    Rng rng(61);
    const Matrix m = rng.matrix(3, 4);
    REQUIRE(max_abs(matrix_from_json(matrix_to_json(m)) - m) == 0.0);

    TempDir dir("quasifree_io_matrix");
    save_matrix(dir.file("m.json"), m);
    REQUIRE(max_abs(load_matrix(dir.file("m.json")) - m) == 0.0);
}

TEST_CASE("matrix_json_rejects_malformed_input", "[io]") {
    REQUIRE_THROWS_AS(matrix_from_json(json::array()), io_error);
    REQUIRE_THROWS_AS(matrix_from_json(json{{"rows", 2}, {"cols", 2}}), io_error);
    REQUIRE_THROWS_AS(
        matrix_from_json(json{{"rows", 1.5}, {"cols", 2}, {"entries", json::array()}}),
        io_error);
    REQUIRE_THROWS_AS(
        matrix_from_json(json{{"rows", 0}, {"cols", 2}, {"entries", json::array()}}), io_error);

    json wrong_count = matrix_to_json(Matrix::Identity(2, 2));
    wrong_count["entries"].erase(3);
    REQUIRE_THROWS_WITH(matrix_from_json(wrong_count),
                        Catch::Matchers::ContainsSubstring("expected 4 entries"));

    json bad_entry = matrix_to_json(Matrix::Identity(2, 2));
    bad_entry["entries"][1] = "zero";
    REQUIRE_THROWS_AS(matrix_from_json(bad_entry), io_error);

    json not_finite = matrix_to_json(Matrix::Identity(2, 2));
    not_finite["entries"][2][0] = std::nan("");
    REQUIRE_THROWS_WITH(matrix_from_json(not_finite),
                        Catch::Matchers::ContainsSubstring("not finite"));
}

TEST_CASE("involution_json_round_trip", "[io]") {
    for (Index k : {3, 4, 5}) {
        const auto gamma = Involution::standard(k);
        const auto back = involution_from_json(involution_to_json(gamma));
        REQUIRE(max_abs(back.matrix() - gamma.matrix()) == 0.0);
    }

    TempDir dir("quasifree_io_involution");
    save_involution(dir.file("g.json"), golden_involution());
    REQUIRE(max_abs(load_involution(dir.file("g.json")).matrix() -
                    golden_involution().matrix()) == 0.0);
}

TEST_CASE("involution_json_rejects_bad_input", "[io]") {
    REQUIRE_THROWS_AS(involution_from_json(json{{"k", 2}}), io_error);

    json mismatched = involution_to_json(Involution::standard(3));
    mismatched["k"] = 4;
    REQUIRE_THROWS_AS(involution_from_json(mismatched), io_error);

    // a unitary whose square is -1 is not an involution
    Matrix rot(2, 2);
    rot << 0, -1, 1, 0;
    json not_involutive;
    not_involutive["k"] = 2;
    not_involutive["G"] = matrix_to_json(rot);
    REQUIRE_THROWS_AS(involution_from_json(not_involutive), validation_error);
}

TEST_CASE("load_json_reports_file_problems", "[io]") {
    TempDir dir("quasifree_io_errors");
    REQUIRE_THROWS_WITH(load_json(dir.file("missing.json")),
                        Catch::Matchers::ContainsSubstring("cannot open"));

    std::ofstream(dir.file("broken.json")) << "{ not json";
    REQUIRE_THROWS_WITH(load_json(dir.file("broken.json")),
                        Catch::Matchers::ContainsSubstring("parse") &&
                            Catch::Matchers::ContainsSubstring("broken.json"));
}

TEST_CASE("save_json_writes_a_trailing_newline", "[io]") {
    TempDir dir("quasifree_io_save");
    ordered_json j;
    j["a"] = 1;
    save_json(dir.file("x.json"), j);
    std::ifstream in(dir.file("x.json"));
    std::string content((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    REQUIRE(!content.empty());
    REQUIRE(content.back() == '\n');
    REQUIRE(load_json(dir.file("x.json"))["a"] == 1);
}

TEST_CASE("necessary_check_json_round_trip", "[io]") {
    const auto nc = necessary_check(golden_s(), golden_s2());
    const auto back = necessary_check_from_json(necessary_check_to_json(nc));
    REQUIRE(back.holds == nc.holds);
    REQUIRE(back.max_residual == nc.max_residual);
    REQUIRE(back.tolerance == nc.tolerance);
}

TEST_CASE("covariance_check_json_fields", "[io]") {
    const auto good = covariance_check_to_json(
        check_covariance(golden_s().matrix(), golden_involution()));
    REQUIRE(good["ok"] == true);
    REQUIRE(good["hermitian_ok"] == true);

    const auto bad = covariance_check_to_json(
        check_covariance(Matrix::Identity(3, 3), golden_involution()));
    REQUIRE(bad["ok"] == false);
    REQUIRE(bad["gamma_ok"] == false);
    REQUIRE(std::abs(bad["gamma_residual"].get<double>() - 1.0) < 1e-12);
}

TEST_CASE("affine_report_json_round_trips_bytewise", "[io]") {
    const auto gamma = Involution::standard(4);
    const std::vector<AffineReport> reports = {
        numeric_test(random_covariance(4, gamma, 0.9, 62), random_covariance(4, gamma, 0.9, 63)),
        decide_commuting(CovarianceOperator::validated(
                             (Matrix(4, 4) << 0.9, 0, 0, 0, 0, 0.1, 0, 0, 0, 0, 0.6, 0, 0, 0, 0,
                              0.4).finished(),
                             gamma),
                         CovarianceOperator::validated(
                             (Matrix(4, 4) << 0.3, 0, 0, 0, 0, 0.7, 0, 0, 0, 0, 0.2, 0, 0, 0, 0,
                              0.8).finished(),
                             gamma)),
    };
    for (const auto& report : reports) {
        const auto j = affine_report_to_json(report);
        REQUIRE(j["schema"] == report_schema);
        REQUIRE(j["kind"] == "affine");
        const auto again = affine_report_to_json(affine_report_from_json(j));
        REQUIRE(j.dump() == again.dump());
    }
}

TEST_CASE("campaign_report_json_round_trips_bytewise", "[io]") {
    ConjectureOptions opts;
    opts.trials = 3;
    opts.seed = 64;
    opts.threads = 2;
    const auto report = explore_conjecture(3, Involution::standard(3), opts);
    for (const auto& cell : report.histogram) REQUIRE(cell.verdict == Verdict::affine);

    const auto j = campaign_report_to_json(report);
    REQUIRE(j["kind"] == "campaign");
    REQUIRE(j["trials"] == 3);
    const auto again = campaign_report_to_json(campaign_report_from_json(j));
    REQUIRE(j.dump() == again.dump());
}

TEST_CASE("campaign_finding_json_round_trips", "[io]") {
    Rng rng(65);
    CampaignFinding finding;
    finding.mode = SampleMode::commuting;
    finding.trial = 5;
    finding.trial_seed = 1234567890123ULL;
    finding.verdict = Verdict::affine;
    finding.rank = 4;
    finding.max_discrepancy = 3.25e-11;
    finding.s = rng.hermitian(3);
    finding.s2 = rng.hermitian(3);
    finding.files = {"a.json", "b.json"};

    const auto back = campaign_finding_from_json(campaign_finding_to_json(finding));
    REQUIRE(back.mode == finding.mode);
    REQUIRE(back.trial == finding.trial);
    REQUIRE(back.trial_seed == finding.trial_seed);
    REQUIRE(back.rank == finding.rank);
    REQUIRE(back.max_discrepancy == finding.max_discrepancy);
    REQUIRE(max_abs(back.s - finding.s) == 0.0);
    REQUIRE(max_abs(back.s2 - finding.s2) == 0.0);
    REQUIRE(back.files == finding.files);
}

TEST_CASE("golden_report_json_shape", "[io]") {
    const auto j = golden_report_to_json(run_golden());
    REQUIRE(j["kind"] == "golden");
    REQUIRE(j["passed"] == true);
    REQUIRE(j["normal_form"]["verdict"] == "not_affine");
    REQUIRE(j["state_sweep"]["verdict"] == "affine");
    REQUIRE(std::abs(j["expected"]["cross_value_S2"].get<double>() + 2 * std::sqrt(3.0) / 9) <
            1e-15);
    REQUIRE(j["necessary"]["holds"] == true);
}

TEST_CASE("finding_dumps_are_deterministic_and_loadable", "[io]") {
    TempDir dir("quasifree_io_dump");
    const auto gamma = Involution::standard(4);
    const auto pair = sample_pair(SampleMode::rank2_perturbation, 4, gamma, 66);

    CampaignFinding finding;
    finding.mode = SampleMode::rank2_perturbation;
    finding.trial = 7;
    finding.s = pair.s.matrix();
    finding.s2 = pair.s2.matrix();

    const auto paths = write_finding_pair(finding, gamma, dir.path.string(), "counterexample");
    REQUIRE(paths.size() == 3);
    REQUIRE(paths[0] ==
            (dir.path / "counterexample_rank2_perturbation_trial7_S.json").string());
    REQUIRE(paths[1] ==
            (dir.path / "counterexample_rank2_perturbation_trial7_S2.json").string());
    REQUIRE(paths[2] ==
            (dir.path / "counterexample_rank2_perturbation_trial7_gamma.json").string());
    REQUIRE(max_abs(load_matrix(paths[0]) - finding.s) == 0.0);
    REQUIRE(max_abs(load_matrix(paths[1]) - finding.s2) == 0.0);
    REQUIRE(max_abs(load_involution(paths[2]).matrix() - gamma.matrix()) == 0.0);
}
