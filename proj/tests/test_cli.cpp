#include "quasifree/cli.hpp"

#include "quasifree/golden.hpp"

#include <catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

using namespace quasifree;

namespace {

struct CliResult {
    int code = -1;
    std::string out;
    std::string err;
};

CliResult run(const std::vector<std::string>& args) {
    std::ostringstream out, err;
    const int code = run_cli(args, out, err);
    return {code, out.str(), err.str()};
}

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

std::string diagonal4_file(const TempDir& dir, const std::string& name, double a, double b) {
    Matrix s = Matrix::Zero(4, 4);
    s(0, 0) = a;
    s(1, 1) = 1 - a;
    s(2, 2) = b;
    s(3, 3) = 1 - b;
    const std::string path = dir.file(name);
    save_matrix(path, s);
    return path;
}

std::string slurp(const std::string& path) {
    std::ifstream in(path);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace

TEST_CASE("cli_requires_a_subcommand", "[cli]") {
    const auto r = run({});
    REQUIRE(r.code == 2);
    REQUIRE_FALSE(r.err.empty());
}

TEST_CASE("cli_help_succeeds", "[cli]") {
    const auto r = run({"--help"});
    REQUIRE(r.code == 0);
    REQUIRE(r.out.find("quasi-free") != std::string::npos);
}

TEST_CASE("cli_rejects_unknown_subcommands_and_missing_options", "[cli]") {
    REQUIRE(run({"frobnicate"}).code == 2);
    REQUIRE(run({"validate"}).code == 2);
    REQUIRE(run({"affine", "--op", "only_one.json"}).code == 2);
}

TEST_CASE("cli_validate_accepts_a_covariance", "[cli]") {
    TempDir dir("quasifree_cli_validate");
    const std::string path = dir.file("s.json");
    save_matrix(path, golden_s().matrix());

    const auto r = run({"validate", "--op", path});
    REQUIRE(r.code == 0);
    REQUIRE(r.out.find("valid: yes") != std::string::npos);

    const auto j = run({"validate", "--op", path, "--format", "json"});
    REQUIRE(j.code == 0);
    const auto parsed = json::parse(j.out);
    REQUIRE(parsed["kind"] == "validate");
    REQUIRE(parsed["check"]["ok"] == true);
}

TEST_CASE("cli_validate_rejects_non_covariances", "[cli]") {
    TempDir dir("quasifree_cli_invalid");
    const std::string path = dir.file("identity.json");
    save_matrix(path, Matrix::Identity(3, 3));

    const auto r = run({"validate", "--op", path});
    REQUIRE(r.code == 1);
    REQUIRE(r.out.find("valid: no") != std::string::npos);
}

TEST_CASE("cli_reports_unreadable_input_as_usage_errors", "[cli]") {
    TempDir dir("quasifree_cli_broken");
    std::ofstream(dir.file("broken.json")) << "{ not json";

    const auto r = run({"validate", "--op", dir.file("broken.json")});
    REQUIRE(r.code == 2);
    REQUIRE(r.err.find("input error") != std::string::npos);

    REQUIRE(run({"validate", "--op", dir.file("missing.json")}).code == 2);
}

TEST_CASE("cli_affine_on_the_golden_pair", "[cli]") {
    TempDir dir("quasifree_cli_golden_pair");
    save_matrix(dir.file("s.json"), golden_s().matrix());
    save_matrix(dir.file("s2.json"), golden_s2().matrix());

    const auto r = run({"affine", "--op", dir.file("s.json"), "--op2", dir.file("s2.json")});
    REQUIRE(r.code == 0);
    REQUIRE(r.out.find("verdict: affine (numeric)") != std::string::npos);
    REQUIRE(r.out.find("rank of S - S2: 2") != std::string::npos);
    REQUIRE(r.out.find("symmetrized forms agree: yes") != std::string::npos);
}

TEST_CASE("cli_affine_flags_commuting_counterexamples", "[cli]") {
    TempDir dir("quasifree_cli_commuting");
    const auto s = diagonal4_file(dir, "s.json", 0.9, 0.6);
    const auto s2 = diagonal4_file(dir, "s2.json", 0.3, 0.2);

    const auto r = run({"affine", "--op", s, "--op2", s2});
    REQUIRE(r.code == 1);
    REQUIRE(r.out.find("verdict: not_affine (analytic)") != std::string::npos);
    REQUIRE(r.out.find("witness: c_{1,2,3,4} at lambda = 0.5") != std::string::npos);
    REQUIRE(r.out.find("joint spectra") != std::string::npos);

    const auto j = run({"affine", "--op", s, "--op2", s2, "--format", "json", "--dump"});
    REQUIRE(j.code == 1);
    const auto parsed = json::parse(j.out);
    REQUIRE(parsed["verdict"] == "not_affine");
    REQUIRE(parsed["necessary"]["holds"] == true);
    REQUIRE(max_abs(matrix_from_json(parsed["S2"]) -
                    load_matrix(s2)) == 0.0);
}

TEST_CASE("cli_affine_validates_its_inputs", "[cli]") {
    TempDir dir("quasifree_cli_affine_bad");
    save_matrix(dir.file("s3.json"), golden_s().matrix());
    const auto s4 = diagonal4_file(dir, "s4.json", 0.9, 0.6);

    const auto mismatch = run({"affine", "--op", dir.file("s3.json"), "--op2", s4});
    REQUIRE(mismatch.code == 2);
    REQUIRE(mismatch.err.find("dimensions differ") != std::string::npos);

    save_matrix(dir.file("not_cov.json"), Matrix::Identity(4, 4));
    REQUIRE(run({"affine", "--op", s4, "--op2", dir.file("not_cov.json")}).code == 2);

    REQUIRE(run({"affine", "--op", s4, "--op2", s4, "--lambda", "1.5"}).code == 2);
    REQUIRE(run({"affine", "--op", s4, "--op2", s4, "--lambda", "0.5"}).code == 0);
}

TEST_CASE("cli_golden_reproduces_and_reports", "[cli]") {
    const auto r = run({"golden"});
    REQUIRE(r.code == 0);
    REQUIRE(r.out.find("reproduction: PASS") != std::string::npos);
    REQUIRE(r.out.find("the states mix affinely; the normal-form occupation numbers do not") !=
            std::string::npos);

    const auto j = run({"golden", "--format", "json"});
    REQUIRE(j.code == 0);
    const auto parsed = json::parse(j.out);
    REQUIRE(parsed["passed"] == true);
    REQUIRE(parsed["normal_form"]["verdict"] == "not_affine");
}

TEST_CASE("cli_conjecture_runs_are_deterministic", "[cli]") {
    const std::vector<std::string> args = {"conjecture", "--dim", "2", "--trials", "5",
                                           "--seed", "3", "--format", "json"};
    const auto first = run(args);
    const auto second = run(args);
    REQUIRE(first.code == 0);
    REQUIRE(first.out == second.out);

    const auto parsed = json::parse(first.out);
    REQUIRE(parsed["kind"] == "campaign");
    std::int64_t total = 0;
    for (const auto& cell : parsed["histogram"]) {
        REQUIRE(cell["verdict"] == "affine");
        total += cell["count"].get<std::int64_t>();
    }
    REQUIRE(total == 15);
    REQUIRE(parsed["counterexamples"].empty());
    REQUIRE(parsed["violations"].empty());
}

TEST_CASE("cli_conjecture_writes_reports_to_files", "[cli]") {
    TempDir dir("quasifree_cli_out");
    const std::vector<std::string> base = {"conjecture", "--dim", "3", "--trials", "4",
                                           "--seed", "9", "--format", "json"};
    const auto direct = run(base);
    REQUIRE(direct.code == 0);

    auto to_file = base;
    to_file.insert(to_file.end(), {"--out", dir.file("report.json")});
    const auto filed = run(to_file);
    REQUIRE(filed.code == 0);
    REQUIRE(filed.out.empty());
    REQUIRE(slurp(dir.file("report.json")) == direct.out);
}

TEST_CASE("cli_conjecture_validates_its_options", "[cli]") {
    REQUIRE(run({"conjecture", "--dim", "9", "--trials", "1"}).code == 2);
    REQUIRE(run({"conjecture", "--dim", "4", "--trials", "0"}).code == 2);
    const auto bad_mode = run({"conjecture", "--dim", "2", "--trials", "1", "--mode", "bogus"});
    REQUIRE(bad_mode.code == 2);
    REQUIRE(bad_mode.err.find("unknown sample mode") != std::string::npos);
    REQUIRE(run({"conjecture", "--dim", "2", "--trials", "2", "--mode", "commuting"}).code == 0);
}

TEST_CASE("cli_text_mode_campaign_output", "[cli]") {
    const auto r = run({"conjecture", "--dim", "3", "--trials", "2", "--seed", "11"});
    REQUIRE(r.code == 0);
    REQUIRE(r.out.find("difference-rank campaign on C^3") != std::string::npos);
    REQUIRE(r.out.find("counterexamples: 0, rank-1 violations: 0") != std::string::npos);
}
