#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "examples.hpp"
#include "ltmcli/commands.hpp"
#include "ltmcli/scenario.hpp"

using namespace ltm;
using namespace ltm::cli;

namespace fs = std::filesystem;

namespace {

const char* kScenario18 = R"(
# negative defensive medicine reference configuration
variant = negmed

[phase1]
p_D = 0.9
p_ND = 0.1
q_D = 0.1
q_ND = 0.2
B_PH = 6
E = 140
C_L = 90

[phase2]
q_ND = 0.3

[annuli]
e1 = 16.9
e2 = 18.5
h1 = 16.9
h2 = 18.4

[schedule]
T1 = 182.5
T2 = 182.5
)";

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

struct TempDir {
    fs::path path;
    TempDir(const char* name) : path(fs::temp_directory_path() / name) {
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

}  // namespace

TEST_CASE("scenario parsing derives canonical parameters from raw inputs") {
    const Scenario s = parse_scenario(kScenario18);
    CHECK(s.variant == models::Variant::NegMed);
    CHECK(s.sys1.neg().eta == doctest::Approx(9.8).epsilon(1e-14));
    CHECK(s.sys2.neg().eta == doctest::Approx(8.4).epsilon(1e-14));
    CHECK(s.sys2.neg().kappa == doctest::Approx(26.4).epsilon(1e-14));
    CHECK(s.e2 == 18.5);
    CHECK(s.T1 == 182.5);
    CHECK(s.integrator.rel_tol == 1e-10);  // default
}

TEST_CASE("parse errors carry line and column") {
    try {
        parse_scenario("variant = negmed\n[phase1\nzeta = 1\n");
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(e.line == 2);
        CHECK(std::string(e.what()).find("line 2") != std::string::npos);
    }
    try {
        parse_scenario("variant = negmed\nzeta 6\n");
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(e.line == 2);
    }
    std::string bad = kScenario18;
    bad.replace(bad.find("e1 = 16.9"), 9, "e1 = oops");
    CHECK_THROWS_AS(parse_scenario(bad), ParseError);
    CHECK_THROWS_AS(parse_scenario("variant = martian\n"), ValidationError);
}

TEST_CASE("canonical dump round-trips to an equal scenario") {
    Scenario s = parse_scenario(kScenario18);
    s.itinerary = {0, 1, 1, 0};
    s.perturb_eps = 0.365;
    const std::string text = dump_canonical(s);
    const Scenario back = parse_scenario(text);
    CHECK(back == s);
    // and the dump of the dump is byte-identical
    CHECK(dump_canonical(back) == text);
}

TEST_CASE("builtin scenarios match the shared fixtures") {
    const Scenario s = builtin_scenario("bio-k");
    CHECK(s.sys1.bio().K_x == 0.99);
    CHECK(s.sys2.bio().K_x == 0.90);
    CHECK(s.e1 == 145.3);
    CHECK_THROWS_AS(builtin_scenario("nope"), ValidationError);
}

TEST_CASE("centers and thresholds commands print the reference numbers") {
    const Scenario s = parse_scenario(kScenario18);
    Options opts;
    std::ostringstream out;
    CHECK(run_command("centers", s, opts, out) == kExitOk);
    CHECK(out.str().find("0.80851063829787") != std::string::npos);

    std::ostringstream out2;
    CHECK(run_command("thresholds", s, opts, out2) == kExitOk);
    // computed from the recomputed periods, not the printed ones
    CHECK(out2.str().find("T1 > ") != std::string::npos);
}

TEST_CASE("periods command validates the grid and writes deterministic CSV") {
    TempDir dir("ltm_cli_periods");
    Scenario s = parse_scenario(kScenario18);
    Options opts;
    opts.out_dir = dir.path.string();

    std::ostringstream out;
    CHECK(run_command("periods", s, opts, out) == kExitOk);
    const std::string csv1 = slurp(dir.path / "periods_phase1.csv");
    CHECK(csv1.substr(0, 6) == "e,tau\n");

    std::ostringstream out2;
    CHECK(run_command("periods", s, opts, out2) == kExitOk);
    CHECK(slurp(dir.path / "periods_phase1.csv") == csv1);  // byte-identical

    Scenario bad = s;
    bad.e_grid = std::vector<double>{10.0, 17.0};  // 10.0 is below e0
    CHECK_THROWS_AS(run_command("periods", bad, opts, out), ValidationError);
    try {
        run_command("periods", bad, opts, out);
    } catch (const ValidationError& e) {
        CHECK(std::string(e.what()).find("10") != std::string::npos);
    }
}

TEST_CASE("link command emits the rectangle polygons") {
    TempDir dir("ltm_cli_link");
    const Scenario s = parse_scenario(kScenario18);
    Options opts;
    opts.out_dir = dir.path.string();
    std::ostringstream out;
    CHECK(run_command("link", s, opts, out) == kExitOk);
    CHECK(out.str().find("linked: yes") != std::string::npos);
    const std::string csv = slurp(dir.path / "rectangles.csv");
    CHECK(csv.substr(0, 9) == "rect,x,y\n");
    CHECK(csv.find("A,") != std::string::npos);
    CHECK(csv.find("B,") != std::string::npos);
}

TEST_CASE("portrait command writes the four boundary curves") {
    TempDir dir("ltm_cli_portrait");
    const Scenario s = parse_scenario(kScenario18);
    Options opts;
    opts.out_dir = dir.path.string();
    std::ostringstream out;
    CHECK(run_command("portrait", s, opts, out) == kExitOk);
    const std::string csv = slurp(dir.path / "portrait.csv");
    CHECK(csv.find("phase1_e1,") != std::string::npos);
    CHECK(csv.find("phase2_h2,") != std::string::npos);
}

TEST_CASE("unknown commands and missing sections are validation errors") {
    const Scenario s = parse_scenario(kScenario18);
    Options opts;
    std::ostringstream out;
    CHECK_THROWS_AS(run_command("frobnicate", s, opts, out), ValidationError);
    CHECK_THROWS_AS(parse_scenario("variant = negmed\n"), ValidationError);
    CHECK_THROWS_AS(run_command("itinerary", s, opts, out), ValidationError);
}

TEST_CASE("exit code mapping") {
    std::ostringstream err;
    const auto code_for = [&](auto&& thrower) {
        try {
            thrower();
        } catch (...) {
            return exit_code_for_current_exception(err);
        }
        return -1;
    };
    CHECK(code_for([] { throw ValidationError("x"); }) == kExitValidationError);
    CHECK(code_for([] { throw NotLinkedError("x"); }) == kExitCertificateFailure);
    CHECK(code_for([] { throw TimeoutError("x"); }) == kExitNumericFailure);
}
