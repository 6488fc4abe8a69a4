#include "commands.hpp"

#include "entrobound/error.hpp"
#include "entrobound/spec_file.hpp"

#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace entrobound;
namespace fs = std::filesystem;

namespace {

const fs::path kFixtures = ENTROBOUND_FIXTURE_DIR;

fs::path scratch(const std::string& name)
{
    const fs::path dir = fs::temp_directory_path() / ("entrobound_cli_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

std::string slurp(const fs::path& p)
{
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

struct Outcome {
    int code;
    std::string log;
    std::string err;
};

Outcome run_cli(cli::RunOptions o)
{
    std::ostringstream log, err;
    const int code = cli::run(o, log, err);
    return {code, log.str(), err.str()};
}

cli::RunOptions options(const std::string& command, const std::string& fixture, const fs::path& out)
{
    cli::RunOptions o;
    o.command = command;
    o.spec = kFixtures / fixture;
    o.out = out;
    return o;
}

std::vector<std::string> csv_rows(const std::string& text)
{
    std::vector<std::string> rows;
    std::size_t pos = 0;
    while (pos < text.size()) {
        const auto end = text.find("\r\n", pos);
        rows.push_back(text.substr(pos, end - pos));
        pos = end + 2;
    }
    return rows;
}

std::vector<std::string> split(const std::string& row)
{
    std::vector<std::string> out;
    std::stringstream ss(row);
    std::string f;
    while (std::getline(ss, f, ',')) out.push_back(f);
    return out;
}

}  // namespace

TEST_CASE("spec parsing")
{
    const auto s = parse_spec(
        "# comment\n[system]\nn = 2\nt0 = -1\nf1 = x2\nf2 = -x1  # trailing\n[initial_set]\nlower = 0, 0\n"
        "upper = 1, 2\n[partition]\nblocks = 1, 1\n[horizon]\nt_max = 5\ndt = 0.01\n[sampling]\nseed = 9\n"
        "[bounds]\nresults = trace, metzler\n[empirical]\neps = 0.3, 0.2, 0.1\nhorizons = 1, 2, 3\n");
    CHECK(s.system.dimension() == 2);
    CHECK(s.t0() == -1.0);
    CHECK(s.initial_set().upper()[1] == 2.0);
    CHECK(s.system.partition().blocks() == 2);
    CHECK(s.horizon.t_max == 5.0);
    CHECK(s.horizon.seed == 9);
    CHECK(s.results == std::vector<std::string>{"trace", "metzler"});
    CHECK(s.empirical.eps.size() == 3);
}

TEST_CASE("spec errors carry byte offsets")
{
    const std::string text = "[system]\nn = 1\nf1 = 2*x1 + * 3\n[initial_set]\nlower = 0\nupper = 1\n";
    try {
        (void)parse_spec(text);
        FAIL("expected parse error");
    } catch (const ParseError& e) {
        CHECK(e.offset() == 27);
    }
    CHECK_THROWS_AS((void)parse_spec("[system]\nn = 1\nf1 = x1\n"), ParseError);
    CHECK_THROWS_AS((void)parse_spec("[nowhere]\nn = 1\n"), ParseError);
    try {
        (void)parse_spec("[system]\nn = 1\nf1 = x1\n[initial_set]\nlower = 0\nupper = abc\n");
        FAIL("expected parse error");
    } catch (const ParseError& e) {
        CHECK(e.offset() == 55);
    }
    CHECK_THROWS_AS((void)parse_real_list("1, 2, x"), ParseError);
}

TEST_CASE("bounds on the LTV example")
{
    const auto out = scratch("bounds");
    auto o = options("bounds", "example_3_6.spec", out);
    o.results = "measure_inf,metzler";
    const auto r = run_cli(o);
    REQUIRE(r.code == cli::kOk);
    const auto rows = csv_rows(slurp(out / "bounds.csv"));
    REQUIRE(rows.size() == 3);
    const auto a = split(rows[1]), b = split(rows[2]);
    CHECK(a[0] == "measure_inf");
    CHECK(std::fabs(std::stod(a[1]) - 2.0 * std::sqrt(2.0)) <= 1e-3);
    CHECK(b[0] == "metzler");
    CHECK(std::fabs(std::stod(b[1]) - 4.0) <= 1e-9);
    CHECK(fs::exists(out / "summary.txt"));
}

TEST_CASE("exit codes")
{
    SUBCASE("parse error")
    {
        const auto r = run_cli(options("bounds", "bad_expression.spec", scratch("bad")));
        CHECK(r.code == cli::kParseError);
        CHECK(r.err.find("at byte 27") != std::string::npos);
    }
    SUBCASE("blow-up")
    {
        CHECK(run_cli(options("bounds", "blowup.spec", scratch("blow"))).code == cli::kBlowUp);
        CHECK(run_cli(options("simulate", "blowup.spec", scratch("blow_sim"))).code == cli::kBlowUp);
    }
    SUBCASE("non-converged tail still writes reports")
    {
        const auto out = scratch("nonconv");
        CHECK(run_cli(options("bounds", "nonconverged.spec", out)).code == cli::kNotConverged);
        CHECK(fs::exists(out / "bounds.csv"));
    }
    SUBCASE("dimension too large")
    {
        CHECK(run_cli(options("empirical", "three_state.spec", scratch("three"))).code == cli::kDimensionTooLarge);
    }
    SUBCASE("violation")
    {
        const auto out = scratch("corrupt");
        CHECK(run_cli(options("verify", "corrupted_verify.spec", out)).code == cli::kViolation);
        CHECK(slurp(out / "verify.txt").find("FAIL") != std::string::npos);
    }
    SUBCASE("unknown result id")
    {
        auto o = options("bounds", "lti_diag.spec", scratch("unknown"));
        o.results = "nonsense";
        CHECK(run_cli(o).code == cli::kParseError);
    }
}

TEST_CASE("verify on the oscillator passes")
{
    const auto out = scratch("verify");
    const auto r = run_cli(options("verify", "oscillator.spec", out));
    CHECK(r.code == cli::kOk);
    const auto text = slurp(out / "verify.txt");
    CHECK(text.find("FAIL") == std::string::npos);
    CHECK(text.find("separation_componentwise: PASS") != std::string::npos);
}

TEST_CASE("verify on a linear system notes a tight volume bound")
{
    const auto out = scratch("verify_lti");
    CHECK(run_cli(options("verify", "lti_diag.spec", out)).code == cli::kOk);
    const auto text = slurp(out / "verify.txt");
    const auto line = text.substr(text.find("volume:"));
    CHECK(line.substr(0, line.find('\n')).find("tight") != std::string::npos);
}

TEST_CASE("empirical on a static system reports zero")
{
    const auto dir = scratch("static");
    {
        std::ofstream spec(dir / "static.spec");
        spec << "[system]\nn = 1\nf1 = 0\n[initial_set]\nlower = 0\nupper = 1\n[empirical]\n"
                "eps = 0.2, 0.1, 0.05\nhorizons = 1, 2, 3\n";
    }
    cli::RunOptions o;
    o.command = "empirical";
    o.spec = dir / "static.spec";
    o.out = dir;
    CHECK(run_cli(o).code == cli::kOk);
    CHECK(slurp(dir / "summary.txt").rfind("estimate = 0\n", 0) == 0);
    const auto rows = csv_rows(slurp(dir / "entropy.csv"));
    CHECK(rows.size() == 10);
    CHECK(rows[0] == "eps,T,span_count,sep_count,span_slope,sep_slope,estimate,band");
}

TEST_CASE("simulate honors overrides and is deterministic")
{
    const auto a = scratch("sim_a"), b = scratch("sim_b");
    auto o = options("simulate", "oscillator.spec", a);
    o.dt = 0.1;
    o.t_max = 1.0;
    o.seed = 7;
    CHECK(run_cli(o).code == cli::kOk);
    o.out = b;
    CHECK(run_cli(o).code == cli::kOk);
    const auto rows = csv_rows(slurp(a / "traj_000.csv"));
    CHECK(rows[0] == "t,x1,x2");
    CHECK(rows.size() == 12);
    CHECK(split(rows.back())[0] == "1");
    std::size_t files = 0;
    for (const auto& entry : fs::directory_iterator(a)) {
        ++files;
        CHECK(slurp(entry.path()) == slurp(b / entry.path().filename()));
    }
    CHECK(files >= 2);
}

TEST_CASE("bounds output is byte-identical across runs")
{
    const auto a = scratch("det_a"), b = scratch("det_b");
    auto o = options("bounds", "cascade.spec", a);
    CHECK(run_cli(o).code == cli::kOk);
    o.out = b;
    CHECK(run_cli(o).code == cli::kOk);
    CHECK(slurp(a / "bounds.csv") == slurp(b / "bounds.csv"));
    CHECK(slurp(a / "summary.txt") == slurp(b / "summary.txt"));
}

TEST_CASE("argv front end")
{
    const auto out = scratch("argv");
    const std::string spec = (kFixtures / "lti_diag.spec").string();
    const std::string dir = out.string();
    std::vector<std::string> args{"entrobound", "bounds", "--spec", spec, "--out", dir, "--results", "trace"};
    std::vector<char*> argv;
    for (auto& s : args) argv.push_back(s.data());
    CHECK(cli::main_entry(static_cast<int>(argv.size()), argv.data()) == cli::kOk);
    const auto rows = csv_rows(slurp(out / "bounds.csv"));
    REQUIRE(rows.size() == 2);
    CHECK(split(rows[1])[0] == "trace");

    std::vector<std::string> bad{"entrobound", "bounds", "--spec", (kFixtures / "missing.spec").string()};
    std::vector<char*> bad_argv;
    for (auto& s : bad) bad_argv.push_back(s.data());
    CHECK(cli::main_entry(static_cast<int>(bad_argv.size()), bad_argv.data()) == cli::kParseError);
}
