#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "cli/commands.hpp"
#include "cli/figures.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <sys/wait.h>

using namespace vnc;
using namespace vnc::cli;

namespace fs = std::filesystem;

namespace {

fs::path scratch_dir()
{
    static const fs::path dir = [] {
        fs::path d = fs::temp_directory_path() / ("vnc_cli_test_" + std::to_string(::getpid()));
        fs::remove_all(d);
        fs::create_directories(d);
        return d;
    }();
    return dir;
}

std::string slurp(const fs::path& p)
{
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

struct Outcome {
    int code = 0;
    std::string out;
    std::string err;
};

Outcome call(std::vector<std::string> args)
{
    args.insert(args.begin(), "vnc");
    std::ostringstream out;
    std::ostringstream err;
    const int code = run(args, out, err);
    return {code, out.str(), err.str()};
}

int shell(const std::string& args)
{
    const std::string cmd = std::string(VNC_TOOL_PATH) + " " + args + " >/dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

} // namespace

TEST_CASE("number formatting")
{
    CHECK(format_number(0.0) == "0");
    CHECK(format_number(0.5) == "0.5");
    CHECK(format_number(12.25) == "12.25");
    CHECK(format_number(1e-3) == "0.001");
    CHECK(format_number(2.5e-4) == "2.5e-04");
    CHECK(format_number(-3e-7) == "-3e-07");
    CHECK(format_number(1e6) == "1000000");
    CHECK(format_number(std::nan("")) == "nan");
    const double x = 0.1 + 0.2;
    CHECK(std::stod(format_number(x)) == x);
}

TEST_CASE("CSV round trip")
{
    CsvTable t;
    t.header = {"a", "b"};
    t.add_row({"1", "2e-05"});
    t.add_row({"3", "4"});
    CHECK(t.str() == "a,b\n1,2e-05\n3,4\n");
    const CsvTable back = parse_csv(t.str());
    CHECK(back.header == t.header);
    CHECK(back.numbers("b") == std::vector<double>{2e-5, 4.0});
    CHECK_THROWS_AS(t.add_row({"1"}), std::logic_error);
    CHECK_THROWS_AS(parse_csv("a,b\n1\n"), UsageError);
    CHECK_THROWS_AS(back.numbers("c"), UsageError);
    CHECK_THROWS_AS(parse_csv("a\n1,5\n"), UsageError);
    CHECK_THROWS_AS(parse_csv("a\nx\n").numbers("a"), UsageError);
}

TEST_CASE("config file parsing")
{
    const KeyValues kv = parse_config_text("# comment\nlayout = mz\n t1=0.4 # trailing\n\n");
    CHECK(kv.at("layout") == "mz");
    CHECK(kv.at("t1") == "0.4");
    CHECK_THROWS_AS(parse_config_text("colour = blue\n"), UsageError);
    CHECK_THROWS_AS(parse_config_text("layout\n"), UsageError);
    CHECK_THROWS_AS(parse_config_text("eta =\n"), UsageError);
}

TEST_CASE("flags override the config file, which overrides defaults")
{
    const KeyValues file = parse_config_text("eta = 0.3\nnbar = 0.002\nlayout = bs\n");
    const KeyValues flags{{"eta", "0.05"}};
    const RunConfig cfg = resolve_config(merge_config(file, flags));
    CHECK(cfg.source.eta == 0.05);
    CHECK(cfg.source.nbar == 0.002);
    CHECK(cfg.sweep.points == 200);
    CHECK(cfg.witness.quad_nodes == 256);
    CHECK(cfg.effective.at("eta") == "0.05");
}

TEST_CASE("transmission keys")
{
    RunConfig c = resolve_config(merge_config({}, {{"layout", "twocopy"}, {"t", "0.9"}}));
    CHECK(c.t1 == 0.9);
    CHECK(c.t2 == 0.9);
    c = resolve_config(merge_config({}, {{"layout", "mz"}, {"t", "0.4"}, {"t2", "0.7"}}));
    CHECK(c.t1 == 0.4);
    CHECK(c.t2 == 0.7);
    CHECK_THROWS_AS(resolve_config(merge_config({}, {{"t1", "1.5"}})), UsageError);
    CHECK_THROWS_AS(resolve_config(merge_config({}, {{"layout", "prism"}})), UsageError);
    CHECK_THROWS_AS(resolve_config(merge_config({}, {{"a-points", "10"}})), UsageError);
    CHECK_THROWS_AS(resolve_config(merge_config({}, {{"eta", "abc"}})), UsageError);
}

TEST_CASE("threshold writes a curve and a sidecar")
{
    const fs::path out = scratch_dir() / "bs.csv";
    const Outcome r = call({"threshold", "--layout", "bs", "--t", "0.5", "--out", out.string()});
    REQUIRE(r.code == kExitOk);
    const CsvTable t = read_csv(out.string());
    CHECK(t.header == std::vector<std::string>{"a", "p_error", "p_success_max", "alpha"});
    CHECK(t.rows.size() >= 50);
    const auto side = nlohmann::json::parse(slurp(out.string() + ".json"));
    CHECK(side["config"]["layout"] == "bs");
    CHECK(side["config"]["t"] == "0.5");
    CHECK(side["diagnostics"]["concave"] == true);
    CHECK(side["diagnostics"]["monotone"] == true);

    const ThresholdCurve c = curve_from_table(t);
    CHECK(c.points.size() == t.rows.size());
}

TEST_CASE("fit and classify read curve files")
{
    const fs::path curve = scratch_dir() / "bs_fit.csv";
    REQUIRE(call({"threshold", "--layout", "bs", "--t", "0.5", "--out", curve.string()}).code == kExitOk);

    const Outcome f = call({"fit", curve.string()});
    REQUIRE(f.code == kExitOk);
    const CsvTable ft = parse_csv(f.out);
    CHECK(ft.numbers("exponent")[0] == doctest::Approx(0.5).epsilon(0.01));
    CHECK(ft.numbers("prefactor")[0] == doctest::Approx(1.0).epsilon(0.01));

    CHECK(call({"fit", curve.string(), "--fit-min", "1e-3", "--fit-max", "2e-3"}).code == kExitNumerical);
    CHECK(call({"fit", curve.string(), "--max-residual", "1e-16"}).code == kExitNumerical);

    const Outcome c = call({"classify", "--curve", curve.string(), "--p-success", "0.0505", "--p-error", "5e-5"});
    REQUIRE(c.code == kExitOk);
    CHECK(parse_csv(c.out).rows[0][4] == "nonclassical");

    const Outcome h = call({"classify", "--layout", "bs", "--t", "0.5", "--p-success", "0.0505", "--p-error", "5e-5"});
    REQUIRE(h.code == kExitOk);
    CHECK(parse_csv(h.out).numbers("hbt_ratio")[0] == doctest::Approx(100.0).epsilon(0.05));

    const Outcome k = call({"classify", "--layout", "bs", "--p-success", "0.001", "--p-error", "1e-4"});
    REQUIRE(k.code == kExitOk);
    CHECK(parse_csv(k.out).rows[0][4] == "classical");
}

TEST_CASE("malformed curve files")
{
    const fs::path bad = scratch_dir() / "bad.csv";
    write_text(bad.string(), "a,p_error\n-1,0.5\n");
    CHECK(call({"fit", bad.string()}).code == kExitUsage);
    write_text(bad.string(), "a,p_error,p_success_max\n-1,0.5,0.2\n-2,0.4,0.3\n");
    CHECK(call({"fit", bad.string()}).code == kExitNumerical);
}

TEST_CASE("simulate reports verdicts and the critical ratio")
{
    const fs::path out = scratch_dir() / "sim.csv";
    const Outcome r = call({"simulate", "--layout", "mz", "--t1", "0.5", "--t2", "0.6", "--eta", "1e-3",
                            "--sweep-min", "1e-6", "--sweep-max", "1e-3", "--sweep-points", "13", "--out",
                            out.string()});
    REQUIRE(r.code == kExitOk);
    const CsvTable t = read_csv(out.string());
    CHECK(t.rows.size() == 13);
    CHECK(t.rows.front()[6] == "nonclassical");
    CHECK(t.rows.back()[6] == "classical");
    const auto side = nlohmann::json::parse(slurp(out.string() + ".json"));
    CHECK(side["verdict_flips"] == 1);
    CHECK(side["critical"]["ratio"].get<double>() == doctest::Approx(50.0).epsilon(0.15));
}

TEST_CASE("usage errors")
{
    CHECK(call({}).code == kExitUsage);
    CHECK(call({"threshold", "--out", (scratch_dir() / "x.csv").string()}).code == kExitUsage);
    CHECK(call({"threshold", "--layout", "bs"}).code == kExitUsage);
    CHECK(call({"threshold", "--layout", "bs", "--colour", "red"}).code == kExitUsage);
    CHECK(call({"reproduce", "fig9", "--out", scratch_dir().string()}).code == kExitUsage);
    CHECK(call({"classify", "--layout", "bs"}).code == kExitUsage);
    CHECK(call({"threshold", "--help"}).code == kExitOk);

    const fs::path cfg = scratch_dir() / "bad.cfg";
    write_text(cfg.string(), "layout = bs\nwavelength = 780\n");
    const Outcome r = call({"threshold", "--config", cfg.string(), "--out", (scratch_dir() / "y.csv").string()});
    CHECK(r.code == kExitUsage);
    CHECK(r.err.find("wavelength") != std::string::npos);
}

TEST_CASE("strict cap turns saturated optima into a numerical failure")
{
    const fs::path out = scratch_dir() / "cap.csv";
    CHECK(call({"threshold", "--layout", "bs", "--cap", "0.5", "--strict-cap", "true", "--out", out.string()}).code ==
          kExitNumerical);
}

TEST_CASE("ratio differences")
{
    CHECK(ratio_difference(2.0, 3.0, "absolute") == doctest::Approx(1.0));
    CHECK(ratio_difference(2.0, 3.0, "relative") == doctest::Approx(0.5));
    CHECK(ratio_difference(2.0, 4.0, "log") == doctest::Approx(std::log(2.0)));
    CHECK_THROWS_AS(ratio_difference(1.0, 1.0, "squared"), UsageError);
}

TEST_CASE("the installed binary reports exit codes")
{
    const fs::path out = scratch_dir() / "bin.csv";
    CHECK(shell("threshold --layout bs --t 0.3 --out " + out.string()) == 0);
    CHECK(shell("threshold --layout bs --bogus 1") == 2);
    CHECK(shell("fit " + out.string() + " --max-residual 1e-12") == 1);
    CHECK(shell("") == 2);
}
