#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>

#include "doctest.h"
#include "plate/error.hpp"
#include "plate/io.hpp"

using namespace plate;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() / ("plate_io_test_" + std::to_string(::getpid()) + "_" +
                                            std::to_string(reinterpret_cast<std::uintptr_t>(this)));
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

bool same_config(const RunConfig& a, const RunConfig& b) { return config_echo(a) == config_echo(b); }

}  // namespace

TEST_CASE("empty config gives the documented defaults") {
    const RunConfig c = parse_config("# nothing but a comment\n\n");
    const RunConfig d;
    CHECK(c.dim == 2);
    CHECK(c.nodes_per_side == 65);
    CHECK(c.radius_B == 1.5);
    CHECK(c.omega0 == std::numbers::pi / 4);
    CHECK_FALSE(c.eps.has_value());
    CHECK(c.penalty == PenaltyVariant::Plain);
    CHECK(c.init_shape == InitShape::Disk);
    CHECK(c.quantiles == d.quantiles);
    CHECK(c.delta_rel == 1e-6);
    CHECK(c.max_steps == 200);
    CHECK(c.seed == 1);
    CHECK(same_config(c, d));
}

TEST_CASE("config parsing") {
    const RunConfig c = parse_config(
        "dim = 3\n"
        "nodes_per_side = 33   # trailing comment\n"
        "radius_B=2\n"
        "eps = 1e-5\n"
        "penalty = rewarding\n"
        "init_shape = two_disks\n"
        "quantiles = 0.05, 0.1\n"
        "seed = 42\n"
        "solver = cg\n"
        "closure = zero_extension\n"
        "eps_override = true\n");
    CHECK(c.dim == 3);
    CHECK(c.nodes_per_side == 33);
    CHECK(c.radius_B == 2.0);
    CHECK(c.eps == 1e-5);
    CHECK(c.penalty == PenaltyVariant::Rewarding);
    CHECK(c.init_shape == InitShape::TwoDisks);
    CHECK(c.quantiles == std::vector<double>{0.05, 0.1});
    CHECK(c.seed == 42);
    CHECK(c.solver == InnerSolver::ConjugateGradient);
    CHECK(c.closure == BoundaryClosure::ZeroExtension);
    CHECK(c.eps_override);

    CHECK(same_config(parse_config(config_echo(c)), c));
}

TEST_CASE("config errors carry line numbers and field names") {
    auto error_of = [](const std::string& text) {
        try {
            parse_config(text);
        } catch (const ConfigError& e) {
            return std::make_pair(e.line(), e.field());
        }
        return std::make_pair(-1, std::string());
    };
    CHECK(error_of("dim = 2\ncolour = red\n") == std::make_pair(2, std::string("colour")));
    CHECK(error_of("\n\nnodes_per_side\n").first == 3);
    CHECK(error_of("omega0 = abc\n") == std::make_pair(1, std::string("omega0")));
    CHECK(error_of("seed = 1\nseed = 2\n") == std::make_pair(2, std::string("seed")));
    CHECK(error_of("omega0 = -1\n").second == "omega0");
    CHECK(error_of("penalty = harsh\n").second == "penalty");
    CHECK(error_of("quantiles = 0.1,,0.2\n").second == "quantiles");
    CHECK(error_of("max_steps = 2.5\n").second == "max_steps");
}

TEST_CASE("eps above the threshold needs the override") {
    RunConfig c = parse_config("penalty = rewarding\neps = 0.5\nmax_steps = 0\n");
    try {
        optimize(c);
        FAIL("expected a threshold error");
    } catch (const ConfigError& e) {
        CHECK(e.field() == "eps");
        CHECK(std::string(e.what()).find("threshold") != std::string::npos);
    }
    c.eps_override = true;
    CHECK(optimize(c).eps == 0.5);
}

TEST_CASE("missing config file") {
    CHECK_THROWS_AS(load_config("/nonexistent/plate.cfg"), IoError);
}

TEST_CASE("trace csv") {
    std::ostringstream out;
    write_trace_csv(out, {{0, 1.0 / 3.0, 0.5, 0.0, 1.0 / 3.0, true}, {1, 2.0, 0.25, -1e-3, 1.999, false}});
    const std::string text = out.str();
    CHECK(text.rfind("step,gamma,volume,penalty,J,accepted\n", 0) == 0);
    CHECK(text.find("0,0.33333333333333331,0.5,0,0.33333333333333331,1\n") != std::string::npos);
    CHECK(text.find("1,2,0.25,-0.001,1.9990000000000001,0\n") != std::string::npos);
    CHECK(std::stod(format_number(0.1)) == 0.1);
}

TEST_CASE("mask and field dumps round-trip") {
    TempDir tmp;
    const Grid g(2, 17, 1.25);
    const Mask m = ball_mask(g, {0.2, 0.0, 0.0}, 0.6);

    write_pgm(tmp.path / "m.pgm", m);
    CHECK(read_pgm(tmp.path / "m.pgm", g) == m);
    const std::string pgm = slurp(tmp.path / "m.pgm");
    CHECK(pgm.rfind("P5\n17 17\n255\n", 0) == 0);
    CHECK(pgm.size() == std::string("P5\n17 17\n255\n").size() + 17 * 17);

    write_mask_binary(tmp.path / "m.msk", m);
    const std::string raw = slurp(tmp.path / "m.msk");
    REQUIRE(raw.size() == 32 + g.node_count());
    CHECK(raw.substr(0, 4) == "MSK1");
    CHECK(read_mask_binary(tmp.path / "m.msk") == m);

    const Grid g3(3, 9, 1.0);
    const Mask m3 = ball_mask(g3, {0.0, 0.0, 0.0}, 0.7);
    write_mask_binary(tmp.path / "m3.msk", m3);
    CHECK(read_mask_binary(tmp.path / "m3.msk") == m3);
    CHECK_THROWS_AS(write_pgm(tmp.path / "m3.pgm", m3), InvalidArgument);

    const ToneResult t = fundamental_tone(m);
    write_field_binary(tmp.path / "u.fld", t.eigenfield);
    const auto [grid, values] = read_field_binary(tmp.path / "u.fld");
    CHECK(grid == g);
    CHECK(values == t.eigenfield.values());
    CHECK(slurp(tmp.path / "u.fld").size() == 32 + 8 * g.node_count());

    std::ostringstream csv;
    write_field_csv(csv, t.eigenfield);
    std::istringstream lines(csv.str());
    std::string line;
    std::getline(lines, line);
    CHECK(line == "index,x,y,value");
    std::size_t rows = 0;
    while (std::getline(lines, line)) ++rows;
    CHECK(rows == g.node_count());

    CHECK_THROWS_AS(read_mask_binary(tmp.path / "u.fld"), IoError);
    CHECK_THROWS_AS(read_mask_binary(tmp.path / "absent.msk"), IoError);
    std::ofstream(tmp.path / "short.msk", std::ios::binary) << raw.substr(0, 40);
    CHECK_THROWS_AS(read_mask_binary(tmp.path / "short.msk"), IoError);
}

TEST_CASE("constants record") {
    const auto j = emit_constants(2, std::numbers::pi / 4, 1e-4, 0.5);
    for (const char* key : {"eps1", "eps0", "alpha0", "gamma_B1", "gamma_B1_bessel"}) CHECK(j.contains(key));
    CHECK(j["residuals"]["oracle_rel_diff"].get<double>() <= 1e-6);
    CHECK(std::abs(j["residuals"]["alpha0"].get<double>()) <= 1e-6);
    CHECK_THROWS_AS(emit_constants(1, 1.0, 1e-4, 0.5), InvalidArgument);
}

TEST_CASE("run directory") {
    TempDir tmp;
    RunConfig c;
    c.max_steps = 5;
    c.init_shape = InitShape::Square;
    c.snapshot_every = 1;
    const fs::path dir = tmp.path / "run";

    const RunOutcome first = run_to_directory(c, dir, false);
    CHECK((first.exit_code == 0 || first.exit_code == 2));
    for (const char* f : {"config.txt", "trace.csv", "summary.json", "final_mask.pgm", "final_mask.msk",
                          "initial_mask.pgm", "final_field.fld", "final_field.csv"})
        CHECK(fs::exists(dir / f));
    CHECK_FALSE(fs::is_empty(dir / "snapshots"));
    CHECK(same_config(load_config(dir / "config.txt"), c));

    const auto summary = nlohmann::json::parse(slurp(dir / "summary.json"));
    CHECK(summary["termination"] == to_string(first.result.termination));
    CHECK(summary["final"]["gamma"].get<double>() == first.result.final_state.tone.gamma);
    CHECK(summary["constants"]["gamma_B1"].get<double>() > 0.0);
    CHECK(summary["diagnostics"].contains("dichotomy"));
    CHECK(summary["seconds"].get<double>() >= 0.0);

    const std::string trace = slurp(dir / "trace.csv");
    CHECK_THROWS_AS(run_to_directory(c, dir, false), IoError);
    run_to_directory(c, dir, true);
    CHECK(slurp(dir / "trace.csv") == trace);
}
