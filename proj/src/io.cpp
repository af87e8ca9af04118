#include "plate/io.hpp"

#include <bit>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <map>
#include <sstream>

#include "plate/error.hpp"

namespace plate {

namespace fs = std::filesystem;

namespace {

static_assert(std::endian::native == std::endian::little, "binary dumps assume a little-endian host");

std::string trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return std::string(s.substr(first, last - first + 1));
}

struct Field {
    std::string key;
    std::string value;
    int line;
};

[[noreturn]] void bad_value(const Field& f, const std::string& why) {
    throw ConfigError("line " + std::to_string(f.line) + ": invalid " + f.key + " '" + f.value + "': " + why, f.key,
                      f.line);
}

double to_double(const Field& f) {
    try {
        std::size_t used = 0;
        const double v = std::stod(f.value, &used);
        if (used != f.value.size()) bad_value(f, "not a number");
        return v;
    } catch (const std::logic_error&) {
        bad_value(f, "not a number");
    }
}

long long to_integer(const Field& f) {
    try {
        std::size_t used = 0;
        const long long v = std::stoll(f.value, &used);
        if (used != f.value.size()) bad_value(f, "not an integer");
        return v;
    } catch (const std::logic_error&) {
        bad_value(f, "not an integer");
    }
}

int to_int(const Field& f) {
    const long long v = to_integer(f);
    if (v < -2147483647LL || v > 2147483647LL) bad_value(f, "out of range");
    return static_cast<int>(v);
}

bool to_bool(const Field& f) {
    if (f.value == "true" || f.value == "1") return true;
    if (f.value == "false" || f.value == "0") return false;
    bad_value(f, "expected true or false");
}

std::vector<double> to_list(const Field& f) {
    std::vector<double> out;
    std::stringstream ss(f.value);
    std::string item;
    while (std::getline(ss, item, ',')) {
        Field part{f.key, trim(item), f.line};
        if (part.value.empty()) bad_value(f, "empty list entry");
        out.push_back(to_double(part));
    }
    return out;
}

const char* solver_name(InnerSolver s) { return s == InnerSolver::Cholesky ? "cholesky" : "cg"; }
const char* closure_name(BoundaryClosure c) {
    return c == BoundaryClosure::MirrorGhost ? "mirror_ghost" : "zero_extension";
}

void apply(RunConfig& c, const Field& f) {
    const auto& k = f.key;
    if (k == "dim") c.dim = to_int(f);
    else if (k == "nodes_per_side") c.nodes_per_side = to_int(f);
    else if (k == "radius_B") c.radius_B = to_double(f);
    else if (k == "omega0") c.omega0 = to_double(f);
    else if (k == "eps") c.eps = f.value == "threshold" ? std::nullopt : std::optional<double>(to_double(f));
    else if (k == "penalty") {
        if (f.value == "plain") c.penalty = PenaltyVariant::Plain;
        else if (f.value == "rewarding") c.penalty = PenaltyVariant::Rewarding;
        else bad_value(f, "expected plain or rewarding");
    } else if (k == "init_shape") {
        const auto s = parse_init_shape(f.value);
        if (!s) bad_value(f, "expected disk, square, annulus, two_disks or random_blob");
        c.init_shape = *s;
    } else if (k == "quantiles") c.quantiles = to_list(f);
    else if (k == "delta_rel") c.delta_rel = to_double(f);
    else if (k == "max_steps") c.max_steps = to_int(f);
    else if (k == "tone_tol") c.tone_tol = to_double(f);
    else if (k == "seed") {
        const long long v = to_integer(f);
        if (v < 0) bad_value(f, "must be nonnegative");
        c.seed = static_cast<std::uint64_t>(v);
    } else if (k == "d_n") c.d_n = to_double(f);
    else if (k == "eps_override") c.eps_override = to_bool(f);
    else if (k == "snapshot_every") c.snapshot_every = to_int(f);
    else if (k == "solver") {
        if (f.value == "cholesky") c.solver = InnerSolver::Cholesky;
        else if (f.value == "cg") c.solver = InnerSolver::ConjugateGradient;
        else bad_value(f, "expected cholesky or cg");
    } else if (k == "closure") {
        if (f.value == "mirror_ghost") c.closure = BoundaryClosure::MirrorGhost;
        else if (f.value == "zero_extension") c.closure = BoundaryClosure::ZeroExtension;
        else bad_value(f, "expected mirror_ghost or zero_extension");
    } else if (k == "threads") c.threads = to_int(f);
    else throw ConfigError("line " + std::to_string(f.line) + ": unknown key '" + k + "'", k, f.line);
}

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    if (in.bad()) throw IoError("cannot read " + path.string());
    return ss.str();
}

std::ofstream open_out(const fs::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + path.string());
    return out;
}

void finish(std::ofstream& out, const fs::path& path) {
    out.flush();
    if (!out) throw IoError("write failed for " + path.string());
}

template <typename T>
void put(std::ostream& out, T v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T take(std::istream& in, const fs::path& path) {
    T v{};
    if (!in.read(reinterpret_cast<char*>(&v), sizeof(T))) throw IoError("truncated file " + path.string());
    return v;
}

void write_header(std::ostream& out, const char* magic, const Grid& g) {
    out.write(magic, 4);
    put<std::uint32_t>(out, static_cast<std::uint32_t>(g.dim()));
    put<std::uint32_t>(out, static_cast<std::uint32_t>(g.nodes_per_side()));
    put<std::uint32_t>(out, 0);
    put<double>(out, g.radius());
    put<std::uint64_t>(out, g.node_count());
}

Grid read_header(std::istream& in, const char* magic, const fs::path& path) {
    char m[4];
    if (!in.read(m, 4) || std::memcmp(m, magic, 4) != 0)
        throw IoError(path.string() + ": missing " + std::string(magic, 4) + " header");
    const auto dim = take<std::uint32_t>(in, path);
    const auto side = take<std::uint32_t>(in, path);
    take<std::uint32_t>(in, path);
    const auto radius = take<double>(in, path);
    const auto count = take<std::uint64_t>(in, path);
    try {
        Grid g(static_cast<int>(dim), static_cast<int>(side), radius);
        if (g.node_count() != count) throw IoError(path.string() + ": node count does not match the grid");
        return g;
    } catch (const InvalidArgument& e) {
        throw IoError(path.string() + ": bad header: " + e.what());
    }
}

nlohmann::json number(double v) { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr); }

nlohmann::json config_json(const RunConfig& c) {
    nlohmann::json j;
    j["dim"] = c.dim;
    j["nodes_per_side"] = c.nodes_per_side;
    j["radius_B"] = c.radius_B;
    j["omega0"] = c.omega0;
    j["eps"] = c.eps ? nlohmann::json(*c.eps) : nlohmann::json("threshold");
    j["penalty"] = to_string(c.penalty);
    j["init_shape"] = to_string(c.init_shape);
    j["quantiles"] = c.quantiles;
    j["delta_rel"] = c.delta_rel;
    j["max_steps"] = c.max_steps;
    j["tone_tol"] = c.tone_tol;
    j["seed"] = c.seed;
    j["d_n"] = c.d_n;
    j["eps_override"] = c.eps_override;
    j["snapshot_every"] = c.snapshot_every;
    j["solver"] = solver_name(c.solver);
    j["closure"] = closure_name(c.closure);
    j["threads"] = c.threads;
    return j;
}

void write_mask_files(const fs::path& stem, const Mask& mask) {
    write_mask_binary(fs::path(stem).concat(".msk"), mask);
    if (mask.grid().dim() == 2) write_pgm(fs::path(stem).concat(".pgm"), mask);
}

}  // namespace

RunConfig parse_config(std::string_view text) {
    RunConfig c;
    std::map<std::string, int> seen;
    int line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const auto end = std::min(text.find('\n', pos), text.size());
        std::string_view line = text.substr(pos, end - pos);
        pos = end + 1;
        ++line_no;
        if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
        const std::string content = trim(line);
        if (content.empty()) continue;
        const auto eq = content.find('=');
        if (eq == std::string::npos)
            throw ConfigError("line " + std::to_string(line_no) + ": expected 'key = value'", {}, line_no);
        Field f{trim(std::string_view(content).substr(0, eq)), trim(std::string_view(content).substr(eq + 1)),
                line_no};
        if (f.key.empty()) throw ConfigError("line " + std::to_string(line_no) + ": missing key", {}, line_no);
        if (f.value.empty()) bad_value(f, "missing value");
        if (auto [it, fresh] = seen.emplace(f.key, line_no); !fresh)
            throw ConfigError("line " + std::to_string(line_no) + ": duplicate key '" + f.key + "' (first on line " +
                                  std::to_string(it->second) + ")",
                              f.key, line_no);
        apply(c, f);
    }
    validate(c);
    return c;
}

RunConfig load_config(const fs::path& path) { return parse_config(read_file(path)); }

std::string format_number(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string config_echo(const RunConfig& c) {
    std::ostringstream out;
    out << "dim = " << c.dim << "\n";
    out << "nodes_per_side = " << c.nodes_per_side << "\n";
    out << "radius_B = " << format_number(c.radius_B) << "\n";
    out << "omega0 = " << format_number(c.omega0) << "\n";
    out << "eps = " << (c.eps ? format_number(*c.eps) : std::string("threshold")) << "\n";
    out << "penalty = " << to_string(c.penalty) << "\n";
    out << "init_shape = " << to_string(c.init_shape) << "\n";
    out << "quantiles = ";
    for (std::size_t i = 0; i < c.quantiles.size(); ++i) out << (i ? ", " : "") << format_number(c.quantiles[i]);
    out << "\n";
    out << "delta_rel = " << format_number(c.delta_rel) << "\n";
    out << "max_steps = " << c.max_steps << "\n";
    out << "tone_tol = " << format_number(c.tone_tol) << "\n";
    out << "seed = " << c.seed << "\n";
    out << "d_n = " << format_number(c.d_n) << "\n";
    out << "eps_override = " << (c.eps_override ? "true" : "false") << "\n";
    out << "snapshot_every = " << c.snapshot_every << "\n";
    out << "solver = " << solver_name(c.solver) << "\n";
    out << "closure = " << closure_name(c.closure) << "\n";
    out << "threads = " << c.threads << "\n";
    return out.str();
}

void write_trace_csv(std::ostream& out, const std::vector<TraceRow>& rows) {
    out << "step,gamma,volume,penalty,J,accepted\n";
    for (const auto& r : rows)
        out << r.step << ',' << format_number(r.gamma) << ',' << format_number(r.volume) << ','
            << format_number(r.penalty) << ',' << format_number(r.J) << ',' << (r.accepted ? 1 : 0) << '\n';
}

void write_pgm(const fs::path& path, const Mask& mask) {
    const Grid& g = mask.grid();
    if (g.dim() != 2) throw InvalidArgument("write_pgm: only 2D masks");
    auto out = open_out(path);
    const int n = g.nodes_per_side();
    out << "P5\n" << n << ' ' << n << "\n255\n";
    // Image rows run top to bottom, i.e. decreasing second coordinate.
    std::vector<char> row(static_cast<std::size_t>(n));
    for (int j = n - 1; j >= 0; --j) {
        for (int i = 0; i < n; ++i) row[static_cast<std::size_t>(i)] = mask.contains(g.index({i, j, 0})) ? '\xff' : 0;
        out.write(row.data(), n);
    }
    finish(out, path);
}

Mask read_pgm(const fs::path& path, const Grid& g) {
    if (g.dim() != 2) throw InvalidArgument("read_pgm: only 2D grids");
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    std::string magic;
    int w = 0, h = 0, maxval = 0;
    in >> magic >> w >> h >> maxval;
    if (!in || magic != "P5" || maxval != 255) throw IoError(path.string() + ": not an 8-bit P5 image");
    if (w != g.nodes_per_side() || h != g.nodes_per_side())
        throw IoError(path.string() + ": image size does not match the grid");
    in.get();
    std::vector<NodeIndex> members;
    std::vector<char> row(static_cast<std::size_t>(w));
    for (int j = h - 1; j >= 0; --j) {
        if (!in.read(row.data(), w)) throw IoError("truncated file " + path.string());
        for (int i = 0; i < w; ++i)
            if (row[static_cast<std::size_t>(i)] != 0) members.push_back(g.index({i, j, 0}));
    }
    return Mask::from_nodes(g, members);
}

void write_mask_binary(const fs::path& path, const Mask& mask) {
    auto out = open_out(path);
    write_header(out, "MSK1", mask.grid());
    const auto& m = mask.membership();
    out.write(reinterpret_cast<const char*>(m.data()), static_cast<std::streamsize>(m.size()));
    finish(out, path);
}

Mask read_mask_binary(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    const Grid g = read_header(in, "MSK1", path);
    std::vector<char> bytes(g.node_count());
    if (!in.read(bytes.data(), static_cast<std::streamsize>(bytes.size())))
        throw IoError("truncated file " + path.string());
    std::vector<NodeIndex> members;
    for (NodeIndex i = 0; i < bytes.size(); ++i) {
        if (bytes[i] == 1) members.push_back(i);
        else if (bytes[i] != 0) throw IoError(path.string() + ": mask bytes must be 0 or 1");
    }
    return Mask::from_nodes(g, members);
}

void write_field_binary(const fs::path& path, const ScalarField& field) {
    auto out = open_out(path);
    write_header(out, "FLD1", field.grid());
    const auto& v = field.values();
    out.write(reinterpret_cast<const char*>(v.data()), static_cast<std::streamsize>(v.size() * sizeof(double)));
    finish(out, path);
}

std::pair<Grid, std::vector<double>> read_field_binary(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    Grid g = read_header(in, "FLD1", path);
    std::vector<double> values(g.node_count());
    if (!in.read(reinterpret_cast<char*>(values.data()), static_cast<std::streamsize>(values.size() * sizeof(double))))
        throw IoError("truncated file " + path.string());
    return {g, std::move(values)};
}

void write_field_csv(std::ostream& out, const ScalarField& field) {
    const Grid& g = field.grid();
    out << (g.dim() == 2 ? "index,x,y,value\n" : "index,x,y,z,value\n");
    for (NodeIndex i = 0; i < g.node_count(); ++i) {
        const Point p = g.position(i);
        out << i;
        for (int k = 0; k < g.dim(); ++k) out << ',' << format_number(p[k]);
        out << ',' << format_number(field[i]) << '\n';
    }
}

nlohmann::json constants_json(const TheoryConstants& c) {
    nlohmann::json j;
    j["dim"] = c.dim;
    j["omega0"] = number(c.omega0);
    j["eps"] = number(c.eps);
    j["d_n"] = number(c.d_n);
    j["radius_B"] = number(c.radius_B);
    j["omega_n"] = number(c.omega_n);
    j["gamma_B1"] = number(c.gamma_B1);
    j["gamma_B1_bessel"] = number(c.gamma_B1_bessel);
    j["oracle_rel_diff"] = number(c.oracle_rel_diff);
    j["radial_achieved_tol"] = number(c.radial_achieved_tol);
    j["eps1"] = number(c.eps1);
    j["eps1_effective"] = number(c.eps1_effective);
    j["eps0"] = number(c.eps0);
    j["eps0_effective"] = number(c.eps0_effective);
    j["alpha0"] = number(c.alpha0);
    j["alpha0_residual"] = number(c.alpha0_residual);
    j["extends_threshold"] = c.extends_threshold;
    return j;
}

nlohmann::json diagnostics_json(const DiagnosticsReport& d) {
    nlohmann::json j;
    j["connected"] = d.connected;
    j["component_count"] = d.component_count;
    j["doubling_sigma"] = number(d.doubling_sigma);
    j["doubling_degenerate_probes"] = d.doubling_degenerate_probes;
    j["nondegeneracy_c1"] = number(d.nondegeneracy_c1);
    auto profile = nlohmann::json::array();
    for (const auto& [R, q] : d.density_profile) profile.push_back({{"R", number(R)}, {"min_quotient", number(q)}});
    j["density_profile"] = profile;
    j["sigma0_count"] = d.sigma0_count;
    j["sigma1_count"] = d.sigma1_count;
    j["dichotomy"] = to_string(d.dichotomy);
    j["probe_cap"] = number(d.probe_cap);
    j["tol_grad"] = number(d.tol_grad);
    j["vol_tol"] = number(d.vol_tol);
    return j;
}

nlohmann::json summary_json(const RunResult& r, double seconds) {
    const auto& s = r.final_state;
    nlohmann::json j;
    j["config"] = config_json(r.config);
    j["eps_used"] = number(r.eps);
    j["final"] = {{"gamma", number(s.tone.gamma)},
                  {"volume", number(s.volume)},
                  {"penalty", number(s.penalty)},
                  {"J", number(s.J)},
                  {"steps", s.step},
                  {"aggressiveness", number(s.aggressiveness)},
                  {"evaluations", s.history.size()},
                  {"eigensolver_failures", s.failures.size()}};
    j["ball_tone_for_volume"] = number(ball_tone_for_volume(r.config.omega0, r.config.dim, r.constants.gamma_B1));
    j["constants"] = constants_json(r.constants);
    j["diagnostics"] = diagnostics_json(r.diagnostics);
    j["failures"] = s.failures;
    j["termination"] = to_string(r.termination);
    j["seconds"] = number(seconds);
    return j;
}

nlohmann::json emit_constants(int n, double omega0, double eps, double d_n) {
    const TheoryConstants c = compute_constants(n, omega0, eps, d_n);
    nlohmann::json j = constants_json(c);
    j["residuals"] = {{"oracle_rel_diff", number(c.oracle_rel_diff)},
                      {"radial_achieved_tol", number(c.radial_achieved_tol)},
                      {"alpha0", number(c.alpha0_residual)}};
    return j;
}

RunOutcome run_to_directory(const RunConfig& config, const fs::path& dir, bool force) {
    validate(config);
    std::error_code ec;
    if (fs::exists(dir, ec)) {
        if (!force) throw IoError("run directory " + dir.string() + " already exists (use --force to replace it)");
        fs::remove_all(dir, ec);
        if (ec) throw IoError("cannot remove " + dir.string() + ": " + ec.message());
    }
    fs::create_directories(dir / "snapshots", ec);
    if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());

    {
        auto out = open_out(dir / "config.txt");
        out << config_echo(config);
        finish(out, dir / "config.txt");
    }

    const auto start = std::chrono::steady_clock::now();
    RunResult result = optimize(config, [&](const SearchState& s, int accepted) {
        if (config.snapshot_every > 0 && accepted % config.snapshot_every == 0) {
            char name[32];
            std::snprintf(name, sizeof name, "mask_%05d", s.step);
            write_mask_files(dir / "snapshots" / name, s.mask);
        }
    });
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

    {
        auto out = open_out(dir / "trace.csv");
        write_trace_csv(out, result.final_state.history);
        finish(out, dir / "trace.csv");
    }
    write_mask_files(dir / "initial_mask", result.initial);
    write_mask_files(dir / "final_mask", result.final_state.mask);
    write_field_binary(dir / "final_field.fld", result.final_state.tone.eigenfield);
    if (result.final_state.mask.grid().node_count() <= 70000) {
        auto out = open_out(dir / "final_field.csv");
        write_field_csv(out, result.final_state.tone.eigenfield);
        finish(out, dir / "final_field.csv");
    }
    {
        auto out = open_out(dir / "summary.json");
        out << summary_json(result, seconds).dump(2) << '\n';
        finish(out, dir / "summary.json");
    }
    const int code = result.termination == Termination::Converged ? 0 : 2;
    return {std::move(result), dir, code};
}

}  // namespace plate
