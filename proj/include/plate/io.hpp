#pragma once

// Configuration files, run orchestration and on-disk formats.
//
// Config: flat `key = value` lines, `#` starts a comment. Binary dumps share
// a 32-byte little-endian header:
//   bytes 0-3   magic ("MSK1" or "FLD1")
//   bytes 4-7   dim (uint32)
//   bytes 8-11  N, nodes per side (uint32)
//   bytes 12-15 zero
//   bytes 16-23 R_B (float64)
//   bytes 24-31 node count (uint64)
// followed by one byte per node (mask, 0/1) or one float64 per node (field),
// in lexicographic node order.

#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "plate/search.hpp"

namespace plate {

/// Parses config text. Throws ConfigError with the line number on syntax
/// errors and unknown keys, and naming the field on invalid values.
/// Threshold checks on eps happen in optimize / resolve_eps.
RunConfig parse_config(std::string_view text);

/// Reads and parses a config file; IoError if it cannot be read.
RunConfig load_config(const std::filesystem::path& path);

/// Config text that parses back to an identical RunConfig.
std::string config_echo(const RunConfig& config);

/// "%.17g".
std::string format_number(double v);

void write_trace_csv(std::ostream& out, const std::vector<TraceRow>& rows);

void write_pgm(const std::filesystem::path& path, const Mask& mask);
Mask read_pgm(const std::filesystem::path& path, const Grid& grid);

void write_mask_binary(const std::filesystem::path& path, const Mask& mask);
Mask read_mask_binary(const std::filesystem::path& path);

void write_field_binary(const std::filesystem::path& path, const ScalarField& field);
/// Values of an FLD1 dump, with the grid from its header.
std::pair<Grid, std::vector<double>> read_field_binary(const std::filesystem::path& path);

/// Columns: index, x, y[, z], value; one row per node.
void write_field_csv(std::ostream& out, const ScalarField& field);

nlohmann::json constants_json(const TheoryConstants& c);
nlohmann::json diagnostics_json(const DiagnosticsReport& d);

/// Summary record of a finished run. Non-finite numbers are written as null.
nlohmann::json summary_json(const RunResult& result, double seconds);

/// Constants plus oracle residuals for the given parameters.
nlohmann::json emit_constants(int n, double omega0, double eps, double d_n = 0.5);

struct RunOutcome {
    RunResult result;
    std::filesystem::path directory;
    int exit_code = 0;  // 0 converged, 2 max_steps
};

/// Runs the optimisation and writes config.txt, trace.csv, initial and final
/// masks, snapshots/, the final eigenfield and summary.json into directory.
/// An existing directory is an IoError unless force is set, in which case
/// it is replaced.
RunOutcome run_to_directory(const RunConfig& config, const std::filesystem::path& directory, bool force);

}  // namespace plate
