#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace acf {

// Parsed run request. params_json holds the command-specific parameter object
// re-serialized in canonical (sorted, compact) form.
struct RunConfig {
  std::string command;
  std::string params_json = "{}";
  std::string output_dir = "out";
  std::uint64_t seed = 42;
  std::vector<std::string> formats{"csv", "json", "svg"};
};

struct NamedTable {
  std::string name;
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;
};

struct PlotSeries {
  std::string label;
  std::vector<double> x, y;
};

struct NamedPlot {
  std::string name, title, xlabel, ylabel;
  bool logx = false, logy = false;
  std::vector<PlotSeries> series;
};

struct ReportBundle {
  std::string command;
  std::uint64_t seed = 42;
  std::string params_json = "{}";
  std::vector<NamedTable> tables;
  std::vector<NamedPlot> plots;
};

// Strict parse of a config document: the top level accepts exactly
// {command, params, output_dir?, seed?, formats?}; unknown keys anywhere are
// rejected with ConfigError, as are unknown commands and malformed params.
RunConfig parse_config(const std::string& json_text);

// Dispatch to the library and collect tables and plots.
ReportBundle run_command(const RunConfig& config);

// Write every table and plot in the requested formats, then manifest.json
// (command, params, seed, version, wall time, file hashes) last. Returns the
// list of files written, manifest included.
std::vector<std::string> emit_bundle(const ReportBundle& bundle, const std::string& out_dir,
                                     const std::vector<std::string>& formats,
                                     double wall_seconds);

// FNV-1a 64 bit content hash.
std::uint64_t content_hash(const std::string& bytes);

// Shortest text keeping 17 significant digits, C locale, '.' decimal point.
std::string format_double(double v);

std::string render_csv(const NamedTable& table);
std::string render_svg(const NamedPlot& plot);

}  // namespace acf
