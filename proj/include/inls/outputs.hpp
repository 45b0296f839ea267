#pragma once

#include "inls/scattering.hpp"
#include "inls/solver.hpp"

#include <json.hpp>

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace inls {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

// Git blob id: SHA-1 of "blob <size>\0" followed by the content.
std::string git_blob_sha1(std::string_view content);

std::string read_text_file(const fs::path &path);
void write_text_file(const fs::path &path, std::string_view content);

// --- exponent reports ------------------------------------------------------

json report_json(const ExponentReport &report);
json certificate_json(const ExponentCertificate &cert);
std::string report_table(const ExponentReport &report,
                         const ExponentCertificate *cert);

// --- series ----------------------------------------------------------------

std::string series_csv(const RunConfig &config,
                       const std::vector<DiagnosticSample> &series);
json series_json(const RunConfig &config,
                 const std::vector<DiagnosticSample> &series);
// Inverse of series_csv for the columns of the given config.
std::vector<DiagnosticSample> parse_series_csv(const RunConfig &config,
                                               std::string_view text);

// --- plots -----------------------------------------------------------------

struct Curve {
  std::string label;
  std::vector<double> x, y;
  bool dashed = false;
};

// Deterministic SVG line plot. Points that are non-finite, or nonpositive
// on a log axis, are skipped.
std::string svg_plot(const std::string &title, const std::string &xlabel,
                     const std::string &ylabel, const std::vector<Curve> &curves,
                     bool log_x = false, bool log_y = false);

// Writes norms.svg, energy_drift.svg, morawetz.svg and decay.svg; returns
// the file names.
std::vector<std::string> emit_plots(const fs::path &run_dir);

// --- run directories -------------------------------------------------------

struct RunFiles {
  fs::path dir;
  std::vector<std::string> files;
  std::string status; // "ok" or "blowup"
};

// Writes config.ini, series.csv, series.json, timing.csv, checkpoints,
// final.field, plots and manifest.json into dir.
RunFiles write_run(const RunOutput &run, const fs::path &dir,
                   const std::string &status = "ok");

// Evolves and writes; on blowup the partial output is written and the
// StepBlowup is rethrown.
RunFiles run_to_directory(const RunConfig &config, const fs::path &dir);

// Reconstructs the recorded run: config, series, checkpoints and window.
RunOutput load_run(const fs::path &run_dir);

// --- verification ----------------------------------------------------------

struct VerifyRow {
  std::string name;
  double value = 0.0;
  double tolerance = 0.0;
  bool asserted = false; // failures of asserted rows fail the command
  bool pass = false;
  std::string note;
};

struct VerifyTable {
  std::vector<VerifyRow> rows;
  bool ok() const;
  json to_json() const;
  std::string to_text() const;
};

VerifyTable verify_run(const RunOutput &run);

// --- scattering artifacts -------------------------------------------------

struct ScatterSummary {
  double t_extract = 0.0;
  std::size_t trusted_checkpoints = 0;
  std::vector<CauchyDelta> deltas;
  std::vector<std::pair<double, double>> residuals;
  json to_json() const;
};

// Writes u_plus.field, cauchy.csv, residuals.csv and scatter.svg.
ScatterSummary scatter_run_dir(const fs::path &run_dir);

// --- sweeps ----------------------------------------------------------------

struct SweepResult {
  std::string config;
  fs::path dir;
  int exit_code = 0;
  std::string message;
};

// Runs each config into root/<config stem> on a pool of worker threads.
std::vector<SweepResult> sweep(const std::vector<fs::path> &configs,
                               const fs::path &root, int threads,
                               std::optional<std::uint64_t> seed_override = {});

// Output root from INLS_OUTPUT_ROOT applied to relative paths.
fs::path resolve_output(const fs::path &p);

} // namespace inls
