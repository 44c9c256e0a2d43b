#pragma once

#include <string>
#include <vector>

#include "qfloq/engine.hpp"
#include "qfloq/mps.hpp"
#include "qfloq/sweep.hpp"

// Configuration parsing, CSV/JSON serialization, and the canned reproduction
// runs.  Both the CLI and the C API funnel through these functions so there is
// a single validation path.
namespace qfloq::io {

std::string version();

// Flat run configuration covering every subcommand; unused fields keep their
// defaults and are still echoed into the manifest.  Grid axes are "lo:hi:n".
struct RunConfig {
  int L = 4;
  double theta_x = 0.0;
  double theta_z = 0.0;
  double epsilon = 0.0;
  int steps = 20;
  std::string ux_mode = "exact";  // exact | brickwork
  std::string engine = "exact";   // exact | mps (sweep cells)
  std::string mode = "finite";    // finite | infinite (mps-evolve)
  double tebd_tol = 1e-6;
  int chi_cap = 600;
  int substeps = 1;
  int cycles = 150;
  std::string grid_x = "0:0.5:25";
  std::string grid_z = "0:3.141592653589793:25";
  std::string observables = "overlap,entropy,qfi";

  bool operator==(const RunConfig&) const = default;
};

// Unknown keys are rejected naming the nearest valid key; type and range
// violations name the offending field.  All throw Error(ConfigError).
RunConfig config_from_json(const std::string& text);
RunConfig config_from_file(const std::string& path);
std::string config_to_json(const RunConfig& c);  // parse(serialize(c)) == c

struct GridAxis {
  double lo = 0.0, hi = 0.0;
  int n = 1;
};
GridAxis parse_axis(const std::string& spec);  // "lo:hi:n"

// Files written (relative to the output directory), for manifests and tests.
using FileList = std::vector<std::string>;

FileList run_evolve(const RunConfig& c, const std::string& outdir);
FileList run_mps_evolve(const RunConfig& c, const std::string& outdir);
FileList run_sweep(const RunConfig& c, const std::string& outdir);
// figure: fig2|fig3|fig4a|fig4c|fig5a|fig5b|fig5c|dips.  Desk-scale
// parameters by default; full=true restores the paper-scale settings.
FileList run_reproduce(const std::string& figure, bool full, const std::string& outdir);

// JSON report for the compile-check subcommand (gate list + residuals).
std::string compile_check_json(char axis, double theta, bool use_ledger);
// JSON dump of a named operator: lambda1..lambda8, sx, sy, sz, kick,
// xbasis, gate-x, gate-z, ms.  theta feeds the parametrized ones.
std::string ops_dump_json(const std::string& name, double theta);

}  // namespace qfloq::io
