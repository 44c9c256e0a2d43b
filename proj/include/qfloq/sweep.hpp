#pragma once

#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "qfloq/engine.hpp"
#include "qfloq/mps.hpp"

namespace qfloq {

struct GridSpec {
  double x_lo = 0.0, x_hi = 0.5;
  int nx = 25;
  double z_lo = 0.0, z_hi = 3.14159265358979323846;
  int nz = 25;
};

// Per-cell engine outcome; a flagged cell keeps the averages it accumulated
// before the stop.
enum class CellFlag : std::uint8_t { Ok = 0, ChiCap = 1, EngineFailure = 2 };

struct PhaseGrid {
  std::vector<double> theta_x, theta_z;  // axis values
  // row-major over (ix, iz): index = ix * theta_z.size() + iz
  std::vector<double> overlap, entropy, fq;
  std::vector<CellFlag> flags;
  int L = 0, cycles = 0, stride = 3;
  std::size_t index(int ix, int iz) const { return static_cast<std::size_t>(ix) * theta_z.size() + iz; }
};

struct SweepOptions {
  int L = 8;
  int cycles = 150;          // samples taken at steps 3n including n=0
  std::string engine = "exact";  // exact | mps
  double epsilon = 0.0;
  UxMode ux_mode = UxMode::Exact;
  TruncationPolicy policy;
  int substeps = 1;
};

PhaseGrid sweep(const GridSpec& grid, const SweepOptions& opt);

struct LifetimeFit {
  double T = std::numeric_limits<double>::infinity();  // Floquet steps
  double stderr_T = 0.0;
  bool degenerate = false;
  int blocks = 0;  // envelope points used
};

// Envelope = per-3-step max |signal|; least-squares on the log envelope.
// series holds the magnetization at every step including n=0.
LifetimeFit fit_lifetime(const std::vector<double>& series);

// Closed-form thermalization estimate (real-valued; callers floor it).
// Returns +inf for theta_x = 0 and NaN when a log argument is nonpositive.
double predict_nt(double theta_x, double theta_z, int L);

// First crossing F(n) = 1/2 of the same two-level approximation, found
// numerically in (real) 3-step block units; +inf when no crossing exists.
double nt_first_crossing(double theta_x, double theta_z, int L);

// Local minima of row values over the theta_z axis with quadratic refinement.
std::vector<double> find_dips(const std::vector<double>& row,
                              const std::vector<double>& theta_z);

}  // namespace qfloq
