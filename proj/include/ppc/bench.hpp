#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "ppc/canonicalize.hpp"
#include "ppc/core.hpp"
#include "ppc/synth.hpp"

namespace ppc {
namespace bench {

enum class MismatchKind { IDENTITY, SHIFT, ROTATE, ORBIT };

/// One simulated pose error between two captures of the same scene. SHIFT
/// translates along a world axis; ROTATE turns about the vertical axis
/// through the scene centroid; ORBIT turns about the vertical axis through
/// the world origin. Clockwise means a negative angle about +z seen from
/// above.
struct MismatchSpec {
  MismatchKind kind = MismatchKind::IDENTITY;
  Vec3 direction = Vec3::Zero();  // unit direction, SHIFT only
  double amount = 0.0;            // meters for SHIFT, signed CCW degrees otherwise
  std::string key = "identity";   // config token this came from
  double config_value = 0.0;      // the (positive) number after the token
  std::string label = "identity";
};

/// Benchmark configuration. Parsed from a line-oriented text where each line
/// is `key value...`; `#` starts a comment. Keys: scene, points, scale (three
/// numbers), seed, trials, jitter (sigma in meters, applied to the second
/// capture only), voxel (cell size, 0 disables), fps (target count, 0
/// disables), phi (sq|quartic|inverse), and one `mismatch` line per case:
/// identity, right/left/forward/back/up/down <meters>, rotate_cw/rotate_ccw
/// <degrees>, orbit_cw/orbit_ccw <degrees>. Omitting mismatch lines yields a
/// single identity case.
struct BenchConfig {
  synth::SceneSpec scene;
  std::size_t trials = 3;
  double jitter_sigma = 0.0;
  double voxel_size = 0.0;
  std::size_t fps_count = 0;
  ScoreKind score = ScoreKind::SQUARED_NORM;
  std::vector<MismatchSpec> mismatches;
};

struct BenchRow {
  std::size_t trial = 0;
  std::string label;
  double raw = 0.0;    // Chamfer distance between the two captures as given
  double ppc = 0.0;    // Chamfer distance after canonicalizing each capture
  double ratio = 0.0;  // raw / max(ppc, 1e-30)
  Verdict verdict_base = Verdict::OK;
  Verdict verdict_second = Verdict::OK;
  bool short_base = false;  // downsampling fell short of the fps target
  bool short_second = false;
};

struct BenchSummaryRow {
  std::string label;
  double raw_mean = 0.0;
  double raw_stddev = 0.0;  // sample standard deviation, 0 for one trial
  double ppc_mean = 0.0;
  double ppc_stddev = 0.0;
  double ratio_mean = 0.0;
};

struct BenchReport {
  BenchConfig config;
  std::string path = "full";  // "downsampled" when voxel or fps is active
  std::vector<BenchRow> rows;
  std::vector<BenchSummaryRow> summary;
};

/// Parses the config text. Unknown keys, malformed values, and repeated
/// scalar keys are ParseError with the line number.
BenchConfig parse_config(std::string_view text);

/// Runs every (trial, mismatch) cell: synthesizes the scene with a per-trial
/// seed, builds the mismatched second capture (plus jitter when configured),
/// optionally downsamples both, and compares Chamfer distances before and
/// after canonicalization. Fully deterministic for a given config.
BenchReport run(const BenchConfig& config);

/// Renders the report as text: a version line, the full config echo
/// (defaults included), every row, and per-mismatch summaries. Doubles are
/// %.17g, ordering is fixed, so equal reports serialize byte-identically.
std::string serialize(const BenchReport& report);

}  // namespace bench
}  // namespace ppc
