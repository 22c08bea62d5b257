#include "ppc/bench.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <map>

#include "ppc/downsample.hpp"
#include "ppc/metrics.hpp"
#include "ppc/rng.hpp"

namespace ppc {
namespace bench {

namespace {

constexpr std::uint64_t kNoiseStream = 0x6E6F697365ULL;

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string format_short(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%g", v);
  return buf;
}

struct ConfigToken {
  std::string_view text;
  std::size_t offset;
};

bool is_space(char c) { return c == ' ' || c == '\t' || c == '\r'; }

std::vector<ConfigToken> tokenize(std::string_view line, std::size_t line_offset) {
  std::vector<ConfigToken> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && is_space(line[i])) ++i;
    if (i < line.size() && line[i] == '#') break;  // comment runs to line end
    const std::size_t start = i;
    while (i < line.size() && !is_space(line[i]) && line[i] != '#') ++i;
    if (i > start) out.push_back({line.substr(start, i - start), line_offset + start});
  }
  return out;
}

double parse_number(const ConfigToken& token, std::size_t line) {
  double value = 0.0;
  const char* first = token.text.data();
  const char* last = first + token.text.size();
  const auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc{} || ptr != last || !std::isfinite(value))
    throw ParseError(line, token.offset, "expected a number, got '" + std::string(token.text) + "'");
  return value;
}

std::size_t parse_count(const ConfigToken& token, std::size_t line) {
  std::size_t value = 0;
  const char* first = token.text.data();
  const char* last = first + token.text.size();
  const auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc{} || ptr != last)
    throw ParseError(line, token.offset, "expected a count, got '" + std::string(token.text) + "'");
  return value;
}

std::uint64_t parse_seed(const ConfigToken& token, std::size_t line) {
  std::uint64_t value = 0;
  const char* first = token.text.data();
  const char* last = first + token.text.size();
  const auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc{} || ptr != last)
    throw ParseError(line, token.offset, "expected a seed, got '" + std::string(token.text) + "'");
  return value;
}

synth::SceneKind parse_scene_kind(const ConfigToken& token, std::size_t line) {
  for (synth::SceneKind kind :
       {synth::SceneKind::GAUSSIAN_ANISO, synth::SceneKind::ELLIPSOID_SHELL,
        synth::SceneKind::TABLETOP_CLUSTERS, synth::SceneKind::CUBE_CORNERS,
        synth::SceneKind::MIRROR_SYMMETRIC, synth::SceneKind::PLANE})
    if (token.text == synth::to_string(kind)) return kind;
  throw ParseError(line, token.offset, "unknown scene '" + std::string(token.text) + "'");
}

ScoreKind parse_score_kind(const ConfigToken& token, std::size_t line) {
  if (token.text == "sq") return ScoreKind::SQUARED_NORM;
  if (token.text == "quartic") return ScoreKind::QUARTIC_NORM;
  if (token.text == "inverse") return ScoreKind::INVERSE_NORM;
  throw ParseError(line, token.offset, "unknown phi weighting '" + std::string(token.text) + "'");
}

const char* score_name(ScoreKind kind) {
  switch (kind) {
    case ScoreKind::SQUARED_NORM: return "sq";
    case ScoreKind::QUARTIC_NORM: return "quartic";
    case ScoreKind::INVERSE_NORM: return "inverse";
  }
  return "unknown";
}

MismatchSpec make_mismatch(const std::vector<ConfigToken>& tokens, std::size_t line) {
  const std::string_view key = tokens[1].text;

  MismatchSpec spec;
  spec.key = std::string(key);

  if (key == "identity") {
    if (tokens.size() != 2) throw ParseError(line, tokens[1].offset, "identity takes no value");
    return spec;
  }
  if (tokens.size() != 3)
    throw ParseError(line, tokens[1].offset, "expected: mismatch <kind> <value>");
  const double value = parse_number(tokens[2], line);
  if (!(value > 0.0))
    throw ParseError(line, tokens[2].offset, "mismatch value must be positive");
  spec.config_value = value;

  static const std::map<std::string_view, Vec3> directions = {
      {"right", Vec3(1, 0, 0)},   {"left", Vec3(-1, 0, 0)}, {"forward", Vec3(0, 1, 0)},
      {"back", Vec3(0, -1, 0)},   {"up", Vec3(0, 0, 1)},    {"down", Vec3(0, 0, -1)},
  };
  if (auto it = directions.find(key); it != directions.end()) {
    spec.kind = MismatchKind::SHIFT;
    spec.direction = it->second;
    spec.amount = value;
    spec.label = std::string(key) + " " + format_short(value * 1000.0) + "mm";
    return spec;
  }

  const bool cw = key == "rotate_cw" || key == "orbit_cw";
  const bool ccw = key == "rotate_ccw" || key == "orbit_ccw";
  if (cw || ccw) {
    spec.kind = (key == "rotate_cw" || key == "rotate_ccw") ? MismatchKind::ROTATE
                                                            : MismatchKind::ORBIT;
    spec.amount = cw ? -value : value;
    const char* verb = spec.kind == MismatchKind::ROTATE ? "rotate" : "orbit";
    spec.label = std::string(verb) + " " + format_short(value) + " deg " + (cw ? "CW" : "CCW");
    return spec;
  }

  throw ParseError(line, tokens[1].offset, "unknown mismatch '" + std::string(key) + "'");
}

Mat3 rotation_about_z(double degrees) {
  const double rad = degrees * (3.14159265358979323846 / 180.0);
  const double c = std::cos(rad);
  const double s = std::sin(rad);
  Mat3 r = Mat3::Identity();
  r(0, 0) = c;
  r(0, 1) = -s;
  r(1, 0) = s;
  r(1, 1) = c;
  return r;
}

RigidTransform build_transform(const MismatchSpec& spec, const Vec3& scene_centroid) {
  RigidTransform t;
  switch (spec.kind) {
    case MismatchKind::IDENTITY:
      break;
    case MismatchKind::SHIFT:
      t.translation = spec.direction * spec.amount;
      break;
    case MismatchKind::ROTATE:
      t.rotation = rotation_about_z(spec.amount);
      t.translation = scene_centroid - t.rotation * scene_centroid;
      break;
    case MismatchKind::ORBIT:
      t.rotation = rotation_about_z(spec.amount);
      break;
  }
  return t;
}

struct ThinResult {
  PointCloud cloud;
  bool short_cloud = false;
};

// Same semantics as downsample_pipeline, with either stage optional.
ThinResult thin(const PointCloud& cloud, const BenchConfig& config) {
  ThinResult out{cloud, false};
  if (config.voxel_size > 0.0)
    out.cloud = voxel_downsample(out.cloud, {config.voxel_size});
  if (config.fps_count > 0) {
    if (out.cloud.size() < config.fps_count)
      out.short_cloud = true;
    else
      out.cloud = farthest_point_sample(out.cloud, {config.fps_count});
  }
  return out;
}

struct MeanStddev {
  double mean = 0.0;
  double stddev = 0.0;
};

MeanStddev mean_stddev(const std::vector<double>& xs) {
  MeanStddev out;
  CompensatedSum sum;
  for (double x : xs) sum.add(x);
  out.mean = sum.value() / static_cast<double>(xs.size());
  if (xs.size() > 1) {
    CompensatedSum sq;
    for (double x : xs) sq.add((x - out.mean) * (x - out.mean));
    out.stddev = std::sqrt(sq.value() / static_cast<double>(xs.size() - 1));
  }
  return out;
}

}  // namespace

BenchConfig parse_config(std::string_view text) {
  BenchConfig config;
  bool seen_scene = false, seen_points = false, seen_scale = false, seen_seed = false;
  bool seen_trials = false, seen_jitter = false, seen_voxel = false, seen_fps = false;
  bool seen_phi = false;

  auto once = [](bool& seen, std::size_t line, std::size_t offset, const char* key) {
    if (seen) throw ParseError(line, offset, std::string("duplicate key '") + key + "'");
    seen = true;
  };

  std::size_t pos = 0;
  std::size_t line_no = 0;
  while (pos <= text.size()) {
    const std::size_t line_start = pos;
    const std::size_t nl = text.find('\n', pos);
    std::string_view line;
    if (nl == std::string_view::npos) {
      if (pos >= text.size()) break;
      line = text.substr(pos);
      pos = text.size() + 1;
    } else {
      line = text.substr(pos, nl - pos);
      pos = nl + 1;
    }
    ++line_no;

    const std::vector<ConfigToken> tokens = tokenize(line, line_start);
    if (tokens.empty()) continue;
    const std::string_view key = tokens[0].text;

    auto want = [&](std::size_t count) {
      if (tokens.size() != count)
        throw ParseError(line_no, tokens[0].offset,
                         "key '" + std::string(key) + "' expects " + std::to_string(count - 1) +
                             " value(s)");
    };

    if (key == "scene") {
      want(2);
      once(seen_scene, line_no, tokens[0].offset, "scene");
      config.scene.kind = parse_scene_kind(tokens[1], line_no);
    } else if (key == "points") {
      want(2);
      once(seen_points, line_no, tokens[0].offset, "points");
      config.scene.point_count = parse_count(tokens[1], line_no);
    } else if (key == "scale") {
      want(4);
      once(seen_scale, line_no, tokens[0].offset, "scale");
      for (int k = 0; k < 3; ++k) config.scene.scale[k] = parse_number(tokens[1 + k], line_no);
    } else if (key == "seed") {
      want(2);
      once(seen_seed, line_no, tokens[0].offset, "seed");
      config.scene.rng_seed = parse_seed(tokens[1], line_no);
    } else if (key == "trials") {
      want(2);
      once(seen_trials, line_no, tokens[0].offset, "trials");
      config.trials = parse_count(tokens[1], line_no);
      if (config.trials < 1) throw ParseError(line_no, tokens[1].offset, "trials must be >= 1");
    } else if (key == "jitter") {
      want(2);
      once(seen_jitter, line_no, tokens[0].offset, "jitter");
      config.jitter_sigma = parse_number(tokens[1], line_no);
      if (config.jitter_sigma < 0.0)
        throw ParseError(line_no, tokens[1].offset, "jitter must be >= 0");
    } else if (key == "voxel") {
      want(2);
      once(seen_voxel, line_no, tokens[0].offset, "voxel");
      config.voxel_size = parse_number(tokens[1], line_no);
      if (config.voxel_size < 0.0)
        throw ParseError(line_no, tokens[1].offset, "voxel must be >= 0");
    } else if (key == "fps") {
      want(2);
      once(seen_fps, line_no, tokens[0].offset, "fps");
      config.fps_count = parse_count(tokens[1], line_no);
    } else if (key == "phi") {
      want(2);
      once(seen_phi, line_no, tokens[0].offset, "phi");
      config.score = parse_score_kind(tokens[1], line_no);
    } else if (key == "mismatch") {
      if (tokens.size() < 2)
        throw ParseError(line_no, tokens[0].offset, "mismatch needs a kind");
      config.mismatches.push_back(make_mismatch(tokens, line_no));
    } else {
      throw ParseError(line_no, tokens[0].offset, "unknown key '" + std::string(key) + "'");
    }
  }

  if (config.mismatches.empty()) config.mismatches.push_back(MismatchSpec{});
  return config;
}

BenchReport run(const BenchConfig& config) {
  if (config.trials < 1) throw InvalidParam("trials must be >= 1");
  if (config.jitter_sigma < 0.0 || !std::isfinite(config.jitter_sigma))
    throw InvalidParam("jitter must be >= 0");
  if (config.voxel_size < 0.0 || !std::isfinite(config.voxel_size))
    throw InvalidParam("voxel must be >= 0");

  BenchReport report;
  report.config = config;
  if (report.config.mismatches.empty()) report.config.mismatches.push_back(MismatchSpec{});
  report.path = (config.voxel_size > 0.0 || config.fps_count > 0) ? "downsampled" : "full";

  const std::vector<MismatchSpec>& mismatches = report.config.mismatches;

  for (std::size_t trial = 0; trial < config.trials; ++trial) {
    synth::SceneSpec scene = config.scene;
    scene.rng_seed = mix_seed(config.scene.rng_seed, trial);
    const PointCloud base = synth::generate(scene);
    const Vec3 pivot = centroid(base);

    for (std::size_t mi = 0; mi < mismatches.size(); ++mi) {
      const MismatchSpec& mismatch = mismatches[mi];
      const RigidTransform transform = build_transform(mismatch, pivot);
      PointCloud second = synth::apply_rigid(base, transform);
      if (config.jitter_sigma > 0.0) {
        const std::uint64_t seed =
            mix_seed(mix_seed(config.scene.rng_seed, kNoiseStream), mix_seed(trial, mi));
        second = synth::add_gaussian_jitter(second, config.jitter_sigma, seed);
      }

      const ThinResult base_thin = thin(base, config);
      const ThinResult second_thin = thin(second, config);

      const CanonicalResult canon_base = canonicalize(base_thin.cloud, config.score);
      const CanonicalResult canon_second = canonicalize(second_thin.cloud, config.score);

      BenchRow row;
      row.trial = trial;
      row.label = mismatch.label;
      row.raw = chamfer_fast(base_thin.cloud, second_thin.cloud).value;
      row.ppc = chamfer_fast(canon_base.canonical, canon_second.canonical).value;
      row.ratio = row.raw / std::max(row.ppc, 1e-30);
      row.verdict_base = canon_base.report.verdict;
      row.verdict_second = canon_second.report.verdict;
      row.short_base = base_thin.short_cloud;
      row.short_second = second_thin.short_cloud;
      report.rows.push_back(std::move(row));
    }
  }

  for (const MismatchSpec& mismatch : mismatches) {
    std::vector<double> raws, ppcs, ratios;
    for (const BenchRow& row : report.rows) {
      if (row.label != mismatch.label) continue;
      raws.push_back(row.raw);
      ppcs.push_back(row.ppc);
      ratios.push_back(row.ratio);
    }
    const MeanStddev raw = mean_stddev(raws);
    const MeanStddev ppc = mean_stddev(ppcs);
    const MeanStddev ratio = mean_stddev(ratios);
    report.summary.push_back(
        {mismatch.label, raw.mean, raw.stddev, ppc.mean, ppc.stddev, ratio.mean});
  }
  return report;
}

std::string serialize(const BenchReport& report) {
  std::string out;
  out += "ppc-bench-report v1\n\n";

  out += "[config]\n";
  out += "scene " + std::string(synth::to_string(report.config.scene.kind)) + "\n";
  out += "points " + std::to_string(report.config.scene.point_count) + "\n";
  out += "scale " + format_double(report.config.scene.scale[0]) + " " +
         format_double(report.config.scene.scale[1]) + " " +
         format_double(report.config.scene.scale[2]) + "\n";
  out += "seed " + std::to_string(report.config.scene.rng_seed) + "\n";
  out += "trials " + std::to_string(report.config.trials) + "\n";
  out += "jitter " + format_double(report.config.jitter_sigma) + "\n";
  out += "voxel " + format_double(report.config.voxel_size) + "\n";
  out += "fps " + std::to_string(report.config.fps_count) + "\n";
  out += "phi " + std::string(score_name(report.config.score)) + "\n";
  for (const MismatchSpec& m : report.config.mismatches) {
    out += "mismatch " + m.key;
    if (m.kind != MismatchKind::IDENTITY) out += " " + format_double(m.config_value);
    out += "\n";
  }
  out += "path " + report.path + "\n";

  out += "\n[rows]\n";
  for (const BenchRow& row : report.rows) {
    out += "trial " + std::to_string(row.trial);
    out += " mismatch \"" + row.label + "\"";
    out += " raw " + format_double(row.raw);
    out += " ppc " + format_double(row.ppc);
    out += " ratio " + format_double(row.ratio);
    out += " verdict_base " + std::string(to_string(row.verdict_base));
    out += " verdict_second " + std::string(to_string(row.verdict_second));
    out += " short_base " + std::to_string(row.short_base ? 1 : 0);
    out += " short_second " + std::to_string(row.short_second ? 1 : 0);
    out += "\n";
  }

  out += "\n[summary]\n";
  for (const BenchSummaryRow& s : report.summary) {
    out += "mismatch \"" + s.label + "\"";
    out += " raw_mean " + format_double(s.raw_mean);
    out += " raw_stddev " + format_double(s.raw_stddev);
    out += " ppc_mean " + format_double(s.ppc_mean);
    out += " ppc_stddev " + format_double(s.ppc_stddev);
    out += " ratio_mean " + format_double(s.ratio_mean);
    out += "\n";
  }
  return out;
}

}  // namespace bench
}  // namespace ppc
