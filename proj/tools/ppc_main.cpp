#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "ppc/bench.hpp"
#include "ppc/canonicalize.hpp"
#include "ppc/core.hpp"
#include "ppc/downsample.hpp"
#include "ppc/io.hpp"
#include "ppc/metrics.hpp"

namespace {

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

bool is_ply_path(const std::filesystem::path& path) {
  std::string ext = path.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return ext == ".ply";
}

void print_warnings(const ppc::io::CloudData& data) {
  for (const std::string& w : data.warnings) std::cerr << "warning: " << w << "\n";
}

// Gathers the color rows matching a selection of point indices.
std::optional<std::vector<ppc::io::Rgb>> select_colors(
    const std::optional<std::vector<ppc::io::Rgb>>& colors,
    const std::vector<std::size_t>& indices) {
  if (!colors) return std::nullopt;
  std::vector<ppc::io::Rgb> out;
  out.reserve(indices.size());
  for (std::size_t i : indices) out.push_back((*colors)[i]);
  return out;
}

double bbox_diagonal(const ppc::PointCloud& cloud) {
  ppc::Vec3 lo = cloud[0];
  ppc::Vec3 hi = cloud[0];
  for (const ppc::Vec3& p : cloud.points) {
    lo = lo.cwiseMin(p);
    hi = hi.cwiseMax(p);
  }
  return (hi - lo).norm();
}

struct ThinOutcome {
  ppc::PointCloud cloud;
  std::vector<std::size_t> indices;  // into the input cloud
  bool short_cloud = false;
  double voxel_used = 0.0;
  std::size_t fps_used = 0;
};

// Voxel stage then fps stage, either optional, tracking original row indices
// so color channels survive the selection.
ThinOutcome thin_cloud(const ppc::PointCloud& cloud, double voxel, std::size_t fps,
                       ppc::SeedRule seed_rule) {
  ThinOutcome out;
  out.indices.resize(cloud.size());
  for (std::size_t i = 0; i < cloud.size(); ++i) out.indices[i] = i;
  out.cloud = cloud;

  if (voxel > 0.0) {
    const std::vector<std::size_t> kept = ppc::voxel_downsample_indices(out.cloud, {voxel});
    std::vector<std::size_t> mapped;
    mapped.reserve(kept.size());
    ppc::PointCloud thinned;
    thinned.points.reserve(kept.size());
    for (std::size_t k : kept) {
      mapped.push_back(out.indices[k]);
      thinned.points.push_back(out.cloud[k]);
    }
    out.indices = std::move(mapped);
    out.cloud = std::move(thinned);
    out.voxel_used = voxel;
  }

  if (fps > 0) {
    if (out.cloud.size() < fps) {
      out.short_cloud = true;
    } else {
      const std::vector<std::size_t> kept =
          ppc::farthest_point_sample_indices(out.cloud, {fps, seed_rule});
      std::vector<std::size_t> mapped;
      mapped.reserve(kept.size());
      ppc::PointCloud thinned;
      thinned.points.reserve(kept.size());
      for (std::size_t k : kept) {
        mapped.push_back(out.indices[k]);
        thinned.points.push_back(out.cloud[k]);
      }
      out.indices = std::move(mapped);
      out.cloud = std::move(thinned);
      out.fps_used = fps;
    }
  }
  return out;
}

struct DownsampleArgs {
  std::string input;
  std::string output;
  double voxel = 0.0;
  std::size_t fps = 0;
  std::string seed_rule = "farthest";
};

int cmd_downsample(const DownsampleArgs& args) {
  if (args.voxel <= 0.0 && args.fps == 0)
    throw ppc::InvalidParam("downsample needs --voxel and/or --fps");

  const ppc::io::CloudData data = ppc::io::read_cloud(args.input);
  print_warnings(data);

  const ppc::SeedRule rule = args.seed_rule == "first" ? ppc::SeedRule::FIRST_INDEX
                                                       : ppc::SeedRule::FARTHEST_FROM_CENTROID;
  const ThinOutcome thinned = thin_cloud(data.cloud, args.voxel, args.fps, rule);

  std::optional<std::vector<ppc::io::Rgb>> colors;
  if (is_ply_path(args.output)) colors = select_colors(data.colors, thinned.indices);
  ppc::io::write_cloud(args.output, thinned.cloud, colors);

  std::cout << "points_in " << data.cloud.size() << "\n";
  std::cout << "points_out " << thinned.cloud.size() << "\n";
  std::cout << "short_cloud " << (thinned.short_cloud ? 1 : 0) << "\n";
  return 0;
}

struct CanonArgs {
  std::string input;
  std::string output;
  std::string phi = "sq";
  double voxel = -1.0;  // -1: default rule, 0: explicit skip
  long long fps = -1;
  bool no_downsample = false;
  std::string report_path;
};

ppc::ScoreKind score_from_name(const std::string& name) {
  if (name == "sq") return ppc::ScoreKind::SQUARED_NORM;
  if (name == "quartic") return ppc::ScoreKind::QUARTIC_NORM;
  if (name == "inverse") return ppc::ScoreKind::INVERSE_NORM;
  throw ppc::InvalidParam("unknown phi weighting '" + name + "'");
}

std::string render_canon_report(const CanonArgs& args, const ppc::io::CloudData& data,
                                const ThinOutcome& thinned, const ppc::CanonicalResult& result) {
  std::string out;
  out += "ppc-canon-report v1\n";
  out += "input " + args.input + "\n";
  out += "points_in " + std::to_string(data.cloud.size()) + "\n";
  out += "points_used " + std::to_string(thinned.cloud.size()) + "\n";
  out += "short_cloud " + std::to_string(thinned.short_cloud ? 1 : 0) + "\n";
  out += "phi " + args.phi + "\n";
  out += "voxel " + format_double(thinned.voxel_used) + "\n";
  out += "fps " + std::to_string(thinned.fps_used) + "\n";
  out += "verdict " + std::string(ppc::to_string(result.report.verdict)) + "\n";
  out += "spectrum_simple " + std::to_string(result.report.spectrum_simple ? 1 : 0) + "\n";
  out += "gap_ratio_12 " + format_double(result.report.gap_ratio_12) + "\n";
  out += "gap_ratio_23 " + format_double(result.report.gap_ratio_23) + "\n";
  out += "phi_nondegenerate " + std::to_string(result.report.phi_nondegenerate ? 1 : 0) + "\n";
  out += "phi_1 " + format_double(result.phi_values[0]) + "\n";
  out += "phi_2 " + format_double(result.phi_values[1]) + "\n";
  out += "phi_margin_1 " + format_double(result.report.phi_margin_1) + "\n";
  out += "phi_margin_2 " + format_double(result.report.phi_margin_2) + "\n";
  out += "signs " + std::to_string(result.signs[0]) + " " + std::to_string(result.signs[1]) +
         " " + std::to_string(result.signs[2]) + "\n";
  out += "centroid " + format_double(result.centroid.x()) + " " +
         format_double(result.centroid.y()) + " " + format_double(result.centroid.z()) + "\n";
  for (int r = 0; r < 3; ++r)
    out += "basis_row_" + std::to_string(r) + " " + format_double(result.basis(r, 0)) + " " +
           format_double(result.basis(r, 1)) + " " + format_double(result.basis(r, 2)) + "\n";
  return out;
}

int cmd_canon(const CanonArgs& args) {
  const ppc::io::CloudData data = ppc::io::read_cloud(args.input);
  print_warnings(data);

  double voxel = 0.0;
  std::size_t fps = 0;
  if (!args.no_downsample) {
    if (args.voxel >= 0.0) {
      voxel = args.voxel;
    } else {
      const double diag = bbox_diagonal(data.cloud);
      if (diag > 0.0) voxel = diag / 100.0;
    }
    fps = args.fps >= 0 ? static_cast<std::size_t>(args.fps) : 512;
  }

  const ThinOutcome thinned =
      thin_cloud(data.cloud, voxel, fps, ppc::SeedRule::FARTHEST_FROM_CENTROID);
  const ppc::CanonicalResult result =
      ppc::canonicalize(thinned.cloud, score_from_name(args.phi));

  std::optional<std::vector<ppc::io::Rgb>> colors;
  if (is_ply_path(args.output)) colors = select_colors(data.colors, thinned.indices);
  ppc::io::write_cloud(args.output, result.canonical, colors);

  if (!args.report_path.empty()) {
    std::ofstream report(args.report_path, std::ios::binary | std::ios::trunc);
    if (!report) throw ppc::IoError(args.report_path + ": cannot open for writing");
    report << render_canon_report(args, data, thinned, result);
    if (!report) throw ppc::IoError(args.report_path + ": write failure");
  }

  std::cout << "points_used " << thinned.cloud.size() << "\n";
  std::cout << "verdict " << ppc::to_string(result.report.verdict) << "\n";
  std::cout << "written " << args.output << "\n";

  return result.report.verdict == ppc::Verdict::DEGENERATE ? 3 : 0;
}

struct ChamferArgs {
  std::string cloud_a;
  std::string cloud_b;
  bool brute = false;
};

int cmd_chamfer(const ChamferArgs& args) {
  const ppc::io::CloudData a = ppc::io::read_cloud(args.cloud_a);
  const ppc::io::CloudData b = ppc::io::read_cloud(args.cloud_b);
  print_warnings(a);
  print_warnings(b);

  const ppc::ChamferResult result =
      args.brute ? ppc::chamfer_brute(a.cloud, b.cloud) : ppc::chamfer_fast(a.cloud, b.cloud);
  std::cout << "chamfer " << format_double(result.value) << "\n";
  std::cout << "forward " << format_double(result.forward_mean) << "\n";
  std::cout << "backward " << format_double(result.backward_mean) << "\n";
  return 0;
}

struct BenchArgs {
  std::string config_path;
  std::string output_path;
};

int cmd_bench(const BenchArgs& args) {
  std::error_code ec;
  if (!std::filesystem::exists(args.config_path, ec) || ec)
    throw ppc::FileNotFound(args.config_path);
  std::ifstream in(args.config_path, std::ios::binary);
  if (!in) throw ppc::IoError(args.config_path + ": cannot open for reading");
  const std::string text((std::istreambuf_iterator<char>(in)),
                         std::istreambuf_iterator<char>());
  if (in.bad()) throw ppc::IoError(args.config_path + ": read failure");

  const ppc::bench::BenchConfig config = ppc::bench::parse_config(text);
  const ppc::bench::BenchReport report = ppc::bench::run(config);
  const std::string rendered = ppc::bench::serialize(report);

  if (args.output_path.empty()) {
    std::cout << rendered;
  } else {
    std::ofstream out(args.output_path, std::ios::binary | std::ios::trunc);
    if (!out) throw ppc::IoError(args.output_path + ": cannot open for writing");
    out << rendered;
    if (!out) throw ppc::IoError(args.output_path + ": write failure");
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"PCA-based point cloud canonicalization toolkit"};
  app.set_version_flag("--version", "ppc 1.0.0");
  app.require_subcommand(1);

  DownsampleArgs ds;
  CLI::App* downsample = app.add_subcommand(
      "downsample", "Voxel-thin and/or farthest-point-sample a cloud");
  downsample->add_option("input", ds.input, "input cloud (.xyz/.csv/.ply)")->required();
  downsample->add_option("output", ds.output, "output cloud")->required();
  downsample->add_option("--voxel", ds.voxel, "voxel cell size (meters)");
  downsample->add_option("--fps", ds.fps, "farthest-point-sampling target count");
  downsample->add_option("--seed-rule", ds.seed_rule, "fps seed: farthest|first")
      ->check(CLI::IsMember({"farthest", "first"}))
      ->default_val("farthest");

  CanonArgs ca;
  CLI::App* canon = app.add_subcommand(
      "canon", "Canonicalize a cloud into its disambiguated principal frame");
  canon->add_option("input", ca.input, "input cloud")->required();
  canon->add_option("output", ca.output, "output canonical cloud")->required();
  canon->add_option("--phi", ca.phi, "asymmetry weighting: sq|quartic|inverse")
      ->check(CLI::IsMember({"sq", "quartic", "inverse"}))
      ->default_val("sq");
  CLI::Option* voxel_opt = canon->add_option(
      "--voxel", ca.voxel, "voxel size (default: bounding-box diagonal / 100)");
  CLI::Option* fps_opt =
      canon->add_option("--fps", ca.fps, "fps target count (default: 512)");
  canon->add_flag("--no-downsample", ca.no_downsample, "canonicalize the full cloud")
      ->excludes(voxel_opt)
      ->excludes(fps_opt);
  canon->add_option("--report", ca.report_path, "write a diagnostic report here");

  ChamferArgs ch;
  CLI::App* chamfer =
      app.add_subcommand("chamfer", "Symmetric Chamfer distance between two clouds");
  chamfer->add_option("cloud_a", ch.cloud_a, "first cloud")->required();
  chamfer->add_option("cloud_b", ch.cloud_b, "second cloud")->required();
  chamfer->add_flag("--brute", ch.brute, "use the exhaustive path instead of the kd-tree");

  BenchArgs be;
  CLI::App* bench = app.add_subcommand(
      "bench", "Run a pose-mismatch benchmark from a config file");
  bench->add_option("config", be.config_path, "benchmark config file")->required();
  bench->add_option("-o,--output", be.output_path, "report file (default: stdout)");

  try {
    app.parse(argc, argv);
    if (downsample->parsed()) return cmd_downsample(ds);
    if (canon->parsed()) return cmd_canon(ca);
    if (chamfer->parsed()) return cmd_chamfer(ch);
    if (bench->parsed()) return cmd_bench(be);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  } catch (const ppc::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
