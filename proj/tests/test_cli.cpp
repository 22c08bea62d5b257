#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>

#include "doctest.h"
#include "oracles.hpp"
#include "ppc/io.hpp"
#include "ppc/rng.hpp"

using namespace ppc;

namespace {

namespace fs = std::filesystem;

fs::path work_dir() {
  const fs::path dir = fs::temp_directory_path() / "ppc_cli_tests";
  fs::create_directories(dir);
  return dir;
}

struct RunResult {
  int exit_code = -1;
  std::string out;
  std::string err;
};

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

RunResult run_cli(const std::string& args) {
  const fs::path out_path = work_dir() / "stdout.txt";
  const fs::path err_path = work_dir() / "stderr.txt";
  const std::string cmd = std::string("\"") + PPC_CLI_PATH + "\" " + args + " >" +
                          out_path.string() + " 2>" + err_path.string();
  const int status = std::system(cmd.c_str());
  RunResult result;
  result.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  result.out = slurp(out_path);
  result.err = slurp(err_path);
  return result;
}

fs::path write_asymmetric_cloud(const std::string& name, std::size_t n) {
  SplitMix64 rng(15);
  const PointCloud cloud = oracle::random_asymmetric_cloud(rng, n);
  const fs::path path = work_dir() / name;
  io::write_cloud(path, cloud);
  return path;
}

}  // namespace

TEST_CASE("version and help exit cleanly") {
  const RunResult version = run_cli("--version");
  CHECK(version.exit_code == 0);
  CHECK(version.out.find("ppc 1.0.0") != std::string::npos);
  CHECK(run_cli("--help").exit_code == 0);
  CHECK(run_cli("canon --help").exit_code == 0);
}

TEST_CASE("downsample runs its stages and reports counts") {
  const fs::path input = write_asymmetric_cloud("ds_in.xyz", 400);

  const fs::path voxel_out = work_dir() / "ds_voxel.xyz";
  RunResult r = run_cli("downsample " + input.string() + " " + voxel_out.string() +
                        " --voxel 0.8");
  CHECK(r.exit_code == 0);
  CHECK(r.out.find("points_in 400") != std::string::npos);
  CHECK(r.out.find("short_cloud 0") != std::string::npos);
  const std::size_t kept = io::read_cloud(voxel_out).cloud.size();
  CHECK(kept > 0);
  CHECK(kept < 400);

  const fs::path fps_out = work_dir() / "ds_fps.xyz";
  r = run_cli("downsample " + input.string() + " " + fps_out.string() +
              " --fps 64 --seed-rule first");
  CHECK(r.exit_code == 0);
  CHECK(io::read_cloud(fps_out).cloud.size() == 64);

  const fs::path both_out = work_dir() / "ds_both.xyz";
  r = run_cli("downsample " + input.string() + " " + both_out.string() +
              " --voxel 0.8 --fps 32");
  CHECK(r.exit_code == 0);
  CHECK(io::read_cloud(both_out).cloud.size() == 32);

  // No stage requested: nothing to do is an error, not a silent copy.
  r = run_cli("downsample " + input.string() + " " + both_out.string());
  CHECK(r.exit_code == 2);
}

TEST_CASE("downsample flags a short cloud instead of failing") {
  const fs::path input = write_asymmetric_cloud("short_in.xyz", 40);
  const fs::path out = work_dir() / "short_out.xyz";
  const RunResult r = run_cli("downsample " + input.string() + " " + out.string() +
                              " --voxel 5.0 --fps 500");
  CHECK(r.exit_code == 0);
  CHECK(r.out.find("short_cloud 1") != std::string::npos);
}

TEST_CASE("canon writes a canonical cloud and a deterministic report") {
  const fs::path input = write_asymmetric_cloud("canon_in.xyz", 300);
  const fs::path out = work_dir() / "canon_out.xyz";
  const fs::path report_a = work_dir() / "canon_rep_a.txt";
  const fs::path report_b = work_dir() / "canon_rep_b.txt";

  RunResult r = run_cli("canon " + input.string() + " " + out.string() +
                        " --no-downsample --report " + report_a.string());
  CHECK(r.exit_code == 0);
  CHECK(r.out.find("points_used 300") != std::string::npos);
  CHECK(r.out.find("verdict OK") != std::string::npos);
  CHECK(io::read_cloud(out).cloud.size() == 300);

  const std::string report = slurp(report_a);
  CHECK(report.find("ppc-canon-report v1") == 0);
  CHECK(report.find("verdict OK") != std::string::npos);
  CHECK(report.find("basis") != std::string::npos);

  r = run_cli("canon " + input.string() + " " + out.string() +
              " --no-downsample --report " + report_b.string());
  CHECK(r.exit_code == 0);
  CHECK(slurp(report_a) == slurp(report_b));
}

TEST_CASE("canon applies default downsampling when not told otherwise") {
  const fs::path input = write_asymmetric_cloud("canon_big.xyz", 900);
  const fs::path out = work_dir() / "canon_big_out.xyz";
  const RunResult r = run_cli("canon " + input.string() + " " + out.string());
  CHECK(r.exit_code == 0);
  const std::size_t used = io::read_cloud(out).cloud.size();
  CHECK(used <= 512);
  CHECK(used >= 3);
}

TEST_CASE("canon exits 3 on a degenerate input") {
  const fs::path cube = work_dir() / "cube.xyz";
  {
    std::ofstream f(cube);
    for (int sx : {-1, 1})
      for (int sy : {-1, 1})
        for (int sz : {-1, 1}) f << sx << " " << sy << " " << sz << "\n";
  }
  const fs::path out = work_dir() / "cube_out.xyz";
  const RunResult r = run_cli("canon " + cube.string() + " " + out.string() +
                              " --no-downsample");
  CHECK(r.exit_code == 3);
  CHECK(r.out.find("verdict DEGENERATE") != std::string::npos);
}

TEST_CASE("chamfer prints identical values for both paths") {
  const fs::path a = write_asymmetric_cloud("ch_a.xyz", 150);
  SplitMix64 rng(16);
  const PointCloud cloud_b = oracle::random_cloud(rng, 120, 4.0);
  const fs::path b = work_dir() / "ch_b.xyz";
  io::write_cloud(b, cloud_b);

  const RunResult fast = run_cli("chamfer " + a.string() + " " + b.string());
  const RunResult brute = run_cli("chamfer " + a.string() + " " + b.string() + " --brute");
  CHECK(fast.exit_code == 0);
  CHECK(brute.exit_code == 0);
  CHECK(fast.out == brute.out);  // shared kernel: byte-identical numbers
  CHECK(fast.out.find("chamfer ") != std::string::npos);

  const RunResult self = run_cli("chamfer " + a.string() + " " + a.string());
  CHECK(self.out.find("chamfer 0\n") != std::string::npos);
}

TEST_CASE("bench renders to stdout or a file, deterministically") {
  const fs::path config = work_dir() / "bench.cfg";
  {
    std::ofstream f(config);
    f << "scene tabletop_clusters\npoints 150\ntrials 2\nseed 5\n"
         "mismatch identity\nmismatch right 0.05\n";
  }
  const RunResult to_stdout = run_cli("bench " + config.string());
  CHECK(to_stdout.exit_code == 0);
  CHECK(to_stdout.out.find("ppc-bench-report v1") == 0);
  CHECK(to_stdout.out.find("right 50mm") != std::string::npos);

  const fs::path out_a = work_dir() / "bench_a.txt";
  const fs::path out_b = work_dir() / "bench_b.txt";
  CHECK(run_cli("bench " + config.string() + " -o " + out_a.string()).exit_code == 0);
  CHECK(run_cli("bench " + config.string() + " --output " + out_b.string()).exit_code == 0);
  CHECK(slurp(out_a) == slurp(out_b));
  CHECK(slurp(out_a) == to_stdout.out);
}

TEST_CASE("failures use exit code 2 and stderr") {
  const RunResult missing = run_cli("canon /nope/missing.xyz /tmp/x.xyz");
  CHECK(missing.exit_code == 2);
  CHECK(missing.err.find("error:") != std::string::npos);

  CHECK(run_cli("downsample").exit_code == 2);            // missing positionals
  CHECK(run_cli("nonsense_subcommand").exit_code == 2);   // unknown subcommand
  CHECK(run_cli("chamfer a.xyz b.xyz --wat").exit_code == 2);

  const fs::path bad = work_dir() / "bad.xyz";
  {
    std::ofstream f(bad);
    f << "1 2\n";
  }
  const RunResult parse = run_cli("chamfer " + bad.string() + " " + bad.string());
  CHECK(parse.exit_code == 2);
  CHECK(parse.err.find("error:") != std::string::npos);

  const fs::path bad_cfg = work_dir() / "bad.cfg";
  {
    std::ofstream f(bad_cfg);
    f << "mismatch sideways 3\n";
  }
  CHECK(run_cli("bench " + bad_cfg.string()).exit_code == 2);
}
