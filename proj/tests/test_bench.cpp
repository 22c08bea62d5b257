#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <string>

#include "doctest.h"
#include "oracles.hpp"
#include "ppc/bench.hpp"

using namespace ppc;
using bench::BenchConfig;
using bench::BenchReport;
using bench::MismatchKind;

TEST_CASE("config parsing covers every key") {
  const BenchConfig config = bench::parse_config(
      "# a benchmark\n"
      "scene tabletop_clusters\n"
      "points 400\n"
      "scale 2.0 1.5 0.5\n"
      "seed 99\n"
      "trials 4\n"
      "jitter 0.002\n"
      "voxel 0.05\n"
      "fps 128\n"
      "phi quartic\n"
      "mismatch identity\n"
      "mismatch right 0.05\n"
      "mismatch up 0.01\n"
      "mismatch rotate_cw 10\n"
      "mismatch orbit_ccw 5\n");
  CHECK(config.scene.kind == synth::SceneKind::TABLETOP_CLUSTERS);
  CHECK(config.scene.point_count == 400);
  CHECK(config.scene.scale[0] == 2.0);
  CHECK(config.scene.scale[1] == 1.5);
  CHECK(config.scene.scale[2] == 0.5);
  CHECK(config.scene.rng_seed == 99);
  CHECK(config.trials == 4);
  CHECK(config.jitter_sigma == 0.002);
  CHECK(config.voxel_size == 0.05);
  CHECK(config.fps_count == 128);
  CHECK(config.score == ScoreKind::QUARTIC_NORM);
  REQUIRE(config.mismatches.size() == 5);
  CHECK(config.mismatches[0].kind == MismatchKind::IDENTITY);
  CHECK(config.mismatches[1].kind == MismatchKind::SHIFT);
  CHECK(oracle::same_point(config.mismatches[1].direction, Vec3(1, 0, 0)));
  CHECK(config.mismatches[1].amount == 0.05);
  CHECK(config.mismatches[1].label == "right 50mm");
  CHECK(oracle::same_point(config.mismatches[2].direction, Vec3(0, 0, 1)));
  CHECK(config.mismatches[3].kind == MismatchKind::ROTATE);
  CHECK(config.mismatches[3].amount == -10.0);  // clockwise is negative
  CHECK(config.mismatches[3].label == "rotate 10 deg CW");
  CHECK(config.mismatches[4].kind == MismatchKind::ORBIT);
  CHECK(config.mismatches[4].amount == 5.0);
}

TEST_CASE("config defaults match the documented ones") {
  const BenchConfig config = bench::parse_config("scene gaussian_aniso\n");
  CHECK(config.scene.point_count == 512);
  CHECK(config.trials == 3);
  CHECK(config.jitter_sigma == 0.0);
  CHECK(config.voxel_size == 0.0);
  CHECK(config.fps_count == 0);
  CHECK(config.score == ScoreKind::SQUARED_NORM);
  REQUIRE(config.mismatches.size() == 1);
  CHECK(config.mismatches[0].kind == MismatchKind::IDENTITY);
  CHECK(config.mismatches[0].label == "identity");
}

TEST_CASE("config rejections carry line numbers") {
  const struct {
    const char* text;
    std::size_t line;
  } cases[] = {
      {"bogus 1\n", 1},
      {"scene gaussian_aniso\nscene plane\n", 2},         // duplicate scalar key
      {"points -5\n", 1},
      {"trials 0\n", 1},
      {"scale 1 2\n", 1},                                 // arity
      {"jitter -0.1\n", 1},
      {"phi cubic\n", 1},
      {"scene no_such_scene\n", 1},
      {"mismatch right\n", 1},                            // missing amount
      {"mismatch right -0.5\n", 1},                       // amounts are positive
      {"mismatch rotate_cw 0\n", 1},
      {"mismatch sideways 1\n", 1},
      {"voxel abc\n", 1},
      {"seed 12 34\n", 1},
  };
  for (const auto& c : cases) {
    try {
      bench::parse_config(c.text);
      FAIL_CHECK("expected ParseError for: " << std::string(c.text));
    } catch (const ParseError& e) {
      CHECK(e.line() == c.line);
    }
  }

  // Every key has a default, so the empty config is legal...
  const BenchConfig empty = bench::parse_config("");
  REQUIRE(empty.mismatches.size() == 1);
  CHECK(empty.mismatches[0].kind == MismatchKind::IDENTITY);
  // ...while impossible scene sizes surface when the scene is built.
  CHECK_THROWS_AS(bench::run(bench::parse_config("points 2\ntrials 1\n")), InvalidSpec);
}

TEST_CASE("run produces one row per trial and mismatch") {
  BenchConfig config = bench::parse_config(
      "scene gaussian_aniso\npoints 200\ntrials 3\n"
      "mismatch identity\nmismatch left 0.02\n");
  const BenchReport report = bench::run(config);
  CHECK(report.path == "full");
  REQUIRE(report.rows.size() == 6);
  REQUIRE(report.summary.size() == 2);
  CHECK(report.summary[0].label == "identity");

  for (const bench::BenchRow& row : report.rows) {
    CHECK(std::isfinite(row.raw));
    CHECK(std::isfinite(row.ppc));
    CHECK(row.raw >= 0.0);
    CHECK(row.ppc >= 0.0);
  }

  // Without jitter an identity mismatch compares a capture with itself.
  for (std::size_t i = 0; i < report.rows.size(); ++i) {
    if (report.rows[i].label != "identity") continue;
    CHECK(report.rows[i].raw == 0.0);
    CHECK(report.rows[i].ppc == 0.0);
    CHECK(report.rows[i].ratio == 0.0);
  }

  // A shifted capture is far from the original before canonicalization and
  // indistinguishable after.
  for (std::size_t i = 0; i < report.rows.size(); ++i) {
    if (report.rows[i].label == "identity") continue;
    CHECK(report.rows[i].raw > 1e-3);
    CHECK(report.rows[i].ppc <= 1e-8);
  }
}

TEST_CASE("per-trial scenes differ but the run is deterministic") {
  const BenchConfig config = bench::parse_config(
      "scene ellipsoid_shell\npoints 150\ntrials 2\nmismatch forward 0.1\n");
  const BenchReport a = bench::run(config);
  const BenchReport b = bench::run(config);
  REQUIRE(a.rows.size() == 2);
  CHECK(a.rows[0].raw != a.rows[1].raw);  // different per-trial scene seeds
  for (std::size_t i = 0; i < a.rows.size(); ++i) {
    CHECK(a.rows[i].raw == b.rows[i].raw);
    CHECK(a.rows[i].ppc == b.rows[i].ppc);
    CHECK(a.rows[i].ratio == b.rows[i].ratio);
  }
}

TEST_CASE("jitter makes even the identity mismatch imperfect") {
  const BenchConfig config = bench::parse_config(
      "scene gaussian_aniso\npoints 300\ntrials 2\njitter 0.002\nmismatch identity\n");
  const BenchReport report = bench::run(config);
  for (const bench::BenchRow& row : report.rows) {
    CHECK(row.raw > 0.0);
    CHECK(row.ppc > 0.0);
    // Canonicalization cannot remove iid noise, only the pose error; with no
    // pose error both distances sit at the noise floor.
    CHECK(row.ppc <= 10.0 * row.raw);
  }
}

TEST_CASE("the downsampled path is labeled and respects fps fallbacks") {
  const BenchConfig config = bench::parse_config(
      "scene tabletop_clusters\npoints 300\ntrials 1\nvoxel 0.4\nfps 256\n"
      "mismatch identity\n");
  const BenchReport report = bench::run(config);
  CHECK(report.path == "downsampled");
  REQUIRE(report.rows.size() == 1);
  // A coarse voxel pass on 300 points usually keeps fewer than 256: the row
  // must flag the shortfall rather than fail.
  if (report.rows[0].short_base) CHECK(report.rows[0].short_second);
}

TEST_CASE("summaries aggregate their rows") {
  const BenchConfig config = bench::parse_config(
      "scene gaussian_aniso\npoints 128\ntrials 3\nmismatch back 0.05\n");
  const BenchReport report = bench::run(config);
  REQUIRE(report.summary.size() == 1);
  const bench::BenchSummaryRow& s = report.summary[0];

  CompensatedSum raw_sum, ppc_sum, ratio_sum;
  for (const bench::BenchRow& row : report.rows) {
    raw_sum.add(row.raw);
    ppc_sum.add(row.ppc);
    ratio_sum.add(row.ratio);
  }
  const double n = static_cast<double>(report.rows.size());
  CHECK(s.raw_mean == doctest::Approx(raw_sum.value() / n).epsilon(1e-15));
  CHECK(s.ppc_mean == doctest::Approx(ppc_sum.value() / n).epsilon(1e-15));
  CHECK(s.ratio_mean == doctest::Approx(ratio_sum.value() / n).epsilon(1e-15));

  CompensatedSum raw_var;
  for (const bench::BenchRow& row : report.rows) {
    const double d = row.raw - s.raw_mean;
    raw_var.add(d * d);
  }
  CHECK(s.raw_stddev == doctest::Approx(std::sqrt(raw_var.value() / (n - 1))).epsilon(1e-12));
}

TEST_CASE("single-trial stddev is zero") {
  const BenchConfig config =
      bench::parse_config("scene plane\npoints 100\ntrials 1\nmismatch rotate_ccw 15\n");
  const BenchReport report = bench::run(config);
  REQUIRE(report.summary.size() == 1);
  CHECK(report.summary[0].raw_stddev == 0.0);
  CHECK(report.summary[0].ppc_stddev == 0.0);
}

TEST_CASE("serialization is byte-identical across runs") {
  const BenchConfig config = bench::parse_config(
      "scene tabletop_clusters\npoints 250\ntrials 2\njitter 0.001\n"
      "mismatch identity\nmismatch right 0.05\nmismatch rotate_cw 10\n");
  const std::string a = bench::serialize(bench::run(config));
  const std::string b = bench::serialize(bench::run(config));
  CHECK(a == b);
  CHECK(!a.empty());
}

TEST_CASE("serialization echoes the effective config") {
  const BenchConfig config = bench::parse_config("scene gaussian_aniso\ntrials 1\n");
  const std::string text = bench::serialize(bench::run(config));
  CHECK(text.find("ppc-bench-report v1") == 0);
  CHECK(text.find("scene gaussian_aniso") != std::string::npos);
  CHECK(text.find("points 512") != std::string::npos);
  CHECK(text.find("trials 1") != std::string::npos);
  CHECK(text.find("jitter 0") != std::string::npos);
  CHECK(text.find("phi sq") != std::string::npos);
  CHECK(text.find("path full") != std::string::npos);
  CHECK(text.find("identity") != std::string::npos);
}

TEST_CASE("rotation mismatches pivot about the scene centroid, orbits about the origin") {
  // With the scene centered far from the origin, a rotation about the
  // centroid keeps the cloud in place (small raw Chamfer), while an orbit
  // about the origin sweeps it away (raw comparable to the lever arm).
  const BenchConfig rotate = bench::parse_config(
      "scene gaussian_aniso\npoints 200\ntrials 1\nscale 0.2 0.15 0.1\n"
      "mismatch rotate_cw 10\n");
  const BenchConfig orbit = bench::parse_config(
      "scene gaussian_aniso\npoints 200\ntrials 1\nscale 0.2 0.15 0.1\n"
      "mismatch orbit_cw 10\n");
  const double rotate_raw = bench::run(rotate).rows[0].raw;
  const double orbit_raw = bench::run(orbit).rows[0].raw;
  // gaussian_aniso is roughly origin-centered, so the two agree loosely here;
  // both recover to ~0 after canonicalization either way.
  CHECK(bench::run(rotate).rows[0].ppc <= 1e-8);
  CHECK(bench::run(orbit).rows[0].ppc <= 1e-8);
  CHECK(rotate_raw > 0.0);
  CHECK(orbit_raw > 0.0);
}
