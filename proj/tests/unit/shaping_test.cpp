#include <cmath>
#include <cstdio>
#include <filesystem>
#include <random>
#include <vector>

#include "doctest.h"
#include "rosa/common.hpp"
#include "rosa/shaping/potential.hpp"

using namespace rosa;
using namespace rosa::shaping;

namespace {

Vec random_obs(int d, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  Vec v(d);
  for (int i = 0; i < d; ++i) v[i] = unif(rng);
  return v;
}

std::vector<SegmentStep> random_segment(const PotentialNet& net, int len,
                                        int t0, std::mt19937_64& rng,
                                        bool null_boundaries) {
  std::vector<SegmentStep> seg(len);
  for (int i = 0; i < len; ++i) {
    seg[i].t = t0 + i;
    seg[i].s = random_obs(net.input_dim(), rng);
    seg[i].a2 = 1 + static_cast<int>(rng() % net.m());
    seg[i].on = i + 1 < len;
  }
  if (null_boundaries) {
    seg.front().a2 = 0;
    seg.back().a2 = 0;
  }
  return seg;
}

}  // namespace

TEST_SUITE("shaping") {

TEST_CASE("null shaper action has zero potential") {
  PotentialNet net({4, 16, 3}, 21);
  auto rng = make_rng(1, 0x7368);
  for (int i = 0; i < 20; ++i) {
    CHECK(net.phi(random_obs(4, rng), 0) == 0.0);
  }
  CHECK(net.m() == 3);
  CHECK(net.input_dim() == 4);
}

TEST_CASE("potential indexes one output per shaper action") {
  PotentialNet net({3, 32, 2}, 5);
  auto rng = make_rng(2, 0x7368);
  const Vec s = random_obs(3, rng);
  CHECK(net.phi(s, 1) != net.phi(s, 2));
  CHECK_THROWS_AS(net.phi(s, 3), UsageError);
  CHECK_THROWS_AS(net.phi(s, -1), UsageError);
  Vec bad = random_obs(5, rng);
  CHECK_THROWS_AS(net.phi(bad, 1), UsageError);
}

TEST_CASE("forward reward equals gamma times backward reward") {
  PotentialNet net({4, 12, 3}, 9);
  auto rng = make_rng(3, 0x7368);
  const double gamma = 0.93;
  for (int i = 0; i < 30; ++i) {
    const Vec s = random_obs(4, rng);
    const Vec sn = random_obs(4, rng);
    const int a2 = static_cast<int>(rng() % 4);
    const int a2n = static_cast<int>(rng() % 4);
    const double fwd =
        shaping_reward(net, s, a2, sn, a2n, gamma, Direction::kForward);
    const double bwd =
        shaping_reward(net, s, a2, sn, a2n, gamma, Direction::kBackward);
    CHECK(std::abs(fwd - gamma * bwd) < 1e-12);
  }
}

TEST_CASE("terminal next state has zero potential in both directions") {
  PotentialNet net({2, 8, 2}, 13);
  auto rng = make_rng(4, 0x7368);
  const Vec s = random_obs(2, rng);
  const Vec sn = random_obs(2, rng);
  const double fwd =
      shaping_reward(net, s, 1, sn, 2, 0.9, Direction::kForward, true);
  CHECK(fwd == doctest::Approx(-net.phi(s, 1)).epsilon(1e-12));
  const double bwd =
      shaping_reward(net, s, 1, sn, 2, 0.9, Direction::kBackward, true);
  CHECK(bwd == doctest::Approx(-net.phi(s, 1) / 0.9).epsilon(1e-12));
}

TEST_CASE("gamma outside the open unit interval is rejected") {
  PotentialNet net({2, 4, 1}, 1);
  auto rng = make_rng(5, 0x7368);
  const Vec s = random_obs(2, rng);
  CHECK_THROWS_AS(shaping_reward(net, s, 0, s, 0, 1.0, Direction::kForward),
                  UsageError);
  CHECK_THROWS_AS(shaping_reward(net, s, 0, s, 0, 0.0, Direction::kForward),
                  UsageError);
}

TEST_CASE("segment with null boundaries telescopes to zero") {
  PotentialNet net({5, 24, 4}, 33);
  auto rng = make_rng(6, 0x7368);
  for (int trial = 0; trial < 25; ++trial) {
    const int len = 2 + static_cast<int>(rng() % 12);
    const int t0 = static_cast<int>(rng() % 50);
    auto seg = random_segment(net, len, t0, rng, true);
    const SegmentSum sum = segment_shaping_sum(seg, net, 0.95);
    CHECK(sum.boundary_null);
    CHECK(std::abs(sum.sum) < 1e-9);
    CHECK(std::abs(sum.expected_residual) < 1e-12);
  }
}

TEST_CASE("segment sum always equals its telescoped residual") {
  PotentialNet net({3, 16, 2}, 41);
  auto rng = make_rng(7, 0x7368);
  for (int trial = 0; trial < 25; ++trial) {
    const int len = 2 + static_cast<int>(rng() % 10);
    auto seg = random_segment(net, len, static_cast<int>(rng() % 30), rng,
                              false);
    const SegmentSum sum = segment_shaping_sum(seg, net, 0.9);
    CHECK_FALSE(sum.boundary_null);
    CHECK(std::abs(sum.sum - sum.expected_residual) < 1e-9);
  }
}

TEST_CASE("segment preconditions are enforced") {
  PotentialNet net({2, 8, 2}, 3);
  auto rng = make_rng(8, 0x7368);
  auto seg = random_segment(net, 4, 0, rng, true);
  CHECK_THROWS_AS(
      segment_shaping_sum(std::span<const SegmentStep>(seg.data(), 1), net,
                          0.9),
      UsageError);
  auto gap = seg;
  gap[2].t += 1;
  CHECK_THROWS_AS(segment_shaping_sum(gap, net, 0.9), UsageError);
  auto off = seg;
  off[1].on = false;
  CHECK_THROWS_AS(segment_shaping_sum(off, net, 0.9), UsageError);
  CHECK_THROWS_AS(segment_shaping_sum(seg, net, 1.5), UsageError);
}

TEST_CASE("potential weights are reproducible from the seed") {
  PotentialNet a({4, 10, 2}, 77);
  PotentialNet b({4, 10, 2}, 77);
  PotentialNet c({4, 10, 2}, 78);
  CHECK(a.weights_hash() == b.weights_hash());
  CHECK(a.weights_hash() != c.weights_hash());
  auto rng = make_rng(9, 0x7368);
  const Vec s = random_obs(4, rng);
  CHECK(a.phi(s, 1) == b.phi(s, 1));
}

TEST_CASE("save and load preserve the potential exactly") {
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / "rosa_shaping_test";
  fs::create_directories(dir);
  const std::string bin = (dir / "potential.bin").string();
  const std::string js = (dir / "potential.json").string();

  PotentialNet net({3, 12, 3}, 55);
  net.save(bin, js);
  PotentialNet loaded = PotentialNet::load(js);
  CHECK(loaded.weights_hash() == net.weights_hash());
  auto rng = make_rng(10, 0x7368);
  const Vec s = random_obs(3, rng);
  for (int a2 = 0; a2 <= 3; ++a2) CHECK(loaded.phi(s, a2) == net.phi(s, a2));

  // Corrupting the blob must be caught by the stored hash.
  {
    std::FILE* f = std::fopen(bin.c_str(), "r+b");
    REQUIRE(f != nullptr);
    double v = 1234.5;
    std::fwrite(&v, sizeof(v), 1, f);
    std::fclose(f);
  }
  CHECK_THROWS_AS(PotentialNet::load(js), RuntimeFault);
  fs::remove_all(dir);
}

}  // TEST_SUITE
