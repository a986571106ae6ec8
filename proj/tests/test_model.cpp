#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "cecran/model.hpp"

using namespace cecran;
using namespace cecran::model;

TEST(scenario, defaults_validate) {
  const Scenario s = make_scenario({});
  EXPECT_NO_THROW(s.validate());
  EXPECT_EQ(s.total_antennas(), 4);
  EXPECT_EQ(s.antenna_offset(1), 2);
  EXPECT_NEAR(s.power_ul, 100.0, 1e-12);
}

TEST(scenario, broken_invariants_throw) {
  Scenario s = make_scenario({});
  s.power_ul = 50.0;
  EXPECT_THROW(s.validate(), std::invalid_argument);
  s = make_scenario({});
  s.served_sets[0].push_back(1);
  EXPECT_THROW(s.validate(), std::invalid_argument);
  s = make_scenario({});
  s.cf_dl = 0.0;
  EXPECT_THROW(s.validate(), std::invalid_argument);
}

TEST(generate_topology, respects_min_separation) {
  Rng rng(11);
  TopologyParams p;
  const Positions pos = generate_topology(rng, p, 4, 2);
  ASSERT_EQ(pos.ues.size(), 4u);
  ASSERT_EQ(pos.ens.size(), 2u);
  for (const auto& u : pos.ues) {
    EXPECT_TRUE(u.x >= 0 && u.x < 500 && u.y >= 0 && u.y < 500);
    for (const auto& e : pos.ens) EXPECT_GE(distance(u, e), 10.0);
  }
}

TEST(generate_topology, zero_separation_accepts_first_draw) {
  TopologyParams p;
  p.min_sep_m = 0.0;
  Rng a(12), b(12);
  const Positions pos = generate_topology(a, p, 3, 1);
  const double ex = b.uniform() * 500, ey = b.uniform() * 500;
  EXPECT_EQ(pos.ens[0].x, ex);
  EXPECT_EQ(pos.ens[0].y, ey);
  const double ux = b.uniform() * 500;
  EXPECT_EQ(pos.ues[0].x, ux);
}

TEST(generate_topology, deterministic_for_seed) {
  TopologyParams p;
  Rng a(13), b(13);
  const Positions x = generate_topology(a, p, 8, 4), y = generate_topology(b, p, 8, 4);
  for (std::size_t k = 0; k < 8; ++k) {
    EXPECT_EQ(x.ues[k].x, y.ues[k].x);
    EXPECT_EQ(x.ues[k].y, y.ues[k].y);
  }
}

TEST(generate_topology, impossible_separation_fails) {
  TopologyParams p;
  p.side_m = 10.0;
  p.min_sep_m = 9.9;
  Rng rng(14);
  EXPECT_THROW(generate_topology(rng, p, 20, 20), std::runtime_error);
}

TEST(path_loss, reference_points) {
  TopologyParams p;
  EXPECT_NEAR(path_loss(30.0, p), 10.0, 1e-12);
  EXPECT_NEAR(path_loss(300.0, p), 0.01, 1e-15);
  EXPECT_NEAR(path_loss(30.0 * std::cbrt(10.0), p), 1.0, 1e-12);
  EXPECT_THROW(path_loss(0.0, p), std::domain_error);
  EXPECT_THROW(path_loss(-1.0, p), std::domain_error);
}

TEST(path_loss, strictly_decreasing) {
  TopologyParams p;
  double prev = path_loss(1.0, p);
  for (double d = 2.0; d < 800.0; d *= 1.3) {
    const double v = path_loss(d, p);
    EXPECT_LT(v, prev);
    prev = v;
  }
}

TEST(sample_channels, mean_power_matches_path_loss) {
  Scenario s = make_scenario({1, 1, 8});
  Positions pos;
  pos.ues = {{30.0, 0.0}};
  pos.ens = {{0.0, 0.0}};
  TopologyParams p;
  Rng rng(15);
  double acc = 0.0;
  int count = 0;
  for (int t = 0; t < 4000; ++t) {
    const ChannelSet ch = sample_channels(rng, pos, p, s);
    acc += ch.h_ul[0][0].squaredNorm() + ch.h_dl[0][0].squaredNorm();
    count += 16;
  }
  // 64000 unit-exponential draws: standard error of the mean about 0.4%.
  EXPECT_NEAR(acc / count, 10.0, 0.2);
}

TEST(sample_channels, stacked_forms_are_consistent) {
  ScenarioSpec spec;
  spec.num_ues = 5;
  spec.num_ens = 3;
  Scenario s = make_scenario(spec);
  s.antennas = {1, 2, 3};
  Rng rng(16);
  TopologyParams p;
  const Positions pos = generate_topology(rng, p, 5, 3);
  set_association(s, associate(pos));
  const ChannelSet ch = sample_channels(rng, pos, p, s);
  const int nt = s.total_antennas();
  rmat cover = rmat::Zero(nt, nt);
  for (int i = 0; i < 3; ++i) {
    const rmat& E = ch.selector[static_cast<std::size_t>(i)];
    EXPECT_TRUE((E.transpose() * E).isIdentity());
    cover += E * E.transpose();
  }
  EXPECT_TRUE(cover.isIdentity());
  for (int k = 0; k < 5; ++k) {
    const auto ku = static_cast<std::size_t>(k);
    cvec rebuilt = cvec::Zero(nt);
    for (int i = 0; i < 3; ++i)
      rebuilt += ch.selector[static_cast<std::size_t>(i)].cast<cplx>() * ch.h_ul[static_cast<std::size_t>(i)][ku];
    EXPECT_EQ((rebuilt - ch.h_ul_stacked[ku]).norm(), 0.0);
    const int i = s.association[ku];
    EXPECT_EQ(ch.h_ul_tilde[ku].segment(s.antenna_offset(i), s.antennas[static_cast<std::size_t>(i)]).norm(), 0.0);
  }
}

TEST(sample_channels, deterministic_for_seed) {
  const Scenario s = make_scenario({});
  TopologyParams p;
  Rng a(17), b(17);
  const Positions pa = generate_topology(a, p, 4, 2), pb = generate_topology(b, p, 4, 2);
  const ChannelSet x = sample_channels(a, pa, p, s), y = sample_channels(b, pb, p, s);
  for (std::size_t k = 0; k < 4; ++k) EXPECT_EQ(x.h_ul_stacked[k], y.h_ul_stacked[k]);
}

TEST(sample_channels, mismatched_positions_throw) {
  const Scenario s = make_scenario({});
  Positions pos;
  pos.ues = {{1, 1}};
  pos.ens = {{2, 2}};
  Rng rng(18);
  EXPECT_THROW(sample_channels(rng, pos, {}, s), std::invalid_argument);
}

TEST(associate, closest_and_ties) {
  Positions pos;
  pos.ues = {{0, 0}, {50, 0}};
  pos.ens = {{10, 0}, {100, 0}};
  const auto a = associate(pos);
  EXPECT_EQ(a[0], 0);
  EXPECT_EQ(a[1], 0);  // 40 vs 50
  pos.ues = {{55, 0}};
  EXPECT_EQ(associate(pos)[0], 0);  // equidistant
  pos.ens.clear();
  EXPECT_THROW(associate(pos), std::invalid_argument);
}

TEST(associate, partitions_and_is_permutation_equivariant) {
  Rng rng(19);
  const Positions pos = generate_topology(rng, {}, 8, 4);
  const auto a = associate(pos);
  Scenario s = make_scenario({8, 4});
  set_association(s, a);
  std::size_t total = 0;
  for (const auto& set : s.served_sets) total += set.size();
  EXPECT_EQ(total, 8u);
  EXPECT_NO_THROW(s.validate());
  Positions rev = pos;
  std::reverse(rev.ues.begin(), rev.ues.end());
  const auto b = associate(rev);
  for (std::size_t k = 0; k < 8; ++k) EXPECT_EQ(b[k], a[7 - k]);
}
