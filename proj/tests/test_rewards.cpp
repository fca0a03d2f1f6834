#include <doctest.h>

#include <random>

#include "mimic/rewards/rewards.hpp"
#include "mimic/rewards/toddler.hpp"

using namespace mimic::rewards;

TEST_CASE("exp_tracking_reward: peak, one-sigma point, formula oracle") {
  Eigen::VectorXd s(3), ref(3);
  s << 1, 2, 3;
  ref = s;
  CHECK(exp_tracking_reward(s, ref, 2.5, 0.4) == doctest::Approx(2.5).epsilon(1e-12));

  // ||s - ref|| = sigma  ->  w * exp(-1/2)
  ref(0) += 0.4;
  CHECK(exp_tracking_reward(s, ref, 1.0, 0.4) ==
        doctest::Approx(std::exp(-0.5)).epsilon(1e-12));
  CHECK(exp_tracking_reward(s, ref, 3.0, 0.4) ==
        doctest::Approx(3.0 * 0.6065306597).epsilon(1e-6));

  std::mt19937_64 rng(71);
  std::uniform_real_distribution<double> u(-2, 2);
  for (int trial = 0; trial < 20; ++trial) {
    Eigen::VectorXd a(4), b(4);
    for (int i = 0; i < 4; ++i) {
      a(i) = u(rng);
      b(i) = u(rng);
    }
    const double w = 1.7, sig = 0.6;
    const double want = w * std::exp(-(a - b).squaredNorm() / (2 * sig * sig));
    CHECK(exp_tracking_reward(a, b, w, sig) == doctest::Approx(want).epsilon(1e-12));
    CHECK(exp_tracking_reward(a, b, w, sig) > 0.0);
    CHECK(exp_tracking_reward(a, b, w, sig) <= w);
  }
  CHECK_THROWS_AS(exp_tracking_reward(s, ref, 1.0, 0.0), std::invalid_argument);
}

TEST_CASE("l2 rewards: zero at equality, single-coordinate readout, loop oracle") {
  Eigen::VectorXd a(3), b(3);
  a << 1, 2, 3;
  b = a;
  CHECK(l2_deviation_reward(a, b, 2.0) == 0.0);
  CHECK(l2_rate_reward(a, b, 2.0) == 0.0);

  b(1) += 1.0;
  CHECK(l2_deviation_reward(a, b, 2.0) == doctest::Approx(-2.0));

  std::mt19937_64 rng(72);
  std::uniform_real_distribution<double> u(-2, 2);
  for (int trial = 0; trial < 10; ++trial) {
    Eigen::VectorXd x(5), y(5);
    double acc = 0;
    for (int i = 0; i < 5; ++i) {
      x(i) = u(rng);
      y(i) = u(rng);
      acc += (x(i) - y(i)) * (x(i) - y(i));
    }
    CHECK(l2_deviation_reward(x, y, 1.3) == doctest::Approx(-1.3 * acc).epsilon(1e-12));
    CHECK(l2_deviation_reward(x, y, 1.3) <= 0.0);
  }
}

TEST_CASE("contact_match_reward: XNOR sum") {
  Eigen::VectorXd c(2), r(2);
  c << 1, 1;
  r << 1, 1;
  CHECK(contact_match_reward(c, r, 0.5) == doctest::Approx(1.0));  // 2 * w
  r << 1, 0;
  CHECK(contact_match_reward(c, r, 0.5) == doctest::Approx(0.5));  // 1 * w

  std::mt19937_64 rng(73);
  std::bernoulli_distribution coin(0.5);
  for (int trial = 0; trial < 20; ++trial) {
    Eigen::VectorXd a(6), b(6);
    double want = 0;
    for (int i = 0; i < 6; ++i) {
      a(i) = coin(rng) ? 1.0 : 0.0;
      b(i) = coin(rng) ? 1.0 : 0.0;
      const bool xnor = (a(i) != 0.0) == (b(i) != 0.0);
      want += xnor ? 1.0 : 0.0;
    }
    CHECK(contact_match_reward(a, b, 2.0) == doctest::Approx(2.0 * want));
  }
  Eigen::VectorXd short_ref(1);
  CHECK_THROWS_AS(contact_match_reward(c, short_ref, 1.0), std::invalid_argument);
}

TEST_CASE("curriculum_update: advance, dip reset, scripted replay") {
  CurriculumTerm term;
  term.sigma_levels = {0.75, 0.6, 0.5, 0.45, 0.4};
  term.dwell = 5;

  for (int i = 0; i < 5; ++i) curriculum_update(term, 0.9);
  CHECK(term.level == 1);

  // one dip inside the window prevents the advance
  CurriculumTerm term2 = term;
  term2.level = 0;
  term2.streak = 0;
  for (int i = 0; i < 3; ++i) curriculum_update(term2, 0.9);
  curriculum_update(term2, 0.5);
  for (int i = 0; i < 4; ++i) curriculum_update(term2, 0.9);
  CHECK(term2.level == 0);
  curriculum_update(term2, 0.9);
  CHECK(term2.level == 1);

  // scripted oracle replay over a synthetic reward sequence
  std::mt19937_64 rng(74);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> rewards;
  for (int i = 0; i < 400; ++i) rewards.push_back(u(rng) < 0.8 ? 0.85 : 0.3);

  CurriculumTerm live;
  live.sigma_levels = {0.75, 0.6, 0.5, 0.45, 0.4};
  live.dwell = 5;
  int oracle_level = 0, oracle_streak = 0;
  std::vector<int> trajectory;
  for (double r : rewards) {
    curriculum_update(live, r);
    // independent scripted replay of the rule
    if (r >= 0.7)
      ++oracle_streak;
    else
      oracle_streak = 0;
    if (oracle_streak >= 5 && oracle_level < 4) {
      ++oracle_level;
      oracle_streak = 0;
    }
    CHECK(live.level == oracle_level);
    trajectory.push_back(live.level);
  }
  // monotone non-decreasing level trajectory
  for (std::size_t i = 1; i < trajectory.size(); ++i)
    CHECK(trajectory[i] >= trajectory[i - 1]);
  CHECK(live.level <= 4);
}

TEST_CASE("toddler_force: boundary, clamp depth, cap, activation gate") {
  ToddlerConfig cfg;
  cfg.spring_k = 2000.0;
  cfg.damping_c = 100.0;
  cfg.offset = 0.0;
  cfg.h_max = 0.3;
  cfg.force_cap = 730.0;

  // at the threshold with zero rate: no force
  CHECK(toddler_force(0.8, 0.0, 0.8, cfg) == 0.0);

  // far below: spring clamps at k * h_max, then the cap applies
  const double deep = toddler_force(0.8 - 0.6, 0.0, 0.8, cfg);
  CHECK(deep == doctest::Approx(std::min(cfg.spring_k * cfg.h_max, cfg.force_cap)));
  CHECK(deep <= cfg.force_cap);

  // above the threshold: zero regardless of the rate
  CHECK(toddler_force(0.9, -5.0, 0.8, cfg) == 0.0);
  CHECK(toddler_force(0.9, 5.0, 0.8, cfg) == 0.0);

  // continuity at a stationary crossing, exact
  CHECK(toddler_force(0.8, 0.0, 0.8, cfg) == 0.0);
  const double below = toddler_force(0.8 - 1e-13, 0.0, 0.8, cfg);
  CHECK(std::abs(below - 0.0) < 1e-9);

  ToddlerConfig bad = cfg;
  bad.spring_k = 1e6;  // k * h_max above the cap
  CHECK_THROWS_AS(toddler_force(0.5, 0.0, 0.8, bad), std::invalid_argument);
}

TEST_CASE("toddler_anneal: endpoints and exact halving") {
  ToddlerConfig cfg;
  cfg.spring_k = 1000.0;
  cfg.damping_c = 50.0;
  cfg.h_max = 0.2;
  cfg.force_cap = 730.0;

  auto same = toddler_anneal(cfg, 0.0);
  CHECK(same.spring_k == cfg.spring_k);
  CHECK(same.h_max == cfg.h_max);

  auto gone = toddler_anneal(cfg, 1.0);
  for (double h : {0.5, 0.7, 0.79}) CHECK(toddler_force(h, -1.0, 0.8, gone) == 0.0);

  auto half = toddler_anneal(cfg, 0.5);
  // forces exactly halved for in-range heights with zero rate
  for (double dh : {0.01, 0.05, 0.09}) {
    const double f_full = toddler_force(0.8 - dh, 0.0, 0.8, cfg);
    const double f_half = toddler_force(0.8 - dh, 0.0, 0.8, half);
    CHECK(f_half == doctest::Approx(0.5 * f_full).epsilon(1e-12));
  }
}

TEST_CASE("imitation_termination: exactness and monotone boundary") {
  TerminationSpec spec;
  spec.max_gravity_angle = 0.5;
  spec.max_height_dev = 0.3;

  const Eigen::Vector3d down(0, 0, -1);
  CHECK_FALSE(imitation_termination(down, down, 0.8, 0.8, spec));

  // height gap 0.5 with limit 0.3 trips
  CHECK(imitation_termination(down, down, 0.8, 0.3, spec));

  // sweep: decision boundary at the thresholds exactly
  for (double dh = 0.0; dh <= 0.6; dh += 0.01) {
    const bool t = imitation_termination(down, down, 0.8 + dh, 0.8, spec);
    CHECK(t == (dh > 0.3));
  }
  for (double ang = 0.01; ang <= 1.0; ang += 0.02) {  // grid avoids the edge
    Eigen::Vector3d g(std::sin(ang), 0, -std::cos(ang));
    const bool t = imitation_termination(g, down, 0.8, 0.8, spec);
    CHECK(t == (ang > 0.5));
  }

  // monotone: enlarging either deviation never flips true -> false
  bool prev = false;
  for (double dh = 0.0; dh <= 1.0; dh += 0.005) {
    const bool t = imitation_termination(down, down, 0.8 + dh, 0.8, spec);
    CHECK(t >= prev);
    prev = t;
  }
}
