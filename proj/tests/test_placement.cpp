#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <memory>
#include <vector>

#include "maprank/attention.hpp"
#include "maprank/core.hpp"
#include "maprank/placement.hpp"
#include "maprank/rng.hpp"

using namespace maprank;

namespace {

Listing make_listing(std::string id, double logit, double x, double y) {
  Listing l;
  l.id = std::move(id);
  l.logit = logit;
  l.x = x;
  l.y = y;
  return l;
}

std::shared_ptr<const AttentionSurface> radial(double scale, int resolution,
                                               double shift = 0.0) {
  return std::make_shared<AttentionSurface>(
      synthetic_radial_surface(0.8, scale, shift, resolution));
}

// Independent brute force: enumerate the same half-open candidate grid by
// definition (k = 0, 1, ... while lo + k*eps < hi; a degenerate axis keeps
// its single boundary value), recompute the objective from scratch, and
// finish with the pin centroid, which wins only when strictly better.
PlacementResult oracle_optimize(const std::vector<Listing>& listings,
                                const PlacementConfig& cfg) {
  std::vector<Listing> pins = sort_by_logit(listings);
  if (static_cast<int>(pins.size()) > cfg.n_pins) {
    pins.resize(static_cast<std::size_t>(cfg.n_pins));
  }
  double x_min = pins[0].x, x_max = pins[0].x;
  double y_min = pins[0].y, y_max = pins[0].y;
  for (const Listing& l : pins) {
    x_min = std::min(x_min, l.x);
    x_max = std::max(x_max, l.x);
    y_min = std::min(y_min, l.y);
    y_max = std::max(y_max, l.y);
  }
  auto candidates = [&](double lo, double hi) {
    std::vector<double> xs;
    for (long long k = 0; lo + static_cast<double>(k) * cfg.epsilon < hi; ++k) {
      xs.push_back(lo + static_cast<double>(k) * cfg.epsilon);
    }
    if (xs.empty()) xs.push_back(lo);
    return xs;
  };
  auto objective_at = [&](double x, double y) {
    double obj = 0.0;
    for (const Listing& l : pins) {
      obj += relative_attention(*cfg.surface, l.x - x, l.y - y) *
             std::exp(l.logit);
    }
    return obj;
  };
  PlacementResult best;
  best.pins = pins;
  best.objective = -1.0;
  bool first = true;
  for (double x : candidates(x_min, x_max)) {
    for (double y : candidates(y_min, y_max)) {
      const double obj = objective_at(x, y);
      if (first || obj > best.objective) {
        best.objective = obj;
        best.center = {x, y};
        first = false;
      }
    }
  }
  double mean_x = 0.0, mean_y = 0.0;
  for (const Listing& l : pins) {
    mean_x += l.x;
    mean_y += l.y;
  }
  mean_x /= static_cast<double>(pins.size());
  mean_y /= static_cast<double>(pins.size());
  const double centroid_obj = objective_at(mean_x, mean_y);
  if (centroid_obj > best.objective) {
    best.objective = centroid_obj;
    best.center = {mean_x, mean_y};
  }
  return best;
}

}  // namespace

TEST_CASE("objective sums attention-weighted booking probabilities") {
  const auto surface = radial(0.25, 21);
  std::vector<Listing> pins{make_listing("a", std::log(0.5), 0.1, 0.2),
                            make_listing("b", std::log(0.3), 0.1, 0.2),
                            make_listing("c", std::log(0.2), 0.1, 0.2)};
  // Every pin at the center: full attention, objective is the plain sum.
  CHECK(placement_objective(pins, {0.1, 0.2}, *surface) ==
        doctest::Approx(1.0).epsilon(1e-12));

  std::vector<Listing> far{make_listing("a", std::log(0.5), 0.7, 0.0),
                           make_listing("b", std::log(0.3), 0.0, -0.9)};
  CHECK(placement_objective(far, {0.0, 0.0}, *surface) == 0.0);

  CHECK_THROWS_AS(placement_objective({}, {0.0, 0.0}, *surface),
                  std::invalid_argument);
}

TEST_CASE("objective matches a by-hand recomputation on a mixed layout") {
  const double scale = 0.25;
  const auto surface = radial(scale, 21);
  std::vector<Listing> pins{make_listing("a", std::log(0.6), 0.12, -0.08),
                            make_listing("b", std::log(0.25), -0.3, 0.2),
                            make_listing("c", std::log(0.1), 0.55, 0.0)};
  const Point center{0.02, -0.01};
  double want = 0.0;
  for (const Listing& l : pins) {
    const double dx = l.x - center.x;
    const double dy = l.y - center.y;
    int ix = 0, iy = 0;
    if (!surface_cell_index(21, dx, dy, ix, iy)) continue;  // "c" falls outside
    const double cx = surface->cell_coord(ix);
    const double cy = surface->cell_coord(iy);
    want += std::exp(-(cx * cx + cy * cy) / (2.0 * scale * scale)) *
            std::exp(l.logit);
  }
  CHECK(placement_objective(pins, center, *surface) ==
        doctest::Approx(want).epsilon(1e-12));
}

TEST_CASE("a single listing gets centered on itself") {
  const auto surface = radial(0.25, 21);
  PlacementConfig cfg;
  cfg.surface = surface;
  const PlacementResult res =
      optimize_center({make_listing("only", std::log(0.55), 0.3, 0.4)}, cfg);
  CHECK(res.center.x == 0.3);
  CHECK(res.center.y == 0.4);
  CHECK(res.objective == doctest::Approx(0.55).epsilon(1e-12));
  REQUIRE(res.pins.size() == 1);
  CHECK(res.pins[0].id == "only");
}

TEST_CASE("two equal listings pull the center to their midpoint") {
  const auto surface = radial(0.3, 21);
  PlacementConfig cfg;
  cfg.surface = surface;
  cfg.epsilon = 0.05;
  const PlacementResult res =
      optimize_center({make_listing("l", std::log(0.4), -0.2, 0.0),
                       make_listing("r", std::log(0.4), 0.2, 0.0)},
                      cfg);
  CHECK(std::abs(res.center.x) < cfg.epsilon + 1e-12);
  CHECK(res.center.y == 0.0);
}

TEST_CASE("a dominant listing anchors the center despite a distant straggler") {
  const auto surface = radial(0.03, 21);  // attention dies within ~0.1
  PlacementConfig cfg;
  cfg.surface = surface;
  cfg.epsilon = 0.05;
  const PlacementResult res =
      optimize_center({make_listing("big", std::log(0.9), 0.0, 0.0),
                       make_listing("tiny", std::log(0.01), 0.4, 0.0)},
                      cfg);
  CHECK(std::abs(res.center.x) < cfg.epsilon + 1e-12);
  CHECK(res.center.y == 0.0);
  CHECK(res.objective >= 0.9 - 1e-12);
}

TEST_CASE("optimizer configuration is validated") {
  const auto surface = radial(0.25, 21);
  const std::vector<Listing> ls{make_listing("a", -1.0, 0.0, 0.0),
                                make_listing("b", -1.5, 0.3, 0.1)};
  PlacementConfig cfg;
  cfg.surface = surface;
  cfg.n_pins = 0;
  CHECK_THROWS_AS(optimize_center(ls, cfg), std::invalid_argument);
  cfg.n_pins = 18;
  cfg.epsilon = 0.0;
  CHECK_THROWS_AS(optimize_center(ls, cfg), std::invalid_argument);
  cfg.epsilon = -0.1;
  CHECK_THROWS_AS(optimize_center(ls, cfg), std::invalid_argument);
  cfg.epsilon = 0.05;
  cfg.surface = nullptr;
  CHECK_THROWS_AS(optimize_center(ls, cfg), std::invalid_argument);
  cfg.surface = surface;
  CHECK_THROWS_AS(optimize_center({}, cfg), std::invalid_argument);
  // The step must be finer than the pin bounding box when it has any extent.
  const std::vector<Listing> tight{make_listing("a", -1.0, 0.0, 0.0),
                                   make_listing("b", -1.5, 1e-9, 0.0)};
  CHECK_THROWS_AS(optimize_center(tight, cfg), std::invalid_argument);
}

TEST_CASE("greedy search matches an exhaustive grid oracle exactly") {
  SplitMix64 rng(2718);
  int checked = 0;
  for (int trial = 0; trial < 60; ++trial) {
    const int n = 1 + static_cast<int>(rng.bounded(20));
    std::vector<Listing> ls;
    for (int i = 0; i < n; ++i) {
      ls.push_back(make_listing("p" + std::to_string(i),
                                -4.0 + 3.8 * rng.uniform01(),
                                rng.uniform(-0.45, 0.45),
                                rng.uniform(-0.45, 0.45)));
    }
    PlacementConfig cfg;
    cfg.n_pins = 1 + static_cast<int>(rng.bounded(20));
    cfg.surface = radial(0.15 + 0.25 * rng.uniform01(),
                         rng.uniform01() < 0.5 ? 15 : 21,
                         rng.uniform01() < 0.3 ? -0.1 : 0.0);

    // Size the step from the frozen pin extent so the grid stays bounded.
    std::vector<Listing> pins = sort_by_logit(ls);
    if (static_cast<int>(pins.size()) > cfg.n_pins) {
      pins.resize(static_cast<std::size_t>(cfg.n_pins));
    }
    double x_lo = pins[0].x, x_hi = pins[0].x, y_lo = pins[0].y, y_hi = pins[0].y;
    for (const Listing& l : pins) {
      x_lo = std::min(x_lo, l.x);
      x_hi = std::max(x_hi, l.x);
      y_lo = std::min(y_lo, l.y);
      y_hi = std::max(y_hi, l.y);
    }
    const double extent = std::max(x_hi - x_lo, y_hi - y_lo);
    if (extent <= 0.0) {
      cfg.epsilon = 0.05;
    } else {
      cfg.epsilon = extent / (5.0 + rng.uniform01() * 40.0);
    }

    const PlacementResult got = optimize_center(ls, cfg);
    const PlacementResult want = oracle_optimize(ls, cfg);
    REQUIRE(got.center.x == want.center.x);
    REQUIRE(got.center.y == want.center.y);
    REQUIRE(got.objective == want.objective);
    REQUIRE(got.pins.size() == want.pins.size());

    // The chosen center is never worse than the naive pin centroid.
    double mx = 0.0, my = 0.0;
    for (const Listing& l : got.pins) {
      mx += l.x;
      my += l.y;
    }
    mx /= static_cast<double>(got.pins.size());
    my /= static_cast<double>(got.pins.size());
    CHECK(got.objective >=
          placement_objective(got.pins, {mx, my}, *cfg.surface) - 1e-12);
    ++checked;
  }
  CHECK(checked == 60);
}

TEST_CASE("repeated runs return bit-identical results") {
  SplitMix64 rng(5);
  std::vector<Listing> ls;
  for (int i = 0; i < 12; ++i) {
    ls.push_back(make_listing("p" + std::to_string(i), -2.0 * rng.uniform01(),
                              rng.uniform(-0.4, 0.4), rng.uniform(-0.4, 0.4)));
  }
  PlacementConfig cfg;
  cfg.surface = radial(0.25, 21);
  cfg.epsilon = 0.02;
  const PlacementResult a = optimize_center(ls, cfg);
  const PlacementResult b = optimize_center(ls, cfg);
  CHECK(a.center.x == b.center.x);
  CHECK(a.center.y == b.center.y);
  CHECK(a.objective == b.objective);
}

TEST_CASE("search cost grows about linearly with the pin count") {
  // Two anchor pins fix the bounding box so the candidate grid is constant.
  auto build = [](int n) {
    std::vector<Listing> ls{make_listing("a0", 0.0, -0.4, -0.4),
                            make_listing("a1", 0.0, 0.4, 0.4)};
    SplitMix64 rng(17);
    for (int i = 2; i < n; ++i) {
      ls.push_back(make_listing("p" + std::to_string(i), -1.0,
                                rng.uniform(-0.4, 0.4), rng.uniform(-0.4, 0.4)));
    }
    return ls;
  };
  const auto small = build(8);
  const auto large = build(32);
  PlacementConfig cfg;
  cfg.surface = radial(0.25, 21);
  cfg.epsilon = 0.02;
  cfg.n_pins = 32;

  auto time_batch = [&](const std::vector<Listing>& ls) {
    double best = 1e300;
    for (int trial = 0; trial < 5; ++trial) {
      const auto t0 = std::chrono::steady_clock::now();
      for (int rep = 0; rep < 30; ++rep) {
        volatile double sink = optimize_center(ls, cfg).objective;
        (void)sink;
      }
      const auto t1 = std::chrono::steady_clock::now();
      best = std::min(best,
                      std::chrono::duration<double>(t1 - t0).count());
    }
    return best;
  };
  const double t_small = time_batch(small);
  const double t_large = time_batch(large);
  const double ratio = t_large / t_small;
  // 4x the pins: expect ~4x the work, accepted within a factor of two.
  CHECK(ratio > 2.0);
  CHECK(ratio < 8.0);
}
