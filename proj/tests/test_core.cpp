#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "maprank/core.hpp"
#include "maprank/rng.hpp"

using namespace maprank;

namespace {

Listing make_listing(std::string id, double logit, double x = 0.0, double y = 0.0) {
  Listing l;
  l.id = std::move(id);
  l.logit = logit;
  l.x = x;
  l.y = y;
  return l;
}

DisplaySet display_from_probs(const std::vector<double>& probs) {
  DisplaySet d;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    d.items.push_back({make_listing("p" + std::to_string(i), std::log(probs[i])),
                       static_cast<int>(i) + 1, PinTier::regular});
  }
  return d;
}

}  // namespace

TEST_CASE("booking probability is exp of the logit") {
  CHECK(booking_probability(0.0) == 1.0);
  CHECK(booking_probability(std::log(0.5)) == doctest::Approx(0.5).epsilon(1e-15));
  // A one-unit logit gap is exactly a factor e in probability.
  const double ratio = booking_probability(-1.0) / booking_probability(-2.0);
  CHECK(ratio == doctest::Approx(2.718281828459045).epsilon(1e-12));
  CHECK_THROWS_AS(booking_probability(0.001), std::domain_error);
  CHECK_THROWS_AS(booking_probability(std::nan("")), std::domain_error);
}

TEST_CASE("logit differences are log probability ratios") {
  SplitMix64 rng(2024);
  for (int i = 0; i < 500; ++i) {
    const double lx = -8.0 * rng.uniform01();
    const double ly = -8.0 * rng.uniform01();
    const double lhs = lx - ly;
    const double rhs = std::log(booking_probability(lx) / booking_probability(ly));
    CHECK(std::abs(lhs - rhs) < 1e-12);
  }
}

TEST_CASE("rank_by_logit sorts by logit, ties by id") {
  std::vector<Listing> ls{make_listing("a", -1.0), make_listing("b", -2.0)};
  CHECK(rank_by_logit(ls).ids == std::vector<std::string>{"a", "b"});

  std::vector<Listing> tie{make_listing("b", -1.0), make_listing("a", -1.0)};
  CHECK(rank_by_logit(tie).ids == std::vector<std::string>{"a", "b"});

  CHECK_THROWS_AS(rank_by_logit({}), std::invalid_argument);
  std::vector<Listing> dup{make_listing("a", -1.0), make_listing("a", -2.0)};
  CHECK_THROWS_AS(rank_by_logit(dup), std::invalid_argument);
}

TEST_CASE("rank_by_logit matches an independent sort oracle") {
  SplitMix64 rng(77);
  std::vector<Listing> ls;
  for (int i = 0; i < 100; ++i) {
    // Coarse quantization forces plenty of exact ties.
    const double logit = -std::floor(rng.uniform01() * 12.0) / 4.0;
    ls.push_back(make_listing("id" + std::to_string(i), logit));
  }
  std::vector<std::pair<double, std::string>> oracle;
  for (const Listing& l : ls) oracle.emplace_back(-l.logit, l.id);
  std::sort(oracle.begin(), oracle.end());
  const RankedResult got = rank_by_logit(ls);
  REQUIRE(got.ids.size() == oracle.size());
  for (std::size_t i = 0; i < oracle.size(); ++i) {
    CHECK(got.ids[i] == oracle[i].second);
    CHECK(got.logits[i] == -oracle[i].first);
  }
}

TEST_CASE("expected booking under uniform map attention is the plain average") {
  const DisplaySet d = display_from_probs({0.4, 0.2});
  CHECK(expected_booking(d, MapUniform{}) == doctest::Approx(0.3).epsilon(1e-12));

  SplitMix64 rng(5);
  for (int trial = 0; trial < 50; ++trial) {
    const int n = 1 + static_cast<int>(rng.bounded(20));
    std::vector<double> probs;
    double mean = 0.0;
    for (int i = 0; i < n; ++i) {
      probs.push_back(0.01 + 0.99 * rng.uniform01());
      mean += probs.back();
    }
    mean /= n;
    const double got = expected_booking(display_from_probs(probs), MapUniform{});
    CHECK(std::abs(got - mean) < 1e-12);
  }
}

TEST_CASE("expected booking with positional weights") {
  // Two slots, weights {1, 0.5}: normalized attention {2/3, 1/3}.
  const DisplaySet d = display_from_probs({0.3, 0.6});
  const ListPositional lp{{1.0, 0.5}};
  CHECK(expected_booking(d, lp) == doctest::Approx(0.4).epsilon(1e-12));
}

TEST_CASE("a single displayed item books with its own probability") {
  const DisplaySet d = display_from_probs({0.7});
  CHECK(expected_booking(d, MapUniform{}) == doctest::Approx(0.7).epsilon(1e-12));
  CHECK(expected_booking(d, ListPositional{{1.0}}) ==
        doctest::Approx(0.7).epsilon(1e-12));
  CHECK(expected_booking(d, MapTiered{}) == doctest::Approx(0.7).epsilon(1e-12));
  const MapContinuous mc{
      std::make_shared<AttentionSurface>(synthetic_radial_surface(0.5, 0.3, 0.0, 11)),
      {0.0, 0.0}};
  CHECK(expected_booking(d, mc) == doctest::Approx(0.7).epsilon(1e-12));
}

TEST_CASE("attention model validation") {
  const DisplaySet d = display_from_probs({0.3, 0.2, 0.1});
  CHECK_THROWS_AS(expected_booking(DisplaySet{}, MapUniform{}),
                  std::invalid_argument);
  // Too few weights for the display.
  CHECK_THROWS_AS(expected_booking(d, ListPositional{{1.0, 0.5}}),
                  std::invalid_argument);
  // Increasing weights.
  CHECK_THROWS_AS(expected_booking(d, ListPositional{{0.5, 1.0, 1.0}}),
                  std::invalid_argument);
  // Non-positive weight.
  CHECK_THROWS_AS(expected_booking(d, ListPositional{{1.0, 0.5, 0.0}}),
                  std::invalid_argument);
  CHECK_THROWS_AS(expected_booking(d, ListPositional{{}}), std::invalid_argument);
  CHECK_THROWS_AS(expected_booking(d, MapContinuous{nullptr, {0, 0}}),
                  std::invalid_argument);
}

TEST_CASE("all-hidden display has zero expected bookings") {
  DisplaySet d = display_from_probs({0.5, 0.5});
  for (auto& item : d.items) item.tier = PinTier::none;
  CHECK(expected_booking(d, MapTiered{}) == 0.0);
}

TEST_CASE("items off the surface support get zero attention and are flagged") {
  auto surface = std::make_shared<AttentionSurface>(
      synthetic_radial_surface(0.5, 0.3, 0.0, 11));
  DisplaySet d;
  d.items.push_back({make_listing("in", std::log(0.4), 0.0, 0.0), 1, PinTier::regular});
  d.items.push_back({make_listing("out", std::log(0.9), 0.8, 0.0), 2, PinTier::regular});
  EvalDiagnostics diag;
  const double v = expected_booking(d, MapContinuous{surface, {0.0, 0.0}}, &diag);
  CHECK(diag.zero_attention_items == 1);
  // The off-support item contributes nothing, so the in-support item takes
  // the entire attention mass.
  CHECK(v == doctest::Approx(0.4).epsilon(1e-12));
}

TEST_CASE("the display's own center overrides the model center") {
  auto surface = std::make_shared<AttentionSurface>(
      synthetic_radial_surface(0.5, 0.1, 0.0, 21));
  DisplaySet d;
  d.items.push_back({make_listing("a", std::log(0.6), 0.3, 0.1), 1, PinTier::regular});
  d.center = Point{0.3, 0.1};  // pin sits exactly at the display center
  const MapContinuous mc{surface, {0.0, 0.0}};
  CHECK(expected_booking(d, mc) == doctest::Approx(0.6).epsilon(1e-12));
}

TEST_CASE("uniform attention is order-invariant, positional attention is not") {
  SplitMix64 rng(99);
  std::vector<double> probs{0.61, 0.37, 0.22, 0.09, 0.45};
  DisplaySet d = display_from_probs(probs);
  const double base_uniform = expected_booking(d, MapUniform{});
  const ListPositional lp{{1.0, 0.7, 0.5, 0.3, 0.2}};
  const double base_positional = expected_booking(d, lp);

  bool positional_changed = false;
  for (int trial = 0; trial < 20; ++trial) {
    DisplaySet shuffled = d;
    rng.shuffle(shuffled.items);
    CHECK(std::abs(expected_booking(shuffled, MapUniform{}) - base_uniform) < 1e-12);
    if (std::abs(expected_booking(shuffled, lp) - base_positional) > 1e-9) {
      positional_changed = true;
    }
  }
  CHECK(positional_changed);
}

TEST_CASE("logit-sorted order uniquely maximizes positional expected bookings") {
  // Brute force over every permutation for sizes up to 7.
  SplitMix64 rng(31);
  for (int n = 2; n <= 7; ++n) {
    std::vector<double> probs;
    for (int i = 0; i < n; ++i) {
      probs.push_back(0.05 + 0.9 * rng.uniform01());
    }
    std::sort(probs.begin(), probs.end(), std::greater<double>());
    ListPositional lp;
    for (int i = 0; i < n; ++i) lp.weights.push_back(1.0 / (i + 1.0));

    std::vector<std::size_t> perm(probs.size());
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    const std::vector<std::size_t> sorted_perm = perm;
    double best = -1.0;
    std::vector<std::size_t> argmax;
    int max_count = 0;
    do {
      std::vector<double> arranged;
      for (std::size_t i : perm) arranged.push_back(probs[i]);
      const double v = expected_booking(display_from_probs(arranged), lp);
      if (v > best + 1e-15) {
        best = v;
        argmax = perm;
        max_count = 1;
      } else if (std::abs(v - best) <= 1e-15) {
        ++max_count;
      }
    } while (std::next_permutation(perm.begin(), perm.end()));
    CHECK(argmax == sorted_perm);
    CHECK(max_count == 1);  // distinct probabilities: the maximizer is unique
  }
}

TEST_CASE("ndcg basics") {
  const std::map<std::string, double> rel{{"a", 1.0}, {"b", 0.0}};
  CHECK(ndcg({"a", "b"}, rel, 2) == 1.0);
  // Reversed two-item list: DCG = 1/log2(3), ideal = 1.
  CHECK(ndcg({"b", "a"}, rel, 2) ==
        doctest::Approx(0.6309297535714574).epsilon(1e-12));
  CHECK(ndcg({"a"}, {{"a", 3.0}}, 1) == 1.0);
  // All-zero relevance: any order is ideal.
  CHECK(ndcg({"a", "b"}, {{"a", 0.0}, {"b", 0.0}}, 2) == 1.0);
}

TEST_CASE("ndcg validation and range") {
  const std::map<std::string, double> rel{{"a", 1.0}};
  CHECK_THROWS_AS(ndcg({"a", "b"}, rel, 2), std::invalid_argument);
  CHECK_THROWS_AS(ndcg({"a"}, rel, 0), std::invalid_argument);
  CHECK_THROWS_AS(ndcg({"a"}, {{"a", -0.5}}, 1), std::invalid_argument);
  CHECK_THROWS_AS(ndcg({}, rel, 1), std::invalid_argument);

  SplitMix64 rng(123);
  for (int trial = 0; trial < 100; ++trial) {
    const int n = 1 + static_cast<int>(rng.bounded(10));
    std::vector<std::string> ids;
    std::map<std::string, double> r;
    for (int i = 0; i < n; ++i) {
      ids.push_back("x" + std::to_string(i));
      r[ids.back()] = rng.uniform01() < 0.2 ? 0.0 : rng.uniform01();
    }
    rng.shuffle(ids);
    const double v = ndcg(ids, r, 1 + static_cast<int>(rng.bounded(12)));
    CHECK(v >= 0.0);
    CHECK(v <= 1.0 + 1e-12);
  }
}

TEST_CASE("ndcg is 1 exactly when the order is relevance-sorted") {
  const std::map<std::string, double> rel{
      {"a", 0.9}, {"b", 0.5}, {"c", 0.5}, {"d", 0.1}};
  CHECK(ndcg({"a", "b", "c", "d"}, rel, 4) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(ndcg({"a", "c", "b", "d"}, rel, 4) ==
        doctest::Approx(1.0).epsilon(1e-15));  // tie swap is still ideal
  CHECK(ndcg({"d", "b", "c", "a"}, rel, 4) < 1.0);
}
