#include "maprank/sim.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <thread>
#include <unordered_set>

#include "maprank/io.hpp"
#include "maprank/placement.hpp"
#include "maprank/rng.hpp"

namespace maprank {

namespace {

double clamp(double v, double lo, double hi) {
  return std::max(lo, std::min(hi, v));
}

}  // namespace

std::vector<Listing> generate_inventory(const InventoryConfig& cfg) {
  if (cfg.n < 0) throw std::invalid_argument("inventory size must be >= 0");
  if (cfg.spatial == SpatialDist::clustered) {
    if (cfg.clusters < 1) throw std::invalid_argument("clusters must be >= 1");
    if (cfg.spread < 0.0) throw std::invalid_argument("spread must be >= 0");
  }
  if (cfg.noise_sd < 0.0) throw std::invalid_argument("noise_sd must be >= 0");
  if (!(cfg.base_logit <= 0.0)) {
    throw std::invalid_argument("base_logit must be <= 0");
  }

  SplitMix64 rng(cfg.seed);
  std::vector<Point> centers;
  if (cfg.spatial == SpatialDist::clustered) {
    centers.reserve(static_cast<std::size_t>(cfg.clusters));
    for (int c = 0; c < cfg.clusters; ++c) {
      const double cx = rng.uniform(-0.35, 0.35);
      const double cy = rng.uniform(-0.35, 0.35);
      centers.push_back({cx, cy});
    }
  }

  std::vector<Listing> out;
  out.reserve(static_cast<std::size_t>(cfg.n));
  for (int i = 0; i < cfg.n; ++i) {
    Listing l;
    char buf[16];
    std::snprintf(buf, sizeof buf, "L%06d", i + 1);
    l.id = buf;

    if (cfg.spatial == SpatialDist::uniform) {
      l.x = rng.uniform(-0.5, 0.5);
      l.y = rng.uniform(-0.5, 0.5);
    } else {
      const Point& c = centers[rng.bounded(static_cast<std::uint64_t>(cfg.clusters))];
      l.x = clamp(c.x + cfg.spread * rng.normal(), -0.5, 0.5);
      l.y = clamp(c.y + cfg.spread * rng.normal(), -0.5, 0.5);
    }

    const double dist = std::hypot(l.x, l.y);
    l.logit = std::min(0.0, cfg.base_logit - cfg.beta * dist +
                                cfg.noise_sd * rng.normal());
    const double q = std::exp(l.logit);

    // Metadata correlated with booking probability: bookable listings skew
    // cheaper, better reviewed and slightly better rated.
    const double price_noise = rng.normal();
    double price = 150.0 * (1.0 - 0.45 * q) * std::exp(0.25 * price_noise);
    price = std::max(10.0, std::round(price * 100.0) / 100.0);

    const double review_noise = rng.normal();
    const long long reviews =
        std::max(0LL, std::llround(260.0 * q + 60.0 * review_noise));

    const double rating_noise = rng.normal();
    const double rating = clamp(3.2 + 1.5 * q + 0.25 * rating_noise, 0.5, 5.0);

    // Quantize to the file format's precision so a written inventory reads
    // back as exactly the generated one.
    l.x = quantize9(l.x);
    l.y = quantize9(l.y);
    l.logit = quantize9(l.logit);
    l.price = quantize9(price);
    l.reviews = static_cast<int>(reviews);
    l.rating = quantize9(rating);
    out.push_back(std::move(l));
  }
  return out;
}

SessionOutcome simulate_session(const DisplaySet& display, const UserModel& user,
                                std::uint64_t seed) {
  if (!(user.click_propensity > 0.0) || !(user.click_propensity <= 1.0)) {
    throw std::invalid_argument("click_propensity must be in (0, 1]");
  }
  const std::vector<double> w = attention_weights(display, user.attention);
  const std::size_t n = w.size();
  double total = 0.0;
  for (double v : w) total += v;

  SplitMix64 rng(seed);
  SessionOutcome out;
  out.displayed.reserve(n);
  for (const DisplayItem& item : display.items) {
    out.displayed.push_back(item.listing.id);
  }

  // Single examination: one item drawn from the normalized attention
  // distribution, booked with its own probability. The booking marginal of
  // a session is therefore exactly expected_booking(display, attention).
  std::optional<std::size_t> attended;
  if (total > 0.0) {
    const double u = rng.uniform01() * total;
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      acc += w[i];
      if (u < acc) {
        attended = i;
        break;
      }
    }
    if (!attended) {  // u landed on the rounded-off top edge
      for (std::size_t i = n; i-- > 0;) {
        if (w[i] > 0.0) {
          attended = i;
          break;
        }
      }
    }
  }

  std::optional<std::size_t> booked_idx;
  if (attended) {
    const double p = booking_probability(display.items[*attended].listing.logit);
    if (rng.uniform01() < p) booked_idx = attended;
  }

  // Independent clicks, decoupled from the booking draw.
  std::vector<char> clicked(n, 0);
  int total_clicks = 0;
  if (total > 0.0) {
    for (std::size_t i = 0; i < n; ++i) {
      const double pc = std::min(
          1.0, user.click_propensity * (w[i] / total) * static_cast<double>(n));
      if (rng.uniform01() < pc) {
        clicked[i] = 1;
        ++total_clicks;
      }
    }
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  if (user.exam_order == ExamOrder::by_attention_desc) {
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      if (w[a] != w[b]) return w[a] > w[b];
      return display.items[a].listing.id < display.items[b].listing.id;
    });
  }

  int impressions = 0;
  int clicks_seen = 0;
  bool found = false;
  for (std::size_t pos = 0; pos < n; ++pos) {
    const std::size_t i = order[pos];
    if (booked_idx && i == *booked_idx) {
      found = true;
      break;
    }
    ++impressions;
    if (clicked[i]) ++clicks_seen;
  }
  for (std::size_t pos = 0; pos < n; ++pos) {
    const std::size_t i = order[pos];
    if (clicked[i]) out.clicked.push_back(display.items[i].listing.id);
  }
  if (found) {
    out.booked = display.items[*booked_idx].listing.id;
    out.impressions_before_booking = impressions;
    out.clicks_before_booking = clicks_seen;
  } else {
    out.impressions_before_booking = static_cast<int>(n);
    out.clicks_before_booking = total_clicks;
  }
  return out;
}

std::vector<ClickRecord> session_click_records(const DisplaySet& display,
                                               const SessionOutcome& outcome,
                                               const std::string& query_id) {
  const Point center = display.center.value_or(Point{0.0, 0.0});
  std::unordered_set<std::string> clicked(outcome.clicked.begin(),
                                          outcome.clicked.end());

  struct Visible {
    std::size_t index;
    double dx, dy, dist;
  };
  std::vector<Visible> visible;
  for (std::size_t i = 0; i < display.items.size(); ++i) {
    const DisplayItem& item = display.items[i];
    if (item.tier == PinTier::none) continue;  // not rendered on the map
    const double dx = item.listing.x - center.x;
    const double dy = item.listing.y - center.y;
    if (std::abs(dx) > 0.5 || std::abs(dy) > 0.5) continue;  // off-viewport
    visible.push_back({i, dx, dy, std::hypot(dx, dy)});
  }

  std::vector<std::size_t> by_dist(visible.size());
  std::iota(by_dist.begin(), by_dist.end(), std::size_t{0});
  std::sort(by_dist.begin(), by_dist.end(), [&](std::size_t a, std::size_t b) {
    if (visible[a].dist != visible[b].dist) return visible[a].dist < visible[b].dist;
    return display.items[visible[a].index].listing.id <
           display.items[visible[b].index].listing.id;
  });
  std::vector<int> dist_rank(visible.size(), 0);
  for (std::size_t r = 0; r < by_dist.size(); ++r) {
    dist_rank[by_dist[r]] = static_cast<int>(r) + 1;
  }

  std::vector<ClickRecord> records;
  records.reserve(visible.size());
  for (std::size_t v = 0; v < visible.size(); ++v) {
    const DisplayItem& item = display.items[visible[v].index];
    ClickRecord rec;
    rec.query_id = query_id;
    rec.dx = visible[v].dx;
    rec.dy = visible[v].dy;
    rec.clicked = clicked.count(item.listing.id) > 0;
    rec.tier = item.tier == PinTier::mini ? ClickTier::mini : ClickTier::regular;
    // Fall back to the display position when the producing rank is unknown.
    rec.rank = item.search_rank >= 1 ? item.search_rank
                                     : static_cast<int>(visible[v].index) + 1;
    rec.distance_rank = dist_rank[v];
    records.push_back(std::move(rec));
  }
  return records;
}

ExperimentName parse_experiment_name(const std::string& name) {
  if (name == "shuffle_map") return ExperimentName::shuffle_map;
  if (name == "shuffle_list") return ExperimentName::shuffle_list;
  if (name == "alpha_sweep") return ExperimentName::alpha_sweep;
  if (name == "urgency_3arm") return ExperimentName::urgency_3arm;
  if (name == "minipin") return ExperimentName::minipin;
  if (name == "center_opt") return ExperimentName::center_opt;
  throw UnknownExperimentError("unknown experiment: " + name);
}

std::string to_string(ExperimentName name) {
  switch (name) {
    case ExperimentName::shuffle_map: return "shuffle_map";
    case ExperimentName::shuffle_list: return "shuffle_list";
    case ExperimentName::alpha_sweep: return "alpha_sweep";
    case ExperimentName::urgency_3arm: return "urgency_3arm";
    case ExperimentName::minipin: return "minipin";
    case ExperimentName::center_opt: return "center_opt";
  }
  throw std::logic_error("unreachable experiment name");
}

namespace {

// One reduced session; rows are written into a preallocated slot per
// session index so the parallel fill is race-free and the later sequential
// reduction is independent of the worker count.
struct SessionRow {
  std::uint8_t booked = 0;
  std::uint8_t any_price = 0;
  std::uint8_t any_reviews = 0;
  std::int32_t impressions_before = 0;
  std::int32_t clicks_before = 0;
  std::int32_t distinct_clicks = 0;
  std::int32_t pins = 0;
  double ndcg_val = 0.0;
  double pin_prob_mean = 0.0;
  double price_mean = 0.0;
  double reviews_mean = 0.0;
};

struct ArmDef {
  std::string label;
  bool stochastic = false;
  DisplaySet display;                            // static arms
  std::function<DisplaySet(SplitMix64&)> build;  // stochastic arms
  double analytic = 0.0;
};

DisplaySet display_of(const std::vector<Listing>& ranked,
                      std::optional<Point> center = std::nullopt) {
  DisplaySet d;
  d.center = center;
  d.items.reserve(ranked.size());
  for (std::size_t i = 0; i < ranked.size(); ++i) {
    d.items.push_back({ranked[i], static_cast<int>(i) + 1, PinTier::regular});
  }
  return d;
}

double mean_probability(const std::vector<DisplayItem>& items) {
  double sum = 0.0;
  for (const DisplayItem& item : items) {
    sum += booking_probability(item.listing.logit);
  }
  return sum / static_cast<double>(items.size());
}

std::vector<ArmDef> build_arms(const ExperimentConfig& cfg,
                               const std::vector<Listing>& inventory,
                               const UserModel& user) {
  const std::vector<Listing> sorted = sort_by_logit(inventory);
  const int total_ranked = static_cast<int>(inventory.size());
  std::vector<Listing> top = sorted;
  if (static_cast<int>(top.size()) > cfg.max_pins) {
    top.resize(static_cast<std::size_t>(cfg.max_pins));
  }

  auto require = [&](bool ok, const char* what) {
    if (!ok) {
      throw std::invalid_argument(std::string("experiment ") +
                                  to_string(cfg.name) + " requires " + what);
    }
  };

  std::vector<ArmDef> arms;
  switch (cfg.name) {
    case ExperimentName::shuffle_map:
    case ExperimentName::shuffle_list: {
      if (cfg.name == ExperimentName::shuffle_map) {
        require(std::holds_alternative<MapUniform>(user.attention),
                "uniform map attention");
      } else {
        const auto* lp = std::get_if<ListPositional>(&user.attention);
        require(lp != nullptr, "positional list attention");
        require(lp->weights.size() >= top.size(),
                "positional weights covering the display");
      }
      ArmDef control;
      control.label = "control";
      control.display = display_of(top);
      control.analytic = expected_booking(control.display, user.attention);
      ArmDef treatment;
      treatment.label = "treatment";
      treatment.stochastic = true;
      DisplaySet base = control.display;
      treatment.build = [base](SplitMix64& rng) {
        DisplaySet d = base;
        rng.shuffle(d.items);
        return d;
      };
      // Positions are a uniformly random permutation, so the expectation is
      // the plain mean probability of the displayed set under any fixed
      // position-weight profile.
      treatment.analytic = mean_probability(base.items);
      arms.push_back(std::move(control));
      arms.push_back(std::move(treatment));
      break;
    }
    case ExperimentName::alpha_sweep: {
      require(std::holds_alternative<MapUniform>(user.attention),
              "uniform map attention");
      const double alphas[] = {std::numeric_limits<double>::infinity(), 1.0,
                               2.0, 4.0, 8.0};
      for (double a : alphas) {
        FilterConfig fc{a, cfg.anchor, cfg.max_pins};
        ArmDef arm;
        if (std::isinf(a)) {
          arm.label = "control";
        } else {
          arm.label = "alpha_" + std::to_string(static_cast<int>(a));
        }
        arm.display = bookability_filter(inventory, fc, total_ranked);
        arm.analytic = expected_booking(arm.display, user.attention);
        arms.push_back(std::move(arm));
      }
      break;
    }
    case ExperimentName::urgency_3arm: {
      require(std::holds_alternative<MapUniform>(user.attention),
              "uniform map attention");
      ArmDef control;
      control.label = "control";
      control.display = display_of(top);
      control.analytic = expected_booking(control.display, user.attention);

      ArmDef t1;
      t1.label = "t1_filtered";
      t1.display = bookability_filter(inventory,
                                      {cfg.alpha, cfg.anchor, cfg.max_pins},
                                      total_ranked);
      t1.analytic = expected_booking(t1.display, user.attention);
      const std::size_t m = t1.display.items.size();

      // T2 shows as many pins as T1 but picks them uniformly at random from
      // the control set, re-sampled every session.
      ArmDef t2;
      t2.label = "t2_random";
      t2.stochastic = true;
      const std::vector<Listing> pool = top;
      t2.build = [pool, m](SplitMix64& rng) {
        std::vector<std::size_t> idx(pool.size());
        std::iota(idx.begin(), idx.end(), std::size_t{0});
        rng.shuffle(idx);
        idx.resize(m);
        std::sort(idx.begin(), idx.end());  // keep the ranked display order
        DisplaySet d;
        d.items.reserve(m);
        for (std::size_t i : idx) {
          d.items.push_back({pool[i], static_cast<int>(i) + 1, PinTier::regular});
        }
        return d;
      };
      // A uniformly random subset has the pool's mean probability in
      // expectation, regardless of its size.
      t2.analytic = mean_probability(control.display.items);

      arms.push_back(std::move(control));
      arms.push_back(std::move(t1));
      arms.push_back(std::move(t2));
      break;
    }
    case ExperimentName::minipin: {
      require(std::holds_alternative<MapTiered>(user.attention),
              "tiered map attention");
      ArmDef control;
      control.label = "control";
      control.display = display_of(top);
      control.analytic = expected_booking(control.display, user.attention);
      ArmDef treatment;
      treatment.label = "treatment";
      treatment.display =
          assign_tiers(top, {cfg.alpha, cfg.anchor, cfg.max_pins}, total_ranked);
      treatment.analytic = expected_booking(treatment.display, user.attention);
      arms.push_back(std::move(control));
      arms.push_back(std::move(treatment));
      break;
    }
    case ExperimentName::center_opt: {
      const auto* mc = std::get_if<MapContinuous>(&user.attention);
      require(mc != nullptr && mc->surface != nullptr,
              "continuous map attention with a surface");
      std::vector<Listing> pins = sorted;
      if (static_cast<int>(pins.size()) > cfg.n_pins) {
        pins.resize(static_cast<std::size_t>(cfg.n_pins));
      }
      Point centroid{0.0, 0.0};
      for (const Listing& l : pins) {
        centroid.x += l.x;
        centroid.y += l.y;
      }
      centroid.x /= static_cast<double>(pins.size());
      centroid.y /= static_cast<double>(pins.size());

      ArmDef control;
      control.label = "control";
      control.display = display_of(pins, centroid);
      control.analytic = expected_booking(control.display, user.attention);

      PlacementConfig pc;
      pc.n_pins = cfg.n_pins;
      pc.epsilon = cfg.epsilon;
      pc.surface = mc->surface;
      const PlacementResult placed = optimize_center(inventory, pc);

      ArmDef treatment;
      treatment.label = "treatment";
      treatment.display = display_of(placed.pins, placed.center);
      treatment.analytic = expected_booking(treatment.display, user.attention);

      arms.push_back(std::move(control));
      arms.push_back(std::move(treatment));
      break;
    }
  }
  return arms;
}

SessionRow run_one_session(const ArmDef& arm, std::uint64_t arm_seed,
                           long long session, const UserModel& user,
                           const std::map<std::string, double>& relevance) {
  const std::uint64_t session_seed =
      derive_stream(arm_seed, static_cast<std::uint64_t>(session));
  DisplaySet scratch;
  const DisplaySet* disp = &arm.display;
  if (arm.stochastic) {
    SplitMix64 rng(derive_stream(session_seed, 1));
    scratch = arm.build(rng);
    disp = &scratch;
  }
  const SessionOutcome out =
      simulate_session(*disp, user, derive_stream(session_seed, 2));

  SessionRow row;
  row.booked = out.booked.has_value() ? 1 : 0;
  row.impressions_before = out.impressions_before_booking;
  row.clicks_before = out.clicks_before_booking;
  row.distinct_clicks = static_cast<std::int32_t>(out.clicked.size());

  int pins = 0;
  double prob_sum = 0.0;
  double price_sum = 0.0;
  int price_n = 0;
  double review_sum = 0.0;
  int review_n = 0;
  for (const DisplayItem& item : disp->items) {
    if (item.tier == PinTier::none) continue;
    ++pins;
    prob_sum += booking_probability(item.listing.logit);
    if (item.listing.price) {
      price_sum += *item.listing.price;
      ++price_n;
    }
    if (item.listing.reviews) {
      review_sum += *item.listing.reviews;
      ++review_n;
    }
  }
  row.pins = pins;
  row.pin_prob_mean = pins > 0 ? prob_sum / pins : 0.0;
  row.any_price = price_n > 0 ? 1 : 0;
  row.price_mean = price_n > 0 ? price_sum / price_n : 0.0;
  row.any_reviews = review_n > 0 ? 1 : 0;
  row.reviews_mean = review_n > 0 ? review_sum / review_n : 0.0;
  row.ndcg_val =
      ndcg(out.displayed, relevance, static_cast<int>(out.displayed.size()));
  return row;
}

}  // namespace

ExperimentReport run_experiment(const ExperimentConfig& cfg,
                                const std::vector<Listing>& inventory,
                                const UserModel& user) {
  if (cfg.sessions < 1) throw std::invalid_argument("sessions must be >= 1");
  if (cfg.threads < 1) throw std::invalid_argument("threads must be >= 1");
  if (inventory.empty()) throw std::invalid_argument("inventory is empty");

  const std::vector<ArmDef> arms = build_arms(cfg, inventory, user);

  std::map<std::string, double> relevance;
  for (const Listing& l : inventory) {
    relevance[l.id] = booking_probability(l.logit);
  }

  ExperimentReport report;
  report.experiment = to_string(cfg.name);
  report.seed = cfg.seed;
  report.sessions = cfg.sessions;

  for (std::size_t a = 0; a < arms.size(); ++a) {
    const ArmDef& arm = arms[a];
    const std::uint64_t arm_seed =
        derive_stream(cfg.seed, static_cast<std::uint64_t>(a));

    std::vector<SessionRow> rows(static_cast<std::size_t>(cfg.sessions));
    auto fill = [&](long long lo, long long hi) {
      for (long long s = lo; s < hi; ++s) {
        rows[static_cast<std::size_t>(s)] =
            run_one_session(arm, arm_seed, s, user, relevance);
      }
    };
    const int workers =
        static_cast<int>(std::min<long long>(cfg.threads, cfg.sessions));
    if (workers <= 1) {
      fill(0, cfg.sessions);
    } else {
      // Disjoint slices of the preallocated row vector; the reduction below
      // runs in session order, so results match the single-thread run
      // bit for bit.
      std::vector<std::thread> pool;
      pool.reserve(static_cast<std::size_t>(workers));
      const long long chunk = (cfg.sessions + workers - 1) / workers;
      for (int t = 0; t < workers; ++t) {
        const long long lo = static_cast<long long>(t) * chunk;
        const long long hi = std::min(cfg.sessions, lo + chunk);
        if (lo >= hi) break;
        pool.emplace_back(fill, lo, hi);
      }
      for (std::thread& t : pool) t.join();
    }

    ArmStats stats;
    stats.arm = arm.label;
    stats.seed = arm_seed;
    stats.sessions = cfg.sessions;
    stats.analytic_expected = arm.analytic;

    long long bookings = 0;
    long long impressions_sum = 0;
    long long clicks_sum = 0;
    double ndcg_sum = 0.0;
    double pins_sum = 0.0;
    double prob_sum = 0.0;
    double price_sum = 0.0;
    long long price_n = 0;
    double review_sum = 0.0;
    long long review_n = 0;
    std::vector<std::int32_t> distinct;
    distinct.reserve(rows.size());
    for (const SessionRow& row : rows) {
      bookings += row.booked;
      if (row.booked) {
        impressions_sum += row.impressions_before;
        clicks_sum += row.clicks_before;
      }
      ndcg_sum += row.ndcg_val;
      pins_sum += row.pins;
      prob_sum += row.pin_prob_mean;
      if (row.any_price) {
        price_sum += row.price_mean;
        ++price_n;
      }
      if (row.any_reviews) {
        review_sum += row.reviews_mean;
        ++review_n;
      }
      distinct.push_back(row.distinct_clicks);
    }
    const double n = static_cast<double>(cfg.sessions);
    stats.bookings = bookings;
    stats.booking_rate = static_cast<double>(bookings) / n;
    const double half =
        1.96 * std::sqrt(stats.booking_rate * (1.0 - stats.booking_rate) / n);
    stats.ci_low = std::max(0.0, stats.booking_rate - half);
    stats.ci_high = std::min(1.0, stats.booking_rate + half);
    stats.ndcg = ndcg_sum / n;
    stats.pins_mean = pins_sum / n;
    stats.avg_pin_prob = prob_sum / n;
    stats.impressions_to_discovery =
        bookings > 0 ? static_cast<double>(impressions_sum) /
                           static_cast<double>(bookings)
                     : 0.0;
    stats.clicks_to_discovery =
        bookings > 0
            ? static_cast<double>(clicks_sum) / static_cast<double>(bookings)
            : 0.0;
    stats.avg_price = price_n > 0 ? price_sum / static_cast<double>(price_n) : 0.0;
    stats.avg_reviews =
        review_n > 0 ? review_sum / static_cast<double>(review_n) : 0.0;

    std::sort(distinct.begin(), distinct.end());
    // Nearest-rank 95th percentile: the ceil(0.95 * n)-th smallest value.
    const std::size_t pos =
        (static_cast<std::size_t>(cfg.sessions) * 19 + 19) / 20;
    stats.p95_distinct_clicks = distinct[pos - 1];

    report.arms.push_back(std::move(stats));
  }
  return report;
}

}  // namespace maprank
