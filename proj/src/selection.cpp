#include "maprank/selection.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace maprank {

AnchorStrategy AnchorStrategy::adaptive(std::vector<AdaptiveStep> table,
                                        int overflow_rank) {
  AnchorStrategy s;
  s.kind = Kind::adaptive_rank;
  s.table = std::move(table);
  s.overflow_rank = overflow_rank;
  int prev_total = 0;
  int prev_rank = 1;
  for (const AdaptiveStep& step : s.table) {
    if (step.max_total <= prev_total) {
      throw std::invalid_argument("adaptive table totals must be strictly increasing");
    }
    if (step.rank < prev_rank) {
      throw std::invalid_argument("adaptive table ranks must be non-decreasing");
    }
    prev_total = step.max_total;
    prev_rank = step.rank;
  }
  if (overflow_rank < prev_rank) {
    throw std::invalid_argument("overflow rank must not undercut the table");
  }
  return s;
}

AnchorStrategy AnchorStrategy::adaptive_default() {
  return adaptive({{30, 1}, {100, 2}, {300, 3}}, 4);
}

namespace {

void check_sorted_desc(const std::vector<double>& logits) {
  if (logits.empty()) {
    throw std::invalid_argument("anchor needs a non-empty logit list");
  }
  for (std::size_t i = 1; i < logits.size(); ++i) {
    if (logits[i] > logits[i - 1]) {
      throw std::invalid_argument("logits must be sorted descending");
    }
  }
}

int adaptive_anchor_rank(const AnchorStrategy& s, int total_ranked) {
  if (total_ranked < 1) {
    throw std::invalid_argument("total_ranked must be >= 1");
  }
  for (const AdaptiveStep& step : s.table) {
    if (total_ranked <= step.max_total) return step.rank;
  }
  return s.overflow_rank;
}

}  // namespace

double anchor_logit(const std::vector<double>& sorted_logits,
                    const AnchorStrategy& strategy, int total_ranked) {
  check_sorted_desc(sorted_logits);
  switch (strategy.kind) {
    case AnchorStrategy::Kind::topmost:
      return sorted_logits.front();
    case AnchorStrategy::Kind::median_top3: {
      const std::size_t m = std::min<std::size_t>(3, sorted_logits.size());
      if (m == 1) return sorted_logits[0];
      if (m == 2) return 0.5 * (sorted_logits[0] + sorted_logits[1]);
      return sorted_logits[1];  // median of three sorted values
    }
    case AnchorStrategy::Kind::adaptive_rank: {
      int rank = adaptive_anchor_rank(strategy, total_ranked);
      rank = std::min(rank, static_cast<int>(sorted_logits.size()));
      return sorted_logits[static_cast<std::size_t>(rank - 1)];
    }
  }
  throw std::logic_error("unreachable anchor kind");
}

namespace {

void check_filter_config(const FilterConfig& cfg) {
  if (std::isnan(cfg.alpha) || !(cfg.alpha > 0.0)) {
    throw std::invalid_argument("alpha must be > 0 (infinity disables the filter)");
  }
  if (cfg.max_pins < 1) throw std::invalid_argument("max_pins must be >= 1");
}

}  // namespace

DisplaySet bookability_filter(const std::vector<Listing>& listings,
                              const FilterConfig& cfg, int total_ranked) {
  check_filter_config(cfg);
  std::vector<Listing> sorted = sort_by_logit(listings);
  if (static_cast<int>(sorted.size()) > cfg.max_pins) {
    sorted.resize(static_cast<std::size_t>(cfg.max_pins));
  }
  std::vector<double> logits;
  logits.reserve(sorted.size());
  for (const Listing& l : sorted) logits.push_back(l.logit);
  const double anchor = anchor_logit(logits, cfg.anchor, total_ranked);

  DisplaySet out;
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    // Admit when the candidate's booking probability is within a factor
    // e^alpha of the anchor's, i.e. anchor - logit < alpha (strict).
    if (anchor - sorted[i].logit < cfg.alpha) {
      out.items.push_back({sorted[i], static_cast<int>(i) + 1, PinTier::regular});
    }
  }
  return out;
}

DisplaySet bookability_filter(const std::vector<Listing>& listings,
                              const FilterConfig& cfg) {
  return bookability_filter(listings, cfg, static_cast<int>(listings.size()));
}

DisplaySet assign_tiers(const std::vector<Listing>& ranked_listings,
                        const FilterConfig& cfg, int total_ranked) {
  check_filter_config(cfg);
  if (ranked_listings.empty()) {
    throw std::invalid_argument("cannot assign tiers to an empty list");
  }
  std::vector<double> logits;
  logits.reserve(ranked_listings.size());
  for (const Listing& l : ranked_listings) logits.push_back(l.logit);
  for (std::size_t i = 1; i < logits.size(); ++i) {
    if (logits[i] > logits[i - 1]) {
      throw std::invalid_argument("assign_tiers expects a list ranked by logit");
    }
  }
  const int total =
      total_ranked > 0 ? total_ranked : static_cast<int>(ranked_listings.size());
  const double anchor = anchor_logit(logits, cfg.anchor, total);

  DisplaySet out;
  for (std::size_t i = 0; i < ranked_listings.size(); ++i) {
    const bool pass = anchor - logits[i] < cfg.alpha;
    out.items.push_back({ranked_listings[i], static_cast<int>(i) + 1,
                         pass ? PinTier::regular : PinTier::mini});
  }
  return out;
}

}  // namespace maprank
