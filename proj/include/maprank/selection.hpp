#pragma once

#include <vector>

#include "maprank/core.hpp"

namespace maprank {

// One step of an adaptive anchor table: totals up to and including
// `max_total` use `rank`.
struct AdaptiveStep {
  int max_total = 0;
  int rank = 1;
};

// How the anchor booking probability of a result set is chosen. The anchor
// is the reference the relevance filter measures every candidate against.
struct AnchorStrategy {
  enum class Kind { topmost, median_top3, adaptive_rank };

  Kind kind = Kind::topmost;

  // adaptive_rank only: step table mapping the total number of listings
  // ranked to a 1-based anchor rank. max_total strictly increasing, rank
  // non-decreasing; totals beyond the last step use overflow_rank.
  std::vector<AdaptiveStep> table;
  int overflow_rank = 1;

  static AnchorStrategy topmost() { return {}; }
  static AnchorStrategy median_top3() {
    AnchorStrategy s;
    s.kind = Kind::median_top3;
    return s;
  }
  static AnchorStrategy adaptive(std::vector<AdaptiveStep> table,
                                 int overflow_rank);
  // Default step table: deeper result sets anchor further down the ranking.
  // <=30 -> rank 1, 31-100 -> 2, 101-300 -> 3, beyond -> 4.
  static AnchorStrategy adaptive_default();
};

// Anchor logit for a result list sorted by logit descending.
//   topmost      -> highest logit.
//   median_top3  -> median of the top min(3, n) logits; for three that is
//                   the second-highest, for two the midpoint, for one the
//                   logit itself.
//   adaptive_rank-> logit at the table's rank for `total_ranked`, clamped
//                   to the available depth.
double anchor_logit(const std::vector<double>& sorted_logits,
                    const AnchorStrategy& strategy, int total_ranked);

struct FilterConfig {
  // Admission margin in log-probability space. A candidate is kept iff
  // anchor_logit - logit < alpha, i.e. its booking probability is within a
  // factor e^alpha of the anchor's. +infinity disables filtering.
  double alpha = 1.0;
  AnchorStrategy anchor;
  int max_pins = 18;
};

// Rank the candidates, cap at max_pins, then drop everything whose booking
// probability falls more than a factor e^alpha below the anchor. The anchor
// is computed over the capped list; admitted items keep their rank order.
DisplaySet bookability_filter(const std::vector<Listing>& listings,
                              const FilterConfig& cfg, int total_ranked);

// Convenience overload: total_ranked = listings.size().
DisplaySet bookability_filter(const std::vector<Listing>& listings,
                              const FilterConfig& cfg);

// Tier assignment over an already ranked list (logit descending): items
// passing the filter condition become regular pins, the rest mini-pins.
// Nothing is dropped. total_ranked <= 0 means "use the list length".
DisplaySet assign_tiers(const std::vector<Listing>& ranked_listings,
                        const FilterConfig& cfg, int total_ranked = 0);

}  // namespace maprank
