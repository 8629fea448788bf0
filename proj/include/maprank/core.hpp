#pragma once

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "maprank/attention.hpp"

namespace maprank {

struct Point {
  double x = 0.0;
  double y = 0.0;
};

// A search result. Coordinates are normalized viewport units with the
// origin at the viewport center. `logit` is the natural-log booking
// probability, so it is always <= 0 and exp(logit) is the probability.
struct Listing {
  std::string id;
  double x = 0.0;
  double y = 0.0;
  double logit = 0.0;
  std::optional<double> price;
  std::optional<int> reviews;
  std::optional<double> rating;
};

// exp(logit). Throws std::domain_error when logit > 0 (or is NaN), since a
// log-probability above 0 means the upstream model output is corrupt.
double booking_probability(double logit);

struct RankedResult {
  std::vector<std::string> ids;  // descending logit, ties by ascending id
  std::vector<double> logits;    // aligned with ids
};

// Rank by logit descending, breaking exact ties by ascending id so equal
// scores always come out in one reproducible order.
RankedResult rank_by_logit(const std::vector<Listing>& listings);

// Same ordering as rank_by_logit but returning the full listings.
std::vector<Listing> sort_by_logit(std::vector<Listing> listings);

// --- attention models ------------------------------------------------------
//
// An attention model resolves each displayed item to a non-negative weight.
// Weights are normalized to a distribution before use, i.e. the user
// examines exactly one item, drawn with probability proportional to weight.

// List UI: attention depends on display position only. weights[i] is the
// weight of position i+1; weights must be strictly positive and
// non-increasing, and at least as long as the display being evaluated.
struct ListPositional {
  std::vector<double> weights;
};

// Map UI with no position signal: every displayed pin is equally likely to
// be examined.
struct MapUniform {};

// Map UI with pin tiers. Defaults follow the measured tier ratio: a
// mini-pin draws 1/8 the attention of a regular pin, hidden items none.
struct MapTiered {
  double regular = 1.0;
  double mini = 0.125;
  double hidden = 0.0;
};

// Map UI with attention tabulated over the viewport: an item's weight is
// the surface's relative attention at its offset from the map center.
struct MapContinuous {
  std::shared_ptr<const AttentionSurface> surface;
  Point center;  // default center; a DisplaySet's own center overrides it
};

using AttentionModel =
    std::variant<ListPositional, MapUniform, MapTiered, MapContinuous>;

enum class PinTier { regular, mini, none };

struct DisplayItem {
  Listing listing;
  int search_rank = 0;  // 1-based rank in the producing ranking, 0 if unknown
  PinTier tier = PinTier::regular;
};

// What the user actually sees: items in display order (position i is slot
// i+1 for list UIs) plus, for maps, the viewport center the pins are drawn
// around. When `center` is empty, map models fall back to their own center.
struct DisplaySet {
  std::vector<DisplayItem> items;
  std::optional<Point> center;
};

struct EvalDiagnostics {
  int zero_attention_items = 0;  // items outside a surface's support
};

// Raw (un-normalized) attention weight per displayed item under a model.
// Throws std::invalid_argument for an empty display or a model that cannot
// resolve it (short weight vector, missing surface, invalid weights).
std::vector<double> attention_weights(const DisplaySet& display,
                                      const AttentionModel& attn,
                                      EvalDiagnostics* diag = nullptr);

// Expected bookings for one session: sum over items of normalized attention
// times booking probability. Returns 0 when every item has zero weight.
double expected_booking(const DisplaySet& display, const AttentionModel& attn,
                        EvalDiagnostics* diag = nullptr);

// NDCG@k with gain = relevance and discount 1/log2(rank+1). The ideal
// ordering sorts the given ids' relevances descending. All-zero relevance
// yields 1.0 (an empty ranking problem is solved perfectly by any order).
// Every ranked id must have a non-negative relevance entry.
double ndcg(const std::vector<std::string>& ranked_ids,
            const std::map<std::string, double>& relevance, int k);

}  // namespace maprank
