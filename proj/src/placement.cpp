#include "maprank/placement.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace maprank {

double placement_objective(const std::vector<Listing>& pins, Point center,
                           const AttentionSurface& surface) {
  if (pins.empty()) throw std::invalid_argument("placement objective needs pins");
  double sum = 0.0;
  for (const Listing& l : pins) {
    sum += relative_attention(surface, l.x - center.x, l.y - center.y) *
           booking_probability(l.logit);
  }
  return sum;
}

namespace {

// Number of half-open grid candidates lo + k * eps < hi; a zero-width axis
// still contributes its single boundary value.
long long axis_candidates(double lo, double hi, double eps) {
  if (!(hi > lo)) return 1;
  long long c = static_cast<long long>(std::ceil((hi - lo) / eps));
  if (c < 1) c = 1;
  // Guard the count against floating-point edge effects at the boundary.
  while (lo + static_cast<double>(c) * eps < hi) ++c;
  while (c > 1 && !(lo + static_cast<double>(c - 1) * eps < hi)) --c;
  return c;
}

}  // namespace

PlacementResult optimize_center(const std::vector<Listing>& listings,
                                const PlacementConfig& cfg) {
  if (cfg.n_pins < 1) throw std::invalid_argument("n_pins must be >= 1");
  if (!(cfg.epsilon > 0.0) || !std::isfinite(cfg.epsilon)) {
    throw std::invalid_argument("epsilon must be a positive finite step");
  }
  if (!cfg.surface) throw std::invalid_argument("placement needs a surface");

  // Freeze the pin set first; the search only ever moves the center.
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
  const double diagonal = std::hypot(x_max - x_min, y_max - y_min);
  if (diagonal > 0.0 && !(cfg.epsilon < diagonal)) {
    throw std::invalid_argument(
        "epsilon must be smaller than the pin bounding-box diagonal");
  }

  const long long cx = axis_candidates(x_min, x_max, cfg.epsilon);
  const long long cy = axis_candidates(y_min, y_max, cfg.epsilon);

  double best = -std::numeric_limits<double>::infinity();
  Point best_center{x_min, y_min};
  for (long long kx = 0; kx < cx; ++kx) {
    const double x = x_min + static_cast<double>(kx) * cfg.epsilon;
    for (long long ky = 0; ky < cy; ++ky) {
      const double y = y_min + static_cast<double>(ky) * cfg.epsilon;
      const double obj = placement_objective(pins, {x, y}, *cfg.surface);
      // Strictly greater only: the first candidate reaching the maximum in
      // scan order (x outer, y inner) is the one returned.
      if (obj > best) {
        best = obj;
        best_center = {x, y};
      }
    }
  }

  // The grid can step over the narrow plateau the naive centroid sits on,
  // so the centroid is checked last and wins only when strictly better.
  double mean_x = 0.0, mean_y = 0.0;
  for (const Listing& l : pins) {
    mean_x += l.x;
    mean_y += l.y;
  }
  mean_x /= static_cast<double>(pins.size());
  mean_y /= static_cast<double>(pins.size());
  const double centroid_obj =
      placement_objective(pins, {mean_x, mean_y}, *cfg.surface);
  if (centroid_obj > best) {
    best = centroid_obj;
    best_center = {mean_x, mean_y};
  }
  return {std::move(pins), best_center, best};
}

}  // namespace maprank
