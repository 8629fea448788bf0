#pragma once

#include <memory>
#include <vector>

#include "maprank/attention.hpp"
#include "maprank/core.hpp"

namespace maprank {

struct PlacementConfig {
  int n_pins = 18;        // how many top listings become pins
  double epsilon = 0.05;  // candidate grid step, viewport units
  std::shared_ptr<const AttentionSurface> surface;
};

struct PlacementResult {
  std::vector<Listing> pins;  // the frozen pin set, logit descending
  Point center;               // chosen map center
  double objective = 0.0;     // objective at that center
};

// Placement objective: un-normalized expected bookings of `pins` drawn
// around `center`, i.e. sum over pins of relative attention at the pin's
// offset times its booking probability.
double placement_objective(const std::vector<Listing>& pins, Point center,
                           const AttentionSurface& surface);

// Greedy map-center search. The pin set is frozen first (top n_pins by
// logit, ties by id) and only the center moves. Candidates sweep the pin
// bounding box on a half-open grid [min, max) in steps of epsilon along
// each axis, x in the outer loop and y in the inner loop, each candidate
// computed as min + k * epsilon. A zero-width axis contributes its single
// boundary value. The first candidate attaining the maximum objective wins
// (ties never replace an earlier maximum). The pin centroid is evaluated
// last as a safety-net candidate that takes over only when strictly better
// than the whole grid, so the result never scores below the naive center.
// Cost is O(k^2 * n) for k grid steps per axis and n pins.
PlacementResult optimize_center(const std::vector<Listing>& listings,
                                const PlacementConfig& cfg);

}  // namespace maprank
