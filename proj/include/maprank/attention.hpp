#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace maprank {

enum class ClickTier { regular, mini };

// One displayed map pin from a logged query, with its click outcome.
// Offsets are measured from the map center in normalized viewport units,
// so the visible viewport is [-0.5, 0.5] on both axes.
struct ClickRecord {
  std::string query_id;
  double dx = 0.0;
  double dy = 0.0;
  bool clicked = false;
  ClickTier tier = ClickTier::regular;
  int rank = 1;           // search rank of the listing behind the pin
  int distance_rank = 1;  // rank of the pin by distance from the map center
};

// Thrown when the center cell of a surface cannot be estimated from data.
// A surface whose ctr(0,0) is unknown or zero cannot be normalized, so this
// is a hard error rather than a fallback.
struct SurfaceCenterError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Nearest-cell index for a viewport offset on a `resolution` x `resolution`
// grid over [-0.5, 0.5]. Returns false when the offset is outside the grid.
bool surface_cell_index(int resolution, double dx, double dy, int& ix, int& iy);

// Click-through rate as a function of pin offset from the map center,
// tabulated on a square grid over the unit viewport. Resolution is odd so
// the grid has a true center cell at offset (0, 0). Cells are stored
// row-major: index = iy * resolution + ix, with ix along dx and iy along dy.
class AttentionSurface {
 public:
  AttentionSurface(int resolution, std::vector<double> ctr,
                   std::vector<std::int64_t> impressions);

  int resolution() const { return resolution_; }
  double ctr_at(int ix, int iy) const { return ctr_[idx(ix, iy)]; }
  std::int64_t impressions_at(int ix, int iy) const {
    return impressions_[idx(ix, iy)];
  }
  double center_ctr() const {
    return ctr_at(resolution_ / 2, resolution_ / 2);
  }

  bool cell_index(double dx, double dy, int& ix, int& iy) const {
    return surface_cell_index(resolution_, dx, dy, ix, iy);
  }

  // Center coordinate of cell `i` along either axis.
  double cell_coord(int i) const {
    return -0.5 + (static_cast<double>(i) + 0.5) / resolution_;
  }

  const std::vector<double>& ctr() const { return ctr_; }
  const std::vector<std::int64_t>& impressions() const { return impressions_; }

 private:
  std::size_t idx(int ix, int iy) const {
    return static_cast<std::size_t>(iy) * static_cast<std::size_t>(resolution_) +
           static_cast<std::size_t>(ix);
  }

  int resolution_;
  std::vector<double> ctr_;
  std::vector<std::int64_t> impressions_;
};

struct SurfaceDiagnostics {
  int fallback_cells = 0;   // ctr filled from the mean of covered neighbors
  int uncovered_cells = 0;  // no covered neighbor either; ctr pinned to 0
};

// Streaming accumulator of per-cell click/impression counts. Partitions of a
// log can be accumulated independently and merged; counts are additive, so
// the merged result is identical to a single-pass fold over the whole log.
class SurfaceAccumulator {
 public:
  explicit SurfaceAccumulator(int resolution);

  void add(const ClickRecord& rec);
  void merge(const SurfaceAccumulator& other);

  // Cells with at least `min_impressions` impressions are estimated directly
  // as clicks/impressions. A sparse cell takes the mean ctr of its directly
  // estimated 8-neighbors; with no such neighbor it is pinned to 0 and
  // counted as uncovered. Fallback never cascades: only directly estimated
  // cells feed neighbor means. Throws SurfaceCenterError when the center
  // cell is not directly estimated or its ctr is 0.
  AttentionSurface finalize(std::int64_t min_impressions,
                            SurfaceDiagnostics* diag = nullptr) const;

  int resolution() const { return resolution_; }

 private:
  int resolution_;
  std::vector<std::int64_t> clicks_;
  std::vector<std::int64_t> impressions_;
};

// Single-pass estimation over a full log; see SurfaceAccumulator::finalize.
AttentionSurface estimate_surface(const std::vector<ClickRecord>& logs,
                                  int resolution, std::int64_t min_impressions,
                                  SurfaceDiagnostics* diag = nullptr);

// Attention at an offset relative to attention at the center:
// ctr(dx, dy) / ctr(0, 0) via nearest-cell lookup. Offsets outside the
// grid have zero attention. By construction relative_attention(0,0) == 1.
double relative_attention(const AttentionSurface& surface, double dx, double dy);

// Synthetic ground-truth surface: an isotropic Gaussian ctr bump of height
// `peak_ctr` and width `decay_scale`, optionally shifted horizontally, and
// sampled at cell centers. Cells carry a large impression count sentinel.
AttentionSurface synthetic_radial_surface(double peak_ctr, double decay_scale,
                                          double horizontal_shift,
                                          int resolution);

enum class RankKey { search_rank, distance_rank };

struct RankCtrPoint {
  int rank = 0;
  double ctr = 0.0;
  double normalized = 0.0;  // ctr divided by the ctr of the lowest seen rank
};

// Per-rank click-through curve. Ranks with zero impressions are omitted;
// the remaining points are normalized by the lowest present rank's ctr.
std::vector<RankCtrPoint> ctr_by_rank_curve(const std::vector<ClickRecord>& logs,
                                            RankKey key);

// Maps an average pin rank onto the same scale as a click-through ratio:
// log(2) / log(2 + avg_rank), which is 1 at rank 0 and decays like an
// inverse-log position curve.
double rank_distance_transform(double avg_rank);

struct DistanceRankPoint {
  double distance = 0.0;  // bin center, radial distance from the map center
  double avg_rank = 0.0;  // mean search rank of pins displayed in the bin
  double transform = 0.0; // rank_distance_transform(avg_rank)
};

// Profile of average search rank against radial distance from the center,
// over `bins` equal-width bins spanning [0, max displayed distance].
// Empty bins are omitted.
std::vector<DistanceRankPoint> rank_distance_profile(
    const std::vector<ClickRecord>& logs, int bins);

}  // namespace maprank
