#include "maprank/attention.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

namespace maprank {

namespace {

void check_resolution(int resolution) {
  if (resolution < 1 || resolution % 2 == 0) {
    throw std::invalid_argument("surface resolution must be odd and >= 1");
  }
}

}  // namespace

bool surface_cell_index(int resolution, double dx, double dy, int& ix, int& iy) {
  if (!(std::abs(dx) <= 0.5) || !(std::abs(dy) <= 0.5)) return false;
  // Nearest cell of the uniform grid over [-0.5, 0.5]; the far boundary
  // belongs to the last cell.
  const double r = static_cast<double>(resolution);
  ix = static_cast<int>(std::floor((dx + 0.5) * r));
  iy = static_cast<int>(std::floor((dy + 0.5) * r));
  ix = std::min(ix, resolution - 1);
  iy = std::min(iy, resolution - 1);
  return true;
}

AttentionSurface::AttentionSurface(int resolution, std::vector<double> ctr,
                                   std::vector<std::int64_t> impressions)
    : resolution_(resolution), ctr_(std::move(ctr)),
      impressions_(std::move(impressions)) {
  check_resolution(resolution_);
  const std::size_t cells =
      static_cast<std::size_t>(resolution_) * static_cast<std::size_t>(resolution_);
  if (ctr_.size() != cells || impressions_.size() != cells) {
    throw std::invalid_argument("surface arrays must hold resolution^2 cells");
  }
  for (double v : ctr_) {
    if (!std::isfinite(v) || v < 0.0) {
      throw std::invalid_argument("surface ctr values must be finite and >= 0");
    }
  }
  for (std::int64_t n : impressions_) {
    if (n < 0) throw std::invalid_argument("surface impressions must be >= 0");
  }
  if (!(center_ctr() > 0.0)) {
    throw std::invalid_argument("surface center ctr must be > 0");
  }
}

SurfaceAccumulator::SurfaceAccumulator(int resolution) : resolution_(resolution) {
  check_resolution(resolution_);
  const std::size_t cells =
      static_cast<std::size_t>(resolution_) * static_cast<std::size_t>(resolution_);
  clicks_.assign(cells, 0);
  impressions_.assign(cells, 0);
}

void SurfaceAccumulator::add(const ClickRecord& rec) {
  int ix = 0, iy = 0;
  if (!surface_cell_index(resolution_, rec.dx, rec.dy, ix, iy)) {
    throw std::invalid_argument("click record offset outside the unit viewport");
  }
  const std::size_t i =
      static_cast<std::size_t>(iy) * static_cast<std::size_t>(resolution_) +
      static_cast<std::size_t>(ix);
  impressions_[i] += 1;
  if (rec.clicked) clicks_[i] += 1;
}

void SurfaceAccumulator::merge(const SurfaceAccumulator& other) {
  if (other.resolution_ != resolution_) {
    throw std::invalid_argument("cannot merge accumulators of different resolutions");
  }
  for (std::size_t i = 0; i < clicks_.size(); ++i) {
    clicks_[i] += other.clicks_[i];
    impressions_[i] += other.impressions_[i];
  }
}

AttentionSurface SurfaceAccumulator::finalize(std::int64_t min_impressions,
                                              SurfaceDiagnostics* diag) const {
  if (min_impressions < 1) {
    throw std::invalid_argument("min_impressions must be >= 1");
  }
  const int r = resolution_;
  const std::size_t cells = clicks_.size();
  std::vector<char> direct(cells, 0);
  std::vector<double> ctr(cells, 0.0);
  for (std::size_t i = 0; i < cells; ++i) {
    if (impressions_[i] >= min_impressions) {
      direct[i] = 1;
      ctr[i] = static_cast<double>(clicks_[i]) / static_cast<double>(impressions_[i]);
    }
  }

  SurfaceDiagnostics local;
  for (int iy = 0; iy < r; ++iy) {
    for (int ix = 0; ix < r; ++ix) {
      const std::size_t i =
          static_cast<std::size_t>(iy) * static_cast<std::size_t>(r) +
          static_cast<std::size_t>(ix);
      if (direct[i]) continue;
      double sum = 0.0;
      int count = 0;
      for (int ny = iy - 1; ny <= iy + 1; ++ny) {
        for (int nx = ix - 1; nx <= ix + 1; ++nx) {
          if (nx == ix && ny == iy) continue;
          if (nx < 0 || nx >= r || ny < 0 || ny >= r) continue;
          const std::size_t j =
              static_cast<std::size_t>(ny) * static_cast<std::size_t>(r) +
              static_cast<std::size_t>(nx);
          if (direct[j]) {  // only directly estimated cells feed the fallback
            sum += ctr[j];
            ++count;
          }
        }
      }
      if (count > 0) {
        ctr[i] = sum / count;
        ++local.fallback_cells;
      } else {
        ctr[i] = 0.0;
        ++local.uncovered_cells;
      }
    }
  }

  const int c = r / 2;
  const std::size_t ci =
      static_cast<std::size_t>(c) * static_cast<std::size_t>(r) +
      static_cast<std::size_t>(c);
  if (!direct[ci]) {
    throw SurfaceCenterError(
        "center cell has fewer than the minimum impressions; the surface "
        "cannot be normalized");
  }
  if (!(ctr[ci] > 0.0)) {
    throw SurfaceCenterError("center cell ctr is 0; the surface cannot be normalized");
  }

  if (diag) *diag = local;
  return AttentionSurface(r, std::move(ctr), impressions_);
}

AttentionSurface estimate_surface(const std::vector<ClickRecord>& logs,
                                  int resolution, std::int64_t min_impressions,
                                  SurfaceDiagnostics* diag) {
  SurfaceAccumulator acc(resolution);
  for (const ClickRecord& rec : logs) acc.add(rec);
  return acc.finalize(min_impressions, diag);
}

double relative_attention(const AttentionSurface& surface, double dx, double dy) {
  int ix = 0, iy = 0;
  if (!surface.cell_index(dx, dy, ix, iy)) return 0.0;
  return surface.ctr_at(ix, iy) / surface.center_ctr();
}

AttentionSurface synthetic_radial_surface(double peak_ctr, double decay_scale,
                                          double horizontal_shift,
                                          int resolution) {
  check_resolution(resolution);
  if (!(peak_ctr > 0.0) || peak_ctr > 1.0) {
    throw std::invalid_argument("peak_ctr must be in (0, 1]");
  }
  if (!(decay_scale > 0.0)) {
    throw std::invalid_argument("decay_scale must be > 0");
  }
  const std::size_t cells =
      static_cast<std::size_t>(resolution) * static_cast<std::size_t>(resolution);
  std::vector<double> ctr(cells, 0.0);
  std::vector<std::int64_t> impressions(cells, 1000000);
  const double inv = 1.0 / (2.0 * decay_scale * decay_scale);
  for (int iy = 0; iy < resolution; ++iy) {
    const double dy = -0.5 + (static_cast<double>(iy) + 0.5) / resolution;
    for (int ix = 0; ix < resolution; ++ix) {
      const double dx = -0.5 + (static_cast<double>(ix) + 0.5) / resolution;
      const double ddx = dx - horizontal_shift;
      ctr[static_cast<std::size_t>(iy) * resolution + ix] =
          peak_ctr * std::exp(-(ddx * ddx + dy * dy) * inv);
    }
  }
  return AttentionSurface(resolution, std::move(ctr), std::move(impressions));
}

std::vector<RankCtrPoint> ctr_by_rank_curve(const std::vector<ClickRecord>& logs,
                                            RankKey key) {
  std::map<int, std::pair<std::int64_t, std::int64_t>> counts;  // rank -> {clicks, imps}
  for (const ClickRecord& rec : logs) {
    const int rank = key == RankKey::search_rank ? rec.rank : rec.distance_rank;
    if (rank < 1) throw std::invalid_argument("ranks must be >= 1");
    auto& c = counts[rank];
    c.second += 1;
    if (rec.clicked) c.first += 1;
  }
  std::vector<RankCtrPoint> curve;
  curve.reserve(counts.size());
  double base = -1.0;
  for (const auto& [rank, c] : counts) {
    RankCtrPoint p;
    p.rank = rank;
    p.ctr = static_cast<double>(c.first) / static_cast<double>(c.second);
    if (base < 0.0) {
      base = p.ctr;  // lowest present rank normalizes the curve
      if (!(base > 0.0)) {
        throw std::runtime_error("cannot normalize curve: lowest rank has zero ctr");
      }
    }
    p.normalized = p.ctr / base;
    curve.push_back(p);
  }
  return curve;
}

double rank_distance_transform(double avg_rank) {
  if (!(avg_rank >= 0.0)) {
    throw std::invalid_argument("avg_rank must be >= 0");
  }
  return std::log(2.0) / std::log(2.0 + avg_rank);
}

std::vector<DistanceRankPoint> rank_distance_profile(
    const std::vector<ClickRecord>& logs, int bins) {
  if (bins < 1) throw std::invalid_argument("bins must be >= 1");
  if (logs.empty()) return {};
  double max_dist = 0.0;
  for (const ClickRecord& rec : logs) {
    max_dist = std::max(max_dist, std::hypot(rec.dx, rec.dy));
  }
  if (!(max_dist > 0.0)) max_dist = 1e-12;  // all pins at the center: one bin
  std::vector<double> rank_sum(static_cast<std::size_t>(bins), 0.0);
  std::vector<std::int64_t> n(static_cast<std::size_t>(bins), 0);
  for (const ClickRecord& rec : logs) {
    const double d = std::hypot(rec.dx, rec.dy);
    int b = static_cast<int>(std::floor(d / max_dist * bins));
    b = std::min(b, bins - 1);
    rank_sum[static_cast<std::size_t>(b)] += rec.rank;
    n[static_cast<std::size_t>(b)] += 1;
  }
  std::vector<DistanceRankPoint> profile;
  const double width = max_dist / bins;
  for (int b = 0; b < bins; ++b) {
    if (n[static_cast<std::size_t>(b)] == 0) continue;
    DistanceRankPoint p;
    p.distance = (static_cast<double>(b) + 0.5) * width;
    p.avg_rank = rank_sum[static_cast<std::size_t>(b)] /
                 static_cast<double>(n[static_cast<std::size_t>(b)]);
    p.transform = rank_distance_transform(p.avg_rank);
    profile.push_back(p);
  }
  return profile;
}

}  // namespace maprank
