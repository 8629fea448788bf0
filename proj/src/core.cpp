#include "maprank/core.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>

namespace maprank {

double booking_probability(double logit) {
  if (!(logit <= 0.0)) {  // also rejects NaN
    throw std::domain_error("logit must be <= 0 (log of a probability)");
  }
  return std::exp(logit);
}

namespace {

void check_unique_ids(const std::vector<Listing>& listings) {
  std::set<std::string> seen;
  for (const Listing& l : listings) {
    if (l.id.empty()) throw std::invalid_argument("listing id must be non-empty");
    if (!seen.insert(l.id).second) {
      throw std::invalid_argument("duplicate listing id: " + l.id);
    }
  }
}

bool logit_order(const Listing& a, const Listing& b) {
  if (a.logit != b.logit) return a.logit > b.logit;
  return a.id < b.id;
}

}  // namespace

RankedResult rank_by_logit(const std::vector<Listing>& listings) {
  std::vector<Listing> sorted = sort_by_logit(listings);
  RankedResult out;
  out.ids.reserve(sorted.size());
  out.logits.reserve(sorted.size());
  for (const Listing& l : sorted) {
    out.ids.push_back(l.id);
    out.logits.push_back(l.logit);
  }
  return out;
}

std::vector<Listing> sort_by_logit(std::vector<Listing> listings) {
  if (listings.empty()) {
    throw std::invalid_argument("cannot rank an empty listing set");
  }
  check_unique_ids(listings);
  for (const Listing& l : listings) {
    if (!(l.logit <= 0.0)) {
      throw std::domain_error("listing " + l.id + " has logit > 0");
    }
  }
  std::sort(listings.begin(), listings.end(), logit_order);
  return listings;
}

std::vector<double> attention_weights(const DisplaySet& display,
                                      const AttentionModel& attn,
                                      EvalDiagnostics* diag) {
  const std::size_t n = display.items.size();
  if (n == 0) throw std::invalid_argument("display set is empty");
  std::vector<double> w(n, 0.0);

  if (const auto* lp = std::get_if<ListPositional>(&attn)) {
    if (lp->weights.empty()) {
      throw std::invalid_argument("positional weights must be non-empty");
    }
    for (std::size_t i = 0; i < lp->weights.size(); ++i) {
      if (!(lp->weights[i] > 0.0)) {
        throw std::invalid_argument("positional weights must be strictly positive");
      }
      if (i > 0 && lp->weights[i] > lp->weights[i - 1]) {
        throw std::invalid_argument("positional weights must be non-increasing");
      }
    }
    if (lp->weights.size() < n) {
      throw std::invalid_argument("display has more slots than positional weights");
    }
    for (std::size_t i = 0; i < n; ++i) w[i] = lp->weights[i];
  } else if (std::holds_alternative<MapUniform>(attn)) {
    std::fill(w.begin(), w.end(), 1.0);
  } else if (const auto* mt = std::get_if<MapTiered>(&attn)) {
    if (!(mt->regular >= 0.0) || !(mt->mini >= 0.0) || !(mt->hidden >= 0.0)) {
      throw std::invalid_argument("tier weights must be >= 0");
    }
    for (std::size_t i = 0; i < n; ++i) {
      switch (display.items[i].tier) {
        case PinTier::regular: w[i] = mt->regular; break;
        case PinTier::mini: w[i] = mt->mini; break;
        case PinTier::none: w[i] = mt->hidden; break;
      }
    }
  } else {
    const auto& mc = std::get<MapContinuous>(attn);
    if (!mc.surface) {
      throw std::invalid_argument("continuous attention model has no surface");
    }
    const Point center = display.center.value_or(mc.center);
    for (std::size_t i = 0; i < n; ++i) {
      const Listing& l = display.items[i].listing;
      int ix = 0, iy = 0;
      if (!mc.surface->cell_index(l.x - center.x, l.y - center.y, ix, iy)) {
        // Off-surface pins draw no attention; surface it in the diagnostics
        // rather than failing the whole evaluation.
        w[i] = 0.0;
        if (diag) ++diag->zero_attention_items;
        continue;
      }
      w[i] = mc.surface->ctr_at(ix, iy) / mc.surface->center_ctr();
    }
  }
  return w;
}

double expected_booking(const DisplaySet& display, const AttentionModel& attn,
                        EvalDiagnostics* diag) {
  const std::vector<double> w = attention_weights(display, attn, diag);
  double total = 0.0;
  for (double v : w) total += v;
  if (!(total > 0.0)) return 0.0;
  double sum = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) {
    sum += (w[i] / total) * booking_probability(display.items[i].listing.logit);
  }
  return sum;
}

double ndcg(const std::vector<std::string>& ranked_ids,
            const std::map<std::string, double>& relevance, int k) {
  if (k < 1) throw std::invalid_argument("ndcg cutoff must be >= 1");
  if (ranked_ids.empty()) throw std::invalid_argument("ndcg needs a non-empty ranking");
  std::vector<double> rels;
  rels.reserve(ranked_ids.size());
  for (const std::string& id : ranked_ids) {
    auto it = relevance.find(id);
    if (it == relevance.end()) {
      throw std::invalid_argument("missing relevance for id: " + id);
    }
    if (!(it->second >= 0.0)) {
      throw std::invalid_argument("relevance must be >= 0 for id: " + id);
    }
    rels.push_back(it->second);
  }
  const std::size_t kk = std::min(static_cast<std::size_t>(k), rels.size());
  double dcg = 0.0;
  for (std::size_t i = 0; i < kk; ++i) {
    dcg += rels[i] / std::log2(static_cast<double>(i) + 2.0);
  }
  std::vector<double> ideal = rels;
  std::sort(ideal.begin(), ideal.end(), std::greater<double>());
  double idcg = 0.0;
  for (std::size_t i = 0; i < kk; ++i) {
    idcg += ideal[i] / std::log2(static_cast<double>(i) + 2.0);
  }
  if (idcg == 0.0) return 1.0;  // nothing relevant: every order is ideal
  return dcg / idcg;
}

}  // namespace maprank
