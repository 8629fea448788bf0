#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "maprank/core.hpp"
#include "maprank/selection.hpp"

namespace maprank {

enum class SpatialDist { uniform, clustered };

// Synthetic inventory generator. Coordinates land in the unit viewport;
// logits decay with distance from the viewport center at rate `beta` plus
// Gaussian noise, clamped to <= 0. Price, review count and rating are
// correlated with booking probability (cheaper, more reviewed and slightly
// better rated listings book more). All floats are quantized to 9
// significant digits so written inventories round-trip exactly.
struct InventoryConfig {
  int n = 100;
  std::uint64_t seed = 0;
  SpatialDist spatial = SpatialDist::uniform;
  int clusters = 3;          // clustered only
  double spread = 0.08;      // clustered only: per-axis stddev around a cluster
  double base_logit = -1.0;  // logit at the viewport center before noise
  double beta = 0.0;         // distance decay of the logit
  double noise_sd = 0.7;
};

std::vector<Listing> generate_inventory(const InventoryConfig& cfg);

// Order in which a simulated user examines the display when counting
// impressions and clicks leading up to a booking.
enum class ExamOrder { by_rank, by_attention_desc };

struct UserModel {
  AttentionModel attention;
  // Scale of the independent click model, in (0, 1]: item i is clicked with
  // probability min(1, click_propensity * a_i * N) for normalized attention
  // a_i over N displayed items. Clicks do not influence the booking draw.
  double click_propensity = 0.2;
  ExamOrder exam_order = ExamOrder::by_attention_desc;
};

struct SessionOutcome {
  std::vector<std::string> displayed;  // display order
  std::vector<std::string> clicked;    // examination order
  std::optional<std::string> booked;
  // Items examined / clicks made strictly before the booked item in
  // examination order. Without a booking these cover the whole session.
  int impressions_before_booking = 0;
  int clicks_before_booking = 0;
};

// One user session: draw the single examined item from the normalized
// attention distribution, book it with probability exp(logit), then draw
// independent clicks per item. The booking marginal therefore equals
// expected_booking(display, user.attention) exactly. Deterministic in
// (display, user, seed).
SessionOutcome simulate_session(const DisplaySet& display,
                                const UserModel& user, std::uint64_t seed);

// Click-log rows for one session, offsets measured from the display's
// center (viewport center when unset). Hidden-tier items and pins falling
// outside the visible viewport produce no row.
std::vector<ClickRecord> session_click_records(const DisplaySet& display,
                                               const SessionOutcome& outcome,
                                               const std::string& query_id);

enum class ExperimentName {
  shuffle_map,
  shuffle_list,
  alpha_sweep,
  urgency_3arm,
  minipin,
  center_opt,
};

struct UnknownExperimentError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// Parses the CLI spelling of an experiment name; throws
// UnknownExperimentError for anything else.
ExperimentName parse_experiment_name(const std::string& name);
std::string to_string(ExperimentName name);

struct ExperimentConfig {
  ExperimentName name = ExperimentName::shuffle_map;
  long long sessions = 10000;
  std::uint64_t seed = 0;
  int threads = 1;  // worker count; never changes any result byte
  // selection arms
  double alpha = 1.0;
  AnchorStrategy anchor;
  int max_pins = 18;
  // center_opt arms
  int n_pins = 18;
  double epsilon = 0.05;
};

struct ArmStats {
  std::string arm;
  std::uint64_t seed = 0;  // derived arm seed, recorded for reproducibility
  long long sessions = 0;
  long long bookings = 0;
  double booking_rate = 0.0;
  double ci_low = 0.0;   // normal-approximation 95% interval, clamped to [0,1]
  double ci_high = 0.0;
  double analytic_expected = 0.0;  // closed-form expected bookings per session
  double ndcg = 0.0;               // mean per-session NDCG of the display order
  double pins_mean = 0.0;          // mean displayed (non-hidden) item count
  double avg_pin_prob = 0.0;       // mean over sessions of mean pin probability
  double impressions_to_discovery = 0.0;  // booked sessions only; 0 if none
  double clicks_to_discovery = 0.0;       // booked sessions only; 0 if none
  double avg_price = 0.0;    // mean displayed price (sessions with any price)
  double avg_reviews = 0.0;  // mean displayed review count
  int p95_distinct_clicks = 0;  // nearest-rank 95th percentile per session
};

struct ExperimentReport {
  std::string experiment;
  std::uint64_t seed = 0;
  long long sessions = 0;
  std::vector<ArmStats> arms;
};

// Runs one simulated experiment over a fixed inventory and user model.
// The user's attention kind must match the experiment (uniform map
// attention for shuffle_map / alpha_sweep / urgency_3arm, positional for
// shuffle_list, tiered for minipin, continuous for center_opt). Results are
// a pure function of (cfg, inventory, user); cfg.threads only splits the
// session loop across workers and never changes any reported value.
ExperimentReport run_experiment(const ExperimentConfig& cfg,
                                const std::vector<Listing>& inventory,
                                const UserModel& user);

}  // namespace maprank
