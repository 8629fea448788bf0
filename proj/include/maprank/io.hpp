#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"
#include "maprank/attention.hpp"
#include "maprank/core.hpp"
#include "maprank/sim.hpp"

namespace maprank {

// Malformed input file; `line` is 1-based (0 when not line-addressable).
struct ParseError : std::runtime_error {
  ParseError(const std::string& what, int line_no)
      : std::runtime_error(what), line(line_no) {}
  int line = 0;
};

// Output path that cannot be created or written.
struct WriteError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// All floating-point values cross file boundaries at 9 significant digits
// ("%.9g"). That formatting is idempotent under a write/parse/write cycle,
// so every value a tool writes re-reads to the identical byte sequence.
std::string fmt9(double v);

// Collapse a double onto the 9-significant-digit grid fmt9 writes.
double quantize9(double v);

// Inventory files are JSON Lines, one listing per line with keys
// id, x, y, logit and optional price, reviews, rating.
void write_inventory(const std::string& path,
                     const std::vector<Listing>& listings);
std::string listing_to_json_line(const Listing& l);

// Throws ParseError naming the offending line for malformed JSON, missing
// or mistyped keys, a positive logit, out-of-range metadata, or a
// duplicated id.
std::vector<Listing> read_inventory(const std::string& path);

// Click logs are JSON Lines with keys query_id, dx, dy, clicked, tier
// ("regular" | "mini"), rank, distance_rank.
void write_click_log(const std::string& path,
                     const std::vector<ClickRecord>& records);
std::vector<ClickRecord> read_click_log(const std::string& path);

// Estimated surfaces persist as a single JSON object
// {"resolution": R, "ctr": [...], "impressions": [...]} (row-major), plus a
// human-readable CSV of relative attention per cell.
void write_surface_json(const std::string& path,
                        const AttentionSurface& surface);
AttentionSurface read_surface_json(const std::string& path);
void write_surface_csv(const std::string& path,
                       const AttentionSurface& surface);

// Experiment report CSV: one row per arm, fixed column set, 9-significant-
// digit floats. The JSON sidecar carries the same stats plus the run
// configuration and per-arm extras that do not fit the CSV.
void write_report_csv(const std::string& path, const ExperimentReport& report);
void write_report_sidecar(const std::string& path,
                          const ExperimentReport& report,
                          const nlohmann::ordered_json& config);

std::string report_csv_string(const ExperimentReport& report);

}  // namespace maprank
