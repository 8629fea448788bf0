#include "maprank/io.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

namespace maprank {

std::string fmt9(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

double quantize9(double v) { return std::strtod(fmt9(v).c_str(), nullptr); }

namespace {

std::ofstream open_output(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw WriteError("cannot open output path: " + path);
  return out;
}

std::ifstream open_input(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open input path: " + path, 0);
  return in;
}

void finish_output(std::ofstream& out, const std::string& path) {
  out.flush();
  if (!out) throw WriteError("failed writing output path: " + path);
}

std::string json_escape(const std::string& s) {
  std::string out;
  out.reserve(s.size() + 2);
  for (char c : s) {
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\r': out += "\\r"; break;
      case '\t': out += "\\t"; break;
      default:
        if (static_cast<unsigned char>(c) < 0x20) {
          char buf[8];
          std::snprintf(buf, sizeof buf, "\\u%04x", c);
          out += buf;
        } else {
          out += c;
        }
    }
  }
  return out;
}

[[noreturn]] void bad_line(const std::string& what, int line) {
  std::ostringstream msg;
  msg << "line " << line << ": " << what;
  throw ParseError(msg.str(), line);
}

double number_field(const nlohmann::json& obj, const char* key, int line) {
  auto it = obj.find(key);
  if (it == obj.end()) bad_line(std::string("missing key '") + key + "'", line);
  if (!it->is_number()) bad_line(std::string("key '") + key + "' is not a number", line);
  const double v = it->get<double>();
  if (!std::isfinite(v)) bad_line(std::string("key '") + key + "' is not finite", line);
  return v;
}

}  // namespace

std::string listing_to_json_line(const Listing& l) {
  std::string out = "{\"id\":\"" + json_escape(l.id) + "\"";
  out += ",\"x\":" + fmt9(l.x);
  out += ",\"y\":" + fmt9(l.y);
  out += ",\"logit\":" + fmt9(l.logit);
  if (l.price) out += ",\"price\":" + fmt9(*l.price);
  if (l.reviews) out += ",\"reviews\":" + std::to_string(*l.reviews);
  if (l.rating) out += ",\"rating\":" + fmt9(*l.rating);
  out += "}";
  return out;
}

void write_inventory(const std::string& path,
                     const std::vector<Listing>& listings) {
  std::ofstream out = open_output(path);
  for (const Listing& l : listings) {
    out << listing_to_json_line(l) << '\n';
  }
  finish_output(out, path);
}

std::vector<Listing> read_inventory(const std::string& path) {
  std::ifstream in = open_input(path);
  std::vector<Listing> listings;
  std::set<std::string> seen;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    nlohmann::json obj;
    try {
      obj = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      bad_line(std::string("invalid JSON (") + e.what() + ")", line_no);
    }
    if (!obj.is_object()) bad_line("expected a JSON object", line_no);

    Listing l;
    auto id_it = obj.find("id");
    if (id_it == obj.end()) bad_line("missing key 'id'", line_no);
    if (!id_it->is_string()) bad_line("key 'id' is not a string", line_no);
    l.id = id_it->get<std::string>();
    if (l.id.empty()) bad_line("key 'id' is empty", line_no);
    if (!seen.insert(l.id).second) bad_line("duplicate id '" + l.id + "'", line_no);

    l.x = number_field(obj, "x", line_no);
    l.y = number_field(obj, "y", line_no);
    l.logit = number_field(obj, "logit", line_no);
    if (l.logit > 0.0) bad_line("logit must be <= 0", line_no);

    if (obj.contains("price")) {
      const double p = number_field(obj, "price", line_no);
      if (!(p > 0.0)) bad_line("price must be > 0", line_no);
      l.price = p;
    }
    if (obj.contains("reviews")) {
      const auto& r = obj.at("reviews");
      if (!r.is_number_integer()) bad_line("key 'reviews' is not an integer", line_no);
      const long long v = r.get<long long>();
      if (v < 0) bad_line("reviews must be >= 0", line_no);
      l.reviews = static_cast<int>(v);
    }
    if (obj.contains("rating")) {
      const double v = number_field(obj, "rating", line_no);
      if (v < 0.0 || v > 5.0) bad_line("rating must be in [0, 5]", line_no);
      l.rating = v;
    }
    listings.push_back(std::move(l));
  }
  return listings;
}

void write_click_log(const std::string& path,
                     const std::vector<ClickRecord>& records) {
  std::ofstream out = open_output(path);
  for (const ClickRecord& rec : records) {
    out << "{\"query_id\":\"" << json_escape(rec.query_id) << "\""
        << ",\"dx\":" << fmt9(rec.dx) << ",\"dy\":" << fmt9(rec.dy)
        << ",\"clicked\":" << (rec.clicked ? "true" : "false") << ",\"tier\":\""
        << (rec.tier == ClickTier::mini ? "mini" : "regular") << "\""
        << ",\"rank\":" << rec.rank << ",\"distance_rank\":" << rec.distance_rank
        << "}\n";
  }
  finish_output(out, path);
}

std::vector<ClickRecord> read_click_log(const std::string& path) {
  std::ifstream in = open_input(path);
  std::vector<ClickRecord> records;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    nlohmann::json obj;
    try {
      obj = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      bad_line(std::string("invalid JSON (") + e.what() + ")", line_no);
    }
    if (!obj.is_object()) bad_line("expected a JSON object", line_no);

    ClickRecord rec;
    auto qid = obj.find("query_id");
    if (qid == obj.end()) bad_line("missing key 'query_id'", line_no);
    if (!qid->is_string()) bad_line("key 'query_id' is not a string", line_no);
    rec.query_id = qid->get<std::string>();

    rec.dx = number_field(obj, "dx", line_no);
    rec.dy = number_field(obj, "dy", line_no);
    if (std::abs(rec.dx) > 0.5 || std::abs(rec.dy) > 0.5) {
      bad_line("pin offset outside the unit viewport", line_no);
    }
    auto clicked = obj.find("clicked");
    if (clicked == obj.end()) bad_line("missing key 'clicked'", line_no);
    if (!clicked->is_boolean()) bad_line("key 'clicked' is not a boolean", line_no);
    rec.clicked = clicked->get<bool>();

    auto tier = obj.find("tier");
    if (tier == obj.end()) bad_line("missing key 'tier'", line_no);
    if (!tier->is_string()) bad_line("key 'tier' is not a string", line_no);
    const std::string tier_s = tier->get<std::string>();
    if (tier_s == "regular") {
      rec.tier = ClickTier::regular;
    } else if (tier_s == "mini") {
      rec.tier = ClickTier::mini;
    } else {
      bad_line("key 'tier' must be 'regular' or 'mini'", line_no);
    }

    for (const char* key : {"rank", "distance_rank"}) {
      auto it = obj.find(key);
      if (it == obj.end()) bad_line(std::string("missing key '") + key + "'", line_no);
      if (!it->is_number_integer()) {
        bad_line(std::string("key '") + key + "' is not an integer", line_no);
      }
      const long long v = it->get<long long>();
      if (v < 1) bad_line(std::string("key '") + key + "' must be >= 1", line_no);
      if (std::string(key) == "rank") {
        rec.rank = static_cast<int>(v);
      } else {
        rec.distance_rank = static_cast<int>(v);
      }
    }
    records.push_back(std::move(rec));
  }
  return records;
}

void write_surface_json(const std::string& path, const AttentionSurface& surface) {
  std::ofstream out = open_output(path);
  out << "{\"resolution\":" << surface.resolution() << ",\"ctr\":[";
  const auto& ctr = surface.ctr();
  for (std::size_t i = 0; i < ctr.size(); ++i) {
    if (i) out << ',';
    out << fmt9(ctr[i]);
  }
  out << "],\"impressions\":[";
  const auto& imp = surface.impressions();
  for (std::size_t i = 0; i < imp.size(); ++i) {
    if (i) out << ',';
    out << imp[i];
  }
  out << "]}\n";
  finish_output(out, path);
}

AttentionSurface read_surface_json(const std::string& path) {
  std::ifstream in = open_input(path);
  nlohmann::json obj;
  try {
    obj = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("invalid surface JSON (") + e.what() + ")", 0);
  }
  if (!obj.is_object() || !obj.contains("resolution") || !obj.contains("ctr") ||
      !obj.contains("impressions")) {
    throw ParseError("surface JSON needs resolution, ctr and impressions", 0);
  }
  const int resolution = obj.at("resolution").get<int>();
  std::vector<double> ctr = obj.at("ctr").get<std::vector<double>>();
  std::vector<std::int64_t> imp =
      obj.at("impressions").get<std::vector<std::int64_t>>();
  try {
    return AttentionSurface(resolution, std::move(ctr), std::move(imp));
  } catch (const std::invalid_argument& e) {
    throw ParseError(std::string("invalid surface: ") + e.what(), 0);
  }
}

void write_surface_csv(const std::string& path, const AttentionSurface& surface) {
  std::ofstream out = open_output(path);
  out << "dx_cell,dy_cell,relative_attention\n";
  const int r = surface.resolution();
  for (int iy = 0; iy < r; ++iy) {
    for (int ix = 0; ix < r; ++ix) {
      out << fmt9(surface.cell_coord(ix)) << ',' << fmt9(surface.cell_coord(iy))
          << ',' << fmt9(surface.ctr_at(ix, iy) / surface.center_ctr()) << '\n';
    }
  }
  finish_output(out, path);
}

std::string report_csv_string(const ExperimentReport& report) {
  std::ostringstream out;
  out << "arm,sessions,bookings,booking_rate,ci_low,ci_high,analytic_expected,"
         "ndcg,pins_mean,avg_pin_prob,impressions_to_discovery,"
         "clicks_to_discovery\n";
  for (const ArmStats& s : report.arms) {
    out << s.arm << ',' << s.sessions << ',' << s.bookings << ','
        << fmt9(s.booking_rate) << ',' << fmt9(s.ci_low) << ','
        << fmt9(s.ci_high) << ',' << fmt9(s.analytic_expected) << ','
        << fmt9(s.ndcg) << ',' << fmt9(s.pins_mean) << ','
        << fmt9(s.avg_pin_prob) << ',' << fmt9(s.impressions_to_discovery)
        << ',' << fmt9(s.clicks_to_discovery) << '\n';
  }
  return out.str();
}

void write_report_csv(const std::string& path, const ExperimentReport& report) {
  std::ofstream out = open_output(path);
  out << report_csv_string(report);
  finish_output(out, path);
}

void write_report_sidecar(const std::string& path, const ExperimentReport& report,
                          const nlohmann::ordered_json& config) {
  nlohmann::ordered_json doc;
  doc["experiment"] = report.experiment;
  doc["seed"] = report.seed;
  doc["sessions"] = report.sessions;
  doc["config"] = config;
  nlohmann::ordered_json arms = nlohmann::ordered_json::array();
  for (const ArmStats& s : report.arms) {
    nlohmann::ordered_json a;
    a["arm"] = s.arm;
    a["seed"] = s.seed;
    a["sessions"] = s.sessions;
    a["bookings"] = s.bookings;
    a["booking_rate"] = quantize9(s.booking_rate);
    a["ci_low"] = quantize9(s.ci_low);
    a["ci_high"] = quantize9(s.ci_high);
    a["analytic_expected"] = quantize9(s.analytic_expected);
    a["ndcg"] = quantize9(s.ndcg);
    a["pins_mean"] = quantize9(s.pins_mean);
    a["avg_pin_prob"] = quantize9(s.avg_pin_prob);
    a["impressions_to_discovery"] = quantize9(s.impressions_to_discovery);
    a["clicks_to_discovery"] = quantize9(s.clicks_to_discovery);
    a["avg_price"] = quantize9(s.avg_price);
    a["avg_reviews"] = quantize9(s.avg_reviews);
    a["p95_distinct_clicks"] = s.p95_distinct_clicks;
    arms.push_back(std::move(a));
  }
  doc["arms"] = std::move(arms);

  std::ofstream out = open_output(path);
  out << doc.dump(2) << '\n';
  finish_output(out, path);
}

}  // namespace maprank
