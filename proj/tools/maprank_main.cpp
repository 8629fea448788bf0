// Command-line front end: inventory generation, simulated experiments,
// attention-surface estimation, diagnostic curves and map-center search.
//
// Exit codes: 0 success, 2 unwritable output path, 3 malformed input file,
// 4 unknown experiment name, 5 surface center cell not estimable.
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <limits>
#include <memory>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "maprank/attention.hpp"
#include "maprank/core.hpp"
#include "maprank/io.hpp"
#include "maprank/placement.hpp"
#include "maprank/selection.hpp"
#include "maprank/sim.hpp"

namespace {

using namespace maprank;

double parse_alpha(const std::string& s) {
  if (s == "inf" || s == "Inf" || s == "INF" || s == "infinity") {
    return std::numeric_limits<double>::infinity();
  }
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (end == s.c_str() || *end != '\0') {
    throw std::invalid_argument("cannot parse --alpha value: " + s);
  }
  return v;
}

// "30:1,100:2,300:3" -> adaptive step table.
std::vector<AdaptiveStep> parse_adaptive_table(const std::string& s) {
  std::vector<AdaptiveStep> table;
  std::size_t pos = 0;
  while (pos < s.size()) {
    std::size_t comma = s.find(',', pos);
    if (comma == std::string::npos) comma = s.size();
    const std::string entry = s.substr(pos, comma - pos);
    const std::size_t colon = entry.find(':');
    if (colon == std::string::npos) {
      throw std::invalid_argument("adaptive table entries must look like total:rank");
    }
    AdaptiveStep step;
    step.max_total = std::stoi(entry.substr(0, colon));
    step.rank = std::stoi(entry.substr(colon + 1));
    table.push_back(step);
    pos = comma + 1;
  }
  return table;
}

struct SurfaceFlags {
  std::string file;
  double peak = 0.8;
  double scale = 0.25;
  double shift = 0.0;
  int resolution = 21;

  void attach(CLI::App* cmd) {
    cmd->add_option("--surface-file", file,
                    "load the attention surface from this JSON file");
    cmd->add_option("--surface-peak", peak,
                    "synthetic surface: peak ctr at the center");
    cmd->add_option("--surface-scale", scale,
                    "synthetic surface: Gaussian decay scale");
    cmd->add_option("--surface-shift", shift,
                    "synthetic surface: horizontal peak shift");
    cmd->add_option("--surface-resolution", resolution,
                    "synthetic surface: odd grid resolution");
  }

  std::shared_ptr<const AttentionSurface> load() const {
    if (!file.empty()) {
      return std::make_shared<AttentionSurface>(read_surface_json(file));
    }
    return std::make_shared<AttentionSurface>(
        synthetic_radial_surface(peak, scale, shift, resolution));
  }

  nlohmann::ordered_json describe() const {
    nlohmann::ordered_json j;
    if (!file.empty()) {
      j["file"] = file;
    } else {
      j["synthetic"] = {{"peak", peak},
                        {"scale", scale},
                        {"shift", shift},
                        {"resolution", resolution}};
    }
    return j;
  }
};

nlohmann::ordered_json alpha_json(double alpha) {
  if (std::isinf(alpha)) return "inf";
  return alpha;
}

int run(int argc, char** argv) {
  CLI::App app{"map-aware search result construction and simulation"};
  app.require_subcommand(1);

  // ---- gen-inventory -------------------------------------------------
  auto* gen = app.add_subcommand("gen-inventory", "generate a synthetic inventory");
  int gen_n = 100;
  std::uint64_t gen_seed = 0;
  std::string gen_out;
  std::string gen_spatial = "uniform";
  InventoryConfig inv_cfg;
  gen->add_option("--n", gen_n, "number of listings")->required();
  gen->add_option("--seed", gen_seed, "generator seed")->required();
  gen->add_option("--out", gen_out, "output inventory JSONL path")->required();
  gen->add_option("--spatial", gen_spatial, "uniform or clustered")
      ->check(CLI::IsMember({"uniform", "clustered"}));
  gen->add_option("--clusters", inv_cfg.clusters, "cluster count (clustered)");
  gen->add_option("--spread", inv_cfg.spread, "cluster stddev (clustered)");
  gen->add_option("--base-logit", inv_cfg.base_logit, "logit at the center");
  gen->add_option("--beta", inv_cfg.beta, "logit decay per unit distance");
  gen->add_option("--noise-sd", inv_cfg.noise_sd, "logit noise stddev");
  gen->callback([&] {
    inv_cfg.n = gen_n;
    inv_cfg.seed = gen_seed;
    inv_cfg.spatial =
        gen_spatial == "clustered" ? SpatialDist::clustered : SpatialDist::uniform;
    write_inventory(gen_out, generate_inventory(inv_cfg));
  });

  // ---- run-exp --------------------------------------------------------
  auto* exp = app.add_subcommand("run-exp", "run one simulated experiment");
  std::string exp_name, exp_inventory, exp_out, exp_sidecar;
  long long exp_sessions = 10000;
  std::uint64_t exp_seed = 0;
  int exp_threads = 1;
  std::string exp_alpha = "1";
  std::string exp_anchor = "topmost";
  std::string exp_adaptive_table = "30:1,100:2,300:3";
  int exp_adaptive_overflow = 4;
  int exp_max_pins = 18;
  int exp_n_pins = 18;
  double exp_epsilon = 0.05;
  double exp_click = 0.2;
  double exp_mini_weight = 0.125;
  SurfaceFlags exp_surface;
  exp->add_option("--experiment", exp_name, "experiment name")->required();
  exp->add_option("--inventory", exp_inventory, "inventory JSONL path")->required();
  exp->add_option("--out", exp_out, "report CSV path")->required();
  exp->add_option("--sidecar", exp_sidecar, "report JSON sidecar path");
  exp->add_option("--sessions", exp_sessions, "sessions per arm")->required();
  exp->add_option("--seed", exp_seed, "experiment seed")->required();
  exp->add_option("--threads", exp_threads,
                  "worker threads (never changes output bytes)");
  exp->add_option("--alpha", exp_alpha, "filter margin, 'inf' disables");
  exp->add_option("--anchor", exp_anchor, "anchor strategy")
      ->check(CLI::IsMember({"topmost", "median-top3", "adaptive"}));
  exp->add_option("--adaptive-table", exp_adaptive_table,
                  "adaptive anchor steps, total:rank pairs");
  exp->add_option("--adaptive-overflow-rank", exp_adaptive_overflow,
                  "anchor rank beyond the last table step");
  exp->add_option("--max-pins", exp_max_pins, "display cap");
  exp->add_option("--n-pins", exp_n_pins, "center_opt: pins to place");
  exp->add_option("--epsilon", exp_epsilon, "center_opt: grid step");
  exp->add_option("--click-propensity", exp_click, "user click scale");
  exp->add_option("--mini-weight", exp_mini_weight,
                  "minipin: attention of a mini-pin relative to a regular pin");
  exp_surface.attach(exp);
  exp->callback([&] {
    if (exp_out == exp_inventory || exp_sidecar == exp_inventory) {
      throw WriteError("output path would overwrite the inventory");
    }
    ExperimentConfig cfg;
    cfg.name = parse_experiment_name(exp_name);
    cfg.sessions = exp_sessions;
    cfg.seed = exp_seed;
    cfg.threads = exp_threads;
    cfg.alpha = parse_alpha(exp_alpha);
    if (exp_anchor == "median-top3") {
      cfg.anchor = AnchorStrategy::median_top3();
    } else if (exp_anchor == "adaptive") {
      cfg.anchor = AnchorStrategy::adaptive(
          parse_adaptive_table(exp_adaptive_table), exp_adaptive_overflow);
    } else {
      cfg.anchor = AnchorStrategy::topmost();
    }
    cfg.max_pins = exp_max_pins;
    cfg.n_pins = exp_n_pins;
    cfg.epsilon = exp_epsilon;

    const std::vector<Listing> inventory = read_inventory(exp_inventory);

    UserModel user;
    user.click_propensity = exp_click;
    switch (cfg.name) {
      case ExperimentName::shuffle_list: {
        ListPositional lp;
        for (int i = 0; i < cfg.max_pins; ++i) {
          lp.weights.push_back(1.0 / (1.0 + i));
        }
        user.attention = std::move(lp);
        user.exam_order = ExamOrder::by_rank;
        break;
      }
      case ExperimentName::minipin: {
        MapTiered mt;
        mt.mini = exp_mini_weight;
        user.attention = mt;
        break;
      }
      case ExperimentName::center_opt:
        user.attention = MapContinuous{exp_surface.load(), {0.0, 0.0}};
        break;
      default:
        user.attention = MapUniform{};
        break;
    }

    const ExperimentReport report = run_experiment(cfg, inventory, user);
    write_report_csv(exp_out, report);

    nlohmann::ordered_json config;
    config["experiment"] = exp_name;
    config["inventory"] = exp_inventory;
    config["sessions"] = exp_sessions;
    config["seed"] = exp_seed;
    config["alpha"] = alpha_json(cfg.alpha);
    config["anchor"] = exp_anchor;
    if (exp_anchor == "adaptive") {
      config["adaptive_table"] = exp_adaptive_table;
      config["adaptive_overflow_rank"] = exp_adaptive_overflow;
    }
    config["max_pins"] = exp_max_pins;
    config["click_propensity"] = exp_click;
    if (cfg.name == ExperimentName::minipin) {
      config["mini_weight"] = exp_mini_weight;
    }
    if (cfg.name == ExperimentName::center_opt) {
      config["n_pins"] = exp_n_pins;
      config["epsilon"] = exp_epsilon;
      config["surface"] = exp_surface.describe();
    }
    const std::string sidecar =
        exp_sidecar.empty() ? exp_out + ".json" : exp_sidecar;
    write_report_sidecar(sidecar, report, config);
  });

  // ---- estimate-surface ----------------------------------------------
  auto* est = app.add_subcommand("estimate-surface",
                                 "estimate a ctr surface from a click log");
  std::string est_logs, est_out, est_csv;
  int est_resolution = 21;
  std::int64_t est_min_impressions = 50;
  est->add_option("--logs", est_logs, "click log JSONL path")->required();
  est->add_option("--out", est_out, "surface JSON path")->required();
  est->add_option("--csv", est_csv, "relative-attention CSV path");
  est->add_option("--resolution", est_resolution, "odd grid resolution");
  est->add_option("--min-impressions", est_min_impressions,
                  "impressions needed to estimate a cell directly");
  est->callback([&] {
    const std::vector<ClickRecord> logs = read_click_log(est_logs);
    SurfaceDiagnostics diag;
    const AttentionSurface surface =
        estimate_surface(logs, est_resolution, est_min_impressions, &diag);
    write_surface_json(est_out, surface);
    write_surface_csv(est_csv.empty() ? est_out + ".csv" : est_csv, surface);
    std::cerr << "estimated " << est_resolution << "x" << est_resolution
              << " surface from " << logs.size() << " records ("
              << diag.fallback_cells << " fallback cells, "
              << diag.uncovered_cells << " uncovered)\n";
  });

  // ---- curves -----------------------------------------------------------
  auto* curves = app.add_subcommand(
      "curves", "per-rank ctr curves and the rank/distance profile");
  std::string cur_logs, cur_prefix;
  int cur_bins = 10;
  curves->add_option("--logs", cur_logs, "click log JSONL path")->required();
  curves->add_option("--out-prefix", cur_prefix, "output CSV path prefix")
      ->required();
  curves->add_option("--distance-bins", cur_bins,
                     "bins for the rank/distance profile");
  curves->callback([&] {
    const std::vector<ClickRecord> logs = read_click_log(cur_logs);
    auto write_curve = [](const std::string& path,
                          const std::vector<RankCtrPoint>& curve) {
      std::ofstream out(path, std::ios::binary);
      if (!out) throw WriteError("cannot open output path: " + path);
      out << "rank,ctr,normalized_ctr\n";
      for (const RankCtrPoint& p : curve) {
        out << p.rank << ',' << fmt9(p.ctr) << ',' << fmt9(p.normalized) << '\n';
      }
      out.flush();
      if (!out) throw WriteError("failed writing output path: " + path);
    };
    write_curve(cur_prefix + "_search_rank.csv",
                ctr_by_rank_curve(logs, RankKey::search_rank));
    write_curve(cur_prefix + "_distance_rank.csv",
                ctr_by_rank_curve(logs, RankKey::distance_rank));

    const std::string profile_path = cur_prefix + "_distance_profile.csv";
    std::ofstream out(profile_path, std::ios::binary);
    if (!out) throw WriteError("cannot open output path: " + profile_path);
    out << "distance,avg_rank,transform\n";
    for (const DistanceRankPoint& p : rank_distance_profile(logs, cur_bins)) {
      out << fmt9(p.distance) << ',' << fmt9(p.avg_rank) << ','
          << fmt9(p.transform) << '\n';
    }
    out.flush();
    if (!out) throw WriteError("failed writing output path: " + profile_path);
  });

  // ---- optimize-center -------------------------------------------------
  auto* opt = app.add_subcommand("optimize-center",
                                 "greedy map-center search over an inventory");
  std::string opt_inventory, opt_out;
  int opt_n_pins = 18;
  double opt_epsilon = 0.05;
  SurfaceFlags opt_surface;
  opt->add_option("--inventory", opt_inventory, "inventory JSONL path")->required();
  opt->add_option("--out", opt_out, "result JSON path")->required();
  opt->add_option("--n-pins", opt_n_pins, "pins to place");
  opt->add_option("--epsilon", opt_epsilon, "candidate grid step");
  opt_surface.attach(opt);
  opt->callback([&] {
    const std::vector<Listing> inventory = read_inventory(opt_inventory);
    PlacementConfig cfg;
    cfg.n_pins = opt_n_pins;
    cfg.epsilon = opt_epsilon;
    cfg.surface = opt_surface.load();
    const PlacementResult res = optimize_center(inventory, cfg);

    nlohmann::ordered_json doc;
    doc["center"] = {{"x", quantize9(res.center.x)}, {"y", quantize9(res.center.y)}};
    doc["objective"] = quantize9(res.objective);
    doc["n_pins"] = static_cast<long long>(res.pins.size());
    doc["epsilon"] = opt_epsilon;
    nlohmann::ordered_json ids = nlohmann::ordered_json::array();
    for (const Listing& l : res.pins) ids.push_back(l.id);
    doc["pins"] = std::move(ids);
    doc["surface"] = opt_surface.describe();

    std::ofstream out(opt_out, std::ios::binary);
    if (!out) throw WriteError("cannot open output path: " + opt_out);
    out << doc.dump(2) << '\n';
    out.flush();
    if (!out) throw WriteError("failed writing output path: " + opt_out);
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const maprank::WriteError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const maprank::ParseError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  } catch (const maprank::UnknownExperimentError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 4;
  } catch (const maprank::SurfaceCenterError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 5;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
