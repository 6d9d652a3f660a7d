// SPDX-License-Identifier: Apache-2.0
// nearmimo: near-field distributed MIMO channel simulation and estimation

#include "nearmimo/bench.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <cmath>
#include <exception>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>

#include "json.hpp"
#include "nearmimo/rng.hpp"

namespace nearmimo {

using json = nlohmann::json;

namespace {

constexpr double kEvmClampDb = -100.0;

const std::vector<std::string> kKnownEstimators = {"antenna", "multisource",
                                                   "multisink"};

std::string placement_name(AntennaPlacement p) {
  return p == AntennaPlacement::perimeter ? "perimeter" : "linear";
}

std::string steering_name(SteeringMode m) {
  switch (m) {
    case SteeringMode::squared_path_loss: return "squared_path_loss";
    case SteeringMode::amplitude_path_loss: return "amplitude_path_loss";
    case SteeringMode::phase_only: return "phase_only";
  }
  return "squared_path_loss";
}

std::string amplitude_name(AmplitudeMode m) {
  return m == AmplitudeMode::least_squares ? "least_squares" : "mean_correlation";
}

}  // namespace

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0.0 ? "inf" : "-inf";
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

void parallel_for_index(int n, unsigned threads, const std::function<void(int)>& fn) {
  if (n <= 0) return;
  unsigned workers = threads != 0 ? threads : std::thread::hardware_concurrency();
  if (workers == 0) workers = 1;
  workers = std::min<unsigned>(workers, static_cast<unsigned>(n));
  if (workers <= 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  const auto body = [&] {
    for (;;) {
      const int i = next.fetch_add(1);
      if (i >= n) return;
      try {
        fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!error) error = std::current_exception();
        return;
      }
    }
  };
  std::vector<std::thread> pool;
  for (unsigned t = 0; t < workers; ++t) pool.emplace_back(body);
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

void ScenarioConfig::validate() const {
  std::vector<std::string> problems;
  const auto bad = [&](const std::string& field, const std::string& why) {
    problems.push_back(field + ": " + why);
  };
  if (!(room_width_m > 0.0)) bad("room_width_m", "must be positive");
  if (!(room_depth_m > 0.0)) bad("room_depth_m", "must be positive");
  if (!(wavelength_m > 0.0)) bad("wavelength_m", "must be positive");
  if (antenna_spacings_lambda.empty())
    bad("antenna_spacings_lambda", "must list at least one spacing");
  for (double s : antenna_spacings_lambda)
    if (!(s > 0.0)) bad("antenna_spacings_lambda", "spacings must be positive");
  if (max_order < 0) bad("max_order", "must be >= 0");
  if (!(wall_reflection_coefficient > 0.0 && wall_reflection_coefficient <= 1.0))
    bad("wall_reflection_coefficient", "must be in (0, 1]");
  if (num_sources < 0) bad("num_sources", "must be >= 0");
  if (input_evm_sweep_db.empty())
    bad("input_evm_sweep_db", "must list at least one point");
  for (double v : input_evm_sweep_db)
    if (std::isnan(v) || v == std::numeric_limits<double>::infinity())
      bad("input_evm_sweep_db", "points must be finite or -inf");
  if (trials < 1) bad("trials", "must be >= 1");
  if (estimators.empty()) bad("estimators", "must enable at least one estimator");
  for (const auto& e : estimators)
    if (std::find(kKnownEstimators.begin(), kKnownEstimators.end(), e) ==
        kKnownEstimators.end())
      bad("estimators", "unknown estimator '" + e + "'");
  const double margin = effective_ue_margin();
  if (!(margin >= wavelength_m / 100.0))
    bad("ue_margin_m", "must be at least wavelength/100");
  if (!(2.0 * margin < std::min(room_width_m, room_depth_m)))
    bad("ue_margin_m", "margins leave no room for the user");
  if (!(std::abs(tx_amplitude) > 0.0)) bad("tx_amplitude", "must be nonzero");
  if (!problems.empty()) {
    std::string msg = "invalid config";
    for (const auto& p : problems) msg += "; " + p;
    throw ConfigError(msg);
  }
}

namespace {

SteeringMode parse_steering(const std::string& s, const std::string& field) {
  if (s == "squared_path_loss") return SteeringMode::squared_path_loss;
  if (s == "amplitude_path_loss") return SteeringMode::amplitude_path_loss;
  if (s == "phase_only") return SteeringMode::phase_only;
  throw ConfigError(field + ": unknown steering mode '" + s + "'");
}

double parse_sweep_point(const json& v, const std::string& field) {
  if (v.is_number()) return v.get<double>();
  if (v.is_string() && v.get<std::string>() == "-inf") return kNoNoiseDb;
  throw ConfigError(field + ": entries must be numbers or \"-inf\"");
}

}  // namespace

ScenarioConfig load_config(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw ConfigError("cannot open config file " + file.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("config file " + file.string() + " is not valid: " + e.what());
  }
  if (!doc.is_object()) throw ConfigError("config: expected an object");

  static const std::vector<std::string> known = {
      "room_width_m", "room_depth_m", "wavelength_m", "antenna_spacings_lambda",
      "antenna_placement", "max_order", "wall_reflection_coefficient",
      "num_sources", "input_evm_sweep_db", "trials", "master_seed", "estimators",
      "amplitude_mode", "steering_mode", "template_steering_mode", "ue_margin_m",
      "tx_amplitude"};
  for (const auto& item : doc.items())
    if (std::find(known.begin(), known.end(), item.key()) == known.end())
      throw ConfigError("config: unknown field '" + item.key() + "'");

  ScenarioConfig cfg;
  const auto number = [&](const char* key, double& out) {
    if (!doc.contains(key)) return;
    if (!doc[key].is_number()) throw ConfigError(std::string(key) + ": expected a number");
    out = doc[key].get<double>();
  };
  const auto integer = [&](const char* key, int& out) {
    if (!doc.contains(key)) return;
    if (!doc[key].is_number_integer())
      throw ConfigError(std::string(key) + ": expected an integer");
    out = doc[key].get<int>();
  };
  number("room_width_m", cfg.room_width_m);
  number("room_depth_m", cfg.room_depth_m);
  number("wavelength_m", cfg.wavelength_m);
  if (doc.contains("antenna_spacings_lambda")) {
    if (!doc["antenna_spacings_lambda"].is_array())
      throw ConfigError("antenna_spacings_lambda: expected a list of numbers");
    cfg.antenna_spacings_lambda.clear();
    for (const auto& v : doc["antenna_spacings_lambda"]) {
      if (!v.is_number())
        throw ConfigError("antenna_spacings_lambda: expected a list of numbers");
      cfg.antenna_spacings_lambda.push_back(v.get<double>());
    }
  }
  if (doc.contains("antenna_placement")) {
    const std::string p = doc["antenna_placement"].is_string()
                              ? doc["antenna_placement"].get<std::string>()
                              : "";
    if (p == "perimeter") cfg.antenna_placement = AntennaPlacement::perimeter;
    else if (p == "linear") cfg.antenna_placement = AntennaPlacement::linear;
    else throw ConfigError("antenna_placement: expected \"perimeter\" or \"linear\"");
  }
  integer("max_order", cfg.max_order);
  number("wall_reflection_coefficient", cfg.wall_reflection_coefficient);
  integer("num_sources", cfg.num_sources);
  if (doc.contains("input_evm_sweep_db")) {
    if (!doc["input_evm_sweep_db"].is_array())
      throw ConfigError("input_evm_sweep_db: expected a list");
    cfg.input_evm_sweep_db.clear();
    for (const auto& v : doc["input_evm_sweep_db"])
      cfg.input_evm_sweep_db.push_back(parse_sweep_point(v, "input_evm_sweep_db"));
  }
  integer("trials", cfg.trials);
  if (doc.contains("master_seed")) {
    if (!doc["master_seed"].is_number_integer())
      throw ConfigError("master_seed: expected an integer");
    cfg.master_seed = doc["master_seed"].get<std::uint64_t>();
  }
  if (doc.contains("estimators")) {
    if (!doc["estimators"].is_array())
      throw ConfigError("estimators: expected a list of names");
    cfg.estimators.clear();
    for (const auto& v : doc["estimators"]) {
      if (!v.is_string()) throw ConfigError("estimators: expected a list of names");
      cfg.estimators.push_back(v.get<std::string>());
    }
  }
  if (doc.contains("amplitude_mode")) {
    const std::string a = doc["amplitude_mode"].is_string()
                              ? doc["amplitude_mode"].get<std::string>()
                              : "";
    if (a == "least_squares") cfg.amplitude_mode = AmplitudeMode::least_squares;
    else if (a == "mean_correlation") cfg.amplitude_mode = AmplitudeMode::mean_correlation;
    else throw ConfigError("amplitude_mode: expected \"least_squares\" or \"mean_correlation\"");
  }
  if (doc.contains("steering_mode")) {
    if (!doc["steering_mode"].is_string())
      throw ConfigError("steering_mode: expected a string");
    cfg.steering_mode = parse_steering(doc["steering_mode"].get<std::string>(),
                                       "steering_mode");
  }
  if (doc.contains("template_steering_mode")) {
    if (!doc["template_steering_mode"].is_string())
      throw ConfigError("template_steering_mode: expected a string");
    cfg.template_steering_mode = parse_steering(
        doc["template_steering_mode"].get<std::string>(), "template_steering_mode");
  }
  number("ue_margin_m", cfg.ue_margin_m);
  if (doc.contains("tx_amplitude")) {
    const json& v = doc["tx_amplitude"];
    if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number())
      throw ConfigError("tx_amplitude: expected [re, im]");
    cfg.tx_amplitude = {v[0].get<double>(), v[1].get<double>()};
  }
  cfg.validate();
  return cfg;
}

void save_config(const ScenarioConfig& cfg, const std::filesystem::path& file) {
  json doc;
  doc["room_width_m"] = cfg.room_width_m;
  doc["room_depth_m"] = cfg.room_depth_m;
  doc["wavelength_m"] = cfg.wavelength_m;
  doc["antenna_spacings_lambda"] = cfg.antenna_spacings_lambda;
  doc["antenna_placement"] = placement_name(cfg.antenna_placement);
  doc["max_order"] = cfg.max_order;
  doc["wall_reflection_coefficient"] = cfg.wall_reflection_coefficient;
  doc["num_sources"] = cfg.num_sources;
  doc["input_evm_sweep_db"] = cfg.input_evm_sweep_db;
  doc["trials"] = cfg.trials;
  doc["master_seed"] = cfg.master_seed;
  doc["estimators"] = cfg.estimators;
  doc["amplitude_mode"] = amplitude_name(cfg.amplitude_mode);
  doc["steering_mode"] = steering_name(cfg.steering_mode);
  doc["template_steering_mode"] = steering_name(cfg.template_steering_mode);
  doc["ue_margin_m"] = cfg.effective_ue_margin();
  doc["tx_amplitude"] = {cfg.tx_amplitude.real(), cfg.tx_amplitude.imag()};
  std::ofstream out(file);
  if (!out) throw std::runtime_error("cannot write config file " + file.string());
  out << doc.dump(2) << "\n";
}

AntennaArray make_perimeter_array(double room_width, double room_depth,
                                  double spacing_m) {
  if (!(spacing_m > 0.0))
    throw std::invalid_argument("make_perimeter_array: spacing must be positive");
  const double perimeter = 2.0 * (room_width + room_depth);
  const int count = static_cast<int>(std::llround(perimeter / spacing_m));
  if (count < 1)
    throw std::invalid_argument("make_perimeter_array: spacing exceeds the perimeter");
  AntennaArray array;
  const double step = perimeter / count;
  // Positions within rounding error of a corner are snapped onto it so that
  // wall-grazing reflections resolve identically in the source and sink
  // channel forms (exact-zero orientation arithmetic at the corners).
  const auto snap = [](double v, double a, double b) {
    if (std::abs(v - a) <= 1e-9) return a;
    if (std::abs(v - b) <= 1e-9) return b;
    return v;
  };
  for (int i = 0; i < count; ++i) {
    double s = i * step;
    Location l;
    if (s < room_width) {
      l = {s, 0.0, 0.0};
    } else if (s < room_width + room_depth) {
      l = {room_width, s - room_width, 0.0};
    } else if (s < 2.0 * room_width + room_depth) {
      l = {room_width - (s - room_width - room_depth), room_depth, 0.0};
    } else {
      l = {0.0, room_depth - (s - 2.0 * room_width - room_depth), 0.0};
    }
    l.x = snap(l.x, 0.0, room_width);
    l.y = snap(l.y, 0.0, room_depth);
    array.locations.push_back(l);
  }
  return array;
}

AntennaArray make_linear_array(double room_width, double spacing_m) {
  if (!(spacing_m > 0.0))
    throw std::invalid_argument("make_linear_array: spacing must be positive");
  AntennaArray array;
  const int count =
      static_cast<int>(std::floor(room_width / spacing_m + 1e-9)) + 1;
  for (int i = 0; i < count; ++i)
    array.locations.push_back({i * spacing_m, 0.0, 0.0});
  return array;
}

Environment make_room(double width, double depth, double reflection_coefficient) {
  std::vector<Wall> walls;
  walls.emplace_back(Location{0.0, 0.0, 0.0}, Location{width, 0.0, 0.0},
                     reflection_coefficient);
  walls.emplace_back(Location{width, 0.0, 0.0}, Location{width, depth, 0.0},
                     reflection_coefficient);
  walls.emplace_back(Location{width, depth, 0.0}, Location{0.0, depth, 0.0},
                     reflection_coefficient);
  walls.emplace_back(Location{0.0, depth, 0.0}, Location{0.0, 0.0, 0.0},
                     reflection_coefficient);
  return Environment{std::move(walls), width, depth};
}

namespace {

struct ScenarioSetup {
  std::string label;
  double spacing_lambda = 0.0;
  AntennaArray array;
  Environment env{std::vector<Wall>{}, 1.0, 1.0};
  ChannelDatabase db;  // only populated when multisink is enabled
  SearchRegion source_region;
  SearchRegion sink_region;
  SearchParams params;
};

bool has_estimator(const ScenarioConfig& cfg, const std::string& name) {
  return std::find(cfg.estimators.begin(), cfg.estimators.end(), name) !=
         cfg.estimators.end();
}

double clamp_evm(double v) { return std::max(v, kEvmClampDb); }

double mean_of(const std::vector<double>& v) {
  double acc = 0.0;
  for (double x : v) acc += x;
  return acc / static_cast<double>(v.size());
}

double median_of(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

double sample_std(const std::vector<double>& v, double mean) {
  if (v.size() < 2) return 0.0;
  double acc = 0.0;
  for (double x : v) acc += (x - mean) * (x - mean);
  return std::sqrt(acc / static_cast<double>(v.size() - 1));
}

}  // namespace

RunOutput run_scenario(const ScenarioConfig& cfg) {
  cfg.validate();
  RunOutput out;
  const double lambda = cfg.wavelength_m;
  const double margin = cfg.effective_ue_margin();
  const int sweep_count = static_cast<int>(cfg.input_evm_sweep_db.size());

  for (double spacing_lambda : cfg.antenna_spacings_lambda) {
    ScenarioSetup setup;
    setup.spacing_lambda = spacing_lambda;
    setup.array = cfg.antenna_placement == AntennaPlacement::perimeter
                      ? make_perimeter_array(cfg.room_width_m, cfg.room_depth_m,
                                             spacing_lambda * lambda)
                      : make_linear_array(cfg.room_width_m, spacing_lambda * lambda);
    setup.env = make_room(cfg.room_width_m, cfg.room_depth_m,
                          cfg.wall_reflection_coefficient);
    setup.label = placement_name(cfg.antenna_placement) + "_" +
                  format_double(spacing_lambda) + "lambda_M" +
                  std::to_string(setup.array.size());
    setup.source_region = {-cfg.room_width_m, 2.0 * cfg.room_width_m,
                           -cfg.room_depth_m, 2.0 * cfg.room_depth_m};
    setup.sink_region = {0.0, cfg.room_width_m, 0.0, cfg.room_depth_m};
    setup.params = SearchParams::defaults_for(lambda);
    if (has_estimator(cfg, "multisink"))
      setup.db = build_db_from_environment(setup.array, setup.env, cfg.max_order,
                                           lambda);

    std::vector<TrialRecord> records(
        static_cast<std::size_t>(cfg.trials) * sweep_count);

    parallel_for_index(cfg.trials, 0, [&](int trial) {
      Rng ue_rng(cfg.master_seed + static_cast<std::uint64_t>(trial));
      Location ue;
      ue.x = ue_rng.uniform(margin, cfg.room_width_m - margin);
      ue.y = ue_rng.uniform(margin, cfg.room_depth_m - margin);
      const Transmitter tx{ue, cfg.tx_amplitude};
      const auto sources = enumerate_virtual_sources(ue, setup.env, cfg.max_order);
      const ChannelVector truth = channel_from_sources(
          tx, sources, setup.array, setup.env, lambda, cfg.steering_mode);

      for (int ei = 0; ei < sweep_count; ++ei) {
        const auto t0 = std::chrono::steady_clock::now();
        TrialRecord rec;
        rec.scenario = setup.label;
        rec.trial_index = trial;
        rec.ue_location = ue;
        rec.input_evm_db = cfg.input_evm_sweep_db[ei];
        const NoisyChannel snapshot = add_noise(
            truth, rec.input_evm_db,
            derive_seed(cfg.master_seed, static_cast<std::uint64_t>(trial),
                        static_cast<std::uint64_t>(ei)));

        if (has_estimator(cfg, "antenna")) {
          const ChannelVector est{snapshot.coefficients, lambda};
          rec.output_evm_db["antenna"] = evm_db(est, truth);
        }
        if (has_estimator(cfg, "multisource")) {
          const auto res = estimate_multisource(
              snapshot, setup.array, cfg.num_sources, setup.source_region,
              setup.params, cfg.amplitude_mode, cfg.steering_mode,
              cfg.template_steering_mode);
          rec.output_evm_db["multisource"] = evm_db(res.reconstructed, truth);
          if (!res.sources.empty()) {
            const auto strongest = std::max_element(
                res.sources.begin(), res.sources.end(),
                [](const SourceEstimate& a, const SourceEstimate& b) {
                  return std::abs(a.amplitude) < std::abs(b.amplitude);
                });
            rec.location_error_m["multisource"] = distance(strongest->location, ue);
          }
        }
        if (has_estimator(cfg, "multisink")) {
          const auto res = estimate_multisink(
              snapshot, setup.db, setup.env, setup.sink_region, setup.params,
              cfg.amplitude_mode, cfg.steering_mode, cfg.template_steering_mode);
          rec.output_evm_db["multisink"] = evm_db(res.reconstructed, truth);
          rec.location_error_m["multisink"] = distance(res.user_location, ue);
        }
        rec.wall_clock_ms =
            std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0)
                .count();
        records[static_cast<std::size_t>(trial) * sweep_count + ei] = std::move(rec);
      }
    });

    // deterministic aggregation: fold over trial index per (evm, estimator)
    std::vector<double> sweep_sorted = cfg.input_evm_sweep_db;
    std::sort(sweep_sorted.begin(), sweep_sorted.end());
    std::vector<std::string> estimators_sorted = cfg.estimators;
    std::sort(estimators_sorted.begin(), estimators_sorted.end());
    for (double evm_point : sweep_sorted) {
      for (const auto& estimator : estimators_sorted) {
        AggregateRow row;
        row.scenario = setup.label;
        row.antennas = static_cast<int>(setup.array.size());
        row.spacing_lambda = spacing_lambda;
        row.input_evm_db = evm_point;
        row.estimator = estimator;
        std::vector<double> evms;
        std::vector<double> loc_errs;
        for (const auto& rec : records) {
          if (rec.input_evm_db != evm_point) continue;
          const auto it = rec.output_evm_db.find(estimator);
          if (it != rec.output_evm_db.end()) evms.push_back(clamp_evm(it->second));
          const auto lit = rec.location_error_m.find(estimator);
          if (lit != rec.location_error_m.end()) loc_errs.push_back(lit->second);
        }
        row.trials = static_cast<int>(evms.size());
        row.mean_output_evm_db = mean_of(evms);
        row.median_output_evm_db = median_of(evms);
        row.std_db = sample_std(evms, row.mean_output_evm_db);
        row.mean_loc_err_m = loc_errs.empty()
                                 ? std::numeric_limits<double>::quiet_NaN()
                                 : mean_of(loc_errs);
        out.table.rows.push_back(std::move(row));
      }
    }
    out.trials.insert(out.trials.end(),
                      std::make_move_iterator(records.begin()),
                      std::make_move_iterator(records.end()));
  }
  return out;
}

void emit_csv(const ResultsTable& results, const std::filesystem::path& file) {
  if (results.rows.empty())
    throw std::invalid_argument("emit_csv: empty results table");
  std::ofstream out(file, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write CSV file " + file.string());
  out << "scenario,M,spacing_lambda,input_evm_db,estimator,mean_output_evm_db,"
         "median_output_evm_db,std_db,mean_loc_err_m,trials\n";
  for (const auto& r : results.rows) {
    out << r.scenario << ',' << r.antennas << ',' << format_double(r.spacing_lambda)
        << ',' << format_double(r.input_evm_db) << ',' << r.estimator << ','
        << format_double(r.mean_output_evm_db) << ','
        << format_double(r.median_output_evm_db) << ',' << format_double(r.std_db)
        << ',' << format_double(r.mean_loc_err_m) << ',' << r.trials << '\n';
  }
  if (!out) throw std::runtime_error("write failed for CSV file " + file.string());
}

namespace {

struct Series {
  std::string estimator;
  std::vector<std::pair<double, double>> points;  // (input, mean output)
};

std::string svg_color(const std::string& estimator) {
  if (estimator == "antenna") return "#1f77b4";
  if (estimator == "multisource") return "#d62728";
  if (estimator == "multisink") return "#2ca02c";
  return "#7f7f7f";
}

}  // namespace

void emit_plot(const ResultsTable& results, const std::filesystem::path& file) {
  if (results.rows.empty())
    throw std::invalid_argument("emit_plot: empty results table");

  // preserve scenario order of the table
  std::vector<std::string> scenarios;
  for (const auto& r : results.rows)
    if (std::find(scenarios.begin(), scenarios.end(), r.scenario) == scenarios.end())
      scenarios.push_back(r.scenario);

  const double chart_w = 560.0, chart_h = 340.0;
  const double ml = 64.0, mr = 170.0, mt = 34.0, mb = 46.0;
  const double width = ml + chart_w + mr;
  const double height = static_cast<double>(scenarios.size()) * (chart_h + mt + mb);

  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width
      << "\" height=\"" << height << "\" viewBox=\"0 0 " << width << " " << height
      << "\">\n<style>text{font-family:sans-serif;font-size:12px}"
         ".title{font-size:14px;font-weight:bold}</style>\n";

  double chart_top = 0.0;
  for (const auto& scenario : scenarios) {
    std::vector<Series> series;
    double x_lo = 0.0, x_hi = 0.0, y_lo = 0.0, y_hi = 0.0;
    bool any = false;
    for (const auto& r : results.rows) {
      if (r.scenario != scenario || !std::isfinite(r.input_evm_db)) continue;
      auto it = std::find_if(series.begin(), series.end(), [&](const Series& s) {
        return s.estimator == r.estimator;
      });
      if (it == series.end()) {
        series.push_back({r.estimator, {}});
        it = series.end() - 1;
      }
      it->points.emplace_back(r.input_evm_db, r.mean_output_evm_db);
      if (!any) {
        x_lo = x_hi = r.input_evm_db;
        y_lo = y_hi = r.mean_output_evm_db;
        any = true;
      }
      x_lo = std::min(x_lo, r.input_evm_db);
      x_hi = std::max(x_hi, r.input_evm_db);
      y_lo = std::min({y_lo, r.mean_output_evm_db, r.input_evm_db});
      y_hi = std::max({y_hi, r.mean_output_evm_db, r.input_evm_db});
    }
    if (series.empty())
      throw std::invalid_argument("emit_plot: no plottable rows for scenario " + scenario);
    if (x_hi - x_lo < 1e-9) { x_lo -= 1.0; x_hi += 1.0; }
    if (y_hi - y_lo < 1e-9) { y_lo -= 1.0; y_hi += 1.0; }
    y_lo = std::floor(y_lo / 5.0) * 5.0;
    y_hi = std::ceil(y_hi / 5.0) * 5.0;

    const double ox = ml, oy = chart_top + mt;
    const auto x_of = [&](double v) { return ox + (v - x_lo) / (x_hi - x_lo) * chart_w; };
    const auto y_of = [&](double v) { return oy + (y_hi - v) / (y_hi - y_lo) * chart_h; };

    svg << "<text class=\"title\" x=\"" << ox << "\" y=\"" << oy - 12 << "\">"
        << scenario << "</text>\n";
    svg << "<rect x=\"" << ox << "\" y=\"" << oy << "\" width=\"" << chart_w
        << "\" height=\"" << chart_h << "\" fill=\"none\" stroke=\"#333\"/>\n";
    for (double tick = std::ceil(x_lo / 5.0) * 5.0; tick <= x_hi + 1e-9; tick += 5.0) {
      svg << "<line x1=\"" << x_of(tick) << "\" y1=\"" << oy + chart_h << "\" x2=\""
          << x_of(tick) << "\" y2=\"" << oy + chart_h + 5 << "\" stroke=\"#333\"/>\n"
          << "<text x=\"" << x_of(tick) - 10 << "\" y=\"" << oy + chart_h + 18 << "\">"
          << format_double(tick) << "</text>\n";
    }
    for (double tick = y_lo; tick <= y_hi + 1e-9; tick += 5.0) {
      svg << "<line x1=\"" << ox - 5 << "\" y1=\"" << y_of(tick) << "\" x2=\"" << ox
          << "\" y2=\"" << y_of(tick) << "\" stroke=\"#333\"/>\n"
          << "<text x=\"" << ox - 40 << "\" y=\"" << y_of(tick) + 4 << "\">"
          << format_double(tick) << "</text>\n";
    }
    svg << "<text x=\"" << ox + chart_w / 2 - 50 << "\" y=\"" << oy + chart_h + 36
        << "\">input EVM (dB)</text>\n";
    svg << "<text transform=\"translate(" << ox - 46 << "," << oy + chart_h / 2 + 50
        << ") rotate(-90)\">mean output EVM (dB)</text>\n";

    // identity reference
    svg << "<polyline data-estimator=\"identity\" fill=\"none\" stroke=\"#888\" "
           "stroke-dasharray=\"5,4\" points=\""
        << x_of(x_lo) << "," << y_of(x_lo) << " " << x_of(x_hi) << "," << y_of(x_hi)
        << "\"/>\n";

    double legend_y = oy + 10.0;
    for (const auto& s : series) {
      std::vector<std::pair<double, double>> pts = s.points;
      std::sort(pts.begin(), pts.end());
      svg << "<polyline data-estimator=\"" << s.estimator
          << "\" fill=\"none\" stroke=\"" << svg_color(s.estimator)
          << "\" stroke-width=\"1.8\" points=\"";
      for (std::size_t i = 0; i < pts.size(); ++i) {
        if (i) svg << ' ';
        svg << x_of(pts[i].first) << ',' << y_of(pts[i].second);
      }
      svg << "\"/>\n";
      svg << "<line x1=\"" << ox + chart_w + 12 << "\" y1=\"" << legend_y << "\" x2=\""
          << ox + chart_w + 34 << "\" y2=\"" << legend_y << "\" stroke=\""
          << svg_color(s.estimator) << "\" stroke-width=\"1.8\"/>\n"
          << "<text x=\"" << ox + chart_w + 40 << "\" y=\"" << legend_y + 4 << "\">"
          << s.estimator << "</text>\n";
      legend_y += 18.0;
    }
    svg << "<line x1=\"" << ox + chart_w + 12 << "\" y1=\"" << legend_y << "\" x2=\""
        << ox + chart_w + 34 << "\" y2=\"" << legend_y
        << "\" stroke=\"#888\" stroke-dasharray=\"5,4\"/>\n"
        << "<text x=\"" << ox + chart_w + 40 << "\" y=\"" << legend_y + 4
        << "\">identity</text>\n";

    chart_top += chart_h + mt + mb;
  }
  svg << "</svg>\n";

  std::ofstream out(file, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write plot file " + file.string());
  out << svg.str();
  if (!out) throw std::runtime_error("write failed for plot file " + file.string());
}

}  // namespace nearmimo
