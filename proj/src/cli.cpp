// SPDX-License-Identifier: Apache-2.0
// nearmimo: near-field distributed MIMO channel simulation and estimation

#include "nearmimo/cli.hpp"

#include <complex>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "nearmimo/bench.hpp"
#include "nearmimo/channel_db.hpp"

namespace nearmimo {

namespace {

using json = nlohmann::json;

constexpr int kExitOk = 0;
constexpr int kExitRuntime = 1;
constexpr int kExitConfig = 2;

struct Snapshot {
  double wavelength = 0.0;
  AntennaArray array;
  std::vector<std::complex<double>> coefficients;
  std::optional<std::vector<std::complex<double>>> truth;
  std::optional<Location> true_location;
};

Location parse_location(const json& v, const std::string& path) {
  if (!v.is_array() || v.size() != 3 || !v[0].is_number() || !v[1].is_number() ||
      !v[2].is_number())
    throw ConfigError(path + ": expected [x, y, z]");
  return {v[0].get<double>(), v[1].get<double>(), v[2].get<double>()};
}

std::vector<std::complex<double>> parse_coefficients(const json& v,
                                                     const std::string& path) {
  if (!v.is_array()) throw ConfigError(path + ": expected a list of [re, im] pairs");
  std::vector<std::complex<double>> out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const json& c = v[i];
    if (!c.is_array() || c.size() != 2 || !c[0].is_number() || !c[1].is_number())
      throw ConfigError(path + "[" + std::to_string(i) + "]: expected [re, im]");
    out.emplace_back(c[0].get<double>(), c[1].get<double>());
  }
  return out;
}

Snapshot load_snapshot(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw ConfigError("cannot open snapshot file " + file.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("snapshot file " + file.string() + " is not valid: " + e.what());
  }
  if (!doc.is_object()) throw ConfigError("snapshot: expected an object");
  for (const auto& item : doc.items()) {
    const std::string& k = item.key();
    if (k != "wavelength_m" && k != "array_locations" && k != "coefficients" &&
        k != "truth_coefficients" && k != "true_location")
      throw ConfigError("snapshot: unknown field '" + k + "'");
  }
  if (!doc.contains("wavelength_m") || !doc["wavelength_m"].is_number())
    throw ConfigError("snapshot: wavelength_m: expected a number");
  Snapshot snap;
  snap.wavelength = doc["wavelength_m"].get<double>();
  if (!(snap.wavelength > 0.0))
    throw ConfigError("snapshot: wavelength_m: must be positive");
  if (!doc.contains("array_locations") || !doc["array_locations"].is_array())
    throw ConfigError("snapshot: array_locations: expected a list");
  for (std::size_t i = 0; i < doc["array_locations"].size(); ++i)
    snap.array.locations.push_back(parse_location(
        doc["array_locations"][i], "snapshot: array_locations[" + std::to_string(i) + "]"));
  if (!doc.contains("coefficients"))
    throw ConfigError("snapshot: coefficients: missing field");
  snap.coefficients = parse_coefficients(doc["coefficients"], "snapshot: coefficients");
  if (snap.coefficients.size() != snap.array.locations.size())
    throw ConfigError("snapshot: coefficients: length must equal array_locations length");
  if (doc.contains("truth_coefficients")) {
    snap.truth = parse_coefficients(doc["truth_coefficients"],
                                    "snapshot: truth_coefficients");
    if (snap.truth->size() != snap.coefficients.size())
      throw ConfigError("snapshot: truth_coefficients: length must equal coefficients length");
  }
  if (doc.contains("true_location"))
    snap.true_location = parse_location(doc["true_location"], "snapshot: true_location");
  return snap;
}

std::string fmt_complex(const std::complex<double>& c) {
  std::ostringstream os;
  os << format_double(c.real()) << (c.imag() < 0 ? " - " : " + ")
     << format_double(std::abs(c.imag())) << "j  (|g| = "
     << format_double(std::abs(c)) << ", arg = " << format_double(std::arg(c))
     << " rad)";
  return os.str();
}

ChannelDatabase load_db_file(const std::filesystem::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw ConfigError("cannot open database file " + file.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return deserialize_db(buf.str());
}

int cmd_scenario_init(const std::filesystem::path& out) {
  save_config(ScenarioConfig{}, out);
  std::cout << "wrote default scenario config to " << out.string() << "\n";
  return kExitOk;
}

int cmd_bench_run(const std::filesystem::path& config_file,
                  const std::filesystem::path& out_dir,
                  std::optional<int> trials_override,
                  std::optional<std::uint64_t> seed_override) {
  ScenarioConfig cfg = load_config(config_file);
  if (trials_override) cfg.trials = *trials_override;
  if (seed_override) cfg.master_seed = *seed_override;
  cfg.validate();

  std::filesystem::create_directories(out_dir);
  const auto result = run_scenario(cfg);
  const auto csv_path = out_dir / "results.csv";
  const auto svg_path = out_dir / "evm_curves.svg";
  emit_csv(result.table, csv_path);
  emit_plot(result.table, svg_path);

  std::cout << "scenario,input_evm_db,estimator,mean_output_evm_db\n";
  for (const auto& r : result.table.rows)
    std::cout << r.scenario << "," << format_double(r.input_evm_db) << ","
              << r.estimator << "," << format_double(r.mean_output_evm_db) << "\n";
  std::cout << "wrote " << csv_path.string() << " and " << svg_path.string() << "\n";
  return kExitOk;
}

int cmd_db_build(const std::filesystem::path& config_file,
                 const std::filesystem::path& out,
                 std::optional<double> spacing_lambda) {
  const ScenarioConfig cfg = load_config(config_file);
  const double spacing =
      spacing_lambda ? *spacing_lambda : cfg.antenna_spacings_lambda.front();
  if (!(spacing > 0.0)) throw ConfigError("--spacing-lambda: must be positive");
  const AntennaArray array =
      cfg.antenna_placement == AntennaPlacement::perimeter
          ? make_perimeter_array(cfg.room_width_m, cfg.room_depth_m,
                                 spacing * cfg.wavelength_m)
          : make_linear_array(cfg.room_width_m, spacing * cfg.wavelength_m);
  const Environment env = make_room(cfg.room_width_m, cfg.room_depth_m,
                                    cfg.wall_reflection_coefficient);
  const ChannelDatabase db =
      build_db_from_environment(array, env, cfg.max_order, cfg.wavelength_m);
  std::ofstream file(out, std::ios::binary);
  if (!file) throw std::runtime_error("cannot write database file " + out.string());
  file << serialize_db(db);
  if (!file) throw std::runtime_error("write failed for database file " + out.string());
  std::cout << "wrote channel database (" << db.array_locations.size()
            << " antennas) to " << out.string() << "\n";
  return kExitOk;
}

int cmd_db_inspect(const std::filesystem::path& file) {
  const ChannelDatabase db = load_db_file(file);
  std::cout << "formatVersion: " << db.format_version << "\n"
            << "wavelength: " << format_double(db.wavelength) << " m\n"
            << "antennas: " << db.array_locations.size() << "\n";
  std::size_t min_sinks = db.sinks.empty() ? 0 : db.sinks.front().size();
  std::size_t max_sinks = min_sinks;
  std::size_t total = 0;
  for (const auto& list : db.sinks) {
    min_sinks = std::min(min_sinks, list.size());
    max_sinks = std::max(max_sinks, list.size());
    total += list.size();
  }
  if (min_sinks == max_sinks)
    std::cout << "sinks per antenna: " << min_sinks << "\n";
  else
    std::cout << "sinks per antenna: " << min_sinks << " to " << max_sinks << "\n";
  std::cout << "total sinks: " << total << "\n"
            << "walls: " << db.walls_used.size() << "\n";
  for (std::size_t i = 0; i < db.walls_used.size(); ++i) {
    const Wall& w = db.walls_used[i];
    std::cout << "  wall " << i << ": (" << format_double(w.a.x) << ", "
              << format_double(w.a.y) << ") - (" << format_double(w.b.x) << ", "
              << format_double(w.b.y)
              << "), r = " << format_double(w.reflection_coefficient) << "\n";
  }
  return kExitOk;
}

int cmd_estimate(const std::filesystem::path& db_file,
                 const std::filesystem::path& snapshot_file,
                 const std::string& method, int num_sources) {
  const ChannelDatabase db = load_db_file(db_file);
  const Snapshot snap = load_snapshot(snapshot_file);
  if (snap.array.locations.size() != db.array_locations.size())
    throw ConfigError("snapshot antenna count does not match the database");
  if (std::abs(snap.wavelength - db.wavelength) > 1e-12 * db.wavelength)
    throw ConfigError("snapshot wavelength does not match the database");

  const Environment env = environment_of(db);
  const SearchParams params = SearchParams::defaults_for(snap.wavelength);
  const NoisyChannel noisy{snap.coefficients, snap.wavelength, 0.0};

  ChannelVector reconstructed;
  if (method == "multisink") {
    const SearchRegion region{0.0, env.width, 0.0, env.depth};
    const auto res = estimate_multisink(noisy, db, env, region, params);
    std::cout << "method: multisink\n"
              << "location: (" << format_double(res.user_location.x) << ", "
              << format_double(res.user_location.y) << ", "
              << format_double(res.user_location.z) << ")\n"
              << "amplitude: " << fmt_complex(res.user_amplitude) << "\n"
              << "peak metric: " << format_double(res.peak_metric) << "\n";
    if (snap.true_location)
      std::cout << "location error: "
                << format_double(distance(res.user_location, *snap.true_location))
                << " m\n";
    reconstructed = res.reconstructed;
  } else if (method == "multisource") {
    const SearchRegion region{-env.width, 2.0 * env.width, -env.depth,
                              2.0 * env.depth};
    const auto res =
        estimate_multisource(noisy, snap.array, num_sources, region, params);
    std::cout << "method: multisource\n";
    for (std::size_t k = 0; k < res.sources.size(); ++k) {
      const auto& s = res.sources[k];
      std::cout << "source " << k << ": location (" << format_double(s.location.x)
                << ", " << format_double(s.location.y) << ", "
                << format_double(s.location.z)
                << "), amplitude " << fmt_complex(s.amplitude) << "\n";
    }
    if (snap.true_location && !res.sources.empty()) {
      const auto strongest = std::max_element(
          res.sources.begin(), res.sources.end(),
          [](const SourceEstimate& a, const SourceEstimate& b) {
            return std::abs(a.amplitude) < std::abs(b.amplitude);
          });
      std::cout << "location error (strongest source): "
                << format_double(distance(strongest->location, *snap.true_location))
                << " m\n";
    }
    reconstructed = res.reconstructed;
  } else {
    throw ConfigError("--method: expected \"multisource\" or \"multisink\"");
  }

  if (snap.truth) {
    const ChannelVector truth{*snap.truth, snap.wavelength};
    std::cout << "output EVM: " << format_double(evm_db(reconstructed, truth))
              << " dB\n";
  }
  return kExitOk;
}

}  // namespace

int run_cli(int argc, const char* const* argv) {
  CLI::App app{"near-field distributed MIMO channel simulation and estimation"};
  app.require_subcommand(1);

  // scenario init
  auto* scenario = app.add_subcommand("scenario", "scenario config helpers");
  scenario->require_subcommand(1);
  auto* scenario_init =
      scenario->add_subcommand("init", "write the default scenario config");
  std::string scenario_out = "scenario.json";
  scenario_init->add_option("--out", scenario_out, "output config file");

  // bench run
  auto* bench = app.add_subcommand("bench", "Monte Carlo EVM benchmarks");
  bench->require_subcommand(1);
  auto* bench_run = bench->add_subcommand("run", "run the configured scenarios");
  std::string bench_config;
  std::string bench_out = "bench_out";
  int bench_trials = -1;
  std::int64_t bench_seed = -1;
  bench_run->add_option("--config", bench_config, "scenario config file")->required();
  bench_run->add_option("--out", bench_out, "output directory");
  bench_run->add_option("--trials", bench_trials, "override the trial count");
  bench_run->add_option("--seed", bench_seed, "override the master seed");

  // db build / inspect
  auto* db = app.add_subcommand("db", "channel database tools");
  db->require_subcommand(1);
  auto* db_build = db->add_subcommand("build", "build a database from a scenario config");
  std::string db_config;
  std::string db_out;
  double db_spacing = -1.0;
  db_build->add_option("--config", db_config, "scenario config file")->required();
  db_build->add_option("--out", db_out, "output database file")->required();
  db_build->add_option("--spacing-lambda", db_spacing,
                       "antenna spacing in wavelengths (default: first configured)");
  auto* db_inspect = db->add_subcommand("inspect", "summarize a database file");
  std::string db_file;
  db_inspect->add_option("dbfile", db_file, "database file")->required();

  // estimate
  auto* estimate = app.add_subcommand("estimate", "single-shot estimation from a snapshot");
  std::string est_db, est_snapshot, est_method;
  int est_k = 5;
  estimate->add_option("--db", est_db, "channel database file")->required();
  estimate->add_option("--snapshot", est_snapshot, "snapshot file")->required();
  estimate->add_option("--method", est_method, "multisource or multisink")->required();
  estimate->add_option("--k", est_k, "source count for multisource (default 5)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    std::cout << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n\n" << app.help();
    return kExitConfig;
  }

  try {
    if (scenario_init->parsed()) return cmd_scenario_init(scenario_out);
    if (bench_run->parsed())
      return cmd_bench_run(bench_config, bench_out,
                           bench_trials >= 0 ? std::optional<int>(bench_trials)
                                             : std::nullopt,
                           bench_seed >= 0
                               ? std::optional<std::uint64_t>(
                                     static_cast<std::uint64_t>(bench_seed))
                               : std::nullopt);
    if (db_build->parsed())
      return cmd_db_build(db_config, db_out,
                          db_spacing > 0.0 ? std::optional<double>(db_spacing)
                                           : std::nullopt);
    if (db_inspect->parsed()) return cmd_db_inspect(db_file);
    if (estimate->parsed()) return cmd_estimate(est_db, est_snapshot, est_method, est_k);
    std::cerr << app.help();
    return kExitConfig;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const VersionError& e) {
    std::cerr << "database version error: " << e.what() << "\n";
    return kExitRuntime;
  } catch (const SchemaError& e) {
    std::cerr << "database schema error: " << e.what() << "\n";
    return kExitRuntime;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
}

}  // namespace nearmimo
