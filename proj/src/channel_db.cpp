// SPDX-License-Identifier: Apache-2.0
// nearmimo: near-field distributed MIMO channel simulation and estimation

#include "nearmimo/channel_db.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <utility>

#include "json.hpp"

namespace nearmimo {

using json = nlohmann::json;

ChannelDatabase build_db_from_environment(const AntennaArray& array,
                                          const Environment& env, int max_order,
                                          double wavelength) {
  validate_antenna_array(array);
  if (!(wavelength > 0.0))
    throw std::invalid_argument("build_db_from_environment: wavelength must be positive");
  ChannelDatabase db;
  db.wavelength = wavelength;
  db.array_locations = array.locations;
  db.sinks = enumerate_virtual_sinks(array, env, max_order);
  db.walls_used = env.walls;
  return db;
}

WallEstimate infer_wall(const SourceEstimate& main, const SourceEstimate& mirror,
                        const WallInferenceOptions& options) {
  if (distance(main.location, mirror.location) < 1e-6)
    throw std::invalid_argument("infer_wall: main and mirror locations coincide");
  const double main_mag = std::abs(main.amplitude);
  const double mirror_mag = std::abs(mirror.amplitude);
  if (!(main_mag > 0.0))
    throw std::invalid_argument("infer_wall: main amplitude is zero");
  if (!(mirror_mag > 0.0))
    throw std::invalid_argument("infer_wall: mirror amplitude is zero");

  double ratio = mirror_mag / main_mag;
  if (options.compensate_path_loss) {
    const double d_main = distance(main.location, options.reference);
    const double d_mirror = distance(mirror.location, options.reference);
    if (!(d_main > 0.0) || !(d_mirror > 0.0))
      throw std::invalid_argument("infer_wall: reference coincides with a source");
    double exponent = 0.0;
    if (options.loss_law == SteeringMode::squared_path_loss) exponent = 2.0;
    if (options.loss_law == SteeringMode::amplitude_path_loss) exponent = 1.0;
    ratio *= std::pow(d_mirror / d_main, exponent);
  }

  WallEstimate est;
  est.line = perpendicular_bisector(main.location, mirror.location);
  // ratios above 1 are unphysical; keep them (up to the 1.5 slack) but mark
  // the inference as suspect through the confidence
  est.confidence = 1.0 / (1.0 + options.generating_evm_linear);
  if (ratio > 1.0) est.confidence /= ratio;
  est.reflection_coefficient = std::min(ratio, 1.5);
  return est;
}

namespace {

// Clips an infinite line to the rectangle [0,w] x [0,d]; nullopt when the
// intersection is empty or degenerate.
std::optional<std::pair<Location, Location>> clip_line_to_room(const WallLine& line,
                                                               double w, double d) {
  const double dir_x = -line.normal_y;
  const double dir_y = line.normal_x;
  double t_min = -std::numeric_limits<double>::infinity();
  double t_max = std::numeric_limits<double>::infinity();
  const auto clip_axis = [&](double origin, double dir, double lo, double hi) {
    if (std::abs(dir) < 1e-15) return origin >= lo && origin <= hi;
    double t1 = (lo - origin) / dir;
    double t2 = (hi - origin) / dir;
    if (t1 > t2) std::swap(t1, t2);
    t_min = std::max(t_min, t1);
    t_max = std::min(t_max, t2);
    return true;
  };
  if (!clip_axis(line.point.x, dir_x, 0.0, w)) return std::nullopt;
  if (!clip_axis(line.point.y, dir_y, 0.0, d)) return std::nullopt;
  if (!(t_max - t_min >= 1e-9)) return std::nullopt;
  const Location a{line.point.x + t_min * dir_x, line.point.y + t_min * dir_y, 0.0};
  const Location b{line.point.x + t_max * dir_x, line.point.y + t_max * dir_y, 0.0};
  return std::make_pair(a, b);
}

}  // namespace

ChannelDatabase build_db_from_walls(const AntennaArray& array,
                                    const std::vector<WallEstimate>& walls,
                                    double room_width, double room_depth,
                                    int max_order, double wavelength) {
  std::vector<Wall> segments;
  for (const auto& est : walls) {
    const auto seg = clip_line_to_room(est.line, room_width, room_depth);
    if (!seg) continue;
    // physical coefficients cannot exceed 1; inference slack is clamped away
    segments.emplace_back(seg->first, seg->second,
                          std::min(est.reflection_coefficient, 1.0));
  }
  const Environment env{std::move(segments), room_width, room_depth};
  return build_db_from_environment(array, env, max_order, wavelength);
}

Environment environment_of(const ChannelDatabase& db) {
  double max_x = 0.0;
  double max_y = 0.0;
  for (const auto& w : db.walls_used) {
    max_x = std::max({max_x, w.a.x, w.b.x});
    max_y = std::max({max_y, w.a.y, w.b.y});
  }
  for (const auto& l : db.array_locations) {
    max_x = std::max(max_x, l.x);
    max_y = std::max(max_y, l.y);
  }
  if (!(max_x > 0.0)) max_x = 1.0;
  if (!(max_y > 0.0)) max_y = 1.0;
  return Environment{db.walls_used, max_x, max_y};
}

namespace {

json location_to_json(const Location& l) { return json::array({l.x, l.y, l.z}); }

void require_finite(double v, const std::string& path) {
  if (!std::isfinite(v)) throw SchemaError(path + ": value is not finite");
}

const json& require_field(const json& obj, const char* key, const std::string& path) {
  const auto it = obj.find(key);
  if (it == obj.end()) throw SchemaError(path + "." + key + ": missing field");
  return *it;
}

void reject_unknown(const json& obj, std::initializer_list<const char*> allowed,
                    const std::string& path) {
  for (const auto& item : obj.items()) {
    bool known = false;
    for (const char* k : allowed)
      if (item.key() == k) known = true;
    if (!known) throw SchemaError(path + "." + item.key() + ": unknown field");
  }
}

double parse_number(const json& v, const std::string& path) {
  if (!v.is_number()) throw SchemaError(path + ": expected a number");
  return v.get<double>();
}

int parse_int(const json& v, const std::string& path) {
  if (!v.is_number_integer()) throw SchemaError(path + ": expected an integer");
  return v.get<int>();
}

Location parse_location(const json& v, const std::string& path) {
  if (!v.is_array() || v.size() != 3)
    throw SchemaError(path + ": expected [x, y, z]");
  return {parse_number(v[0], path + "[0]"), parse_number(v[1], path + "[1]"),
          parse_number(v[2], path + "[2]")};
}

}  // namespace

std::string serialize_db(const ChannelDatabase& db) {
  if (db.sinks.size() != db.array_locations.size())
    throw SchemaError("sinks: expected one sink list per antenna");
  require_finite(db.wavelength, "wavelength");

  json doc;
  doc["formatVersion"] = db.format_version;
  doc["wavelength"] = db.wavelength;
  json arr = json::array();
  for (const auto& l : db.array_locations) {
    require_finite(l.x, "arrayLocations");
    require_finite(l.y, "arrayLocations");
    require_finite(l.z, "arrayLocations");
    arr.push_back(location_to_json(l));
  }
  doc["arrayLocations"] = std::move(arr);

  json walls = json::array();
  for (const auto& w : db.walls_used) {
    json jw;
    jw["a"] = location_to_json(w.a);
    jw["b"] = location_to_json(w.b);
    jw["reflectionCoefficient"] = w.reflection_coefficient;
    walls.push_back(std::move(jw));
  }
  doc["walls"] = std::move(walls);

  json sinks = json::array();
  for (const auto& per_antenna : db.sinks) {
    json list = json::array();
    for (const auto& s : per_antenna) {
      require_finite(s.gain.real(), "sinks.gainReal");
      require_finite(s.gain.imag(), "sinks.gainImag");
      json js;
      js["order"] = s.order;
      js["wallPath"] = s.path;
      js["location"] = location_to_json(s.location);
      js["gainReal"] = s.gain.real();
      js["gainImag"] = s.gain.imag();
      list.push_back(std::move(js));
    }
    sinks.push_back(std::move(list));
  }
  doc["sinks"] = std::move(sinks);
  return doc.dump(2) + "\n";
}

ChannelDatabase deserialize_db(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw SchemaError(std::string("document: not valid structured text (") + e.what() + ")");
  }
  if (!doc.is_object()) throw SchemaError("document: expected an object");
  reject_unknown(doc, {"formatVersion", "wavelength", "arrayLocations", "walls", "sinks"},
                 "document");

  const int version = parse_int(require_field(doc, "formatVersion", "document"),
                                "document.formatVersion");
  if (version != kDatabaseFormatVersion)
    throw VersionError("unsupported formatVersion " + std::to_string(version) +
                       " (this build reads version " +
                       std::to_string(kDatabaseFormatVersion) + ")");

  ChannelDatabase db;
  db.format_version = version;
  db.wavelength = parse_number(require_field(doc, "wavelength", "document"),
                               "document.wavelength");
  if (!(db.wavelength > 0.0))
    throw SchemaError("document.wavelength: must be positive");

  const json& jarr = require_field(doc, "arrayLocations", "document");
  if (!jarr.is_array() || jarr.empty())
    throw SchemaError("document.arrayLocations: expected a non-empty list");
  for (std::size_t i = 0; i < jarr.size(); ++i)
    db.array_locations.push_back(
        parse_location(jarr[i], "arrayLocations[" + std::to_string(i) + "]"));

  const json& jwalls = require_field(doc, "walls", "document");
  if (!jwalls.is_array()) throw SchemaError("document.walls: expected a list");
  for (std::size_t i = 0; i < jwalls.size(); ++i) {
    const std::string path = "walls[" + std::to_string(i) + "]";
    const json& jw = jwalls[i];
    if (!jw.is_object()) throw SchemaError(path + ": expected an object");
    reject_unknown(jw, {"a", "b", "reflectionCoefficient"}, path);
    try {
      db.walls_used.emplace_back(
          parse_location(require_field(jw, "a", path), path + ".a"),
          parse_location(require_field(jw, "b", path), path + ".b"),
          parse_number(require_field(jw, "reflectionCoefficient", path),
                       path + ".reflectionCoefficient"));
    } catch (const std::invalid_argument& e) {
      throw SchemaError(path + ": " + e.what());
    }
  }

  const json& jsinks = require_field(doc, "sinks", "document");
  if (!jsinks.is_array() || jsinks.size() != db.array_locations.size())
    throw SchemaError("document.sinks: expected one sink list per antenna");
  const int wall_count = static_cast<int>(db.walls_used.size());
  for (std::size_t m = 0; m < jsinks.size(); ++m) {
    const std::string mpath = "sinks[" + std::to_string(m) + "]";
    if (!jsinks[m].is_array() || jsinks[m].empty())
      throw SchemaError(mpath + ": expected a non-empty list");
    std::vector<VirtualSink> list;
    int order0_count = 0;
    for (std::size_t k = 0; k < jsinks[m].size(); ++k) {
      const std::string path = mpath + "[" + std::to_string(k) + "]";
      const json& js = jsinks[m][k];
      if (!js.is_object()) throw SchemaError(path + ": expected an object");
      reject_unknown(js, {"order", "wallPath", "location", "gainReal", "gainImag"}, path);
      VirtualSink s;
      s.antenna_index = static_cast<int>(m);
      s.order = parse_int(require_field(js, "order", path), path + ".order");
      const json& jpath = require_field(js, "wallPath", path);
      if (!jpath.is_array()) throw SchemaError(path + ".wallPath: expected a list");
      for (std::size_t i = 0; i < jpath.size(); ++i) {
        const int id = parse_int(jpath[i], path + ".wallPath[" + std::to_string(i) + "]");
        if (id < 0 || id >= wall_count)
          throw SchemaError(path + ".wallPath[" + std::to_string(i) +
                            "]: references wall " + std::to_string(id) +
                            " not present in walls");
        if (!s.path.empty() && s.path.back() == id)
          throw SchemaError(path + ".wallPath: consecutive duplicate wall " +
                            std::to_string(id));
        s.path.push_back(id);
      }
      if (s.order != static_cast<int>(s.path.size()))
        throw SchemaError(path + ".order: does not match wallPath length");
      s.location = parse_location(require_field(js, "location", path), path + ".location");
      s.gain = {parse_number(require_field(js, "gainReal", path), path + ".gainReal"),
                parse_number(require_field(js, "gainImag", path), path + ".gainImag")};
      if (s.order == 0) {
        ++order0_count;
        const Location& ant = db.array_locations[m];
        if (s.location.x != ant.x || s.location.y != ant.y || s.location.z != ant.z)
          throw SchemaError(path + ".location: order-0 sink must equal the antenna location");
        if (s.gain != std::complex<double>{1.0, 0.0})
          throw SchemaError(path + ".gainReal: order-0 sink must have gain 1");
      }
      list.push_back(std::move(s));
    }
    if (order0_count != 1)
      throw SchemaError(mpath + ": expected exactly one order-0 sink, found " +
                        std::to_string(order0_count));
    db.sinks.push_back(std::move(list));
  }
  return db;
}

}  // namespace nearmimo
