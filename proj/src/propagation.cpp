// SPDX-License-Identifier: Apache-2.0
// nearmimo: near-field distributed MIMO channel simulation and estimation

#include "nearmimo/propagation.hpp"

#include <cmath>
#include <numbers>
#include <string>

namespace nearmimo {

std::complex<double> steering_from_distance(double d, double wavelength,
                                            SteeringMode mode) {
  const double phase = 2.0 * std::numbers::pi * d / wavelength;
  const std::complex<double> e{std::cos(phase), std::sin(phase)};
  const double u = 4.0 * std::numbers::pi * d / wavelength;
  switch (mode) {
    case SteeringMode::squared_path_loss:
      return e / (u * u);
    case SteeringMode::amplitude_path_loss:
      return e / u;
    case SteeringMode::phase_only:
      return e;
  }
  return e;
}

std::complex<double> steering(const Location& src, const Location& dst,
                              double wavelength, SteeringMode mode) {
  if (!(wavelength > 0.0))
    throw std::invalid_argument("steering: wavelength must be positive");
  const double d = distance(src, dst);
  if (d < wavelength / 100.0)
    throw TooCloseError("steering: points closer than wavelength/100 (d = " +
                        std::to_string(d) + " m)");
  return steering_from_distance(d, wavelength, mode);
}

void validate_antenna_array(const AntennaArray& array) {
  if (array.locations.empty())
    throw std::invalid_argument("antenna array: at least one antenna required");
  for (std::size_t i = 0; i < array.locations.size(); ++i)
    for (std::size_t j = i + 1; j < array.locations.size(); ++j)
      if (distance(array.locations[i], array.locations[j]) < 1e-6)
        throw std::invalid_argument(
            "antenna array: antennas " + std::to_string(i) + " and " +
            std::to_string(j) + " closer than 1e-6 m");
}

namespace {

struct Image {
  Location location;
  double gain = 1.0;
  WallPath path;
};

// Successive mirroring across wall lines, immediate repeats excluded.
// Output order: ascending reflection order, then path-lexicographic.
std::vector<Image> enumerate_images(const Location& p, const Environment& env,
                                    int max_order) {
  if (max_order < 0)
    throw std::invalid_argument("enumerate images: max order must be >= 0");
  std::vector<Image> out;
  out.push_back({p, 1.0, {}});
  std::size_t level_begin = 0;
  std::size_t level_end = 1;
  for (int order = 1; order <= max_order; ++order) {
    for (std::size_t i = level_begin; i < level_end; ++i) {
      for (int wi = 0; wi < static_cast<int>(env.walls.size()); ++wi) {
        if (!out[i].path.empty() && out[i].path.back() == wi) continue;
        Image img;
        img.location = mirror_point(out[i].location, line_of(env.walls[wi]));
        img.gain = out[i].gain * env.walls[wi].reflection_coefficient;
        img.path = out[i].path;
        img.path.push_back(wi);
        out.push_back(std::move(img));
      }
    }
    level_begin = level_end;
    level_end = out.size();
  }
  return out;
}

}  // namespace

std::vector<VirtualSource> enumerate_virtual_sources(const Location& tx,
                                                     const Environment& env,
                                                     int max_order) {
  const double eps = 1e-9;
  if (tx.x < -eps || tx.x > env.width + eps || tx.y < -eps || tx.y > env.depth + eps)
    throw std::invalid_argument("enumerate_virtual_sources: transmitter outside the room");
  std::vector<VirtualSource> out;
  for (auto& img : enumerate_images(tx, env, max_order))
    out.push_back({img.location,
                   {img.gain, 0.0},
                   static_cast<int>(img.path.size()),
                   std::move(img.path)});
  return out;
}

std::vector<std::vector<VirtualSink>> enumerate_virtual_sinks(
    const AntennaArray& array, const Environment& env, int max_order) {
  validate_antenna_array(array);
  std::vector<std::vector<VirtualSink>> out(array.size());
  for (std::size_t m = 0; m < array.size(); ++m) {
    for (auto& img : enumerate_images(array.locations[m], env, max_order))
      out[m].push_back({static_cast<int>(m),
                        img.location,
                        {img.gain, 0.0},
                        static_cast<int>(img.path.size()),
                        std::move(img.path)});
  }
  return out;
}

ChannelVector channel_from_sources(const Transmitter& tx,
                                   const std::vector<VirtualSource>& sources,
                                   const AntennaArray& array,
                                   const Environment& env, double wavelength,
                                   SteeringMode mode) {
  validate_antenna_array(array);
  if (!(std::abs(tx.amplitude) > 0.0))
    throw std::invalid_argument("channel_from_sources: transmitter amplitude is zero");
  ChannelVector h{std::vector<std::complex<double>>(array.size()), wavelength};
  for (std::size_t m = 0; m < array.size(); ++m) {
    std::complex<double> acc{0.0, 0.0};
    for (const auto& s : sources) {
      if (!visibility(s.location, s.path, env, array.locations[m])) continue;
      acc += s.amplitude * steering(s.location, array.locations[m], wavelength, mode);
    }
    h.coefficients[m] = tx.amplitude * acc;
  }
  return h;
}

ChannelVector channel_from_sinks(const Transmitter& tx,
                                 const std::vector<std::vector<VirtualSink>>& sinks,
                                 const Environment& env, double wavelength,
                                 SteeringMode mode) {
  if (!(std::abs(tx.amplitude) > 0.0))
    throw std::invalid_argument("channel_from_sinks: transmitter amplitude is zero");
  ChannelVector h{std::vector<std::complex<double>>(sinks.size()), wavelength};
  for (std::size_t m = 0; m < sinks.size(); ++m) {
    std::complex<double> acc{0.0, 0.0};
    for (const auto& k : sinks[m]) {
      if (!visibility(k.location, k.path, env, tx.location)) continue;
      acc += k.gain * steering(tx.location, k.location, wavelength, mode);
    }
    h.coefficients[m] = tx.amplitude * acc;
  }
  return h;
}

}  // namespace nearmimo
