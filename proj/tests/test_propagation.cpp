// SPDX-License-Identifier: Apache-2.0
// nearmimo: near-field distributed MIMO channel simulation and estimation

#include "doctest.h"
#include "nearmimo/bench.hpp"
#include "nearmimo/propagation.hpp"
#include "nearmimo/rng.hpp"

#include <cmath>
#include <complex>
#include <numbers>

using namespace nearmimo;

namespace {

Environment rect_room(double w, double d, double r0, double r1, double r2, double r3) {
  std::vector<Wall> walls;
  walls.emplace_back(Location{0, 0, 0}, Location{w, 0, 0}, r0);
  walls.emplace_back(Location{w, 0, 0}, Location{w, d, 0}, r1);
  walls.emplace_back(Location{w, d, 0}, Location{0, d, 0}, r2);
  walls.emplace_back(Location{0, d, 0}, Location{0, 0, 0}, r3);
  return Environment{std::move(walls), w, d};
}

Environment hallway() {
  std::vector<Wall> walls;
  walls.emplace_back(Location{0.0, 1.0, 0.0}, Location{10.0, 1.0, 0.0}, 1.0);
  walls.emplace_back(Location{0.0, 0.0, 0.0}, Location{3.0, 0.0, 0.0}, 1.0);
  return Environment{std::move(walls), 10.0, 1.0};
}

AntennaArray perimeter_array(const Environment& env, int count) {
  const double perimeter = 2.0 * (env.width + env.depth);
  return make_perimeter_array(env.width, env.depth, perimeter / count);
}

struct RandomScene {
  Environment env{std::vector<Wall>{}, 1.0, 1.0};
  AntennaArray array;
  Transmitter tx;
  double wavelength = 0.2;
};

RandomScene random_scene(Rng& rng, int max_antennas) {
  RandomScene s;
  const double w = rng.uniform(3.0, 10.0);
  const double d = rng.uniform(3.0, 10.0);
  s.wavelength = rng.uniform(0.05, 0.5);
  s.env = rect_room(w, d, rng.uniform(0.2, 1.0), rng.uniform(0.2, 1.0),
                    rng.uniform(0.2, 1.0), rng.uniform(0.2, 1.0));
  s.array = perimeter_array(s.env, rng.uniform_int(2, max_antennas));
  const double margin = s.wavelength / 2.0;
  s.tx.location = {rng.uniform(margin, w - margin), rng.uniform(margin, d - margin), 0.0};
  s.tx.amplitude = {rng.uniform(-2.0, 2.0), rng.uniform(-2.0, 2.0)};
  if (std::abs(s.tx.amplitude) < 0.1) s.tx.amplitude = {1.0, 0.0};
  return s;
}

double rel_err(const std::complex<double>& a, const std::complex<double>& b) {
  const double scale = std::max(std::abs(a), std::abs(b));
  if (scale == 0.0) return 0.0;
  return std::abs(a - b) / scale;
}

}  // namespace

TEST_SUITE("propagation") {

TEST_CASE("steering values at landmark distances") {
  const double lambda = 0.25;
  // d = lambda: full turn of phase, real positive 1/(4*pi)^2
  auto v = steering({0, 0, 0}, {lambda, 0, 0}, lambda);
  CHECK(v.real() == doctest::Approx(6.3325739776461107e-3).epsilon(1e-12));
  CHECK(std::abs(v.imag()) < 1e-15);
  // d = lambda/2: half turn, real negative 1/(2*pi)^2
  v = steering({0, 0, 0}, {lambda / 2, 0, 0}, lambda);
  CHECK(v.real() == doctest::Approx(-2.5330295910584444e-2).epsilon(1e-12));
  CHECK(std::abs(v.imag()) < 1e-14);
  // d = 5, lambda = 1: 1/(20*pi)^2
  v = steering({3, 4, 0}, {0, 0, 0}, 1.0);
  CHECK(v.real() == doctest::Approx(2.5330295910584443e-4).epsilon(1e-12));
  CHECK(std::abs(v.imag()) < 1e-16);
}

TEST_CASE("steering magnitude follows the squared loss and decreases") {
  const double lambda = 0.2;
  double prev = 1e9;
  for (double d = 0.5; d < 20.0; d *= 1.7) {
    const double mag = std::abs(steering({0, 0, 0}, {d, 0, 0}, lambda));
    const double expected = std::pow(lambda / (4.0 * std::numbers::pi * d), 2);
    CHECK(mag == doctest::Approx(expected).epsilon(1e-12));
    CHECK(mag < prev);
    prev = mag;
  }
}

TEST_CASE("steering alternative laws") {
  const double lambda = 0.2;
  const double d = 3.7;
  const double u = 4.0 * std::numbers::pi * d / lambda;
  CHECK(std::abs(steering({0, 0, 0}, {d, 0, 0}, lambda, SteeringMode::amplitude_path_loss)) ==
        doctest::Approx(1.0 / u).epsilon(1e-12));
  CHECK(std::abs(steering({0, 0, 0}, {d, 0, 0}, lambda, SteeringMode::phase_only)) ==
        doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("steering rejects the near singularity") {
  CHECK_THROWS_AS(steering({0, 0, 0}, {0.0019, 0, 0}, 0.2), TooCloseError);
  CHECK_NOTHROW(steering({0, 0, 0}, {0.0021, 0, 0}, 0.2));
}

TEST_CASE("enumerate_virtual_sources counts and ordering") {
  const Environment room = rect_room(6.4, 6.4, 1, 1, 1, 1);
  const Location tx{2.5, 3.1, 0};

  auto direct_only = enumerate_virtual_sources(tx, room, 0);
  REQUIRE(direct_only.size() == 1);
  CHECK(direct_only[0].order == 0);
  CHECK(direct_only[0].path.empty());
  CHECK(direct_only[0].amplitude == std::complex<double>{1.0, 0.0});

  auto first_order = enumerate_virtual_sources(tx, room, 1);
  REQUIRE(first_order.size() == 5);  // 1 original + 4 mirrors
  for (std::size_t k = 1; k < first_order.size(); ++k) {
    CHECK(first_order[k].order == 1);
    CHECK(first_order[k].path.size() == 1);
    CHECK(first_order[k].path[0] == static_cast<int>(k - 1));  // wall-index order
    const Location expected =
        mirror_point(tx, line_of(room.walls[first_order[k].path[0]]));
    CHECK(distance(first_order[k].location, expected) < 1e-12);
  }
}

TEST_CASE("image amplitudes multiply the wall coefficients") {
  const Environment room = rect_room(6.4, 6.4, 0.5, 0.8, 1.0, 0.9);
  const auto sources = enumerate_virtual_sources({3.0, 3.0, 0}, room, 2);
  for (const auto& s : sources) {
    double expected = 1.0;
    for (int id : s.path) expected *= room.walls[id].reflection_coefficient;
    CHECK(std::abs(s.amplitude - std::complex<double>{expected, 0.0}) < 1e-15);
    CHECK(s.order == static_cast<int>(s.path.size()));
    for (std::size_t i = 1; i < s.path.size(); ++i)
      CHECK(s.path[i] != s.path[i - 1]);
  }
  // two walls excluded as immediate repeats: 1 + 4 + 4*3 images
  CHECK(sources.size() == 17);
}

TEST_CASE("hallway visibility filter keeps three sources") {
  const Environment env = hallway();
  const Location src{0.5, 0.5, 0};
  const Location ap{9.0, 0.5, 0};
  const auto sources = enumerate_virtual_sources(src, env, 2);
  REQUIRE(sources.size() == 5);  // direct + 2 first order + 2 second order
  std::vector<WallPath> visible;
  for (const auto& s : sources)
    if (visibility(s.location, s.path, env, ap)) visible.push_back(s.path);
  REQUIRE(visible.size() == 3);
  CHECK(visible[0] == WallPath{});
  CHECK(visible[1] == WallPath{0});
  CHECK(visible[2] == WallPath{1, 0});
}

TEST_CASE("enumerate_virtual_sinks mirrors every antenna") {
  const Environment room = rect_room(6.4, 6.4, 1, 1, 1, 1);
  AntennaArray array = perimeter_array(room, 8);
  const auto sinks = enumerate_virtual_sinks(array, room, 1);
  REQUIRE(sinks.size() == array.size());
  for (std::size_t m = 0; m < array.size(); ++m) {
    REQUIRE(sinks[m].size() == 5);
    CHECK(sinks[m][0].order == 0);
    CHECK(sinks[m][0].gain == std::complex<double>{1.0, 0.0});
    CHECK(distance(sinks[m][0].location, array.locations[m]) == 0.0);
    CHECK(sinks[m][0].antenna_index == static_cast<int>(m));
    for (int w = 0; w < 4; ++w) {
      const Location expected = mirror_point(array.locations[m], line_of(room.walls[w]));
      CHECK(distance(sinks[m][1 + w].location, expected) < 1e-12);
    }
  }
  const auto direct = enumerate_virtual_sinks(array, room, 0);
  for (const auto& list : direct) CHECK(list.size() == 1);
}

TEST_CASE("single direct source gives the free-space channel") {
  const Environment room = rect_room(6.4, 6.4, 1, 1, 1, 1);
  AntennaArray array = perimeter_array(room, 16);
  const Transmitter tx{{2.2, 4.4, 0}, {0.7, -0.3}};
  const std::vector<VirtualSource> direct = {{tx.location, {1.0, 0.0}, 0, {}}};
  const auto h = channel_from_sources(tx, direct, array, room, 0.2);
  for (std::size_t m = 0; m < array.size(); ++m) {
    const auto expected = tx.amplitude * steering(tx.location, array.locations[m], 0.2);
    CHECK(std::abs(h.coefficients[m] - expected) < 1e-15);
  }
}

TEST_CASE("empty source list gives a zero channel") {
  const Environment room = rect_room(6.4, 6.4, 1, 1, 1, 1);
  AntennaArray array = perimeter_array(room, 4);
  const auto h = channel_from_sources({{1, 1, 0}, {1, 0}}, {}, array, room, 0.2);
  for (const auto& c : h.coefficients) CHECK(c == std::complex<double>{0.0, 0.0});
}

TEST_CASE("channel scales linearly with the transmitter amplitude") {
  const Environment room = rect_room(6.4, 6.4, 1, 1, 1, 1);
  AntennaArray array = perimeter_array(room, 12);
  const auto sources = enumerate_virtual_sources({3.3, 2.1, 0}, room, 1);
  const std::complex<double> g{0.4, 0.9};
  const std::complex<double> c{-1.7, 0.3};
  const auto h1 = channel_from_sources({{3.3, 2.1, 0}, g}, sources, array, room, 0.2);
  const auto h2 = channel_from_sources({{3.3, 2.1, 0}, c * g}, sources, array, room, 0.2);
  for (std::size_t m = 0; m < array.size(); ++m)
    CHECK(rel_err(h2.coefficients[m], c * h1.coefficients[m]) < 1e-15);
}

TEST_CASE("reciprocal path length through any wall") {
  Rng rng(0x9E0);
  for (int i = 0; i < 1000; ++i) {
    RandomScene s = random_scene(rng, 8);
    for (const auto& wall : s.env.walls) {
      const WallLine line = line_of(wall);
      const Location tx_img = mirror_point(s.tx.location, line);
      for (const auto& ant : s.array.locations) {
        const Location ant_img = mirror_point(ant, line);
        CHECK(std::abs(distance(tx_img, ant) - distance(s.tx.location, ant_img)) <= 1e-12);
      }
    }
  }
}

TEST_CASE("source and sink channel forms are dual at first order") {
  Rng rng(0xD0A1);
  double worst = 0.0;
  for (int i = 0; i < 200; ++i) {
    RandomScene s = random_scene(rng, 32);
    const auto sources = enumerate_virtual_sources(s.tx.location, s.env, 1);
    const auto sinks = enumerate_virtual_sinks(s.array, s.env, 1);
    const auto h_src =
        channel_from_sources(s.tx, sources, s.array, s.env, s.wavelength);
    const auto h_snk = channel_from_sinks(s.tx, sinks, s.env, s.wavelength);
    REQUIRE(h_src.coefficients.size() == h_snk.coefficients.size());
    for (std::size_t m = 0; m < h_src.coefficients.size(); ++m)
      worst = std::max(worst, rel_err(h_src.coefficients[m], h_snk.coefficients[m]));
  }
  CHECK(worst <= 1e-10);
}

TEST_CASE("duality also holds for second-order images") {
  Rng rng(0xD0A2);
  double worst = 0.0;
  for (int i = 0; i < 50; ++i) {
    RandomScene s = random_scene(rng, 12);
    const auto sources = enumerate_virtual_sources(s.tx.location, s.env, 2);
    const auto sinks = enumerate_virtual_sinks(s.array, s.env, 2);
    const auto h_src =
        channel_from_sources(s.tx, sources, s.array, s.env, s.wavelength);
    const auto h_snk = channel_from_sinks(s.tx, sinks, s.env, s.wavelength);
    for (std::size_t m = 0; m < h_src.coefficients.size(); ++m)
      worst = std::max(worst, rel_err(h_src.coefficients[m], h_snk.coefficients[m]));
  }
  CHECK(worst <= 1e-10);
}

TEST_CASE("transmitter outside every first-order sector sees only the direct path") {
  // one short wall far from the line between transmitter and antenna
  std::vector<Wall> walls;
  walls.emplace_back(Location{9.0, 9.0, 0}, Location{9.5, 9.0, 0}, 1.0);
  const Environment env{std::move(walls), 10.0, 10.0};
  AntennaArray array;
  array.locations = {{1.0, 2.0, 0}, {2.0, 1.0, 0}};
  const Transmitter tx{{1.0, 1.0, 0}, {1.0, 0.0}};
  const auto sinks = enumerate_virtual_sinks(array, env, 1);
  const auto h = channel_from_sinks(tx, sinks, env, 0.2);
  for (std::size_t m = 0; m < array.size(); ++m) {
    const auto direct = tx.amplitude * steering(tx.location, array.locations[m], 0.2);
    CHECK(std::abs(h.coefficients[m] - direct) < 1e-15);
  }
}

TEST_CASE("synthesis propagates the distance guard") {
  const Environment room = rect_room(6.4, 6.4, 1, 1, 1, 1);
  AntennaArray array;
  array.locations = {{3.0, 3.0, 0}};
  const Transmitter tx{{3.0005, 3.0, 0}, {1.0, 0.0}};  // 0.5 mm from the antenna
  const std::vector<VirtualSource> direct = {{tx.location, {1.0, 0.0}, 0, {}}};
  CHECK_THROWS_AS(channel_from_sources(tx, direct, array, room, 0.2), TooCloseError);
}

}  // TEST_SUITE
