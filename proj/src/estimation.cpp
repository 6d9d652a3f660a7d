// SPDX-License-Identifier: Apache-2.0
// nearmimo: near-field distributed MIMO channel simulation and estimation

#include "nearmimo/estimation.hpp"

#include <algorithm>
#include <cmath>

#include "nearmimo/channel_db.hpp"
#include "nearmimo/rng.hpp"

namespace nearmimo {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double l2_norm(const std::vector<std::complex<double>>& v) {
  double acc = 0.0;
  for (const auto& c : v) acc += std::norm(c);
  return std::sqrt(acc);
}

// Solves the K x K hermitian system (A^H A) g = A^H y by gaussian elimination
// with partial pivoting; A is given column-wise (one steering vector per
// source). Small K only.
std::vector<std::complex<double>> least_squares_amplitudes(
    const std::vector<std::vector<std::complex<double>>>& columns,
    const std::vector<std::complex<double>>& y) {
  const std::size_t k = columns.size();
  const std::size_t m = y.size();
  std::vector<std::vector<std::complex<double>>> a(k,
      std::vector<std::complex<double>>(k + 1));
  for (std::size_t r = 0; r < k; ++r) {
    for (std::size_t c = 0; c < k; ++c) {
      std::complex<double> dot{0.0, 0.0};
      for (std::size_t i = 0; i < m; ++i)
        dot += std::conj(columns[r][i]) * columns[c][i];
      a[r][c] = dot;
    }
    std::complex<double> rhs{0.0, 0.0};
    for (std::size_t i = 0; i < m; ++i) rhs += std::conj(columns[r][i]) * y[i];
    a[r][k] = rhs;
  }
  for (std::size_t col = 0; col < k; ++col) {
    std::size_t pivot = col;
    for (std::size_t r = col + 1; r < k; ++r)
      if (std::abs(a[r][col]) > std::abs(a[pivot][col])) pivot = r;
    std::swap(a[col], a[pivot]);
    if (std::abs(a[col][col]) < 1e-300) continue;  // degenerate column, leave 0
    for (std::size_t r = col + 1; r < k; ++r) {
      const std::complex<double> f = a[r][col] / a[col][col];
      for (std::size_t c = col; c <= k; ++c) a[r][c] -= f * a[col][c];
    }
  }
  std::vector<std::complex<double>> g(k, {0.0, 0.0});
  for (std::size_t col = k; col-- > 0;) {
    if (std::abs(a[col][col]) < 1e-300) continue;
    std::complex<double> acc = a[col][k];
    for (std::size_t c = col + 1; c < k; ++c) acc -= a[col][c] * g[c];
    g[col] = acc / a[col][col];
  }
  return g;
}

}  // namespace

NoisyChannel add_noise(const ChannelVector& h, double target_input_evm_db,
                       std::uint64_t seed) {
  const double norm_h = l2_norm(h.coefficients);
  if (!(norm_h > 0.0))
    throw std::invalid_argument("add_noise: channel norm is zero");
  NoisyChannel out{h.coefficients, h.wavelength, target_input_evm_db};
  if (target_input_evm_db == kNoNoiseDb) return out;
  if (!std::isfinite(target_input_evm_db))
    throw std::invalid_argument("add_noise: target input EVM must be finite or the no-noise sentinel");

  Rng rng(seed);
  std::vector<std::complex<double>> noise(h.coefficients.size());
  double norm_n = 0.0;
  do {
    for (auto& n : noise) n = rng.complex_gaussian();
    norm_n = l2_norm(noise);
  } while (!(norm_n > 0.0));

  // exact normalization: ||noise|| / ||h|| == 10^(target/20)
  const double scale = std::pow(10.0, target_input_evm_db / 20.0) * norm_h / norm_n;
  for (std::size_t m = 0; m < noise.size(); ++m)
    out.coefficients[m] += scale * noise[m];
  return out;
}

double evm_db(const ChannelVector& estimate, const ChannelVector& truth) {
  if (estimate.coefficients.size() != truth.coefficients.size())
    throw std::invalid_argument("evm_db: estimate and truth lengths differ");
  const double norm_t = l2_norm(truth.coefficients);
  if (!(norm_t > 0.0)) throw std::invalid_argument("evm_db: truth norm is zero");
  double err = 0.0;
  for (std::size_t m = 0; m < truth.coefficients.size(); ++m)
    err += std::norm(estimate.coefficients[m] - truth.coefficients[m]);
  if (err == 0.0) return kNoNoiseDb;
  return 20.0 * std::log10(std::sqrt(err) / norm_t);
}

double multisource_objective(const Location& l, const NoisyChannel& snapshot,
                             const AntennaArray& array, SteeringMode template_mode) {
  if (snapshot.coefficients.size() != array.size())
    throw std::invalid_argument("multisource_objective: snapshot length != antenna count");
  std::complex<double> acc{0.0, 0.0};
  for (std::size_t m = 0; m < array.size(); ++m)
    acc += snapshot.coefficients[m] *
           std::conj(steering(l, array.locations[m], snapshot.wavelength, template_mode));
  return std::abs(acc);
}

namespace {

// Same correlation as multisource_objective but over an arbitrary residual,
// with candidates inside the steering distance guard excluded (scored -inf)
// instead of throwing: the search regions legitimately contain the antennas.
double guarded_source_correlation(const Location& l,
                                  const std::vector<std::complex<double>>& residual,
                                  const AntennaArray& array, double wavelength,
                                  SteeringMode template_mode) {
  const double d_min = wavelength / 100.0;
  std::complex<double> acc{0.0, 0.0};
  for (std::size_t m = 0; m < array.size(); ++m) {
    const double d = distance(l, array.locations[m]);
    if (d < d_min) return kNegInf;
    acc += residual[m] * std::conj(steering_from_distance(d, wavelength, template_mode));
  }
  return std::abs(acc);
}

}  // namespace

MultisourceResult estimate_multisource(const NoisyChannel& snapshot,
                                       const AntennaArray& array, int num_sources,
                                       const SearchRegion& region,
                                       const SearchParams& params,
                                       AmplitudeMode amplitude_mode,
                                       SteeringMode data_mode,
                                       SteeringMode template_mode,
                                       bool joint_amplitude_refit) {
  validate_antenna_array(array);
  const std::size_t m_count = array.size();
  if (snapshot.coefficients.size() != m_count)
    throw std::invalid_argument("estimate_multisource: snapshot length != antenna count");
  if (num_sources < 0)
    throw std::invalid_argument("estimate_multisource: source count must be >= 0");

  MultisourceResult result;
  result.reconstructed =
      ChannelVector{std::vector<std::complex<double>>(m_count, {0.0, 0.0}),
                    snapshot.wavelength};
  if (num_sources > static_cast<int>(m_count))
    result.warnings.push_back(
        "requested " + std::to_string(num_sources) + " sources from only " +
        std::to_string(m_count) + " antennas; the fit is underdetermined");
  if (num_sources == 0) return result;

  std::vector<std::complex<double>> residual = snapshot.coefficients;
  std::vector<std::vector<std::complex<double>>> templates;  // data-mode steering per source
  for (int k = 0; k < num_sources; ++k) {
    const Location peak = grid_peak_search(
        [&](const Location& l) {
          return guarded_source_correlation(l, residual, array,
                                            snapshot.wavelength, template_mode);
        },
        region, params);

    SourceEstimate est;
    est.location = peak;
    est.peak_metric = guarded_source_correlation(peak, residual, array,
                                                 snapshot.wavelength, template_mode);

    std::vector<std::complex<double>> s(m_count);
    std::complex<double> corr{0.0, 0.0};
    double energy = 0.0;
    for (std::size_t m = 0; m < m_count; ++m) {
      s[m] = steering(peak, array.locations[m], snapshot.wavelength, data_mode);
      corr += residual[m] * std::conj(s[m]);
      energy += std::norm(s[m]);
    }
    const std::complex<double> g =
        amplitude_mode == AmplitudeMode::mean_correlation
            ? corr / static_cast<double>(m_count)
            : corr / energy;
    for (std::size_t m = 0; m < m_count; ++m) residual[m] -= g * s[m];

    est.amplitude = g;
    result.sources.push_back(est);
    templates.push_back(std::move(s));
  }

  if (joint_amplitude_refit) {
    const auto refit = least_squares_amplitudes(templates, snapshot.coefficients);
    for (std::size_t k = 0; k < refit.size(); ++k)
      result.sources[k].amplitude = refit[k];
  }

  for (std::size_t k = 0; k < templates.size(); ++k)
    for (std::size_t m = 0; m < m_count; ++m)
      result.reconstructed.coefficients[m] +=
          result.sources[k].amplitude * templates[k][m];
  return result;
}

namespace {

// Composite response of antenna m's sink set at candidate l, or nullopt when
// some sink violates the distance guard.
bool composite_sink_response(const Location& l,
                             const std::vector<VirtualSink>& sinks,
                             const Environment& env, double wavelength,
                             SteeringMode mode, std::complex<double>& out) {
  const double d_min = wavelength / 100.0;
  std::complex<double> acc{0.0, 0.0};
  for (const auto& k : sinks) {
    const double d = distance(l, k.location);
    if (d < d_min) return false;
    if (!visibility(k.location, k.path, env, l)) continue;
    acc += k.gain * steering_from_distance(d, wavelength, mode);
  }
  out = acc;
  return true;
}

double guarded_sink_correlation(const Location& l,
                                const std::vector<std::complex<double>>& snapshot,
                                const ChannelDatabase& db, const Environment& env,
                                double wavelength, SteeringMode template_mode) {
  std::complex<double> acc{0.0, 0.0};
  for (std::size_t m = 0; m < db.sinks.size(); ++m) {
    std::complex<double> a;
    if (!composite_sink_response(l, db.sinks[m], env, wavelength, template_mode, a))
      return kNegInf;
    acc += snapshot[m] * std::conj(a);
  }
  return std::abs(acc);
}

}  // namespace

double multisink_objective(const Location& l_tx, const NoisyChannel& snapshot,
                           const ChannelDatabase& db, const Environment& env,
                           SteeringMode template_mode) {
  if (snapshot.coefficients.size() != db.sinks.size())
    throw std::invalid_argument("multisink_objective: snapshot length != database antenna count");
  std::complex<double> acc{0.0, 0.0};
  for (std::size_t m = 0; m < db.sinks.size(); ++m) {
    std::complex<double> a{0.0, 0.0};
    for (const auto& k : db.sinks[m]) {
      const std::complex<double> str =
          steering(l_tx, k.location, snapshot.wavelength, template_mode);
      if (!visibility(k.location, k.path, env, l_tx)) continue;
      a += k.gain * str;
    }
    acc += snapshot.coefficients[m] * std::conj(a);
  }
  return std::abs(acc);
}

MultisinkResult estimate_multisink(const NoisyChannel& snapshot,
                                   const ChannelDatabase& db,
                                   const Environment& env,
                                   const SearchRegion& region,
                                   const SearchParams& params,
                                   AmplitudeMode amplitude_mode,
                                   SteeringMode data_mode,
                                   SteeringMode template_mode) {
  if (db.sinks.empty() || db.array_locations.empty())
    throw std::invalid_argument("estimate_multisink: empty channel database");
  const std::size_t m_count = db.sinks.size();
  if (snapshot.coefficients.size() != m_count)
    throw std::invalid_argument("estimate_multisink: snapshot length != database antenna count");
  const double eps = 1e-9;
  if (region.x_min < -eps || region.x_max > env.width + eps ||
      region.y_min < -eps || region.y_max > env.depth + eps)
    throw std::invalid_argument("estimate_multisink: search region extends outside the room");

  const Location peak = grid_peak_search(
      [&](const Location& l) {
        return guarded_sink_correlation(l, snapshot.coefficients, db, env,
                                        snapshot.wavelength, template_mode);
      },
      region, params);

  MultisinkResult result;
  result.user_location = peak;
  result.peak_metric = guarded_sink_correlation(peak, snapshot.coefficients, db,
                                                env, snapshot.wavelength,
                                                template_mode);

  std::vector<std::complex<double>> response(m_count);
  std::complex<double> corr{0.0, 0.0};
  double energy = 0.0;
  for (std::size_t m = 0; m < m_count; ++m) {
    std::complex<double> a{0.0, 0.0};
    composite_sink_response(peak, db.sinks[m], env, snapshot.wavelength, data_mode, a);
    response[m] = a;
    corr += snapshot.coefficients[m] * std::conj(a);
    energy += std::norm(a);
  }
  result.user_amplitude =
      amplitude_mode == AmplitudeMode::mean_correlation
          ? corr / static_cast<double>(m_count)
          : (energy > 0.0 ? corr / energy : std::complex<double>{0.0, 0.0});

  result.reconstructed =
      ChannelVector{std::vector<std::complex<double>>(m_count), snapshot.wavelength};
  for (std::size_t m = 0; m < m_count; ++m)
    result.reconstructed.coefficients[m] = result.user_amplitude * response[m];
  return result;
}

}  // namespace nearmimo
