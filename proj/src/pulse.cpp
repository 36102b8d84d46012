#include "nvsim/pulse.hpp"

#include <algorithm>
#include <cmath>

namespace nvsim {

Eigen::MatrixXd electron_weights(const EigenSystem& es, int electron_dim) {
  const int dim = static_cast<int>(es.evals.size());
  if (dim % electron_dim != 0)
    throw NumericalError("electron_weights: dimension mismatch");
  const int rest = dim / electron_dim;
  Eigen::MatrixXd w = Eigen::MatrixXd::Zero(electron_dim, dim);
  for (int k = 0; k < dim; ++k)
    for (int m = 0; m < electron_dim; ++m)
      for (int r = 0; r < rest; ++r) w(m, k) += std::norm(es.evecs(m * rest + r, k));
  return w;
}

QubitLevels select_qubit_levels(const EigenSystem& core_es, int electron_dim,
                                const QubitSelector& selector) {
  const int dim = static_cast<int>(core_es.evals.size());
  QubitLevels q;

  if (selector.mode == QubitSelector::Mode::explicit_levels) {
    if (selector.level_a < 0 || selector.level_a >= dim || selector.level_b < 0 ||
        selector.level_b >= dim || selector.level_a == selector.level_b)
      throw ConfigError("explicit qubit levels out of range or identical");
    q.index_a = selector.level_a;
    q.index_b = selector.level_b;
  } else {
    const Eigen::MatrixXd w = electron_weights(core_es, electron_dim);
    std::vector<int> pm, ms0;
    for (int k = 0; k < dim; ++k) {
      // ms0-dominant when w_0 is the largest electron weight
      if (w(1, k) >= w(0, k) && w(1, k) >= w(2, k))
        ms0.push_back(k);
      else
        pm.push_back(k);
    }
    if (pm.size() < 2 || ms0.empty())
      throw NumericalError("qubit selection: could not classify ms manifolds (pm = " +
                           std::to_string(pm.size()) + ", ms0 = " +
                           std::to_string(ms0.size()) + ")");
    // pm is sorted by energy already (eigenvalues ascending); the crossing pair
    // sits at the middle of the manifold
    const int mid = static_cast<int>(pm.size()) / 2;
    const int lower = pm[mid - 1];
    const int upper = pm[mid];
    q.index_b =
        selector.mode == QubitSelector::Mode::ms0_to_lower_branch ? lower : upper;

    // ms0 partner: strongest Sx connection to the branch state
    const int rest = dim / electron_dim;
    const auto sx = spin_operators(species::electron()).sx;
    Matrix sx_full = Matrix::Zero(dim, dim);
    for (int m1 = 0; m1 < electron_dim; ++m1)
      for (int m2 = 0; m2 < electron_dim; ++m2) {
        if (sx(m1, m2) == Complex(0, 0)) continue;
        for (int r = 0; r < rest; ++r)
          sx_full(m1 * rest + r, m2 * rest + r) = sx(m1, m2);
      }
    const Vector target = sx_full * core_es.evecs.col(q.index_b);
    double best = -1.0;
    for (int k : ms0) {
      const double amp = std::norm(core_es.evecs.col(k).dot(target));
      if (amp > best + 1e-15) {
        best = amp;
        q.index_a = k;
      }
    }
  }

  q.state_a = core_es.evecs.col(q.index_a);
  q.state_b = core_es.evecs.col(q.index_b);
  q.freq_mhz = core_es.evals(q.index_b) - core_es.evals(q.index_a);
  const double scale =
      std::max({1.0, std::abs(core_es.evals(q.index_a)), std::abs(core_es.evals(q.index_b))});
  if (std::abs(q.freq_mhz) < 1e-9 * scale)
    throw NumericalError("qubit selection: chosen levels are degenerate");
  return q;
}

std::vector<std::pair<double, double>> coherence_envelope(
    const std::vector<double>& times, const std::vector<Complex>& values) {
  const size_t n = times.size();
  if (n != values.size() || n == 0)
    throw DomainError("coherence_envelope: bad curve");
  std::vector<double> mag(n);
  for (size_t k = 0; k < n; ++k) mag[k] = std::abs(values[k]);

  // interior local maxima (>= both neighbours), plus the first point
  std::vector<std::pair<double, double>> peaks;
  peaks.emplace_back(times[0], mag[0]);
  for (size_t k = 1; k + 1 < n; ++k)
    if (mag[k] >= mag[k - 1] && mag[k] >= mag[k + 1]) peaks.emplace_back(times[k], mag[k]);

  // non-oscillatory curve: use every sample
  if (peaks.size() < 3) {
    peaks.clear();
    for (size_t k = 0; k < n; ++k) peaks.emplace_back(times[k], mag[k]);
  }

  // monotone non-increasing hull: each point lifted to the max of later peaks
  for (size_t k = peaks.size(); k-- > 1;)
    peaks[k - 1].second = std::max(peaks[k - 1].second, peaks[k].second);
  return peaks;
}

namespace {

DecayFit unresolved(DecayMethod method, const std::string& why) {
  DecayFit f;
  f.method = method;
  f.resolved = false;
  f.note = why;
  return f;
}

}  // namespace

DecayFit extract_decay_time(const std::vector<double>& times,
                            const std::vector<Complex>& values, DecayMethod method) {
  const auto env = coherence_envelope(times, values);

  if (method == DecayMethod::one_over_e) {
    const double target = std::exp(-1.0);
    for (size_t k = 1; k < env.size(); ++k) {
      if (env[k].second < target) {
        const auto [t0, v0] = env[k - 1];
        const auto [t1, v1] = env[k];
        DecayFit f;
        f.method = method;
        f.resolved = true;
        f.exponent = 1.0;
        f.t_char_us =
            (v0 > v1) ? t0 + (v0 - target) / (v0 - v1) * (t1 - t0) : t1;
        return f;
      }
    }
    return unresolved(method, "no 1/e crossing within window");
  }

  // stretched_fit: linear regression of log(-log env) on log t
  std::vector<double> xs, ys;
  for (const auto& [t, v] : env) {
    if (t <= 0 || v >= 0.999 || v <= 1e-6) continue;
    xs.push_back(std::log(t));
    ys.push_back(std::log(-std::log(v)));
  }
  if (xs.size() < 3) return unresolved(method, "too few decaying envelope points to fit");
  const double n = static_cast<double>(xs.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (size_t k = 0; k < xs.size(); ++k) {
    sx += xs[k];
    sy += ys[k];
    sxx += xs[k] * xs[k];
    sxy += xs[k] * ys[k];
  }
  const double denom = n * sxx - sx * sx;
  if (std::abs(denom) < 1e-12) return unresolved(method, "degenerate fit");
  const double slope = (n * sxy - sx * sy) / denom;
  const double intercept = (sy - slope * sx) / n;
  if (!(slope > 0)) return unresolved(method, "fit produced non-decaying exponent");
  const double t_char = std::exp(-intercept / slope);
  if (slope < 0.5 || slope > 4.0)
    return unresolved(method, "stretch exponent " + std::to_string(slope) +
                                  " outside [0.5, 4]");
  double ss = 0;
  for (size_t k = 0; k < xs.size(); ++k) {
    const double pred = slope * xs[k] + intercept;
    ss += (ys[k] - pred) * (ys[k] - pred);
  }
  DecayFit f;
  f.method = method;
  f.resolved = true;
  f.t_char_us = t_char;
  f.exponent = slope;
  f.residual = std::sqrt(ss / n);
  return f;
}

}  // namespace nvsim
