#include "nfdm/spectral_stats.hpp"

#include <boost/math/special_functions/gamma.hpp>

#include <algorithm>
#include <cmath>
#include <numeric>

namespace nfdm {

PerturbationReport eigenvalue_first_order_shift(const TimeSignal& s, cplx lambda, const Eigenvector& v,
                                                const TimeSignal& noise) {
  (void)lambda;
  if (noise.size() != s.size() || v.v1.size() != s.size())
    throw NfdmError(ErrorCode::InvalidArgument, "signal, eigenvector and noise lengths differ");
  const double h = s.grid.dt;
  const auto v1 = v.v1.array(), v2 = v.v2.array();
  const cplx inner = 2.0 * trapezoid_c((v1 * v2).eval(), h);
  if (std::abs(inner) < 1e-10) throw NfdmError(ErrorCode::DegenerateEigenvalue, "<u,v> vanishes");
  const auto n = noise.samples.array();
  const cplx num = -J * trapezoid_c((n * v2.square() + n.conjugate() * v1.square()).eval(), h);
  PerturbationReport r;
  r.delta_lambda = num / inner;
  r.inner_uv = inner;
  r.variance_estimate = trapezoid((v1.abs2().square() + v2.abs2().square()).eval(), h) / std::norm(inner);
  return r;
}

DriftRates soliton_drift_rates(double alpha, double omega, const TimeSignal& noise, const DriftOptions& opt) {
  DriftRates r;
  const int n = noise.size();
  const double h = noise.grid.dt;
  Eigen::ArrayXd fa(n), fo(n);
  for (int k = 0; k < n; ++k) {
    const double t = noise.grid.t(k);
    const double tau = omega * (t - opt.t_center);
    cplx nb = noise.samples(k) * std::exp(J * (alpha * t + opt.phase));
    if (opt.j_substitution) nb *= J;
    const double sech = 1.0 / std::cosh(tau);
    fa(k) = sech * nb.real();
    fo(k) = sech * std::tanh(tau) * nb.imag();
  }
  // d tau = omega dt
  r.alpha_rate = -omega * trapezoid(fa, h);
  r.omega_rate = -omega * trapezoid(fo, h);
  return r;
}

double omega_conditional_pdf(double omega, double omega0, double sigma2, double z) {
  const double v = sigma2 * z * omega0;
  if (!(v > 0) || !(omega0 > 0)) throw NfdmError(ErrorCode::InvalidParams, "nonpositive variance");
  const double d = omega - omega0;
  return std::exp(-d * d / v) / std::sqrt(PI * v);
}

double omega_pdf_mass(double omega0, double sigma2, double z, double n_std) {
  const double sd = std::sqrt(sigma2 * z * omega0 / 2.0);
  const int n = 4001;
  const double lo = omega0 - n_std * sd, hi = omega0 + n_std * sd;
  const double h = (hi - lo) / (n - 1);
  // Simpson
  double acc = 0.0;
  for (int i = 0; i < n; ++i) {
    const double w = (i == 0 || i == n - 1) ? 1.0 : (i % 2 ? 4.0 : 2.0);
    acc += w * omega_conditional_pdf(lo + i * h, omega0, sigma2, z);
  }
  return acc * h / 3.0;
}

Moments energy_drift_moments(double E0, double sigma2, double z) {
  if (!(E0 > 0)) throw NfdmError(ErrorCode::InvalidParams, "E0 must be positive");
  return {E0, sigma2 * z * E0};
}

ContinuousPerturbationReport continuous_amp_perturbation(const TimeSignal& s, double lambda,
                                                         const ContinuousNoiseModel& noise) {
  ContinuousPerturbationReport rep;
  const int n = s.size();
  const double h = s.grid.dt;
  const Eigenvector v = jost_left(s, cplx(lambda, 0.0));
  const ScatteringCoeffs c0 = scattering_coeffs(s, cplx(lambda, 0.0), ZsOptions{0.0});

  // y0 = B/A with A = v1 e^{j lambda t}, B = v2 e^{-j lambda t}; G(t) = int qbar y0, qbar = q e^{2 j lambda t}
  Eigen::ArrayXd y4(n), corr(n);
  Eigen::ArrayXcd qy(n);
  for (int k = 0; k < n; ++k) {
    const double t = s.grid.t(k);
    const cplx A = v.v1(k) * std::exp(J * lambda * t);
    const cplx y0 = v.v2(k) * std::exp(-J * lambda * t) / A;
    y4(k) = std::pow(std::abs(y0), 4);
    qy(k) = s.samples(k) * std::exp(2.0 * J * lambda * t) * y0;
    corr(k) = (1.0 + y4(k)) * std::pow(std::abs(A / c0.a), 4);
  }
  Eigen::ArrayXd imG(n);
  cplx G = 0.0;
  imG(0) = 0.0;
  for (int k = 1; k < n; ++k) {
    G += 0.5 * h * (qy(k) + qy(k - 1));
    imG(k) = G.imag();
  }
  const double imG_inf = imG(n - 1);
  Eigen::ArrayXd printed(n);
  for (int k = 0; k < n; ++k) printed(k) = y4(k) * std::exp(2.0 * imG_inf - 2.0 * imG(k));
  // midpoint sums over the sample-centred cells used by the scattering integration
  rep.printed_quadrature = -noise.density * printed.sum() * h;
  rep.corrected_quadrature = noise.density * corr.sum() * h;
  rep.unbounded = !std::isfinite(rep.printed_quadrature) || !std::isfinite(rep.corrected_quadrature);

  const cplx qhat0 = c0.b / c0.a;
  rep.samples.resize(noise.trials);
#pragma omp parallel for schedule(static)
  for (int i = 0; i < noise.trials; ++i) {
    Rng rng(trial_seed(noise.seed, static_cast<std::uint64_t>(i)));
    const TimeSignal noisy = inject_noise(s, noise.density, 1.0, noise.bandwidth, rng);
    const ScatteringCoeffs c = scattering_coeffs(noisy, cplx(lambda, 0.0), ZsOptions{0.0});
    rep.samples[i] = c.b / c.a - qhat0;
  }
  double acc = 0.0;
  for (const cplx& d : rep.samples) acc += std::norm(d);
  rep.monte_carlo = noise.trials > 0 ? acc / noise.trials : 0.0;
  rep.discrepancy = rep.monte_carlo - rep.printed_quadrature;
  return rep;
}

NormalityTest dagostino_pearson(const std::vector<double>& x) {
  const double n = static_cast<double>(x.size());
  if (n < 20) throw NfdmError(ErrorCode::InvalidArgument, "normality test needs at least 20 samples");
  const double mean = std::accumulate(x.begin(), x.end(), 0.0) / n;
  double m2 = 0, m3 = 0, m4 = 0;
  for (double v : x) {
    const double d = v - mean;
    m2 += d * d;
    m3 += d * d * d;
    m4 += d * d * d * d;
  }
  m2 /= n, m3 /= n, m4 /= n;
  NormalityTest r;
  const double g1 = m3 / std::pow(m2, 1.5);
  const double b2 = m4 / (m2 * m2);
  r.skewness = g1;
  r.excess_kurtosis = b2 - 3.0;

  const double Y = g1 * std::sqrt((n + 1) * (n + 3) / (6.0 * (n - 2)));
  const double beta2 = 3.0 * (n * n + 27 * n - 70) * (n + 1) * (n + 3) / ((n - 2) * (n + 5) * (n + 7) * (n + 9));
  const double W2 = -1.0 + std::sqrt(2.0 * (beta2 - 1.0));
  const double delta = 1.0 / std::sqrt(0.5 * std::log(W2));
  const double alpha = std::sqrt(2.0 / (W2 - 1.0));
  const double z1 = delta * std::asinh(Y / alpha);

  const double E = 3.0 * (n - 1) / (n + 1);
  const double var = 24.0 * n * (n - 2) * (n - 3) / ((n + 1) * (n + 1) * (n + 3) * (n + 5));
  const double xk = (b2 - E) / std::sqrt(var);
  const double sb1 = 6.0 * (n * n - 5 * n + 2) / ((n + 7) * (n + 9)) *
                     std::sqrt(6.0 * (n + 3) * (n + 5) / (n * (n - 2) * (n - 3)));
  const double A = 6.0 + 8.0 / sb1 * (2.0 / sb1 + std::sqrt(1.0 + 4.0 / (sb1 * sb1)));
  const double t = (1.0 - 2.0 / A) / (1.0 + xk * std::sqrt(2.0 / (A - 4.0)));
  const double z2 = ((1.0 - 2.0 / (9.0 * A)) - std::cbrt(t)) / std::sqrt(2.0 / (9.0 * A));

  r.statistic = z1 * z1 + z2 * z2;
  r.p_value = std::exp(-0.5 * r.statistic);
  return r;
}

double chi_square_sf(double x, double dof) {
  if (x <= 0) return 1.0;
  return boost::math::gamma_q(0.5 * dof, 0.5 * x);
}

double chi_square_gof(const std::vector<double>& x, const std::vector<double>& edges,
                      const std::function<double(double)>& cdf, int n_fitted_params) {
  if (edges.size() < 2) throw NfdmError(ErrorCode::InvalidArgument, "need at least two bin edges");
  const std::size_t nb = edges.size() + 1;
  std::vector<double> obs(nb, 0.0), expct(nb, 0.0);
  for (double v : x) {
    const auto it = std::upper_bound(edges.begin(), edges.end(), v);
    obs[static_cast<std::size_t>(it - edges.begin())] += 1.0;
  }
  const double n = static_cast<double>(x.size());
  double prev = 0.0;
  for (std::size_t i = 0; i < nb; ++i) {
    const double c = i < edges.size() ? cdf(edges[i]) : 1.0;
    expct[i] = n * (c - prev);
    prev = c;
  }
  // merge bins with small expectation into their neighbour
  std::vector<double> mo, me;
  double ao = 0, ae = 0;
  for (std::size_t i = 0; i < nb; ++i) {
    ao += obs[i];
    ae += expct[i];
    if (ae >= 5.0) {
      mo.push_back(ao);
      me.push_back(ae);
      ao = ae = 0;
    }
  }
  if (ae > 0 || ao > 0) {
    if (me.empty()) {
      mo.push_back(ao);
      me.push_back(ae);
    } else {
      mo.back() += ao;
      me.back() += ae;
    }
  }
  double stat = 0.0;
  for (std::size_t i = 0; i < mo.size(); ++i) stat += (mo[i] - me[i]) * (mo[i] - me[i]) / me[i];
  const double dof = static_cast<double>(mo.size()) - 1.0 - n_fitted_params;
  if (dof < 1) throw NfdmError(ErrorCode::InvalidArgument, "too few bins for chi-square test");
  return chi_square_sf(stat, dof);
}

}  // namespace nfdm
