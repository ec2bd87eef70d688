#include <doctest.h>

#include "helpers.hpp"
#include "nfdm/spectral_stats.hpp"

#include <numeric>

using namespace nfdm;

TEST_CASE("first-order shift is linear in the noise") {
  const TimeGrid g = TimeGrid::span(-16, 16, 1.0 / 32);
  const TimeSignal s = test::sech_signal(g);
  const cplx lam(0, 0.5);
  const Eigenvector v = bound_state(s, lam);
  CHECK(std::abs(eigenvalue_first_order_shift(s, lam, v, TimeSignal::zeros(g)).delta_lambda) == 0.0);
  Rng rng(1);
  const TimeSignal n = inject_noise(TimeSignal::zeros(g), 1e-4, 1.0, 4.0, rng);
  TimeSignal n2 = n;
  n2.samples *= 2.0;
  const auto a = eigenvalue_first_order_shift(s, lam, v, n);
  const auto b = eigenvalue_first_order_shift(s, lam, v, n2);
  CHECK(std::abs(b.delta_lambda - 2.0 * a.delta_lambda) < 1e-15);
  CHECK(a.variance_estimate > 0);
}

TEST_CASE("first-order shift predicts re-solved eigenvalues") {
  const TimeGrid g = TimeGrid::span(-16, 16, 1.0 / 32);
  const TimeSignal s = test::sech_signal(g);
  const cplx lam(0, 0.5);
  const Eigenvector v = bound_state(s, lam);
  EigenSearchConfig cfg;
  cfg.zs.edge_tol = 0.0;
  double err = 0.0, rms = 0.0;
  const int trials = 100;
  for (int i = 0; i < trials; ++i) {
    Rng rng(trial_seed(5, i));
    const TimeSignal n = inject_noise(TimeSignal::zeros(g), 1e-4, 1.0, 4.0, rng);
    TimeSignal y = s;
    y.samples += n.samples;
    const auto rep = refine_eigenvalues(y, {lam}, cfg);
    REQUIRE(rep.eigenvalues.size() == 1);
    const cplx actual = rep.eigenvalues[0] - lam;
    err += std::abs(eigenvalue_first_order_shift(s, lam, v, n).delta_lambda - actual);
    rms += std::norm(actual);
  }
  CHECK(err / trials < 0.1 * std::sqrt(rms / trials));
}

TEST_CASE("drift rate quadratures") {
  const TimeGrid g = TimeGrid::span(-30, 30, 1.0 / 64);
  const DriftRates z = soliton_drift_rates(0.0, 1.0, TimeSignal::zeros(g));
  CHECK(z.alpha_rate == 0.0);
  CHECK(z.omega_rate == 0.0);
  DriftOptions off;
  off.j_substitution = false;
  const DriftRates r = soliton_drift_rates(0.0, 1.0, test::sech_signal(g), off);
  CHECK(r.alpha_rate == doctest::Approx(-2.0).epsilon(1e-8));
  CHECK(std::abs(r.omega_rate) < 1e-12);
  // with the substitution a real perturbation moves omega only through Im(j n) = n
  TimeSignal odd = TimeSignal::zeros(g);
  for (int k = 0; k < g.n_samples; ++k) odd.samples(k) = std::tanh(g.t(k)) / std::cosh(g.t(k));
  const DriftRates w = soliton_drift_rates(0.0, 1.0, odd);
  // int sech^2 tanh^2 = 2/3
  CHECK(w.omega_rate == doctest::Approx(-2.0 / 3.0).epsilon(1e-8));
  CHECK(std::abs(w.alpha_rate) < 1e-12);
}

TEST_CASE("omega conditional density") {
  const double w0 = 1.0, s2 = 0.02, z = 2.0;
  CHECK(omega_conditional_pdf(w0, w0, s2, z) > omega_conditional_pdf(w0 + 1e-3, w0, s2, z));
  CHECK(omega_conditional_pdf(w0, w0, s2, z) > omega_conditional_pdf(w0 - 1e-3, w0, s2, z));
  CHECK(std::abs(omega_pdf_mass(w0, s2, z) - 1.0) < 1e-6);
  // second moment by Simpson
  const double sd = std::sqrt(s2 * z * w0 / 2);
  const int n = 4001;
  const double lo = w0 - 12 * sd, h = 24 * sd / (n - 1);
  double m2 = 0.0;
  for (int i = 0; i < n; ++i) {
    const double w = lo + i * h;
    const double c = (i == 0 || i == n - 1) ? 1.0 : (i % 2 ? 4.0 : 2.0);
    m2 += c * (w - w0) * (w - w0) * omega_conditional_pdf(w, w0, s2, z);
  }
  m2 *= h / 3;
  CHECK(std::abs(m2 - s2 * z * w0 / 2) < 1e-6);
  CHECK_THROWS_AS(omega_conditional_pdf(1.0, 1.0, 0.0, 1.0), NfdmError);
  CHECK_THROWS_AS(omega_conditional_pdf(1.0, -1.0, 0.1, 1.0), NfdmError);
}

TEST_CASE("energy drift moments") {
  CHECK(energy_drift_moments(2.0, 0.1, 0.0).variance == 0.0);
  const Moments m = energy_drift_moments(2.0, 0.1, 3.0);
  CHECK(m.mean == 2.0);
  CHECK(m.variance == doctest::Approx(0.6));
  CHECK_THROWS_AS(energy_drift_moments(0.0, 0.1, 1.0), NfdmError);
}

TEST_CASE("continuous perturbation of a zero signal") {
  const TimeGrid g(512, -16, 1.0 / 16);
  ContinuousNoiseModel nm;
  nm.density = 1e-6;
  nm.bandwidth = 4.0;
  nm.trials = 1000;
  const auto r = continuous_amp_perturbation(TimeSignal::zeros(g), 0.5, nm);
  const double expect = nm.density * g.window();
  CHECK(std::abs(r.monte_carlo - expect) / expect < 0.05);
  CHECK(std::abs(r.corrected_quadrature - expect) / expect < 1e-9);
  CHECK(r.printed_quadrature == 0.0);
  CHECK_FALSE(r.unbounded);
}

TEST_CASE("continuous perturbation of a raised-cosine pulse") {
  const TimeGrid g(512, -16, 1.0 / 16);
  TimeSignal s = TimeSignal::zeros(g);
  for (int k = 0; k < g.n_samples; ++k)
    if (std::abs(g.t(k)) < 4) s.samples(k) = 0.2 * 0.5 * (1 + std::cos(PI * g.t(k) / 4));
  ContinuousNoiseModel nm;
  nm.density = 1e-6;
  nm.trials = 1000;
  const auto r = continuous_amp_perturbation(s, 0.3, nm);
  CHECK(std::isfinite(r.monte_carlo));
  CHECK(std::abs(r.monte_carlo - r.corrected_quadrature) / r.corrected_quadrature < 0.1);
  CHECK(r.discrepancy == doctest::Approx(r.monte_carlo - r.printed_quadrature));
  std::vector<double> re, im;
  for (const cplx& d : r.samples) re.push_back(d.real()), im.push_back(d.imag());
  CHECK(dagostino_pearson(re).p_value > 0.01);
  CHECK(dagostino_pearson(im).p_value > 0.01);
}

TEST_CASE("normality test matches a reference implementation") {
  std::vector<double> x;
  for (int i = 0; i < 200; ++i) x.push_back(std::pow(std::sin(1.7 * i), 3) + 0.1 * std::cos(0.3 * i));
  const NormalityTest t = dagostino_pearson(x);
  CHECK(t.statistic == doctest::Approx(7.496551015231398).epsilon(1e-9));
  CHECK(t.p_value == doctest::Approx(0.023558337019150166).epsilon(1e-9));
  CHECK(t.excess_kurtosis == doctest::Approx(-0.670508166110908).epsilon(1e-9));

  std::mt19937_64 rng(8);
  std::normal_distribution<double> g;
  std::uniform_real_distribution<double> u;
  std::vector<double> a(5000), b(5000);
  for (auto& v : a) v = g(rng);
  for (auto& v : b) v = u(rng);
  CHECK(dagostino_pearson(a).p_value > 0.01);
  CHECK(dagostino_pearson(b).p_value < 1e-6);
  CHECK_THROWS_AS(dagostino_pearson({1.0, 2.0}), NfdmError);
}

TEST_CASE("chi-square goodness of fit") {
  CHECK(chi_square_sf(3.841458820694124, 1) == doctest::Approx(0.05).epsilon(1e-9));
  CHECK(chi_square_sf(10, 4) == doctest::Approx(0.04042768199451279).epsilon(1e-9));
  std::mt19937_64 rng(2);
  std::normal_distribution<double> g;
  std::vector<double> x(4000);
  for (auto& v : x) v = g(rng);
  std::vector<double> edges;
  for (int i = -10; i <= 10; ++i) edges.push_back(0.25 * i);
  auto phi = [](double t) { return 0.5 * std::erfc(-t / std::sqrt(2.0)); };
  CHECK(chi_square_gof(x, edges, phi) > 0.01);
  auto shifted = [&](double t) { return phi(t - 0.2); };
  CHECK(chi_square_gof(x, edges, shifted) < 1e-6);
}
