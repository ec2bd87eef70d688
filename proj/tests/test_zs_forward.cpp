#include <doctest.h>

#include "helpers.hpp"
#include "nfdm/darboux.hpp"
#include "nfdm/zs_forward.hpp"

using namespace nfdm;

TEST_CASE("free scattering") {
  const TimeGrid g = TimeGrid::span(-10, 10, 0.01);
  const ScatteringCoeffs c = scattering_coeffs(TimeSignal::zeros(g), cplx(0.3, 0.4));
  CHECK(std::abs(c.a - 1.0) < 1e-12);
  CHECK(c.b == 0.0);
}

TEST_CASE("a vanishes at the sech eigenvalue") {
  const TimeGrid g = TimeGrid::span(-20, 20, 1e-3);
  CHECK(std::abs(scattering_coeffs(test::sech_signal(g), cplx(0, 0.5)).a) < 1e-6);
}

TEST_CASE("unitarity on the real axis") {
  const TimeGrid g = TimeGrid::span(-25, 25, 1.0 / 128);
  const TimeSignal s = test::sech_signal(g, 1.7);
  for (double l : {-3.0, -0.7, 0.0, 0.2, 1.1, 4.0}) {
    const ScatteringCoeffs c = scattering_coeffs(s, cplx(l, 0));
    CHECK(std::abs(std::norm(c.a) + std::norm(c.b) - 1.0) < 1e-8);
  }
}

TEST_CASE("augmented a' matches finite differences") {
  const TimeGrid g = TimeGrid::span(-25, 25, 1.0 / 128);
  const TimeSignal s = test::sech_signal(g, 1.3);
  for (cplx l : {cplx(0.2, 0.3), cplx(-0.5, 0.9), cplx(0.7, 0.0)}) {
    const double h = 1e-5;
    const cplx fd = (scattering_coeffs(s, l + h).a - scattering_coeffs(s, l - h).a) / (2 * h);
    const cplx ap = scattering_coeffs(s, l).a_prime;
    CHECK(std::abs(ap - fd) / std::abs(ap) < 1e-6);
  }
}

TEST_CASE("eigenvalues of sech and 2 sech") {
  const TimeGrid g = TimeGrid::span(-25, 25, 1.0 / 1024);
  CHECK(find_eigenvalues(TimeSignal::zeros(g)).eigenvalues.empty());

  const auto r1 = find_eigenvalues(test::sech_signal(g));
  REQUIRE(r1.eigenvalues.size() == 1);
  CHECK(std::abs(r1.eigenvalues[0] - cplx(0, 0.5)) < 1e-6);
  CHECK(r1.winding_number == 1);

  const auto r2 = find_eigenvalues(test::sech_signal(g, 2.0));
  REQUIRE(r2.eigenvalues.size() == 2);
  CHECK(std::abs(r2.eigenvalues[0] - cplx(0, 0.5)) < 1e-6);
  CHECK(std::abs(r2.eigenvalues[1] - cplx(0, 1.5)) < 1e-6);
}

TEST_CASE("discrete amplitudes of the signal-set solitons") {
  const TimeGrid g = TimeGrid::span(-40, 40, 1.0 / 256);
  EigenSearchConfig cfg;
  for (auto [lam, amp] : {std::pair{cplx(0, 0.5), cplx(1.0)}, std::pair{cplx(0, 0.25), cplx(0.5)}}) {
    const TimeSignal s = multisoliton(DiscreteSpectrum({{lam, amp}}), g);
    const auto rep = find_eigenvalues(s, cfg);
    REQUIRE(rep.eigenvalues.size() == 1);
    const DiscreteSpectrum ds = discrete_amplitudes(s, rep.eigenvalues, cfg);
    CHECK(std::abs(ds.entries[0].amplitude - amp) < 1e-3);
  }
}

TEST_CASE("discrete amplitudes on a wide window") {
  // e^{2 Im(lambda) T} is far beyond double precision here
  const TimeGrid g = TimeGrid::span(-60, 60, 1.0 / 64);
  const DiscreteSpectrum ds({{cplx(0.1, 0.9), cplx(0.7, 0.4)}, {cplx(-0.2, 0.4), 1.5}});
  const TimeSignal s = multisoliton(ds, g);
  const auto rep = refine_eigenvalues(s, ds.eigenvalues());
  REQUIRE(rep.eigenvalues.size() == 2);
  const DiscreteSpectrum got = discrete_amplitudes(s, rep.eigenvalues).sorted();
  const DiscreteSpectrum want = ds.sorted();
  for (int i = 0; i < 2; ++i)
    CHECK(std::abs(got.entries[i].amplitude / want.entries[i].amplitude - 1.0) < 1e-3);
}

TEST_CASE("amplitude follows the soliton time-shift law") {
  // |qtilde| = omega e^{omega t0} for a soliton centred at t0
  const TimeGrid g = TimeGrid::span(-40, 40, 1.0 / 256);
  for (double t0 : {-3.0, 2.0, 5.0}) {
    TimeSignal s = TimeSignal::zeros(g);
    for (int k = 0; k < g.n_samples; ++k) s.samples(k) = 1.0 / std::cosh(g.t(k) - t0);
    const auto rep = find_eigenvalues(s);
    REQUIRE(rep.eigenvalues.size() == 1);
    const auto ds = discrete_amplitudes(s, rep.eigenvalues);
    CHECK(std::abs(ds.entries[0].amplitude) == doctest::Approx(std::exp(t0)).epsilon(1e-3));
  }
}

TEST_CASE("phase covariance") {
  // q -> q e^{j phi} maps v2 -> v2 e^{-j phi}
  const TimeGrid g = TimeGrid::span(-30, 30, 1.0 / 256);
  const TimeSignal s = test::sech_signal(g, 1.3);
  TimeSignal r = s;
  const cplx ph = std::exp(J * 0.9);
  r.samples *= ph;
  const auto a = nft(s, VectorXr::LinSpaced(21, -2, 2));
  const auto b = nft(r, VectorXr::LinSpaced(21, -2, 2));
  REQUIRE(a.discrete.size() == 1);
  REQUIRE(b.discrete.size() == 1);
  CHECK(std::abs(b.discrete.entries[0].amplitude - std::conj(ph) * a.discrete.entries[0].amplitude) < 1e-6);
  CHECK((b.continuous.values - std::conj(ph) * a.continuous.values).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("low-amplitude continuous spectrum approaches the Fourier transform") {
  const TimeGrid g = TimeGrid::span(-10, 10, 1.0 / 128);
  TimeSignal s = TimeSignal::zeros(g);
  for (int k = 0; k < g.n_samples; ++k) {
    const double t = g.t(k);
    if (std::abs(t) < 3) s.samples(k) = 0.01 * 0.5 * (1 + std::cos(PI * t / 3)) * std::exp(J * 0.4 * t);
  }
  const VectorXr lam = VectorXr::LinSpaced(81, -2, 2);
  const auto cs = continuous_spectrum(s, lam).spectrum;
  // qhat(lambda) ~ -conj(Q(-lambda/pi)), Q(f) = int q e^{-2 pi j f t} dt
  double dev = 0.0, peak = 0.0;
  for (Eigen::Index i = 0; i < lam.size(); ++i) {
    const double f = -lam(i) / PI;
    cplx Q = 0.0;
    for (int k = 0; k < g.n_samples; ++k) Q += s.samples(k) * std::exp(-2.0 * PI * J * f * g.t(k)) * g.dt;
    dev = std::max(dev, std::abs(cs.values(i) + std::conj(Q)));
    peak = std::max(peak, std::abs(Q));
  }
  CHECK(dev / peak < 0.05);
}

TEST_CASE("spectrum energy identity") {
  ContinuousSpectrum zero{VectorXr::LinSpaced(11, -1, 1), VectorXc::Zero(11)};
  CHECK(spectrum_energy(DiscreteSpectrum({{cplx(0, 0.5), 1.0}}), zero) == doctest::Approx(2.0));
  CHECK(spectrum_energy(DiscreteSpectrum({{cplx(0, 0.25), 1.0}, {cplx(0, 0.5), 1.0}}), zero) == doctest::Approx(3.0));
  CHECK(spectrum_energy(DiscreteSpectrum(), ContinuousSpectrum{}) == 0.0);

  // a pulse with both discrete and continuous content
  const TimeGrid g = TimeGrid::span(-30, 30, 1.0 / 256);
  const TimeSignal s = test::sech_signal(g, 1.3);
  const auto r = nft(s, VectorXr::LinSpaced(4001, -20, 20));
  REQUIRE(r.discrete.size() == 1);
  CHECK(std::abs(spectrum_energy(r.discrete, r.continuous) - energy(s)) / energy(s) < 1e-3);
}

TEST_CASE("edge check") {
  const TimeGrid g = TimeGrid::span(-3, 3, 0.01);
  CHECK_THROWS_AS(scattering_coeffs(test::sech_signal(g), cplx(0, 0.5)), NfdmError);
  CHECK_NOTHROW(scattering_coeffs(test::sech_signal(g), cplx(0, 0.5), ZsOptions{0.0}));
}
