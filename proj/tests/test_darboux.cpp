#include <doctest.h>

#include "helpers.hpp"
#include "nfdm/darboux.hpp"
#include "nfdm/oracles.hpp"
#include "nfdm/zs_forward.hpp"

using namespace nfdm;

TEST_CASE("seed eigenvectors") {
  const TimeGrid g(3, -1.0, 1.0);  // t = -1, 0, 1
  auto v = seed_eigenvectors(DiscreteSpectrum({{cplx(0, 0.5), 1.0}}), g);
  CHECK(std::abs(v[0].v1(1) - 1.0) < 1e-15);
  CHECK(std::abs(v[0].v2(1) - 1.0) < 1e-15);
  v = seed_eigenvectors(DiscreteSpectrum({{cplx(0, 0.25), 0.5}}), g);
  CHECK(std::abs(v[0].v1(1) - 1.0) < 1e-15);
  CHECK(std::abs(v[0].v2(1) - 0.5) < 1e-15);
  v = seed_eigenvectors(DiscreteSpectrum({{cplx(0, 0.5), std::exp(J * PI / 2.0)}}), g);
  CHECK(std::abs(v[0].v1(1) - J) < 1e-15);
  CHECK(std::abs(v[0].v2(1) - 1.0) < 1e-15);
  // joint max-norm scaling with the log-scale carrying the magnitude
  CHECK(std::max(std::abs(v[0].v1(0)), std::abs(v[0].v2(0))) == doctest::Approx(1.0));
}

TEST_CASE("seed calibration round trip") {
  DiscreteSpectrum ds({{cplx(0.1, 0.3), cplx(1.2, -0.4)}, {cplx(-0.3, 0.7), cplx(0.2, 2.0)}, {cplx(0, 1), 1.0}});
  const DiscreteSpectrum back = seed_to_canonical(canonical_to_seed(ds));
  for (std::size_t i = 0; i < ds.size(); ++i) CHECK(std::abs(back.entries[i].amplitude - ds.entries[i].amplitude) < 1e-14);
  // single eigenvalue on the imaginary axis with real amplitude needs a seed phase of -j
  const DiscreteSpectrum s2 = canonical_to_seed(DiscreteSpectrum({{cplx(0, 0.5), 1.0}}));
  CHECK(std::abs(s2.entries[0].amplitude - cplx(0, -1)) < 1e-15);
}

TEST_CASE("single soliton agrees with the closed form") {
  const TimeGrid g = TimeGrid::span(-30, 30, 1.0 / 256);
  for (auto [lam, amp] : {std::pair{cplx(0, 0.5), cplx(1.0)}, std::pair{cplx(0.5, 0.5), cplx(0.3, 0.8)},
                          std::pair{cplx(-0.2, 0.8), cplx(-2.0, 1.0)}}) {
    const TimeSignal d = multisoliton(DiscreteSpectrum({{lam, amp}}), g);
    const TimeSignal c = single_soliton_closed_form(lam, amp, g);
    CHECK(test::max_abs_diff(d, c) < 1e-10);
  }
  // alpha = omega = 1: envelope sech(t - t0) with t0 = log|q|
  const cplx amp = 2.5;
  const TimeSignal d = multisoliton(DiscreteSpectrum({{cplx(0.5, 0.5), amp}}), g);
  const double t0 = std::log(std::abs(amp));
  double err = 0.0;
  for (int k = 0; k < g.n_samples; ++k) err = std::max(err, std::abs(std::abs(d.samples(k)) - 1.0 / std::cosh(g.t(k) - t0)));
  CHECK(err < 1e-10);
}

TEST_CASE("two-soliton matches the Riemann-Hilbert oracle") {
  const TimeGrid g = TimeGrid::span(-30, 30, 1.0 / 256);
  const DiscreteSpectrum ds({{cplx(0, 0.25), 1.0}, {cplx(0, 0.5), 1.0}});
  CHECK(test::max_abs_diff(multisoliton(ds, g), rh_multisoliton(ds, g).signal) < 1e-8);
}

TEST_CASE("S4 two-soliton") {
  const TimeGrid g = TimeGrid::span(-50, 50, 1.0 / 256);
  const TimeSignal s = multisoliton(DiscreteSpectrum({{cplx(0, 0.25), 1.0}, {cplx(0, 0.5), 1.0}}), g);
  CHECK(std::abs(energy(s) - 3.0) < 1e-3);
  const double T0 = 2.0 * std::acosh(std::sqrt(2.0));
  CHECK(measure_extents(s).t_fwhm / T0 == doctest::Approx(4.25).epsilon(0.01));
}

TEST_CASE("empty spectrum gives zero signal") {
  const TimeGrid g(32, 0, 0.1);
  CHECK(multisoliton(DiscreteSpectrum(), g).samples.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("energy equals four times the eigenvalue imaginary parts") {
  std::mt19937_64 rng(7);
  const TimeGrid g = TimeGrid::span(-40, 40, 1.0 / 256);
  for (int n = 1; n <= 4; ++n) {
    const DiscreteSpectrum ds = test::random_spectrum(rng, n, -0.5, 0.5, 0.3, 1.0, 0.15, 0.5, 2.0);
    double e = 0.0;
    for (const auto& en : ds.entries) e += 4.0 * en.lambda.imag();
    SynthesisWarnings w;
    const TimeSignal s = multisoliton(ds, g, &w);
    CHECK_FALSE(w.window_too_narrow);
    CHECK(std::abs(energy(s) - e) / e < 1e-3);
  }
}

TEST_CASE("insertion order does not matter") {
  const TimeGrid g = TimeGrid::span(-30, 30, 1.0 / 128);
  const DiscreteSpectrum ds({{cplx(0.2, 0.4), cplx(0.7, 0.2)}, {cplx(-0.3, 0.6), 1.5}, {cplx(0.0, 0.9), cplx(0, 1)}});
  const DiscreteSpectrum seeds = canonical_to_seed(ds);
  auto run = [&](std::vector<int> order) {
    DiscreteSpectrum s;
    for (int i : order) s.entries.push_back(seeds.entries[i]);
    DarbouxState st = darboux_init(s, g);
    while (!st.eigvecs.empty()) st = darboux_step(st);
    return st.q;
  };
  const TimeSignal a = run({0, 1, 2});
  CHECK(test::max_abs_diff(a, run({2, 0, 1})) < 1e-8);
  CHECK(test::max_abs_diff(a, run({1, 2, 0})) < 1e-8);
}

TEST_CASE("eigenvalues accrete one per step") {
  const TimeGrid g = TimeGrid::span(-40, 40, 1.0 / 512);
  const DiscreteSpectrum ds({{cplx(0.0, 0.3), 1.0}, {cplx(0.3, 0.5), 0.8}, {cplx(-0.2, 0.7), 1.2}});
  DarbouxState st = darboux_init(canonical_to_seed(ds), g);
  for (std::size_t k = 1; k <= ds.size(); ++k) {
    st = darboux_step(st);
    const auto rep = find_eigenvalues(st.q);
    REQUIRE(rep.eigenvalues.size() == k);
    for (std::size_t i = 0; i < k; ++i) {
      double best = 1e9;
      for (cplx l : rep.eigenvalues) best = std::min(best, std::abs(l - ds.entries[i].lambda));
      CHECK(best < 1e-5);
    }
  }
}

TEST_CASE("six-soliton round trip") {
  const TimeGrid g = TimeGrid::span(-50, 50, 1.0 / 256);
  DiscreteSpectrum ds;
  for (int i = 0; i < 6; ++i) ds.entries.push_back({cplx(0, 0.2 + 0.2 * i), 1.0});
  const auto rep = find_eigenvalues(multisoliton(ds, g));
  REQUIRE(rep.eigenvalues.size() == 6);
  for (int i = 0; i < 6; ++i) CHECK(std::abs(rep.eigenvalues[i] - ds.entries[i].lambda) < 1e-4);
}

TEST_CASE("spectral propagation law") {
  const DiscreteSpectrum ds({{cplx(0, 0.5), 1.0}});
  CHECK(propagate_spectrum(ds, 0.0).entries[0].amplitude == cplx(1.0));
  const cplx a = propagate_spectrum(ds, 1.0).entries[0].amplitude;
  CHECK(std::abs(a - std::exp(J)) < 1e-15);
  const cplx b = propagate_spectrum(DiscreteSpectrum({{cplx(0.5, 0.5), 1.0}}), 0.3).entries[0].amplitude;
  CHECK(std::abs(b) == doctest::Approx(std::exp(0.6)));
}
