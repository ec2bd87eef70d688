#include <doctest.h>

#include "helpers.hpp"
#include "nfdm/core.hpp"
#include "nfdm/io.hpp"

#include <sstream>

using namespace nfdm;

TEST_CASE("energy of simple signals") {
  const TimeGrid g = TimeGrid::span(-20, 20, 0.01);
  CHECK(energy(TimeSignal::zeros(g)) == 0.0);
  // int sech^2 = 2 tanh(20)
  CHECK(energy(test::sech_signal(g)) == doctest::Approx(2.0 * std::tanh(20.0)).epsilon(1e-4));
}

TEST_CASE("energy invariant under shift and phase rotation") {
  const TimeGrid g = TimeGrid::span(-30, 30, 0.01);
  TimeSignal a = test::sech_signal(g), b = TimeSignal::zeros(g);
  for (int k = 0; k < g.n_samples; ++k) b.samples(k) = std::exp(J * 0.7) / std::cosh(g.t(k) - 1.3);
  CHECK(std::abs(energy(a) - energy(b)) / energy(a) < 1e-12);
}

TEST_CASE("sech extents") {
  const TimeGrid g = TimeGrid::span(-40, 40, 1.0 / 128);
  const SignalExtents e = measure_extents(test::sech_signal(g));
  CHECK(e.t_fwhm == doctest::Approx(2.0 * std::acosh(std::sqrt(2.0))).epsilon(1e-4));
  CHECK(std::abs(e.t_fwhm - 1.763) < 0.01);
  // 99% of int sech^2 lies in |t| <= atanh(0.99); the spectrum is sech^2(pi^2 f)
  CHECK(e.t_99 == doctest::Approx(2.0 * std::atanh(0.99)).epsilon(1e-4));
  CHECK(e.bw_99 == doctest::Approx(2.0 * std::atanh(0.99) / (PI * PI)).epsilon(1e-3));
  CHECK(e.p_avg == doctest::Approx(e.energy / e.t_99));
}

TEST_CASE("extents of a zero signal") {
  CHECK_THROWS_AS(measure_extents(TimeSignal::zeros(TimeGrid(16, 0, 1))), NfdmError);
}

TEST_CASE("t_99 grows under dilation") {
  const TimeGrid g = TimeGrid::span(-60, 60, 1.0 / 32);
  double prev = 0.0;
  for (double sc : {1.0, 1.3, 2.0, 3.5}) {
    TimeSignal s = TimeSignal::zeros(g);
    for (int k = 0; k < g.n_samples; ++k) s.samples(k) = 1.0 / std::cosh(g.t(k) / sc);
    const double t99 = measure_extents(s).t_99;
    CHECK(t99 >= prev);
    prev = t99;
  }
}

TEST_CASE("physical scaling") {
  NormalizationScales s{25.246e-12, 0.5e-3, 1.0};
  CHECK(to_physical(1.0, QuantityKind::Time, s) == doctest::Approx(25.246e-12));
  CHECK(to_physical(0.0, QuantityKind::Power, s) == 0.0);
  CHECK(to_physical(0.38, QuantityKind::Power, s) == doctest::Approx(0.19e-3));
  for (double x : {0.1, 3.7, 1e5}) {
    const double y = from_physical(to_physical(x, QuantityKind::Distance, s), QuantityKind::Distance, s);
    CHECK(std::abs(y - x) <= 1e-15 * x);
  }
  CHECK_THROWS_AS(to_physical(1.0, QuantityKind::Time, NormalizationScales{0.0, 1.0, 1.0}), NfdmError);
}

TEST_CASE("signal CSV and JSON round trip") {
  const TimeGrid g(64, -3.2, 0.1);
  TimeSignal s = TimeSignal::zeros(g);
  for (int k = 0; k < g.n_samples; ++k) s.samples(k) = cplx(std::sin(0.3 * k) / 3.0, std::cos(0.7 * k) * 1e-7);
  std::stringstream ss;
  write_signal_csv(ss, s);
  const TimeSignal r = read_signal_csv(ss);
  CHECK(r.size() == s.size());
  CHECK((r.samples - s.samples).cwiseAbs().maxCoeff() == 0.0);
  CHECK(r.grid.dt == doctest::Approx(0.1));
  const TimeSignal rj = signal_from_json(nlohmann::json::parse(signal_to_json(s).dump()));
  CHECK((rj.samples - s.samples).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("malformed CSV reports the line") {
  std::stringstream ss("t,re,im\n0,1,0\n0.1,abc,0\n");
  try {
    read_signal_csv(ss);
    FAIL("expected parse error");
  } catch (const NfdmError& e) {
    CHECK(e.code() == ErrorCode::Parse);
    CHECK(std::string(e.what()).find("line 3") != std::string::npos);
  }
}

TEST_CASE("format_double is shortest round trip") {
  CHECK(format_double(0.1) == "0.1");
  CHECK(std::stod(format_double(1.0 / 3.0)) == 1.0 / 3.0);
}

TEST_CASE("discrete spectrum validation") {
  CHECK_THROWS_AS(DiscreteSpectrum({{cplx(0, -0.1), 1.0}}).validate(), NfdmError);
  CHECK_THROWS_AS(DiscreteSpectrum({{cplx(0, 0.5), 1.0}, {cplx(0, 0.50001), 1.0}}).validate(), NfdmError);
  CHECK_NOTHROW(DiscreteSpectrum({{cplx(0, 0.5), 1.0}, {cplx(0, 0.25), 1.0}}).validate());
}
