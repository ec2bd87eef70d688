#include "nfdm/core.hpp"

#include "nfdm/fft.hpp"

#include <algorithm>
#include <cmath>

namespace nfdm {

const char* to_string(ErrorCode c) {
  switch (c) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::ZeroSignal: return "ZeroSignal";
    case ErrorCode::NonDecayingSignal: return "NonDecayingSignal";
    case ErrorCode::NoConvergence: return "NoConvergence";
    case ErrorCode::NotAnEigenvalue: return "NotAnEigenvalue";
    case ErrorCode::DegenerateRoot: return "DegenerateRoot";
    case ErrorCode::DegenerateEigenvector: return "DegenerateEigenvector";
    case ErrorCode::DegenerateEigenvalue: return "DegenerateEigenvalue";
    case ErrorCode::UnsupportedOrder: return "UnsupportedOrder";
    case ErrorCode::InvalidParams: return "InvalidParams";
    case ErrorCode::NonStochastic: return "NonStochastic";
    case ErrorCode::EmptyAfterPruning: return "EmptyAfterPruning";
    case ErrorCode::EnergyBlowup: return "EnergyBlowup";
    case ErrorCode::Parse: return "Parse";
    case ErrorCode::Io: return "Io";
  }
  return "Unknown";
}

TimeGrid::TimeGrid(int n, double t0, double step) : n_samples(n), t_start(t0), dt(step) {
  if (n < 2) throw NfdmError(ErrorCode::InvalidArgument, "time grid needs at least 2 samples");
  if (!(step > 0)) throw NfdmError(ErrorCode::InvalidArgument, "time step must be positive");
}

TimeGrid TimeGrid::span(double t_min, double t_max, double step) {
  const int n = static_cast<int>(std::llround((t_max - t_min) / step));
  return TimeGrid(n, t_min, step);
}

VectorXr TimeGrid::times() const {
  return VectorXr::LinSpaced(n_samples, t_start, t_start + (n_samples - 1) * dt);
}

TimeSignal::TimeSignal(const TimeGrid& g, VectorXc s) : grid(g), samples(std::move(s)) {
  if (samples.size() != g.n_samples)
    throw NfdmError(ErrorCode::InvalidArgument, "sample count does not match grid");
  if (!samples.allFinite()) throw NfdmError(ErrorCode::InvalidArgument, "non-finite samples");
}

TimeSignal TimeSignal::zeros(const TimeGrid& g) { return TimeSignal(g, VectorXc::Zero(g.n_samples)); }

std::vector<cplx> DiscreteSpectrum::eigenvalues() const {
  std::vector<cplx> out;
  out.reserve(entries.size());
  for (const auto& e : entries) out.push_back(e.lambda);
  return out;
}

void DiscreteSpectrum::validate(double eps_sep) const {
  for (std::size_t i = 0; i < entries.size(); ++i) {
    if (!(entries[i].lambda.imag() > 0))
      throw NfdmError(ErrorCode::InvalidArgument, "eigenvalue not in the upper half plane");
    if (std::abs(entries[i].amplitude) == 0.0)
      throw NfdmError(ErrorCode::InvalidArgument, "zero spectral amplitude");
    for (std::size_t k = 0; k < i; ++k)
      if (std::abs(entries[i].lambda - entries[k].lambda) <= eps_sep)
        throw NfdmError(ErrorCode::InvalidArgument, "eigenvalues closer than separation limit");
  }
}

DiscreteSpectrum DiscreteSpectrum::sorted() const {
  auto e = entries;
  std::stable_sort(e.begin(), e.end(), [](const SpectralEntry& a, const SpectralEntry& b) {
    if (a.lambda.imag() != b.lambda.imag()) return a.lambda.imag() < b.lambda.imag();
    return a.lambda.real() < b.lambda.real();
  });
  return DiscreteSpectrum(std::move(e));
}

static double scale_of(QuantityKind kind, const NormalizationScales& s) {
  if (!(s.t_scale > 0 && s.p_scale > 0 && s.z_scale > 0))
    throw NfdmError(ErrorCode::InvalidArgument, "normalization scales must be positive");
  switch (kind) {
    case QuantityKind::Time: return s.t_scale;
    case QuantityKind::Power: return s.p_scale;
    case QuantityKind::Distance: return s.z_scale;
  }
  return 1.0;
}

double to_physical(double x, QuantityKind kind, const NormalizationScales& s) { return x * scale_of(kind, s); }
double from_physical(double x, QuantityKind kind, const NormalizationScales& s) { return x / scale_of(kind, s); }

double energy(const TimeSignal& s) {
  if (s.samples.size() == 0) return 0.0;
  return trapezoid(s.samples.array().abs2(), s.grid.dt);
}

double edge_ratio(const TimeSignal& s) {
  const double pk = s.peak();
  if (pk == 0.0) return 0.0;
  const Eigen::Index n = s.samples.size();
  return std::max(std::abs(s.samples(0)), std::abs(s.samples(n - 1))) / pk;
}

namespace {

// Smallest symmetric window around `center` holding `fraction` of the total of a
// nonnegative density sampled at x (ascending, uniform), integrated with the
// trapezoid rule; the cumulative integral is interpolated linearly.
double centered_width(const VectorXr& x, const VectorXr& p, double center, double fraction) {
  const Eigen::Index n = x.size();
  const double h = x(1) - x(0);
  VectorXr cum(n);
  cum(0) = 0.0;
  for (Eigen::Index k = 1; k < n; ++k) cum(k) = cum(k - 1) + 0.5 * h * (p(k) + p(k - 1));
  const double total = cum(n - 1);
  if (total <= 0.0) return 0.0;
  auto F = [&](double xv) {
    if (xv <= x(0)) return 0.0;
    if (xv >= x(n - 1)) return total;
    const double u = (xv - x(0)) / h;
    const Eigen::Index k = std::min<Eigen::Index>(static_cast<Eigen::Index>(u), n - 2);
    const double w = u - k;
    return cum(k) + w * (cum(k + 1) - cum(k));
  };
  double lo = 0.0;
  double hi = std::max(center - x(0), x(n - 1) - center);
  for (int it = 0; it < 200 && hi - lo > 1e-13 * (1.0 + hi); ++it) {
    const double mid = 0.5 * (lo + hi);
    if (F(center + mid) - F(center - mid) >= fraction * total)
      hi = mid;
    else
      lo = mid;
  }
  return 2.0 * hi;
}

double weighted_mean(const VectorXr& x, const VectorXr& p) {
  const double s = p.sum();
  return s > 0 ? x.dot(p) / s : 0.0;
}

}  // namespace

SignalExtents measure_extents(const TimeSignal& s, const ExtentOptions& opt) {
  SignalExtents ext;
  ext.energy = energy(s);
  const VectorXr p = s.samples.cwiseAbs2();
  const double pk = p.size() ? p.maxCoeff() : 0.0;
  if (pk == 0.0) throw NfdmError(ErrorCode::ZeroSignal, "extents of an all-zero signal");
  const VectorXr t = s.grid.times();
  const Eigen::Index n = p.size();

  // power FWHM with linear interpolation at both crossings
  const double half = 0.5 * pk;
  Eigen::Index i0 = 0, i1 = n - 1;
  while (p(i0) < half) ++i0;
  while (p(i1) < half) --i1;
  double tl = t(i0), tr = t(i1);
  if (i0 > 0) tl = t(i0 - 1) + s.grid.dt * (half - p(i0 - 1)) / (p(i0) - p(i0 - 1));
  if (i1 < n - 1) tr = t(i1) + s.grid.dt * (p(i1) - half) / (p(i1) - p(i1 + 1));
  ext.t_fwhm = tr - tl;

  const double tc = opt.center == ExtentCenter::Centroid ? weighted_mean(t, p) : 0.0;
  ext.t_99 = centered_width(t, p, tc, opt.fraction);
  ext.p_avg = ext.t_99 > 0 ? ext.energy / ext.t_99 : 0.0;

  // ordinary-Fourier periodogram of the zero-padded signal, in ascending frequency
  const int pad = std::max(1, opt.pad_factor);
  const Eigen::Index m = n * pad;
  VectorXc padded = VectorXc::Zero(m);
  padded.head(n) = s.samples;
  const VectorXc X = fft(padded);
  const VectorXr f = fft_frequencies(static_cast<int>(m), s.grid.dt);
  const Eigen::Index neg = m / 2;  // bins with negative frequency start here
  VectorXr fs(m), ps(m);
  for (Eigen::Index k = 0; k < m; ++k) {
    const Eigen::Index src = (k + neg + (m % 2)) % m;
    fs(k) = f(src);
    ps(k) = std::norm(X(src));
  }
  const double fc = opt.center == ExtentCenter::Centroid ? weighted_mean(fs, ps) : 0.0;
  ext.bw_99 = centered_width(fs, ps, fc, opt.fraction);
  return ext;
}

}  // namespace nfdm
