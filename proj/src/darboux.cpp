#include "nfdm/darboux.hpp"

#include <algorithm>
#include <cmath>

namespace nfdm {

namespace {

// f_j = (l_j - l_j*) prod_{k != j} (l_j - l_k*) / (l_j - l_k)
cplx calibration_factor(const std::vector<cplx>& l, std::size_t j) {
  cplx f = l[j] - std::conj(l[j]);
  for (std::size_t k = 0; k < l.size(); ++k)
    if (k != j) f *= (l[j] - std::conj(l[k])) / (l[j] - l[k]);
  return f;
}

}  // namespace

std::vector<EigvecSamples> seed_eigenvectors(const DiscreteSpectrum& seeds, const TimeGrid& grid) {
  seeds.validate(0.0);
  std::vector<EigvecSamples> out;
  const int n = grid.n_samples;
  for (const auto& e : seeds.entries) {
    const cplx A = std::exp(J * std::arg(e.amplitude));
    const double B = std::abs(e.amplitude);
    EigvecSamples v;
    v.lambda = e.lambda;
    v.v1.resize(n);
    v.v2.resize(n);
    v.log_scale.resize(n);
    const double mu = e.lambda.imag(), nu = e.lambda.real();
    for (int k = 0; k < n; ++k) {
      const double t = grid.t(k);
      // log-magnitudes of the two components: |e^{-j lambda t}| = e^{mu t}
      const double l1 = mu * t;
      const double l2 = std::log(B) - mu * t;
      const double lm = std::max(l1, l2);
      v.v1(k) = A * std::exp(cplx(l1 - lm, -nu * t));
      v.v2(k) = std::exp(cplx(l2 - lm, nu * t));
      v.log_scale(k) = lm;
    }
    out.push_back(std::move(v));
  }
  return out;
}

DiscreteSpectrum canonical_to_seed(const DiscreteSpectrum& canonical) {
  const auto l = canonical.eigenvalues();
  DiscreteSpectrum s = canonical;
  for (std::size_t j = 0; j < l.size(); ++j) {
    // B/A = -q_j / f_j and the seed rule gives B/A = conj(seed amplitude)
    s.entries[j].amplitude = std::conj(-canonical.entries[j].amplitude / calibration_factor(l, j));
  }
  return s;
}

DiscreteSpectrum seed_to_canonical(const DiscreteSpectrum& seeds) {
  const auto l = seeds.eigenvalues();
  DiscreteSpectrum c = seeds;
  for (std::size_t j = 0; j < l.size(); ++j)
    c.entries[j].amplitude = -std::conj(seeds.entries[j].amplitude) * calibration_factor(l, j);
  return c;
}

DarbouxState darboux_init(const DiscreteSpectrum& seeds, const TimeGrid& grid) {
  DarbouxState st;
  st.k = 0;
  st.q = TimeSignal::zeros(grid);
  st.lambdas = seeds.eigenvalues();
  st.eigvecs = seed_eigenvectors(seeds, grid);
  return st;
}

DarbouxState darboux_step(const DarbouxState& state) {
  if (state.eigvecs.empty()) throw NfdmError(ErrorCode::InvalidArgument, "Darboux recursion already complete");
  DarbouxState next;
  next.k = state.k + 1;
  next.lambdas = state.lambdas;
  next.q = state.q;
  const EigvecSamples& p = state.eigvecs.front();
  const cplx l = p.lambda;
  const cplx lc = std::conj(l);
  const int n = state.q.size();

  VectorXr d(n);
  for (int k = 0; k < n; ++k) {
    d(k) = std::norm(p.v1(k)) + std::norm(p.v2(k));
    if (!(d(k) > 1e-300)) throw NfdmError(ErrorCode::DegenerateEigenvector, "eigenvector vanishes on the grid");
    next.q.samples(k) += 2.0 * J * (lc - l) * p.v1(k) * std::conj(p.v2(k)) / d(k);
  }

  for (std::size_t j = 1; j < state.eigvecs.size(); ++j) {
    const EigvecSamples& v = state.eigvecs[j];
    const cplx mu = v.lambda;
    EigvecSamples u;
    u.lambda = mu;
    u.v1.resize(n);
    u.v2.resize(n);
    u.log_scale = v.log_scale;
    for (int k = 0; k < n; ++k) {
      const double a1 = std::norm(p.v1(k)) / d(k), a2 = std::norm(p.v2(k)) / d(k);
      const cplx x = p.v1(k) * std::conj(p.v2(k)) / d(k);
      const cplx s11 = l * a1 + lc * a2;
      const cplx s12 = (l - lc) * x;
      const cplx s21 = (l - lc) * std::conj(x);
      const cplx s22 = lc * a1 + l * a2;
      const cplx w1 = (mu - s11) * v.v1(k) - s12 * v.v2(k);
      const cplx w2 = -s21 * v.v1(k) + (mu - s22) * v.v2(k);
      const double m = std::max(std::abs(w1), std::abs(w2));
      if (!(m > 0)) throw NfdmError(ErrorCode::DegenerateEigenvector, "updated eigenvector vanishes");
      u.v1(k) = w1 / m;
      u.v2(k) = w2 / m;
      u.log_scale(k) += std::log(m);
    }
    next.eigvecs.push_back(std::move(u));
  }
  return next;
}

TimeSignal multisoliton(const DiscreteSpectrum& ds, const TimeGrid& grid, SynthesisWarnings* warn) {
  ds.validate();
  if (ds.empty()) return TimeSignal::zeros(grid);
  DarbouxState st = darboux_init(canonical_to_seed(ds).sorted(), grid);
  while (!st.eigvecs.empty()) st = darboux_step(st);
  if (warn) {
    warn->edge_ratio = edge_ratio(st.q);
    warn->window_too_narrow = warn->edge_ratio > 1e-6;
  }
  return st.q;
}

DiscreteSpectrum propagate_spectrum(const DiscreteSpectrum& ds, double z) {
  DiscreteSpectrum out = ds;
  for (auto& e : out.entries) e.amplitude *= std::exp(-4.0 * J * e.lambda * e.lambda * z);
  return out;
}

}  // namespace nfdm
