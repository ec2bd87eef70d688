#include "nfdm/oracles.hpp"

#include <Eigen/LU>

#include <algorithm>
#include <cmath>

namespace nfdm {

RhResult rh_multisoliton(const DiscreteSpectrum& ds, const TimeGrid& grid, RhMethod method) {
  ds.validate(0.0);
  RhResult out{TimeSignal::zeros(grid)};
  const int N = static_cast<int>(ds.size());
  if (N == 0) return out;
  const auto lam = ds.eigenvalues();

  // C(m, i) = 1 / (lambda_i* - lambda_m)
  Eigen::MatrixXcd C(N, N);
  for (int m = 0; m < N; ++m)
    for (int i = 0; i < N; ++i) C(m, i) = 1.0 / (std::conj(lam[i]) - lam[m]);

  double worst_rcond = 1.0;
  for (int k = 0; k < grid.n_samples; ++k) {
    const double t = grid.t(k);
    VectorXc F(N);
    for (int m = 0; m < N; ++m) F(m) = ds.entries[m].amplitude * std::exp(2.0 * J * lam[m] * t);

    if (method == RhMethod::Direct) {
      Eigen::MatrixXcd K(N, N);
      for (int m = 0; m < N; ++m)
        for (int i = 0; i < N; ++i) K(m, i) = F(m) * C(m, i);
      const Eigen::MatrixXcd A = Eigen::MatrixXcd::Identity(N, N) + K.conjugate() * K;
      Eigen::PartialPivLU<Eigen::MatrixXcd> lu(A);
      worst_rcond = std::min(worst_rcond, lu.rcond());
      const VectorXc x = lu.solve(F.conjugate());
      out.signal.samples(k) = -2.0 * J * x.sum();
      continue;
    }

    // unknowns (a'_1..a'_N, b'_1..b'_N); q = -2j sum a'
    //   a'_m / F_m* - sum_i C(i,m) b'_i = 1
    //   sum_i conj(C(i,m)) a'_i + b'_m / F_m = 0
    // rows are multiplied by F_m* (resp. F_m) where |F_m| < 1
    Eigen::MatrixXcd A = Eigen::MatrixXcd::Zero(2 * N, 2 * N);
    VectorXc r = VectorXc::Zero(2 * N);
    for (int m = 0; m < N; ++m) {
      const bool big = std::abs(F(m)) >= 1.0;
      const cplx s1 = big ? cplx(1.0) : std::conj(F(m));
      const cplx s2 = big ? cplx(1.0) : F(m);
      A(m, m) = s1 / std::conj(F(m));
      for (int i = 0; i < N; ++i) A(m, N + i) = -s1 * C(i, m);
      r(m) = s1;
      for (int i = 0; i < N; ++i) A(N + m, i) = s2 * std::conj(C(i, m));
      A(N + m, N + m) += s2 / F(m);
    }
    Eigen::PartialPivLU<Eigen::MatrixXcd> lu(A);
    worst_rcond = std::min(worst_rcond, lu.rcond());
    const VectorXc x = lu.solve(r);
    out.signal.samples(k) = -2.0 * J * x.head(N).sum();
  }
  out.max_condition = worst_rcond > 0 ? 1.0 / worst_rcond : INFINITY;
  out.ill_conditioned = out.max_condition > 1e12;
  return out;
}

HirotaResult hirota_multisoliton(const DiscreteSpectrum& ds, const TimeGrid& grid, double z) {
  ds.validate(0.0);
  const int N = static_cast<int>(ds.size());
  if (N > 3) throw NfdmError(ErrorCode::UnsupportedOrder, "Hirota synthesis supports N <= 3");
  HirotaResult out{TimeSignal::zeros(grid), VectorXr::Zero(grid.n_samples)};
  if (N == 0) return out;

  // wave numbers K_i and phase constants; the second half are conjugates
  std::vector<cplx> K(2 * N), c0(2 * N), kz(2 * N);
  for (int j = 0; j < N; ++j) {
    const cplx l = ds.entries[j].lambda;
    K[j] = -2.0 * J * std::conj(l);
    c0[j] = std::log(-2.0 * J * std::conj(ds.entries[j].amplitude));
    kz[j] = 4.0 * J * std::conj(l) * std::conj(l);
    K[N + j] = std::conj(K[j]);
    c0[N + j] = std::conj(c0[j]);
    kz[N + j] = std::conj(kz[j]);
  }

  struct Term {
    std::vector<int> idx;
    cplx log_coeff;
    bool to_f;
  };
  std::vector<Term> terms;
  for (int mask = 0; mask < (1 << (2 * N)); ++mask) {
    int nu = 0, nc = 0;
    std::vector<int> idx;
    for (int i = 0; i < 2 * N; ++i)
      if (mask & (1 << i)) {
        idx.push_back(i);
        (i < N ? nu : nc)++;
      }
    if (nu != nc && nu != nc + 1) continue;
    cplx lc = 0.0;
    for (std::size_t a = 0; a < idx.size(); ++a)
      for (std::size_t b = a + 1; b < idx.size(); ++b) {
        const int i = idx[a], j = idx[b];
        const bool same = (i < N) == (j < N);
        lc += same ? 2.0 * std::log(K[i] - K[j]) : -2.0 * std::log(K[i] + K[j]);
      }
    for (int i : idx) lc += c0[i] + kz[i] * z;
    terms.push_back({idx, lc, nu == nc});
  }

  std::vector<cplx> ex(terms.size());
  for (int k = 0; k < grid.n_samples; ++k) {
    const double t = grid.t(k);
    double mf = -INFINITY, mg = -INFINITY;
    for (std::size_t m = 0; m < terms.size(); ++m) {
      cplx e = terms[m].log_coeff;
      for (int i : terms[m].idx) e += K[i] * t;
      ex[m] = e;
      (terms[m].to_f ? mf : mg) = std::max(terms[m].to_f ? mf : mg, e.real());
    }
    cplx sf = 0.0, sg = 0.0;
    for (std::size_t m = 0; m < terms.size(); ++m) {
      if (terms[m].to_f)
        sf += std::exp(ex[m] - mf);
      else
        sg += std::exp(ex[m] - mg);
    }
    out.signal.samples(k) = std::exp(mg - mf) * sg / sf;
    out.log_f(k) = mf + std::log(sf.real());
  }
  return out;
}

TimeSignal single_soliton_closed_form(cplx lambda, cplx amp, const TimeGrid& grid) {
  if (!(lambda.imag() > 0)) throw NfdmError(ErrorCode::InvalidArgument, "Im lambda must be positive");
  if (std::abs(amp) == 0.0) throw NfdmError(ErrorCode::InvalidArgument, "zero amplitude");
  const double alpha = 2.0 * lambda.real();
  const double omega = 2.0 * lambda.imag();
  const double t0 = std::log(std::abs(amp) / omega) / omega;
  const double phi0 = std::arg(amp);
  TimeSignal s = TimeSignal::zeros(grid);
  for (int k = 0; k < grid.n_samples; ++k) {
    const double t = grid.t(k);
    s.samples(k) = -J * omega * std::exp(-J * (alpha * t + phi0)) / std::cosh(omega * (t - t0));
  }
  return s;
}

}  // namespace nfdm
