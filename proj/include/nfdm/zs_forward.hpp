#pragma once

#include "nfdm/core.hpp"

#include <cmath>
#include <vector>

namespace nfdm {

struct ScatteringCoeffs {
  cplx a;
  cplx b;
  cplx a_prime;
};

struct ZsOptions {
  // edge magnitude relative to peak above which NonDecayingSignal is raised; <= 0 disables
  double edge_tol = 1e-6;
};

struct EigenSearchConfig {
  // search rectangle; an empty box (re_min >= re_max) is sized from the signal
  double re_min = 0.0, re_max = 0.0, im_min = 0.0, im_max = 0.0;
  int nx = 32, ny = 32;
  double newton_tol = 1e-12;
  int newton_max_iter = 60;
  double min_im = 1e-3;
  double eps_sep = 1e-4;
  // compare the number of roots with the winding number of a on the box boundary
  // and densify the seed grid until they agree
  bool argument_check = true;
  int max_refinements = 3;
  ZsOptions zs;
};

struct EigenSearchReport {
  std::vector<cplx> eigenvalues;
  std::vector<double> residuals;  // |a(lambda_j)|
  int failed_seeds = 0;
  int winding_number = -1;        // -1 when not computed
};

// One transfer-matrix step of the ZS system over a cell of width h with constant q.
// Returns M and dM/dlambda such that v(t+h) = M v(t).
template <typename Real>
struct ZsStep {
  using C = std::complex<Real>;
  C m11, m12, m21, m22;
  C d11, d12, d21, d22;

  ZsStep(C lambda, C q, Real h) {
    const C k2 = -(lambda * lambda + std::norm(q));
    const C k = std::sqrt(k2);
    C c, s, d;
    if (std::abs(k2) * h * h > Real(1e-6)) {
      c = std::cosh(k * h);
      s = std::sinh(k * h) / k;
      d = (h * c - s) / k2;
    } else {
      const C x = k2 * h * h;
      c = Real(1) + x / Real(2) + x * x / Real(24);
      s = h * (Real(1) + x / Real(6) + x * x / Real(120));
      d = h * h * h * (Real(1) / Real(3) + x / Real(30) + x * x / Real(840));
    }
    const C jl(0, 1);
    m11 = c - jl * lambda * s;
    m12 = s * q;
    m21 = -s * std::conj(q);
    m22 = c + jl * lambda * s;
    const C lh = -lambda * h * s;
    const C ld = -lambda * d;
    d11 = lh + ld * (-jl * lambda) - jl * s;
    d12 = ld * q;
    d21 = -ld * std::conj(q);
    d22 = lh + ld * (jl * lambda) + jl * s;
  }
};

ScatteringCoeffs scattering_coeffs(const TimeSignal& s, cplx lambda, const ZsOptions& opt = {});

struct ContinuousResult {
  ContinuousSpectrum spectrum;
  std::vector<double> near_zero_lambdas;  // real grid points where |a| < 1e-12
};

ContinuousResult continuous_spectrum(const TimeSignal& s, const VectorXr& lambda_grid, const ZsOptions& opt = {});

EigenSearchReport find_eigenvalues(const TimeSignal& s, const EigenSearchConfig& cfg = {});

// Newton refinement from nominal guesses (no grid scan); roots that fail are dropped.
EigenSearchReport refine_eigenvalues(const TimeSignal& s, const std::vector<cplx>& guesses,
                                     const EigenSearchConfig& cfg = {});

DiscreteSpectrum discrete_amplitudes(const TimeSignal& s, const std::vector<cplx>& eigenvalues,
                                     const EigenSearchConfig& cfg = {});

struct NftResult {
  DiscreteSpectrum discrete;
  ContinuousSpectrum continuous;
  EigenSearchReport report;
};

NftResult nft(const TimeSignal& s, const VectorXr& lambda_grid, const EigenSearchConfig& cfg = {});

double spectrum_energy(const DiscreteSpectrum& ds, const ContinuousSpectrum& cs);

struct Eigenvector {
  VectorXc v1, v2;
};

// Bound-state eigenvector v(t_k, lambda) at the sample times, built from the left Jost
// solution before the energy centroid and b times the right Jost solution after it.
Eigenvector bound_state(const TimeSignal& s, cplx lambda);

// Left Jost solution, v -> [1, 0] e^{-j lambda t} as t -> -infinity, at the sample times.
Eigenvector jost_left(const TimeSignal& s, cplx lambda);

// Default search rectangle sized from the signal energy and bandwidth.
EigenSearchConfig auto_search_box(const TimeSignal& s, EigenSearchConfig cfg);

}  // namespace nfdm
