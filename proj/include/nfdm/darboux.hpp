#pragma once

#include "nfdm/core.hpp"

#include <vector>

namespace nfdm {

// Two-component function sampled on a grid; the scale of each sample pair is arbitrary
// (jointly normalized to unit max-norm), the true value being v * exp(log_scale).
struct EigvecSamples {
  cplx lambda;
  VectorXc v1, v2;
  VectorXr log_scale;
};

struct DarbouxState {
  int k = 0;
  TimeSignal q;
  std::vector<cplx> lambdas;         // all eigenvalues in insertion order
  std::vector<EigvecSamples> eigvecs;  // eigenvectors for lambdas[k..N-1] w.r.t. q
};

// Seeds v = [A e^{-j lambda t}, B e^{j lambda t}] with A = exp(j arg q), B = |q| taken from each
// seed amplitude q.
std::vector<EigvecSamples> seed_eigenvectors(const DiscreteSpectrum& seeds, const TimeGrid& grid);

// Seed amplitudes that make the Darboux recursion produce the canonical amplitudes
// b(lambda_j)/a'(lambda_j) = q_j for the whole eigenvalue set.
DiscreteSpectrum canonical_to_seed(const DiscreteSpectrum& canonical);
DiscreteSpectrum seed_to_canonical(const DiscreteSpectrum& seeds);

DarbouxState darboux_init(const DiscreteSpectrum& seeds, const TimeGrid& grid);
DarbouxState darboux_step(const DarbouxState& state);

struct SynthesisWarnings {
  bool window_too_narrow = false;
  double edge_ratio = 0.0;
};

// N-soliton with canonical spectral amplitudes; eigenvalues inserted in ascending Im order.
TimeSignal multisoliton(const DiscreteSpectrum& ds, const TimeGrid& grid, SynthesisWarnings* warn = nullptr);

DiscreteSpectrum propagate_spectrum(const DiscreteSpectrum& ds, double z);

}  // namespace nfdm
