#pragma once

#include "nfdm/core.hpp"
#include "nfdm/nls_sim.hpp"
#include "nfdm/zs_forward.hpp"

#include <functional>
#include <vector>

namespace nfdm {

struct PerturbationReport {
  cplx delta_lambda;
  cplx inner_uv;
  double variance_estimate = 0.0;  // E|delta_lambda|^2 per unit noise density (white-noise limit)
};

// First-order eigenvalue shift for q -> q + n:
//   lambda1 = -j int (n v2^2 + n* v1^2) dt / (2 int v1 v2 dt)
PerturbationReport eigenvalue_first_order_shift(const TimeSignal& s, cplx lambda, const Eigenvector& v,
                                                const TimeSignal& noise);

struct DriftOptions {
  bool j_substitution = true;  // noise enters as j n
  double phase = 0.0;          // constant part of the soliton phase Phi
  double t_center = 0.0;
};

struct DriftRates {
  double alpha_rate = 0.0;
  double omega_rate = 0.0;
};

// alpha_z = -int sech(tau) Re nbar dtau,  omega_z = -int sech(tau) tanh(tau) Im nbar dtau,
// nbar = n exp(j Phi), Phi = alpha t + phase, tau = omega (t - t_center).
DriftRates soliton_drift_rates(double alpha, double omega, const TimeSignal& noise, const DriftOptions& opt = {});

double omega_conditional_pdf(double omega, double omega0, double sigma2, double z);
// Integral of the density over [omega0 - span, omega0 + span] (span in standard deviations).
double omega_pdf_mass(double omega0, double sigma2, double z, double n_std = 12.0);

struct Moments {
  double mean = 0.0;
  double variance = 0.0;
};

Moments energy_drift_moments(double E0, double sigma2, double z);

struct ContinuousNoiseModel {
  double density = 1e-6;     // E{n n*} = density delta_W
  double bandwidth = 4.0;    // W
  int trials = 1000;
  std::uint64_t seed = 1;
};

struct ContinuousPerturbationReport {
  double printed_quadrature = 0.0;    // formula as printed (leading minus, |y0|^4 integrand)
  double corrected_quadrature = 0.0;  // density * int (1+|y0|^4) |A/a|^4 dt
  double monte_carlo = 0.0;           // E|delta qhat|^2 from re-solved spectra
  double discrepancy = 0.0;           // monte_carlo - printed_quadrature
  bool unbounded = false;
  std::vector<cplx> samples;          // delta qhat per trial
};

ContinuousPerturbationReport continuous_amp_perturbation(const TimeSignal& s, double lambda,
                                                         const ContinuousNoiseModel& noise);

struct NormalityTest {
  double skewness = 0.0;
  double excess_kurtosis = 0.0;
  double statistic = 0.0;  // D'Agostino-Pearson K^2
  double p_value = 0.0;
};

NormalityTest dagostino_pearson(const std::vector<double>& x);

// Pearson chi-square goodness of fit against a distribution function; the outermost bins
// extend to infinity. Bins with expected count below 5 are merged. Returns the p-value.
double chi_square_gof(const std::vector<double>& x, const std::vector<double>& edges,
                      const std::function<double(double)>& cdf, int n_fitted_params = 0);

double chi_square_sf(double x, double dof);

}  // namespace nfdm
