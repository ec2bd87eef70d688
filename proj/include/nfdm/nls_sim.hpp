#pragma once

#include "nfdm/core.hpp"

#include <cstdint>
#include <random>
#include <vector>

namespace nfdm {

using Rng = std::mt19937_64;

// Counter-based per-trial seed derived from a master seed (splitmix64 finalizer).
std::uint64_t trial_seed(std::uint64_t master, std::uint64_t index);

struct LinkConfig {
  double z_total = 1.0;
  int n_steps = 1000;
  double noise_density = 0.0;    // D in E{n n*} = D delta_W(t-t') delta(z-z')
  double noise_bandwidth = 1.0;  // W, cycles per unit time
  std::uint64_t seed = 0;

  void validate() const;
};

struct SimReport {
  bool aliasing_risk = false;
  double energy_in = 0.0;
  double energy_out = 0.0;
};

// Symmetric split step for j q_z = q_tt + 2|q|^2 q + n. Noise is drawn from `rng`
// after every full step when link.noise_density > 0.
TimeSignal ssfm_propagate(const TimeSignal& s, const LinkConfig& link, Rng& rng, SimReport* rep = nullptr);
// Convenience overload seeding the generator from link.seed.
TimeSignal ssfm_propagate(const TimeSignal& s, const LinkConfig& link, SimReport* rep = nullptr);

// Adds circular Gaussian noise, flat on |f| <= W and zero outside, with E|n(t)|^2 = 2 W density dz.
TimeSignal inject_noise(const TimeSignal& s, double density, double dz, double W, Rng& rng);

TimeSignal backpropagate(const TimeSignal& s, const LinkConfig& link);

// Ideal brick-wall filter keeping |f - center| <= half_bandwidth.
TimeSignal lowpass_filter(const TimeSignal& s, double half_bandwidth, double center = 0.0);

// Exact dispersion-only transfer over distance z.
TimeSignal linear_propagate(const TimeSignal& s, double z);

struct WdmConfig {
  int n_channels = 5;
  double channel_spacing = 1.0;   // cycles per unit time
  double symbol_period = 2.0;     // raised-cosine symbol period
  double rolloff = 0.5;
  int n_spans = 10;
  double span_length = 0.5;
  int steps_per_span = 50;
  double noise_density = 0.0;
  double noise_bandwidth = 4.0;
  double coi_amplitude = 0.5;       // peak amplitude scale for the COI symbol
  double interferer_ratio = 1.0;    // interferer amplitude / COI amplitude
  int qam_order = 16;
  TimeGrid grid{2048, -32.0, 1.0 / 32.0};

  void validate() const;
  double half_bandwidth() const { return (1.0 + rolloff) / (2.0 * symbol_period); }
};

// Raised-cosine (spectrum) pulse with unit peak centered at t0 with carrier frequency fc.
VectorXc rc_pulse(const TimeGrid& grid, double symbol_period, double rolloff, double t0 = 0.0, double fc = 0.0);

// Periodic raised-cosine train: symbol i sits at t_start + i * symbol_period. The period must be a
// whole number of samples and fc a multiple of the frequency resolution.
VectorXc rc_train(const TimeGrid& grid, double symbol_period, double rolloff, const std::vector<cplx>& symbols,
                  double fc = 0.0);

// Unit-average-energy square QAM points.
std::vector<cplx> qam_constellation(int order);

struct WdmRun {
  TimeSignal received;     // COI after filtering and backpropagation
  std::vector<cplx> tx;    // COI symbols
  std::vector<cplx> rx;    // received samples at the symbol centres divided by coi_amplitude
};

int wdm_slots(const WdmConfig& cfg);
double wdm_launch_power(const WdmConfig& cfg);

// One realization: COI and interferer trains drawn from the QAM constellation, per span
// propagation then drop-and-add of every non-COI band, final COI filter and backpropagation.
WdmRun wdm_link_run(const WdmConfig& cfg, Rng& rng);

}  // namespace nfdm
