#pragma once

#include "nfdm/core.hpp"
#include "nfdm/nls_sim.hpp"

#include <cstdint>
#include <functional>
#include <limits>
#include <string>
#include <vector>

namespace nfdm {

struct Symbol {
  std::string label;
  DiscreteSpectrum ds;
  ContinuousSpectrum cont;  // empty unless the constellation lives on the continuous spectrum
  TimeSignal waveform;
  SignalExtents ext;        // t_99 of an all-zero symbol is the slot of the shortest nonzero symbol
};

struct Constellation {
  std::vector<Symbol> symbols;
  std::vector<double> priors;

  std::size_t size() const { return symbols.size(); }
  void validate() const;
};

// Extents are measured with the window centered at t = 0, as for the published signal sets.
ExtentOptions signal_set_extent_options();

// {0, (0.5j,1), (0.25j,0.5), {(0.25j,1),(0.5j,1)}}
Constellation build_signal_set_A(const TimeGrid& grid, const ExtentOptions& eo = signal_set_extent_options());
// supports {}, {0.5j}, {0.25j}, {0.25j,0.5j} with amplitudes from {0.5, 1, 1.5}
Constellation build_signal_set_B(const TimeGrid& grid, const ExtentOptions& eo = signal_set_extent_options());

struct GridSpec {
  int n_levels = 30;
  double im_max = 2.0;       // eigenvalues k * im_max / n_levels j, k = 1..n_levels
  int max_order = 6;
  std::vector<cplx> amplitudes{cplx(1.0)};
  double max_t99 = std::numeric_limits<double>::infinity();
  double max_bw99 = std::numeric_limits<double>::infinity();
  std::size_t max_symbols = 0;  // 0 keeps every enumerated symbol; otherwise a seeded random subset
  std::uint64_t seed = 1;
  TimeGrid grid{4096, -32.0, 1.0 / 64.0};
  ExtentOptions extents;
};

struct GridConstellation {
  Constellation constellation;
  std::size_t enumerated = 0;
  std::size_t sampled_out = 0;
  std::size_t pruned_duration = 0;
  std::size_t pruned_bandwidth = 0;
};

GridConstellation build_multisoliton_grid(const GridSpec& spec);

struct DetectOptions {
  double beta = 0.0;  // weight of the amplitude log-distance
};

// Eigenvalue multiset distance under the best assignment; unmatched eigenvalues cost Im lambda.
double eigenvalue_set_distance(const DiscreteSpectrum& a, const DiscreteSpectrum& b, double beta = 0.0,
                               double* amp_distance = nullptr);

std::size_t detect_discrete(const DiscreteSpectrum& rx, const Constellation& c, const DetectOptions& opt = {});

// (1/pi) int log(1 + |x - y|^2) dlambda on the shared grid
double log_euclidean_distance(const ContinuousSpectrum& x, const ContinuousSpectrum& y);
std::size_t detect_continuous(const ContinuousSpectrum& rx, const Constellation& c);

struct TransitionMatrix {
  Eigen::Matrix<long, Eigen::Dynamic, Eigen::Dynamic> counts;
  std::vector<long> row_trials;

  // add-one smoothing: (count + 1) / (row_trials + |Y|); rows without trials are dropped
  Eigen::MatrixXd smoothed() const;
  double diagonal_fraction() const;
};

using ChannelRunner = std::function<std::size_t(std::size_t tx, Rng& rng)>;

// Trials are seeded by trial_seed(seed, tx * n_trials + i), independent of scheduling.
TransitionMatrix estimate_transition_matrix(std::size_t n_symbols, const ChannelRunner& run, int n_trials,
                                            std::uint64_t seed);

struct CapacityResult {
  double capacity_bits = 0.0;
  Eigen::VectorXd input;
  int iterations = 0;
};

CapacityResult blahut_arimoto(const Eigen::MatrixXd& channel, double tol = 1e-12, int max_iter = 100000);
CapacityResult blahut_arimoto(const TransitionMatrix& tm, double tol = 1e-12, int max_iter = 100000);

double mutual_information(const Eigen::MatrixXd& channel, const Eigen::VectorXd& input);

enum class DurationMode { Average, Max };

struct EfficiencyReport {
  double bits_per_symbol = 0.0;
  double avg_duration = 0.0;
  double max_bandwidth = 0.0;
  double avg_power = 0.0;
  double rho = 0.0;
};

EfficiencyReport spectral_efficiency(double bits, const std::vector<double>& durations,
                                     const std::vector<double>& bandwidths, const std::vector<double>& powers,
                                     const std::vector<double>& priors, DurationMode mode);
EfficiencyReport spectral_efficiency(double bits, const Constellation& c, DurationMode mode = DurationMode::Average);

// 1-soliton accounting: T = 7/w0, P = w0^2/6.2, BW = 0.95 w0; a zero symbol takes the slot
// of the shortest nonzero symbol.
EfficiencyReport soliton_efficiency(double bits, const std::vector<double>& omega0, const std::vector<double>& priors,
                                    DurationMode mode = DurationMode::Average);

// Published constants for the replication mode.
struct TableConstants {
  double T1 = 5.2637;
  double W0 = 0.5714;
  double set_a_avg_duration = 1.65;   // in units of T1
  double set_b_avg_duration = 2.236;  // in units of T1
};

struct ReplicationRatios {
  double rho0 = 0.0;
  double set_a_ratio = 0.0;
  double set_b_ratio = 0.0;
  double set_b_fixed_slot_ratio = 0.0;  // log2(16) / 3 with 3 T1 slots
};

ReplicationRatios table_mode_ratios(const TableConstants& tc = {});

struct CapacityPoint {
  double snr = 0.0;             // sqrt(P) / (sigma^2 z)
  double mi_bits = 0.0;
  double asymptote_bits = 0.0;  // 1/2 log2(1 + SNR) - 1/2 log2(e)
  double limit_bits = 0.0;      // 1/2 log2(SNR) + (-ln2/2 + (gamma_E + ln2)/4) / ln2
};

// Mutual information of the channel omega | omega0 ~ N(omega0, sigma^2 z omega0 / 2) under the
// half-Gaussian input with parameter P, discretized to `levels` equiprobable input points.
std::vector<CapacityPoint> capacity_1soliton_amplitude(const std::vector<double>& snr_grid, int levels = 512);

struct QamRateReport {
  cplx gain = 0.0;            // least-squares common gain E[y x*] / E|x|^2
  double snr_eff = 0.0;       // |h|^2 E|x|^2 / E|y - h x|^2
  double gaussian_bits = 0.0; // log2(1 + snr_eff)
  double capacity_bits = 0.0; // Blahut-Arimoto on hard decisions after gain correction
  TransitionMatrix tm;
};

// tx must hold exact constellation points.
QamRateReport qam_rate(const std::vector<cplx>& tx, const std::vector<cplx>& rx, const std::vector<cplx>& points);

}  // namespace nfdm
