#pragma once

#include <Eigen/Dense>

#include <complex>
#include <stdexcept>
#include <string>
#include <vector>

namespace nfdm {

using cplx = std::complex<double>;
using VectorXc = Eigen::VectorXcd;
using VectorXr = Eigen::VectorXd;

inline constexpr cplx J{0.0, 1.0};
inline constexpr double PI = 3.14159265358979323846;

enum class ErrorCode {
  InvalidArgument,
  ZeroSignal,
  NonDecayingSignal,
  NoConvergence,
  NotAnEigenvalue,
  DegenerateRoot,
  DegenerateEigenvector,
  DegenerateEigenvalue,
  UnsupportedOrder,
  InvalidParams,
  NonStochastic,
  EmptyAfterPruning,
  EnergyBlowup,
  Parse,
  Io,
};

const char* to_string(ErrorCode c);

class NfdmError : public std::runtime_error {
 public:
  NfdmError(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}
  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

struct TimeGrid {
  int n_samples = 2;
  double t_start = 0.0;
  double dt = 1.0;

  TimeGrid() = default;
  TimeGrid(int n, double t0, double step);

  // Grid covering [t_min, t_max) with the given step.
  static TimeGrid span(double t_min, double t_max, double step);

  double t(int k) const { return t_start + k * dt; }
  double t_end() const { return t(n_samples - 1); }
  double window() const { return n_samples * dt; }
  VectorXr times() const;
};

struct TimeSignal {
  TimeGrid grid;
  VectorXc samples;

  TimeSignal() = default;
  TimeSignal(const TimeGrid& g, VectorXc s);
  static TimeSignal zeros(const TimeGrid& g);

  int size() const { return grid.n_samples; }
  double peak() const { return samples.size() ? samples.cwiseAbs().maxCoeff() : 0.0; }
};

struct SpectralEntry {
  cplx lambda;
  cplx amplitude;
};

struct DiscreteSpectrum {
  std::vector<SpectralEntry> entries;

  DiscreteSpectrum() = default;
  explicit DiscreteSpectrum(std::vector<SpectralEntry> e) : entries(std::move(e)) {}

  std::size_t size() const { return entries.size(); }
  bool empty() const { return entries.empty(); }
  std::vector<cplx> eigenvalues() const;

  // Throws InvalidArgument on Im lambda <= 0, zero amplitude or near-coincident eigenvalues.
  void validate(double eps_sep = 1e-4) const;
  // Returns a copy sorted by Im lambda then Re lambda.
  DiscreteSpectrum sorted() const;
};

struct ContinuousSpectrum {
  VectorXr lambda_grid;
  VectorXc values;
};

struct NormalizationScales {
  double t_scale = 1.0;  // seconds
  double p_scale = 1.0;  // watts
  double z_scale = 1.0;  // meters
};

enum class QuantityKind { Time, Power, Distance };

double to_physical(double x, QuantityKind kind, const NormalizationScales& s);
double from_physical(double x, QuantityKind kind, const NormalizationScales& s);

enum class ExtentCenter { Centroid, Origin };

struct ExtentOptions {
  ExtentCenter center = ExtentCenter::Centroid;
  int pad_factor = 4;
  double fraction = 0.99;
};

struct SignalExtents {
  double energy = 0.0;
  double t_fwhm = 0.0;
  double t_99 = 0.0;
  double p_avg = 0.0;
  double bw_99 = 0.0;
};

double energy(const TimeSignal& s);
SignalExtents measure_extents(const TimeSignal& s, const ExtentOptions& opt = {});

template <typename Derived>
typename Derived::RealScalar trapezoid(const Eigen::ArrayBase<Derived>& f, typename Derived::RealScalar h) {
  const Eigen::Index n = f.size();
  if (n < 2) return 0;
  return h * (f.sum() - 0.5 * (f(0) + f(n - 1)));
}

template <typename Derived>
typename Derived::Scalar trapezoid_c(const Eigen::ArrayBase<Derived>& f, typename Derived::RealScalar h) {
  const Eigen::Index n = f.size();
  if (n < 2) return typename Derived::Scalar(0);
  return h * (f.sum() - typename Derived::RealScalar(0.5) * (f(0) + f(n - 1)));
}

// Edge magnitude relative to peak, max over both ends.
double edge_ratio(const TimeSignal& s);

}  // namespace nfdm
