#include "nfdm/modem.hpp"

#include "nfdm/darboux.hpp"

#include <boost/math/special_functions/erf.hpp>

#include <algorithm>
#include <cmath>
#include <numeric>

namespace nfdm {

void Constellation::validate() const {
  if (priors.size() != symbols.size()) throw NfdmError(ErrorCode::InvalidArgument, "priors and symbols differ in size");
  const double s = std::accumulate(priors.begin(), priors.end(), 0.0);
  if (std::abs(s - 1.0) > 1e-12) throw NfdmError(ErrorCode::InvalidArgument, "priors do not sum to one");
}

ExtentOptions signal_set_extent_options() {
  ExtentOptions eo;
  eo.center = ExtentCenter::Origin;
  return eo;
}

namespace {

Symbol make_symbol(const std::string& label, const DiscreteSpectrum& ds, const TimeGrid& grid,
                   const ExtentOptions& eo) {
  Symbol s;
  s.label = label;
  s.ds = ds;
  s.waveform = multisoliton(ds, grid);
  if (!ds.empty()) s.ext = measure_extents(s.waveform, eo);
  return s;
}

// zero symbols occupy the slot of the shortest nonzero symbol
void fill_zero_slots(Constellation& c) {
  double tmin = std::numeric_limits<double>::infinity();
  for (const auto& s : c.symbols)
    if (!s.ds.empty()) tmin = std::min(tmin, s.ext.t_99);
  for (auto& s : c.symbols)
    if (s.ds.empty()) s.ext.t_99 = std::isfinite(tmin) ? tmin : 0.0;
}

void uniform_priors(Constellation& c) { c.priors.assign(c.symbols.size(), 1.0 / double(c.symbols.size())); }

}  // namespace

Constellation build_signal_set_A(const TimeGrid& grid, const ExtentOptions& eo) {
  Constellation c;
  c.symbols.push_back(make_symbol("S1", DiscreteSpectrum(), grid, eo));
  c.symbols.push_back(make_symbol("S2", DiscreteSpectrum({{cplx(0, 0.5), 1.0}}), grid, eo));
  c.symbols.push_back(make_symbol("S3", DiscreteSpectrum({{cplx(0, 0.25), 0.5}}), grid, eo));
  c.symbols.push_back(make_symbol("S4", DiscreteSpectrum({{cplx(0, 0.25), 1.0}, {cplx(0, 0.5), 1.0}}), grid, eo));
  fill_zero_slots(c);
  uniform_priors(c);
  return c;
}

Constellation build_signal_set_B(const TimeGrid& grid, const ExtentOptions& eo) {
  const double levels[3] = {0.5, 1.0, 1.5};
  const cplx l1(0, 0.25), l2(0, 0.5);
  Constellation c;
  c.symbols.push_back(make_symbol("0", DiscreteSpectrum(), grid, eo));
  for (double a : levels)
    c.symbols.push_back(make_symbol("0.5j:" + std::to_string(a), DiscreteSpectrum({{l2, a}}), grid, eo));
  for (double a : levels)
    c.symbols.push_back(make_symbol("0.25j:" + std::to_string(a), DiscreteSpectrum({{l1, a}}), grid, eo));
  for (double a : levels)
    for (double b : levels)
      c.symbols.push_back(make_symbol("0.25j:" + std::to_string(a) + ",0.5j:" + std::to_string(b),
                                      DiscreteSpectrum({{l1, a}, {l2, b}}), grid, eo));
  fill_zero_slots(c);
  uniform_priors(c);
  return c;
}

GridConstellation build_multisoliton_grid(const GridSpec& spec) {
  if (spec.n_levels < 1 || spec.max_order < 0 || spec.amplitudes.empty())
    throw NfdmError(ErrorCode::InvalidArgument, "invalid grid specification");
  std::vector<cplx> lam;
  for (int k = 1; k <= spec.n_levels; ++k) lam.emplace_back(0.0, k * spec.im_max / spec.n_levels);

  // enumerate subsets of size <= max_order with one amplitude per eigenvalue
  std::vector<DiscreteSpectrum> all;
  std::vector<int> idx;
  std::function<void(int)> rec = [&](int start) {
    // expand the current subset over amplitude choices
    const std::size_t na = spec.amplitudes.size();
    std::size_t combos = 1;
    for (std::size_t i = 0; i < idx.size(); ++i) combos *= na;
    for (std::size_t m = 0; m < combos; ++m) {
      DiscreteSpectrum ds;
      std::size_t r = m;
      for (int i : idx) {
        ds.entries.push_back({lam[i], spec.amplitudes[r % na]});
        r /= na;
      }
      all.push_back(std::move(ds));
    }
    if (static_cast<int>(idx.size()) == spec.max_order) return;
    for (int i = start; i < spec.n_levels; ++i) {
      idx.push_back(i);
      rec(i + 1);
      idx.pop_back();
    }
  };
  rec(0);

  GridConstellation out;
  out.enumerated = all.size();
  if (spec.max_symbols > 0 && all.size() > spec.max_symbols) {
    Rng rng(spec.seed);
    // keep the zero symbol, sample the rest
    std::vector<std::size_t> order(all.size() - 1);
    std::iota(order.begin(), order.end(), 1);
    std::shuffle(order.begin(), order.end(), rng);
    order.resize(spec.max_symbols - 1);
    std::sort(order.begin(), order.end());
    std::vector<DiscreteSpectrum> kept{all[0]};
    for (std::size_t i : order) kept.push_back(all[i]);
    out.sampled_out = all.size() - kept.size();
    all = std::move(kept);
  }

  Constellation& c = out.constellation;
  for (const auto& ds : all) {
    std::string label;
    for (const auto& e : ds.entries) label += (label.empty() ? "" : ",") + std::to_string(e.lambda.imag());
    Symbol s = make_symbol(label.empty() ? "0" : label, ds, spec.grid, spec.extents);
    if (!ds.empty() && s.ext.t_99 > spec.max_t99) {
      ++out.pruned_duration;
      continue;
    }
    if (!ds.empty() && s.ext.bw_99 > spec.max_bw99) {
      ++out.pruned_bandwidth;
      continue;
    }
    c.symbols.push_back(std::move(s));
  }
  if (c.symbols.empty()) throw NfdmError(ErrorCode::EmptyAfterPruning, "no symbols left after pruning");
  fill_zero_slots(c);
  uniform_priors(c);
  return out;
}

double eigenvalue_set_distance(const DiscreteSpectrum& a, const DiscreteSpectrum& b, double beta,
                               double* amp_distance) {
  const int na = static_cast<int>(a.size()), nb = static_cast<int>(b.size());
  if (nb > 20) throw NfdmError(ErrorCode::InvalidArgument, "eigenvalue set too large for exact assignment");
  const int full = 1 << nb;
  const double inf = std::numeric_limits<double>::infinity();
  // dp[mask] after processing i elements of a: (eigen cost, amplitude cost)
  std::vector<std::pair<double, double>> dp(full, {inf, inf}), nd(full);
  dp[0] = {0.0, 0.0};
  auto cost = [&](const std::pair<double, double>& x) { return beta == 0.0 ? x.first : x.first + beta * x.second; };
  auto better = [&](const std::pair<double, double>& x, const std::pair<double, double>& y) {
    const double cx = cost(x), cy = cost(y);
    if (cx != cy) return cx < cy;
    return x.second < y.second;
  };
  for (int i = 0; i < na; ++i) {
    std::fill(nd.begin(), nd.end(), std::make_pair(inf, inf));
    const auto& ea = a.entries[i];
    for (int mask = 0; mask < full; ++mask) {
      if (!std::isfinite(dp[mask].first)) continue;
      // leave unmatched
      std::pair<double, double> cand{dp[mask].first + ea.lambda.imag(), dp[mask].second};
      if (better(cand, nd[mask])) nd[mask] = cand;
      for (int j = 0; j < nb; ++j) {
        if (mask & (1 << j)) continue;
        const auto& eb = b.entries[j];
        const double amp = std::abs(std::log(ea.amplitude / eb.amplitude));
        std::pair<double, double> c2{dp[mask].first + std::abs(ea.lambda - eb.lambda), dp[mask].second + amp};
        if (better(c2, nd[mask | (1 << j)])) nd[mask | (1 << j)] = c2;
      }
    }
    dp.swap(nd);
  }
  std::pair<double, double> best{inf, inf};
  for (int mask = 0; mask < full; ++mask) {
    if (!std::isfinite(dp[mask].first)) continue;
    std::pair<double, double> c = dp[mask];
    for (int j = 0; j < nb; ++j)
      if (!(mask & (1 << j))) c.first += b.entries[j].lambda.imag();
    if (better(c, best)) best = c;
  }
  if (amp_distance) *amp_distance = best.second;
  return cost(best);
}

namespace {

// canonical ordering key for relabel-invariant tie breaks
bool key_less(const DiscreteSpectrum& x, const DiscreteSpectrum& y) {
  const auto a = x.sorted(), b = y.sorted();
  if (a.size() != b.size()) return a.size() < b.size();
  for (std::size_t i = 0; i < a.size(); ++i) {
    const auto& p = a.entries[i];
    const auto& q = b.entries[i];
    const double u[4] = {p.lambda.imag(), p.lambda.real(), p.amplitude.real(), p.amplitude.imag()};
    const double v[4] = {q.lambda.imag(), q.lambda.real(), q.amplitude.real(), q.amplitude.imag()};
    for (int k = 0; k < 4; ++k)
      if (u[k] != v[k]) return u[k] < v[k];
  }
  return false;
}

}  // namespace

std::size_t detect_discrete(const DiscreteSpectrum& rx, const Constellation& c, const DetectOptions& opt) {
  if (c.symbols.empty()) throw NfdmError(ErrorCode::InvalidArgument, "empty constellation");
  std::size_t best = 0;
  double bd = std::numeric_limits<double>::infinity(), ba = bd;
  for (std::size_t i = 0; i < c.symbols.size(); ++i) {
    double amp = 0.0;
    const double d = eigenvalue_set_distance(rx, c.symbols[i].ds, opt.beta, &amp);
    const double tol = 1e-12 * (1.0 + bd);
    bool take = false;
    if (d < bd - tol)
      take = true;
    else if (d <= bd + tol) {
      if (amp < ba - 1e-12)
        take = true;
      else if (amp <= ba + 1e-12 && key_less(c.symbols[i].ds, c.symbols[best].ds))
        take = true;
    }
    if (take) {
      best = i;
      bd = d;
      ba = amp;
    }
  }
  return best;
}

double log_euclidean_distance(const ContinuousSpectrum& x, const ContinuousSpectrum& y) {
  const Eigen::Index n = x.lambda_grid.size();
  if (y.lambda_grid.size() != n) throw NfdmError(ErrorCode::InvalidArgument, "spectra on different grids");
  double d = 0.0;
  for (Eigen::Index i = 1; i < n; ++i) {
    const double h = x.lambda_grid(i) - x.lambda_grid(i - 1);
    d += 0.5 * h * (std::log1p(std::norm(x.values(i) - y.values(i))) + std::log1p(std::norm(x.values(i - 1) - y.values(i - 1))));
  }
  return d / PI;
}

std::size_t detect_continuous(const ContinuousSpectrum& rx, const Constellation& c) {
  std::size_t best = 0;
  double bd = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < c.symbols.size(); ++i) {
    const double d = log_euclidean_distance(rx, c.symbols[i].cont);
    if (d < bd) {
      bd = d;
      best = i;
    }
  }
  return best;
}

Eigen::MatrixXd TransitionMatrix::smoothed() const {
  const Eigen::Index ny = counts.cols();
  std::vector<Eigen::Index> rows;
  for (Eigen::Index i = 0; i < counts.rows(); ++i)
    if (row_trials[i] > 0) rows.push_back(i);
  Eigen::MatrixXd P(static_cast<Eigen::Index>(rows.size()), ny);
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const double den = double(row_trials[rows[r]]) + double(ny);
    for (Eigen::Index j = 0; j < ny; ++j) P(r, j) = (double(counts(rows[r], j)) + 1.0) / den;
  }
  return P;
}

double TransitionMatrix::diagonal_fraction() const {
  long diag = 0, total = 0;
  for (Eigen::Index i = 0; i < counts.rows(); ++i) {
    diag += counts(i, i);
    total += row_trials[i];
  }
  return total > 0 ? double(diag) / double(total) : 0.0;
}

TransitionMatrix estimate_transition_matrix(std::size_t n_symbols, const ChannelRunner& run, int n_trials,
                                            std::uint64_t seed) {
  if (n_trials < 1) throw NfdmError(ErrorCode::InvalidArgument, "n_trials must be >= 1");
  const Eigen::Index n = static_cast<Eigen::Index>(n_symbols);
  TransitionMatrix tm;
  tm.counts.setZero(n, n);
  tm.row_trials.assign(n_symbols, n_trials);
  std::vector<std::size_t> out(n_symbols * n_trials);
#pragma omp parallel for schedule(dynamic)
  for (long k = 0; k < static_cast<long>(out.size()); ++k) {
    Rng rng(trial_seed(seed, static_cast<std::uint64_t>(k)));
    out[k] = run(static_cast<std::size_t>(k) / n_trials, rng);
  }
  for (std::size_t k = 0; k < out.size(); ++k) {
    const std::size_t y = out[k];
    if (y >= n_symbols) throw NfdmError(ErrorCode::InvalidArgument, "detector returned an invalid symbol");
    tm.counts(static_cast<Eigen::Index>(k / n_trials), static_cast<Eigen::Index>(y)) += 1;
  }
  return tm;
}

double mutual_information(const Eigen::MatrixXd& P, const Eigen::VectorXd& px) {
  const Eigen::VectorXd py = P.transpose() * px;
  double I = 0.0;
  for (Eigen::Index i = 0; i < P.rows(); ++i)
    for (Eigen::Index j = 0; j < P.cols(); ++j)
      if (px(i) > 0 && P(i, j) > 0) I += px(i) * P(i, j) * std::log2(P(i, j) / py(j));
  return I;
}

CapacityResult blahut_arimoto(const Eigen::MatrixXd& P, double tol, int max_iter) {
  if (P.rows() == 0) throw NfdmError(ErrorCode::InvalidArgument, "empty channel");
  for (Eigen::Index i = 0; i < P.rows(); ++i)
    if (std::abs(P.row(i).sum() - 1.0) > 1e-9 || (P.row(i).array() < 0).any())
      throw NfdmError(ErrorCode::NonStochastic, "row " + std::to_string(i) + " is not a distribution");
  const Eigen::Index nx = P.rows();
  CapacityResult r;
  Eigen::VectorXd p = Eigen::VectorXd::Constant(nx, 1.0 / nx);
  Eigen::VectorXd D(nx);
  double prev = -1.0;
  for (int it = 0; it < max_iter; ++it) {
    const Eigen::VectorXd py = P.transpose() * p;
    for (Eigen::Index i = 0; i < nx; ++i) {
      double d = 0.0;
      for (Eigen::Index j = 0; j < P.cols(); ++j)
        if (P(i, j) > 0) d += P(i, j) * std::log(P(i, j) / py(j));
      D(i) = d;
    }
    // capacity bounds: log sum p e^D <= C <= max D
    const double lower = std::log((p.array() * D.array().exp()).sum());
    const double upper = D.maxCoeff();
    r.iterations = it + 1;
    r.capacity_bits = lower / std::log(2.0);
    if (upper - lower < tol * std::log(2.0) || std::abs(lower - prev) < 1e-16) break;
    prev = lower;
    p = (p.array() * D.array().exp()).matrix();
    p /= p.sum();
  }
  r.input = p;
  return r;
}

CapacityResult blahut_arimoto(const TransitionMatrix& tm, double tol, int max_iter) {
  return blahut_arimoto(tm.smoothed(), tol, max_iter);
}

EfficiencyReport spectral_efficiency(double bits, const std::vector<double>& durations,
                                     const std::vector<double>& bandwidths, const std::vector<double>& powers,
                                     const std::vector<double>& priors, DurationMode mode) {
  const std::size_t n = durations.size();
  if (bandwidths.size() != n || powers.size() != n || priors.size() != n || n == 0)
    throw NfdmError(ErrorCode::InvalidArgument, "extent vectors differ in length");
  EfficiencyReport r;
  r.bits_per_symbol = bits;
  double tmax = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    r.avg_duration += priors[i] * durations[i];
    r.avg_power += priors[i] * powers[i];
    r.max_bandwidth = std::max(r.max_bandwidth, bandwidths[i]);
    tmax = std::max(tmax, durations[i]);
  }
  const double T = mode == DurationMode::Average ? r.avg_duration : tmax;
  if (mode == DurationMode::Max) r.avg_duration = tmax;
  r.rho = bits / (T * r.max_bandwidth);
  return r;
}

EfficiencyReport spectral_efficiency(double bits, const Constellation& c, DurationMode mode) {
  c.validate();
  std::vector<double> T, W, P;
  for (const auto& s : c.symbols) {
    T.push_back(s.ext.t_99);
    W.push_back(s.ext.bw_99);
    P.push_back(s.ds.empty() ? 0.0 : s.ext.energy / s.ext.t_99);
  }
  return spectral_efficiency(bits, T, W, P, c.priors, mode);
}

EfficiencyReport soliton_efficiency(double bits, const std::vector<double>& omega0, const std::vector<double>& priors,
                                    DurationMode mode) {
  double wmin = std::numeric_limits<double>::infinity();
  for (double w : omega0)
    if (w > 0) wmin = std::min(wmin, w);
  std::vector<double> T, W, P;
  for (double w : omega0) {
    T.push_back(w > 0 ? 7.0 / w : 7.0 / wmin);
    W.push_back(0.95 * w);
    P.push_back(w * w / 6.2);
  }
  return spectral_efficiency(bits, T, W, P, priors, mode);
}

ReplicationRatios table_mode_ratios(const TableConstants& tc) {
  ReplicationRatios r;
  r.rho0 = 1.0 / (tc.T1 * tc.W0);
  r.set_a_ratio = (2.0 / (tc.set_a_avg_duration * tc.T1 * tc.W0)) / r.rho0;
  r.set_b_ratio = (4.0 / (tc.set_b_avg_duration * tc.T1 * tc.W0)) / r.rho0;
  r.set_b_fixed_slot_ratio = 4.0 / 3.0;
  return r;
}

std::vector<CapacityPoint> capacity_1soliton_amplitude(const std::vector<double>& snr_grid, int levels) {
  if (levels < 2) throw NfdmError(ErrorCode::InvalidArgument, "need at least two input levels");
  std::vector<CapacityPoint> out;
  const double s = 1.0;  // sigma^2 z
  const double euler = 0.57721566490153286;
  for (double snr : snr_grid) {
    if (!(snr > 0)) throw NfdmError(ErrorCode::InvalidArgument, "SNR must be positive");
    const double sqrtP = snr * s;
    std::vector<double> w0(levels), sd(levels);
    for (int i = 0; i < levels; ++i) {
      const double u = (i + 0.5) / levels;
      w0[i] = sqrtP * std::sqrt(2.0) * boost::math::erf_inv(u);
      sd[i] = std::sqrt(s * w0[i] / 2.0);
    }
    std::vector<double> grid;
    grid.reserve(levels * 61);
    for (int i = 0; i < levels; ++i)
      for (int k = -30; k <= 30; ++k) grid.push_back(w0[i] + sd[i] * k / 3.0);
    std::sort(grid.begin(), grid.end());
    grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
    std::vector<double> f(grid.size());
    for (std::size_t g = 0; g < grid.size(); ++g) {
      double acc = 0.0;
      for (int i = 0; i < levels; ++i) {
        const double z = (grid[g] - w0[i]) / sd[i];
        if (std::abs(z) < 12.0) acc += std::exp(-0.5 * z * z) / (sd[i] * std::sqrt(2 * PI));
      }
      f[g] = acc / levels;
    }
    double hy = 0.0;
    auto integrand = [&](std::size_t g) { return f[g] > 0 ? -f[g] * std::log2(f[g]) : 0.0; };
    for (std::size_t g = 1; g < grid.size(); ++g) hy += 0.5 * (grid[g] - grid[g - 1]) * (integrand(g) + integrand(g - 1));
    double hyx = 0.0;
    for (int i = 0; i < levels; ++i) hyx += 0.5 * std::log2(2 * PI * std::exp(1.0) * sd[i] * sd[i]) / levels;
    CapacityPoint p;
    p.snr = snr;
    p.mi_bits = std::max(0.0, hy - hyx);
    p.asymptote_bits = 0.5 * std::log2(1.0 + snr) - 0.5 * std::log2(std::exp(1.0));
    p.limit_bits = 0.5 * std::log2(snr) + (-0.5 * std::log(2.0) + (euler + std::log(2.0)) / 4.0) / std::log(2.0);
    out.push_back(p);
  }
  return out;
}

QamRateReport qam_rate(const std::vector<cplx>& tx, const std::vector<cplx>& rx, const std::vector<cplx>& points) {
  if (tx.size() != rx.size() || tx.empty()) throw NfdmError(ErrorCode::InvalidArgument, "tx and rx differ in length");
  const Eigen::Index m = static_cast<Eigen::Index>(points.size());
  QamRateReport r;
  cplx xy = 0.0;
  double xx = 0.0;
  for (std::size_t i = 0; i < tx.size(); ++i) {
    xy += rx[i] * std::conj(tx[i]);
    xx += std::norm(tx[i]);
  }
  r.gain = xy / xx;
  double ee = 0.0;
  for (std::size_t i = 0; i < tx.size(); ++i) ee += std::norm(rx[i] - r.gain * tx[i]);
  r.snr_eff = ee > 0 ? std::norm(r.gain) * xx / ee : std::numeric_limits<double>::infinity();
  r.gaussian_bits = std::log2(1.0 + r.snr_eff);

  auto nearest = [&](cplx y) {
    Eigen::Index best = 0;
    double bd = std::numeric_limits<double>::infinity();
    for (Eigen::Index k = 0; k < m; ++k) {
      const double d = std::norm(y - points[k]);
      if (d < bd) bd = d, best = k;
    }
    return best;
  };
  r.tm.counts.setZero(m, m);
  r.tm.row_trials.assign(points.size(), 0);
  for (std::size_t i = 0; i < tx.size(); ++i) {
    const auto it = std::find(points.begin(), points.end(), tx[i]);
    if (it == points.end()) throw NfdmError(ErrorCode::InvalidArgument, "tx symbol not in the constellation");
    const Eigen::Index x = it - points.begin();
    const Eigen::Index y = r.gain != 0.0 ? nearest(rx[i] / r.gain) : 0;
    r.tm.counts(x, y) += 1;
    r.tm.row_trials[x] += 1;
  }
  r.capacity_bits = blahut_arimoto(r.tm, 1e-9).capacity_bits;
  return r;
}

}  // namespace nfdm
