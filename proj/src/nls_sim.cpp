#include "nfdm/nls_sim.hpp"

#include "nfdm/fft.hpp"

#include <cmath>

namespace nfdm {

std::uint64_t trial_seed(std::uint64_t master, std::uint64_t index) {
  std::uint64_t z = master + 0x9E3779B97F4A7C15ULL * (index + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

void LinkConfig::validate() const {
  if (!(z_total > 0)) throw NfdmError(ErrorCode::InvalidArgument, "z_total must be positive");
  if (n_steps < 1) throw NfdmError(ErrorCode::InvalidArgument, "n_steps must be >= 1");
  if (!(noise_density >= 0)) throw NfdmError(ErrorCode::InvalidArgument, "noise_density must be >= 0");
  if (noise_density > 0 && !(noise_bandwidth > 0))
    throw NfdmError(ErrorCode::InvalidArgument, "noise_bandwidth must be positive");
}

namespace {

// Fourier-domain noise increment for one step (to be added before the inverse FFT).
void add_noise_bins(VectorXc& Q, const VectorXr& f, double density, double dz, double W, Rng& rng) {
  const Eigen::Index n = Q.size();
  Eigen::Index m = 0;
  for (Eigen::Index k = 0; k < n; ++k)
    if (std::abs(f(k)) <= W) ++m;
  if (m == 0) return;
  const double var = 2.0 * W * density * dz * double(n) * double(n) / double(m);
  std::normal_distribution<double> g(0.0, std::sqrt(0.5 * var));
  for (Eigen::Index k = 0; k < n; ++k)
    if (std::abs(f(k)) <= W) Q(k) += cplx(g(rng), g(rng));
}

TimeSignal split_step(const TimeSignal& s, double z_total, int n_steps, double density, double W, Rng* rng,
                      SimReport* rep) {
  const int n = s.size();
  const double h = z_total / n_steps;
  const VectorXr f = fft_frequencies(n, s.grid.dt);
  VectorXc half(n);
  for (int k = 0; k < n; ++k) {
    const double w = 2 * PI * f(k);
    half(k) = std::exp(J * w * w * (0.5 * h));
  }
  const double e_in = energy(s);
  if (rep) {
    rep->energy_in = e_in;
    const double pk = s.peak();
    if (pk > 0) {
      ExtentOptions eo;
      eo.pad_factor = 1;
      rep->aliasing_risk = 1.0 / (2.0 * s.grid.dt) < 4.0 * measure_extents(s, eo).bw_99;
    }
  }
  // adjacent half steps of consecutive steps are merged
  VectorXc Q = fft(s.samples);
  Q.array() *= half.array();
  VectorXc q = ifft(Q);
  for (int step = 0; step < n_steps; ++step) {
    for (int k = 0; k < n; ++k) q(k) *= std::polar(1.0, -2.0 * std::norm(q(k)) * h);
    Q = fft(q);
    Q.array() *= half.array();
    if (density > 0 && rng) add_noise_bins(Q, f, density, std::abs(h), W, *rng);
    if (step + 1 < n_steps) Q.array() *= half.array();
    q = ifft(Q);
    if (density == 0.0 && (step % 64 == 63 || step == n_steps - 1)) {
      const double e = trapezoid(q.array().abs2(), s.grid.dt);
      if (!(e <= 10.0 * e_in + 1e-300) && e_in > 0)
        throw NfdmError(ErrorCode::EnergyBlowup, "energy grew more than tenfold");
    }
  }
  TimeSignal out(s.grid, std::move(q));
  if (rep) rep->energy_out = energy(out);
  return out;
}

}  // namespace

TimeSignal ssfm_propagate(const TimeSignal& s, const LinkConfig& link, Rng& rng, SimReport* rep) {
  link.validate();
  return split_step(s, link.z_total, link.n_steps, link.noise_density, link.noise_bandwidth, &rng, rep);
}

TimeSignal ssfm_propagate(const TimeSignal& s, const LinkConfig& link, SimReport* rep) {
  Rng rng(link.seed);
  return ssfm_propagate(s, link, rng, rep);
}

TimeSignal inject_noise(const TimeSignal& s, double density, double dz, double W, Rng& rng) {
  if (!(density >= 0)) throw NfdmError(ErrorCode::InvalidArgument, "density must be >= 0");
  if (density == 0.0) return s;
  VectorXc Q = fft(s.samples);
  add_noise_bins(Q, fft_frequencies(s.size(), s.grid.dt), density, dz, W, rng);
  return TimeSignal(s.grid, ifft(Q));
}

TimeSignal backpropagate(const TimeSignal& s, const LinkConfig& link) {
  link.validate();
  return split_step(s, -link.z_total, link.n_steps, 0.0, 0.0, nullptr, nullptr);
}

TimeSignal lowpass_filter(const TimeSignal& s, double half_bandwidth, double center) {
  VectorXc Q = fft(s.samples);
  const VectorXr f = fft_frequencies(s.size(), s.grid.dt);
  for (Eigen::Index k = 0; k < Q.size(); ++k)
    if (std::abs(f(k) - center) > half_bandwidth) Q(k) = 0.0;
  return TimeSignal(s.grid, ifft(Q));
}

TimeSignal linear_propagate(const TimeSignal& s, double z) {
  VectorXc Q = fft(s.samples);
  const VectorXr f = fft_frequencies(s.size(), s.grid.dt);
  for (Eigen::Index k = 0; k < Q.size(); ++k) {
    const double w = 2 * PI * f(k);
    Q(k) *= std::exp(J * w * w * z);
  }
  return TimeSignal(s.grid, ifft(Q));
}

void WdmConfig::validate() const {
  if (n_channels < 1 || n_channels % 2 == 0) throw NfdmError(ErrorCode::InvalidArgument, "n_channels must be odd");
  if (!(channel_spacing > 0 && symbol_period > 0 && span_length > 0))
    throw NfdmError(ErrorCode::InvalidArgument, "WDM lengths must be positive");
  if (n_spans < 1 || steps_per_span < 1) throw NfdmError(ErrorCode::InvalidArgument, "span counts must be >= 1");
  if (rolloff < 0 || rolloff > 1) throw NfdmError(ErrorCode::InvalidArgument, "rolloff must be in [0,1]");
  if (2 * half_bandwidth() > channel_spacing)
    throw NfdmError(ErrorCode::InvalidArgument, "channel bandwidth exceeds spacing");
}

VectorXc rc_pulse(const TimeGrid& grid, double T, double beta, double t0, double fc) {
  VectorXc p(grid.n_samples);
  for (int k = 0; k < grid.n_samples; ++k) {
    const double x = (grid.t(k) - t0) / T;
    const double sinc = x == 0.0 ? 1.0 : std::sin(PI * x) / (PI * x);
    const double den = 1.0 - 4.0 * beta * beta * x * x;
    double v;
    if (std::abs(den) < 1e-10)
      v = PI / 4.0 * (beta > 0 ? std::sin(PI / (2 * beta)) / (PI / (2 * beta)) : 1.0);
    else
      v = sinc * std::cos(PI * beta * x) / den;
    p(k) = v * std::exp(2.0 * PI * J * fc * grid.t(k));
  }
  return p;
}

std::vector<cplx> qam_constellation(int order) {
  const int m = static_cast<int>(std::lround(std::sqrt(double(order))));
  if (m * m != order || m < 2) throw NfdmError(ErrorCode::InvalidArgument, "QAM order must be a square >= 4");
  std::vector<cplx> pts;
  double e = 0.0;
  for (int i = 0; i < m; ++i)
    for (int k = 0; k < m; ++k) {
      pts.emplace_back(2 * i - (m - 1), 2 * k - (m - 1));
      e += std::norm(pts.back());
    }
  const double sc = std::sqrt(e / pts.size());
  for (auto& p : pts) p /= sc;
  return pts;
}

VectorXc rc_train(const TimeGrid& grid, double T, double beta, const std::vector<cplx>& symbols, double fc) {
  const int n = grid.n_samples;
  const double per = T / grid.dt;
  const int step = static_cast<int>(std::lround(per));
  if (std::abs(per - step) > 1e-9 * per || step < 1)
    throw NfdmError(ErrorCode::InvalidArgument, "symbol period must be a whole number of samples");
  if (static_cast<long>(symbols.size()) * step > n) throw NfdmError(ErrorCode::InvalidArgument, "train exceeds window");
  VectorXc x = VectorXc::Zero(n);
  for (std::size_t i = 0; i < symbols.size(); ++i) x(static_cast<Eigen::Index>(i) * step) = symbols[i] / grid.dt;
  VectorXc X = fft(x);
  const VectorXr f = fft_frequencies(n, grid.dt);
  const double f1 = (1.0 - beta) / (2.0 * T), f2 = (1.0 + beta) / (2.0 * T);
  for (int k = 0; k < n; ++k) {
    const double a = std::abs(f(k) - fc);
    double p = 0.0;
    if (a <= f1)
      p = T;
    else if (a <= f2)
      p = 0.5 * T * (1.0 + std::cos(PI * T / beta * (a - f1)));
    X(k) *= p;
  }
  // the impulses sit on t_start; carrier phase referenced to t = 0
  VectorXc y = ifft(X);
  if (fc != 0.0) y *= std::exp(2.0 * PI * J * fc * grid.t_start);
  return y;
}

int wdm_slots(const WdmConfig& cfg) {
  return static_cast<int>(std::floor(cfg.grid.window() / cfg.symbol_period + 1e-9));
}

double wdm_launch_power(const WdmConfig& cfg) {
  // mean power of one channel with unit-energy symbols: int |P|^2 df / T = 1 - beta/4
  return cfg.coi_amplitude * cfg.coi_amplitude * (1.0 - cfg.rolloff / 4.0);
}

namespace {

std::vector<cplx> draw(const std::vector<cplx>& pts, int n, Rng& rng) {
  std::uniform_int_distribution<int> pick(0, static_cast<int>(pts.size()) - 1);
  std::vector<cplx> out(n);
  for (auto& x : out) x = pts[pick(rng)];
  return out;
}

VectorXc interferers(const WdmConfig& cfg, const std::vector<cplx>& pts, Rng& rng) {
  const TimeGrid& g = cfg.grid;
  VectorXc out = VectorXc::Zero(g.n_samples);
  const double amp = cfg.coi_amplitude * cfg.interferer_ratio;
  const int slots = wdm_slots(cfg);
  for (int c = 1; c <= cfg.n_channels / 2; ++c)
    for (int side : {-1, 1}) {
      const auto sym = draw(pts, slots, rng);
      if (amp != 0.0) out += amp * rc_train(g, cfg.symbol_period, cfg.rolloff, sym, side * c * cfg.channel_spacing);
    }
  return out;
}

}  // namespace

WdmRun wdm_link_run(const WdmConfig& cfg, Rng& rng) {
  cfg.validate();
  const auto pts = qam_constellation(cfg.qam_order);
  const TimeGrid& g = cfg.grid;
  const int slots = wdm_slots(cfg);
  WdmRun run;
  run.tx = draw(pts, slots, rng);
  TimeSignal q(g, cfg.coi_amplitude * rc_train(g, cfg.symbol_period, cfg.rolloff, run.tx) + interferers(cfg, pts, rng));

  LinkConfig span;
  span.z_total = cfg.span_length;
  span.n_steps = cfg.steps_per_span;
  span.noise_density = cfg.noise_density;
  span.noise_bandwidth = cfg.noise_bandwidth;
  const double coi_half = 0.5 * cfg.channel_spacing;
  for (int s = 0; s < cfg.n_spans; ++s) {
    q = ssfm_propagate(q, span, rng);
    // ROADM: keep the COI band, drop the neighbours and add fresh ones
    q = lowpass_filter(q, coi_half);
    if (s + 1 < cfg.n_spans) q.samples += interferers(cfg, pts, rng);
  }

  LinkConfig full;
  full.z_total = cfg.span_length * cfg.n_spans;
  full.n_steps = cfg.steps_per_span * cfg.n_spans;
  run.received = backpropagate(q, full);
  const int step = static_cast<int>(std::lround(cfg.symbol_period / g.dt));
  run.rx.resize(slots);
  const double sc = cfg.coi_amplitude > 0 ? 1.0 / cfg.coi_amplitude : 1.0;
  for (int i = 0; i < slots; ++i) run.rx[i] = run.received.samples(i * step) * sc;
  return run;
}

}  // namespace nfdm
