#include "nfdm/experiments.hpp"

#include "nfdm/darboux.hpp"
#include "nfdm/io.hpp"
#include "nfdm/modem.hpp"
#include "nfdm/nls_sim.hpp"
#include "nfdm/spectral_stats.hpp"
#include "nfdm/zs_forward.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <filesystem>
#include <fstream>
#include <limits>
#include <numeric>

namespace nfdm {

using json = nlohmann::json;

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

json grid_json(int n, double t0, double dt) { return {{"n_samples", n}, {"t_start", t0}, {"dt", dt}}; }

json receiver_json(double re_half, double im_max, int nx, int ny, double beta) {
  return {{"re_halfwidth", re_half}, {"im_max", im_max}, {"nx", nx}, {"ny", ny}, {"min_im", 0.05}, {"beta", beta}};
}

json base_doc(const std::string& id, int trials, std::vector<double> sweep) {
  return {{"experiment", id}, {"seed", 1}, {"output_dir", "."}, {"trials", trials}, {"sweep", sweep}};
}

template <typename T>
T get(const json& j, const std::string& key) {
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw NfdmError(ErrorCode::InvalidParams, key + ": " + e.what());
  }
}

void require(bool ok, const std::string& msg) {
  if (!ok) throw NfdmError(ErrorCode::InvalidParams, msg);
}

TimeGrid parse_grid(const json& j, const std::string& name) {
  const int n = get<int>(j, "n_samples");
  const double dt = get<double>(j, "dt");
  require(n >= 16 && dt > 0, name + ": need n_samples >= 16 and dt > 0");
  return TimeGrid(n, get<double>(j, "t_start"), dt);
}

LinkConfig parse_link(const json& j) {
  LinkConfig l;
  l.z_total = get<double>(j, "z_total");
  l.n_steps = get<int>(j, "n_steps");
  l.noise_bandwidth = get<double>(j, "noise_bandwidth");
  require(l.z_total > 0 && l.n_steps >= 1 && l.noise_bandwidth > 0, "link: z_total, n_steps, noise_bandwidth must be positive");
  return l;
}

struct Receiver {
  EigenSearchConfig search;
  DetectOptions detect;
};

Receiver parse_receiver(const json& j) {
  Receiver r;
  const double half = get<double>(j, "re_halfwidth");
  r.search.re_min = -half;
  r.search.re_max = half;
  r.search.min_im = get<double>(j, "min_im");
  r.search.im_min = r.search.min_im;
  r.search.im_max = get<double>(j, "im_max");
  r.search.nx = get<int>(j, "nx");
  r.search.ny = get<int>(j, "ny");
  r.search.zs.edge_tol = 0.0;
  r.detect.beta = get<double>(j, "beta");
  require(half > 0 && r.search.min_im > 0 && r.search.im_max > r.search.min_im, "receiver: invalid search box");
  require(r.search.nx >= 2 && r.search.ny >= 2 && r.detect.beta >= 0, "receiver: nx, ny >= 2 and beta >= 0");
  return r;
}

double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }

// Noise density for SNR = power / (2 W D z).
double density_for(double snr_db, double power, const LinkConfig& l) {
  return power / (db_to_linear(snr_db) * 2.0 * l.noise_bandwidth * l.z_total);
}

std::uint64_t point_trial_seed(std::uint64_t master, std::size_t point, std::size_t trial) {
  return trial_seed(master, (static_cast<std::uint64_t>(point) << 32) | static_cast<std::uint64_t>(trial));
}

template <typename F>
void parallel_trials(long n, F&& f) {
  std::exception_ptr err;
#pragma omp parallel for schedule(dynamic)
  for (long i = 0; i < n; ++i) {
    try {
      f(i);
    } catch (...) {
#pragma omp critical(nfdm_trial_error)
      if (!err) err = std::current_exception();
    }
  }
  if (err) std::rethrow_exception(err);
}

std::string fmt(double x) { return format_double(x); }
std::string fmt(long x) { return std::to_string(x); }
std::string fmt(std::uint64_t x) { return std::to_string(x); }

double quantile(std::vector<double> v, double p) {
  if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::sort(v.begin(), v.end());
  const double pos = p * (v.size() - 1);
  const std::size_t i = static_cast<std::size_t>(pos);
  if (i + 1 >= v.size()) return v.back();
  return v[i] + (pos - i) * (v[i + 1] - v[i]);
}

// Percentile bootstrap over the trials of each row.
std::pair<double, double> capacity_ci(const TransitionMatrix& tm, std::uint64_t seed, int reps) {
  Rng rng(seed);
  std::vector<double> caps;
  for (int b = 0; b < reps; ++b) {
    TransitionMatrix s = tm;
    s.counts.setZero();
    for (Eigen::Index i = 0; i < tm.counts.rows(); ++i) {
      if (tm.row_trials[i] == 0) continue;
      std::vector<double> w(tm.counts.cols());
      for (Eigen::Index j = 0; j < tm.counts.cols(); ++j) w[j] = double(tm.counts(i, j));
      std::discrete_distribution<Eigen::Index> d(w.begin(), w.end());
      for (long k = 0; k < tm.row_trials[i]; ++k) s.counts(i, d(rng)) += 1;
    }
    caps.push_back(blahut_arimoto(s, 1e-9).capacity_bits);
  }
  return {quantile(caps, 0.025), quantile(caps, 0.975)};
}

json vec_json(const Eigen::VectorXd& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

// ---------------------------------------------------------------------------------------------
// discrete-spectrum channels: signal sets A/B and the multisoliton grid

struct DiscreteSetup {
  Constellation accounting;  // extents measured on the fine extent grid
  std::vector<TimeSignal> waveforms;  // transmitted on the simulation grid
  LinkConfig link;
  Receiver rx;
  DurationMode mode = DurationMode::Average;
  bool noiseless = false;
  SignalExtents fundamental;  // (0.5j, 1) soliton, the on-off keying reference
  json info;
};

SignalExtents fundamental_extents(const TimeGrid& g) {
  return measure_extents(multisoliton(DiscreteSpectrum({{cplx(0, 0.5), 1.0}}), g), signal_set_extent_options());
}

DiscreteSetup discrete_setup(const ExperimentConfig& cfg) {
  const json& d = cfg.doc;
  DiscreteSetup s;
  const TimeGrid sim = parse_grid(d.at("grid"), "grid");
  const TimeGrid fine = parse_grid(d.at("extent_grid"), "extent_grid");
  s.link = parse_link(d.at("link"));
  s.rx = parse_receiver(d.at("receiver"));
  s.noiseless = get<bool>(d, "noiseless");
  s.fundamental = fundamental_extents(fine);
  if (cfg.id == "signalset-a") {
    s.accounting = build_signal_set_A(fine);
  } else if (cfg.id == "signalset-b") {
    s.accounting = build_signal_set_B(fine);
  } else {
    const json& g = d.at("constellation");
    GridSpec spec;
    spec.n_levels = get<int>(g, "n_levels");
    spec.im_max = get<double>(g, "im_max");
    spec.max_order = get<int>(g, "max_order");
    spec.amplitudes.clear();
    for (double a : get<std::vector<double>>(g, "amplitudes")) spec.amplitudes.emplace_back(a);
    spec.max_t99 = get<double>(g, "max_t99");
    spec.max_bw99 = get<double>(g, "max_bw99");
    spec.max_symbols = get<std::size_t>(g, "max_symbols");
    spec.seed = get<std::uint64_t>(g, "seed");
    spec.grid = fine;
    spec.extents = signal_set_extent_options();
    require(spec.n_levels >= 1 && spec.n_levels <= 64 && spec.max_order >= 0 && spec.max_order <= 8 && spec.im_max > 0,
            "constellation: need 1 <= n_levels <= 64, 0 <= max_order <= 8, im_max > 0");
    require(!spec.amplitudes.empty(), "constellation: amplitudes must be non-empty");
    const GridConstellation gc = build_multisoliton_grid(spec);
    s.accounting = gc.constellation;
    s.mode = DurationMode::Max;
    s.info = {{"enumerated", gc.enumerated},
              {"sampled_out", gc.sampled_out},
              {"pruned_duration", gc.pruned_duration},
              {"pruned_bandwidth", gc.pruned_bandwidth},
              {"symbols", gc.constellation.size()}};
  }
  for (const auto& sym : s.accounting.symbols) {
    SynthesisWarnings w;
    s.waveforms.push_back(sym.ds.empty() ? TimeSignal::zeros(sim) : multisoliton(sym.ds, sim, &w));
    require(!w.window_too_narrow, "grid: symbol " + sym.label + " does not decay inside the simulation window");
  }
  return s;
}

struct DiscreteTrial {
  long tx = 0, rx = 0, n_eig = 0;
  bool failed = false;
};

DiscreteTrial discrete_trial(const DiscreteSetup& s, long x, double density, std::uint64_t seed) {
  Rng rng(seed);
  LinkConfig l = s.link;
  l.noise_density = density;
  const TimeSignal out = ssfm_propagate(s.waveforms[x], l, rng);
  DiscreteTrial t;
  t.tx = x;
  try {
    const EigenSearchReport rep = find_eigenvalues(out, s.rx.search);
    const DiscreteSpectrum ds = propagate_spectrum(discrete_amplitudes(out, rep.eigenvalues, s.rx.search), -l.z_total);
    t.n_eig = static_cast<long>(ds.size());
    t.rx = static_cast<long>(detect_discrete(ds, s.accounting, s.rx.detect));
  } catch (const NfdmError& e) {
    if (e.code() == ErrorCode::InvalidArgument) throw;
    t.failed = true;
    t.rx = static_cast<long>(s.accounting.size());  // erasure
  }
  return t;
}

ExperimentResult run_discrete(const ExperimentConfig& cfg) {
  const DiscreteSetup s = discrete_setup(cfg);
  const long M = static_cast<long>(s.accounting.size());
  const double P0 = s.fundamental.energy / s.fundamental.t_99;
  const double rho0 = 1.0 / (s.fundamental.t_99 * s.fundamental.bw_99);
  const int boot = get<int>(cfg.doc, "bootstrap");

  std::vector<double> T, W, P;
  for (const auto& sym : s.accounting.symbols) {
    T.push_back(sym.ext.t_99);
    W.push_back(sym.ext.bw_99);
    P.push_back(sym.ds.empty() ? 0.0 : sym.ext.energy / sym.ext.t_99);
  }

  ExperimentResult r;
  r.id = cfg.id;
  r.sweep_name = "snr_db";
  r.columns = {"point", "snr_db", "trial", "seed", "tx", "rx", "n_eigenvalues", "failed"};
  json symbols = json::array();
  for (std::size_t i = 0; i < s.accounting.size(); ++i) {
    const auto& sym = s.accounting.symbols[i];
    json ev = json::array();
    for (const auto& e : sym.ds.entries) ev.push_back({e.lambda.real(), e.lambda.imag(), e.amplitude.real(), e.amplitude.imag()});
    symbols.push_back({{"index", i}, {"label", sym.label}, {"spectrum", ev}, {"energy", sym.ext.energy},
                       {"t_99", T[i]}, {"bw_99", W[i]}, {"power", P[i]}});
  }
  r.summary["symbols"] = symbols;
  r.summary["reference"] = {{"T1", s.fundamental.t_99}, {"W0", s.fundamental.bw_99}, {"P0", P0}, {"rho0", rho0}};
  if (!s.info.is_null()) r.summary["constellation"] = s.info;
  const ReplicationRatios tm_ratios = table_mode_ratios();
  r.summary["table_mode"] = {{"rho0", tm_ratios.rho0}, {"set_a_ratio", tm_ratios.set_a_ratio},
                             {"set_b_ratio", tm_ratios.set_b_ratio}, {"set_b_fixed_slot_ratio", tm_ratios.set_b_fixed_slot_ratio}};

  const std::vector<double> sweep = s.noiseless ? std::vector<double>{std::numeric_limits<double>::infinity()} : cfg.sweep;
  json points = json::array();
  for (std::size_t p = 0; p < sweep.size(); ++p) {
    const double D = s.noiseless ? 0.0 : density_for(sweep[p], P0, s.link);
    std::vector<DiscreteTrial> trials(static_cast<std::size_t>(M) * cfg.trials);
    parallel_trials(static_cast<long>(trials.size()), [&](long k) {
      trials[k] = discrete_trial(s, k / cfg.trials, D, point_trial_seed(cfg.seed, p, k));
    });
    long failed = 0;
    for (const auto& t : trials) failed += t.failed;
    TransitionMatrix tm;
    tm.counts.setZero(M, failed > 0 ? M + 1 : M);
    tm.row_trials.assign(M, cfg.trials);
    for (std::size_t k = 0; k < trials.size(); ++k) {
      const auto& t = trials[k];
      tm.counts(t.tx, t.rx) += 1;
      r.rows.push_back({fmt(long(p)), fmt(sweep[p]), fmt(long(k)), fmt(point_trial_seed(cfg.seed, p, k)), fmt(t.tx),
                        fmt(t.rx), fmt(t.n_eig), fmt(long(t.failed))});
    }
    const CapacityResult cap = blahut_arimoto(tm);
    const auto ci = capacity_ci(tm, point_trial_seed(cfg.seed, p, 0xffffffffULL), boot);
    std::vector<double> prior(cap.input.data(), cap.input.data() + cap.input.size());
    const EfficiencyReport eff = spectral_efficiency(cap.capacity_bits, T, W, P, prior, s.mode);
    json counts = json::array();
    for (Eigen::Index i = 0; i < tm.counts.rows(); ++i) {
      std::vector<long> row(tm.counts.cols());
      for (Eigen::Index j = 0; j < tm.counts.cols(); ++j) row[j] = tm.counts(i, j);
      counts.push_back(row);
    }
    points.push_back({{"snr_db", s.noiseless ? json(nullptr) : json(sweep[p])},
                      {"noise_density", D},
                      {"capacity_bits", cap.capacity_bits},
                      {"capacity_ci95", {ci.first, ci.second}},
                      {"input_distribution", vec_json(cap.input)},
                      {"diagonal_fraction", tm.diagonal_fraction()},
                      {"failed_trials", failed},
                      {"avg_duration", eff.avg_duration},
                      {"max_bandwidth", eff.max_bandwidth},
                      {"avg_power", eff.avg_power},
                      {"rho", eff.rho},
                      {"rho_ratio", eff.rho / rho0},
                      {"counts", counts}});
    r.summary_rows.push_back({sweep[p], cap.capacity_bits, eff.rho, static_cast<long>(trials.size())});
  }
  r.summary["noiseless"] = s.noiseless;
  r.summary["points"] = points;
  return r;
}

// ---------------------------------------------------------------------------------------------
// one-soliton amplitude channel

ExperimentResult run_ook(const ExperimentConfig& cfg) {
  const int levels = get<int>(cfg.doc, "levels");
  ExperimentResult r;
  r.id = cfg.id;
  r.sweep_name = "snr_db";
  r.columns = {"point", "snr_db", "trial", "seed", "snr", "mi_bits", "asymptote_bits", "limit_bits"};
  std::vector<double> snr;
  for (double db : cfg.sweep) snr.push_back(db_to_linear(db));
  const auto pts = capacity_1soliton_amplitude(snr, levels);
  const EfficiencyReport ook = soliton_efficiency(1.0, {0.0, 1.0}, {0.5, 0.5});
  // T(w) BW(w) = 7 * 0.95 for every amplitude
  const double slot = 7.0 * 0.95;
  json points = json::array();
  for (std::size_t p = 0; p < pts.size(); ++p) {
    r.rows.push_back({fmt(long(p)), fmt(cfg.sweep[p]), "0", fmt(cfg.seed), fmt(pts[p].snr), fmt(pts[p].mi_bits),
                      fmt(pts[p].asymptote_bits), fmt(pts[p].limit_bits)});
    points.push_back({{"snr_db", cfg.sweep[p]}, {"snr", pts[p].snr}, {"mi_bits", pts[p].mi_bits},
                      {"asymptote_bits", pts[p].asymptote_bits}, {"limit_bits", pts[p].limit_bits},
                      {"rho", pts[p].mi_bits / slot}});
    r.summary_rows.push_back({cfg.sweep[p], pts[p].mi_bits, pts[p].mi_bits / slot, 0});
  }
  r.summary["rho_ook"] = ook.rho;
  r.summary["levels"] = levels;
  r.summary["points"] = points;
  return r;
}

// ---------------------------------------------------------------------------------------------
// continuous-spectrum rates: ring constellation on an isolated raised-cosine pulse

struct ContSetup {
  TimeGrid grid;
  LinkConfig link;
  double symbol_period = 2.0, rolloff = 0.5;
  std::vector<cplx> points;
  VectorXc pulse;
  VectorXr lambdas;
  Constellation nft_set;
  double avg_power = 0.0;
};

ContSetup cont_setup(const ExperimentConfig& cfg) {
  const json& d = cfg.doc;
  ContSetup s;
  s.grid = parse_grid(d.at("grid"), "grid");
  s.link = parse_link(d.at("link"));
  const json& c = d.at("constellation");
  const int rings = get<int>(c, "rings"), phases = get<int>(c, "phases");
  const double peak = get<double>(c, "peak_amplitude");
  s.symbol_period = get<double>(c, "symbol_period");
  s.rolloff = get<double>(c, "rolloff");
  const int nl = get<int>(d.at("nft"), "n_lambda");
  const double lmax = get<double>(d.at("nft"), "lambda_max");
  require(rings >= 1 && phases >= 1 && peak > 0, "constellation: rings, phases >= 1 and peak_amplitude > 0");
  require(s.symbol_period > 0 && s.rolloff >= 0 && s.rolloff <= 1, "constellation: invalid pulse");
  require(nl >= 2 && lmax > 0, "nft: n_lambda >= 2 and lambda_max > 0");
  for (int i = 0; i < rings; ++i)
    for (int k = 0; k < phases; ++k) s.points.push_back(peak * (i + 1.0) / rings * std::polar(1.0, 2 * PI * k / phases));
  s.pulse = rc_pulse(s.grid, s.symbol_period, s.rolloff);
  s.lambdas = VectorXr::LinSpaced(nl, -lmax, lmax);
  ZsOptions zo;
  zo.edge_tol = 0.0;
  double e = 0.0;
  for (const cplx& x : s.points) {
    Symbol sym;
    sym.waveform = TimeSignal(s.grid, x * s.pulse);
    sym.cont = continuous_spectrum(sym.waveform, s.lambdas, zo).spectrum;
    s.nft_set.symbols.push_back(std::move(sym));
    e += energy(s.nft_set.symbols.back().waveform);
  }
  s.nft_set.priors.assign(s.points.size(), 1.0 / s.points.size());
  s.avg_power = e / s.points.size() / s.symbol_period;
  return s;
}

ExperimentResult run_contspec(const ExperimentConfig& cfg) {
  const ContSetup s = cont_setup(cfg);
  const long M = static_cast<long>(s.points.size());
  const int boot = get<int>(cfg.doc, "bootstrap");
  const double pp = s.pulse.squaredNorm();
  ZsOptions zo;
  zo.edge_tol = 0.0;

  ExperimentResult r;
  r.id = cfg.id;
  r.sweep_name = "snr_db";
  r.columns = {"point", "snr_db", "trial", "seed", "tx", "rx_nft", "rx_bp", "mf_re", "mf_im"};
  json points = json::array();
  for (std::size_t p = 0; p < cfg.sweep.size(); ++p) {
    const double D = density_for(cfg.sweep[p], s.avg_power, s.link);
    struct Out {
      long nft = 0, bp = 0;
      cplx mf;
    };
    std::vector<Out> out(static_cast<std::size_t>(M) * cfg.trials);
    parallel_trials(static_cast<long>(out.size()), [&](long k) {
      const long x = k / cfg.trials;
      Rng rng(point_trial_seed(cfg.seed, p, k));
      LinkConfig l = s.link;
      l.noise_density = D;
      const TimeSignal rx = ssfm_propagate(s.nft_set.symbols[x].waveform, l, rng);
      // nonlinear receiver: continuous spectrum with the propagation phase removed
      ContinuousSpectrum cs = continuous_spectrum(rx, s.lambdas, zo).spectrum;
      for (Eigen::Index i = 0; i < cs.values.size(); ++i)
        cs.values(i) *= std::exp(4.0 * J * s.lambdas(i) * s.lambdas(i) * l.z_total);
      out[k].nft = static_cast<long>(detect_continuous(cs, s.nft_set));
      // linear receiver: backpropagation and matched filter
      const TimeSignal bp = backpropagate(rx, l);
      const cplx y = s.pulse.dot(bp.samples) / pp;
      long best = 0;
      for (long m = 1; m < M; ++m)
        if (std::norm(y - s.points[m]) < std::norm(y - s.points[best])) best = m;
      out[k].bp = best;
      out[k].mf = y;
    });
    TransitionMatrix tn, tb;
    tn.counts.setZero(M, M);
    tb.counts.setZero(M, M);
    tn.row_trials.assign(M, cfg.trials);
    tb.row_trials.assign(M, cfg.trials);
    for (std::size_t k = 0; k < out.size(); ++k) {
      const long x = static_cast<long>(k) / cfg.trials;
      tn.counts(x, out[k].nft) += 1;
      tb.counts(x, out[k].bp) += 1;
      r.rows.push_back({fmt(long(p)), fmt(cfg.sweep[p]), fmt(long(k)), fmt(point_trial_seed(cfg.seed, p, k)), fmt(x),
                        fmt(out[k].nft), fmt(out[k].bp), fmt(out[k].mf.real()), fmt(out[k].mf.imag())});
    }
    const double cn = blahut_arimoto(tn).capacity_bits, cb = blahut_arimoto(tb).capacity_bits;
    const auto ci_n = capacity_ci(tn, point_trial_seed(cfg.seed, p, 0xfffffffeULL), boot);
    const auto ci_b = capacity_ci(tb, point_trial_seed(cfg.seed, p, 0xffffffffULL), boot);
    const double slot = 1.0 + s.rolloff;  // T * (1 + beta) / T
    points.push_back({{"snr_db", cfg.sweep[p]},
                      {"noise_density", D},
                      {"nft", {{"capacity_bits", cn}, {"capacity_ci95", {ci_n.first, ci_n.second}},
                               {"diagonal_fraction", tn.diagonal_fraction()}, {"rho", cn / slot}}},
                      {"backprop", {{"capacity_bits", cb}, {"capacity_ci95", {ci_b.first, ci_b.second}},
                                    {"diagonal_fraction", tb.diagonal_fraction()}, {"rho", cb / slot}}}});
    r.summary_rows.push_back({cfg.sweep[p], cn, cn / slot, static_cast<long>(out.size())});
  }
  r.summary["avg_power"] = s.avg_power;
  r.summary["points"] = points;
  return r;
}

// ---------------------------------------------------------------------------------------------
// WDM baseline

WdmConfig parse_wdm(const json& w) {
  WdmConfig c;
  c.n_channels = get<int>(w, "n_channels");
  c.channel_spacing = get<double>(w, "channel_spacing");
  c.symbol_period = get<double>(w, "symbol_period");
  c.rolloff = get<double>(w, "rolloff");
  c.n_spans = get<int>(w, "n_spans");
  c.span_length = get<double>(w, "span_length");
  c.steps_per_span = get<int>(w, "steps_per_span");
  c.noise_density = get<double>(w, "noise_density");
  c.noise_bandwidth = get<double>(w, "noise_bandwidth");
  c.interferer_ratio = get<double>(w, "interferer_ratio");
  c.qam_order = get<int>(w, "qam_order");
  c.grid = parse_grid(w.at("grid"), "wdm.grid");
  require(c.noise_density >= 0 && c.noise_bandwidth > 0 && c.interferer_ratio >= 0, "wdm: invalid noise or interferer");
  try {
    c.validate();
    qam_constellation(c.qam_order);
    rc_train(c.grid, c.symbol_period, c.rolloff, {});
  } catch (const NfdmError& e) {
    throw NfdmError(ErrorCode::InvalidParams, std::string("wdm: ") + e.what());
  }
  return c;
}

ExperimentResult run_wdm(const ExperimentConfig& cfg) {
  const WdmConfig base = parse_wdm(cfg.doc.at("wdm"));
  const int boot = get<int>(cfg.doc, "bootstrap");
  const auto pts = qam_constellation(base.qam_order);
  ExperimentResult r;
  r.id = cfg.id;
  r.sweep_name = "launch_power";
  r.columns = {"point", "coi_amplitude", "launch_power", "trial", "seed", "error_power", "rx_power"};
  json points = json::array();
  std::vector<double> caps;
  for (std::size_t p = 0; p < cfg.sweep.size(); ++p) {
    WdmConfig c = base;
    c.coi_amplitude = cfg.sweep[p];
    std::vector<WdmRun> runs(cfg.trials);
    parallel_trials(cfg.trials, [&](long k) {
      Rng rng(point_trial_seed(cfg.seed, p, k));
      runs[k] = wdm_link_run(c, rng);
      runs[k].received = TimeSignal();
    });
    std::vector<cplx> tx, rx;
    for (long k = 0; k < cfg.trials; ++k) {
      double err = 0.0, pw = 0.0;
      for (std::size_t i = 0; i < runs[k].tx.size(); ++i) {
        err += std::norm(runs[k].rx[i] - runs[k].tx[i]);
        pw += std::norm(runs[k].rx[i]);
      }
      const double n = static_cast<double>(runs[k].tx.size());
      r.rows.push_back({fmt(long(p)), fmt(c.coi_amplitude), fmt(wdm_launch_power(c)), fmt(k),
                        fmt(point_trial_seed(cfg.seed, p, k)), fmt(err / n), fmt(pw / n)});
      tx.insert(tx.end(), runs[k].tx.begin(), runs[k].tx.end());
      rx.insert(rx.end(), runs[k].rx.begin(), runs[k].rx.end());
    }
    const QamRateReport q = qam_rate(tx, rx, pts);
    // bootstrap over trials
    std::vector<double> bc;
    Rng brng(point_trial_seed(cfg.seed, p, 0xffffffffULL));
    std::uniform_int_distribution<long> pick(0, cfg.trials - 1);
    for (int b = 0; b < boot; ++b) {
      std::vector<cplx> bt, br;
      for (long k = 0; k < cfg.trials; ++k) {
        const long j = pick(brng);
        bt.insert(bt.end(), runs[j].tx.begin(), runs[j].tx.end());
        br.insert(br.end(), runs[j].rx.begin(), runs[j].rx.end());
      }
      bc.push_back(qam_rate(bt, br, pts).capacity_bits);
    }
    const double rho = q.capacity_bits / (1.0 + c.rolloff);
    points.push_back({{"coi_amplitude", c.coi_amplitude},
                      {"launch_power", wdm_launch_power(c)},
                      {"gain", {q.gain.real(), q.gain.imag()}},
                      {"snr_eff_db", 10 * std::log10(q.snr_eff)},
                      {"gaussian_bits", q.gaussian_bits},
                      {"capacity_bits", q.capacity_bits},
                      {"capacity_ci95", {boot ? quantile(bc, 0.025) : kNaN, boot ? quantile(bc, 0.975) : kNaN}},
                      {"rho", rho}});
    caps.push_back(q.capacity_bits);
    r.summary_rows.push_back({wdm_launch_power(c), q.capacity_bits, rho, static_cast<long>(tx.size())});
  }
  const std::size_t ip = static_cast<std::size_t>(std::max_element(caps.begin(), caps.end()) - caps.begin());
  const double decline = caps[ip] > 0 ? (caps[ip] - caps.back()) / caps[ip] : 0.0;
  r.summary["points"] = points;
  r.summary["peak_index"] = ip;
  r.summary["peak_capacity_bits"] = caps[ip];
  r.summary["decline_from_peak"] = decline;
  r.summary["non_monotone"] = ip > 0 && ip + 1 < caps.size() && caps[ip] > caps.front() && caps.back() < caps[ip];
  r.summary["interferer_ratio"] = base.interferer_ratio;
  return r;
}

// ---------------------------------------------------------------------------------------------
// eigenvalue noise statistics for a single soliton

struct NoiseSetup {
  TimeSignal soliton;
  cplx lambda;
  LinkConfig link;
  Eigenvector v;
  double P0 = 0.0;
  EigenSearchConfig search;
};

NoiseSetup noise_setup(const ExperimentConfig& cfg) {
  const json& d = cfg.doc;
  NoiseSetup s;
  const TimeGrid g = parse_grid(d.at("grid"), "grid");
  s.link = parse_link(d.at("link"));
  const json& so = d.at("soliton");
  s.lambda = cplx(get<double>(so, "re_lambda"), get<double>(so, "im_lambda"));
  const cplx amp(get<double>(so, "re_amp"), get<double>(so, "im_amp"));
  require(s.lambda.imag() > 0 && std::abs(amp) > 0, "soliton: need Im lambda > 0 and a nonzero amplitude");
  SynthesisWarnings w;
  s.soliton = multisoliton(DiscreteSpectrum({{s.lambda, amp}}), g, &w);
  require(!w.window_too_narrow, "grid: soliton does not decay inside the window");
  const SignalExtents ext = measure_extents(s.soliton, signal_set_extent_options());
  s.P0 = ext.energy / ext.t_99;
  s.v = bound_state(s.soliton, s.lambda);
  s.search.zs.edge_tol = 0.0;
  return s;
}

json normality_json(const std::vector<double>& x) {
  if (x.size() < 20) return nullptr;
  const NormalityTest t = dagostino_pearson(x);
  return {{"statistic", t.statistic}, {"p_value", t.p_value}, {"skewness", t.skewness},
          {"excess_kurtosis", t.excess_kurtosis}};
}

Moments moments(const std::vector<double>& x) {
  Moments m;
  m.mean = std::accumulate(x.begin(), x.end(), 0.0) / x.size();
  for (double v : x) m.variance += (v - m.mean) * (v - m.mean);
  m.variance /= (x.size() - 1);
  return m;
}

ExperimentResult run_eig_noise(const ExperimentConfig& cfg) {
  const NoiseSetup s = noise_setup(cfg);
  const double E0 = energy(s.soliton);
  const double w0 = 2 * s.lambda.imag();
  const double z = s.link.z_total;
  ExperimentResult r;
  r.id = cfg.id;
  r.sweep_name = "snr_db";
  r.columns = {"point",  "snr_db",  "trial",   "seed",    "lumped_re", "lumped_im", "predicted_re", "predicted_im",
               "dist_re", "dist_im", "dist_energy", "failed"};
  json points = json::array();
  for (std::size_t p = 0; p < cfg.sweep.size(); ++p) {
    const double D = density_for(cfg.sweep[p], s.P0, s.link);
    struct Out {
      cplx lumped, predicted, dist;
      double energy = 0.0;
      bool failed = false;
    };
    std::vector<Out> out(cfg.trials);
    parallel_trials(cfg.trials, [&](long k) {
      const std::uint64_t seed = point_trial_seed(cfg.seed, p, k);
      Rng rng(seed);
      // lumped: the whole link's noise added at once to the launched soliton
      const TimeSignal n = inject_noise(TimeSignal::zeros(s.soliton.grid), D, z, s.link.noise_bandwidth, rng);
      TimeSignal y = s.soliton;
      y.samples += n.samples;
      const EigenSearchReport a = refine_eigenvalues(y, {s.lambda}, s.search);
      out[k].predicted = eigenvalue_first_order_shift(s.soliton, s.lambda, s.v, n).delta_lambda;
      // distributed: noise added along the fiber
      Rng rng2(trial_seed(seed, 1));
      LinkConfig l = s.link;
      l.noise_density = D;
      const TimeSignal rx = ssfm_propagate(s.soliton, l, rng2);
      const EigenSearchReport b = refine_eigenvalues(rx, {s.lambda}, s.search);
      out[k].energy = energy(rx);
      if (a.eigenvalues.size() != 1 || b.eigenvalues.size() != 1) {
        out[k].failed = true;
        return;
      }
      out[k].lumped = a.eigenvalues[0] - s.lambda;
      out[k].dist = b.eigenvalues[0] - s.lambda;
    });

    std::vector<double> lre, lim, res_sq, omega, alpha, en;
    long failed = 0;
    double pred_var = 0.0;
    for (long k = 0; k < cfg.trials; ++k) {
      const Out& o = out[k];
      r.rows.push_back({fmt(long(p)), fmt(cfg.sweep[p]), fmt(k), fmt(point_trial_seed(cfg.seed, p, k)),
                        fmt(o.lumped.real()), fmt(o.lumped.imag()), fmt(o.predicted.real()), fmt(o.predicted.imag()),
                        fmt(o.dist.real()), fmt(o.dist.imag()), fmt(o.energy), fmt(long(o.failed))});
      en.push_back(o.energy);
      if (o.failed) {
        ++failed;
        continue;
      }
      lre.push_back(o.lumped.real());
      lim.push_back(o.lumped.imag());
      res_sq.push_back(std::norm(o.lumped - o.predicted));
      pred_var += std::norm(o.predicted);
      omega.push_back(w0 + 2 * o.dist.imag());
      alpha.push_back(2 * (s.lambda.real() + o.dist.real()));
    }
    const long n = static_cast<long>(lre.size());
    require(n >= 8, "eig-noise: too few successful trials");
    const Moments mre = moments(lre), mim = moments(lim), mw = moments(omega), ma = moments(alpha), me = moments(en);
    const double total = (mre.variance + mim.variance) * (n - 1) / n;
    const double resid = std::accumulate(res_sq.begin(), res_sq.end(), 0.0) / n;
    const double sigma2 = 2 * D;
    const double var_w = sigma2 * z * w0 / 2, var_e = sigma2 * z * E0;
    // chi-square of omega against the conditional density, bins of a quarter standard deviation
    const double sd = std::sqrt(var_w);
    std::vector<double> edges;
    for (int i = -12; i <= 12; ++i) edges.push_back(w0 + 0.25 * i * sd);
    const double chi_p = chi_square_gof(omega, edges, [&](double x) { return 0.5 * std::erfc(-(x - w0) / (sd * std::sqrt(2.0))); });
    points.push_back(
        {{"snr_db", cfg.sweep[p]},
         {"noise_density", D},
         {"sigma2", sigma2},
         {"failed_trials", failed},
         {"lumped",
          {{"mean", {mre.mean, mim.mean}},
           {"stderr", {std::sqrt(mre.variance / n), std::sqrt(mim.variance / n)}},
           {"variance", {mre.variance, mim.variance}},
           {"normality_re", normality_json(lre)},
           {"normality_im", normality_json(lim)},
           {"predicted_variance", pred_var / n},
           {"explained_variance", 1.0 - resid / total}}},
         {"distributed",
          {{"omega0", w0},
           {"omega_mean", mw.mean},
           {"omega_variance", mw.variance},
           {"omega_variance_predicted", var_w},
           {"omega_variance_ratio", mw.variance / var_w},
           {"omega_chi2_p", chi_p},
           {"omega_normality", normality_json(omega)},
           {"alpha_variance", ma.variance},
           {"energy0", E0},
           {"energy_mean", me.mean},
           {"energy_variance", me.variance},
           {"energy_variance_predicted", var_e},
           {"energy_variance_ratio", me.variance / var_e}}}});
  }
  r.summary["P0"] = s.P0;
  r.summary["points"] = points;
  return r;
}

}  // namespace

json experiment_preset(const std::string& id) {
  if (id == "ook-1soliton") {
    json d = base_doc(id, 1, {0, 5, 10, 15, 20, 25, 30, 35, 40});
    d["levels"] = 512;
    return d;
  }
  if (id == "signalset-a" || id == "signalset-b") {
    json d = base_doc(id, 1000, {5, 10, 20, 30});
    d["noiseless"] = false;
    d["bootstrap"] = 200;
    d["grid"] = grid_json(1024, -32, 1.0 / 16);
    d["extent_grid"] = grid_json(4096, -64, 1.0 / 32);
    d["link"] = {{"z_total", 1.0}, {"n_steps", 200}, {"noise_bandwidth", 3.0}};
    d["receiver"] = receiver_json(0.25, 1.0, 5, 16, id == "signalset-a" ? 0.0 : 1.0);
    return d;
  }
  if (id == "multisoliton-grid") {
    json d = base_doc(id, 1000, {10, 20, 30});
    d["noiseless"] = false;
    d["bootstrap"] = 200;
    d["grid"] = grid_json(4096, -64, 1.0 / 32);
    d["extent_grid"] = grid_json(8192, -64, 1.0 / 64);
    d["link"] = {{"z_total", 1.0}, {"n_steps", 400}, {"noise_bandwidth", 3.0}};
    d["receiver"] = receiver_json(0.25, 1.25, 5, 32, 0.0);
    d["constellation"] = {{"n_levels", 8},
                          {"im_max", 1.0},
                          {"max_order", 3},
                          {"amplitudes", {1.0}},
                          {"max_t99", 20.0},
                          {"max_bw99", 1.0},
                          {"max_symbols", 0},
                          {"seed", 1}};
    return d;
  }
  if (id == "contspec-rates") {
    json d = base_doc(id, 1000, {5, 10, 15, 20, 25});
    d["bootstrap"] = 200;
    d["grid"] = grid_json(1024, -32, 1.0 / 16);
    d["link"] = {{"z_total", 1.0}, {"n_steps", 100}, {"noise_bandwidth", 3.0}};
    d["constellation"] = {{"rings", 4}, {"phases", 8}, {"peak_amplitude", 0.4}, {"symbol_period", 2.0}, {"rolloff", 0.5}};
    d["nft"] = {{"n_lambda", 64}, {"lambda_max", 1.5}};
    return d;
  }
  if (id == "wdm-baseline") {
    json d = base_doc(id, 200, {0.02, 0.04, 0.08, 0.12, 0.16, 0.24, 0.32, 0.48, 0.64});
    d["bootstrap"] = 200;
    const WdmConfig w;
    d["wdm"] = {{"n_channels", w.n_channels},
                {"channel_spacing", w.channel_spacing},
                {"symbol_period", w.symbol_period},
                {"rolloff", w.rolloff},
                {"n_spans", w.n_spans},
                {"span_length", w.span_length},
                {"steps_per_span", w.steps_per_span},
                {"noise_density", 1e-4},
                {"noise_bandwidth", w.noise_bandwidth},
                {"interferer_ratio", 1.0},
                {"qam_order", w.qam_order},
                {"grid", grid_json(w.grid.n_samples, w.grid.t_start, w.grid.dt)}};
    return d;
  }
  if (id == "eig-noise") {
    json d = base_doc(id, 10000, {25, 30});
    d["grid"] = grid_json(1024, -32, 1.0 / 16);
    d["link"] = {{"z_total", 1.0}, {"n_steps", 50}, {"noise_bandwidth", 3.0}};
    d["soliton"] = {{"re_lambda", 0.0}, {"im_lambda", 0.5}, {"re_amp", 1.0}, {"im_amp", 0.0}};
    return d;
  }
  throw NfdmError(ErrorCode::InvalidParams, "unknown experiment '" + id + "'");
}

void validate_experiment(const ExperimentConfig& cfg) {
  const json& d = cfg.doc;
  if (d.contains("bootstrap")) require(get<int>(d, "bootstrap") >= 0, "bootstrap must be >= 0");
  if (cfg.id == "ook-1soliton") {
    require(get<int>(d, "levels") >= 2, "levels must be >= 2");
  } else if (cfg.id == "signalset-a" || cfg.id == "signalset-b" || cfg.id == "multisoliton-grid") {
    parse_grid(d.at("grid"), "grid");
    parse_grid(d.at("extent_grid"), "extent_grid");
    parse_link(d.at("link"));
    parse_receiver(d.at("receiver"));
    get<bool>(d, "noiseless");
    if (cfg.id == "multisoliton-grid") {
      const json& g = d.at("constellation");
      require(get<int>(g, "n_levels") >= 1 && get<int>(g, "max_order") >= 0, "constellation: invalid grid");
      require(!get<std::vector<double>>(g, "amplitudes").empty(), "constellation: amplitudes must be non-empty");
    }
  } else if (cfg.id == "contspec-rates") {
    parse_grid(d.at("grid"), "grid");
    parse_link(d.at("link"));
    const json& c = d.at("constellation");
    require(get<int>(c, "rings") >= 1 && get<int>(c, "phases") >= 1 && get<double>(c, "peak_amplitude") > 0,
            "constellation: rings, phases >= 1 and peak_amplitude > 0");
    require(get<int>(d.at("nft"), "n_lambda") >= 2 && get<double>(d.at("nft"), "lambda_max") > 0,
            "nft: n_lambda >= 2 and lambda_max > 0");
  } else if (cfg.id == "wdm-baseline") {
    parse_wdm(d.at("wdm"));
    for (double a : cfg.sweep) require(a > 0, "sweep: COI amplitudes must be positive");
  } else if (cfg.id == "eig-noise") {
    parse_grid(d.at("grid"), "grid");
    parse_link(d.at("link"));
    require(cfg.trials >= 8, "trials must be >= 8");
  }
}

ExperimentResult run_experiment(const ExperimentConfig& cfg) {
  validate_experiment(cfg);
  ExperimentResult r;
  if (cfg.id == "ook-1soliton")
    r = run_ook(cfg);
  else if (cfg.id == "signalset-a" || cfg.id == "signalset-b" || cfg.id == "multisoliton-grid")
    r = run_discrete(cfg);
  else if (cfg.id == "contspec-rates")
    r = run_contspec(cfg);
  else if (cfg.id == "wdm-baseline")
    r = run_wdm(cfg);
  else if (cfg.id == "eig-noise")
    r = run_eig_noise(cfg);
  else
    throw NfdmError(ErrorCode::InvalidParams, "unknown experiment '" + cfg.id + "'");
  r.summary["experiment"] = cfg.id;
  r.summary["schema"] = kSchemaVersion;
  r.summary["config_hash"] = cfg.hash;
  r.summary["seed"] = cfg.seed;
  r.summary["trials"] = cfg.trials;
  r.summary["config"] = cfg.doc;
  return r;
}

ExperimentFiles write_experiment(const ExperimentResult& r, const ExperimentConfig& cfg) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(cfg.output_dir, ec);
  if (ec) throw NfdmError(ErrorCode::Io, "cannot create " + cfg.output_dir + ": " + ec.message());
  const std::string header = "# nfdm-experiment " + r.id + " schema " + std::to_string(kSchemaVersion) + " config " + cfg.hash;
  auto open = [](const std::string& path) {
    std::ofstream f(path);
    if (!f) throw NfdmError(ErrorCode::Io, "cannot write " + path);
    return f;
  };
  auto join = [](const std::vector<std::string>& v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + v[i];
    return s;
  };
  ExperimentFiles files;
  files.csv = (fs::path(cfg.output_dir) / (r.id + ".csv")).string();
  {
    std::ofstream f = open(files.csv);
    f << header << '\n' << join(r.columns) << '\n';
    for (const auto& row : r.rows) f << join(row) << '\n';
  }
  if (!r.summary_rows.empty()) {
    files.summary_csv = (fs::path(cfg.output_dir) / (r.id + "_summary.csv")).string();
    std::ofstream f = open(files.summary_csv);
    f << header << '\n' << "experiment," << r.sweep_name << ",bits_per_symbol,rho,trials,seed\n";
    for (const auto& s : r.summary_rows)
      f << r.id << ',' << fmt(s.x) << ',' << fmt(s.bits_per_symbol) << ',' << fmt(s.rho) << ',' << s.trials << ','
        << cfg.seed << '\n';
  }
  files.summary_json = (fs::path(cfg.output_dir) / (r.id + "_summary.json")).string();
  {
    std::ofstream f = open(files.summary_json);
    f << r.summary.dump(1) << '\n';
  }
  return files;
}

}  // namespace nfdm
