#include "nfdm/config.hpp"
#include "nfdm/darboux.hpp"
#include "nfdm/experiments.hpp"
#include "nfdm/io.hpp"
#include "nfdm/nls_sim.hpp"
#include "nfdm/oracles.hpp"
#include "nfdm/spectral_stats.hpp"
#include "nfdm/zs_forward.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>

#ifdef _OPENMP
#include <omp.h>
#endif

using namespace nfdm;
using nlohmann::json;

namespace {

int exit_code(ErrorCode c) {
  switch (c) {
    case ErrorCode::NoConvergence:
    case ErrorCode::NotAnEigenvalue:
    case ErrorCode::DegenerateRoot:
    case ErrorCode::DegenerateEigenvector:
    case ErrorCode::EnergyBlowup:
    case ErrorCode::NonStochastic:
      return 3;
    default:
      return 2;
  }
}

void write_json(const std::string& path, const json& j) {
  if (path.empty() || path == "-") {
    std::cout << j.dump(1) << '\n';
    return;
  }
  std::ofstream f(path);
  if (!f) throw NfdmError(ErrorCode::Io, "cannot write " + path);
  f << j.dump(1) << '\n';
}

json read_json(const std::string& path) {
  try {
    return json::parse(read_text_file(path));
  } catch (const json::parse_error& e) {
    throw NfdmError(ErrorCode::Parse, path + ": " + e.what());
  }
}

struct GridArgs {
  double t_min = -30.0, t_max = 30.0, dt = 1.0 / 256;
  TimeGrid grid() const {
    if (!(dt > 0 && t_max > t_min)) throw NfdmError(ErrorCode::InvalidArgument, "need t_max > t_min and dt > 0");
    return TimeGrid::span(t_min, t_max, dt);
  }
};

void add_grid(CLI::App* app, GridArgs& g) {
  app->add_option("--t-min", g.t_min, "window start")->capture_default_str();
  app->add_option("--t-max", g.t_max, "window end")->capture_default_str();
  app->add_option("--dt", g.dt, "sample spacing")->capture_default_str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Nonlinear Fourier transform toolkit"};
  app.require_subcommand(1);
  int threads = 0;
  app.add_option("--threads", threads, "worker threads (0 keeps the default)");

  // nft
  auto* nft_cmd = app.add_subcommand("nft", "forward transform of a signal file");
  std::string nft_in, nft_out;
  double lmin = -5.0, lmax = 5.0, edge_tol = 1e-6, min_im = 1e-3;
  int nl = 0;
  nft_cmd->add_option("input", nft_in, "signal file (.csv or .json)")->required();
  nft_cmd->add_option("-o,--output", nft_out, "spectrum JSON (default stdout)");
  nft_cmd->add_option("--lambda-min", lmin, "continuous grid start")->capture_default_str();
  nft_cmd->add_option("--lambda-max", lmax, "continuous grid end")->capture_default_str();
  nft_cmd->add_option("--n-lambda", nl, "continuous grid points (0 skips the continuous spectrum)")->capture_default_str();
  nft_cmd->add_option("--edge-tol", edge_tol, "edge/peak ratio above which the signal is rejected (0 disables)")
      ->capture_default_str();
  nft_cmd->add_option("--min-im", min_im, "smallest accepted Im lambda")->capture_default_str();

  // inft
  auto* inft_cmd = app.add_subcommand("inft", "synthesize a signal from a discrete spectrum");
  std::string inft_in, inft_out, method = "darboux";
  double inft_z = 0.0;
  GridArgs inft_grid;
  inft_cmd->add_option("input", inft_in, "spectrum JSON")->required();
  inft_cmd->add_option("-o,--output", inft_out, "signal file (.csv or .json)")->required();
  inft_cmd->add_option("--method", method, "darboux, rh or hirota")
      ->check(CLI::IsMember({"darboux", "rh", "hirota"}))
      ->capture_default_str();
  inft_cmd->add_option("--z", inft_z, "propagate the spectrum to distance z first")->capture_default_str();
  add_grid(inft_cmd, inft_grid);

  // propagate
  auto* prop_cmd = app.add_subcommand("propagate", "split-step propagation of a signal file");
  std::string prop_in, prop_out;
  LinkConfig link;
  bool backward = false;
  prop_cmd->add_option("input", prop_in, "signal file")->required();
  prop_cmd->add_option("-o,--output", prop_out, "signal file")->required();
  prop_cmd->add_option("--z", link.z_total, "distance")->capture_default_str();
  prop_cmd->add_option("--steps", link.n_steps, "split steps")->capture_default_str();
  prop_cmd->add_option("--noise-density", link.noise_density, "noise density D")->capture_default_str();
  prop_cmd->add_option("--noise-bandwidth", link.noise_bandwidth, "noise bandwidth W")->capture_default_str();
  prop_cmd->add_option("--seed", link.seed, "noise seed")->capture_default_str();
  prop_cmd->add_flag("--backward", backward, "noiseless backpropagation");

  // experiment
  auto* exp_cmd = app.add_subcommand("experiment", "run an experiment from a JSON config");
  std::string exp_cfg, exp_dir, exp_preset;
  exp_cmd->add_option("config", exp_cfg, "config file");
  exp_cmd->add_option("--output-dir", exp_dir, "overrides output_dir");
  exp_cmd->add_option("--print-preset", exp_preset, "print the default config of an experiment and exit");

  // stats
  auto* stats_cmd = app.add_subcommand("stats", "extents and first-order eigenvalue noise sensitivity of a signal");
  std::string stats_in, center = "centroid";
  std::vector<double> stats_lambda;
  stats_cmd->add_option("input", stats_in, "signal file")->required();
  stats_cmd->add_option("--center", center, "extent window centre")
      ->check(CLI::IsMember({"centroid", "origin"}))
      ->capture_default_str();
  stats_cmd->add_option("--lambda", stats_lambda, "eigenvalue re im for the perturbation variance")->expected(2);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 1;
  }
#ifdef _OPENMP
  if (threads > 0) omp_set_num_threads(threads);
#endif

  try {
    if (*nft_cmd) {
      const TimeSignal s = load_signal(nft_in);
      EigenSearchConfig cfg;
      cfg.zs.edge_tol = edge_tol;
      cfg.min_im = min_im;
      VectorXr grid;
      if (nl > 0) {
        if (nl < 2 || !(lmax > lmin)) throw NfdmError(ErrorCode::InvalidArgument, "need n_lambda >= 2 and lambda_max > lambda_min");
        grid = VectorXr::LinSpaced(nl, lmin, lmax);
      }
      const NftResult r = nft(s, grid, cfg);
      json j = spectrum_to_json(r.discrete, nl > 0 ? &r.continuous : nullptr);
      const double e = energy(s);
      const double es = spectrum_energy(r.discrete, r.continuous);
      j["diagnostics"] = {{"residuals", r.report.residuals},
                          {"winding_number", r.report.winding_number},
                          {"failed_seeds", r.report.failed_seeds},
                          {"signal_energy", e},
                          {"spectrum_energy", es},
                          {"residual_energy", e - es}};
      write_json(nft_out, j);
    } else if (*inft_cmd) {
      DiscreteSpectrum ds = discrete_from_json(read_json(inft_in));
      if (inft_z != 0.0) ds = propagate_spectrum(ds, inft_z);
      const TimeGrid g = inft_grid.grid();
      TimeSignal s;
      if (ds.empty())
        s = TimeSignal::zeros(g);
      else if (method == "darboux")
        s = multisoliton(ds, g);
      else if (method == "rh")
        s = rh_multisoliton(ds, g).signal;
      else
        s = hirota_multisoliton(ds, g).signal;
      save_signal(inft_out, s);
    } else if (*prop_cmd) {
      const TimeSignal s = load_signal(prop_in);
      save_signal(prop_out, backward ? backpropagate(s, link) : ssfm_propagate(s, link));
    } else if (*exp_cmd) {
      if (!exp_preset.empty()) {
        std::cout << experiment_preset(exp_preset).dump(1) << '\n';
        return 0;
      }
      if (exp_cfg.empty()) {
        std::cerr << "experiment: a config file is required\n";
        return 1;
      }
      ExperimentConfig cfg = load_experiment_config(exp_cfg);
      if (!exp_dir.empty()) {
        cfg.output_dir = exp_dir;
        cfg.doc["output_dir"] = exp_dir;
      }
      const ExperimentResult r = run_experiment(cfg);
      const ExperimentFiles f = write_experiment(r, cfg);
      std::cout << f.csv << '\n';
      if (!f.summary_csv.empty()) std::cout << f.summary_csv << '\n';
      std::cout << f.summary_json << '\n';
    } else if (*stats_cmd) {
      const TimeSignal s = load_signal(stats_in);
      ExtentOptions eo;
      eo.center = center == "origin" ? ExtentCenter::Origin : ExtentCenter::Centroid;
      const SignalExtents x = measure_extents(s, eo);
      json j = {{"energy", x.energy}, {"t_fwhm", x.t_fwhm}, {"t_99", x.t_99}, {"p_avg", x.p_avg}, {"bw_99", x.bw_99}};
      if (stats_lambda.size() == 2) {
        const cplx lam(stats_lambda[0], stats_lambda[1]);
        const PerturbationReport p = eigenvalue_first_order_shift(s, lam, bound_state(s, lam), TimeSignal::zeros(s.grid));
        j["eigenvalue_variance_per_density"] = p.variance_estimate;
      }
      write_json("-", j);
    }
  } catch (const NfdmError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_code(e.code());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
