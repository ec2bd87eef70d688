#include "nfdm/zs_forward.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace nfdm {

namespace {

void check_edges(const TimeSignal& s, const ZsOptions& opt) {
  if (opt.edge_tol > 0 && edge_ratio(s) > opt.edge_tol)
    throw NfdmError(ErrorCode::NonDecayingSignal,
                    "edge magnitude " + std::to_string(edge_ratio(s)) + " of peak exceeds tolerance");
}

ScatteringCoeffs integrate(const TimeSignal& s, cplx lambda) {
  const double h = s.grid.dt;
  cplx v1 = 1.0, v2 = 0.0, w1 = 0.0, w2 = 0.0;
  double logs = 0.0;
  for (int k = 0; k < s.size(); ++k) {
    const ZsStep<double> m(lambda, s.samples(k), h);
    const cplx nw1 = m.m11 * w1 + m.m12 * w2 + m.d11 * v1 + m.d12 * v2;
    const cplx nw2 = m.m21 * w1 + m.m22 * w2 + m.d21 * v1 + m.d22 * v2;
    const cplx nv1 = m.m11 * v1 + m.m12 * v2;
    const cplx nv2 = m.m21 * v1 + m.m22 * v2;
    v1 = nv1, v2 = nv2, w1 = nw1, w2 = nw2;
    const double n = std::max(std::abs(v1), std::abs(v2));
    if (n > 1e64 || n < 1e-64) {
      v1 /= n, v2 /= n, w1 /= n, w2 /= n;
      logs += std::log(n);
    }
  }
  const double T1 = s.grid.t_start - 0.5 * h;
  const double T2 = s.grid.t_end() + 0.5 * h;
  const double L = T2 - T1;
  const cplx ea = std::exp(J * lambda * L + logs);
  ScatteringCoeffs c;
  c.a = v1 * ea;
  c.a_prime = (w1 + J * L * v1) * ea;
  c.b = v2 * std::exp(-J * lambda * (T1 + T2) + logs);
  return c;
}

bool all_zero(const TimeSignal& s) { return s.samples.cwiseAbs().maxCoeff() == 0.0; }

struct NewtonResult {
  cplx lambda;
  double residual;
  bool ok;
};

NewtonResult newton(const TimeSignal& s, cplx lam, const EigenSearchConfig& cfg, double max_step) {
  for (int it = 0; it < cfg.newton_max_iter; ++it) {
    const ScatteringCoeffs c = integrate(s, lam);
    if (c.a == 0.0) return {lam, 0.0, true};
    if (c.a_prime == 0.0) return {lam, std::abs(c.a), false};
    cplx step = c.a / c.a_prime;
    if (std::abs(step) > max_step) step *= max_step / std::abs(step);
    lam -= step;
    if (!std::isfinite(lam.real()) || !std::isfinite(lam.imag())) return {lam, 0.0, false};
    if (std::abs(step) < cfg.newton_tol * (1.0 + std::abs(lam))) {
      return {lam, std::abs(integrate(s, lam).a), true};
    }
  }
  return {lam, std::abs(integrate(s, lam).a), false};
}

// Winding number of a(lambda) along the rectangle boundary, counter-clockwise.
int winding_number(const TimeSignal& s, double x0, double x1, double y0, double y1) {
  const cplx corners[5] = {{x0, y0}, {x1, y0}, {x1, y1}, {x0, y1}, {x0, y0}};
  double total = 0.0;
  for (int e = 0; e < 4; ++e) {
    const cplx p0 = corners[e], p1 = corners[e + 1];
    const int n0 = 64;
    std::vector<std::pair<double, cplx>> stack;
    cplx prev = integrate(s, p0).a;
    double u_prev = 0.0;
    for (int i = n0; i >= 1; --i) stack.push_back({double(i) / n0, cplx()});
    int guard = 0;
    while (!stack.empty()) {
      const double u = stack.back().first;
      const cplx val = integrate(s, p0 + u * (p1 - p0)).a;
      const double d = std::arg(val / prev);
      if (std::abs(d) > 0.5 && u - u_prev > 1e-9 && ++guard < 20000) {
        stack.push_back({0.5 * (u + u_prev), cplx()});
        continue;
      }
      stack.pop_back();
      total += d;
      prev = val;
      u_prev = u;
    }
  }
  return static_cast<int>(std::lround(total / (2 * PI)));
}

void merge_root(EigenSearchReport& rep, const NewtonResult& r, double eps_sep) {
  for (std::size_t i = 0; i < rep.eigenvalues.size(); ++i) {
    if (std::abs(rep.eigenvalues[i] - r.lambda) <= eps_sep) {
      if (r.residual < rep.residuals[i]) {
        rep.eigenvalues[i] = r.lambda;
        rep.residuals[i] = r.residual;
      }
      return;
    }
  }
  rep.eigenvalues.push_back(r.lambda);
  rep.residuals.push_back(r.residual);
}

void sort_report(EigenSearchReport& rep) {
  std::vector<std::size_t> idx(rep.eigenvalues.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
    const cplx x = rep.eigenvalues[a], y = rep.eigenvalues[b];
    if (x.imag() != y.imag()) return x.imag() < y.imag();
    return x.real() < y.real();
  });
  EigenSearchReport out = rep;
  for (std::size_t i = 0; i < idx.size(); ++i) {
    out.eigenvalues[i] = rep.eigenvalues[idx[i]];
    out.residuals[i] = rep.residuals[idx[i]];
  }
  rep = out;
}

}  // namespace

ScatteringCoeffs scattering_coeffs(const TimeSignal& s, cplx lambda, const ZsOptions& opt) {
  if (lambda.imag() < 0) throw NfdmError(ErrorCode::InvalidArgument, "Im lambda must be nonnegative");
  check_edges(s, opt);
  return integrate(s, lambda);
}

ContinuousResult continuous_spectrum(const TimeSignal& s, const VectorXr& lambda_grid, const ZsOptions& opt) {
  for (Eigen::Index i = 1; i < lambda_grid.size(); ++i)
    if (!(lambda_grid(i) > lambda_grid(i - 1)))
      throw NfdmError(ErrorCode::InvalidArgument, "lambda grid must be strictly increasing");
  check_edges(s, opt);
  ContinuousResult out;
  out.spectrum.lambda_grid = lambda_grid;
  out.spectrum.values.resize(lambda_grid.size());
  std::vector<char> near(lambda_grid.size(), 0);
#pragma omp parallel for schedule(static)
  for (Eigen::Index i = 0; i < lambda_grid.size(); ++i) {
    const ScatteringCoeffs c = integrate(s, cplx(lambda_grid(i), 0.0));
    if (std::abs(c.a) < 1e-12) near[i] = 1;
    out.spectrum.values(i) = c.b / c.a;
  }
  for (Eigen::Index i = 0; i < lambda_grid.size(); ++i)
    if (near[i]) out.near_zero_lambdas.push_back(lambda_grid(i));
  return out;
}

EigenSearchConfig auto_search_box(const TimeSignal& s, EigenSearchConfig cfg) {
  if (cfg.re_min < cfg.re_max && cfg.im_min < cfg.im_max) return cfg;
  ExtentOptions eo;
  eo.pad_factor = 1;
  const SignalExtents ext = measure_extents(s, eo);
  // carrier offset maps to Re lambda = -pi f
  const VectorXc& q = s.samples;
  double fc = 0.0;
  {
    // phase slope weighted by power gives the mean frequency
    double num = 0.0, den = 0.0;
    for (Eigen::Index k = 1; k < q.size(); ++k) {
      const cplx z = q(k) * std::conj(q(k - 1));
      num += std::arg(z) * std::abs(z);
      den += std::abs(z);
    }
    if (den > 0) fc = num / den / (2 * PI * s.grid.dt);
  }
  const double half = PI * ext.bw_99 + 0.5;
  cfg.re_min = -PI * fc - half;
  cfg.re_max = -PI * fc + half;
  cfg.im_min = cfg.min_im;
  cfg.im_max = ext.energy / 4.0 * 1.05 + 0.05;
  return cfg;
}

EigenSearchReport find_eigenvalues(const TimeSignal& s, const EigenSearchConfig& cfg_in) {
  if (!(cfg_in.newton_tol > 0) || !(cfg_in.min_im > 0))
    throw NfdmError(ErrorCode::InvalidArgument, "newton_tol and min_im must be positive");
  EigenSearchReport rep;
  check_edges(s, cfg_in.zs);
  if (all_zero(s)) {
    rep.winding_number = 0;
    return rep;
  }
  const EigenSearchConfig cfg = auto_search_box(s, cfg_in);
  const double y0 = std::max(cfg.im_min, cfg.min_im);
  const double y1 = cfg.im_max;
  const double x0 = cfg.re_min, x1 = cfg.re_max;
  const double max_step = 0.25 * std::max(x1 - x0, y1 - y0);

  int nx = cfg.nx, ny = cfg.ny;
  if (cfg.argument_check) rep.winding_number = winding_number(s, x0, x1, y0, y1);
  for (int pass = 0; pass <= cfg.max_refinements; ++pass) {
    Eigen::MatrixXd mag(ny, nx);
#pragma omp parallel for schedule(static)
    for (int iy = 0; iy < ny; ++iy)
      for (int ix = 0; ix < nx; ++ix) {
        const cplx lam(x0 + (x1 - x0) * ix / (nx - 1), y0 + (y1 - y0) * iy / (ny - 1));
        mag(iy, ix) = std::abs(integrate(s, lam).a);
      }
    std::vector<cplx> seeds;
    for (int iy = 0; iy < ny; ++iy)
      for (int ix = 0; ix < nx; ++ix) {
        bool is_min = true;
        for (int dy = -1; dy <= 1 && is_min; ++dy)
          for (int dx = -1; dx <= 1; ++dx) {
            if (!dx && !dy) continue;
            const int jx = ix + dx, jy = iy + dy;
            if (jx < 0 || jy < 0 || jx >= nx || jy >= ny) continue;
            if (mag(jy, jx) < mag(iy, ix)) {
              is_min = false;
              break;
            }
          }
        if (is_min) seeds.emplace_back(x0 + (x1 - x0) * ix / (nx - 1), y0 + (y1 - y0) * iy / (ny - 1));
      }
    std::vector<NewtonResult> results(seeds.size());
#pragma omp parallel for schedule(dynamic)
    for (std::size_t i = 0; i < seeds.size(); ++i) results[i] = newton(s, seeds[i], cfg, max_step);
    for (const auto& r : results) {
      if (!r.ok) {
        ++rep.failed_seeds;
        continue;
      }
      if (r.lambda.imag() <= cfg.min_im) continue;
      merge_root(rep, r, cfg.eps_sep);
    }
    if (!cfg.argument_check) break;
    int inside = 0;
    for (const cplx& l : rep.eigenvalues)
      if (l.real() > x0 && l.real() < x1 && l.imag() > y0 && l.imag() < y1) ++inside;
    if (inside >= rep.winding_number) break;
    nx = 2 * nx - 1;
    ny = 2 * ny - 1;
  }
  sort_report(rep);
  return rep;
}

EigenSearchReport refine_eigenvalues(const TimeSignal& s, const std::vector<cplx>& guesses,
                                     const EigenSearchConfig& cfg) {
  check_edges(s, cfg.zs);
  EigenSearchReport rep;
  double max_step = 0.1;
  for (std::size_t i = 0; i < guesses.size(); ++i)
    for (std::size_t k = 0; k < i; ++k) max_step = std::min(max_step, 0.5 * std::abs(guesses[i] - guesses[k]));
  for (const cplx& g : guesses) {
    const NewtonResult r = newton(s, g, cfg, max_step);
    if (!r.ok || r.lambda.imag() <= cfg.min_im) {
      ++rep.failed_seeds;
      continue;
    }
    merge_root(rep, r, cfg.eps_sep);
  }
  sort_report(rep);
  return rep;
}

namespace {

// value = mantissa * exp(log_scale)
struct ScaledVec {
  cplx v1, v2;
  double log_scale;
};

void apply(const ZsStep<double>& m, cplx& v1, cplx& v2, double& logs) {
  const cplx n1 = m.m11 * v1 + m.m12 * v2;
  const cplx n2 = m.m21 * v1 + m.m22 * v2;
  const double n = std::max(std::abs(n1), std::abs(n2));
  v1 = n1 / n, v2 = n2 / n;
  logs += std::log(n);
}

int centroid_index(const TimeSignal& s) {
  const int n = s.size();
  const VectorXr p = s.samples.cwiseAbs2();
  const double ptot = p.sum();
  if (ptot <= 0) return n / 2;
  const double tc = s.grid.times().dot(p) / ptot;
  return std::clamp(static_cast<int>(std::lround((tc - s.grid.t_start) / s.grid.dt)), 0, n - 1);
}

// Left Jost solution at sample k (stop = k) or right Jost solution at sample k, log-scaled.
ScaledVec left_at(const TimeSignal& s, cplx lambda, int stop) {
  const double half = 0.5 * s.grid.dt;
  const cplx e = std::exp(-J * lambda * (s.grid.t_start - half));
  cplx v1 = e / std::abs(e), v2 = 0.0;
  double logs = std::log(std::abs(e));
  for (int k = 0; k <= stop; ++k) {
    const ZsStep<double> m(lambda, s.samples(k), half);
    apply(m, v1, v2, logs);
    if (k == stop) break;
    apply(m, v1, v2, logs);
  }
  return {v1, v2, logs};
}

ScaledVec right_at(const TimeSignal& s, cplx lambda, int stop) {
  const double half = 0.5 * s.grid.dt;
  const cplx e = std::exp(J * lambda * (s.grid.t_end() + half));
  cplx v1 = 0.0, v2 = e / std::abs(e);
  double logs = std::log(std::abs(e));
  for (int k = s.size() - 1; k >= stop; --k) {
    const ZsStep<double> m(lambda, s.samples(k), -half);
    apply(m, v1, v2, logs);
    if (k == stop) break;
    apply(m, v1, v2, logs);
  }
  return {v1, v2, logs};
}

// b such that left Jost = b * right Jost, matched at sample k (least squares on the mantissas).
cplx match_b(const ScaledVec& f, const ScaledVec& g) {
  const cplx beta = (std::conj(g.v1) * f.v1 + std::conj(g.v2) * f.v2) / (std::norm(g.v1) + std::norm(g.v2));
  return beta * std::exp(f.log_scale - g.log_scale);
}

}  // namespace


DiscreteSpectrum discrete_amplitudes(const TimeSignal& s, const std::vector<cplx>& eigenvalues,
                                     const EigenSearchConfig& cfg) {
  check_edges(s, cfg.zs);
  DiscreteSpectrum ds;
  for (const cplx& lam : eigenvalues) {
    const ScatteringCoeffs c = integrate(s, lam);
    if (std::abs(c.a) > 1e3 * cfg.newton_tol)
      throw NfdmError(ErrorCode::NotAnEigenvalue, "|a| = " + std::to_string(std::abs(c.a)) + " at candidate");
    if (std::abs(c.a_prime) < 1e-10) throw NfdmError(ErrorCode::DegenerateRoot, "a' vanishes at eigenvalue");
    // forward-only b loses accuracy like e^{2 Im(lambda) T}; match the two Jost solutions instead
    const int kc = centroid_index(s);
    ds.entries.push_back({lam, match_b(left_at(s, lam, kc), right_at(s, lam, kc)) / c.a_prime});
  }
  return ds;
}

NftResult nft(const TimeSignal& s, const VectorXr& lambda_grid, const EigenSearchConfig& cfg) {
  NftResult out;
  out.report = find_eigenvalues(s, cfg);
  out.discrete = discrete_amplitudes(s, out.report.eigenvalues, cfg);
  out.continuous = continuous_spectrum(s, lambda_grid, cfg.zs).spectrum;
  return out;
}

double spectrum_energy(const DiscreteSpectrum& ds, const ContinuousSpectrum& cs) {
  double e = 0.0;
  for (const auto& en : ds.entries) e += 4.0 * en.lambda.imag();
  const Eigen::Index n = cs.lambda_grid.size();
  for (Eigen::Index i = 1; i < n; ++i) {
    const double h = cs.lambda_grid(i) - cs.lambda_grid(i - 1);
    e += h * 0.5 * (std::log1p(std::norm(cs.values(i))) + std::log1p(std::norm(cs.values(i - 1)))) / PI;
  }
  return e;
}

Eigenvector bound_state(const TimeSignal& s, cplx lambda) {
  const int n = s.size();
  const double h = s.grid.dt;
  const double half = 0.5 * h;
  std::vector<ScaledVec> fwd(n), bwd(n);

  {
    const double T1 = s.grid.t_start - half;
    const cplx e = std::exp(-J * lambda * T1);
    cplx v1 = e / std::abs(e), v2 = 0.0;
    double logs = std::log(std::abs(e));
    for (int k = 0; k < n; ++k) {
      const ZsStep<double> m(lambda, s.samples(k), half);
      apply(m, v1, v2, logs);
      fwd[k] = {v1, v2, logs};
      apply(m, v1, v2, logs);
    }
  }
  {
    const double T2 = s.grid.t_end() + half;
    const cplx e = std::exp(J * lambda * T2);
    cplx v1 = 0.0, v2 = e / std::abs(e);
    double logs = std::log(std::abs(e));
    for (int k = n - 1; k >= 0; --k) {
      const ZsStep<double> m(lambda, s.samples(k), -half);
      apply(m, v1, v2, logs);
      bwd[k] = {v1, v2, logs};
      apply(m, v1, v2, logs);
    }
  }

  // switch point at the energy centroid
  const int kc = centroid_index(s);
  // match b * right-Jost to left-Jost at kc (least squares on the mantissas)
  const ScaledVec& f = fwd[kc];
  const ScaledVec& g = bwd[kc];
  const cplx beta = (std::conj(g.v1) * f.v1 + std::conj(g.v2) * f.v2) / (std::norm(g.v1) + std::norm(g.v2));
  const double shift = f.log_scale - g.log_scale;

  std::vector<double> logs(n);
  std::vector<cplx> m1(n), m2(n);
  for (int k = 0; k < n; ++k) {
    if (k < kc) {
      m1[k] = fwd[k].v1, m2[k] = fwd[k].v2, logs[k] = fwd[k].log_scale;
    } else {
      m1[k] = beta * bwd[k].v1, m2[k] = beta * bwd[k].v2, logs[k] = bwd[k].log_scale + shift;
    }
  }
  const double lmax = *std::max_element(logs.begin(), logs.end());
  Eigenvector out;
  out.v1.resize(n);
  out.v2.resize(n);
  for (int k = 0; k < n; ++k) {
    const double sc = std::exp(logs[k] - lmax);
    out.v1(k) = m1[k] * sc;
    out.v2(k) = m2[k] * sc;
  }
  return out;
}

}  // namespace nfdm

namespace nfdm {

Eigenvector jost_left(const TimeSignal& s, cplx lambda) {
  const int n = s.size();
  const double half = 0.5 * s.grid.dt;
  Eigenvector out;
  out.v1.resize(n);
  out.v2.resize(n);
  const double T1 = s.grid.t_start - half;
  cplx v1 = std::exp(-J * lambda * T1), v2 = 0.0;
  for (int k = 0; k < n; ++k) {
    const ZsStep<double> m(lambda, s.samples(k), half);
    for (int r = 0; r < 2; ++r) {
      const cplx n1 = m.m11 * v1 + m.m12 * v2;
      const cplx n2 = m.m21 * v1 + m.m22 * v2;
      v1 = n1, v2 = n2;
      if (r == 0) out.v1(k) = v1, out.v2(k) = v2;
    }
  }
  return out;
}

}  // namespace nfdm
