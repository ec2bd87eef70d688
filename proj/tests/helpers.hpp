#pragma once

#include "nfdm/core.hpp"

#include <cmath>
#include <random>

namespace nfdm::test {

inline TimeSignal sech_signal(const TimeGrid& g, double amp = 1.0) {
  TimeSignal s = TimeSignal::zeros(g);
  for (int k = 0; k < g.n_samples; ++k) s.samples(k) = amp / std::cosh(g.t(k));
  return s;
}

inline double max_abs_diff(const TimeSignal& a, const TimeSignal& b) {
  return (a.samples - b.samples).cwiseAbs().maxCoeff();
}

// Random spectrum with eigenvalues in [re_lo,re_hi] x [im_lo,im_hi] j, pairwise separation >= sep.
inline DiscreteSpectrum random_spectrum(std::mt19937_64& rng, int n, double re_lo, double re_hi, double im_lo,
                                        double im_hi, double sep, double amp_lo, double amp_hi) {
  std::uniform_real_distribution<double> ur(re_lo, re_hi), ui(im_lo, im_hi), ua(amp_lo, amp_hi), up(0, 2 * PI);
  for (;;) {
    DiscreteSpectrum ds;
    for (int i = 0; i < n; ++i) ds.entries.push_back({cplx(ur(rng), ui(rng)), ua(rng) * std::exp(J * up(rng))});
    bool ok = true;
    for (int i = 0; i < n && ok; ++i)
      for (int k = 0; k < i; ++k)
        if (std::abs(ds.entries[i].lambda - ds.entries[k].lambda) < sep) ok = false;
    if (ok) return ds;
  }
}

}  // namespace nfdm::test
