#include "nfdm/fft.hpp"

#include <fftw3.h>

#include <map>
#include <mutex>

namespace nfdm {

namespace {

struct Plans {
  fftw_plan fwd, inv;
};

// Planning is not thread-safe in FFTW; execution with the new-array interface is.
const Plans& plans_for(int n) {
  static std::mutex mu;
  static std::map<int, Plans> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find(n);
  if (it != cache.end()) return it->second;
  VectorXc a(n), b(n);
  auto* pa = reinterpret_cast<fftw_complex*>(a.data());
  auto* pb = reinterpret_cast<fftw_complex*>(b.data());
  const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
  Plans p{fftw_plan_dft_1d(n, pa, pb, FFTW_FORWARD, flags), fftw_plan_dft_1d(n, pa, pb, FFTW_BACKWARD, flags)};
  return cache.emplace(n, p).first->second;
}

void run(fftw_plan p, const VectorXc& in, VectorXc& out) {
  VectorXc tmp = in;  // FFTW may use the input as scratch
  fftw_execute_dft(p, reinterpret_cast<fftw_complex*>(tmp.data()), reinterpret_cast<fftw_complex*>(out.data()));
}

}  // namespace

VectorXc fft(const VectorXc& x) {
  VectorXc out(x.size());
  if (x.size() == 0) return out;
  run(plans_for(static_cast<int>(x.size())).fwd, x, out);
  return out;
}

VectorXc ifft(const VectorXc& X) {
  VectorXc out(X.size());
  if (X.size() == 0) return out;
  run(plans_for(static_cast<int>(X.size())).inv, X, out);
  out /= static_cast<double>(X.size());
  return out;
}

VectorXr fft_frequencies(int n, double dt) {
  VectorXr f(n);
  const double df = 1.0 / (n * dt);
  for (int m = 0; m < n; ++m) f(m) = (m < (n + 1) / 2 ? m : m - n) * df;
  return f;
}

}  // namespace nfdm
