#pragma once

#include "nfdm/core.hpp"

namespace nfdm {

// X_m = sum_k x_k exp(-2 pi j k m / N)
VectorXc fft(const VectorXc& x);
// inverse of fft, including the 1/N factor
VectorXc ifft(const VectorXc& X);

// Frequency (cycles per unit time) of each FFT bin in natural FFT order.
VectorXr fft_frequencies(int n, double dt);

}  // namespace nfdm
