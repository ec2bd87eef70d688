#pragma once

#include "nfdm/core.hpp"

namespace nfdm {

enum class RhMethod {
  // 2N x 2N system in the unknowns of the N-soliton formula, rows rescaled so that
  // the exponentials never appear in both numerator and denominator
  BlockScaled,
  // (I + K* K) x = F* solved directly, as printed
  Direct,
};

struct RhResult {
  TimeSignal signal;
  double max_condition = 1.0;   // reciprocal of the worst LU rcond estimate
  bool ill_conditioned = false; // max_condition > 1e12
};

RhResult rh_multisoliton(const DiscreteSpectrum& ds, const TimeGrid& grid, RhMethod method = RhMethod::BlockScaled);

struct HirotaResult {
  TimeSignal signal;
  VectorXr log_f;  // log F(t), F real and positive
};

// Exponential-sum solution q = G/F evaluated at distance z, N <= 3.
HirotaResult hirota_multisoliton(const DiscreteSpectrum& ds, const TimeGrid& grid, double z = 0.0);

TimeSignal single_soliton_closed_form(cplx lambda, cplx amp, const TimeGrid& grid);

}  // namespace nfdm
