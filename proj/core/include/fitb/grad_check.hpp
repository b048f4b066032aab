#pragma once

#include <cstdint>
#include <functional>
#include <string>

#include "fitb/param_store.hpp"

namespace fitb {

struct GradCheckOptions {
  double h = 1e-4;
  // When the store has more coordinates than this, a seeded random subset
  // of this size is probed instead of every coordinate.
  std::size_t max_coords = 200;
  std::uint64_t seed = 0x5eedc0de;
};

struct GradCheckReport {
  double max_rel_error = 0.0;
  std::string worst_param;
  std::size_t worst_coord = 0;
  std::size_t coords_checked = 0;
};

// Loss callback: returns f(store). When want_grad is true it must also run
// a backward pass so that store gradients hold df/dtheta. The callback must
// be deterministic in the store values.
using LossFn = std::function<double(ParameterStore<double>&, bool want_grad)>;

// Central-difference gradient verification in 64-bit arithmetic. Compares
// the analytic gradient of every probed coordinate against
// (f(x+h) - f(x-h)) / 2h with |a-n| / (|a|+|n|+1e-8) normalization and
// returns the maximum relative error observed.
GradCheckReport grad_check(const LossFn& f, ParameterStore<double>& store,
                           const GradCheckOptions& opts = {});

}  // namespace fitb
