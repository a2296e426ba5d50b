#pragma once

#include <memory>

#include "cubicqn/dataio.hpp"
#include "cubicqn/oracle.hpp"
#include "cubicqn/rng.hpp"

namespace benchsupport {

inline std::shared_ptr<const cubicqn::Dataset> dataset(int n, int d) {
  return std::make_shared<const cubicqn::Dataset>(
      cubicqn::normalize_rows(cubicqn::synth_logistic(n, d, 7, 2.0)).dataset);
}

}  // namespace benchsupport
