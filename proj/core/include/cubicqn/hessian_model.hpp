#pragma once

#include <cstdint>
#include <deque>
#include <functional>
#include <memory>
#include <mutex>
#include <vector>

#include "cubicqn/linalg.hpp"
#include "cubicqn/oracle.hpp"

namespace cubicqn {

/// B = basis diag(eigenvalues) basis^T restricted to the term subspace; the
/// orthogonal complement carries the base scale alone. Cached so repeated
/// shifted inversions inside the cubic subproblem cost O(k) each.
struct SpectralFactor {
  linalg::Matrix basis;        // d x k, orthonormal columns
  linalg::Vector eigenvalues;  // length k, ascending
};

struct ModelTerm {
  double coeff;
  linalg::Vector vec;
};

/// Low-rank Hessian surrogate B = c*I + sum_i coeff_i * vec_i vec_i^T.
/// Immutable after construction; updates return new models.
class LowRankHessianModel {
 public:
  LowRankHessianModel(int dim, double base_scale, int memory);

  int dim() const { return dim_; }
  double base_scale() const { return base_scale_; }
  int memory() const { return memory_; }
  const std::vector<ModelTerm>& terms() const { return terms_; }
  bool empty() const { return terms_.empty() && base_scale_ == 0.0; }

  linalg::Vector apply(const linalg::Vector& v) const;  // B v

  // Lazily built, safe for concurrent readers of the same model value.
  const SpectralFactor& spectral() const;

  LowRankHessianModel with_added_terms(std::vector<ModelTerm> extra) const;

 private:
  int dim_;
  double base_scale_;
  int memory_;
  std::vector<ModelTerm> terms_;

  struct SpectralCache {
    std::once_flag once;
    SpectralFactor factor;
  };
  mutable std::shared_ptr<SpectralCache> cache_;
};

enum class QnUpdateKind { Lbfgs, LbfgsDamped, Lsr1 };

struct UpdateResult {
  LowRankHessianModel model;
  bool accepted;
};

/// BFGS update in direct (Hessian) form, split into the y-term and the Bs
/// term. Damped divides the y-term coefficient by the memory size. Degenerate
/// pairs (tiny y^T s or s^T B s) are skipped with accepted=false; the one
/// exception is an exactly-zero model, where the Bs term vanishes identically
/// and only the y-term is added.
UpdateResult lbfgs_apply_pair(const LowRankHessianModel& model, const linalg::Vector& s,
                              const linalg::Vector& y, bool damped);

/// SR1 update; skipped when |u^T s| <= 1e-8 ||u|| ||s|| with u = y - Bs.
UpdateResult lsr1_apply_pair(const LowRankHessianModel& model, const linalg::Vector& s,
                             const linalg::Vector& y);

using HvpFn = std::function<linalg::Vector(const linalg::Vector&)>;

/// Convex Broyden class update upsilon*DFP + (1-upsilon)*BFGS against the
/// true Hessian action supplied by `hvp`. The rank-2 correction in
/// span{As, Bs} is stored as at most two rank-1 terms. Throws when
/// <As, s> <= 0.
UpdateResult broyden_apply_pair(const LowRankHessianModel& model, const HvpFn& hvp,
                                const linalg::Vector& s, double upsilon);

/// FIFO buffer of (s, y) pairs. With the curvature filter on, pairs failing
/// y^T s > 1e-12 ||y|| ||s|| are rejected at push time.
class PairBuffer {
 public:
  enum class Policy { History, Sampling };
  struct Pair {
    linalg::Vector s;
    linalg::Vector y;
  };

  PairBuffer(int capacity, Policy policy, bool curvature_filter);

  bool push(linalg::Vector s, linalg::Vector y);
  void clear() { pairs_.clear(); }

  int capacity() const { return capacity_; }
  Policy policy() const { return policy_; }
  const std::deque<Pair>& pairs() const { return pairs_; }
  int size() const { return static_cast<int>(pairs_.size()); }

 private:
  int capacity_;
  Policy policy_;
  bool curvature_filter_;
  std::deque<Pair> pairs_;
};

/// Folds the buffered pairs chronologically through the chosen update,
/// starting from B0 = base_scale * I. Costs no oracle calls. An empty buffer
/// yields base_scale * I at the given dimension.
LowRankHessianModel build_history_model(const PairBuffer& buffer, QnUpdateKind kind,
                                        double base_scale, int dim);

/// Applies `count` sampled Broyden corrections to an existing model: unit
/// directions drawn from the sphere (deterministic per seed), Hessian action
/// by HVP. Charges `count` HVPs.
LowRankHessianModel refine_with_sampled_broyden(LowRankHessianModel model, const Oracle& oracle,
                                                const linalg::Vector& x, int count,
                                                std::uint64_t seed, double upsilon);

/// Draws `memory` unit directions from the sphere (deterministic per seed),
/// computes y_i by HVP, and folds through the convex Broyden update with
/// B0 = 0. Charges `memory` HVPs.
LowRankHessianModel build_sampling_model(const Oracle& oracle, const linalg::Vector& x,
                                         int memory, std::uint64_t seed, double upsilon);

/// ||(Hess f(x) - B) h|| / ||h||, one HVP. Diagnostic only; never drives
/// solver control flow.
double directional_inexactness(const LowRankHessianModel& model, const Oracle& oracle,
                               const linalg::Vector& x, const linalg::Vector& h);

/// Explicit c*I + sum of terms; guarded at dim <= 1000.
linalg::Matrix materialize_dense(const LowRankHessianModel& model);

}  // namespace cubicqn
