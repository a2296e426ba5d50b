#include "cubicqn/hessian_model.hpp"

#include <cmath>
#include <stdexcept>
#include <utility>

#include "cubicqn/rng.hpp"

namespace cubicqn {

namespace {

constexpr double kCurvatureTol = 1e-12;
constexpr double kSr1Tol = 1e-8;
constexpr int kMaterializeDimGuard = 1000;

// Re-expresses the term list through the spectral factorization. Raw update
// coefficients 1/(s^T B s) can dwarf the operator norm when the curvature is
// nearly degenerate, and chained updates then cancel catastrophically when
// materialized; eigen-pairs keep every stored coefficient at operator scale.
LowRankHessianModel compress_terms(LowRankHessianModel model) {
  if (model.terms().size() <= 1) return model;
  const SpectralFactor& sf = model.spectral();
  const int k = static_cast<int>(sf.eigenvalues.size());
  double scale = 0.0;
  for (double v : sf.eigenvalues) scale = std::max(scale, std::abs(v));
  std::vector<ModelTerm> terms;
  terms.reserve(k);
  for (int i = 0; i < k; ++i) {
    if (std::abs(sf.eigenvalues[i]) <= 1e-15 * scale) continue;
    linalg::Vector column(model.dim());
    for (int r = 0; r < model.dim(); ++r) column[r] = sf.basis(r, i);
    terms.push_back({sf.eigenvalues[i], std::move(column)});
  }
  return LowRankHessianModel(model.dim(), model.base_scale(), model.memory())
      .with_added_terms(std::move(terms));
}

}  // namespace

LowRankHessianModel::LowRankHessianModel(int dim, double base_scale, int memory)
    : dim_(dim),
      base_scale_(base_scale),
      memory_(memory),
      cache_(std::make_shared<SpectralCache>()) {
  if (dim <= 0) throw std::invalid_argument("LowRankHessianModel: dimension must be positive");
  if (base_scale < 0.0) throw std::invalid_argument("LowRankHessianModel: negative base scale");
  if (memory < 1) throw std::invalid_argument("LowRankHessianModel: memory must be >= 1");
}

linalg::Vector LowRankHessianModel::apply(const linalg::Vector& v) const {
  if (static_cast<int>(v.size()) != dim_) {
    throw std::invalid_argument("LowRankHessianModel::apply: dimension mismatch");
  }
  linalg::Vector out = linalg::scaled(v, base_scale_);
  for (const ModelTerm& term : terms_) {
    const double proj = term.coeff * linalg::dot(term.vec, v);
    linalg::axpy(proj, term.vec, out);
  }
  return out;
}

const SpectralFactor& LowRankHessianModel::spectral() const {
  std::call_once(cache_->once, [this] {
    const int k = static_cast<int>(terms_.size());
    if (k == 0) {
      cache_->factor.basis = linalg::Matrix(dim_, 0);
      return;
    }
    if (k > dim_) {
      // More terms than dimensions: the term sum is a small dense matrix,
      // eigendecompose it directly.
      linalg::Matrix sum(dim_, dim_);
      for (const ModelTerm& term : terms_) {
        for (int i = 0; i < dim_; ++i) {
          const double ci = term.coeff * term.vec[i];
          if (ci == 0.0) continue;
          for (int j = 0; j < dim_; ++j) sum(i, j) += ci * term.vec[j];
        }
      }
      for (int i = 0; i < dim_; ++i) {
        for (int j = i + 1; j < dim_; ++j) {
          const double v = 0.5 * (sum(i, j) + sum(j, i));
          sum(i, j) = v;
          sum(j, i) = v;
        }
      }
      const auto eig = linalg::sym_eig(sum);
      cache_->factor.basis = eig.vectors;
      cache_->factor.eigenvalues = eig.values;
      return;
    }
    linalg::Matrix w(dim_, k);
    for (int j = 0; j < k; ++j) {
      for (int i = 0; i < dim_; ++i) w(i, j) = terms_[j].vec[i];
    }
    const auto qr = linalg::thin_qr(w);
    // S = R diag(coeffs) R^T, the term subspace compressed to k x k.
    linalg::Matrix s(k, k);
    for (int i = 0; i < k; ++i) {
      for (int j = i; j < k; ++j) {
        double acc = 0.0;
        for (int l = 0; l < k; ++l) acc += qr.r(i, l) * terms_[l].coeff * qr.r(j, l);
        s(i, j) = acc;
        s(j, i) = acc;
      }
    }
    const auto eig = linalg::sym_eig(s);
    cache_->factor.basis = linalg::matmul(qr.q, eig.vectors);
    cache_->factor.eigenvalues = eig.values;
  });
  return cache_->factor;
}

LowRankHessianModel LowRankHessianModel::with_added_terms(std::vector<ModelTerm> extra) const {
  LowRankHessianModel out(dim_, base_scale_, memory_);
  out.terms_ = terms_;
  for (ModelTerm& term : extra) out.terms_.push_back(std::move(term));
  return out;
}

UpdateResult lbfgs_apply_pair(const LowRankHessianModel& model, const linalg::Vector& s,
                              const linalg::Vector& y, bool damped) {
  const double snorm = linalg::norm(s);
  if (snorm == 0.0) throw std::invalid_argument("lbfgs_apply_pair: zero step");
  const double ynorm = linalg::norm(y);
  const double ys = linalg::dot(y, s);
  if (ys <= kCurvatureTol * ynorm * snorm) return {model, false};

  double xi = 1.0 / ys;
  if (damped) xi /= model.memory();

  if (model.empty()) {
    return {model.with_added_terms({{xi, y}}), true};
  }

  const linalg::Vector bs = model.apply(s);
  const double sbs = linalg::dot(s, bs);
  if (sbs <= kCurvatureTol * snorm * snorm) return {model, false};

  return {compress_terms(model.with_added_terms({{xi, y}, {-1.0 / sbs, bs}})), true};
}

UpdateResult lsr1_apply_pair(const LowRankHessianModel& model, const linalg::Vector& s,
                             const linalg::Vector& y) {
  const double snorm = linalg::norm(s);
  if (snorm == 0.0) throw std::invalid_argument("lsr1_apply_pair: zero step");

  linalg::Vector u = model.apply(s);
  for (std::size_t i = 0; i < u.size(); ++i) u[i] = y[i] - u[i];
  const double us = linalg::dot(u, s);
  if (std::abs(us) <= kSr1Tol * linalg::norm(u) * snorm) return {model, false};

  return {compress_terms(model.with_added_terms({{1.0 / us, std::move(u)}})), true};
}

UpdateResult broyden_apply_pair(const LowRankHessianModel& model, const HvpFn& hvp,
                                const linalg::Vector& s, double upsilon) {
  if (upsilon < 0.0 || upsilon > 1.0) {
    throw std::invalid_argument("broyden_apply_pair: upsilon outside [0, 1]");
  }
  const double snorm = linalg::norm(s);
  if (snorm == 0.0) throw std::invalid_argument("broyden_apply_pair: zero direction");

  const linalg::Vector a = hvp(s);  // true Hessian action
  const double q = linalg::dot(a, s);
  if (q <= 0.0) throw std::domain_error("broyden_apply_pair: <As, s> <= 0");

  if (model.empty()) {
    // Both endpoints reduce to A s (A s)^T / <As, s> when G = 0.
    return {model.with_added_terms({{1.0 / q, a}}), true};
  }

  const linalg::Vector b = model.apply(s);
  const double c = linalg::dot(b, s);

  // Operator-norm proxy deciding whether the Gs direction is numerically
  // present at all.
  double scale = model.base_scale();
  for (const ModelTerm& term : model.terms()) {
    scale += std::abs(term.coeff) * linalg::dot(term.vec, term.vec);
  }
  if (c <= 1e-13 * snorm * snorm * scale) {
    return {model.with_added_terms({{1.0 / q, a}}), true};
  }

  // upsilon*DFP + (1-upsilon)*BFGS written as [a b] theta [a b]^T with a
  // symmetric 2x2 theta; its eigen-split yields at most two rank-1 terms.
  const double taa = 1.0 / q + upsilon * c / (q * q);
  const double tab = -upsilon / q;
  const double tbb = -(1.0 - upsilon) / c;

  const double tr = taa + tbb;
  const double det = taa * tbb - tab * tab;
  const double disc = std::sqrt(std::max(0.0, tr * tr - 4.0 * det));
  const double e1 = 0.5 * (tr - disc);
  const double e2 = 0.5 * (tr + disc);

  std::vector<ModelTerm> extra;
  for (const double e : {e1, e2}) {
    if (e == 0.0) continue;
    // Eigenvector of theta for eigenvalue e.
    double w0;
    double w1;
    if (std::abs(tab) > 1e-300) {
      w0 = e - tbb;
      w1 = tab;
    } else if (std::abs(taa - e) <= std::abs(tbb - e)) {
      w0 = 1.0;
      w1 = 0.0;
    } else {
      w0 = 0.0;
      w1 = 1.0;
    }
    const double wn = std::sqrt(w0 * w0 + w1 * w1);
    if (wn == 0.0) continue;
    w0 /= wn;
    w1 /= wn;
    linalg::Vector dir(s.size());
    for (std::size_t i = 0; i < dir.size(); ++i) dir[i] = w0 * a[i] + w1 * b[i];
    if (std::abs(e) * linalg::dot(dir, dir) <= 1e-300) continue;
    extra.push_back({e, std::move(dir)});
  }
  return {compress_terms(model.with_added_terms(std::move(extra))), true};
}

PairBuffer::PairBuffer(int capacity, Policy policy, bool curvature_filter)
    : capacity_(capacity), policy_(policy), curvature_filter_(curvature_filter) {
  if (capacity < 1) throw std::invalid_argument("PairBuffer: capacity must be >= 1");
}

bool PairBuffer::push(linalg::Vector s, linalg::Vector y) {
  if (s.size() != y.size()) throw std::invalid_argument("PairBuffer::push: length mismatch");
  if (!linalg::all_finite(s) || !linalg::all_finite(y)) return false;
  const double snorm = linalg::norm(s);
  if (snorm == 0.0) return false;
  if (curvature_filter_) {
    if (linalg::dot(y, s) <= kCurvatureTol * linalg::norm(y) * snorm) return false;
  }
  if (static_cast<int>(pairs_.size()) == capacity_) pairs_.pop_front();
  pairs_.push_back({std::move(s), std::move(y)});
  return true;
}

LowRankHessianModel build_history_model(const PairBuffer& buffer, QnUpdateKind kind,
                                        double base_scale, int dim) {
  if (buffer.policy() != PairBuffer::Policy::History) {
    throw std::invalid_argument("build_history_model: buffer policy is not history");
  }
  LowRankHessianModel model(dim, base_scale, buffer.capacity());
  for (const auto& pair : buffer.pairs()) {
    switch (kind) {
      case QnUpdateKind::Lbfgs:
        model = lbfgs_apply_pair(model, pair.s, pair.y, false).model;
        break;
      case QnUpdateKind::LbfgsDamped:
        model = lbfgs_apply_pair(model, pair.s, pair.y, true).model;
        break;
      case QnUpdateKind::Lsr1:
        model = lsr1_apply_pair(model, pair.s, pair.y).model;
        break;
    }
  }
  return model;
}

LowRankHessianModel refine_with_sampled_broyden(LowRankHessianModel model, const Oracle& oracle,
                                                const linalg::Vector& x, int count,
                                                std::uint64_t seed, double upsilon) {
  rng::Engine engine(seed);
  const HvpFn hvp = [&](const linalg::Vector& v) { return oracle.hessian_vec(x, v); };
  for (int i = 0; i < count; ++i) {
    const linalg::Vector s = rng::unit_sphere_vector(engine, oracle.dim());
    model = broyden_apply_pair(model, hvp, s, upsilon).model;
  }
  return model;
}

LowRankHessianModel build_sampling_model(const Oracle& oracle, const linalg::Vector& x,
                                         int memory, std::uint64_t seed, double upsilon) {
  if (memory < 1) throw std::invalid_argument("build_sampling_model: memory must be >= 1");
  LowRankHessianModel model(oracle.dim(), 0.0, memory);
  return refine_with_sampled_broyden(std::move(model), oracle, x, memory, seed, upsilon);
}

double directional_inexactness(const LowRankHessianModel& model, const Oracle& oracle,
                               const linalg::Vector& x, const linalg::Vector& h) {
  const double hnorm = linalg::norm(h);
  if (hnorm == 0.0) throw std::invalid_argument("directional_inexactness: zero direction");
  const linalg::Vector truth = oracle.hessian_vec(x, h);
  const linalg::Vector approx = model.apply(h);
  return linalg::norm(linalg::subtract(truth, approx)) / hnorm;
}

linalg::Matrix materialize_dense(const LowRankHessianModel& model) {
  if (model.dim() > kMaterializeDimGuard) {
    throw std::invalid_argument("materialize_dense: dimension guard exceeded");
  }
  const int d = model.dim();
  linalg::Matrix out(d, d);
  for (int i = 0; i < d; ++i) out(i, i) = model.base_scale();
  for (const ModelTerm& term : model.terms()) {
    for (int i = 0; i < d; ++i) {
      const double ci = term.coeff * term.vec[i];
      if (ci == 0.0) continue;
      for (int j = 0; j < d; ++j) out(i, j) += ci * term.vec[j];
    }
  }
  return out;
}

}  // namespace cubicqn
