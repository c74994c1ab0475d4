#include "issgf/disturbance.h"

#include <cmath>
#include <numbers>

#include "issgf/errors.h"

namespace issgf {

std::string ToString(DisturbanceKind kind) {
  switch (kind) {
    case DisturbanceKind::kZero: return "zero";
    case DisturbanceKind::kConstant: return "constant";
    case DisturbanceKind::kSinusoidal: return "sinusoidal";
    case DisturbanceKind::kSeededRandom: return "seeded-random";
    case DisturbanceKind::kAdversarial: return "adversarial";
  }
  return "zero";
}

std::string ToString(NormKind kind) {
  return kind == NormKind::kFrobeniusJoint ? "frobenius-joint"
                                           : "sum-of-two-norms";
}

DisturbanceKind ParseDisturbanceKind(const std::string& s) {
  for (auto k : {DisturbanceKind::kZero, DisturbanceKind::kConstant,
                 DisturbanceKind::kSinusoidal, DisturbanceKind::kSeededRandom,
                 DisturbanceKind::kAdversarial}) {
    if (ToString(k) == s) return k;
  }
  throw InvalidArgument("unknown disturbance kind '" + s + "'");
}

NormKind ParseNormKind(const std::string& s) {
  if (s == "frobenius-joint") return NormKind::kFrobeniusJoint;
  if (s == "sum-of-two-norms") return NormKind::kSumOfTwoNorms;
  throw InvalidArgument("unknown norm kind '" + s + "'");
}

void DisturbanceSpec::Validate() const {
  if (!(budget >= 0.0) || !std::isfinite(budget)) {
    throw InvalidArgument("disturbance budget must be finite and >= 0");
  }
  if (!std::isfinite(frequency) || !std::isfinite(phase)) {
    throw InvalidArgument("disturbance frequency/phase must be finite");
  }
  if (U_direction.has_value() != V_direction.has_value()) {
    throw InvalidArgument("disturbance direction needs both U and V");
  }
}

double DisturbanceNorm(NormKind kind, const Matrix& U, const Matrix& V) {
  if (kind == NormKind::kFrobeniusJoint) {
    return std::sqrt(U.squaredNorm() + V.squaredNorm());
  }
  return U.norm() + V.norm();
}

DisturbanceSignal::DisturbanceSignal(const DisturbanceSpec& spec,
                                     const ProblemSpec& problem)
    : spec_(spec),
      n_(problem.n()),
      m_(problem.m()),
      k_(problem.k()),
      rng_(spec.seed),
      draw_U_(Matrix::Zero(n_, k_)),
      draw_V_(Matrix::Zero(m_, k_)) {
  spec_.Validate();
  if (spec_.U_direction) {
    if (spec_.U_direction->rows() != n_ || spec_.U_direction->cols() != k_ ||
        spec_.V_direction->rows() != m_ || spec_.V_direction->cols() != k_) {
      throw InvalidArgument("disturbance direction must be n x k and m x k");
    }
    RequireFinite(*spec_.U_direction, "U direction");
    RequireFinite(*spec_.V_direction, "V direction");
  }
  if (spec_.kind == DisturbanceKind::kAdversarial && n_ != m_) {
    throw InvalidArgument("adversarial disturbance requires n == m");
  }
}

void DisturbanceSignal::BeginStep() {
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  if (spec_.kind == DisturbanceKind::kSeededRandom) {
    for (Eigen::Index i = 0; i < draw_U_.size(); ++i) draw_U_(i) = unit(rng_);
    for (Eigen::Index i = 0; i < draw_V_.size(); ++i) draw_V_(i) = unit(rng_);
  } else if (spec_.kind == DisturbanceKind::kAdversarial) {
    split_ = 0.5 * (unit(rng_) + 1.0);
  }
}

std::pair<Matrix, Matrix> DisturbanceSignal::ScaleToBudget(Matrix U,
                                                           Matrix V) const {
  const double norm = DisturbanceNorm(spec_.norm, U, V);
  if (norm == 0.0 || spec_.budget == 0.0) {
    return {Matrix::Zero(n_, k_), Matrix::Zero(m_, k_)};
  }
  const double s = spec_.budget / norm;
  U *= s;
  V *= s;
  // Rounding can overshoot the budget by an ulp; pull back below it.
  if (DisturbanceNorm(spec_.norm, U, V) > spec_.budget) {
    const double shrink = 1.0 - 4.0 * std::numeric_limits<double>::epsilon();
    U *= shrink;
    V *= shrink;
  }
  return {std::move(U), std::move(V)};
}

std::pair<Matrix, Matrix> DisturbanceSignal::Evaluate(
    double t, const ParamState& state) const {
  switch (spec_.kind) {
    case DisturbanceKind::kZero:
      return {Matrix::Zero(n_, k_), Matrix::Zero(m_, k_)};
    case DisturbanceKind::kConstant:
    case DisturbanceKind::kSinusoidal: {
      Matrix U = spec_.U_direction.value_or(Matrix::Ones(n_, k_));
      Matrix V = spec_.V_direction.value_or(Matrix::Ones(m_, k_));
      auto [u, v] = ScaleToBudget(std::move(U), std::move(V));
      if (spec_.kind == DisturbanceKind::kSinusoidal) {
        const double a = std::sin(2.0 * std::numbers::pi * spec_.frequency * t +
                                  spec_.phase);
        u *= a;
        v *= a;
      }
      return {u, v};
    }
    case DisturbanceKind::kSeededRandom:
      return ScaleToBudget(draw_U_, draw_V_);
    case DisturbanceKind::kAdversarial: {
      const Matrix s = state.P + state.Q;
      const double sn = s.norm();
      if (sn == 0.0) return {Matrix::Zero(n_, k_), Matrix::Zero(m_, k_)};
      const Matrix dir = -s / sn;
      return ScaleToBudget(split_ * dir, (1.0 - split_) * dir);
    }
  }
  return {Matrix::Zero(n_, k_), Matrix::Zero(m_, k_)};
}

}  // namespace issgf
