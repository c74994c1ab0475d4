#pragma once

/// @file
/// Matrix-valued disturbance signals (U(t), V(t)) with a pointwise norm
/// budget.

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <utility>

#include "issgf/regression_model.h"

namespace issgf {

enum class DisturbanceKind {
  kZero,
  kConstant,
  kSinusoidal,
  kSeededRandom,
  /// State feedback U, V ∝ −(P + Q): steepest descent of ‖P + Q‖². Needs n == m.
  kAdversarial,
};

enum class NormKind {
  /// ‖[U; V]‖_F.
  kFrobeniusJoint,
  /// ‖U‖₂ + ‖V‖₂, with ‖·‖₂ the entrywise Euclidean norm (Frobenius norm for
  /// matrices, the ℓ2 norm for the row vectors of the n = m = 1 case).
  kSumOfTwoNorms,
};

std::string ToString(DisturbanceKind kind);
std::string ToString(NormKind kind);
DisturbanceKind ParseDisturbanceKind(const std::string& s);
NormKind ParseNormKind(const std::string& s);

struct DisturbanceSpec {
  DisturbanceKind kind = DisturbanceKind::kZero;
  /// Upper bound on `norm` of every emitted pair.
  double budget = 0.0;
  NormKind norm = NormKind::kFrobeniusJoint;
  std::uint64_t seed = 0;
  /// Sinusoidal signal: budget · sin(2π·frequency·t + phase) along the
  /// direction pair.
  double frequency = 1.0;
  double phase = 0.0;
  /// Direction of constant/sinusoidal signals, rescaled to the budget.
  /// Defaults to all-ones matrices.
  std::optional<Matrix> U_direction;
  std::optional<Matrix> V_direction;

  /// Throws InvalidArgument for negative budgets or inconsistent fields.
  void Validate() const;
};

/// Value of `kind` for the pair (U, V).
double DisturbanceNorm(NormKind kind, const Matrix& U, const Matrix& V);

/// Samples a DisturbanceSpec in time. Deterministic signals are evaluated at
/// the exact stage time; seeded-random and adversarial signals draw their
/// random part once per integrator step (BeginStep) and hold it across the
/// stages of that step.
class DisturbanceSignal {
 public:
  DisturbanceSignal(const DisturbanceSpec& spec, const ProblemSpec& problem);

  /// Advances the per-step random draw. Call once per attempted step start.
  void BeginStep();

  /// (U, V) at time t for the state at which the field is evaluated.
  std::pair<Matrix, Matrix> Evaluate(double t, const ParamState& state) const;

  const DisturbanceSpec& spec() const { return spec_; }

 private:
  std::pair<Matrix, Matrix> ScaleToBudget(Matrix U, Matrix V) const;

  DisturbanceSpec spec_;
  int n_, m_, k_;
  std::mt19937_64 rng_;
  Matrix draw_U_, draw_V_;
  double split_ = 0.5;
};

}  // namespace issgf
