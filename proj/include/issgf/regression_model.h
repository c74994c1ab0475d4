#pragma once

/// @file
/// The factorization instance min ½‖Ȳ − P Qᵀ‖²_F, its gradient flow and the
/// disturbed flow with additive (U, V) terms.

#include <iosfwd>
#include <string>

#include "issgf/tensor_core.h"

namespace issgf {

/// Dimensions (n, m, k) and the n x m target Ȳ of a factorization problem.
///
/// The default constructor path enforces the overparameterized regime
/// k >= max(n, m); pass `allow_underparameterized = true` for comparison
/// studies with smaller k.
class ProblemSpec {
 public:
  ProblemSpec(Matrix target, int k, bool allow_underparameterized = false);

  int n() const { return static_cast<int>(target_.rows()); }
  int m() const { return static_cast<int>(target_.cols()); }
  int k() const { return k_; }
  const Matrix& target() const { return target_; }
  bool overparameterized() const { return k_ >= std::max(n(), m()); }
  bool allow_underparameterized() const { return allow_under_; }

 private:
  Matrix target_;
  int k_;
  bool allow_under_;
};

/// The flow state Z = [P; Q] with P: n x k and Q: m x k. Also used for
/// field values (Ṗ, Q̇) and disturbance pairs (U, V).
struct ParamState {
  Matrix P;
  Matrix Q;

  /// ‖[P; Q]‖_F.
  double Norm() const;
  /// [vec(P); vec(Q)].
  Vector Stacked() const;
  static ParamState FromStacked(const Vector& z, int n, int m, int k);
  static ParamState Zero(const ProblemSpec& spec);
};

/// Throws InvalidArgument unless state.P is n x k and state.Q is m x k.
void RequireConformant(const ProblemSpec& spec, const ParamState& state,
                       const char* what = "state");

/// Paired regression samples: column i of X (n x ℓ) maps to column i of
/// Y (m x ℓ).
struct Dataset {
  Matrix X;
  Matrix Y;
};

/// Least-squares coefficients (Y X†)ᵀ (n x m), the target of the equivalent
/// factorization problem. Requires X of full row rank (so ℓ >= n); throws
/// DegenerateData otherwise, carrying the observed rank.
Matrix ThetaStar(const Dataset& data);

/// Reads one sample per row: first n columns are x_i, next m are y_i. A
/// non-numeric first line is treated as a header. Throws InvalidArgument on
/// ragged or malformed rows.
Dataset ReadDatasetCsv(std::istream& in, int n, int m);
Dataset ReadDatasetCsvFile(const std::string& path, int n, int m);

/// ½‖Ȳ − PQᵀ‖²_F.
double Loss(const ProblemSpec& spec, const ParamState& state);

/// Ȳ − PQᵀ.
Matrix Residual(const ProblemSpec& spec, const ParamState& state);

/// (Ṗ, Q̇) = ((Ȳ − PQᵀ)Q, (Ȳ − PQᵀ)ᵀP), the negative loss gradient.
ParamState GradientField(const ProblemSpec& spec, const ParamState& state);

/// GradientField plus the disturbance pair (U, V).
ParamState DisturbedField(const ProblemSpec& spec, const ParamState& state,
                          const Matrix& U, const Matrix& V);

/// Both sides of the dissipation inequality
///   L̇ ≤ −L·(σ²_min(Q) + σ²_min(P)) + ½‖[U; V]‖²_F
/// at one state. `lhs` is the exact derivative ⟨∇L, −∇L + [U; V]⟩.
struct DissipationBound {
  double lhs = 0.0;
  double rhs = 0.0;
  double sigma_min_P = 0.0;
  double sigma_min_Q = 0.0;
};

DissipationBound EvaluateDissipationBound(const ProblemSpec& spec,
                                          const ParamState& state,
                                          const Matrix& U, const Matrix& V);

}  // namespace issgf
