#pragma once

/// @file
/// Vectorized dynamics z = [vec(P); vec(Q)], the Jacobian of the field (the
/// negated loss Hessian) and its closed-form eigenstructure at the origin and
/// on the target set.

#include <optional>
#include <string>
#include <vector>

#include "issgf/json_util.h"
#include "issgf/regression_model.h"

namespace issgf {

/// [vec(Ṗ); vec(Q̇)] of GradientField.
Vector VectorizedField(const ProblemSpec& spec, const ParamState& state);

/// The same field through the Kronecker forms
///   vec(Ṗ) = (Qᵀ ⊗ I_n) vec(R),  vec(Q̇) = (Pᵀ ⊗ I_m) K vec(R),
/// with R = Ȳ − PQᵀ and K mapping vec(R) to vec(Rᵀ).
Vector VectorizedFieldKronecker(const ProblemSpec& spec,
                                const ParamState& state);

/// Jacobian blocks of the vectorized field at any state.
///   pp = −QᵀQ ⊗ I_n
///   pq = I_k ⊗ R − (Qᵀ ⊗ P)·CommutationMatrix(k, m)
///   qp = I_k ⊗ Rᵀ − (Pᵀ ⊗ Q)·CommutationMatrix(k, n)
///   qq = −PᵀP ⊗ I_m
struct HessianBlocks {
  Matrix pp;
  Matrix pq;
  Matrix qp;
  Matrix qq;

  /// [[pp, pq], [qp, qq]].
  Matrix Full() const;
};

HessianBlocks Hessian(const ProblemSpec& spec, const ParamState& state);

/// Permutation Π with Π·z = vec([P; Q]) for z = [vec(P); vec(Q)].
Matrix StackedOrderPermutation(int n, int m, int k);

/// One named family of eigenvectors with their analytic eigenvalues.
struct EigenBlock {
  std::string name;
  /// Columns normalized to unit length.
  Matrix vectors;
  /// Analytic eigenvalue of each column.
  Vector eigenvalues;
  /// Column norms before normalization.
  Vector scaling;
  /// ‖H·V − V·Λ‖_F.
  double residual = 0.0;
  /// Largest deviation of VᵀV from the identity.
  double orthonormality_error = 0.0;
};

struct SpectralCounts {
  int negative = 0;
  int zero = 0;
  int positive = 0;
};

/// Analytic and numeric spectrum of the Jacobian at one state.
struct SpectralReport {
  std::string kind;
  int n = 0;
  int m = 0;
  int k = 0;
  /// Frobenius and spectral norms of the full Jacobian.
  double hessian_norm = 0.0;
  double hessian_spectral_norm = 0.0;
  /// Eigenvalues of all blocks, sorted ascending.
  std::vector<double> analytic_eigenvalues;
  std::vector<double> numeric_eigenvalues;
  std::vector<EigenBlock> blocks;
  /// Zero/sign tolerance for `counts`.
  double tolerance = 0.0;
  SpectralCounts counts;
  /// Counts implied by the analytic eigenvalues under the same tolerance.
  SpectralCounts analytic_counts;
  /// Largest pairwise gap of the sorted multisets.
  double multiset_error = 0.0;
  /// Whether the closed-form sign counts apply (at the target set they need
  /// rank Ȳ = min(n, m)).
  bool analytic_prediction = true;
  /// The instance was transposed (roles of P and Q swapped) and mapped back.
  bool transposed = false;

  /// Worst block residual divided by hessian_norm.
  double WorstRelativeResidual() const;
  double WorstOrthonormalityError() const;
  int TotalBlockColumns() const;
};

/// Zero/sign classification tolerance 1e-9·(1 + ‖H‖₂).
double SpectralTolerance(double spectral_norm);

/// Eigenvalues of a symmetric matrix sorted ascending. Throws NumericFailure
/// if the solver does not converge.
std::vector<double> SymmetricEigenvalues(const Matrix& h);

/// Numeric spectrum only, for states without a closed form.
SpectralReport NumericSpectrum(const ProblemSpec& spec, const ParamState& state);

/// Spectrum at the origin with eigenvector blocks [Ω⊗Ψ₁; Ω⊗Φ₁],
/// [−Ω⊗Ψ₁; Ω⊗Φ₁] and [Ω⊗Ψ₃; 0] from an SVD Ψ Σ Φᵀ of Ȳ.
///
/// Requires n > m and throws UnsupportedConfiguration otherwise, unless
/// `allow_transpose` is set: then n == m uses the same blocks (Ψ₃ empty) and
/// n < m solves the transposed instance (Ȳᵀ, roles of P and Q swapped) and
/// swaps the block rows back. `omega` defaults to I_k.
SpectralReport OriginSpectrum(const ProblemSpec& spec,
                              const std::optional<Matrix>& omega = {},
                              bool allow_transpose = false);

/// Spectrum at a target-set point with blocks V1..V5 built from the state's
/// equilibrium certificate. Throws PreconditionViolated carrying the loss
/// when loss > 1e-12. When rank Ȳ < min(n, m) the blocks are still checked
/// but `analytic_prediction` is false: the m·n negative count is not claimed.
SpectralReport TargetSetSpectrum(const ProblemSpec& spec,
                                 const ParamState& state);

struct ImbalanceRow {
  double xi = 0.0;
  double min_abs_nonzero = 0.0;
  double max_abs = 0.0;
  double loss = 0.0;
};

/// Spectrum extremes along (P·ξ, Q/ξ). Throws InvalidArgument for ξ <= 0 and
/// PreconditionViolated if the state is not on the target set.
std::vector<ImbalanceRow> ImbalanceStudy(const ProblemSpec& spec,
                                         const ParamState& state,
                                         const std::vector<double>& xis);

Json SpectralReportToJson(const SpectralReport& report);
Json ImbalanceTableToJson(const std::vector<ImbalanceRow>& rows);

}  // namespace issgf
