#pragma once

/// @file
/// Equilibria of the general-case flow: residuals, constructive spurious
/// saddles, aligned-SVD alignment of matrices with orthogonal row spaces, and
/// certificates witnessing stationarity.

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "issgf/json_util.h"
#include "issgf/regression_model.h"

namespace issgf {

/// The state's field norm exceeds the equilibrium threshold.
class NotAnEquilibrium : public std::runtime_error {
 public:
  NotAnEquilibrium(const std::string& what, double residual)
      : std::runtime_error(what), residual_(residual) {}
  double residual() const { return residual_; }

 private:
  double residual_;
};

/// Aligned factors were built but an invariant failed beyond 1e-8.
class CertificationFailure : public std::runtime_error {
 public:
  CertificationFailure(const std::string& what, double worst)
      : std::runtime_error(what), worst_(worst) {}
  double worst_residual() const { return worst_; }

 private:
  double worst_;
};

/// ‖f_Z(state)‖_F; zero exactly at equilibria.
double EquilibriumResidual(const ProblemSpec& spec, const ParamState& state);

/// Builds P = Ψ_Y Σ_P Γᵀ, Q = Φ_Y Σ_Q Γᵀ from an SVD Ψ_Y Σ_Y Φ_Yᵀ of the
/// target. Index i in `keep` (0-based, i < rank Ȳ) gets σ_P = balance_i·√σ_i
/// and σ_Q = √σ_i / balance_i; all other indices are zero. `balance` is
/// either empty (all 1) or the same length as `keep`. `gamma` defaults to
/// I_k and must be k x k orthogonal otherwise.
ParamState MakeSpuriousEquilibrium(const ProblemSpec& spec,
                                   const std::vector<int>& keep,
                                   const std::vector<double>& balance = {},
                                   const std::optional<Matrix>& gamma = {});

/// Factors Ψ_A Σ_A Φᵀ = A and Ψ_B Σ_B Φᵀ = B sharing Φ.
///
/// Σ_A carries A's a nonzero singular values at diagonal 0..a-1 and Σ_B
/// carries B's b values at a..a+b-1, so Σ_A Σ_Bᵀ = 0. Φ = [Φ_A Φ_B Φ_0].
struct AlignedFactors {
  Matrix psi_a;
  Matrix sigma_a;
  Matrix psi_b;
  Matrix sigma_b;
  Matrix phi;
  int rank_a = 0;
  int rank_b = 0;
};

/// Aligns A (p x o) and B (q x o) with A Bᵀ = 0. Throws InvalidArgument if
/// q < o or the column counts differ, and PreconditionViolated carrying
/// ‖A Bᵀ‖_F if it exceeds 1e-10·‖A‖_F·‖B‖_F.
AlignedFactors SvdAlignment(const Matrix& A, const Matrix& B);

/// Aligned SVDs Ȳ − PQᵀ = Ψ Σ Φᵀ, P = Ψ Σ_P Γ_Pᵀ, Q = Φ Σ_Q Γ_Qᵀ with
/// Σ Σ_Q = 0 and Σᵀ Σ_P = 0.
///
/// Block layout: the residual's ℓ singular values sit at diagonal 0..ℓ-1 of
/// Σ, P's p̄ values at ℓ..ℓ+p̄-1 of Σ_P and Q's q̄ values at ℓ..ℓ+q̄-1 of Σ_Q.
struct EquilibriumCertificate {
  Matrix psi;
  Matrix phi;
  Matrix sigma;
  Matrix sigma_p;
  Matrix gamma_p;
  Matrix sigma_q;
  Matrix gamma_q;
  int rank_residual = 0;
  int rank_p = 0;
  int rank_q = 0;
};

/// Worst residual of each certificate invariant against (spec, state).
struct CertificateCheck {
  double residual_svd = 0.0;
  double p_svd = 0.0;
  double q_svd = 0.0;
  double orthogonality = 0.0;
  double sigma_sigma_q = 0.0;
  double sigmat_sigma_p = 0.0;
  double diagonal = 0.0;

  double Worst() const;
};

CertificateCheck CheckCertificate(const ProblemSpec& spec,
                                  const ParamState& state,
                                  const EquilibriumCertificate& cert);

/// Threshold 1e-8·(1 + ‖Ȳ‖_F) on EquilibriumResidual for certification.
double EquilibriumTolerance(const ProblemSpec& spec);

/// Certifies an equilibrium. Throws NotAnEquilibrium when the residual
/// exceeds EquilibriumTolerance, CertificationFailure when an invariant of
/// the assembled factors exceeds 1e-8.
EquilibriumCertificate CertifyEquilibrium(const ProblemSpec& spec,
                                          const ParamState& state);

/// Reassembles (P, Q) from a certificate.
ParamState StateFromCertificate(const EquilibriumCertificate& cert);

Json CertificateToJson(const EquilibriumCertificate& cert);
EquilibriumCertificate CertificateFromJson(const Json& j);

}  // namespace issgf
