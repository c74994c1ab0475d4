#include "issgf/equilibria.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

#include "issgf/errors.h"

namespace issgf {

double EquilibriumResidual(const ProblemSpec& spec, const ParamState& state) {
  return GradientField(spec, state).Norm();
}

ParamState MakeSpuriousEquilibrium(const ProblemSpec& spec,
                                   const std::vector<int>& keep,
                                   const std::vector<double>& balance,
                                   const std::optional<Matrix>& gamma) {
  const int n = spec.n(), m = spec.m(), k = spec.k();
  if (!balance.empty() && balance.size() != keep.size()) {
    throw InvalidArgument("MakeSpuriousEquilibrium: balance must be empty or "
                          "match keep in length");
  }
  Matrix g = Matrix::Identity(k, k);
  if (gamma) {
    if (gamma->rows() != k || gamma->cols() != k ||
        OrthonormalityError(*gamma) > 1e-10) {
      throw InvalidArgument("MakeSpuriousEquilibrium: gamma must be k x k "
                            "orthogonal");
    }
    g = *gamma;
  }
  const SvdFactors svd = SvdWithThreshold(spec.target());
  Matrix sigma_p = Matrix::Zero(n, k);
  Matrix sigma_q = Matrix::Zero(m, k);
  std::set<int> seen;
  for (std::size_t t = 0; t < keep.size(); ++t) {
    const int i = keep[t];
    if (i < 0 || i >= svd.rank || i >= k) {
      throw InvalidArgument("MakeSpuriousEquilibrium: keep index " +
                            std::to_string(i) + " outside [0, " +
                            std::to_string(std::min(svd.rank, k)) + ")");
    }
    if (!seen.insert(i).second) {
      throw InvalidArgument("MakeSpuriousEquilibrium: duplicate keep index " +
                            std::to_string(i));
    }
    const double beta = balance.empty() ? 1.0 : balance[t];
    if (!(beta > 0.0) || !std::isfinite(beta)) {
      throw InvalidArgument("MakeSpuriousEquilibrium: balance must be positive");
    }
    const double root = std::sqrt(svd.singular(i, i));
    sigma_p(i, i) = beta * root;
    sigma_q(i, i) = root / beta;
  }
  return {svd.left * sigma_p * g.transpose(),
          svd.right * sigma_q * g.transpose()};
}

namespace {

// Modified Gram-Schmidt of `cols` against `basis` and each other. Columns
// that are already orthonormal move only by rounding.
Matrix OrthonormalizeAgainst(const Matrix& basis, const Matrix& cols) {
  Matrix out = cols;
  for (Eigen::Index c = 0; c < out.cols(); ++c) {
    for (int pass = 0; pass < 2; ++pass) {
      for (Eigen::Index j = 0; j < basis.cols(); ++j) {
        out.col(c) -= basis.col(j).dot(out.col(c)) * basis.col(j);
      }
      for (Eigen::Index j = 0; j < c; ++j) {
        out.col(c) -= out.col(j).dot(out.col(c)) * out.col(j);
      }
    }
    const double norm = out.col(c).norm();
    if (norm < 0.5) {
      throw NumericFailure("SvdAlignment: right singular subspaces overlap");
    }
    out.col(c) /= norm;
  }
  return out;
}

// Drops singular values at or below an absolute floor on top of the
// relative rank rule.
SvdFactors FlooredSvd(const Matrix& m, double floor) {
  SvdFactors f = SvdWithThreshold(m);
  while (f.rank > 0 && f.singular(f.rank - 1, f.rank - 1) <= floor) {
    --f.rank;
    f.singular(f.rank, f.rank) = 0.0;
  }
  f.threshold = std::max(f.threshold, floor);
  return f;
}

AlignedFactors Align(const Matrix& A, const Matrix& B, double rel_tol,
                     double floor) {
  if (A.cols() != B.cols()) {
    throw InvalidArgument("SvdAlignment: A and B must have the same columns");
  }
  const Eigen::Index p = A.rows(), q = B.rows(), o = A.cols();
  if (q < o) {
    throw InvalidArgument("SvdAlignment: requires q >= o, got q=" +
                          std::to_string(q) + ", o=" + std::to_string(o));
  }
  RequireFinite(A, "A");
  RequireFinite(B, "B");
  const double cross = (A * B.transpose()).norm();
  if (cross > rel_tol * A.norm() * B.norm()) {
    throw PreconditionViolated(
        "SvdAlignment: A*B^T is not zero (Frobenius norm " +
            std::to_string(cross) + ")",
        cross);
  }
  const SvdFactors sa = FlooredSvd(A, floor);
  const SvdFactors sb = FlooredSvd(B, floor);
  const int a = sa.rank, b = sb.rank;
  if (a + b > o) {
    throw PreconditionViolated(
        "SvdAlignment: rank(A) + rank(B) exceeds the column count", a + b);
  }

  AlignedFactors out;
  out.rank_a = a;
  out.rank_b = b;
  const Matrix phi_a = sa.right.leftCols(a);
  const Matrix phi_b = OrthonormalizeAgainst(phi_a, sb.right.leftCols(b));
  out.phi.resize(o, o);
  out.phi << phi_a, phi_b,
      CompleteOrthonormalBasis((Matrix(o, a + b) << phi_a, phi_b).finished());

  out.psi_a = sa.left;
  out.sigma_a = Matrix::Zero(p, o);
  for (int i = 0; i < a; ++i) out.sigma_a(i, i) = sa.singular(i, i);

  // B's leading left vectors go to columns a..a+b-1; the rest fill the
  // remaining slots in order.
  out.psi_b.resize(q, q);
  out.psi_b.middleCols(a, b) = sb.left.leftCols(b);
  Eigen::Index next = b;
  for (Eigen::Index c = 0; c < q; ++c) {
    if (c >= a && c < a + b) continue;
    out.psi_b.col(c) = sb.left.col(next++);
  }
  out.sigma_b = Matrix::Zero(q, o);
  for (int i = 0; i < b; ++i) out.sigma_b(a + i, a + i) = sb.singular(i, i);
  return out;
}

double RelativeError(const Matrix& approx, const Matrix& exact) {
  return (approx - exact).norm() / (1.0 + exact.norm());
}

// Largest off-diagonal magnitude, or a negative diagonal entry.
double DiagonalDefect(const Matrix& s) {
  double worst = 0.0;
  for (Eigen::Index i = 0; i < s.rows(); ++i) {
    for (Eigen::Index j = 0; j < s.cols(); ++j) {
      const double v = s(i, j);
      if (i != j) {
        worst = std::max(worst, std::abs(v));
      } else if (v < 0.0) {
        worst = std::max(worst, -v);
      }
    }
  }
  return worst;
}

}  // namespace

AlignedFactors SvdAlignment(const Matrix& A, const Matrix& B) {
  return Align(A, B, 1e-10, 0.0);
}

double CertificateCheck::Worst() const {
  return std::max({residual_svd, p_svd, q_svd, orthogonality, sigma_sigma_q,
                   sigmat_sigma_p, diagonal});
}

CertificateCheck CheckCertificate(const ProblemSpec& spec,
                                  const ParamState& state,
                                  const EquilibriumCertificate& c) {
  RequireConformant(spec, state);
  const int n = spec.n(), m = spec.m(), k = spec.k();
  if (c.psi.rows() != n || c.psi.cols() != n || c.phi.rows() != m ||
      c.phi.cols() != m || c.sigma.rows() != n || c.sigma.cols() != m ||
      c.sigma_p.rows() != n || c.sigma_p.cols() != k ||
      c.sigma_q.rows() != m || c.sigma_q.cols() != k ||
      c.gamma_p.rows() != k || c.gamma_p.cols() != k ||
      c.gamma_q.rows() != k || c.gamma_q.cols() != k) {
    throw InvalidArgument("CheckCertificate: factor shapes do not match spec");
  }
  CertificateCheck r;
  r.residual_svd = RelativeError(c.psi * c.sigma * c.phi.transpose(),
                                 Residual(spec, state));
  r.p_svd = RelativeError(c.psi * c.sigma_p * c.gamma_p.transpose(), state.P);
  r.q_svd = RelativeError(c.phi * c.sigma_q * c.gamma_q.transpose(), state.Q);
  r.orthogonality =
      std::max({OrthonormalityError(c.psi), OrthonormalityError(c.phi),
                OrthonormalityError(c.gamma_p), OrthonormalityError(c.gamma_q)});
  r.sigma_sigma_q = (c.sigma * c.sigma_q).norm();
  r.sigmat_sigma_p = (c.sigma.transpose() * c.sigma_p).norm();
  r.diagonal = std::max({DiagonalDefect(c.sigma), DiagonalDefect(c.sigma_p),
                         DiagonalDefect(c.sigma_q)});
  return r;
}

double EquilibriumTolerance(const ProblemSpec& spec) {
  return 1e-8 * (1.0 + spec.target().norm());
}

EquilibriumCertificate CertifyEquilibrium(const ProblemSpec& spec,
                                          const ParamState& state) {
  RequireConformant(spec, state);
  const double residual = EquilibriumResidual(spec, state);
  if (residual > EquilibriumTolerance(spec)) {
    throw NotAnEquilibrium(
        "CertifyEquilibrium: field norm " + std::to_string(residual) +
            " exceeds the equilibrium tolerance",
        residual);
  }
  const int n = spec.n(), m = spec.m(), k = spec.k();
  if (k < std::max(n, m)) {
    throw UnsupportedConfiguration(
        "CertifyEquilibrium: requires k >= max(n, m)");
  }
  const Matrix R = Residual(spec, state);
  constexpr double kUnchecked = std::numeric_limits<double>::infinity();
  // At the target set R is rounding noise, which a purely relative rank rule
  // would count as full rank.
  const double floor =
      1e-9 * (1.0 + spec.target().norm() + state.P.norm() * state.Q.norm());
  // Right factor Φ and Q's factors from (R, Qᵀ); left factor Ψ and P's
  // factors from (Rᵀ, Pᵀ).
  const AlignedFactors fq = Align(R, state.Q.transpose(), kUnchecked, floor);
  const AlignedFactors fp =
      Align(R.transpose(), state.P.transpose(), kUnchecked, floor);
  if (fq.rank_a != fp.rank_a) {
    throw CertificationFailure(
        "CertifyEquilibrium: residual rank differs between orientations",
        std::abs(fq.rank_a - fp.rank_a));
  }
  const int ell = fp.rank_a;

  EquilibriumCertificate c;
  c.rank_residual = ell;
  c.rank_p = fp.rank_b;
  c.rank_q = fq.rank_b;
  c.psi = fp.phi;
  // Rᵀ = Ψ_A Σ_A Ψᵀ, so the residual's right vectors paired with Ψ's leading
  // columns are fp.psi_a's leading columns. They span the same subspace as
  // fq.phi's leading block, so the rest of fq.phi stays orthogonal to them.
  c.phi = fq.phi;
  c.phi.leftCols(ell) = fp.psi_a.leftCols(ell);
  c.sigma = fp.sigma_a.transpose();
  c.sigma_p = fp.sigma_b.transpose();
  c.gamma_p = fp.psi_b;
  c.sigma_q = fq.sigma_b.transpose();
  c.gamma_q = fq.psi_b;

  const CertificateCheck check = CheckCertificate(spec, state, c);
  if (check.Worst() > 1e-8) {
    throw CertificationFailure(
        "CertifyEquilibrium: worst invariant residual " +
            std::to_string(check.Worst()),
        check.Worst());
  }
  return c;
}

ParamState StateFromCertificate(const EquilibriumCertificate& c) {
  return {c.psi * c.sigma_p * c.gamma_p.transpose(),
          c.phi * c.sigma_q * c.gamma_q.transpose()};
}

Json CertificateToJson(const EquilibriumCertificate& c) {
  return Json{{"psi", MatrixToJson(c.psi)},
              {"phi", MatrixToJson(c.phi)},
              {"sigma", MatrixToJson(c.sigma)},
              {"sigma_p", MatrixToJson(c.sigma_p)},
              {"gamma_p", MatrixToJson(c.gamma_p)},
              {"sigma_q", MatrixToJson(c.sigma_q)},
              {"gamma_q", MatrixToJson(c.gamma_q)},
              {"blocks",
               {{"rank_residual", c.rank_residual},
                {"rank_p", c.rank_p},
                {"rank_q", c.rank_q}}}};
}

EquilibriumCertificate CertificateFromJson(const Json& j) {
  EquilibriumCertificate c;
  try {
    c.psi = MatrixFromJson(j.at("psi"), "psi");
    c.phi = MatrixFromJson(j.at("phi"), "phi");
    c.sigma = MatrixFromJson(j.at("sigma"), "sigma");
    c.sigma_p = MatrixFromJson(j.at("sigma_p"), "sigma_p");
    c.gamma_p = MatrixFromJson(j.at("gamma_p"), "gamma_p");
    c.sigma_q = MatrixFromJson(j.at("sigma_q"), "sigma_q");
    c.gamma_q = MatrixFromJson(j.at("gamma_q"), "gamma_q");
    const Json& blocks = j.at("blocks");
    c.rank_residual = blocks.at("rank_residual").get<int>();
    c.rank_p = blocks.at("rank_p").get<int>();
    c.rank_q = blocks.at("rank_q").get<int>();
  } catch (const Json::exception& e) {
    throw InvalidArgument(std::string("certificate JSON: ") + e.what());
  }
  return c;
}

}  // namespace issgf
