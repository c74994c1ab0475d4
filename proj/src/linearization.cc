#include "issgf/linearization.h"

#include <algorithm>
#include <cmath>
#include <limits>

#include "issgf/equilibria.h"
#include "issgf/errors.h"

namespace issgf {

Vector VectorizedField(const ProblemSpec& spec, const ParamState& state) {
  return GradientField(spec, state).Stacked();
}

Vector VectorizedFieldKronecker(const ProblemSpec& spec,
                                const ParamState& state) {
  RequireConformant(spec, state);
  const int n = spec.n(), m = spec.m(), k = spec.k();
  const Vector r = Vec(Residual(spec, state));
  Vector out(static_cast<Eigen::Index>(n + m) * k);
  out.head(n * k) = Kron(state.Q.transpose(), Matrix::Identity(n, n)) * r;
  out.tail(m * k) = Kron(state.P.transpose(), Matrix::Identity(m, m)) *
                    (CommutationMatrix(m, n) * r);
  return out;
}

Matrix HessianBlocks::Full() const {
  Matrix h(pp.rows() + qp.rows(), pp.cols() + pq.cols());
  h << pp, pq, qp, qq;
  return h;
}

HessianBlocks Hessian(const ProblemSpec& spec, const ParamState& state) {
  RequireConformant(spec, state);
  const int n = spec.n(), m = spec.m(), k = spec.k();
  const Matrix& P = state.P;
  const Matrix& Q = state.Q;
  const Matrix R = Residual(spec, state);
  const Matrix ik = Matrix::Identity(k, k);
  HessianBlocks h;
  h.pp = -Kron(Q.transpose() * Q, Matrix::Identity(n, n));
  h.pq = Kron(ik, R) - Kron(Q.transpose(), P) * CommutationMatrix(k, m);
  h.qp = Kron(ik, R.transpose()) -
         Kron(P.transpose(), Q) * CommutationMatrix(k, n);
  h.qq = -Kron(P.transpose() * P, Matrix::Identity(m, m));
  return h;
}

Matrix StackedOrderPermutation(int n, int m, int k) {
  if (n < 1 || m < 1 || k < 1) {
    throw InvalidArgument("StackedOrderPermutation: dimensions must be positive");
  }
  const int rows = n + m;
  Matrix pi = Matrix::Zero(rows * k, rows * k);
  for (int c = 0; c < k; ++c) {
    for (int i = 0; i < n; ++i) pi(i + c * rows, i + c * n) = 1.0;
    for (int j = 0; j < m; ++j) pi(n + j + c * rows, n * k + j + c * m) = 1.0;
  }
  return pi;
}

double SpectralReport::WorstRelativeResidual() const {
  double worst = 0.0;
  for (const auto& b : blocks) worst = std::max(worst, b.residual);
  return hessian_norm > 0.0 ? worst / hessian_norm : worst;
}

double SpectralReport::WorstOrthonormalityError() const {
  double worst = 0.0;
  for (const auto& b : blocks) {
    worst = std::max(worst, b.orthonormality_error);
  }
  return worst;
}

int SpectralReport::TotalBlockColumns() const {
  int total = 0;
  for (const auto& b : blocks) total += static_cast<int>(b.vectors.cols());
  return total;
}

double SpectralTolerance(double spectral_norm) {
  return 1e-9 * (1.0 + spectral_norm);
}

std::vector<double> SymmetricEigenvalues(const Matrix& h) {
  if (h.rows() != h.cols()) {
    throw InvalidArgument("SymmetricEigenvalues: matrix must be square");
  }
  if (h.size() == 0) return {};
  Eigen::SelfAdjointEigenSolver<Matrix> solver(h, Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) {
    throw NumericFailure("SymmetricEigenvalues: eigensolver did not converge");
  }
  const Vector& ev = solver.eigenvalues();
  return {ev.data(), ev.data() + ev.size()};
}

namespace {

SpectralCounts Count(const std::vector<double>& values, double tol) {
  SpectralCounts c;
  for (double v : values) {
    if (v < -tol) {
      ++c.negative;
    } else if (v > tol) {
      ++c.positive;
    } else {
      ++c.zero;
    }
  }
  return c;
}

// Accumulates eigenvector columns given as (δP, δQ) pairs.
class BlockBuilder {
 public:
  BlockBuilder(std::string name, int n, int m, int k)
      : name_(std::move(name)), n_(n), m_(m), k_(k) {}

  void Add(const Matrix& dP, const Matrix& dQ, double lambda) {
    Vector z(static_cast<Eigen::Index>(n_ + m_) * k_);
    z.head(n_ * k_) = Vec(dP);
    z.tail(m_ * k_) = Vec(dQ);
    columns_.push_back(std::move(z));
    eigenvalues_.push_back(lambda);
  }

  EigenBlock Finish() const {
    EigenBlock b;
    b.name = name_;
    const auto cols = static_cast<Eigen::Index>(columns_.size());
    b.vectors.resize((n_ + m_) * k_, cols);
    b.eigenvalues.resize(cols);
    for (Eigen::Index c = 0; c < cols; ++c) {
      b.vectors.col(c) = columns_[c];
      b.eigenvalues(c) = eigenvalues_[c];
    }
    return b;
  }

 private:
  std::string name_;
  int n_, m_, k_;
  std::vector<Vector> columns_;
  std::vector<double> eigenvalues_;
};

// Normalizes columns and fills residuals against `h`.
void FinalizeBlock(const Matrix& h, EigenBlock* b) {
  b->scaling.resize(b->vectors.cols());
  for (Eigen::Index c = 0; c < b->vectors.cols(); ++c) {
    const double norm = b->vectors.col(c).norm();
    if (norm == 0.0) {
      throw NumericFailure("eigenvector block " + b->name +
                           " has a zero column");
    }
    b->scaling(c) = norm;
    b->vectors.col(c) /= norm;
  }
  if (b->vectors.cols() == 0) {
    b->residual = 0.0;
    b->orthonormality_error = 0.0;
    return;
  }
  b->residual =
      (h * b->vectors - b->vectors * b->eigenvalues.asDiagonal()).norm();
  b->orthonormality_error = OrthonormalityError(b->vectors);
}

SpectralReport BaseReport(const std::string& kind, const ProblemSpec& spec,
                          const Matrix& h) {
  SpectralReport r;
  r.kind = kind;
  r.n = spec.n();
  r.m = spec.m();
  r.k = spec.k();
  r.hessian_norm = h.norm();
  r.numeric_eigenvalues = SymmetricEigenvalues(h);
  r.hessian_spectral_norm =
      r.numeric_eigenvalues.empty()
          ? 0.0
          : std::max(std::abs(r.numeric_eigenvalues.front()),
                     std::abs(r.numeric_eigenvalues.back()));
  r.tolerance = SpectralTolerance(r.hessian_spectral_norm);
  r.counts = Count(r.numeric_eigenvalues, r.tolerance);
  return r;
}

// Finalizes blocks and compares the analytic multiset with the numeric one.
void CompleteReport(const Matrix& h, SpectralReport* r) {
  r->analytic_eigenvalues.clear();
  for (auto& b : r->blocks) {
    FinalizeBlock(h, &b);
    for (Eigen::Index c = 0; c < b.eigenvalues.size(); ++c) {
      r->analytic_eigenvalues.push_back(b.eigenvalues(c));
    }
  }
  std::sort(r->analytic_eigenvalues.begin(), r->analytic_eigenvalues.end());
  r->analytic_counts = Count(r->analytic_eigenvalues, r->tolerance);
  if (r->analytic_eigenvalues.size() != r->numeric_eigenvalues.size()) {
    r->multiset_error = std::numeric_limits<double>::infinity();
    return;
  }
  r->multiset_error = 0.0;
  for (std::size_t i = 0; i < r->analytic_eigenvalues.size(); ++i) {
    r->multiset_error =
        std::max(r->multiset_error, std::abs(r->analytic_eigenvalues[i] -
                                             r->numeric_eigenvalues[i]));
  }
}

}  // namespace

SpectralReport NumericSpectrum(const ProblemSpec& spec,
                               const ParamState& state) {
  SpectralReport r = BaseReport("numeric", spec, Hessian(spec, state).Full());
  r.analytic_prediction = false;
  return r;
}

SpectralReport OriginSpectrum(const ProblemSpec& spec,
                              const std::optional<Matrix>& omega,
                              bool allow_transpose) {
  const int n = spec.n(), m = spec.m(), k = spec.k();
  if (n <= m && !allow_transpose) {
    throw UnsupportedConfiguration(
        "OriginSpectrum: the closed form assumes n > m; transpose the problem "
        "(swap P and Q, use the transposed target) or allow transposition");
  }
  Matrix w = Matrix::Identity(k, k);
  if (omega) {
    if (omega->rows() != k || omega->cols() != k ||
        OrthonormalityError(*omega) > 1e-10) {
      throw InvalidArgument("OriginSpectrum: omega must be k x k orthogonal");
    }
    w = *omega;
  }
  const Matrix h = Hessian(spec, ParamState::Zero(spec)).Full();

  if (n < m) {
    const ProblemSpec flipped(spec.target().transpose(), k,
                              spec.allow_underparameterized());
    SpectralReport t = OriginSpectrum(flipped, w, false);
    SpectralReport r = BaseReport("origin", spec, h);
    r.transposed = true;
    for (const auto& tb : t.blocks) {
      EigenBlock b;
      b.name = tb.name;
      b.eigenvalues = tb.eigenvalues;
      // Transposed coordinates are [vec(Q); vec(P)].
      b.vectors.resize(tb.vectors.rows(), tb.vectors.cols());
      b.vectors << tb.vectors.bottomRows(n * k), tb.vectors.topRows(m * k);
      r.blocks.push_back(std::move(b));
    }
    CompleteReport(h, &r);
    return r;
  }

  SpectralReport r = BaseReport("origin", spec, h);
  const SvdFactors svd = SvdWithThreshold(spec.target());
  BlockBuilder pos("positive", n, m, k), neg("negative", n, m, k),
      ker("kernel", n, m, k);
  const Matrix zero_q = Matrix::Zero(m, k);
  for (int c = 0; c < k; ++c) {
    const auto wc = w.col(c).transpose();
    for (int i = 0; i < m; ++i) {
      const double s = svd.singular(i, i);
      const Matrix dP = svd.left.col(i) * wc;
      const Matrix dQ = svd.right.col(i) * wc;
      pos.Add(dP, dQ, s);
      neg.Add(-dP, dQ, -s);
    }
    for (int i = m; i < n; ++i) ker.Add(svd.left.col(i) * wc, zero_q, 0.0);
  }
  r.blocks = {pos.Finish(), neg.Finish(), ker.Finish()};
  CompleteReport(h, &r);
  return r;
}

SpectralReport TargetSetSpectrum(const ProblemSpec& spec,
                                 const ParamState& state) {
  const double loss = Loss(spec, state);
  if (loss > 1e-12) {
    throw PreconditionViolated(
        "TargetSetSpectrum: state is not on the target set (loss " +
            std::to_string(loss) + ")",
        loss);
  }
  const int n = spec.n(), m = spec.m(), k = spec.k();
  const EquilibriumCertificate cert = CertifyEquilibrium(spec, state);
  // On the target set the residual block is empty, so P's and Q's singular
  // values sit at the leading diagonal positions.
  const int ell = cert.rank_residual;
  const int pbar = cert.rank_p;
  const Matrix h = Hessian(spec, state).Full();
  SpectralReport r = BaseReport("target-set", spec, h);
  r.analytic_prediction =
      NumericalRank(spec.target()) == std::min(n, m) && ell == 0;

  auto psi = [&](int i) { return cert.psi.col(ell + i); };
  auto phi = [&](int j) { return cert.phi.col(j); };
  auto gp = [&](int i) { return cert.gamma_p.col(ell + i); };
  auto gq = [&](int j) { return cert.gamma_q.col(j); };
  auto sp = [&](int i) { return cert.sigma_p(ell + i, ell + i); };
  auto sq = [&](int j) { return j < std::min(m, k) ? cert.sigma_q(j, j) : 0.0; };

  const Matrix zero_p = Matrix::Zero(n, k), zero_q = Matrix::Zero(m, k);
  BlockBuilder v1("V1", n, m, k), v2("V2", n, m, k), v3("V3", n, m, k),
      v4("V4", n, m, k), v5("V5", n, m, k);
  for (int j = 0; j < m; ++j) {
    for (int i = 0; i < pbar; ++i) {
      const Matrix dP = psi(i) * gq(j).transpose();
      const Matrix dQ = phi(j) * gp(i).transpose();
      v1.Add(sq(j) * dP, sp(i) * dQ, -(sq(j) * sq(j) + sp(i) * sp(i)));
      v3.Add(-sp(i) * dP, sq(j) * dQ, 0.0);
    }
    for (int i = pbar; i < n - ell; ++i) {
      v2.Add(psi(i) * gq(j).transpose(), zero_q, -sq(j) * sq(j));
    }
  }
  for (int c = m; c < k; ++c) {
    for (int i = 0; i < n; ++i) {
      v4.Add(cert.psi.col(i) * gq(c).transpose(), zero_q, 0.0);
    }
  }
  for (int j = 0; j < m; ++j) {
    for (int c = ell + pbar; c < k; ++c) {
      v5.Add(zero_p, phi(j) * cert.gamma_p.col(c).transpose(), 0.0);
    }
  }
  r.blocks = {v1.Finish(), v2.Finish(), v3.Finish(), v4.Finish(), v5.Finish()};
  CompleteReport(h, &r);
  return r;
}

std::vector<ImbalanceRow> ImbalanceStudy(const ProblemSpec& spec,
                                         const ParamState& state,
                                         const std::vector<double>& xis) {
  const double loss = Loss(spec, state);
  if (loss > 1e-12) {
    throw PreconditionViolated(
        "ImbalanceStudy: state is not on the target set (loss " +
            std::to_string(loss) + ")",
        loss);
  }
  std::vector<ImbalanceRow> rows;
  for (double xi : xis) {
    if (!(xi > 0.0) || !std::isfinite(xi)) {
      throw InvalidArgument("ImbalanceStudy: xi must be positive");
    }
    const ParamState scaled{state.P * xi, state.Q / xi};
    const SpectralReport rep = NumericSpectrum(spec, scaled);
    ImbalanceRow row;
    row.xi = xi;
    row.loss = Loss(spec, scaled);
    row.max_abs = rep.hessian_spectral_norm;
    row.min_abs_nonzero = std::numeric_limits<double>::infinity();
    for (double v : rep.numeric_eigenvalues) {
      if (std::abs(v) > rep.tolerance) {
        row.min_abs_nonzero = std::min(row.min_abs_nonzero, std::abs(v));
      }
    }
    if (!std::isfinite(row.min_abs_nonzero)) row.min_abs_nonzero = 0.0;
    rows.push_back(row);
  }
  return rows;
}

namespace {

Json CountsToJson(const SpectralCounts& c) {
  return Json{{"negative", c.negative}, {"zero", c.zero}, {"positive", c.positive}};
}

std::vector<double> ToStd(const Vector& v) {
  return {v.data(), v.data() + v.size()};
}

}  // namespace

Json SpectralReportToJson(const SpectralReport& r) {
  Json blocks = Json::array();
  for (const auto& b : r.blocks) {
    blocks.push_back(Json{{"name", b.name},
                          {"columns", b.vectors.cols()},
                          {"eigenvalues", VectorToJson(ToStd(b.eigenvalues))},
                          {"scaling", VectorToJson(ToStd(b.scaling))},
                          {"residual", b.residual},
                          {"orthonormality_error", b.orthonormality_error}});
  }
  return Json{{"kind", r.kind},
              {"config", {{"n", r.n}, {"m", r.m}, {"k", r.k}}},
              {"hessian_norm", r.hessian_norm},
              {"hessian_spectral_norm", r.hessian_spectral_norm},
              {"tolerance", r.tolerance},
              {"analytic_prediction", r.analytic_prediction},
              {"transposed", r.transposed},
              {"analytic_eigenvalues", VectorToJson(r.analytic_eigenvalues)},
              {"numeric_eigenvalues", VectorToJson(r.numeric_eigenvalues)},
              {"multiset_error", r.multiset_error},
              {"counts", CountsToJson(r.counts)},
              {"analytic_counts", CountsToJson(r.analytic_counts)},
              {"blocks", blocks}};
}

Json ImbalanceTableToJson(const std::vector<ImbalanceRow>& rows) {
  Json out = Json::array();
  for (const auto& row : rows) {
    out.push_back(Json{{"xi", row.xi},
                       {"min_abs_nonzero", row.min_abs_nonzero},
                       {"max_abs", row.max_abs},
                       {"loss", row.loss}});
  }
  return out;
}

}  // namespace issgf
