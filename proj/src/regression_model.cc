#include "issgf/regression_model.h"

#include <algorithm>
#include <fstream>
#include <istream>
#include <sstream>
#include <vector>

#include "issgf/errors.h"

namespace issgf {

ProblemSpec::ProblemSpec(Matrix target, int k, bool allow_underparameterized)
    : target_(std::move(target)), k_(k), allow_under_(allow_underparameterized) {
  if (target_.rows() < 1 || target_.cols() < 1) {
    throw InvalidArgument("ProblemSpec: target must be non-empty");
  }
  if (k_ < 1) throw InvalidArgument("ProblemSpec: k must be positive");
  RequireFinite(target_, "ProblemSpec target");
  if (!allow_under_ && !overparameterized()) {
    throw InvalidArgument(
        "ProblemSpec: k=" + std::to_string(k_) + " < max(n, m)=" +
        std::to_string(std::max(n(), m())) +
        "; set allow_underparameterized for this regime");
  }
}

double ParamState::Norm() const {
  return std::sqrt(P.squaredNorm() + Q.squaredNorm());
}

Vector ParamState::Stacked() const {
  Vector z(P.size() + Q.size());
  z << Vec(P), Vec(Q);
  return z;
}

ParamState ParamState::FromStacked(const Vector& z, int n, int m, int k) {
  if (z.size() != static_cast<Eigen::Index>(n + m) * k) {
    throw InvalidArgument("ParamState::FromStacked: length mismatch");
  }
  return {Unvec(z.head(n * k), n, k), Unvec(z.tail(m * k), m, k)};
}

ParamState ParamState::Zero(const ProblemSpec& spec) {
  return {Matrix::Zero(spec.n(), spec.k()), Matrix::Zero(spec.m(), spec.k())};
}

void RequireConformant(const ProblemSpec& spec, const ParamState& state,
                       const char* what) {
  if (state.P.rows() != spec.n() || state.P.cols() != spec.k() ||
      state.Q.rows() != spec.m() || state.Q.cols() != spec.k()) {
    std::ostringstream os;
    os << what << ": expected P " << spec.n() << "x" << spec.k() << " and Q "
       << spec.m() << "x" << spec.k() << ", got P " << state.P.rows() << "x"
       << state.P.cols() << " and Q " << state.Q.rows() << "x"
       << state.Q.cols();
    throw InvalidArgument(os.str());
  }
  RequireFinite(state.P, "P");
  RequireFinite(state.Q, "Q");
}

Matrix ThetaStar(const Dataset& data) {
  const auto n = data.X.rows();
  const auto ell = data.X.cols();
  if (data.Y.cols() != ell) {
    throw InvalidArgument("ThetaStar: X and Y sample counts differ");
  }
  RequireFinite(data.X, "X");
  RequireFinite(data.Y, "Y");
  const SvdFactors svd = SvdWithThreshold(data.X);
  // Full row rank is what makes the minimizer unique; ℓ >= n follows.
  if (svd.rank < n) {
    throw DegenerateData("ThetaStar: X has rank " + std::to_string(svd.rank) +
                             ", need full row rank " + std::to_string(n),
                         svd.rank);
  }
  // X† = V Σ⁺ Uᵀ.
  Matrix sigma_pinv = Matrix::Zero(ell, n);
  for (int i = 0; i < svd.rank; ++i) sigma_pinv(i, i) = 1.0 / svd.singular(i, i);
  const Matrix x_pinv = svd.right * sigma_pinv * svd.left.transpose();
  return (data.Y * x_pinv).transpose();
}

namespace {

bool ParseRow(const std::string& line, std::vector<double>* out) {
  out->clear();
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) {
    const auto b = cell.find_first_not_of(" \t\r");
    const auto e = cell.find_last_not_of(" \t\r");
    if (b == std::string::npos) return false;
    const std::string trimmed = cell.substr(b, e - b + 1);
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(trimmed, &used);
    } catch (const std::exception&) {
      return false;
    }
    if (used != trimmed.size()) return false;
    out->push_back(v);
  }
  return true;
}

}  // namespace

Dataset ReadDatasetCsv(std::istream& in, int n, int m) {
  if (n < 1 || m < 1) throw InvalidArgument("ReadDatasetCsv: n, m must be >= 1");
  std::vector<std::vector<double>> rows;
  std::string line;
  std::vector<double> row;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    if (!ParseRow(line, &row)) {
      if (line_no == 1 && rows.empty()) continue;  // header
      throw InvalidArgument("ReadDatasetCsv: malformed row at line " +
                            std::to_string(line_no));
    }
    if (static_cast<int>(row.size()) != n + m) {
      throw InvalidArgument("ReadDatasetCsv: line " + std::to_string(line_no) +
                            " has " + std::to_string(row.size()) +
                            " fields, expected " + std::to_string(n + m));
    }
    rows.push_back(row);
  }
  Dataset d{Matrix(n, rows.size()), Matrix(m, rows.size())};
  for (std::size_t s = 0; s < rows.size(); ++s) {
    for (int i = 0; i < n; ++i) d.X(i, s) = rows[s][i];
    for (int i = 0; i < m; ++i) d.Y(i, s) = rows[s][n + i];
  }
  return d;
}

Dataset ReadDatasetCsvFile(const std::string& path, int n, int m) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("cannot open dataset file: " + path);
  return ReadDatasetCsv(in, n, m);
}

Matrix Residual(const ProblemSpec& spec, const ParamState& state) {
  RequireConformant(spec, state);
  return spec.target() - state.P * state.Q.transpose();
}

double Loss(const ProblemSpec& spec, const ParamState& state) {
  return 0.5 * Residual(spec, state).squaredNorm();
}

ParamState GradientField(const ProblemSpec& spec, const ParamState& state) {
  const Matrix r = Residual(spec, state);
  return {r * state.Q, r.transpose() * state.P};
}

namespace {

void RequireDisturbanceShape(const ProblemSpec& spec, const Matrix& U,
                             const Matrix& V) {
  if (U.rows() != spec.n() || U.cols() != spec.k() || V.rows() != spec.m() ||
      V.cols() != spec.k()) {
    throw InvalidArgument("disturbance: U must be n x k and V m x k");
  }
  RequireFinite(U, "U");
  RequireFinite(V, "V");
}

}  // namespace

ParamState DisturbedField(const ProblemSpec& spec, const ParamState& state,
                          const Matrix& U, const Matrix& V) {
  RequireDisturbanceShape(spec, U, V);
  ParamState f = GradientField(spec, state);
  f.P += U;
  f.Q += V;
  return f;
}

DissipationBound EvaluateDissipationBound(const ProblemSpec& spec,
                                          const ParamState& state,
                                          const Matrix& U, const Matrix& V) {
  RequireDisturbanceShape(spec, U, V);
  const ParamState neg_grad = GradientField(spec, state);
  // ∇L = −f, so ⟨∇L, −∇L + w⟩ = −‖f‖² − ⟨f, w⟩.
  DissipationBound b;
  b.lhs = -(neg_grad.P.squaredNorm() + neg_grad.Q.squaredNorm()) -
          (neg_grad.P.cwiseProduct(U).sum() + neg_grad.Q.cwiseProduct(V).sum());
  b.sigma_min_P = SigmaMin(state.P);
  b.sigma_min_Q = SigmaMin(state.Q);
  const double w2 = U.squaredNorm() + V.squaredNorm();
  b.rhs = -Loss(spec, state) *
              (b.sigma_min_Q * b.sigma_min_Q + b.sigma_min_P * b.sigma_min_P) +
          0.5 * w2;
  return b;
}

}  // namespace issgf
