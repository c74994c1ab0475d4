#include "issgf/tensor_core.h"

#include <algorithm>
#include <cmath>
#include <string>

#include "issgf/errors.h"

namespace issgf {

void RequireFinite(const Matrix& m, const char* what) {
  if (!m.allFinite()) {
    throw InvalidArgument(std::string(what) + " has non-finite entries");
  }
}

Vector Vec(const Matrix& m) {
  // Eigen's default storage is column-major, so the raw buffer is vec(m).
  return Eigen::Map<const Vector>(m.data(), m.size());
}

Matrix Unvec(const Vector& v, int rows, int cols) {
  if (rows < 0 || cols < 0 ||
      v.size() != static_cast<Eigen::Index>(rows) * cols) {
    throw InvalidArgument("Unvec: vector of length " +
                          std::to_string(v.size()) + " cannot be shaped " +
                          std::to_string(rows) + "x" + std::to_string(cols));
  }
  return Eigen::Map<const Matrix>(v.data(), rows, cols);
}

Matrix Kron(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    }
  }
  return out;
}

Matrix CommutationMatrix(int p, int q) {
  if (p < 1 || q < 1) {
    throw InvalidArgument("CommutationMatrix: dimensions must be positive");
  }
  // M is p x q: vec(M) index i + j*p, vec(M^T) index j + i*q.
  Matrix k = Matrix::Zero(p * q, p * q);
  for (int i = 0; i < p; ++i) {
    for (int j = 0; j < q; ++j) k(i + j * p, j + i * q) = 1.0;
  }
  return k;
}

SvdFactors SvdWithThreshold(const Matrix& m, double rel_tol) {
  RequireFinite(m, "SvdWithThreshold input");
  if (!(rel_tol > 0.0)) {
    throw InvalidArgument("SvdWithThreshold: rel_tol must be positive");
  }
  const Eigen::Index p = m.rows();
  const Eigen::Index o = m.cols();
  SvdFactors out;
  out.singular = Matrix::Zero(p, o);
  if (p == 0 || o == 0) {
    out.left = Matrix::Identity(p, p);
    out.right = Matrix::Identity(o, o);
    return out;
  }
  Eigen::JacobiSVD<Matrix> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
  if (svd.info() != Eigen::Success) {
    throw NumericFailure("SvdWithThreshold: SVD did not converge");
  }
  out.left = svd.matrixU();
  out.right = svd.matrixV();
  const Vector& s = svd.singularValues();
  const double smax = s.size() > 0 ? s(0) : 0.0;
  out.threshold = rel_tol * smax * static_cast<double>(std::max(p, o));
  for (Eigen::Index i = 0; i < s.size(); ++i) {
    if (s(i) > out.threshold) {
      out.singular(i, i) = s(i);
      ++out.rank;
    }
  }
  return out;
}

int NumericalRank(const Matrix& m, double rel_tol) {
  return SvdWithThreshold(m, rel_tol).rank;
}

Matrix CompleteOrthonormalBasis(const Matrix& partial) {
  RequireFinite(partial, "CompleteOrthonormalBasis input");
  const Eigen::Index d = partial.rows();
  const Eigen::Index r = partial.cols();
  if (r > d) {
    throw InvalidArgument("CompleteOrthonormalBasis: more columns than rows");
  }
  if (r > 0 && OrthonormalityError(partial) > 1e-10) {
    throw InvalidArgument(
        "CompleteOrthonormalBasis: input columns are not orthonormal");
  }
  Matrix basis(d, d);
  basis.leftCols(r) = partial;
  Eigen::Index filled = r;
  const double accept = 0.5 / std::sqrt(static_cast<double>(std::max<Eigen::Index>(d, 1)));
  for (Eigen::Index c = 0; c < d && filled < d; ++c) {
    Vector v = Vector::Unit(d, c);
    for (int pass = 0; pass < 2; ++pass) {
      for (Eigen::Index j = 0; j < filled; ++j) {
        v -= basis.col(j).dot(v) * basis.col(j);
      }
    }
    const double norm = v.norm();
    if (norm >= accept) basis.col(filled++) = v / norm;
  }
  if (filled != d) {
    throw NumericFailure("CompleteOrthonormalBasis: completion stalled");
  }
  return basis.rightCols(d - r);
}

double SigmaMin(const Matrix& m) {
  if (m.size() == 0) return 0.0;
  return Eigen::JacobiSVD<Matrix>(m).singularValues().minCoeff();
}

double SpectralNorm(const Matrix& m) {
  if (m.size() == 0) return 0.0;
  return Eigen::JacobiSVD<Matrix>(m).singularValues()(0);
}

double OrthonormalityError(const Matrix& q) {
  if (q.cols() == 0) return 0.0;
  return (q.transpose() * q - Matrix::Identity(q.cols(), q.cols()))
      .cwiseAbs()
      .maxCoeff();
}

bool IsPermutationMatrix(const Matrix& m) {
  if (m.rows() != m.cols()) return false;
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      if (m(i, j) != 0.0 && m(i, j) != 1.0) return false;
    }
  }
  return (m.rowwise().sum().array() == 1.0).all() &&
         (m.colwise().sum().array() == 1.0).all();
}

}  // namespace issgf
