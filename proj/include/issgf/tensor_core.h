#pragma once

/// @file
/// Dense linear-algebra utilities shared by every module: column-major
/// vectorization, Kronecker products, commutation matrices, thresholded SVD
/// and deterministic orthonormal-basis completion.

#include <Eigen/Dense>

namespace issgf {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Default relative tolerance for numerical rank decisions.
inline constexpr double kDefaultRankTol = 1e-10;

/// Throws InvalidArgument if any entry of `m` is NaN or infinite. `what`
/// names the operand in the message.
void RequireFinite(const Matrix& m, const char* what);

/// Stacks the columns of `m`: element (i + j*rows) equals m(i, j).
Vector Vec(const Matrix& m);

/// Inverse of Vec. Throws InvalidArgument if v.size() != rows*cols.
Matrix Unvec(const Vector& v, int rows, int cols);

/// Kronecker product; block (i, j) of the result is a(i, j) * b.
Matrix Kron(const Matrix& a, const Matrix& b);

/// The pq x pq permutation K with K * Vec(M.transpose()) == Vec(M) for every
/// p x q matrix M. CommutationMatrix(p, q).transpose() equals
/// CommutationMatrix(q, p), which maps Vec(M) to Vec(M.transpose()).
Matrix CommutationMatrix(int p, int q);

/// Full SVD with an explicit numerical rank.
///
/// `left` (p x p) and `right` (o x o) are orthogonal, `singular` is p x o
/// rectangular diagonal with non-increasing entries. Entries at index >= rank
/// are exactly zero. `left * singular * right^T` reconstructs the input up to
/// the discarded tail.
struct SvdFactors {
  Matrix left;
  Matrix singular;
  Matrix right;
  int rank = 0;
  double threshold = 0.0;

  /// Diagonal of `singular` (length min(p, o)).
  Vector values() const { return singular.diagonal(); }
};

/// Computes the SVD and zeroes singular values not exceeding
/// rel_tol * sigma_max * max(rows, cols). Throws NumericFailure if the
/// decomposition does not converge.
SvdFactors SvdWithThreshold(const Matrix& m, double rel_tol = kDefaultRankTol);

/// Numerical rank under the same rule as SvdWithThreshold.
int NumericalRank(const Matrix& m, double rel_tol = kDefaultRankTol);

/// Completes the r orthonormal columns of `partial` (d x r) to an orthonormal
/// basis of R^d and returns the d x (d - r) complement.
///
/// Deterministic: canonical vectors e_1, e_2, ... are tried in order and the
/// first one whose residual after two Gram-Schmidt passes has norm at least
/// 0.5/sqrt(d) is accepted. Throws InvalidArgument if partial^T partial is not
/// the identity within 1e-10.
Matrix CompleteOrthonormalBasis(const Matrix& partial);

/// Smallest of the min(rows, cols) singular values; 0 for empty matrices.
double SigmaMin(const Matrix& m);

/// Largest singular value (spectral norm).
double SpectralNorm(const Matrix& m);

/// Largest absolute deviation of q^T q from the identity.
double OrthonormalityError(const Matrix& q);

/// True when every entry is 0 or 1 and every row and column sums to 1.
bool IsPermutationMatrix(const Matrix& m);

}  // namespace issgf
