#pragma once

#include <complex>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace oss {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using ComplexVector = std::vector<std::complex<double>>;

/// Default relative rank threshold, scaled by sigma_max * max(rows, cols).
inline constexpr double kRankTol = 1e-10;

/// Thrown when a numerical routine cannot produce a trustworthy answer.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Rank verdict together with the singular-value gap around the cut.
struct RankInfo {
  int rank = 0;
  /// sigma_r / sigma_{r+1}; +inf when there is nothing on one side of the cut.
  double gap = 0.0;
  double sigma_max = 0.0;
};

RankInfo rank_info(const Matrix& m, double tol = kRankTol);
int numerical_rank(const Matrix& m, double tol = kRankTol);

/// A linear subspace stored through an orthonormal basis. The empty subspace
/// is represented by an ambient_dim x 0 basis.
class SubspaceBasis {
 public:
  SubspaceBasis() = default;
  /// Takes ownership of a basis that is already orthonormal; checked to 1e-10.
  SubspaceBasis(Matrix orthonormal_basis, double tol);

  static SubspaceBasis empty(int ambient_dim);
  static SubspaceBasis full(int ambient_dim);
  /// Orthonormalizes an arbitrary spanning set.
  static SubspaceBasis span_of(const Matrix& spanning, double tol = kRankTol);

  const Matrix& basis() const { return basis_; }
  int dim() const { return static_cast<int>(basis_.cols()); }
  int ambient_dim() const { return static_cast<int>(basis_.rows()); }
  double tol() const { return tol_; }
  bool is_empty() const { return basis_.cols() == 0; }

  /// Orthogonal projector onto the subspace.
  Matrix projector() const;

 private:
  Matrix basis_;
  double tol_ = kRankTol;
};

SubspaceBasis null_basis(const Matrix& m, double tol = kRankTol);
SubspaceBasis range_basis(const Matrix& m, double tol = kRankTol);
/// Basis of {v : v^T m = 0}.
SubspaceBasis left_null_basis(const Matrix& m, double tol = kRankTol);
/// Same, with the rank cut taken relative to max(sigma_max(m), reference). Use
/// for products K Z whose roundoff-level entries must not count as rank.
SubspaceBasis range_basis(const Matrix& m, double tol, double reference);
SubspaceBasis left_null_basis(const Matrix& m, double tol, double reference);
SubspaceBasis orthogonal_complement(const SubspaceBasis& u);

/// Largest sine of the principal angles between u and v (1 when dims differ).
double max_principal_sine(const SubspaceBasis& u, const SubspaceBasis& v);
bool subspace_equal(const SubspaceBasis& u, const SubspaceBasis& v,
                    double tol = 1e-8);
SubspaceBasis subspace_intersection(const SubspaceBasis& u,
                                    const SubspaceBasis& v,
                                    double tol = 1e-9);

ComplexVector eigenvalues(const Matrix& a);
/// Largest real part of the spectrum; -inf for an empty matrix.
double spectral_abscissa(const Matrix& a);

/// Minimum-norm least-squares solution of a x = b.
Matrix solve_linear(const Matrix& a, const Matrix& b, double tol = kRankTol);

/// Block-diagonal concatenation.
Matrix blkdiag(const Matrix& a, const Matrix& b);
/// Vertical concatenation of blocks with equal column counts.
Matrix vstack(std::initializer_list<Matrix> blocks);
Matrix hstack(std::initializer_list<Matrix> blocks);

inline bool all_finite(const Matrix& m) { return m.allFinite(); }

std::string shape_string(const Matrix& m);

}  // namespace oss
