#include "oss/matlib.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace oss {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct Svd {
  Matrix u;
  Vector s;
  Matrix v;
};

// Full SVD that tolerates empty inputs.
Svd full_svd(const Matrix& m) {
  Svd out;
  if (m.rows() == 0 || m.cols() == 0) {
    out.u = Matrix::Identity(m.rows(), m.rows());
    out.v = Matrix::Identity(m.cols(), m.cols());
    out.s = Vector::Zero(0);
    return out;
  }
  Eigen::JacobiSVD<Matrix> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
  out.u = svd.matrixU();
  out.s = svd.singularValues();
  out.v = svd.matrixV();
  return out;
}

double cut_threshold(const Matrix& m, double sigma_max, double tol) {
  return tol * sigma_max * static_cast<double>(std::max(m.rows(), m.cols()));
}

int rank_from_singular_values(const Vector& s, double threshold) {
  if (s.size() == 0 || s(0) == 0.0) return 0;
  int r = 0;
  for (Eigen::Index i = 0; i < s.size(); ++i) {
    if (s(i) > threshold) ++r;
  }
  return r;
}

// Parlett-Reinsch balancing by powers of two (exact similarity).
Matrix balance(Matrix a) {
  const Eigen::Index n = a.rows();
  constexpr double radix = 2.0;
  constexpr double sqrdx = radix * radix;
  bool done = false;
  for (int sweep = 0; sweep < 200 && !done; ++sweep) {
    done = true;
    for (Eigen::Index i = 0; i < n; ++i) {
      double r = 0.0;
      double c = 0.0;
      for (Eigen::Index j = 0; j < n; ++j) {
        if (j == i) continue;
        c += std::abs(a(j, i));
        r += std::abs(a(i, j));
      }
      if (c == 0.0 || r == 0.0) continue;
      double g = r / radix;
      double f = 1.0;
      const double s = c + r;
      while (c < g) {
        f *= radix;
        c *= sqrdx;
      }
      g = r * radix;
      while (c > g) {
        f /= radix;
        c /= sqrdx;
      }
      if ((c + r) / f < 0.95 * s) {
        done = false;
        a.row(i) /= f;
        a.col(i) *= f;
      }
    }
  }
  return a;
}

}  // namespace

SubspaceBasis::SubspaceBasis(Matrix orthonormal_basis, double tol)
    : basis_(std::move(orthonormal_basis)), tol_(tol) {
  if (!basis_.allFinite()) {
    throw std::invalid_argument("SubspaceBasis: non-finite basis entries");
  }
  if (basis_.cols() > 0) {
    const Matrix gram = basis_.transpose() * basis_;
    const double err =
        (gram - Matrix::Identity(gram.rows(), gram.cols())).cwiseAbs().maxCoeff();
    if (err > 1e-10) {
      throw std::invalid_argument("SubspaceBasis: basis is not orthonormal");
    }
  }
}

SubspaceBasis SubspaceBasis::empty(int ambient_dim) {
  return SubspaceBasis(Matrix::Zero(ambient_dim, 0), kRankTol);
}

SubspaceBasis SubspaceBasis::full(int ambient_dim) {
  return SubspaceBasis(Matrix::Identity(ambient_dim, ambient_dim), kRankTol);
}

SubspaceBasis SubspaceBasis::span_of(const Matrix& spanning, double tol) {
  return range_basis(spanning, tol);
}

Matrix SubspaceBasis::projector() const {
  return basis_ * basis_.transpose();
}

RankInfo rank_info(const Matrix& m, double tol) {
  RankInfo info;
  if (m.size() == 0) {
    info.gap = kInf;
    return info;
  }
  Eigen::JacobiSVD<Matrix> svd(m);
  const Vector& s = svd.singularValues();
  info.sigma_max = s(0);
  if (s(0) == 0.0) {
    info.gap = kInf;
    return info;
  }
  const double threshold = cut_threshold(m, s(0), tol);
  info.rank = rank_from_singular_values(s, threshold);
  const int r = info.rank;
  if (r < s.size()) {
    info.gap = s(r) == 0.0 ? kInf : s(r - 1) / s(r);
  } else {
    info.gap = s(r - 1) / threshold;
  }
  return info;
}

int numerical_rank(const Matrix& m, double tol) { return rank_info(m, tol).rank; }

SubspaceBasis null_basis(const Matrix& m, double tol) {
  if (m.rows() == 0) return SubspaceBasis::full(static_cast<int>(m.cols()));
  const Svd svd = full_svd(m);
  const double smax = svd.s.size() > 0 ? svd.s(0) : 0.0;
  const int r = rank_from_singular_values(svd.s, cut_threshold(m, smax, tol));
  return SubspaceBasis(svd.v.rightCols(m.cols() - r), tol);
}

SubspaceBasis range_basis(const Matrix& m, double tol) { return range_basis(m, tol, 0.0); }

SubspaceBasis range_basis(const Matrix& m, double tol, double reference) {
  if (m.cols() == 0) return SubspaceBasis::empty(static_cast<int>(m.rows()));
  const Svd svd = full_svd(m);
  const double smax = std::max(svd.s.size() > 0 ? svd.s(0) : 0.0, reference);
  const int r = rank_from_singular_values(svd.s, cut_threshold(m, smax, tol));
  return SubspaceBasis(svd.u.leftCols(r), tol);
}

SubspaceBasis left_null_basis(const Matrix& m, double tol) {
  return left_null_basis(m, tol, 0.0);
}

SubspaceBasis left_null_basis(const Matrix& m, double tol, double reference) {
  if (m.cols() == 0) return SubspaceBasis::full(static_cast<int>(m.rows()));
  const Svd svd = full_svd(m);
  const double smax = std::max(svd.s.size() > 0 ? svd.s(0) : 0.0, reference);
  const int r = rank_from_singular_values(svd.s, cut_threshold(m, smax, tol));
  return SubspaceBasis(svd.u.rightCols(m.rows() - r), tol);
}

SubspaceBasis orthogonal_complement(const SubspaceBasis& u) {
  if (u.is_empty()) return SubspaceBasis::full(u.ambient_dim());
  return left_null_basis(u.basis(), u.tol());
}

double max_principal_sine(const SubspaceBasis& u, const SubspaceBasis& v) {
  if (u.ambient_dim() != v.ambient_dim()) {
    throw std::invalid_argument("principal angles: ambient dimensions differ");
  }
  if (u.dim() != v.dim()) return 1.0;
  if (u.dim() == 0) return 0.0;
  // Singular values of (I - P_u) V are the sines of the principal angles.
  const Matrix residual = v.basis() - u.basis() * (u.basis().transpose() * v.basis());
  Eigen::JacobiSVD<Matrix> svd(residual);
  return svd.singularValues().size() > 0 ? svd.singularValues()(0) : 0.0;
}

bool subspace_equal(const SubspaceBasis& u, const SubspaceBasis& v, double tol) {
  if (u.ambient_dim() != v.ambient_dim()) {
    throw std::invalid_argument("subspace_equal: ambient dimensions differ (" +
                                std::to_string(u.ambient_dim()) + " vs " +
                                std::to_string(v.ambient_dim()) + ")");
  }
  if (u.dim() != v.dim()) return false;
  return max_principal_sine(u, v) <= tol;
}

SubspaceBasis subspace_intersection(const SubspaceBasis& u, const SubspaceBasis& v,
                                    double tol) {
  if (u.ambient_dim() != v.ambient_dim()) {
    throw std::invalid_argument("subspace_intersection: ambient dimensions differ");
  }
  const Eigen::Index n = u.ambient_dim();
  if (u.is_empty() || v.is_empty()) return SubspaceBasis::empty(static_cast<int>(n));
  const Matrix eye = Matrix::Identity(n, n);
  Matrix stacked(2 * n, n);
  stacked << eye - u.projector(), eye - v.projector();
  // Absolute cut: singular values of the stack lie in [0, sqrt(2)].
  const Svd svd = full_svd(stacked);
  int r = 0;
  for (Eigen::Index i = 0; i < svd.s.size(); ++i) {
    if (svd.s(i) > tol) ++r;
  }
  return SubspaceBasis(svd.v.rightCols(n - r), tol);
}

ComplexVector eigenvalues(const Matrix& a) {
  if (a.rows() != a.cols()) {
    throw std::invalid_argument("eigenvalues: matrix is not square " + shape_string(a));
  }
  ComplexVector out;
  if (a.rows() == 0) return out;
  Eigen::EigenSolver<Matrix> es(balance(a), /*computeEigenvectors=*/false);
  if (es.info() != Eigen::Success) {
    throw NumericalError("eigenvalues: QR iteration did not converge");
  }
  out.reserve(static_cast<size_t>(a.rows()));
  for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) {
    out.push_back(es.eigenvalues()(i));
  }
  return out;
}

double spectral_abscissa(const Matrix& a) {
  double best = -kInf;
  for (const auto& ev : eigenvalues(a)) best = std::max(best, ev.real());
  return best;
}

Matrix solve_linear(const Matrix& a, const Matrix& b, double tol) {
  if (a.rows() != b.rows()) {
    throw std::invalid_argument("solve_linear: row mismatch " + shape_string(a) +
                                " vs " + shape_string(b));
  }
  if (a.cols() == 0) return Matrix::Zero(0, b.cols());
  if (a.rows() == 0) return Matrix::Zero(a.cols(), b.cols());
  Eigen::JacobiSVD<Matrix> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
  svd.setThreshold(tol * static_cast<double>(std::max(a.rows(), a.cols())));
  return svd.solve(b);
}

Matrix blkdiag(const Matrix& a, const Matrix& b) {
  Matrix out = Matrix::Zero(a.rows() + b.rows(), a.cols() + b.cols());
  out.topLeftCorner(a.rows(), a.cols()) = a;
  out.bottomRightCorner(b.rows(), b.cols()) = b;
  return out;
}

Matrix vstack(std::initializer_list<Matrix> blocks) {
  Eigen::Index rows = 0;
  Eigen::Index cols = -1;
  for (const auto& b : blocks) {
    if (cols >= 0 && b.cols() != cols) {
      throw std::invalid_argument("vstack: column mismatch");
    }
    cols = b.cols();
    rows += b.rows();
  }
  Matrix out(rows, std::max<Eigen::Index>(cols, 0));
  Eigen::Index r = 0;
  for (const auto& b : blocks) {
    out.middleRows(r, b.rows()) = b;
    r += b.rows();
  }
  return out;
}

Matrix hstack(std::initializer_list<Matrix> blocks) {
  Eigen::Index rows = -1;
  Eigen::Index cols = 0;
  for (const auto& b : blocks) {
    if (rows >= 0 && b.rows() != rows) {
      throw std::invalid_argument("hstack: row mismatch");
    }
    rows = b.rows();
    cols += b.cols();
  }
  Matrix out(std::max<Eigen::Index>(rows, 0), cols);
  Eigen::Index c = 0;
  for (const auto& b : blocks) {
    out.middleCols(c, b.cols()) = b;
    c += b.cols();
  }
  return out;
}

std::string shape_string(const Matrix& m) {
  std::ostringstream os;
  os << m.rows() << "x" << m.cols();
  return os.str();
}

}  // namespace oss
