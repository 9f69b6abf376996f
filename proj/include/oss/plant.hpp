#pragma once

#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "oss/matlib.hpp"

namespace oss {

/// Matrices of the LTI plant
///   xdot = A x + B u + Bw w,   y = C x + D u + Q w,   ym = Cm x + Dm u + Qm w
/// at one value of the uncertain parameter.
struct PlantMatrices {
  Matrix A, B, Bw;
  Matrix C, D, Q;
  Matrix Cm, Dm, Qm;

  int n() const { return static_cast<int>(A.rows()); }
  int m() const { return static_cast<int>(B.cols()); }
  int nw() const { return static_cast<int>(Bw.cols()); }
  int p() const { return static_cast<int>(C.rows()); }
  int pm() const { return static_cast<int>(Cm.rows()); }

  /// Throws std::invalid_argument naming the first inconsistent block.
  void validate() const;

  /// y = C x + D u + Q w.
  Vector output(const Vector& x, const Vector& u, const Vector& w) const {
    return C * x + D * u + Q * w;
  }

  /// Fills Cm, Dm, Qm with a full-state measurement when they are empty.
  static PlantMatrices with_full_state_measurement(PlantMatrices pm);
};

/// Parametric family delta -> PlantMatrices together with the finite sample
/// set over which every "for all delta" statement is decided.
class UncertainPlant {
 public:
  using Evaluator = std::function<PlantMatrices(const Vector& delta)>;
  using Interval = std::pair<double, double>;

  UncertainPlant(Evaluator evaluate, int delta_dim, std::vector<Vector> samples,
                 std::optional<std::vector<Interval>> box = std::nullopt);

  /// Plant without uncertainty: delta is the empty vector.
  static UncertainPlant nominal(PlantMatrices pm);

  /// A(delta) = A0 + sum_k delta_k A_k for every block. Blocks left empty in
  /// a term are treated as zero.
  static UncertainPlant affine(PlantMatrices nominal, std::vector<PlantMatrices> terms,
                               std::vector<Vector> samples,
                               std::optional<std::vector<Interval>> box = std::nullopt);

  PlantMatrices evaluate(const Vector& delta) const;

  int delta_dim() const { return delta_dim_; }
  const std::vector<Vector>& samples() const { return samples_; }
  const std::optional<std::vector<Interval>>& box() const { return box_; }

  /// Index of the nominal sample: the zero vector if present, else 0.
  size_t nominal_index() const;
  const Vector& nominal_delta() const { return samples_[nominal_index()]; }

  /// Appends every corner of delta_box that is not already a sample.
  void add_box_corners();

 private:
  Evaluator evaluate_;
  int delta_dim_ = 0;
  std::vector<Vector> samples_;
  std::optional<std::vector<Interval>> box_;
};

PlantMatrices eval_plant(const UncertainPlant& up, const Vector& delta);

/// The system matrix [A B; C D].
Matrix system_matrix(const PlantMatrices& pm);

std::string format_delta(const Vector& delta);

}  // namespace oss
