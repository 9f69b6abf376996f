#include "oss/plant.hpp"

#include <sstream>

namespace oss {
namespace {

void require_shape(const Matrix& m, Eigen::Index rows, Eigen::Index cols,
                   const char* name) {
  if (m.rows() != rows || m.cols() != cols) {
    std::ostringstream os;
    os << "plant block " << name << " has shape " << shape_string(m) << ", expected "
       << rows << "x" << cols;
    throw std::invalid_argument(os.str());
  }
  if (!m.allFinite()) {
    throw std::invalid_argument(std::string("plant block ") + name +
                                " has non-finite entries");
  }
}

Matrix add_term(const Matrix& base, const Matrix& term, double scale) {
  if (term.size() == 0) return base;
  if (term.rows() != base.rows() || term.cols() != base.cols()) {
    throw std::invalid_argument("affine plant term has shape " + shape_string(term) +
                                ", nominal block is " + shape_string(base));
  }
  return base + scale * term;
}

}  // namespace

void PlantMatrices::validate() const {
  const Eigen::Index nn = A.rows();
  const Eigen::Index mm = B.cols();
  const Eigen::Index ww = Bw.cols();
  const Eigen::Index pp = C.rows();
  const Eigen::Index pmm = Cm.rows();
  require_shape(A, nn, nn, "A");
  require_shape(B, nn, mm, "B");
  require_shape(Bw, nn, ww, "Bw");
  require_shape(C, pp, nn, "C");
  require_shape(D, pp, mm, "D");
  require_shape(Q, pp, ww, "Q");
  require_shape(Cm, pmm, nn, "Cm");
  require_shape(Dm, pmm, mm, "Dm");
  require_shape(Qm, pmm, ww, "Qm");
}

PlantMatrices PlantMatrices::with_full_state_measurement(PlantMatrices pm) {
  if (pm.Cm.size() == 0 && pm.Dm.size() == 0 && pm.Qm.size() == 0) {
    const Eigen::Index n = pm.A.rows();
    pm.Cm = Matrix::Identity(n, n);
    pm.Dm = Matrix::Zero(n, pm.B.cols());
    pm.Qm = Matrix::Zero(n, pm.Bw.cols());
  }
  return pm;
}

UncertainPlant::UncertainPlant(Evaluator evaluate, int delta_dim,
                               std::vector<Vector> samples,
                               std::optional<std::vector<Interval>> box)
    : evaluate_(std::move(evaluate)),
      delta_dim_(delta_dim),
      samples_(std::move(samples)),
      box_(std::move(box)) {
  if (!evaluate_) throw std::invalid_argument("UncertainPlant: missing evaluator");
  if (samples_.empty()) {
    if (delta_dim_ != 0) {
      throw std::invalid_argument("UncertainPlant: at least one delta sample required");
    }
    samples_.push_back(Vector::Zero(0));
  }
  if (box_ && static_cast<int>(box_->size()) != delta_dim_) {
    throw std::invalid_argument("UncertainPlant: delta_box dimension mismatch");
  }
  for (const auto& s : samples_) {
    if (s.size() != delta_dim_) {
      throw std::invalid_argument("UncertainPlant: sample " + format_delta(s) +
                                  " has wrong dimension");
    }
  }
  // Every sample must produce a consistent plant.
  const PlantMatrices first = evaluate_(samples_.front());
  for (const auto& s : samples_) {
    const PlantMatrices pm = evaluate_(s);
    if (pm.n() != first.n() || pm.m() != first.m() || pm.p() != first.p() ||
        pm.nw() != first.nw() || pm.pm() != first.pm()) {
      throw std::invalid_argument("UncertainPlant: dimensions change across samples");
    }
  }
}

UncertainPlant UncertainPlant::nominal(PlantMatrices pm) {
  pm = PlantMatrices::with_full_state_measurement(std::move(pm));
  pm.validate();
  return UncertainPlant([pm](const Vector&) { return pm; }, 0, {Vector::Zero(0)});
}

UncertainPlant UncertainPlant::affine(PlantMatrices nominal,
                                      std::vector<PlantMatrices> terms,
                                      std::vector<Vector> samples,
                                      std::optional<std::vector<Interval>> box) {
  nominal = PlantMatrices::with_full_state_measurement(std::move(nominal));
  nominal.validate();
  const int dim = static_cast<int>(terms.size());
  auto eval = [nominal, terms](const Vector& delta) {
    PlantMatrices pm = nominal;
    for (size_t k = 0; k < terms.size(); ++k) {
      const double d = delta(static_cast<Eigen::Index>(k));
      const PlantMatrices& t = terms[k];
      pm.A = add_term(pm.A, t.A, d);
      pm.B = add_term(pm.B, t.B, d);
      pm.Bw = add_term(pm.Bw, t.Bw, d);
      pm.C = add_term(pm.C, t.C, d);
      pm.D = add_term(pm.D, t.D, d);
      pm.Q = add_term(pm.Q, t.Q, d);
      pm.Cm = add_term(pm.Cm, t.Cm, d);
      pm.Dm = add_term(pm.Dm, t.Dm, d);
      pm.Qm = add_term(pm.Qm, t.Qm, d);
    }
    return pm;
  };
  if (samples.empty()) samples.push_back(Vector::Zero(dim));
  return UncertainPlant(eval, dim, std::move(samples), std::move(box));
}

PlantMatrices UncertainPlant::evaluate(const Vector& delta) const {
  if (delta.size() != delta_dim_) {
    throw std::invalid_argument("delta " + format_delta(delta) + " has dimension " +
                                std::to_string(delta.size()) + ", expected " +
                                std::to_string(delta_dim_));
  }
  if (box_) {
    for (int k = 0; k < delta_dim_; ++k) {
      const auto [lo, hi] = (*box_)[static_cast<size_t>(k)];
      if (delta(k) < lo - 1e-12 || delta(k) > hi + 1e-12) {
        throw std::invalid_argument("delta " + format_delta(delta) +
                                    " lies outside delta_box");
      }
    }
  }
  PlantMatrices pm = PlantMatrices::with_full_state_measurement(evaluate_(delta));
  pm.validate();
  return pm;
}

size_t UncertainPlant::nominal_index() const {
  for (size_t i = 0; i < samples_.size(); ++i) {
    if (samples_[i].size() == 0 || samples_[i].cwiseAbs().maxCoeff() == 0.0) return i;
  }
  return 0;
}

void UncertainPlant::add_box_corners() {
  if (!box_ || delta_dim_ == 0) return;
  const size_t corners = size_t{1} << delta_dim_;
  for (size_t mask = 0; mask < corners; ++mask) {
    Vector c(delta_dim_);
    for (int k = 0; k < delta_dim_; ++k) {
      const auto [lo, hi] = (*box_)[static_cast<size_t>(k)];
      c(k) = (mask >> k) & 1U ? hi : lo;
    }
    bool present = false;
    for (const auto& s : samples_) present = present || (s - c).cwiseAbs().maxCoeff() == 0.0;
    if (!present) samples_.push_back(c);
  }
}

PlantMatrices eval_plant(const UncertainPlant& up, const Vector& delta) {
  return up.evaluate(delta);
}

Matrix system_matrix(const PlantMatrices& pm) {
  Matrix s(pm.n() + pm.p(), pm.n() + pm.m());
  s << pm.A, pm.B, pm.C, pm.D;
  return s;
}

std::string format_delta(const Vector& delta) {
  std::ostringstream os;
  os << "(";
  for (Eigen::Index i = 0; i < delta.size(); ++i) {
    if (i) os << ", ";
    os << delta(i);
  }
  os << ")";
  return os.str();
}

}  // namespace oss
