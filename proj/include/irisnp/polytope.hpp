#pragma once

#include <stdexcept>
#include <utility>

#include <Eigen/Core>

namespace irisnp {

struct Hyperplane {
  Eigen::VectorXd a;  // outward normal
  double b = 0.0;     // offset: the halfspace is a·x ≤ b
};

// Intersection of halfspaces {x | Ax ≤ b}.
class HPolyhedron {
 public:
  HPolyhedron() = default;

  HPolyhedron(Eigen::MatrixXd A, Eigen::VectorXd b)
      : A_(std::move(A)), b_(std::move(b)) {
    if (A_.rows() != b_.size())
      throw std::invalid_argument("HPolyhedron: row count of A must equal length of b");
  }

  static HPolyhedron Box(const Eigen::VectorXd& lower, const Eigen::VectorXd& upper) {
    if (lower.size() != upper.size())
      throw std::invalid_argument("HPolyhedron::Box: dimension mismatch");
    const int n = static_cast<int>(lower.size());
    Eigen::MatrixXd A(2 * n, n);
    A << Eigen::MatrixXd::Identity(n, n), -Eigen::MatrixXd::Identity(n, n);
    Eigen::VectorXd b(2 * n);
    b << upper, -lower;
    return HPolyhedron(std::move(A), std::move(b));
  }

  const Eigen::MatrixXd& A() const { return A_; }
  const Eigen::VectorXd& b() const { return b_; }
  int dim() const { return static_cast<int>(A_.cols()); }
  int rows() const { return static_cast<int>(A_.rows()); }

  bool contains(const Eigen::VectorXd& x, double tol = 0.0) const {
    if (x.size() != A_.cols())
      throw std::invalid_argument("HPolyhedron::contains: dimension mismatch");
    return ((A_ * x - b_).array() <= tol).all();
  }

  void add_hyperplane(const Hyperplane& h) {
    if (h.a.size() != A_.cols())
      throw std::invalid_argument("HPolyhedron::add_hyperplane: dimension mismatch");
    A_.conservativeResize(A_.rows() + 1, Eigen::NoChange);
    A_.row(A_.rows() - 1) = h.a.transpose();
    b_.conservativeResize(b_.size() + 1);
    b_[b_.size() - 1] = h.b;
  }

  static HPolyhedron Intersection(const HPolyhedron& p, const HPolyhedron& q) {
    if (p.dim() != q.dim())
      throw std::invalid_argument("HPolyhedron::Intersection: dimension mismatch");
    Eigen::MatrixXd A(p.rows() + q.rows(), p.dim());
    A << p.A(), q.A();
    Eigen::VectorXd b(p.rows() + q.rows());
    b << p.b(), q.b();
    return HPolyhedron(std::move(A), std::move(b));
  }

 private:
  Eigen::MatrixXd A_;
  Eigen::VectorXd b_;
};

}  // namespace irisnp
