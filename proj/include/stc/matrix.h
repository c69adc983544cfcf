#pragma once

#include <cstddef>
#include <stdexcept>
#include <vector>

namespace stc {

// Dense row-major matrix of doubles; just enough linear algebra for the
// frame classifier and the loss interfaces.
class Matrix {
 public:
  Matrix() = default;
  Matrix(int rows, int cols, double fill = 0.0)
      : rows_(rows), cols_(cols), v_(static_cast<size_t>(rows) * cols, fill) {
    if (rows < 0 || cols < 0) {
      throw std::invalid_argument("negative matrix dimension");
    }
  }

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  double& at(int r, int c) { return v_[static_cast<size_t>(r) * cols_ + c]; }
  double at(int r, int c) const {
    return v_[static_cast<size_t>(r) * cols_ + c];
  }
  double* row(int r) { return v_.data() + static_cast<size_t>(r) * cols_; }
  const double* row(int r) const {
    return v_.data() + static_cast<size_t>(r) * cols_;
  }

  std::vector<double>& data() { return v_; }
  const std::vector<double>& data() const { return v_; }
  size_t size() const { return v_.size(); }

  bool sameShape(const Matrix& o) const {
    return rows_ == o.rows_ && cols_ == o.cols_;
  }

 private:
  int rows_ = 0;
  int cols_ = 0;
  std::vector<double> v_;
};

} // namespace stc
