#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <vector>

#include "util/error.hpp"

namespace nevo {

using Mat = Eigen::MatrixXd;

// Dense row-major tensor of doubles. Rank 3 tensors carry window batches as
// (count, window, width); rank 2 are plain matrices.
class Tensor {
 public:
  Tensor() = default;
  Tensor(std::vector<std::int64_t> shape, std::vector<double> data);

  static Tensor zeros(std::vector<std::int64_t> shape);
  static Tensor from_mat(const Mat& m);

  const std::vector<std::int64_t>& shape() const { return shape_; }
  const std::vector<double>& data() const { return data_; }
  std::vector<double>& data() { return data_; }

  std::int64_t rank() const { return static_cast<std::int64_t>(shape_.size()); }
  std::int64_t size() const { return static_cast<std::int64_t>(data_.size()); }
  std::int64_t dim(std::size_t i) const { return shape_.at(i); }

  double& at(std::int64_t i, std::int64_t j);
  double at(std::int64_t i, std::int64_t j) const;
  double& at(std::int64_t i, std::int64_t j, std::int64_t k);
  double at(std::int64_t i, std::int64_t j, std::int64_t k) const;

  // Rank-2 view / rank-3 slice as an Eigen matrix (copies).
  Mat as_mat() const;
  Mat slice_mat(std::int64_t index) const;

  bool all_finite() const;

 private:
  std::vector<std::int64_t> shape_;
  std::vector<double> data_;
};

}  // namespace nevo
