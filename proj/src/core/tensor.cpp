#include "core/tensor.hpp"

#include <cmath>
#include <numeric>

namespace nevo {

namespace {

std::int64_t product(const std::vector<std::int64_t>& shape) {
  std::int64_t p = 1;
  for (auto d : shape) {
    if (d <= 0) raise(ErrorCode::shape_mismatch, "tensor dimensions must be positive");
    p *= d;
  }
  return p;
}

}  // namespace

Tensor::Tensor(std::vector<std::int64_t> shape, std::vector<double> data)
    : shape_(std::move(shape)), data_(std::move(data)) {
  if (product(shape_) != static_cast<std::int64_t>(data_.size()))
    raise(ErrorCode::shape_mismatch, "tensor data length does not match shape");
}

Tensor Tensor::zeros(std::vector<std::int64_t> shape) {
  const auto n = product(shape);
  return Tensor(std::move(shape), std::vector<double>(static_cast<std::size_t>(n), 0.0));
}

Tensor Tensor::from_mat(const Mat& m) {
  Tensor t = zeros({m.rows(), m.cols()});
  for (std::int64_t i = 0; i < m.rows(); ++i)
    for (std::int64_t j = 0; j < m.cols(); ++j) t.at(i, j) = m(i, j);
  return t;
}

double& Tensor::at(std::int64_t i, std::int64_t j) {
  return data_[static_cast<std::size_t>(i * shape_[1] + j)];
}

double Tensor::at(std::int64_t i, std::int64_t j) const {
  return data_[static_cast<std::size_t>(i * shape_[1] + j)];
}

double& Tensor::at(std::int64_t i, std::int64_t j, std::int64_t k) {
  return data_[static_cast<std::size_t>((i * shape_[1] + j) * shape_[2] + k)];
}

double Tensor::at(std::int64_t i, std::int64_t j, std::int64_t k) const {
  return data_[static_cast<std::size_t>((i * shape_[1] + j) * shape_[2] + k)];
}

Mat Tensor::as_mat() const {
  if (rank() != 2) raise(ErrorCode::shape_mismatch, "as_mat requires a rank-2 tensor");
  Mat m(shape_[0], shape_[1]);
  for (std::int64_t i = 0; i < shape_[0]; ++i)
    for (std::int64_t j = 0; j < shape_[1]; ++j) m(i, j) = at(i, j);
  return m;
}

Mat Tensor::slice_mat(std::int64_t index) const {
  if (rank() != 3) raise(ErrorCode::shape_mismatch, "slice_mat requires a rank-3 tensor");
  if (index < 0 || index >= shape_[0]) raise(ErrorCode::shape_mismatch, "slice index out of range");
  Mat m(shape_[1], shape_[2]);
  for (std::int64_t i = 0; i < shape_[1]; ++i)
    for (std::int64_t j = 0; j < shape_[2]; ++j) m(i, j) = at(index, i, j);
  return m;
}

bool Tensor::all_finite() const {
  for (double v : data_)
    if (!std::isfinite(v)) return false;
  return true;
}

}  // namespace nevo
