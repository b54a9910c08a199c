#pragma once

#include <functional>
#include <vector>

#include "core/tensor.hpp"

namespace nevo {

// Append-only reverse-mode tape over dense matrices. Node ids are tape
// indices, so construction order is already a topological order and the
// backward sweep is a single reverse pass.
class Tape {
 public:
  int leaf(Mat value);

  int matmul(int a, int b);
  int add(int a, int b);
  int sub(int a, int b);
  int cmul(int a, int b);
  int scale(int a, double s);
  int add_rowvec(int a, int row);   // row is 1 x cols(a)
  int tanh_(int a);
  int sigmoid_(int a);
  int softmax_rows(int a);
  int transpose_(int a);
  int concat_cols(const std::vector<int>& ids);
  int concat_rows(const std::vector<int>& ids);
  int slice_cols(int a, int c0, int len);
  int slice_rows(int a, int r0, int len);
  // Unfolds (T x C) into (T x k*C) with zero padding, kernel centered.
  int im2col(int a, int k);
  int sum_sq(int a);   // 1x1
  int mean_all(int a); // 1x1

  void backward(int root);

  const Mat& value(int id) const { return nodes_[static_cast<std::size_t>(id)].value; }
  // Zero matrix if the node was never reached by the sweep.
  Mat grad(int id) const;

  std::size_t size() const { return nodes_.size(); }

 private:
  struct Node {
    Mat value;
    Mat adj;  // empty until touched by backward
    std::function<void(Tape&, const Mat&)> backprop;
  };

  int push(Mat value, std::function<void(Tape&, const Mat&)> backprop);
  void accum(int id, const Mat& g);
  const Mat& val(int id) const { return nodes_[static_cast<std::size_t>(id)].value; }

  std::vector<Node> nodes_;
};

}  // namespace nevo
