#include "core/autodiff.hpp"

#include <cmath>

namespace nevo {

int Tape::push(Mat value, std::function<void(Tape&, const Mat&)> backprop) {
  nodes_.push_back(Node{std::move(value), Mat(), std::move(backprop)});
  return static_cast<int>(nodes_.size()) - 1;
}

void Tape::accum(int id, const Mat& g) {
  Mat& adj = nodes_[static_cast<std::size_t>(id)].adj;
  if (adj.size() == 0)
    adj = g;
  else
    adj += g;
}

int Tape::leaf(Mat value) { return push(std::move(value), nullptr); }

int Tape::matmul(int a, int b) {
  Mat v = val(a) * val(b);
  return push(std::move(v), [a, b](Tape& t, const Mat& g) {
    t.accum(a, g * t.val(b).transpose());
    t.accum(b, t.val(a).transpose() * g);
  });
}

int Tape::add(int a, int b) {
  Mat v = val(a) + val(b);
  return push(std::move(v), [a, b](Tape& t, const Mat& g) {
    t.accum(a, g);
    t.accum(b, g);
  });
}

int Tape::sub(int a, int b) {
  Mat v = val(a) - val(b);
  return push(std::move(v), [a, b](Tape& t, const Mat& g) {
    t.accum(a, g);
    t.accum(b, Mat(-g));
  });
}

int Tape::cmul(int a, int b) {
  Mat v = val(a).cwiseProduct(val(b));
  return push(std::move(v), [a, b](Tape& t, const Mat& g) {
    t.accum(a, g.cwiseProduct(t.val(b)));
    t.accum(b, g.cwiseProduct(t.val(a)));
  });
}

int Tape::scale(int a, double s) {
  Mat v = val(a) * s;
  return push(std::move(v), [a, s](Tape& t, const Mat& g) { t.accum(a, Mat(g * s)); });
}

int Tape::add_rowvec(int a, int row) {
  Mat v = val(a);
  v.rowwise() += val(row).row(0);
  return push(std::move(v), [a, row](Tape& t, const Mat& g) {
    t.accum(a, g);
    t.accum(row, Mat(g.colwise().sum()));
  });
}

int Tape::tanh_(int a) {
  Mat v = val(a).array().tanh().matrix();
  const int self_hint = static_cast<int>(nodes_.size());
  return push(std::move(v), [a, self_hint](Tape& t, const Mat& g) {
    const Mat& y = t.val(self_hint);
    t.accum(a, Mat(g.cwiseProduct((1.0 - y.array().square()).matrix())));
  });
}

int Tape::sigmoid_(int a) {
  Mat v = (1.0 / (1.0 + (-val(a).array()).exp())).matrix();
  const int self_hint = static_cast<int>(nodes_.size());
  return push(std::move(v), [a, self_hint](Tape& t, const Mat& g) {
    const Mat& y = t.val(self_hint);
    t.accum(a, Mat(g.cwiseProduct((y.array() * (1.0 - y.array())).matrix())));
  });
}

int Tape::softmax_rows(int a) {
  Mat v = val(a);
  for (Eigen::Index i = 0; i < v.rows(); ++i) {
    const double m = v.row(i).maxCoeff();
    v.row(i) = (v.row(i).array() - m).exp();
    v.row(i) /= v.row(i).sum();
  }
  const int self_hint = static_cast<int>(nodes_.size());
  return push(std::move(v), [a, self_hint](Tape& t, const Mat& g) {
    const Mat& y = t.val(self_hint);
    Mat out(g.rows(), g.cols());
    for (Eigen::Index i = 0; i < g.rows(); ++i) {
      const double dot = g.row(i).cwiseProduct(y.row(i)).sum();
      out.row(i) = (g.row(i).array() - dot) * y.row(i).array();
    }
    t.accum(a, out);
  });
}

int Tape::transpose_(int a) {
  Mat v = val(a).transpose();
  return push(std::move(v), [a](Tape& t, const Mat& g) { t.accum(a, Mat(g.transpose())); });
}

int Tape::concat_cols(const std::vector<int>& ids) {
  Eigen::Index rows = val(ids.front()).rows(), cols = 0;
  for (int id : ids) cols += val(id).cols();
  Mat v(rows, cols);
  Eigen::Index c = 0;
  for (int id : ids) {
    v.middleCols(c, val(id).cols()) = val(id);
    c += val(id).cols();
  }
  return push(std::move(v), [ids](Tape& t, const Mat& g) {
    Eigen::Index c = 0;
    for (int id : ids) {
      const Eigen::Index w = t.val(id).cols();
      t.accum(id, Mat(g.middleCols(c, w)));
      c += w;
    }
  });
}

int Tape::concat_rows(const std::vector<int>& ids) {
  Eigen::Index cols = val(ids.front()).cols(), rows = 0;
  for (int id : ids) rows += val(id).rows();
  Mat v(rows, cols);
  Eigen::Index r = 0;
  for (int id : ids) {
    v.middleRows(r, val(id).rows()) = val(id);
    r += val(id).rows();
  }
  return push(std::move(v), [ids](Tape& t, const Mat& g) {
    Eigen::Index r = 0;
    for (int id : ids) {
      const Eigen::Index h = t.val(id).rows();
      t.accum(id, Mat(g.middleRows(r, h)));
      r += h;
    }
  });
}

int Tape::slice_cols(int a, int c0, int len) {
  Mat v = val(a).middleCols(c0, len);
  return push(std::move(v), [a, c0, len](Tape& t, const Mat& g) {
    Mat full = Mat::Zero(t.val(a).rows(), t.val(a).cols());
    full.middleCols(c0, len) = g;
    t.accum(a, full);
  });
}

int Tape::slice_rows(int a, int r0, int len) {
  Mat v = val(a).middleRows(r0, len);
  return push(std::move(v), [a, r0, len](Tape& t, const Mat& g) {
    Mat full = Mat::Zero(t.val(a).rows(), t.val(a).cols());
    full.middleRows(r0, len) = g;
    t.accum(a, full);
  });
}

int Tape::im2col(int a, int k) {
  const Mat& x = val(a);
  const Eigen::Index rows = x.rows(), chans = x.cols();
  const int half = k / 2;
  Mat v = Mat::Zero(rows, static_cast<Eigen::Index>(k) * chans);
  for (Eigen::Index t = 0; t < rows; ++t)
    for (int j = 0; j < k; ++j) {
      const Eigen::Index src = t + j - half;
      if (src < 0 || src >= rows) continue;
      v.block(t, static_cast<Eigen::Index>(j) * chans, 1, chans) = x.row(src);
    }
  return push(std::move(v), [a, k, half](Tape& t, const Mat& g) {
    const Eigen::Index rows = t.val(a).rows(), chans = t.val(a).cols();
    Mat full = Mat::Zero(rows, chans);
    for (Eigen::Index r = 0; r < rows; ++r)
      for (int j = 0; j < k; ++j) {
        const Eigen::Index src = r + j - half;
        if (src < 0 || src >= rows) continue;
        full.row(src) += g.block(r, static_cast<Eigen::Index>(j) * chans, 1, chans);
      }
    t.accum(a, full);
  });
}

int Tape::sum_sq(int a) {
  Mat v(1, 1);
  v(0, 0) = val(a).array().square().sum();
  return push(std::move(v), [a](Tape& t, const Mat& g) {
    t.accum(a, Mat(2.0 * g(0, 0) * t.val(a)));
  });
}

int Tape::mean_all(int a) {
  Mat v(1, 1);
  v(0, 0) = val(a).mean();
  return push(std::move(v), [a](Tape& t, const Mat& g) {
    const double s = g(0, 0) / static_cast<double>(t.val(a).size());
    t.accum(a, Mat(Mat::Constant(t.val(a).rows(), t.val(a).cols(), s)));
  });
}

void Tape::backward(int root) {
  if (val(root).size() != 1)
    raise(ErrorCode::shape_mismatch, "backward root must be a scalar node");
  for (auto& n : nodes_) n.adj = Mat();
  nodes_[static_cast<std::size_t>(root)].adj = Mat::Ones(1, 1);
  for (int id = root; id >= 0; --id) {
    Node& n = nodes_[static_cast<std::size_t>(id)];
    if (n.adj.size() == 0 || !n.backprop) continue;
    n.backprop(*this, n.adj);
  }
}

Mat Tape::grad(int id) const {
  const Node& n = nodes_[static_cast<std::size_t>(id)];
  if (n.adj.size() == 0) return Mat::Zero(n.value.rows(), n.value.cols());
  return n.adj;
}

}  // namespace nevo
