#include "core/layers.hpp"

#include <cmath>

#include "util/error.hpp"

namespace nevo {

const char* to_string(InstanceKind k) {
  switch (k) {
    case InstanceKind::dense: return "dense";
    case InstanceKind::conv1d: return "conv1d";
    case InstanceKind::lstm: return "lstm";
    case InstanceKind::attention: return "attention";
    case InstanceKind::graph_node: return "graph-node";
  }
  return "?";
}

Layer::Param& Layer::add_param(int rows, int cols, double init_bound) {
  params_.push_back(Param{Mat::Zero(rows, cols), init_bound, -1});
  return params_.back();
}

std::size_t Layer::weight_count() const {
  std::size_t n = 0;
  for (const auto& p : params_) n += static_cast<std::size_t>(p.value.size());
  return n;
}

void Layer::get_weights(double* out) const {
  for (const auto& p : params_) {
    std::copy(p.value.data(), p.value.data() + p.value.size(), out);
    out += p.value.size();
  }
}

void Layer::set_weights(const double* in) {
  for (auto& p : params_) {
    std::copy(in, in + p.value.size(), p.value.data());
    in += p.value.size();
  }
}

void Layer::init_weights(RandomSource& rng) {
  for (auto& p : params_) {
    if (p.init_bound == 0.0) {
      p.value.setZero();
      continue;
    }
    for (Eigen::Index i = 0; i < p.value.size(); ++i)
      p.value.data()[i] = rng.uniform(-p.init_bound, p.init_bound);
  }
}

void Layer::bind(Tape& t) {
  for (auto& p : params_) p.bound_id = t.leaf(p.value);
}

void Layer::read_grads(const Tape& t, double* out) const {
  for (const auto& p : params_) {
    const Mat g = t.grad(p.bound_id);
    std::copy(g.data(), g.data() + g.size(), out);
    out += g.size();
  }
}

// ---- dense ----

DenseLayer::DenseLayer(int in, int out) : in_(in), out_(out) {
  const double bound = 1.0 / std::sqrt(static_cast<double>(in));
  add_param(in, out, bound);  // W
  add_param(1, out, 0.0);     // b
}

Mat DenseLayer::forward(const Mat& x) const {
  Mat y = x * params_[0].value;
  y.rowwise() += params_[1].value.row(0);
  return y;
}

int DenseLayer::forward_tape(Tape& t, int x) const {
  return t.add_rowvec(t.matmul(x, params_[0].bound_id), params_[1].bound_id);
}

// ---- conv1d ----

Mat im2col_mat(const Mat& x, int k) {
  const Eigen::Index rows = x.rows(), chans = x.cols();
  const int half = k / 2;
  Mat v = Mat::Zero(rows, static_cast<Eigen::Index>(k) * chans);
  for (Eigen::Index t = 0; t < rows; ++t)
    for (int j = 0; j < k; ++j) {
      const Eigen::Index src = t + j - half;
      if (src < 0 || src >= rows) continue;
      v.block(t, static_cast<Eigen::Index>(j) * chans, 1, chans) = x.row(src);
    }
  return v;
}

Conv1dLayer::Conv1dLayer(int in, int out, int kernel) : in_(in), out_(out), kernel_(kernel) {
  if (kernel < 1 || kernel % 2 == 0)
    raise(ErrorCode::invalid_genome, "conv1d kernel must be odd and >= 1");
  const double bound = 1.0 / std::sqrt(static_cast<double>(in * kernel));
  add_param(kernel * in, out, bound);  // W, row index j*in + c
  add_param(1, out, 0.0);              // b
}

Mat Conv1dLayer::forward(const Mat& x) const {
  Mat y = im2col_mat(x, kernel_) * params_[0].value;
  y.rowwise() += params_[1].value.row(0);
  return y;
}

int Conv1dLayer::forward_tape(Tape& t, int x) const {
  return t.add_rowvec(t.matmul(t.im2col(x, kernel_), params_[0].bound_id),
                      params_[1].bound_id);
}

// ---- lstm ----

LstmLayer::LstmLayer(int in, int hidden) : in_(in), hidden_(hidden) {
  const double bx = 1.0 / std::sqrt(static_cast<double>(in));
  const double bh = 1.0 / std::sqrt(static_cast<double>(hidden));
  add_param(in, 4 * hidden, bx);      // Wx, gate order [i f g o]
  add_param(hidden, 4 * hidden, bh);  // Wh
  add_param(1, 4 * hidden, 0.0);      // b
}

Mat LstmLayer::forward(const Mat& x) const {
  const Eigen::Index steps = x.rows();
  const int H = hidden_;
  Mat out(steps, H);
  Mat h = Mat::Zero(1, H), c = Mat::Zero(1, H);
  for (Eigen::Index s = 0; s < steps; ++s) {
    Mat z = x.row(s) * params_[0].value + h * params_[1].value + params_[2].value;
    const auto sig = [](double v) { return 1.0 / (1.0 + std::exp(-v)); };
    Mat i = z.middleCols(0, H).unaryExpr(sig);
    Mat f = z.middleCols(H, H).unaryExpr(sig);
    Mat g = z.middleCols(2 * H, H).array().tanh().matrix();
    Mat o = z.middleCols(3 * H, H).unaryExpr(sig);
    c = f.cwiseProduct(c) + i.cwiseProduct(g);
    h = o.cwiseProduct(c.array().tanh().matrix());
    out.row(s) = h;
  }
  return out;
}

int LstmLayer::forward_tape(Tape& t, int x) const {
  const int steps = static_cast<int>(t.value(x).rows());
  const int H = hidden_;
  int h = t.leaf(Mat::Zero(1, H));
  int c = t.leaf(Mat::Zero(1, H));
  std::vector<int> rows;
  rows.reserve(static_cast<std::size_t>(steps));
  for (int s = 0; s < steps; ++s) {
    const int xs = t.slice_rows(x, s, 1);
    int z = t.add(t.matmul(xs, params_[0].bound_id), t.matmul(h, params_[1].bound_id));
    z = t.add_rowvec(z, params_[2].bound_id);
    const int i = t.sigmoid_(t.slice_cols(z, 0, H));
    const int f = t.sigmoid_(t.slice_cols(z, H, H));
    const int g = t.tanh_(t.slice_cols(z, 2 * H, H));
    const int o = t.sigmoid_(t.slice_cols(z, 3 * H, H));
    c = t.add(t.cmul(f, c), t.cmul(i, g));
    h = t.cmul(o, t.tanh_(c));
    rows.push_back(h);
  }
  return t.concat_rows(rows);
}

// ---- attention ----

int AttentionLayer::head_count(int width) {
  if (width % 4 == 0) return 4;
  if (width % 2 == 0) return 2;
  return 1;
}

AttentionLayer::AttentionLayer(int width) : width_(width), heads_(head_count(width)) {
  const double bound = 1.0 / std::sqrt(static_cast<double>(width));
  for (int i = 0; i < 4; ++i) {
    add_param(width, width, bound);  // Wq, Wk, Wv, Wo
    add_param(1, width, 0.0);        // matching bias
  }
}

Mat AttentionLayer::forward(const Mat& x) const {
  const int d = width_, hd = d / heads_;
  const double inv = 1.0 / std::sqrt(static_cast<double>(hd));
  auto proj = [&](int p) {
    Mat y = x * params_[static_cast<std::size_t>(2 * p)].value;
    y.rowwise() += params_[static_cast<std::size_t>(2 * p + 1)].value.row(0);
    return y;
  };
  const Mat q = proj(0), k = proj(1), v = proj(2);
  Mat heads(x.rows(), d);
  for (int hidx = 0; hidx < heads_; ++hidx) {
    const auto qs = q.middleCols(hidx * hd, hd);
    const auto ks = k.middleCols(hidx * hd, hd);
    const auto vs = v.middleCols(hidx * hd, hd);
    Mat scores = qs * ks.transpose() * inv;
    for (Eigen::Index r = 0; r < scores.rows(); ++r) {
      const double m = scores.row(r).maxCoeff();
      scores.row(r) = (scores.row(r).array() - m).exp();
      scores.row(r) /= scores.row(r).sum();
    }
    heads.middleCols(hidx * hd, hd) = scores * vs;
  }
  Mat out = heads * params_[6].value;
  out.rowwise() += params_[7].value.row(0);
  return x + out;
}

int AttentionLayer::forward_tape(Tape& t, int x) const {
  const int d = width_, hd = d / heads_;
  const double inv = 1.0 / std::sqrt(static_cast<double>(hd));
  auto proj = [&](int p) {
    return t.add_rowvec(t.matmul(x, params_[static_cast<std::size_t>(2 * p)].bound_id),
                        params_[static_cast<std::size_t>(2 * p + 1)].bound_id);
  };
  const int q = proj(0), k = proj(1), v = proj(2);
  std::vector<int> heads;
  heads.reserve(static_cast<std::size_t>(heads_));
  for (int hidx = 0; hidx < heads_; ++hidx) {
    const int qs = t.slice_cols(q, hidx * hd, hd);
    const int ks = t.slice_cols(k, hidx * hd, hd);
    const int vs = t.slice_cols(v, hidx * hd, hd);
    const int att = t.softmax_rows(t.scale(t.matmul(qs, t.transpose_(ks)), inv));
    heads.push_back(t.matmul(att, vs));
  }
  const int merged = heads.size() == 1 ? heads[0] : t.concat_cols(heads);
  const int out = t.add_rowvec(t.matmul(merged, params_[6].bound_id), params_[7].bound_id);
  return t.add(x, out);
}

}  // namespace nevo
