#include "core/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "util/error.hpp"

namespace nevo {

namespace {

// Structural validity only; range limits are an evolution concern.
GenomeLimits permissive_limits() {
  GenomeLimits lim;
  lim.window_min = 1;
  lim.window_max = std::numeric_limits<int>::max() / 2;
  lim.layers_max = std::numeric_limits<int>::max() / 2;
  lim.channels_max = std::numeric_limits<int>::max() / 2;
  lim.graph_dim_min = 1;
  lim.graph_dim_max = std::numeric_limits<int>::max() / 2;
  return lim;
}

std::unique_ptr<Layer> make_base_layer(const LayerGene& gene) {
  switch (gene.kind) {
    case LayerKind::dense: return std::make_unique<DenseLayer>(gene.in_channels, gene.out_channels);
    case LayerKind::conv1d:
      return std::make_unique<Conv1dLayer>(gene.in_channels, gene.out_channels, gene.kernel);
    case LayerKind::lstm: return std::make_unique<LstmLayer>(gene.in_channels, gene.out_channels);
  }
  raise(ErrorCode::invalid_genome, "unknown layer kind");
}

std::unique_ptr<Layer> make_decoder_layer(const DecoderLayerSpec& spec) {
  switch (spec.kind) {
    case LayerKind::dense: return std::make_unique<DenseLayer>(spec.in_channels, spec.out_channels);
    case LayerKind::conv1d:
      return std::make_unique<Conv1dLayer>(spec.in_channels, spec.out_channels, spec.kernel);
    case LayerKind::lstm: return std::make_unique<LstmLayer>(spec.in_channels, spec.out_channels);
  }
  raise(ErrorCode::invalid_genome, "unknown layer kind");
}

bool wants_tanh(InstanceKind k) {
  return k == InstanceKind::dense || k == InstanceKind::conv1d;
}

// Encoder stack, mirrored decoder, skip/dense combining per level.
class VanillaNet final : public Network {
 public:
  VanillaNet(const Genome& genome) : genome_(genome) {
    const int L = genome.length();
    for (int l = 0; l < L; ++l) {
      encoder_.push_back(make_base_layer(genome.encoder_genes[static_cast<std::size_t>(l)]));
      if (genome.has_attention(l))
        attention_.emplace_back(
            l, std::make_unique<AttentionLayer>(
                   genome.encoder_genes[static_cast<std::size_t>(l)].out_channels));
    }
    for (const auto& spec : mirror_decoder(genome)) decoder_.push_back(make_decoder_layer(spec));
  }

  VanillaNet(const VanillaNet& other) : genome_(other.genome_) {
    for (const auto& l : other.encoder_) encoder_.push_back(l->clone());
    for (const auto& [lvl, l] : other.attention_) attention_.emplace_back(lvl, l->clone());
    for (const auto& l : other.decoder_) decoder_.push_back(l->clone());
  }

  int input_width() const override { return genome_.input_width(); }

  std::size_t weight_count() const override {
    std::size_t n = 0;
    for_each_layer([&n](const Layer& l) { n += l.weight_count(); });
    return n;
  }

  void get_weights(double* out) const override {
    for_each_layer([&out](const Layer& l) {
      l.get_weights(out);
      out += l.weight_count();
    });
  }

  void set_weights(const double* in) override {
    for_each_layer_mut([&in](Layer& l) {
      l.set_weights(in);
      in += l.weight_count();
    });
  }

  void init_weights(std::uint64_t seed) override {
    Rng rng(seed);
    for_each_layer_mut([&rng](Layer& l) { l.init_weights(rng); });
  }

  std::vector<LayerInfo> layer_infos() const override {
    std::vector<LayerInfo> infos;
    std::size_t offset = 0;
    for_each_layer([&](const Layer& l) {
      infos.push_back(LayerInfo{l.kind(), l.in_channels(), l.out_channels(), offset,
                                l.weight_count(), l.aux_description()});
      offset += l.weight_count();
    });
    return infos;
  }

  Mat forward_window(const Mat& x) const override {
    const int L = genome_.length();
    std::vector<Mat> enc_out(static_cast<std::size_t>(L));
    Mat h = x;
    for (int l = 0; l < L; ++l) {
      h = encoder_[static_cast<std::size_t>(l)]->forward(h);
      if (wants_tanh(encoder_[static_cast<std::size_t>(l)]->kind()))
        h = h.array().tanh().matrix();
      if (const Layer* attn = attention_at(l)) h = attn->forward(h);
      enc_out[static_cast<std::size_t>(l)] = h;
    }
    Mat d = enc_out[static_cast<std::size_t>(L - 1)];
    for (int i = 0; i < L; ++i) {
      const int level = L - 1 - i;
      if (const ConnectionGene* c = genome_.connection_at(level)) {
        const Mat& e = enc_out[static_cast<std::size_t>(level)];
        if (c->kind == ConnectionKind::skip) {
          d = e + d;
        } else {
          Mat cat(d.rows(), e.cols() + d.cols());
          cat << e, d;
          d = cat;
        }
      }
      d = decoder_[static_cast<std::size_t>(i)]->forward(d);
      if (i + 1 < L && wants_tanh(decoder_[static_cast<std::size_t>(i)]->kind()))
        d = d.array().tanh().matrix();
    }
    return d;
  }

  void bind(Tape& t) override {
    for_each_layer_mut([&t](Layer& l) { l.bind(t); });
  }

  int forward_tape(Tape& t, int x) const override {
    const int L = genome_.length();
    std::vector<int> enc_out(static_cast<std::size_t>(L));
    int h = x;
    for (int l = 0; l < L; ++l) {
      h = encoder_[static_cast<std::size_t>(l)]->forward_tape(t, h);
      if (wants_tanh(encoder_[static_cast<std::size_t>(l)]->kind())) h = t.tanh_(h);
      if (const Layer* attn = attention_at(l)) h = attn->forward_tape(t, h);
      enc_out[static_cast<std::size_t>(l)] = h;
    }
    int d = enc_out[static_cast<std::size_t>(L - 1)];
    for (int i = 0; i < L; ++i) {
      const int level = L - 1 - i;
      if (const ConnectionGene* c = genome_.connection_at(level)) {
        const int e = enc_out[static_cast<std::size_t>(level)];
        d = (c->kind == ConnectionKind::skip) ? t.add(e, d) : t.concat_cols({e, d});
      }
      d = decoder_[static_cast<std::size_t>(i)]->forward_tape(t, d);
      if (i + 1 < L && wants_tanh(decoder_[static_cast<std::size_t>(i)]->kind())) d = t.tanh_(d);
    }
    return d;
  }

  void read_grads(const Tape& t, double* out) const override {
    for_each_layer([&](const Layer& l) {
      l.read_grads(t, out);
      out += l.weight_count();
    });
  }

  std::unique_ptr<Network> clone() const override { return std::make_unique<VanillaNet>(*this); }

 private:
  const Layer* attention_at(int level) const {
    for (const auto& [lvl, l] : attention_)
      if (lvl == level) return l.get();
    return nullptr;
  }

  // Canonical order: encoder base + attention per level, then decoder.
  template <typename Fn>
  void for_each_layer(Fn&& fn) const {
    for (int l = 0; l < genome_.length(); ++l) {
      fn(*encoder_[static_cast<std::size_t>(l)]);
      if (const Layer* attn = attention_at(l)) fn(*attn);
    }
    for (const auto& d : decoder_) fn(*d);
  }

  template <typename Fn>
  void for_each_layer_mut(Fn&& fn) {
    for (int l = 0; l < genome_.length(); ++l) {
      fn(*encoder_[static_cast<std::size_t>(l)]);
      for (auto& [lvl, attn] : attention_)
        if (lvl == l) fn(*attn);
    }
    for (auto& d : decoder_) fn(*d);
  }

  Genome genome_;
  std::vector<std::unique_ptr<Layer>> encoder_;
  std::vector<std::pair<int, std::unique_ptr<Layer>>> attention_;
  std::vector<std::unique_ptr<Layer>> decoder_;
};

// Per-sensor node functions plus input-space neighbor messages: the
// reconstruction of sensor j is node_j(x_j) + sum over neighbors k of
// message_k(x_k).
class GraphNet final : public Network {
 public:
  GraphNet(const Genome& genome, int sensors) : genome_(genome), sensors_(sensors) {
    const int w = genome.window;
    for (const auto& [in, out] : genome.graph_dims()) enc_dims_.emplace_back(in, out);
    for (auto it = enc_dims_.rbegin(); it != enc_dims_.rend(); ++it)
      dec_dims_.emplace_back(it->second, it->first);

    auto make_block = [&](const std::vector<std::pair<int, int>>& dims) {
      std::vector<std::vector<Mat>> block;  // [level][sensor*2 + {W,b}]
      for (const auto& [in, out] : dims) {
        std::vector<Mat> level;
        for (int j = 0; j < sensors; ++j) {
          level.push_back(Mat::Zero(in, out));
          level.push_back(Mat::Zero(1, out));
        }
        block.push_back(std::move(level));
      }
      return block;
    };
    enc_ = make_block(enc_dims_);
    dec_ = make_block(dec_dims_);
    for (int k = 0; k < sensors; ++k) {
      messages_.push_back(Mat::Zero(w, w));
      messages_.push_back(Mat::Zero(1, w));
    }
    neighbors_.resize(static_cast<std::size_t>(sensors));
    for (int j = 0; j < sensors; ++j)
      for (int k = 0; k < sensors; ++k)
        if (k != j) neighbors_[static_cast<std::size_t>(j)].push_back(k);
  }

  int input_width() const override { return sensors_; }

  std::size_t weight_count() const override {
    std::size_t n = 0;
    for_each_mat([&n](const Mat& m) { n += static_cast<std::size_t>(m.size()); });
    return n;
  }

  void get_weights(double* out) const override {
    for_each_mat([&out](const Mat& m) {
      std::copy(m.data(), m.data() + m.size(), out);
      out += m.size();
    });
  }

  void set_weights(const double* in) override {
    for_each_mat_mut([&in](Mat& m) {
      std::copy(in, in + m.size(), m.data());
      in += m.size();
    });
  }

  void init_weights(std::uint64_t seed) override {
    Rng rng(seed);
    auto init_block = [&rng](std::vector<std::vector<Mat>>& block) {
      for (auto& level : block)
        for (std::size_t i = 0; i < level.size(); i += 2) {
          const double bound = 1.0 / std::sqrt(static_cast<double>(level[i].rows()));
          for (Eigen::Index n = 0; n < level[i].size(); ++n)
            level[i].data()[n] = rng.uniform(-bound, bound);
          level[i + 1].setZero();
        }
    };
    init_block(enc_);
    init_block(dec_);
    for (std::size_t i = 0; i < messages_.size(); i += 2) {
      const double bound = 1.0 / std::sqrt(static_cast<double>(messages_[i].rows()));
      for (Eigen::Index n = 0; n < messages_[i].size(); ++n)
        messages_[i].data()[n] = rng.uniform(-bound, bound);
      messages_[i + 1].setZero();
    }
  }

  std::vector<LayerInfo> layer_infos() const override {
    std::vector<LayerInfo> infos;
    std::size_t offset = 0;
    auto block_infos = [&](const std::vector<std::vector<Mat>>& block,
                           const std::vector<std::pair<int, int>>& dims, const char* tag) {
      for (std::size_t lvl = 0; lvl < block.size(); ++lvl) {
        std::size_t count = 0;
        for (const Mat& m : block[lvl]) count += static_cast<std::size_t>(m.size());
        infos.push_back(LayerInfo{InstanceKind::graph_node, dims[lvl].first, dims[lvl].second,
                                  offset, count,
                                  std::string(tag) + " sensors=" + std::to_string(sensors_)});
        offset += count;
      }
    };
    block_infos(enc_, enc_dims_, "enc");
    block_infos(dec_, dec_dims_, "dec");
    std::size_t msg_count = 0;
    for (const Mat& m : messages_) msg_count += static_cast<std::size_t>(m.size());
    infos.push_back(LayerInfo{InstanceKind::graph_node, genome_.window, genome_.window, offset,
                              msg_count, "messages neighbors=all"});
    return infos;
  }

  Mat forward_window(const Mat& x) const override {
    const int w = genome_.window;
    std::vector<Mat> msg(static_cast<std::size_t>(sensors_));
    for (int k = 0; k < sensors_; ++k)
      msg[static_cast<std::size_t>(k)] =
          x.col(k).transpose() * messages_[static_cast<std::size_t>(2 * k)] +
          messages_[static_cast<std::size_t>(2 * k + 1)];
    Mat out(w, sensors_);
    for (int j = 0; j < sensors_; ++j) {
      Mat v = x.col(j).transpose();
      for (std::size_t lvl = 0; lvl < enc_.size(); ++lvl) {
        v = v * enc_[lvl][static_cast<std::size_t>(2 * j)] +
            enc_[lvl][static_cast<std::size_t>(2 * j + 1)];
        v = v.array().tanh().matrix();
      }
      for (std::size_t lvl = 0; lvl < dec_.size(); ++lvl) {
        v = v * dec_[lvl][static_cast<std::size_t>(2 * j)] +
            dec_[lvl][static_cast<std::size_t>(2 * j + 1)];
        if (lvl + 1 < dec_.size()) v = v.array().tanh().matrix();
      }
      for (int k : neighbors_[static_cast<std::size_t>(j)])
        v += msg[static_cast<std::size_t>(k)];
      out.col(j) = v.transpose();
    }
    return out;
  }

  void bind(Tape& t) override {
    bound_.clear();
    for_each_mat_mut([&](Mat& m) { bound_.push_back(t.leaf(m)); });
  }

  int forward_tape(Tape& t, int x) const override {
    // Bound ids follow for_each_mat order: enc levels, dec levels, messages.
    std::size_t cursor = 0;
    auto block_ids = [&](const std::vector<std::vector<Mat>>& block) {
      std::vector<std::vector<int>> ids(block.size());
      for (std::size_t lvl = 0; lvl < block.size(); ++lvl)
        for (std::size_t i = 0; i < block[lvl].size(); ++i) ids[lvl].push_back(bound_[cursor++]);
      return ids;
    };
    const auto enc_ids = block_ids(enc_);
    const auto dec_ids = block_ids(dec_);
    std::vector<int> msg_ids;
    for (std::size_t i = 0; i < messages_.size(); ++i) msg_ids.push_back(bound_[cursor++]);

    std::vector<int> msg(static_cast<std::size_t>(sensors_));
    for (int k = 0; k < sensors_; ++k) {
      const int xk = t.transpose_(t.slice_cols(x, k, 1));
      msg[static_cast<std::size_t>(k)] = t.add_rowvec(
          t.matmul(xk, msg_ids[static_cast<std::size_t>(2 * k)]),
          msg_ids[static_cast<std::size_t>(2 * k + 1)]);
    }
    std::vector<int> cols;
    cols.reserve(static_cast<std::size_t>(sensors_));
    for (int j = 0; j < sensors_; ++j) {
      int v = t.transpose_(t.slice_cols(x, j, 1));
      for (std::size_t lvl = 0; lvl < enc_.size(); ++lvl) {
        v = t.add_rowvec(t.matmul(v, enc_ids[lvl][static_cast<std::size_t>(2 * j)]),
                         enc_ids[lvl][static_cast<std::size_t>(2 * j + 1)]);
        v = t.tanh_(v);
      }
      for (std::size_t lvl = 0; lvl < dec_.size(); ++lvl) {
        v = t.add_rowvec(t.matmul(v, dec_ids[lvl][static_cast<std::size_t>(2 * j)]),
                         dec_ids[lvl][static_cast<std::size_t>(2 * j + 1)]);
        if (lvl + 1 < dec_.size()) v = t.tanh_(v);
      }
      for (int k : neighbors_[static_cast<std::size_t>(j)])
        v = t.add(v, msg[static_cast<std::size_t>(k)]);
      cols.push_back(t.transpose_(v));
    }
    return cols.size() == 1 ? cols[0] : t.concat_cols(cols);
  }

  void read_grads(const Tape& t, double* out) const override {
    for (int id : bound_) {
      const Mat g = t.grad(id);
      std::copy(g.data(), g.data() + g.size(), out);
      out += g.size();
    }
  }

  std::unique_ptr<Network> clone() const override { return std::make_unique<GraphNet>(*this); }

 private:
  template <typename Fn>
  void for_each_mat(Fn&& fn) const {
    for (const auto& level : enc_)
      for (const Mat& m : level) fn(m);
    for (const auto& level : dec_)
      for (const Mat& m : level) fn(m);
    for (const Mat& m : messages_) fn(m);
  }

  template <typename Fn>
  void for_each_mat_mut(Fn&& fn) {
    for (auto& level : enc_)
      for (Mat& m : level) fn(m);
    for (auto& level : dec_)
      for (Mat& m : level) fn(m);
    for (Mat& m : messages_) fn(m);
  }

  Genome genome_;
  int sensors_;
  std::vector<std::pair<int, int>> enc_dims_, dec_dims_;
  std::vector<std::vector<Mat>> enc_, dec_;  // [level][sensor*2 + {W,b}]
  std::vector<Mat> messages_;                // [sensor*2 + {M,c}]
  std::vector<std::vector<int>> neighbors_;
  std::vector<int> bound_;
};

}  // namespace

Model::Model(const Model& other)
    : genome_(other.genome_),
      subspace_(other.subspace_),
      net_(other.net_ ? other.net_->clone() : nullptr),
      train_log_(other.train_log_) {}

Model& Model::operator=(const Model& other) {
  if (this != &other) {
    genome_ = other.genome_;
    subspace_ = other.subspace_;
    net_ = other.net_ ? other.net_->clone() : nullptr;
    train_log_ = other.train_log_;
  }
  return *this;
}

Model Model::build(const Genome& genome, const Subspace& subspace, std::uint64_t seed) {
  const auto violations = validate(genome, permissive_limits());
  if (!violations.empty())
    raise(ErrorCode::invalid_genome, "cannot build model: " + violations.front().code + ": " +
                                         violations.front().message);
  if (subspace.feature_indices.empty())
    raise(ErrorCode::subspace_mismatch, "subspace is empty");
  if (genome.family == Family::vanilla && subspace.size() != genome.input_width())
    raise(ErrorCode::subspace_mismatch,
          "subspace width " + std::to_string(subspace.size()) + " != genome input width " +
              std::to_string(genome.input_width()));

  Model m;
  m.genome_ = genome;
  m.subspace_ = subspace;
  if (genome.family == Family::vanilla)
    m.net_ = std::make_unique<VanillaNet>(genome);
  else
    m.net_ = std::make_unique<GraphNet>(genome, subspace.size());
  m.net_->init_weights(seed);
  return m;
}

std::vector<double> Model::weights() const {
  std::vector<double> out(weight_count());
  net_->get_weights(out.data());
  return out;
}

void Model::set_weights(const std::vector<double>& flat) {
  if (flat.size() != weight_count())
    raise(ErrorCode::length_mismatch, "weight vector length " + std::to_string(flat.size()) +
                                          " != model weight count " +
                                          std::to_string(weight_count()));
  net_->set_weights(flat.data());
}

Mat Model::forward_window(const Mat& x) const {
  if (x.rows() != window() || x.cols() != width())
    raise(ErrorCode::shape_mismatch, "window shape (" + std::to_string(x.rows()) + ", " +
                                         std::to_string(x.cols()) + ") does not match model (" +
                                         std::to_string(window()) + ", " +
                                         std::to_string(width()) + ")");
  return net_->forward_window(x);
}

Tensor Model::forward(const Tensor& batch) const {
  if (batch.rank() != 3 || batch.dim(1) != window() || batch.dim(2) != width())
    raise(ErrorCode::shape_mismatch, "batch must have shape (n, window, width)");
  Tensor out = Tensor::zeros({batch.dim(0), batch.dim(1), batch.dim(2)});
  for (std::int64_t i = 0; i < batch.dim(0); ++i) {
    const Mat y = net_->forward_window(batch.slice_mat(i));
    for (std::int64_t r = 0; r < y.rows(); ++r)
      for (std::int64_t c = 0; c < y.cols(); ++c) out.at(i, r, c) = y(r, c);
  }
  return out;
}

void Model::train(const Tensor& windows, const TrainConfig& cfg) {
  if (cfg.epochs < 1) raise(ErrorCode::invalid_argument, "epochs must be >= 1");
  if (cfg.batch_size < 1) raise(ErrorCode::invalid_argument, "batch_size must be >= 1");
  if (!(cfg.learning_rate > 0.0)) raise(ErrorCode::invalid_argument, "learning_rate must be > 0");
  if (windows.rank() != 3 || windows.dim(0) < 1)
    raise(ErrorCode::invalid_argument, "windows must be a non-empty (n, window, width) tensor");
  if (windows.dim(1) != window() || windows.dim(2) != width())
    raise(ErrorCode::shape_mismatch, "training windows do not match model shape");
  if (!windows.all_finite())
    raise(ErrorCode::invalid_argument, "training windows contain non-finite values");

  const std::int64_t n = windows.dim(0);
  const double denom = static_cast<double>(window()) * static_cast<double>(width());
  const std::size_t wcount = weight_count();

  std::vector<double> flat(wcount), grad(wcount);
  std::vector<double> adam_m(wcount, 0.0), adam_v(wcount, 0.0);
  std::int64_t step = 0;

  Rng rng(cfg.seed);
  std::vector<std::int64_t> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    // Fisher-Yates with the run stream; order is part of the contract.
    for (std::int64_t i = n - 1; i > 0; --i)
      std::swap(order[static_cast<std::size_t>(i)],
                order[static_cast<std::size_t>(rng.uniform_int(0, i))]);

    double epoch_loss = 0.0;
    for (std::int64_t start = 0; start < n; start += cfg.batch_size) {
      const std::int64_t count = std::min<std::int64_t>(cfg.batch_size, n - start);
      Tape tape;
      net_->bind(tape);
      int total = -1;
      for (std::int64_t b = 0; b < count; ++b) {
        const int x = tape.leaf(windows.slice_mat(order[static_cast<std::size_t>(start + b)]));
        const int y = net_->forward_tape(tape, x);
        const int sq = tape.sum_sq(tape.sub(y, x));
        total = (total < 0) ? sq : tape.add(total, sq);
      }
      const int loss = tape.scale(total, 1.0 / (static_cast<double>(count) * denom));
      const double loss_value = tape.value(loss)(0, 0);
      if (!std::isfinite(loss_value))
        raise(ErrorCode::diverged_training,
              "training diverged at epoch " + std::to_string(epoch));
      tape.backward(loss);

      net_->get_weights(flat.data());
      net_->read_grads(tape, grad.data());
      ++step;
      if (cfg.optimizer == Optimizer::adam) {
        const double b1 = 0.9, b2 = 0.999, eps = 1e-8;
        const double c1 = 1.0 - std::pow(b1, static_cast<double>(step));
        const double c2 = 1.0 - std::pow(b2, static_cast<double>(step));
        for (std::size_t i = 0; i < wcount; ++i) {
          adam_m[i] = b1 * adam_m[i] + (1.0 - b1) * grad[i];
          adam_v[i] = b2 * adam_v[i] + (1.0 - b2) * grad[i] * grad[i];
          flat[i] -= cfg.learning_rate * (adam_m[i] / c1) / (std::sqrt(adam_v[i] / c2) + eps);
        }
      } else {
        for (std::size_t i = 0; i < wcount; ++i) flat[i] -= cfg.learning_rate * grad[i];
      }
      net_->set_weights(flat.data());
      epoch_loss += loss_value * static_cast<double>(count);
    }
    train_log_.push_back(epoch_loss / static_cast<double>(n));
  }
}

std::vector<double> Model::tape_gradient(const Tensor& windows) {
  if (windows.rank() != 3 || windows.dim(0) < 1 || windows.dim(1) != window() ||
      windows.dim(2) != width())
    raise(ErrorCode::shape_mismatch, "windows do not match model shape");
  const double denom =
      static_cast<double>(windows.dim(0)) * static_cast<double>(window()) * width();
  Tape tape;
  net_->bind(tape);
  int total = -1;
  for (std::int64_t i = 0; i < windows.dim(0); ++i) {
    const int x = tape.leaf(windows.slice_mat(i));
    const int y = net_->forward_tape(tape, x);
    const int sq = tape.sum_sq(tape.sub(y, x));
    total = (total < 0) ? sq : tape.add(total, sq);
  }
  tape.backward(tape.scale(total, 1.0 / denom));
  std::vector<double> grad(weight_count());
  net_->read_grads(tape, grad.data());
  return grad;
}

Mat Model::forward_window_tape(const Mat& x) {
  if (x.rows() != window() || x.cols() != width())
    raise(ErrorCode::shape_mismatch, "window does not match model shape");
  Tape tape;
  net_->bind(tape);
  return tape.value(net_->forward_tape(tape, tape.leaf(x)));
}

double Model::reconstruction_loss(const Tensor& windows) const {
  if (windows.rank() != 3 || windows.dim(1) != window() || windows.dim(2) != width())
    raise(ErrorCode::shape_mismatch, "windows do not match model shape");
  const double denom = static_cast<double>(window()) * static_cast<double>(width());
  double total = 0.0;
  for (std::int64_t i = 0; i < windows.dim(0); ++i) {
    const Mat x = windows.slice_mat(i);
    const Mat y = net_->forward_window(x);
    total += (x - y).squaredNorm() / denom;
  }
  return total / static_cast<double>(windows.dim(0));
}

ScoreSeries Model::reconstruction_errors(const Tensor& series) const {
  if (series.rank() != 2 || series.dim(1) != width())
    raise(ErrorCode::shape_mismatch, "series must be (T, width)");
  const std::int64_t T = series.dim(0);
  const int w = window();
  if (T < w)
    raise(ErrorCode::series_too_short,
          "series length " + std::to_string(T) + " < window " + std::to_string(w));

  ScoreSeries out;
  out.window = w;
  out.scores.assign(static_cast<std::size_t>(T), 0.0);
  Mat win(w, width());
  for (std::int64_t t = w - 1; t < T; ++t) {
    for (int r = 0; r < w; ++r)
      for (std::int64_t c = 0; c < series.dim(1); ++c) win(r, c) = series.at(t - w + 1 + r, c);
    const Mat rec = net_->forward_window(win);
    out.scores[static_cast<std::size_t>(t)] = (win.row(w - 1) - rec.row(w - 1)).norm();
  }
  for (std::int64_t t = 0; t < w - 1; ++t)
    out.scores[static_cast<std::size_t>(t)] = out.scores[static_cast<std::size_t>(w - 1)];
  return out;
}

double finite_diff_check(InstanceKind kind, std::uint64_t seed, double step) {
  Genome g;
  Subspace s;
  switch (kind) {
    case InstanceKind::dense:
      g.family = Family::vanilla;
      g.window = 4;
      g.encoder_genes = {LayerGene{LayerKind::dense, 3, 5}, LayerGene{LayerKind::dense, 5, 2}};
      s = Subspace::full(3);
      break;
    case InstanceKind::conv1d:
      g.family = Family::vanilla;
      g.window = 5;
      g.encoder_genes = {LayerGene{LayerKind::conv1d, 3, 4, 3}};
      s = Subspace::full(3);
      break;
    case InstanceKind::lstm:
      g.family = Family::vanilla;
      g.window = 4;
      g.encoder_genes = {LayerGene{LayerKind::lstm, 3, 4}};
      s = Subspace::full(3);
      break;
    case InstanceKind::attention:
      g.family = Family::vanilla;
      g.window = 4;
      g.encoder_genes = {LayerGene{LayerKind::dense, 3, 4}};
      g.attention_sites = {0};
      s = Subspace::full(3);
      break;
    case InstanceKind::graph_node:
      g.family = Family::graph;
      g.window = 4;
      g.encoder_genes = {LayerGene{LayerKind::dense, 4, 5}, LayerGene{LayerKind::dense, 5, 3}};
      s = Subspace::full(3);
      break;
  }

  Model model = Model::build(g, s, seed);
  Rng rng(mix_seed(seed, 0x5eed));
  Tensor batch = Tensor::zeros({2, g.window, s.size()});
  for (double& v : batch.data()) v = rng.uniform(-1.0, 1.0);

  const std::vector<double> analytic = model.tape_gradient(batch);
  const std::vector<double> base = model.weights();
  double max_rel = 0.0;
  Model probe = model;
  for (std::size_t i = 0; i < base.size(); ++i) {
    std::vector<double> w = base;
    const double h = step * std::max(1.0, std::abs(base[i]));
    w[i] = base[i] + h;
    probe.set_weights(w);
    const double up = probe.reconstruction_loss(batch);
    w[i] = base[i] - h;
    probe.set_weights(w);
    const double down = probe.reconstruction_loss(batch);
    const double numeric = (up - down) / (2.0 * h);
    const double rel = std::abs(analytic[i] - numeric) /
                       std::max({std::abs(analytic[i]), std::abs(numeric), 1e-6});
    max_rel = std::max(max_rel, rel);
  }
  return max_rel;
}

}  // namespace nevo
