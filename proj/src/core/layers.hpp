#pragma once

#include <memory>
#include <string>
#include <vector>

#include "core/autodiff.hpp"
#include "core/tensor.hpp"
#include "util/rng.hpp"

namespace nevo {

enum class InstanceKind { dense, conv1d, lstm, attention, graph_node };

const char* to_string(InstanceKind k);

// One trainable block. Every layer owns its parameter matrices and exposes
// them through a flat, column-major-per-matrix view so models can address a
// single contiguous weight vector. Tape usage: bind() pushes parameter
// leaves onto the tape, forward_tape() consumes them, read_grads() collects
// adjoints in the same flat order.
class Layer {
 public:
  virtual ~Layer() = default;

  virtual InstanceKind kind() const = 0;
  virtual int in_channels() const = 0;
  virtual int out_channels() const = 0;
  virtual std::string aux_description() const { return ""; }

  std::size_t weight_count() const;
  virtual void get_weights(double* out) const;
  virtual void set_weights(const double* in);
  virtual void init_weights(RandomSource& rng);

  virtual Mat forward(const Mat& x) const = 0;
  virtual void bind(Tape& t);
  virtual int forward_tape(Tape& t, int x) const = 0;
  virtual void read_grads(const Tape& t, double* out) const;

  virtual std::unique_ptr<Layer> clone() const = 0;

 protected:
  struct Param {
    Mat value;
    double init_bound = 0.0;  // uniform(-b, b); 0 keeps zeros (biases)
    int bound_id = -1;
  };

  std::vector<Param> params_;
  Param& add_param(int rows, int cols, double init_bound);
};

class DenseLayer final : public Layer {
 public:
  DenseLayer(int in, int out);
  InstanceKind kind() const override { return InstanceKind::dense; }
  int in_channels() const override { return in_; }
  int out_channels() const override { return out_; }
  Mat forward(const Mat& x) const override;
  int forward_tape(Tape& t, int x) const override;
  std::unique_ptr<Layer> clone() const override { return std::make_unique<DenseLayer>(*this); }

 private:
  int in_, out_;
};

class Conv1dLayer final : public Layer {
 public:
  Conv1dLayer(int in, int out, int kernel);
  InstanceKind kind() const override { return InstanceKind::conv1d; }
  int in_channels() const override { return in_; }
  int out_channels() const override { return out_; }
  std::string aux_description() const override { return "kernel=" + std::to_string(kernel_); }
  Mat forward(const Mat& x) const override;
  int forward_tape(Tape& t, int x) const override;
  std::unique_ptr<Layer> clone() const override { return std::make_unique<Conv1dLayer>(*this); }

 private:
  int in_, out_, kernel_;
};

class LstmLayer final : public Layer {
 public:
  LstmLayer(int in, int hidden);
  InstanceKind kind() const override { return InstanceKind::lstm; }
  int in_channels() const override { return in_; }
  int out_channels() const override { return hidden_; }
  Mat forward(const Mat& x) const override;
  int forward_tape(Tape& t, int x) const override;
  std::unique_ptr<Layer> clone() const override { return std::make_unique<LstmLayer>(*this); }

 private:
  int in_, hidden_;
};

// Multi-head self-attention over the time axis with a residual sum, so the
// block preserves shape. Head count divides the width: 4 when possible,
// else 2, else 1.
class AttentionLayer final : public Layer {
 public:
  explicit AttentionLayer(int width);
  static int head_count(int width);
  InstanceKind kind() const override { return InstanceKind::attention; }
  int in_channels() const override { return width_; }
  int out_channels() const override { return width_; }
  std::string aux_description() const override { return "heads=" + std::to_string(heads_); }
  Mat forward(const Mat& x) const override;
  int forward_tape(Tape& t, int x) const override;
  std::unique_ptr<Layer> clone() const override { return std::make_unique<AttentionLayer>(*this); }

 private:
  int width_, heads_;
};

// Helper shared by the conv layer's two forward paths.
Mat im2col_mat(const Mat& x, int k);

}  // namespace nevo
