#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "core/genome.hpp"
#include "core/layers.hpp"
#include "core/score.hpp"
#include "core/tensor.hpp"

namespace nevo {

enum class Optimizer { sgd, adam };

struct TrainConfig {
  int epochs = 20;
  int batch_size = 64;
  double learning_rate = 1e-3;
  Optimizer optimizer = Optimizer::adam;
  std::uint64_t seed = 0;
};

struct LayerInfo {
  InstanceKind kind = InstanceKind::dense;
  int in_channels = 1;
  int out_channels = 1;
  std::size_t weight_offset = 0;
  std::size_t weight_count = 0;
  std::string aux;
};

// Instantiated network behind a Model. Implementations keep a canonical
// flat weight order; layer_infos() spans partition that order.
class Network {
 public:
  virtual ~Network() = default;
  virtual int input_width() const = 0;
  virtual std::size_t weight_count() const = 0;
  virtual void get_weights(double* out) const = 0;
  virtual void set_weights(const double* in) = 0;
  virtual void init_weights(std::uint64_t seed) = 0;
  virtual std::vector<LayerInfo> layer_infos() const = 0;
  virtual Mat forward_window(const Mat& x) const = 0;
  virtual void bind(Tape& t) = 0;
  virtual int forward_tape(Tape& t, int x) const = 0;
  virtual void read_grads(const Tape& t, double* out) const = 0;
  virtual std::unique_ptr<Network> clone() const = 0;
};

// A genome instantiated over a subspace: the trainable autoencoder plus its
// training history. Copyable value; the engine clones freely.
class Model {
 public:
  Model() = default;
  Model(const Model& other);
  Model& operator=(const Model& other);
  Model(Model&&) = default;
  Model& operator=(Model&&) = default;

  static Model build(const Genome& genome, const Subspace& subspace, std::uint64_t seed);

  bool empty() const { return net_ == nullptr; }
  const Genome& genome() const { return genome_; }
  const Subspace& subspace() const { return subspace_; }
  int window() const { return genome_.window; }
  int width() const { return net_->input_width(); }

  std::size_t weight_count() const { return net_->weight_count(); }
  std::vector<double> weights() const;
  void set_weights(const std::vector<double>& flat);
  std::vector<LayerInfo> layers() const { return net_->layer_infos(); }

  // Single window (window x width) -> reconstruction of the same shape.
  Mat forward_window(const Mat& x) const;
  // Batch (n, window, width) -> same shape.
  Tensor forward(const Tensor& batch) const;

  // Minibatch Adam/SGD on the mean per-element squared reconstruction
  // error; appends one mean-loss entry per epoch to train_log.
  void train(const Tensor& windows, const TrainConfig& cfg);
  const std::vector<double>& train_log() const { return train_log_; }

  // Mean per-element squared reconstruction error over a window batch.
  double reconstruction_loss(const Tensor& windows) const;

  // Gradient of reconstruction_loss at the current weights. Non-const:
  // building the tape rebinds the parameter leaves.
  std::vector<double> tape_gradient(const Tensor& windows);

  // Forward pass routed through the training tape; must agree with
  // forward_window to machine precision.
  Mat forward_window_tape(const Mat& x);

  // Eq-style per-time-point scores over a (T x width) series; the window
  // ending at t supplies the reconstruction of row t.
  ScoreSeries reconstruction_errors(const Tensor& series) const;

 private:
  Genome genome_;
  Subspace subspace_;
  std::unique_ptr<Network> net_;
  std::vector<double> train_log_;
};

// Max relative error between tape gradients and central finite differences
// for a small model featuring the given layer kind.
double finite_diff_check(InstanceKind kind, std::uint64_t seed, double step = 1e-5);

}  // namespace nevo
