#include <cmath>

#include "core/model.hpp"
#include "doctest.h"
#include "util/error.hpp"

using namespace nevo;

namespace {

Genome dense_genome(int in, int latent, int window = 3) {
  Genome g;
  g.family = Family::vanilla;
  g.window = window;
  g.encoder_genes = {LayerGene{LayerKind::dense, in, latent, 1}};
  return g;
}

Genome random_vanilla(Rng& rng, int width) {
  const auto limits = GenomeLimits{1, 5, 3, 12, 64, 512};
  return random_genome(limits, Family::vanilla, width, rng);
}

Tensor make_batch(int n, int w, int c, Rng& rng, double scale = 1.0) {
  Tensor t = Tensor::zeros({n, w, c});
  for (double& v : t.data()) v = scale * rng.uniform(-1.0, 1.0);
  return t;
}

void zero_layer(Model& m, std::size_t layer_index) {
  auto infos = m.layers();
  auto w = m.weights();
  const auto& info = infos.at(layer_index);
  for (std::size_t i = info.weight_offset; i < info.weight_offset + info.weight_count; ++i)
    w[i] = 0.0;
  m.set_weights(w);
}

}  // namespace

TEST_SUITE("model") {
  TEST_CASE("mirrored build of a 1-layer genome has two layers and the latent width") {
    const Model m = Model::build(dense_genome(4, 2), Subspace::full(4), 1);
    const auto infos = m.layers();
    REQUIRE(infos.size() == 2);
    CHECK(infos[0].in_channels == 4);
    CHECK(infos[0].out_channels == 2);
    CHECK(infos[1].in_channels == 2);
    CHECK(infos[1].out_channels == 4);
  }

  TEST_CASE("dense connection widens the first decoder input") {
    Genome g;
    g.family = Family::vanilla;
    g.window = 3;
    g.encoder_genes = {LayerGene{LayerKind::dense, 4, 8, 1}, LayerGene{LayerKind::dense, 8, 2, 1}};
    g.connections = {ConnectionGene{1, ConnectionKind::dense}};
    const Model m = Model::build(g, Subspace::full(4), 1);
    const auto infos = m.layers();
    REQUIRE(infos.size() == 4);
    CHECK(infos[2].in_channels == 4);  // latent 2 + encoder out 2
    CHECK(infos[2].out_channels == 8);
  }

  TEST_CASE("same genome and seed build bit-identical weights") {
    Rng rng(10);
    for (int i = 0; i < 20; ++i) {
      const Genome g = random_vanilla(rng, 5);
      const Model a = Model::build(g, Subspace::full(5), 99 + i);
      const Model b = Model::build(g, Subspace::full(5), 99 + i);
      CHECK(a.weights() == b.weights());
    }
  }

  TEST_CASE("build rejects mismatched subspace width") {
    CHECK_THROWS_AS(Model::build(dense_genome(4, 2), Subspace::full(3), 1), Error);
  }

  TEST_CASE("build rejects a broken channel chain") {
    Genome g;
    g.family = Family::vanilla;
    g.window = 3;
    g.encoder_genes = {LayerGene{LayerKind::dense, 4, 8, 1}, LayerGene{LayerKind::dense, 6, 2, 1}};
    CHECK_THROWS_AS(Model::build(g, Subspace::full(4), 1), Error);
  }

  TEST_CASE("zeroed skip branch equals the model without the connection") {
    Genome with;
    with.family = Family::vanilla;
    with.window = 3;
    with.encoder_genes = {LayerGene{LayerKind::dense, 4, 6, 1},
                          LayerGene{LayerKind::dense, 6, 2, 1}};
    with.connections = {ConnectionGene{0, ConnectionKind::skip}};
    Genome without = with;
    without.connections.clear();

    Model a = Model::build(with, Subspace::full(4), 7);
    Model b = Model::build(without, Subspace::full(4), 7);
    REQUIRE(a.weights() == b.weights());  // skip adds no weights
    zero_layer(a, 0);
    zero_layer(b, 0);

    Rng rng(3);
    const Tensor batch = make_batch(4, 3, 4, rng);
    for (std::int64_t i = 0; i < batch.dim(0); ++i) {
      const Mat x = batch.slice_mat(i);
      CHECK((a.forward_window(x) - b.forward_window(x)).norm() == 0.0);
    }
  }

  TEST_CASE("graph model with zero messages is per-sensor") {
    Genome g;
    g.family = Family::graph;
    g.window = 4;
    g.encoder_genes = {LayerGene{LayerKind::dense, 4, 6, 1}};
    Model m = Model::build(g, Subspace::full(3), 5);
    const auto infos = m.layers();
    // enc level, dec level, message block
    REQUIRE(infos.size() == 3);
    CHECK(infos.back().aux.find("messages") != std::string::npos);
    zero_layer(m, infos.size() - 1);

    Rng rng(8);
    Mat x(4, 3);
    for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = rng.uniform(-1.0, 1.0);
    const Mat base = m.forward_window(x);
    // Perturbing sensor k must not move any other sensor's reconstruction.
    for (int k = 0; k < 3; ++k) {
      Mat xp = x;
      xp.col(k).array() += 0.37;
      const Mat out = m.forward_window(xp);
      for (int j = 0; j < 3; ++j) {
        if (j == k) continue;
        CHECK((out.col(j) - base.col(j)).norm() == 0.0);
      }
    }
  }

  TEST_CASE("graph messages add exactly the hand-computed neighbor terms") {
    Genome g;
    g.family = Family::graph;
    g.window = 3;
    g.encoder_genes = {LayerGene{LayerKind::dense, 3, 4, 1}};
    Model m = Model::build(g, Subspace::full(3), 11);

    Model zeroed = m;
    const auto infos = m.layers();
    zero_layer(zeroed, infos.size() - 1);

    Rng rng(12);
    Mat x(3, 3);
    for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = rng.uniform(-1.0, 1.0);

    // Hand-compute every message m_k(x_k) = x_k^T M_k + c_k from the flat
    // weight vector (w x w matrix then 1 x w bias, column-major, per sensor).
    const auto& msg_info = infos.back();
    const auto w = m.weights();
    const int win = 3, sensors = 3;
    std::vector<Mat> message(static_cast<std::size_t>(sensors));
    std::size_t cursor = msg_info.weight_offset;
    for (int k = 0; k < sensors; ++k) {
      Mat M(win, win), c(1, win);
      for (int col = 0; col < win; ++col)
        for (int row = 0; row < win; ++row) M(row, col) = w[cursor++];
      for (int col = 0; col < win; ++col) c(0, col) = w[cursor++];
      message[static_cast<std::size_t>(k)] = x.col(k).transpose() * M + c;
    }

    const Mat full = m.forward_window(x);
    const Mat bare = zeroed.forward_window(x);
    for (int j = 0; j < sensors; ++j) {
      Mat expect = bare.col(j).transpose();
      for (int k = 0; k < sensors; ++k)
        if (k != j) expect += message[static_cast<std::size_t>(k)];
      CHECK((full.col(j).transpose() - expect).norm() < 1e-12);
    }
  }

  TEST_CASE("hand-computed dense autoencoder forward") {
    Genome g = dense_genome(2, 2, 2);
    Model m = Model::build(g, Subspace::full(2), 1);
    // Encoder W=[[0.5,-0.25],[0.1,0.3]], b=[0.05,-0.1]; decoder
    // W=[[1.5,0.2],[-0.4,0.8]], b=[0.01,0.02]. Column-major flat order.
    m.set_weights({0.5, 0.1, -0.25, 0.3, 0.05, -0.1, 1.5, -0.4, 0.2, 0.8, 0.01, 0.02});
    Mat x(2, 2);
    x << 0.3, -0.6, -0.2, 0.9;

    const Mat y = m.forward_window(x);
    for (int r = 0; r < 2; ++r) {
      const double h0 = std::tanh(x(r, 0) * 0.5 + x(r, 1) * 0.1 + 0.05);
      const double h1 = std::tanh(x(r, 0) * -0.25 + x(r, 1) * 0.3 - 0.1);
      const double y0 = h0 * 1.5 + h1 * -0.4 + 0.01;
      const double y1 = h0 * 0.2 + h1 * 0.8 + 0.02;
      CHECK(y(r, 0) == doctest::Approx(y0).epsilon(1e-14));
      CHECK(y(r, 1) == doctest::Approx(y1).epsilon(1e-14));
    }
  }

  TEST_CASE("tape forward equals inference forward") {
    Rng rng(21);
    for (int trial = 0; trial < 12; ++trial) {
      Genome g = random_vanilla(rng, 4);
      if (trial % 3 == 1) g.attention_sites = {0};
      if (trial % 3 == 2) g.connections = {ConnectionGene{0, ConnectionKind::dense}};
      Model m = Model::build(g, Subspace::full(4), 2000 + trial);
      Mat x(g.window, 4);
      for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = rng.uniform(-1.0, 1.0);
      CHECK((m.forward_window(x) - m.forward_window_tape(x)).norm() < 1e-12);
    }
    // Graph family too.
    Genome g;
    g.family = Family::graph;
    g.window = 3;
    g.encoder_genes = {LayerGene{LayerKind::dense, 3, 5, 1}};
    Model m = Model::build(g, Subspace::full(4), 77);
    Mat x(3, 4);
    for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = rng.uniform(-1.0, 1.0);
    CHECK((m.forward_window(x) - m.forward_window_tape(x)).norm() < 1e-12);
  }

  TEST_CASE("batch forward keeps shape and rejects mismatches") {
    Model m = Model::build(dense_genome(3, 2), Subspace::full(3), 4);
    Rng rng(5);
    const Tensor batch = make_batch(6, 3, 3, rng);
    const Tensor out = m.forward(batch);
    CHECK(out.shape() == batch.shape());
    CHECK(out.all_finite());
    CHECK_THROWS_AS(m.forward(make_batch(2, 4, 3, rng)), Error);
  }

  TEST_CASE("train rejects bad configs") {
    Model m = Model::build(dense_genome(3, 2), Subspace::full(3), 4);
    Rng rng(6);
    const Tensor batch = make_batch(8, 3, 3, rng);
    TrainConfig cfg;
    cfg.epochs = 0;
    CHECK_THROWS_AS(m.train(batch, cfg), Error);
    cfg.epochs = 1;
    cfg.learning_rate = 0.0;
    CHECK_THROWS_AS(m.train(batch, cfg), Error);
  }

  TEST_CASE("training on rank-limited data cuts the loss by 10x") {
    // Two latent directions drive four sensors; small amplitudes keep the
    // tanh near its linear range.
    Rng rng(42);
    Tensor data = Tensor::zeros({256, 2, 4});
    for (std::int64_t i = 0; i < data.dim(0); ++i) {
      const double u = rng.uniform(-0.3, 0.3), v = rng.uniform(-0.3, 0.3);
      for (int r = 0; r < 2; ++r) {
        data.at(i, r, 0) = u;
        data.at(i, r, 1) = v;
        data.at(i, r, 2) = 0.5 * u - 0.3 * v;
        data.at(i, r, 3) = -0.2 * u + 0.4 * v;
      }
    }
    Model m = Model::build(dense_genome(4, 2, 2), Subspace::full(4), 9);
    TrainConfig cfg;
    cfg.epochs = 200;
    cfg.batch_size = 64;
    cfg.seed = 1234;
    m.train(data, cfg);
    REQUIRE(m.train_log().size() == 200);
    CHECK(m.train_log().back() < 0.1 * m.train_log().front());
  }

  TEST_CASE("training is deterministic") {
    Rng rng(43);
    const Tensor data = make_batch(64, 3, 3, rng, 0.5);
    TrainConfig cfg;
    cfg.epochs = 5;
    cfg.batch_size = 16;
    cfg.seed = 77;
    Model a = Model::build(dense_genome(3, 2), Subspace::full(3), 3);
    Model b = Model::build(dense_genome(3, 2), Subspace::full(3), 3);
    a.train(data, cfg);
    b.train(data, cfg);
    CHECK(a.train_log() == b.train_log());
    CHECK(a.weights() == b.weights());
  }

  TEST_CASE("exact reconstruction scores zero everywhere") {
    // Zero biases reproduce the zero series exactly.
    Model m = Model::build(dense_genome(3, 2), Subspace::full(3), 15);
    const ScoreSeries s = m.reconstruction_errors(Tensor::zeros({20, 3}));
    REQUIRE(s.scores.size() == 20);
    for (double v : s.scores) CHECK(v == 0.0);
  }

  TEST_CASE("constant offset scores delta times sqrt(width)") {
    const double c = 0.4, delta = 0.25;
    Model m = Model::build(dense_genome(3, 2, 2), Subspace::full(3), 15);
    std::vector<double> w(m.weight_count(), 0.0);
    // Decoder bias is the last 3 entries of the flat vector.
    w[w.size() - 3] = c + delta;
    w[w.size() - 2] = c + delta;
    w[w.size() - 1] = c + delta;
    m.set_weights(w);

    Tensor series = Tensor::zeros({12, 3});
    for (double& v : series.data()) v = c;
    const ScoreSeries s = m.reconstruction_errors(series);
    for (double v : s.scores)
      CHECK(v == doctest::Approx(delta * std::sqrt(3.0)).epsilon(1e-12));
  }

  TEST_CASE("scores match hand-evaluated per-point errors") {
    Model m = Model::build(dense_genome(3, 2, 2), Subspace::full(3), 30);
    Tensor series = Tensor::zeros({5, 3});
    Rng rng(9);
    for (double& v : series.data()) v = rng.uniform(-1.0, 1.0);
    const ScoreSeries s = m.reconstruction_errors(series);
    REQUIRE(s.scores.size() == 5);
    // Score at t comes from the window [t-1, t]; rows before the first
    // full window repeat the first computed score.
    for (int t = 1; t < 5; ++t) {
      Mat win(2, 3);
      for (int r = 0; r < 2; ++r)
        for (int c = 0; c < 3; ++c) win(r, c) = series.at(t - 1 + r, c);
      const Mat rec = m.forward_window(win);
      double sq = 0.0;
      for (int c = 0; c < 3; ++c) {
        const double d = win(1, c) - rec(1, c);
        sq += d * d;
      }
      CHECK(s.scores[static_cast<std::size_t>(t)] ==
            doctest::Approx(std::sqrt(sq)).epsilon(1e-12));
    }
    CHECK(s.scores[0] == s.scores[1]);
  }

  TEST_CASE("too-short series is rejected") {
    Model m = Model::build(dense_genome(3, 2, 4), Subspace::full(3), 1);
    CHECK_THROWS_AS(m.reconstruction_errors(Tensor::zeros({3, 3})), Error);
  }

  TEST_CASE("weight get/set round-trips") {
    Rng rng(51);
    Genome g = random_vanilla(rng, 4);
    Model m = Model::build(g, Subspace::full(4), 8);
    const auto w = m.weights();
    Model copy = m;
    copy.set_weights(w);
    CHECK(copy.weights() == w);
    CHECK_THROWS_AS(m.set_weights(std::vector<double>(w.size() + 1, 0.0)), Error);
  }

  TEST_CASE("dense 2->3 layer owns nine weights") {
    Genome g;
    g.family = Family::vanilla;
    g.window = 2;
    g.encoder_genes = {LayerGene{LayerKind::dense, 2, 3, 1}};
    const Model m = Model::build(g, Subspace::full(2), 1);
    CHECK(m.layers()[0].weight_count == 9);  // 2*3 weights + 3 biases
  }

  TEST_CASE("perturbing weights changes the forward pass") {
    Model m = Model::build(dense_genome(3, 2), Subspace::full(3), 16);
    Rng rng(1);
    Mat x(3, 3);
    for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = rng.uniform(-1.0, 1.0);
    const Mat before = m.forward_window(x);
    auto w = m.weights();
    w[0] += 0.5;
    m.set_weights(w);
    CHECK((m.forward_window(x) - before).norm() > 0.0);
  }

  TEST_CASE("mirroring invariant holds for random genomes") {
    Rng rng(60);
    for (int i = 0; i < 200; ++i) {
      const Genome g = random_vanilla(rng, 6);
      const auto dec = mirror_decoder(g);
      const int L = g.length();
      REQUIRE(static_cast<int>(dec.size()) == L);
      for (int d = 0; d < L; ++d) {
        const auto& gene = g.encoder_genes[static_cast<std::size_t>(L - 1 - d)];
        CHECK(dec[static_cast<std::size_t>(d)].out_channels == gene.in_channels);
        const int base = gene.out_channels;
        const bool dense_conn = g.connection_at(L - 1 - d) &&
                                g.connection_at(L - 1 - d)->kind == ConnectionKind::dense;
        CHECK(dec[static_cast<std::size_t>(d)].in_channels == (dense_conn ? 2 * base : base));
      }
    }
  }
}
