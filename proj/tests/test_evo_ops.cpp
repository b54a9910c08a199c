#include <set>

#include "core/evo_ops.hpp"
#include "doctest.h"
#include "util/error.hpp"

using namespace nevo;

namespace {

Genome vanilla_4_8_2() {
  Genome g;
  g.family = Family::vanilla;
  g.window = 5;
  g.encoder_genes = {LayerGene{LayerKind::dense, 4, 8, 1}, LayerGene{LayerKind::dense, 8, 2, 1}};
  return g;
}

Genome graph_genome(int window = 4, int d1 = 80, int d2 = 100) {
  Genome g;
  g.family = Family::graph;
  g.window = window;
  g.encoder_genes = {LayerGene{LayerKind::dense, window, d1, 1},
                     LayerGene{LayerKind::dense, d1, d2, 1}};
  return g;
}

}  // namespace

TEST_SUITE("evo_ops") {
  TEST_CASE("window mutation changes only the window") {
    const auto limits = GenomeLimits::defaults(Family::vanilla);
    Rng rng(4);
    for (int i = 0; i < 200; ++i) {
      const Genome g = random_genome(limits, Family::vanilla, 4, rng);
      const Genome m = apply_mutation(g, limits, MutationType::window, rng);
      CHECK(m.encoder_genes == g.encoder_genes);
      CHECK(m.connections == g.connections);
      CHECK(m.attention_sites == g.attention_sites);
      CHECK(m.window >= limits.window_min);
      CHECK(m.window <= limits.window_max);
    }
  }

  TEST_CASE("channel mutation hand case: l=0, c'=6 on [4->8, 8->2]") {
    const auto limits = GenomeLimits::defaults(Family::vanilla);
    ScriptedSource rng({ScriptedSource::word_for_int(0, 1, 0),   // layer 0
                        ScriptedSource::word_for_int(4, 8, 6)}); // c' = 6
    const Genome m = apply_mutation(vanilla_4_8_2(), limits, MutationType::channels, rng);
    REQUIRE(m.length() == 2);
    CHECK(m.encoder_genes[0].in_channels == 4);
    CHECK(m.encoder_genes[0].out_channels == 6);
    CHECK(m.encoder_genes[1].in_channels == 6);
    CHECK(m.encoder_genes[1].out_channels == 2);
  }

  TEST_CASE("channel mutation touches at most two genes") {
    const auto limits = GenomeLimits::defaults(Family::vanilla);
    Rng rng(9);
    for (int i = 0; i < 300; ++i) {
      const Genome g = random_genome(limits, Family::vanilla, 5, rng);
      const Genome m = apply_mutation(g, limits, MutationType::channels, rng);
      int changed = 0;
      REQUIRE(m.length() == g.length());
      for (int l = 0; l < g.length(); ++l)
        if (!(m.encoder_genes[static_cast<std::size_t>(l)] ==
              g.encoder_genes[static_cast<std::size_t>(l)]))
          ++changed;
      CHECK(changed <= 2);
      CHECK(m.window == g.window);
    }
  }

  TEST_CASE("resize truncates and extends with a repaired chain") {
    const auto limits = GenomeLimits::defaults(Family::vanilla);
    SUBCASE("truncate to length 1") {
      ScriptedSource rng({ScriptedSource::word_for_int(0, 5, 0)});
      const Genome m = apply_mutation(vanilla_4_8_2(), limits, MutationType::resize, rng);
      REQUIRE(m.length() == 1);
      CHECK(m.encoder_genes[0] == vanilla_4_8_2().encoder_genes[0]);
    }
    SUBCASE("extend to length 4") {
      ScriptedSource rng({ScriptedSource::word_for_int(0, 5, 3),      // target length 4
                          ScriptedSource::word_for_int(2, 66, 12),    // new layer 2 out
                          ScriptedSource::word_for_int(12, 76, 20)}); // new layer 3 out
      const Genome m = apply_mutation(vanilla_4_8_2(), limits, MutationType::resize, rng);
      REQUIRE(m.length() == 4);
      CHECK(m.encoder_genes[2].in_channels == 2);
      CHECK(m.encoder_genes[2].out_channels == 12);
      CHECK(m.encoder_genes[3].in_channels == 12);
      CHECK(m.encoder_genes[3].out_channels == 20);
      CHECK(is_valid(m, limits));
    }
  }

  TEST_CASE("truncation drops connections and attention beyond the new length") {
    const auto limits = GenomeLimits::defaults(Family::vanilla);
    Genome g = vanilla_4_8_2();
    g.connections = {ConnectionGene{1, ConnectionKind::dense}};
    g.attention_sites = {1};
    ScriptedSource rng({ScriptedSource::word_for_int(0, 5, 0)});
    const Genome m = apply_mutation(g, limits, MutationType::resize, rng);
    REQUIRE(m.length() == 1);
    CHECK(m.connections.empty());
    CHECK(m.attention_sites.empty());
    CHECK(is_valid(m, limits));
  }

  TEST_CASE("vanilla-only mutations degrade to dim resampling on graph genomes") {
    const auto limits = GenomeLimits::defaults(Family::graph);
    Rng rng(31);
    for (const auto type : {MutationType::resize, MutationType::add_skip,
                            MutationType::add_dense, MutationType::add_attention}) {
      for (int i = 0; i < 100; ++i) {
        const Genome g = graph_genome();
        const Genome m = apply_mutation(g, limits, type, rng);
        CHECK(m.length() == g.length());
        CHECK(m.connections.empty());
        CHECK(m.attention_sites.empty());
        CHECK(m.window == g.window);
        CHECK(is_valid(m, limits));
      }
    }
  }

  TEST_CASE("graph window mutation keeps the first layer input in sync") {
    const auto limits = GenomeLimits::defaults(Family::graph);
    Rng rng(32);
    for (int i = 0; i < 100; ++i) {
      const Genome m = apply_mutation(graph_genome(), limits, MutationType::window, rng);
      CHECK(m.encoder_genes.front().in_channels == m.window);
      CHECK(is_valid(m, limits));
    }
  }

  TEST_CASE("connection mutations add one connection per level at most") {
    const auto limits = GenomeLimits::defaults(Family::vanilla);
    Genome g = vanilla_4_8_2();
    Rng rng(33);
    g = apply_mutation(g, limits, MutationType::add_skip, rng);
    CHECK(g.connections.size() == 1);
    g = apply_mutation(g, limits, MutationType::add_dense, rng);
    CHECK(g.connections.size() == 2);
    // All levels occupied: further connection mutations leave it unchanged.
    const Genome before = g;
    g = apply_mutation(g, limits, MutationType::add_skip, rng);
    CHECK(g == before);
  }

  TEST_CASE("mutation closure over 10k random applications") {
    for (const Family family : {Family::vanilla, Family::graph}) {
      const auto limits = GenomeLimits::defaults(family);
      Rng rng(314);
      Genome g = random_genome(limits, family, 6, rng);
      for (int i = 0; i < 10000; ++i) {
        g = mutate_model(g, limits, rng);
        if (i % 500 == 0) REQUIRE(validate(g, limits).empty());
        if (i % 97 == 0) g = random_genome(limits, family, 6, rng);
      }
    }
  }

  TEST_CASE("mutation is deterministic under a fixed stream") {
    const auto limits = GenomeLimits::defaults(Family::vanilla);
    Rng a(55), b(55);
    Genome g = vanilla_4_8_2();
    for (int i = 0; i < 100; ++i) CHECK(mutate_model(g, limits, a) == mutate_model(g, limits, b));
  }

  TEST_CASE("crossover of identical parents returns the parents for both types") {
    const Genome g = vanilla_4_8_2();
    for (int m = 0; m < 2; ++m) {
      ScriptedSource rng({ScriptedSource::word_for_int(0, 1, m),
                          ScriptedSource::word_for_int(0, 1, 0)});
      const auto [c1, c2] = crossover_models(g, g, rng);
      CHECK(c1 == g);
      CHECK(c2 == g);
    }
  }

  TEST_CASE("layer swap rechains both children") {
    Genome g1 = vanilla_4_8_2();  // [4->8, 8->2]
    Genome g2;
    g2.family = Family::vanilla;
    g2.window = 3;
    g2.encoder_genes = {LayerGene{LayerKind::lstm, 4, 5, 1}, LayerGene{LayerKind::dense, 5, 3, 1}};
    ScriptedSource rng({ScriptedSource::word_for_int(0, 1, 0),   // m = 0
                        ScriptedSource::word_for_int(0, 1, 1)}); // l = 1
    const auto [c1, c2] = crossover_models(g1, g2, rng);
    // c1 takes g2's layer 1 (5->3): layer 0 out rechains to 5.
    CHECK(c1.encoder_genes[0].out_channels == 5);
    CHECK(c1.encoder_genes[1].in_channels == 5);
    CHECK(c1.encoder_genes[1].out_channels == 3);
    // c2 takes g1's layer 1 (8->2): layer 0 out rechains to 8.
    CHECK(c2.encoder_genes[0].out_channels == 8);
    CHECK(c2.encoder_genes[1].out_channels == 2);
    const auto limits = GenomeLimits::defaults(Family::vanilla);
    CHECK(is_valid(c1, limits));
    CHECK(is_valid(c2, limits));
  }

  TEST_CASE("length exchange hand case: L1=4, L2=2") {
    Genome g1;
    g1.family = Family::vanilla;
    g1.window = 5;
    g1.encoder_genes = {LayerGene{LayerKind::dense, 5, 8, 1},
                        LayerGene{LayerKind::dense, 8, 6, 1},
                        LayerGene{LayerKind::dense, 6, 10, 1},
                        LayerGene{LayerKind::dense, 10, 4, 1}};
    Genome g2;
    g2.family = Family::vanilla;
    g2.window = 5;
    g2.encoder_genes = {LayerGene{LayerKind::dense, 5, 7, 1}, LayerGene{LayerKind::dense, 7, 3, 1}};

    ScriptedSource rng({ScriptedSource::word_for_int(0, 1, 1)});  // m = 1
    const auto [c1, c2] = crossover_models(g1, g2, rng);

    // Child 1: g1's front truncated to 2 layers, latent coerced to g2's.
    REQUIRE(c1.length() == 2);
    CHECK(c1.encoder_genes[0].out_channels == 8);
    CHECK(c1.encoder_genes[1].in_channels == 8);
    CHECK(c1.encoder_genes[1].out_channels == 3);

    // Child 2: g2's front plus g1's tail, junction rechained to 3.
    REQUIRE(c2.length() == 4);
    CHECK(c2.encoder_genes[0].out_channels == 7);
    CHECK(c2.encoder_genes[1].out_channels == 3);
    CHECK(c2.encoder_genes[2].in_channels == 3);
    CHECK(c2.encoder_genes[2].out_channels == 10);
    CHECK(c2.encoder_genes[3] == g1.encoder_genes[3]);

    const auto limits = GenomeLimits::defaults(Family::vanilla);
    CHECK(is_valid(c1, limits));
    CHECK(is_valid(c2, limits));
  }

  TEST_CASE("graph crossover never exchanges lengths") {
    Rng rng(66);
    const Genome g1 = graph_genome(4, 80, 100);
    Genome g2;
    g2.family = Family::graph;
    g2.window = 6;
    g2.encoder_genes = {LayerGene{LayerKind::dense, 6, 200, 1}};
    for (int i = 0; i < 100; ++i) {
      const auto [c1, c2] = crossover_models(g1, g2, rng);
      CHECK(c1.length() == g1.length());
      CHECK(c2.length() == g2.length());
      CHECK(is_valid(c1, GenomeLimits::defaults(Family::graph)));
      CHECK(is_valid(c2, GenomeLimits::defaults(Family::graph)));
    }
  }

  TEST_CASE("crossover rejects mixed families") {
    Rng rng(1);
    CHECK_THROWS_AS(crossover_models(vanilla_4_8_2(), graph_genome(), rng), Error);
  }

  TEST_CASE("crossover closure over random pairs") {
    const auto limits = GenomeLimits::defaults(Family::vanilla);
    Rng rng(777);
    for (int i = 0; i < 5000; ++i) {
      const Genome g1 = random_genome(limits, Family::vanilla, 5, rng);
      const Genome g2 = random_genome(limits, Family::vanilla, 5, rng);
      const auto [c1, c2] = crossover_models(g1, g2, rng);
      CAPTURE(i);
      REQUIRE(validate(c1, limits).empty());
      REQUIRE(validate(c2, limits).empty());
    }
  }

  TEST_CASE("subspace mutation at rate 0 is the identity") {
    Rng rng(5);
    Subspace s;
    s.feature_indices = {1, 3, 4};
    CHECK(mutate_subspace(s, 6, 0.0, rng) == s);
  }

  TEST_CASE("subspace mutation at rate 1 on the full set leaves one feature") {
    Rng rng(6);
    const Subspace full = Subspace::full(5);
    const Subspace m = mutate_subspace(full, 5, 1.0, rng);
    CHECK(m.feature_indices.size() == 1);
  }

  TEST_CASE("subspace crossover hand case against the coin sequence") {
    Subspace s1, s2;
    s1.feature_indices = {0, 1};
    s2.feature_indices = {2, 3};
    // Coins: swap, keep, swap, keep (uniform < 0.5 means swap).
    ScriptedSource rng({ScriptedSource::word_for_uniform(0.25),
                        ScriptedSource::word_for_uniform(0.75),
                        ScriptedSource::word_for_uniform(0.10),
                        ScriptedSource::word_for_uniform(0.90)});
    const auto [c1, c2] = crossover_subspaces(s1, s2, rng);
    CHECK(c1.feature_indices == std::vector<int>{1, 2});
    CHECK(c2.feature_indices == std::vector<int>{0, 3});
  }

  TEST_CASE("subspace crossover outputs are never empty") {
    Rng rng(7);
    Subspace s1, s2;
    s1.feature_indices = {0};
    s2.feature_indices = {1};
    for (int i = 0; i < 200; ++i) {
      const auto [c1, c2] = crossover_subspaces(s1, s2, rng);
      CHECK(!c1.feature_indices.empty());
      CHECK(!c2.feature_indices.empty());
    }
  }
}
