#include "doctest.h"
#include "util/rng.hpp"

using namespace nevo;

TEST_SUITE("rng") {
  TEST_CASE("seeded streams replay") {
    Rng a(42), b(42);
    for (int i = 0; i < 100; ++i) CHECK(a.next_u64() == b.next_u64());
  }

  TEST_CASE("state round-trips through text") {
    Rng a(7);
    for (int i = 0; i < 13; ++i) a.next_u64();
    const std::string state = a.save_state();
    Rng b(0);
    b.load_state(state);
    for (int i = 0; i < 100; ++i) CHECK(a.next_u64() == b.next_u64());
  }

  TEST_CASE("uniform_int stays in bounds and hits both ends") {
    Rng rng(3);
    bool lo = false, hi = false;
    for (int i = 0; i < 1000; ++i) {
      const auto v = rng.uniform_int(2, 5);
      CHECK(v >= 2);
      CHECK(v <= 5);
      lo |= v == 2;
      hi |= v == 5;
    }
    CHECK(lo);
    CHECK(hi);
  }

  TEST_CASE("scripted source forces exact draws") {
    ScriptedSource src({ScriptedSource::word_for_int(0, 9, 7),
                        ScriptedSource::word_for_uniform(0.25)});
    CHECK(src.uniform_int(0, 9) == 7);
    CHECK(src.uniform() == doctest::Approx(0.25).epsilon(1e-12));
  }

  TEST_CASE("uniform lies in [0,1)") {
    Rng rng(11);
    for (int i = 0; i < 1000; ++i) {
      const double u = rng.uniform();
      CHECK(u >= 0.0);
      CHECK(u < 1.0);
    }
  }
}
