#include <cmath>

#include "core/autodiff.hpp"
#include "doctest.h"
#include "util/rng.hpp"

using namespace nevo;

namespace {

Mat random_mat(int r, int c, Rng& rng) {
  Mat m(r, c);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = rng.uniform(-1.0, 1.0);
  return m;
}

// Central-difference check of d(loss)/d(input) for a scalar-valued graph.
template <typename Build>
double check_input_grad(Mat x0, Build&& build, double h = 1e-6) {
  Tape t;
  const int x = t.leaf(x0);
  const int loss = build(t, x);
  t.backward(loss);
  const Mat g = t.grad(x);

  double max_rel = 0.0;
  for (Eigen::Index i = 0; i < x0.size(); ++i) {
    Mat xp = x0, xm = x0;
    xp.data()[i] += h;
    xm.data()[i] -= h;
    Tape tp, tm;
    const double up = tp.value(build(tp, tp.leaf(xp)))(0, 0);
    const double dn = tm.value(build(tm, tm.leaf(xm)))(0, 0);
    const double num = (up - dn) / (2.0 * h);
    const double rel =
        std::abs(g.data()[i] - num) / std::max({std::abs(g.data()[i]), std::abs(num), 1e-6});
    max_rel = std::max(max_rel, rel);
  }
  return max_rel;
}

}  // namespace

TEST_SUITE("autodiff") {
  TEST_CASE("matmul-tanh chain gradient matches finite differences") {
    Rng rng(1);
    const Mat w = random_mat(4, 3, rng);
    const double err = check_input_grad(random_mat(2, 4, rng), [&](Tape& t, int x) {
      return t.sum_sq(t.tanh_(t.matmul(x, t.leaf(w))));
    });
    CHECK(err < 1e-6);
  }

  TEST_CASE("softmax rows gradient matches finite differences") {
    Rng rng(2);
    const double err = check_input_grad(random_mat(3, 5, rng), [&](Tape& t, int x) {
      return t.sum_sq(t.softmax_rows(x));
    });
    CHECK(err < 1e-6);
  }

  TEST_CASE("im2col gradient matches finite differences") {
    Rng rng(3);
    const Mat w = random_mat(9, 2, rng);
    const double err = check_input_grad(random_mat(5, 3, rng), [&](Tape& t, int x) {
      return t.sum_sq(t.matmul(t.im2col(x, 3), t.leaf(w)));
    });
    CHECK(err < 1e-6);
  }

  TEST_CASE("slice and concat invert each other") {
    Rng rng(4);
    const Mat x0 = random_mat(3, 6, rng);
    Tape t;
    const int x = t.leaf(x0);
    const int joined = t.concat_cols({t.slice_cols(x, 0, 2), t.slice_cols(x, 2, 4)});
    CHECK((t.value(joined) - x0).norm() == 0.0);
    const double err = check_input_grad(x0, [&](Tape& tt, int xx) {
      return tt.sum_sq(tt.concat_cols({tt.slice_cols(xx, 0, 2), tt.slice_cols(xx, 2, 4)}));
    });
    CHECK(err < 1e-6);
  }

  TEST_CASE("sigmoid and cmul gradients match finite differences") {
    Rng rng(5);
    const Mat w = random_mat(3, 3, rng);
    const double err = check_input_grad(random_mat(3, 3, rng), [&](Tape& t, int x) {
      return t.sum_sq(t.cmul(t.sigmoid_(x), t.leaf(w)));
    });
    CHECK(err < 1e-6);
  }

  TEST_CASE("add_rowvec broadcasts and routes gradient to the row") {
    Rng rng(6);
    const Mat x0 = random_mat(4, 3, rng);
    const Mat b0 = random_mat(1, 3, rng);
    Tape t;
    const int x = t.leaf(x0);
    const int b = t.leaf(b0);
    const int loss = t.sum_sq(t.add_rowvec(x, b));
    t.backward(loss);
    const Mat expect = 2.0 * (x0.rowwise() + b0.row(0)).colwise().sum();
    CHECK((t.grad(b) - expect).norm() < 1e-10);
  }

  TEST_CASE("mean_all equals sum over size") {
    Rng rng(7);
    const Mat x0 = random_mat(3, 4, rng);
    Tape t;
    const int m = t.mean_all(t.leaf(x0));
    CHECK(t.value(m)(0, 0) == doctest::Approx(x0.mean()).epsilon(1e-14));
  }
}
