#include <doctest.h>

#include <cmath>
#include <functional>
#include <random>

#include "common.hpp"
#include "tape.hpp"

using namespace specmine;
using nn::Matrix;
using nn::Tape;

namespace {

Matrix random_matrix(int rows, int cols, std::mt19937_64& rng) {
  Matrix m(rows, cols);
  for (int i = 0; i < rows; ++i) {
    for (int j = 0; j < cols; ++j) m(i, j) = 2.0 * draw_unit(rng) - 1.0;
  }
  return m;
}

double rel_err(double a, double b) {
  return std::abs(a - b) / std::max({1e-8, std::abs(a), std::abs(b)});
}

// Checks d(scalar_fn)/d(inputs[k]) against central differences for every
// entry of every input.
void check_gradients(
    std::vector<Matrix> inputs,
    const std::function<Tape::Var(Tape&, const std::vector<Tape::Var>&)>& fn,
    double h = 1e-5, double tol = 1e-5) {
  Tape tape;
  std::vector<Tape::Var> vars;
  for (const auto& m : inputs) vars.push_back(tape.leaf(m));
  Tape::Var root = fn(tape, vars);
  REQUIRE(tape.value(root).rows() == 1);
  REQUIRE(tape.value(root).cols() == 1);
  tape.backward(root);

  auto eval = [&](const std::vector<Matrix>& values) {
    Tape t;
    std::vector<Tape::Var> vs;
    for (const auto& m : values) vs.push_back(t.leaf(m));
    return t.value(fn(t, vs))(0, 0);
  };

  for (std::size_t k = 0; k < inputs.size(); ++k) {
    const Matrix& grad = tape.grad(vars[k]);
    for (int i = 0; i < inputs[k].rows(); ++i) {
      for (int j = 0; j < inputs[k].cols(); ++j) {
        auto plus = inputs;
        auto minus = inputs;
        plus[k](i, j) += h;
        minus[k](i, j) -= h;
        const double fd = (eval(plus) - eval(minus)) / (2 * h);
        CAPTURE(k);
        CAPTURE(i);
        CAPTURE(j);
        CHECK(rel_err(grad(i, j), fd) < tol);
      }
    }
  }
}

// Scalarizes a matrix with fixed weights so every entry influences the
// root (a plain sum would hide sign errors that cancel).
Tape::Var weighted_sum(Tape& t, Tape::Var v) {
  const auto& m = t.value(v);
  Matrix wl(1, m.rows());
  Matrix wr(m.cols(), 1);
  for (int i = 0; i < m.rows(); ++i) wl(0, i) = 0.3 + 0.1 * i;
  for (int j = 0; j < m.cols(); ++j) wr(j, 0) = 0.7 - 0.05 * j;
  return t.matmul(t.matmul(t.leaf(wl), v), t.leaf(wr));
}

}  // namespace

TEST_CASE("matmul family gradients match finite differences") {
  std::mt19937_64 rng(42);
  check_gradients({random_matrix(3, 4, rng), random_matrix(4, 2, rng)},
                  [](Tape& t, const std::vector<Tape::Var>& v) {
                    return weighted_sum(t, t.matmul(v[0], v[1]));
                  });
  check_gradients({random_matrix(3, 4, rng), random_matrix(2, 4, rng)},
                  [](Tape& t, const std::vector<Tape::Var>& v) {
                    return weighted_sum(t, t.matmul_nt(v[0], v[1]));
                  });
}

TEST_CASE("elementwise and broadcast gradients match finite differences") {
  std::mt19937_64 rng(43);
  check_gradients({random_matrix(3, 4, rng), random_matrix(3, 4, rng)},
                  [](Tape& t, const std::vector<Tape::Var>& v) {
                    return weighted_sum(t, t.add(v[0], v[1]));
                  });
  check_gradients({random_matrix(3, 4, rng), random_matrix(1, 4, rng)},
                  [](Tape& t, const std::vector<Tape::Var>& v) {
                    return weighted_sum(t, t.add_rowvec(v[0], v[1]));
                  });
  check_gradients({random_matrix(3, 4, rng)},
                  [](Tape& t, const std::vector<Tape::Var>& v) {
                    return weighted_sum(t, t.scale(v[0], -1.7));
                  });
  check_gradients({random_matrix(3, 2, rng), random_matrix(3, 3, rng)},
                  [](Tape& t, const std::vector<Tape::Var>& v) {
                    return weighted_sum(t, t.concat_cols(v[0], v[1]));
                  });
  check_gradients({random_matrix(3, 6, rng)},
                  [](Tape& t, const std::vector<Tape::Var>& v) {
                    return weighted_sum(t, t.slice_cols(v[0], 2, 3));
                  });
}

TEST_CASE("nonlinearity gradients match finite differences") {
  std::mt19937_64 rng(44);
  check_gradients({random_matrix(3, 5, rng)},
                  [](Tape& t, const std::vector<Tape::Var>& v) {
                    return weighted_sum(t, t.gelu(v[0]));
                  });
  check_gradients({random_matrix(3, 5, rng)},
                  [](Tape& t, const std::vector<Tape::Var>& v) {
                    return weighted_sum(t, t.tanh(v[0]));
                  });
  // relu is kinked at 0; random values keep a safe margin.
  check_gradients({random_matrix(3, 5, rng)},
                  [](Tape& t, const std::vector<Tape::Var>& v) {
                    return weighted_sum(t, t.relu(v[0]));
                  });
  check_gradients({random_matrix(4, 6, rng)},
                  [](Tape& t, const std::vector<Tape::Var>& v) {
                    return weighted_sum(t, t.softmax_rows(v[0]));
                  });
}

TEST_CASE("layer norm gradients match finite differences") {
  std::mt19937_64 rng(45);
  check_gradients(
      {random_matrix(4, 6, rng), random_matrix(1, 6, rng),
       random_matrix(1, 6, rng)},
      [](Tape& t, const std::vector<Tape::Var>& v) {
        return weighted_sum(t, t.layer_norm_rows(v[0], v[1], v[2]));
      });
}

TEST_CASE("embedding gradients match finite differences") {
  std::mt19937_64 rng(46);
  check_gradients({random_matrix(7, 4, rng)},
                  [](Tape& t, const std::vector<Tape::Var>& v) {
                    return weighted_sum(
                        t, t.embedding_rows(v[0], {3, 1, 3, 6, 0}));
                  });
}

TEST_CASE("cross entropy value matches a manual computation") {
  Tape tape;
  Matrix logits(2, 3);
  logits << 1.0, 2.0, 0.5,
            -1.0, 0.0, 3.0;
  auto v = tape.leaf(logits);
  int scorable = 0;
  auto loss = tape.cross_entropy_sum(v, {1, 2}, &scorable);
  CHECK(scorable == 2);

  auto manual_row = [&](int row, int label) {
    double m = logits.row(row).maxCoeff();
    double lse = m + std::log((logits.row(row).array() - m).exp().sum());
    return lse - logits(row, label);
  };
  const double expected = manual_row(0, 1) + manual_row(1, 2);
  CHECK(tape.value(loss)(0, 0) == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("cross entropy skips ignore-marked rows") {
  Tape tape;
  Matrix logits(3, 4);
  logits.setRandom();
  auto v = tape.leaf(logits);
  int scorable = 0;
  tape.cross_entropy_sum(v, {-100, 2, -100}, &scorable);
  CHECK(scorable == 1);
}

TEST_CASE("cross entropy gradients match finite differences") {
  std::mt19937_64 rng(47);
  check_gradients({random_matrix(5, 4, rng)},
                  [](Tape& t, const std::vector<Tape::Var>& v) {
                    return t.cross_entropy_sum(v[0], {1, -100, 0, 3, 2},
                                               nullptr);
                  });
}

TEST_CASE("argmax picks the first maximum") {
  Matrix logits(3, 3);
  logits << 0.1, 2.0, -1.0,
            5.0, 5.0, 1.0,
            -2.0, -3.0, -2.0;
  auto labels = nn::argmax_rows(logits);
  CHECK(labels == std::vector<int>{1, 0, 0});  // ties resolve low
}

TEST_CASE("softmax never changes the argmax") {
  std::mt19937_64 rng(48);
  for (int trial = 0; trial < 1000; ++trial) {
    Matrix row = random_matrix(1, 24, rng) * 10.0;
    auto direct = nn::argmax_rows(row);
    auto softened = nn::argmax_rows(nn::softmax_rows_value(row));
    CHECK(direct == softened);

    // Shift invariance: adding a constant to the row moves nothing.
    Matrix shifted = row.array() + (draw_unit(rng) * 100.0 - 50.0);
    CHECK(nn::argmax_rows(nn::softmax_rows_value(shifted)) == direct);
  }
}

TEST_CASE("shape violations are rejected") {
  Tape tape;
  auto a = tape.leaf(Matrix::Zero(2, 3));
  auto b = tape.leaf(Matrix::Zero(2, 3));
  CHECK_THROWS_AS(tape.matmul(a, b), Error);
  CHECK_THROWS_AS(tape.slice_cols(a, 2, 5), Error);
  CHECK_THROWS_AS(tape.cross_entropy_sum(a, {0}, nullptr), Error);
  CHECK_THROWS_AS(tape.backward(a), Error);  // non-scalar root
}
