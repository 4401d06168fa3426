#include <cmath>
#include <limits>
#include <random>

#include "doctest.h"
#include "sdiar/error.hpp"
#include "sdiar/nn.hpp"
#include "sdiar/optim.hpp"
#include "test_support.hpp"

using namespace sdiar;
using sdiar::test::central_diff;
using sdiar::test::random_matrix;
using sdiar::test::rel_err;

namespace {

// Sum of c_ij * y_ij gives a loss whose output gradient is c.
double weighted_sum(const Matrix<double>& y, const Matrix<double>& c) {
  double s = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) s += y.flat()[i] * c.flat()[i];
  return s;
}

}  // namespace

TEST_CASE("dense forward on hand cases") {
  nn::Dense<double> id(Matrix<double>{{1, 0}, {0, 1}}, {0, 0});
  CHECK(id.forward(Matrix<double>{{3, 4}}) == Matrix<double>{{3, 4}});

  nn::Dense<double> sum(Matrix<double>{{1, 1}}, {1});
  CHECK(sum.forward(Matrix<double>{{2, 3}})(0, 0) == 6.0);
}

TEST_CASE("dense rejects wrong input width") {
  std::mt19937_64 rng(1);
  nn::Dense<double> d(3, 2, true, rng);
  CHECK_THROWS_AS(d.forward(Matrix<double>(1, 4)), ConfigError);
}

TEST_CASE("dense backward matches central differences over seeds") {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    std::mt19937_64 rng(seed);
    nn::Dense<double> d(4, 3, true, rng);
    for (auto& b : d.bias()) b = std::normal_distribution<double>()(rng);
    Matrix<double> x = random_matrix(5, 4, seed + 100);
    const Matrix<double> c = random_matrix(5, 3, seed + 200);
    auto f = [&] { return weighted_sum(d.apply(x), c); };

    d.zero_grad();
    d.forward(x);
    const Matrix<double> dx = d.backward(c);

    double worst = 0.0;
    for (std::size_t i = 0; i < d.weights().size(); ++i) {
      const double n = central_diff(f, &d.weights().flat()[i]);
      worst = std::max(worst, rel_err(d.grad_weights().flat()[i], n));
    }
    for (std::size_t i = 0; i < d.bias().size(); ++i) {
      worst = std::max(worst, rel_err(d.grad_bias()[i], central_diff(f, &d.bias()[i])));
    }
    for (std::size_t i = 0; i < x.size(); ++i) {
      worst = std::max(worst, rel_err(dx.flat()[i], central_diff(f, &x.flat()[i])));
    }
    CHECK(worst < 1e-4);
  }
}

TEST_CASE("batch-norm fixed point and scale collapse") {
  nn::BatchNorm<double> bn(2, 1e-12);
  // Columns with mean 0 and population variance 1.
  Matrix<double> x{{1, -1}, {-1, 1}, {1, 1}, {-1, -1}};
  const Matrix<double> y = bn.forward(x);
  for (std::size_t i = 0; i < x.size(); ++i) CHECK(std::abs(y.flat()[i] - x.flat()[i]) < 1e-6);

  nn::BatchNorm<double> flat(2);
  flat.gamma() = {0.0, 0.0};
  flat.beta() = {0.5, -2.0};
  const Matrix<double> z = flat.forward(random_matrix(6, 2, 3));
  for (std::size_t i = 0; i < z.rows(); ++i) {
    CHECK(z(i, 0) == 0.5);
    CHECK(z(i, 1) == -2.0);
  }
}

TEST_CASE("batch-norm needs two rows in train mode") {
  nn::BatchNorm<double> bn(3);
  CHECK_THROWS_AS(bn.forward(Matrix<double>(1, 3)), DataError);
  bn.set_mode(nn::Mode::kEval);
  CHECK_NOTHROW(bn.forward(Matrix<double>(1, 3)));
}

TEST_CASE("batch-norm eval mode uses running statistics only") {
  nn::BatchNorm<double> bn(1);
  bn.running_mean() = {2.0};
  bn.running_var() = {4.0};
  bn.set_mode(nn::Mode::kEval);
  const Matrix<double> y = bn.forward(Matrix<double>{{4.0}, {0.0}});
  CHECK(y(0, 0) == doctest::Approx(2.0 / std::sqrt(4.0 + 1e-5)).epsilon(1e-12));
  CHECK(y(1, 0) == doctest::Approx(-2.0 / std::sqrt(4.0 + 1e-5)).epsilon(1e-12));
}

TEST_CASE("batch-norm running statistics follow the momentum rule") {
  nn::BatchNorm<double> bn(1, 1e-5, 0.1);
  bn.forward(Matrix<double>{{1.0}, {3.0}});
  CHECK(bn.running_mean()[0] == doctest::Approx(0.9 * 0.0 + 0.1 * 2.0));
  // Unbiased batch variance of {1, 3} is 2.
  CHECK(bn.running_var()[0] == doctest::Approx(0.9 * 1.0 + 0.1 * 2.0));
}

TEST_CASE("batch-norm train backward matches central differences") {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> nd;
    nn::BatchNorm<double> bn(3);
    for (auto& g : bn.gamma()) g = 1.0 + 0.5 * nd(rng);
    for (auto& b : bn.beta()) b = nd(rng);
    Matrix<double> x = random_matrix(6, 3, seed + 50, 2.0);
    const Matrix<double> c = random_matrix(6, 3, seed + 70);
    auto f = [&] {
      nn::BatchNorm<double> probe = bn;
      return weighted_sum(probe.forward(x), c);
    };

    bn.zero_grad();
    nn::BatchNorm<double> run = bn;
    run.forward(x);
    const Matrix<double> dx = run.backward(c);

    double worst = 0.0;
    for (std::size_t j = 0; j < 3; ++j) {
      worst = std::max(worst, rel_err(run.grad_gamma()[j], central_diff(f, &bn.gamma()[j])));
      worst = std::max(worst, rel_err(run.grad_beta()[j], central_diff(f, &bn.beta()[j])));
    }
    for (std::size_t i = 0; i < x.size(); ++i) {
      worst = std::max(worst, rel_err(dx.flat()[i], central_diff(f, &x.flat()[i])));
    }
    CHECK(worst < 1e-4);
  }
}

TEST_CASE("leaky relu forward and backward") {
  nn::LeakyRelu<double> act;
  const Matrix<double> y = act.forward(Matrix<double>{{-2.0, 0.0, 3.0}});
  CHECK(y(0, 0) == doctest::Approx(-0.02));
  CHECK(y(0, 1) == 0.0);
  CHECK(y(0, 2) == 3.0);
  const Matrix<double> g = act.backward(Matrix<double>{{1.0, 1.0, 1.0}});
  CHECK(g(0, 0) == doctest::Approx(0.01));
  CHECK(g(0, 2) == 1.0);
}

TEST_CASE("softmax hand cases") {
  const auto u = nn::softmax_rows(Matrix<double>{{0, 0, 0}});
  for (double v : u.flat()) CHECK(v == doctest::Approx(1.0 / 3.0).epsilon(1e-15));

  const auto big = nn::softmax_rows(Matrix<double>{{1000, 0}});
  CHECK(std::isfinite(big(0, 0)));
  CHECK(big(0, 0) == doctest::Approx(1.0));
  CHECK(big(0, 1) < 1e-300);

  const auto two = nn::softmax_rows(Matrix<double>{{std::log(2.0), 0}});
  CHECK(two(0, 0) == doctest::Approx(2.0 / 3.0).epsilon(1e-14));
  CHECK(two(0, 1) == doctest::Approx(1.0 / 3.0).epsilon(1e-14));
}

TEST_CASE("softmax rows sum to one on random logits") {
  for (std::uint64_t seed = 1; seed <= 50; ++seed) {
    const auto p = nn::softmax_rows(random_matrix(8, 5, seed, 30.0));
    for (std::size_t i = 0; i < p.rows(); ++i) {
      double s = 0.0;
      for (double v : p.row(i)) {
        CHECK(v >= 0.0);
        s += v;
      }
      CHECK(std::abs(s - 1.0) <= 1e-12);
    }
  }
}

TEST_CASE("softmax backward matches central differences") {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    Matrix<double> z = random_matrix(4, 3, seed);
    const Matrix<double> c = random_matrix(4, 3, seed + 9);
    auto f = [&] { return weighted_sum(nn::softmax_rows(z), c); };
    const Matrix<double> dz = nn::softmax_backward(nn::softmax_rows(z), c);
    for (std::size_t i = 0; i < z.size(); ++i) {
      CHECK(rel_err(dz.flat()[i], central_diff(f, &z.flat()[i])) < 1e-4);
    }
  }
}

TEST_CASE("optimizer leaves parameters alone on zero gradient without decay") {
  std::vector<double> w{1.5, -2.0};
  std::vector<double> g{0.0, 0.0};
  nn::OptimizerConfig cfg;
  cfg.weight_decay = 0.0;
  nn::Optimizer<double> opt(cfg);
  std::vector<nn::ParamRef<double>> params{{"w", w, g}};
  for (int i = 0; i < 5; ++i) opt.step(params);
  CHECK(w[0] == 1.5);
  CHECK(w[1] == -2.0);
}

TEST_CASE("optimizer decreases a quadratic in one step") {
  std::vector<double> w{1.0};
  std::vector<double> g{2.0};
  nn::Optimizer<double> opt;
  std::vector<nn::ParamRef<double>> params{{"w", w, g}};
  opt.step(params);
  CHECK(w[0] * w[0] < 1.0);
}

TEST_CASE("decoupled weight decay shrinks before the Adam delta") {
  std::vector<double> w{2.0};
  std::vector<double> g{0.0};
  nn::OptimizerConfig cfg;
  cfg.learning_rate = 0.1;
  cfg.weight_decay = 0.5;
  nn::Optimizer<double> opt(cfg);
  std::vector<nn::ParamRef<double>> params{{"w", w, g}};
  opt.step(params);
  CHECK(w[0] == doctest::Approx(2.0 - 0.1 * 0.5 * 2.0));
}

TEST_CASE("optimizer converges on a two-dimensional quadratic") {
  // f(w) = (w0 - 1)^2 + 3 (w1 + 2)^2
  std::vector<double> w{4.0, 3.0};
  std::vector<double> g(2);
  nn::OptimizerConfig cfg;
  cfg.learning_rate = 0.05;
  cfg.weight_decay = 0.0;
  nn::Optimizer<double> opt(cfg);
  std::vector<nn::ParamRef<double>> params{{"w", w, g}};
  auto grad = [&] {
    g[0] = 2.0 * (w[0] - 1.0);
    g[1] = 6.0 * (w[1] + 2.0);
  };
  for (int i = 0; i < 2000; ++i) {
    grad();
    opt.step(params);
  }
  grad();
  CHECK(std::hypot(g[0], g[1]) < 1e-3);
}

TEST_CASE("optimizer names the parameter with a non-finite gradient") {
  std::vector<double> w{1.0};
  std::vector<double> g{std::numeric_limits<double>::quiet_NaN()};
  nn::Optimizer<double> opt;
  std::vector<nn::ParamRef<double>> params{{"enc0.dense.weight", w, g}};
  try {
    opt.step(params);
    FAIL("expected NumericError");
  } catch (const NumericError& e) {
    CHECK(std::string(e.what()).find("enc0.dense.weight") != std::string::npos);
  }
}

TEST_CASE("grad_check on a linear least-squares net") {
  std::mt19937_64 rng(4);
  nn::Dense<double> d(3, 2, true, rng);
  const Matrix<double> x = random_matrix(6, 3, 5);
  const Matrix<double> t = random_matrix(6, 2, 6);
  auto eval = [&](bool grad) {
    d.zero_grad();
    const Matrix<double> y = grad ? d.forward(x) : d.apply(x);
    double loss = 0.0;
    Matrix<double> dy(y.rows(), y.cols());
    for (std::size_t i = 0; i < y.size(); ++i) {
      const double e = y.flat()[i] - t.flat()[i];
      loss += 0.5 * e * e;
      dy.flat()[i] = e;
    }
    if (grad) d.backward(dy);
    return loss;
  };
  std::vector<nn::ParamRef<double>> params;
  d.collect_params("lin", params);
  const auto r = nn::grad_check(eval, params);
  CHECK(r.max_rel_error < 1e-6);
  CHECK(r.checked == 8);
}

TEST_CASE("grad_check on a constant function reports zero error") {
  std::vector<double> w{1.0, 2.0};
  std::vector<double> g{0.0, 0.0};
  std::vector<nn::ParamRef<double>> params{{"w", w, g}};
  const auto r = nn::grad_check([](bool) { return 7.0; }, params);
  CHECK(r.max_rel_error == 0.0);
}
