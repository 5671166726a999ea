#include <doctest.h>

#include <cmath>
#include <vector>

#include "ctes/errors.hpp"
#include "ctes/mlp.hpp"
#include "ctes/rng.hpp"

using namespace ctes;

namespace {

// Independent oracle: central finite differences of the forward pass.
std::vector<double> fd_gradient(Mlp& net, const std::vector<double>& x,
                                double h = 1e-5) {
  std::vector<double> grad(net.num_params());
  for (int i = 0; i < net.num_params(); ++i) {
    const double saved = net.params()[i];
    net.params()[i] = saved + h;
    const double up = net.forward(x);
    net.params()[i] = saved - h;
    const double down = net.forward(x);
    net.params()[i] = saved;
    grad[i] = (up - down) / (2.0 * h);
  }
  return grad;
}

double rel_err(double a, double b) {
  const double denom = std::max(1e-8, std::abs(a) + std::abs(b));
  return std::abs(a - b) / denom;
}

}  // namespace

TEST_CASE("zero network outputs zero everywhere") {
  Mlp net({4, 8, 1});
  Rng rng(1);
  for (int i = 0; i < 50; ++i) {
    const std::vector<double> x = {rng.uniform(), rng.uniform(), rng.uniform(),
                                   rng.uniform()};
    CHECK(net.forward(x) == 0.0);
  }
}

TEST_CASE("forward pass is deterministic for a fixed seed") {
  Rng rng_a(123);
  Rng rng_b(123);
  const Mlp a = Mlp::glorot_init(6, {32, 32}, rng_a);
  const Mlp b = Mlp::glorot_init(6, {32, 32}, rng_b);
  CHECK(a.params() == b.params());
  const std::vector<double> x = {0.1, -0.2, 0.3, 0.7, 0.0, 1.0};
  CHECK(a.forward(x) == b.forward(x));
}

TEST_CASE("dimension mismatch raises a shape error") {
  Rng rng(2);
  const Mlp net = Mlp::glorot_init(5, {8}, rng);
  CHECK_THROWS_AS(net.forward(std::vector<double>{1.0, 2.0}), ShapeError);
}

TEST_CASE("analytic gradients match central finite differences") {
  Rng rng(7);
  for (int draw = 0; draw < 25; ++draw) {
    Mlp net = Mlp::glorot_init(8, {32, 32}, rng);
    std::vector<double> x(8);
    for (double& v : x) v = rng.uniform(-1.0, 1.0);

    std::vector<double> analytic(net.num_params(), 0.0);
    net.forward_backward(x, 1.0, analytic);
    const std::vector<double> numeric = fd_gradient(net, x);
    double worst = 0.0;
    for (int i = 0; i < net.num_params(); ++i) {
      worst = std::max(worst, rel_err(analytic[i], numeric[i]));
    }
    CHECK(worst < 1e-4);
  }
}

TEST_CASE("forward_backward returns the forward value and scales by upstream") {
  Rng rng(9);
  Mlp net = Mlp::glorot_init(4, {16}, rng);
  const std::vector<double> x = {0.3, -0.4, 0.9, 0.0};
  std::vector<double> g1(net.num_params(), 0.0);
  std::vector<double> g3(net.num_params(), 0.0);
  const double value = net.forward_backward(x, 1.0, g1);
  CHECK(value == doctest::Approx(net.forward(x)).epsilon(1e-15));
  net.forward_backward(x, 3.0, g3);
  for (int i = 0; i < net.num_params(); ++i) {
    CHECK(g3[i] == doctest::Approx(3.0 * g1[i]).epsilon(1e-12));
  }
}

TEST_CASE("adam leaves parameters unchanged under zero gradients") {
  Rng rng(11);
  Mlp net = Mlp::glorot_init(3, {8}, rng);
  const std::vector<double> before = net.params();
  AdamOptimizer adam(net.num_params(), 0.01);
  const std::vector<double> zeros(net.num_params(), 0.0);
  adam.step(net.params(), zeros);
  CHECK(net.params() == before);
}

TEST_CASE("adam descends a simple quadratic") {
  // minimize (w - 3)^2 over a single parameter
  std::vector<double> w = {0.0};
  AdamOptimizer adam(1, 0.05);
  for (int i = 0; i < 2000; ++i) {
    const std::vector<double> grad = {2.0 * (w[0] - 3.0)};
    adam.step(w, grad);
  }
  CHECK(w[0] == doctest::Approx(3.0).epsilon(1e-3));
}
