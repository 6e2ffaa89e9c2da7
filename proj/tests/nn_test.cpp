#include <doctest.h>

#include <cmath>
#include <sstream>

#include "qform/error.hpp"
#include "qform/nn/checkpoint.hpp"
#include "qform/nn/layers.hpp"
#include "qform/nn/ops.hpp"

using namespace qform;
using namespace qform::nn;
using doctest::Approx;

namespace {

using Vec = std::vector<double>;

Vec numeric_grad(const std::function<double(const Vec&)>& f, Vec x, double eps = 1e-6) {
  Vec g(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double old = x[i];
    x[i] = old + eps;
    const double up = f(x);
    x[i] = old - eps;
    const double down = f(x);
    x[i] = old;
    g[i] = (up - down) / (2 * eps);
  }
  return g;
}

}  // namespace

TEST_SUITE("nn") {
  TEST_CASE("elementary ops") {
    const auto s = softmax<double>(Vec{0, 0});
    CHECK(s[0] == Approx(0.5));
    CHECK(s[1] == Approx(0.5));
    Vec z{0};
    tanh_inplace<double>(z);
    CHECK(z[0] == 0.0);
    CHECK(sigmoid(0.0) == 0.5);

    Tensor<double> eye({2, 2});
    eye.at(0, 0) = eye.at(1, 1) = 1;
    Vec y(2);
    matvec<double>(eye, Vec{3, 4}, y);
    CHECK(y == Vec{3, 4});
    CHECK_THROWS_AS(matvec<double>(eye, Vec{1, 2, 3}, y), ShapeError);

    CHECK(concat<double>(Vec{1}, Vec{2, 3}) == Vec{1, 2, 3});
    CHECK(elementwise_product<double>(Vec{2, 3}, Vec{4, 5}) == Vec{8, 15});
    CHECK(elementwise_sum<double>(Vec{2, 3}, Vec{4, 5}) == Vec{6, 8});
  }

  TEST_CASE("softmax sums to one") {
    Rng rng(1);
    for (int t = 0; t < 50; ++t) {
      Vec logits(7);
      for (double& v : logits) v = rng.uniform(-20, 20);
      double sum = 0;
      for (double p : softmax<double>(logits)) sum += p;
      CHECK(sum == Approx(1.0).epsilon(1e-6));
    }
  }

  TEST_CASE("nll loss") {
    CHECK(nll_loss<double>(log_softmax<double>(Vec{3.0}), 0) == 0.0);
    CHECK(nll_loss<double>(log_softmax<double>(Vec{1, 1, 1, 1}), 2) ==
          Approx(std::log(4.0)));
    // Hand computation: logits (1, 2, 3), target 0.
    const double expected = -1.0 + std::log(std::exp(1.0) + std::exp(2.0) + std::exp(3.0));
    CHECK(nll_loss<double>(log_softmax<double>(Vec{1, 2, 3}), 0) == Approx(expected));
    CHECK_THROWS_AS(nll_loss<double>(Vec{0.0}, 1), InvalidArgument);
  }

  TEST_CASE("large logits stay finite") {
    const Vec logits{50, -50, 0};
    for (std::size_t k = 0; k < 3; ++k) {
      const double loss = nll_loss<double>(log_softmax<double>(logits), k);
      CHECK(std::isfinite(loss));
    }
    const std::vector<float> lf{50, -50, 0};
    CHECK(std::isfinite(nll_loss<float>(log_softmax<float>(lf), 1)));
  }

  TEST_CASE("dropout") {
    Rng rng(3);
    const std::vector<float> ones(1000000, 1.0f);
    CHECK(dropout<float>(ones, 0.0, true, rng) == ones);
    CHECK(dropout<float>(ones, 0.1, false, rng) == ones);
    const auto d = dropout<float>(ones, 0.1, true, rng);
    double sum = 0;
    std::size_t zeros = 0;
    for (float v : d) {
      sum += v;
      zeros += v == 0.0f;
    }
    CHECK(sum / d.size() == Approx(1.0).epsilon(0.01));
    CHECK(static_cast<double>(zeros) / d.size() == Approx(0.1).epsilon(0.05));
    CHECK_THROWS_AS(dropout<float>(ones, 1.0, true, rng), InvalidArgument);
  }

  TEST_CASE("backward rules match finite differences") {
    const Vec x{0.3, -1.2, 0.7, 2.0};
    const Vec w{0.5, -0.25, 1.5, 0.1};
    auto dot = [&](const Vec& v) {
      double s = 0;
      for (std::size_t i = 0; i < v.size(); ++i) s += w[i] * v[i];
      return s;
    };
    auto tanh_of = [](Vec v) {
      tanh_inplace<double>(v);
      return v;
    };
    auto sig_of = [](Vec v) {
      sigmoid_inplace<double>(v);
      return v;
    };
    auto check = [](const Vec& a, const Vec& b) {
      REQUIRE(a.size() == b.size());
      for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i] == Approx(b[i]).epsilon(1e-6));
    };
    check(tanh_backward<double>(tanh_of(x), w),
          numeric_grad([&](const Vec& v) { return dot(tanh_of(v)); }, x));
    check(sigmoid_backward<double>(sig_of(x), w),
          numeric_grad([&](const Vec& v) { return dot(sig_of(v)); }, x));
    check(log_softmax_backward<double>(log_softmax<double>(x), w),
          numeric_grad([&](const Vec& v) { return dot(log_softmax<double>(v)); }, x));
    check(softmax_backward<double>(softmax<double>(x), w),
          numeric_grad([&](const Vec& v) { return dot(softmax<double>(v)); }, x));
    check(nll_logits_backward<double>(log_softmax<double>(x), 2, 0.5),
          numeric_grad([&](const Vec& v) { return 0.5 * nll_loss<double>(log_softmax<double>(v), 2); }, x));
  }

  TEST_CASE("tanh gradient at zero") {
    const Vec y(3, 0.0), dy(3, 1.0);
    CHECK(tanh_backward<double>(y, dy) == Vec{1, 1, 1});
  }

  TEST_CASE("linear layer gradients and unused parameters") {
    Rng rng(5);
    Linear<double> used("a", 3, 2), unused("b", 3, 2);
    used.init(rng);
    unused.init(rng);
    const Vec x{0.1, -0.4, 0.9};
    const Vec dy{1.0, -2.0};
    Vec dx(3, 0.0);
    used.backward(x, dy, dx);
    for (std::size_t r = 0; r < 2; ++r) {
      for (std::size_t c = 0; c < 3; ++c) CHECK(used.weight.grad.at(r, c) == Approx(dy[r] * x[c]));
      CHECK(used.bias.grad[r] == dy[r]);
    }
    for (std::size_t c = 0; c < 3; ++c) {
      CHECK(dx[c] == Approx(dy[0] * used.weight.value.at(0, c) + dy[1] * used.weight.value.at(1, c)));
    }
    for (auto* p : unused.parameters()) {
      for (double g : p->grad.values()) CHECK(g == 0.0);
    }
  }

  TEST_CASE("initialization bounds") {
    Rng rng(6);
    Linear<float> l("l", 16, 8);
    l.init(rng);
    for (float v : l.weight.value.values()) CHECK(std::abs(v) <= 0.25f);
    for (float v : l.bias.value.values()) CHECK(std::abs(v) <= 0.25f);
  }

  TEST_CASE("sgd") {
    Parameter<double> p("theta", {1});
    p.value[0] = 1;
    p.grad[0] = 2;
    sgd_step<double>({&p}, 0.01);
    CHECK(p.value[0] == Approx(0.98));
    CHECK(p.grad[0] == 0.0);

    p.grad[0] = 5;
    sgd_step<double>({&p}, 0.0);
    CHECK(p.value[0] == Approx(0.98));

    // d/dθ of ½θ² is θ.
    p.value[0] = 1;
    p.grad[0] = p.value[0];
    sgd_step<double>({&p}, 0.1);
    CHECK(p.value[0] == Approx(0.9));
  }

  TEST_CASE("checkpoint round trip") {
    Rng rng(7);
    Linear<float> a("layer", 4, 3), b("layer", 4, 3);
    a.init(rng);
    std::stringstream buf;
    write_checkpoint(buf, a.parameters());
    const std::string bytes = buf.str();
    CHECK(bytes.substr(0, 4) == "QFCK");
    read_checkpoint(buf, b.parameters());
    CHECK(a.weight.value == b.weight.value);
    CHECK(a.bias.value == b.bias.value);

    Linear<float> wrong("layer", 5, 3);
    std::istringstream again(bytes);
    CHECK_THROWS_AS(read_checkpoint(again, wrong.parameters()), ShapeError);
    Linear<float> renamed("other", 4, 3);
    std::istringstream third(bytes);
    CHECK_THROWS_AS(read_checkpoint(third, renamed.parameters()), ParseError);
    std::istringstream truncated(bytes.substr(0, bytes.size() - 3));
    CHECK_THROWS_AS(read_checkpoint(truncated, b.parameters()), ParseError);
  }
}
