#include <doctest.h>

#include <cmath>

#include "mglm/gradcheck.hpp"
#include "mglm/graph.hpp"
#include "mglm/numeric.hpp"
#include "mglm/optim.hpp"
#include "mglm/rng.hpp"

using namespace mglm;

namespace {

Tensor random_tensor(std::vector<int> shape, Rng& rng, double scale = 1.0) {
  Tensor t = Tensor::zeros(std::move(shape));
  for (double& v : t.data) v = (rng.uniform_double() * 2.0 - 1.0) * scale;
  return t;
}

}  // namespace

TEST_CASE("softmax closed forms") {
  auto p = softmax({0.0, 0.0, 0.0}, 1.0);
  CHECK(p[0] == doctest::Approx(1.0 / 3).epsilon(1e-12));
  CHECK(p[1] == doctest::Approx(1.0 / 3).epsilon(1e-12));

  auto q = softmax({0.0, std::log(2.0)}, 1.0);
  CHECK(q[0] == doctest::Approx(1.0 / 3).epsilon(1e-12));
  CHECK(q[1] == doctest::Approx(2.0 / 3).epsilon(1e-12));

  // Stability under max subtraction.
  auto r = softmax({1000.0, 1000.0, 999.0}, 1.0);
  for (double v : r) CHECK(std::isfinite(v));
  CHECK(r[0] == doctest::Approx(r[1]).epsilon(1e-12));
}

TEST_CASE("softmax errors") {
  CHECK_THROWS_AS(softmax({0.0, 1.0}, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(softmax({0.0, 1.0}, -1.0), std::invalid_argument);
  CHECK_THROWS_AS(softmax({0.0, std::nan("")}, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(softmax({}, 1.0), std::invalid_argument);
}

TEST_CASE("softmax properties: normalization and argmax invariance") {
  Rng rng(7);
  for (int trial = 0; trial < 200; ++trial) {
    int n = 1 + static_cast<int>(rng.next_below(12));
    std::vector<double> x(static_cast<size_t>(n));
    for (double& v : x) v = (rng.uniform_double() * 2.0 - 1.0) * 20.0;
    double tau = 0.01 + rng.uniform_double() * 9.99;
    auto p = softmax(x, tau);
    double sum = 0.0;
    for (double v : p) {
      CHECK(v > 0.0);
      sum += v;
    }
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-9));

    auto argmax = [](const std::vector<double>& v) {
      size_t best = 0;
      for (size_t i = 1; i < v.size(); ++i)
        if (v[i] > v[best]) best = i;
      return best;
    };
    std::vector<double> shifted = x;
    for (double& v : shifted) v += 13.5;
    CHECK(argmax(p) == argmax(softmax(shifted, 1.0)));
    CHECK(argmax(p) == argmax(softmax(x, 3.7)));
  }
}

TEST_CASE("weighted_nll closed forms") {
  // Certain event.
  std::vector<double> lp(6, -100.0);
  lp[3] = 0.0;
  CHECK(weighted_nll(lp, {{3, 1.0}}) == doctest::Approx(0.0));

  std::vector<double> uniform4(4, std::log(0.25));
  CHECK(weighted_nll(uniform4, {{0, 0.5}, {1, 0.5}}) == doctest::Approx(std::log(4.0)).epsilon(1e-12));

  // Hand evaluation: weights sum to 1 over a uniform V=8 distribution.
  std::vector<double> uniform8(8, std::log(1.0 / 8));
  CHECK(weighted_nll(uniform8, {{2, 1.0 / 3}, {5, 2.0 / 3}}) ==
        doctest::Approx(std::log(8.0)).epsilon(1e-12));

  CHECK_THROWS_AS(weighted_nll(uniform4, {{4, 1.0}}), std::invalid_argument);
  CHECK_THROWS_AS(weighted_nll(uniform4, {{-1, 1.0}}), std::invalid_argument);
}

TEST_CASE("backward: sum and dot") {
  Rng rng(11);
  Parameter p("p", random_tensor({5}, rng));
  {
    Graph g;
    g.backward(g.sum(g.param(p)));
    for (double v : p.grad.data) CHECK(v == doctest::Approx(1.0));
  }
  p.zero_grad();
  {
    Graph g;
    int id = g.param(p);
    g.backward(g.dot(id, id));
    for (size_t i = 0; i < p.grad.data.size(); ++i)
      CHECK(p.grad.data[i] == doctest::Approx(2.0 * p.value.data[i]));
  }
  // Repeated backward calls accumulate.
  {
    Graph g;
    int loss = g.sum(g.param(p));
    p.zero_grad();
    g.backward(loss);
    g.backward(loss);
    for (double v : p.grad.data) CHECK(v == doctest::Approx(2.0));
  }
}

TEST_CASE("backward rejects non-scalar loss") {
  Rng rng(3);
  Parameter p("p", random_tensor({2, 2}, rng));
  Graph g;
  int id = g.param(p);
  CHECK_THROWS_AS(g.backward(id), std::invalid_argument);
}

TEST_CASE("per-op gradients match finite differences") {
  Rng rng(23);

  SUBCASE("matmul + bias + relu") {
    Parameter a("a", random_tensor({3, 4}, rng));
    Parameter b("b", random_tensor({4, 5}, rng));
    Parameter c("c", random_tensor({5}, rng));
    auto build = [&](Graph& g) {
      int y = g.add_rowvec(g.matmul(g.param(a), g.param(b)), g.param(c));
      return g.sum(g.relu(y));
    };
    CHECK(gradient_check(build, {&a, &b, &c}, 200, 1) < 1e-6);
  }

  SUBCASE("layer_norm") {
    Parameter x("x", random_tensor({4, 6}, rng));
    Parameter gm("gamma", random_tensor({6}, rng));
    Parameter bt("beta", random_tensor({6}, rng));
    Parameter w("w", random_tensor({6, 3}, rng));
    auto build = [&](Graph& g) {
      int y = g.layer_norm(g.param(x), g.param(gm), g.param(bt));
      int z = g.matmul(y, g.param(w));
      return g.dot(z, z);
    };
    CHECK(gradient_check(build, {&x, &gm, &bt, &w}, 200, 2) < 1e-6);
  }

  SUBCASE("attention_core") {
    Parameter q("q", random_tensor({5, 8}, rng));
    Parameter k("k", random_tensor({5, 8}, rng));
    Parameter v("v", random_tensor({5, 8}, rng));
    auto build = [&](Graph& g) {
      int o = g.attention_core(g.param(q), g.param(k), g.param(v), 2);
      return g.dot(o, o);
    };
    CHECK(gradient_check(build, {&q, &k, &v}, 200, 3) < 1e-5);
  }

  SUBCASE("embed_rows") {
    Parameter tok("tok", random_tensor({7, 4}, rng));
    Parameter pos("pos", random_tensor({6, 4}, rng));
    Parameter chan("chan", random_tensor({2, 4}, rng));
    std::vector<int> tokens = {3, 0, 6, 3};
    std::vector<int> channels = {0, 0, 1, 1};
    auto build = [&](Graph& g) {
      int e = g.embed_rows(g.param(tok), g.param(pos), g.param(chan), tokens, channels);
      return g.dot(e, e);
    };
    CHECK(gradient_check(build, {&tok, &pos, &chan}, 200, 4) < 1e-6);
  }

  SUBCASE("weighted_nll_rows") {
    Parameter logits("logits", random_tensor({3, 6}, rng, 2.0));
    std::vector<uint8_t> banned = {1, 0, 1, 0, 0, 0};
    std::vector<std::vector<RowTarget>> targets = {
        {{3, 0.5}, {4, 0.5}}, {{1, 1.0}}, {{5, 0.25}, {1, 0.75}}};
    auto build = [&](Graph& g) {
      return g.weighted_nll_rows(g.param(logits), banned, targets, 1.0 / 3);
    };
    CHECK(gradient_check(build, {&logits}, 200, 5) < 1e-6);
  }
}

TEST_CASE("adam closed forms") {
  SUBCASE("zero gradient is the identity on the value") {
    Rng rng(5);
    Parameter p("p", random_tensor({4}, rng));
    Tensor before = p.value;
    AdamState s = AdamState::init_like(p);
    p.zero_grad();
    adam_step(p, s, 0.1);
    for (size_t i = 0; i < before.data.size(); ++i) CHECK(p.value.data[i] == before.data[i]);
    CHECK(s.t == 1);
  }

  SUBCASE("single step with unit gradient moves by ~lr") {
    Parameter p("p", Tensor::scalar(1.0));
    AdamState s = AdamState::init_like(p);
    p.grad.data[0] = 1.0;
    adam_step(p, s, 0.1, {0.9, 0.999, 1e-8});
    // Bias correction makes mhat = vhat = 1 up to eps.
    CHECK(p.value.data[0] == doctest::Approx(0.9).epsilon(1e-6));
  }

  SUBCASE("identical gradients move monotonically against the gradient") {
    Parameter p("p", Tensor::scalar(2.0));
    AdamState s = AdamState::init_like(p);
    double prev = p.value.data[0];
    for (int i = 0; i < 2; ++i) {
      p.zero_grad();
      p.grad.data[0] = 0.5;
      adam_step(p, s, 0.05);
      CHECK(p.value.data[0] < prev);
      prev = p.value.data[0];
    }
  }
}

TEST_CASE("gradient_check: linear model, exact case and negative control") {
  Rng rng(41);
  Parameter w("w", random_tensor({3, 3}, rng));
  Tensor x = random_tensor({3, 1}, rng);
  Tensor y = random_tensor({3, 1}, rng);
  auto build = [&](Graph& g) {
    int pred = g.matmul(g.param(w), g.input(x));
    int neg_y = g.input([&] {
      Tensor t = y;
      for (double& v : t.data) v = -v;
      return t;
    }());
    int resid = g.add(pred, neg_y);
    return g.dot(resid, resid);
  };
  CHECK(gradient_check(build, {&w}, 200, 6) < 1e-8);

  // Deliberately corrupted gradient must fail the check.
  std::vector<Tensor> grads = analytic_gradients(build, {&w});
  grads[0].data[4] += 0.1;
  CHECK(max_rel_error_vs_fd(build, {&w}, grads, 200, 6) > 1e-2);
}
