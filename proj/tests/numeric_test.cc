// Copyright 2026 The Spanfield Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <limits>
#include <numeric>

#include "spanfield/numeric/grad_check.h"
#include "spanfield/numeric/ops.h"
#include "spanfield/numeric/params.h"
#include "spanfield/random.h"

namespace spanfield {
namespace {

using A = NumArray<double>;

A RandomArray(Rng& rng, const Shape& shape, double scale = 1.0) {
  A a(shape);
  for (auto& v : a.values()) v = rng.Normal() * scale;
  return a;
}

double WeightedSum(const A& out, const A& weights) {
  double s = 0.0;
  for (int64_t i = 0; i < out.size(); ++i) s += out[i] * weights[i];
  return s;
}

void ExpectNear(const A& actual, const std::vector<double>& expected, double tol) {
  REQUIRE(actual.size() == static_cast<int64_t>(expected.size()));
  for (size_t i = 0; i < expected.size(); ++i) {
    CHECK(actual[i] == doctest::Approx(expected[i]).epsilon(tol));
  }
}

// Copies a tensor named `name` from the store into a plain array.
const A& V(ParamStore<double>& s, const char* name) { return s.Get(name).value; }
A* G(ParamStore<double>& s, const char* name) { return &s.Get(name).grad; }

// ------------------------------------------------------------------ linear

TEST_CASE("linear: hand matrix multiply") {
  A x({1, 1, 2}, {1, 2});
  A w({2, 2}, {1, 0, 0, 2});
  A b({2}, {1, 1});
  ExpectNear(LinearForward(x, w, b), {2, 5}, 1e-15);
}

TEST_CASE("linear: zero input yields bias rows, identity weight yields input") {
  Rng rng(1);
  A b = RandomArray(rng, {3});
  A out = LinearForward(A({2, 4, 5}), RandomArray(rng, {5, 3}), b);
  for (int64_t r = 0; r < 8; ++r) {
    for (int64_t o = 0; o < 3; ++o) CHECK(out[r * 3 + o] == b[o]);
  }
  A x = RandomArray(rng, {2, 3, 4});
  A eye({4, 4});
  for (int i = 0; i < 4; ++i) eye.at({i, i}) = 1.0;
  A y = LinearForward(x, eye, A({4}));
  CHECK(y == x);
}

TEST_CASE("linear: shape mismatch names both shapes") {
  try {
    LinearForward(A({2, 3}), A({4, 2}), A({2}));
    FAIL("expected DimensionError");
  } catch (const DimensionError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("[2,3]") != std::string::npos);
    CHECK(msg.find("[4,2]") != std::string::npos);
  }
}

TEST_CASE("linear: backward matches finite differences") {
  Rng rng(2);
  ParamStore<double> s;
  s.Add("x", {2, 3, 4}).value = RandomArray(rng, {2, 3, 4});
  s.Add("w", {4, 5}).value = RandomArray(rng, {4, 5});
  s.Add("b", {5}).value = RandomArray(rng, {5});
  const A r = RandomArray(rng, {2, 3, 5});
  auto loss = [&](bool grad) {
    A out = LinearForward(V(s, "x"), V(s, "w"), V(s, "b"));
    if (grad) LinearBackward(V(s, "x"), V(s, "w"), r, G(s, "x"), G(s, "w"), G(s, "b"));
    return WeightedSum(out, r);
  };
  const auto report = FiniteDifferenceCheck(loss, &s, {.tolerance = 1e-7});
  CHECK(report.passed);
  CHECK(report.max_relative_error < 1e-7);
}

// -------------------------------------------------------------- layer norm

TEST_CASE("layer_norm: closed form for [1,3]") {
  A out = LayerNormForward(A({2}, {1, 3}), A::Full({2}, 1.0), A({2}), 1e-14);
  ExpectNear(out, {-1, 1}, 1e-9);
}

TEST_CASE("layer_norm: unit gain gives zero mean and unit variance per slice") {
  Rng rng(3);
  const double eps = 1e-5;
  A x = RandomArray(rng, {4, 7, 16}, 3.0);
  A out = LayerNormForward(x, A::Full({16}, 1.0), A({16}), eps);
  for (int64_t r = 0; r < 28; ++r) {
    double mean = 0, var = 0;
    for (int i = 0; i < 16; ++i) mean += out[r * 16 + i];
    mean /= 16;
    for (int i = 0; i < 16; ++i) var += (out[r * 16 + i] - mean) * (out[r * 16 + i] - mean);
    var /= 16;
    CHECK(std::abs(mean) < 1e-9);
    CHECK(std::abs(var - 1.0) < eps);
  }
}

TEST_CASE("layer_norm: shift invariance property") {
  Rng rng(4);
  for (int trial = 0; trial < 50; ++trial) {
    A x = RandomArray(rng, {3, 8}, 2.0);
    const double c = rng.Normal() * 10.0;
    A shifted = x;
    for (auto& v : shifted.values()) v += c;
    A a = LayerNormForward(x, A::Full({8}, 1.0), A({8}), 1e-5);
    A b = LayerNormForward(shifted, A::Full({8}, 1.0), A({8}), 1e-5);
    for (int64_t i = 0; i < a.size(); ++i) CHECK(std::abs(a[i] - b[i]) < 1e-9);
  }
}

TEST_CASE("layer_norm: degenerate axis is rejected") {
  CHECK_THROWS_AS(LayerNormForward(A({3, 1}), A({1}), A({1}), 1e-5), DimensionError);
}

TEST_CASE("layer_norm: backward matches finite differences") {
  Rng rng(5);
  ParamStore<double> s;
  s.Add("x", {3, 6}).value = RandomArray(rng, {3, 6});
  s.Add("gain", {6}).value = RandomArray(rng, {6});
  s.Add("bias", {6}).value = RandomArray(rng, {6});
  const A r = RandomArray(rng, {3, 6});
  auto loss = [&](bool grad) {
    LayerNormCache<double> cache;
    A out = LayerNormForward(V(s, "x"), V(s, "gain"), V(s, "bias"), 1e-5, &cache);
    if (grad) LayerNormBackward(cache, V(s, "gain"), r, G(s, "x"), G(s, "gain"), G(s, "bias"));
    return WeightedSum(out, r);
  };
  CHECK(FiniteDifferenceCheck(loss, &s, {.tolerance = 1e-6}).passed);
}

// ----------------------------------------------------------------- softmax

TEST_CASE("softmax: closed-form values") {
  ExpectNear(SoftmaxForward(A({4})), {0.25, 0.25, 0.25, 0.25}, 1e-15);
  ExpectNear(SoftmaxForward(A({2}, {0.0, std::log(3.0)})), {0.25, 0.75}, 1e-15);
  const std::vector<uint8_t> mask = {0, 0, 1};
  A masked = SoftmaxForward(A({3}, {5, 5, 123}), mask);
  ExpectNear(masked, {0.5, 0.5, 0.0}, 1e-15);
  CHECK(masked[2] == 0.0);
}

TEST_CASE("softmax: rows sum to one and masked entries are exactly zero") {
  Rng rng(6);
  for (int trial = 0; trial < 100; ++trial) {
    const int64_t k = 1 + static_cast<int64_t>(rng.UniformInt(12));
    A x = RandomArray(rng, {5, k}, 20.0);
    std::vector<uint8_t> mask(x.size());
    for (int64_t r = 0; r < 5; ++r) {
      const int64_t keep = static_cast<int64_t>(rng.UniformInt(k));
      for (int64_t i = 0; i < k; ++i) mask[r * k + i] = (i != keep) && rng.Bernoulli(0.4);
    }
    A y = SoftmaxForward(x, mask);
    for (int64_t r = 0; r < 5; ++r) {
      double sum = 0.0;
      for (int64_t i = 0; i < k; ++i) {
        CHECK(y[r * k + i] >= 0.0);
        if (mask[r * k + i]) CHECK(y[r * k + i] == 0.0);
        sum += y[r * k + i];
      }
      CHECK(std::abs(sum - 1.0) < 1e-9);
    }
  }
}

TEST_CASE("softmax: large logits stay finite") {
  A y = SoftmaxForward(A({3}, {1000.0, 999.0, -1000.0}));
  CHECK(y.AllFinite());
  CHECK(y[0] + y[1] + y[2] == doctest::Approx(1.0));
}

TEST_CASE("softmax: all-masked slice is an error") {
  const std::vector<uint8_t> mask = {1, 1};
  CHECK_THROWS_AS(SoftmaxForward(A({2}), mask), DataError);
}

TEST_CASE("softmax: backward matches finite differences") {
  Rng rng(7);
  ParamStore<double> s;
  s.Add("x", {3, 5}).value = RandomArray(rng, {3, 5});
  const A r = RandomArray(rng, {3, 5});
  const std::vector<uint8_t> mask = {0, 0, 1, 0, 0, 1, 0, 0, 0, 0, 0, 0, 0, 0, 1};
  auto loss = [&](bool grad) {
    A y = SoftmaxForward(V(s, "x"), mask);
    if (grad) SoftmaxBackward(y, r, G(s, "x"));
    return WeightedSum(y, r);
  };
  CHECK(FiniteDifferenceCheck(loss, &s, {.tolerance = 1e-6}).passed);
}

// --------------------------------------------------------------- attention

struct AttentionFixture {
  explicit AttentionFixture(int64_t hidden, uint64_t seed) : rng(seed) {
    s.Add("qkv_w", {hidden, 3 * hidden}).value = RandomArray(rng, {hidden, 3 * hidden}, 0.5);
    s.Add("q_b", {hidden}).value = RandomArray(rng, {hidden}, 0.5);
    s.Add("v_b", {hidden}).value = RandomArray(rng, {hidden}, 0.5);
    s.Add("out_w", {hidden, hidden}).value = RandomArray(rng, {hidden, hidden}, 0.5);
    s.Add("out_b", {hidden}).value = RandomArray(rng, {hidden}, 0.5);
  }
  AttentionWeights<double> weights() {
    return {V(s, "qkv_w"), V(s, "q_b"), V(s, "v_b"), V(s, "out_w"), V(s, "out_b")};
  }
  Rng rng;
  ParamStore<double> s;
};

// Literal per-head loop-and-concatenate attention, written without any of
// the library's matrix helpers.
A NaiveAttention(const A& x, const A& wqkv, const A& bq, const A& bv, const A& wo, const A& bo,
                 int heads, const std::vector<uint8_t>& pad) {
  const int64_t batch = x.dim(0), len = x.dim(1), hidden = x.dim(2);
  const int64_t d = hidden / heads;
  A out({batch, len, hidden});
  for (int64_t b = 0; b < batch; ++b) {
    std::vector<double> concat(len * hidden, 0.0);
    for (int h = 0; h < heads; ++h) {
      auto project = [&](int64_t t, int64_t part, int64_t j) {
        const int64_t col = part * hidden + h * d + j;
        double v = part == 0 ? bq[h * d + j] : part == 2 ? bv[h * d + j] : 0.0;
        for (int64_t i = 0; i < hidden; ++i) v += x.at({b, t, i}) * wqkv.at({i, col});
        return v;
      };
      for (int64_t qi = 0; qi < len; ++qi) {
        std::vector<double> scores(len, 0.0);
        double max_score = -std::numeric_limits<double>::infinity();
        for (int64_t kj = 0; kj < len; ++kj) {
          if (!pad.empty() && pad[b * len + kj]) continue;
          double dot = 0.0;
          for (int64_t j = 0; j < d; ++j) dot += project(qi, 0, j) * project(kj, 1, j);
          scores[kj] = dot / std::sqrt(static_cast<double>(d));
          max_score = std::max(max_score, scores[kj]);
        }
        double z = 0.0;
        std::vector<double> w(len, 0.0);
        for (int64_t kj = 0; kj < len; ++kj) {
          if (!pad.empty() && pad[b * len + kj]) continue;
          w[kj] = std::exp(scores[kj] - max_score);
          z += w[kj];
        }
        for (int64_t j = 0; j < d; ++j) {
          double acc = 0.0;
          for (int64_t kj = 0; kj < len; ++kj) acc += w[kj] / z * project(kj, 2, j);
          concat[qi * hidden + h * d + j] = acc;
        }
      }
    }
    for (int64_t t = 0; t < len; ++t) {
      for (int64_t o = 0; o < hidden; ++o) {
        double v = bo[o];
        for (int64_t i = 0; i < hidden; ++i) v += concat[t * hidden + i] * wo.at({i, o});
        out.at({b, t, o}) = v;
      }
    }
  }
  return out;
}

TEST_CASE("attention: matches naive per-head reference") {
  AttentionFixture f(6, 8);
  A x = RandomArray(f.rng, {2, 5, 6});
  const std::vector<uint8_t> pad = {0, 0, 0, 1, 1, 0, 0, 0, 0, 0};
  for (const auto& mask : {std::vector<uint8_t>{}, pad}) {
    A fast = MultiHeadSelfAttention(x, f.weights(), 2, mask);
    A slow = NaiveAttention(x, V(f.s, "qkv_w"), V(f.s, "q_b"), V(f.s, "v_b"), V(f.s, "out_w"),
                            V(f.s, "out_b"), 2, mask);
    for (int64_t i = 0; i < fast.size(); ++i) CHECK(std::abs(fast[i] - slow[i]) < 1e-10);
  }
}

TEST_CASE("attention: single key and forced attention") {
  AttentionFixture f(4, 9);
  AttentionCache<double> cache;
  MultiHeadSelfAttention(RandomArray(f.rng, {3, 1, 4}), f.weights(), 2, {}, &cache);
  for (double p : cache.probs.values()) CHECK(p == 1.0);

  const std::vector<uint8_t> pad = {0, 1, 1, 1};
  MultiHeadSelfAttention(RandomArray(f.rng, {1, 4, 4}), f.weights(), 2, pad, &cache);
  for (int h = 0; h < 2; ++h) {
    for (int64_t q = 0; q < 4; ++q) {
      CHECK(cache.probs.at({0, h, 0, q}) == 1.0);
      for (int64_t k = 1; k < 4; ++k) CHECK(cache.probs.at({0, h, k, q}) == 0.0);
    }
  }
}

TEST_CASE("attention: weights are distributions over unmasked keys") {
  AttentionFixture f(8, 10);
  for (int trial = 0; trial < 20; ++trial) {
    const int64_t len = 1 + static_cast<int64_t>(f.rng.UniformInt(9));
    std::vector<uint8_t> pad(2 * len);
    for (int64_t b = 0; b < 2; ++b) {
      for (int64_t t = 1; t < len; ++t) pad[b * len + t] = f.rng.Bernoulli(0.3);
    }
    AttentionCache<double> cache;
    MultiHeadSelfAttention(RandomArray(f.rng, {2, len, 8}), f.weights(), 4, pad, &cache);
    for (int64_t b = 0; b < 2; ++b) {
      for (int h = 0; h < 4; ++h) {
        for (int64_t q = 0; q < len; ++q) {
          double sum = 0.0;
          for (int64_t k = 0; k < len; ++k) {
            const double p = cache.probs.at({b, h, k, q});
            if (pad[b * len + k]) CHECK(p == 0.0);
            sum += p;
          }
          CHECK(std::abs(sum - 1.0) < 1e-9);
        }
      }
    }
  }
}

TEST_CASE("attention: heads must divide hidden size") {
  AttentionFixture f(6, 11);
  CHECK_THROWS_AS(MultiHeadSelfAttention(A({1, 2, 6}), f.weights(), 4, {}), ConfigError);
}

TEST_CASE("attention: backward matches finite differences") {
  AttentionFixture f(6, 12);
  f.s.Add("x", {2, 4, 6}).value = RandomArray(f.rng, {2, 4, 6});
  const A r = RandomArray(f.rng, {2, 4, 6});
  const std::vector<uint8_t> pad = {0, 0, 0, 1, 0, 0, 0, 0};
  auto loss = [&](bool grad) {
    AttentionCache<double> cache;
    A out = MultiHeadSelfAttention(V(f.s, "x"), f.weights(), 3, pad, &cache);
    if (grad) {
      MultiHeadSelfAttentionBackward(cache, f.weights(), r, G(f.s, "x"),
                                     {G(f.s, "qkv_w"), G(f.s, "q_b"), G(f.s, "v_b"),
                                      G(f.s, "out_w"), G(f.s, "out_b")});
    }
    return WeightedSum(out, r);
  };
  const auto report = FiniteDifferenceCheck(loss, &f.s, {.tolerance = 1e-6});
  CHECK(report.passed);
}

// ------------------------------------------------------------------ conv1d

TEST_CASE("conv1d: hand cross-correlation with zero padding") {
  A x({1, 3, 1}, {1, 2, 3});
  A k({3, 1, 1}, {1, 0, -1});
  ExpectNear(Conv1dSameForward(x, k, A({1})), {-2, -2, 2}, 1e-15);
}

TEST_CASE("conv1d: identity kernel and zero input") {
  Rng rng(13);
  A x = RandomArray(rng, {2, 5, 1});
  CHECK(Conv1dSameForward(x, A({1, 1, 1}, {1.0}), A({1})) == x);
  A bias = RandomArray(rng, {4});
  A out = Conv1dSameForward(A({2, 5, 3}), RandomArray(rng, {3, 3, 4}), bias);
  for (int64_t r = 0; r < 10; ++r) {
    for (int64_t o = 0; o < 4; ++o) CHECK(out[r * 4 + o] == bias[o]);
  }
}

TEST_CASE("conv1d: even window is a configuration error") {
  CHECK_THROWS_AS(Conv1dSameForward(A({1, 3, 1}), A({2, 1, 1}), A({1})), ConfigError);
}

TEST_CASE("conv1d: backward matches finite differences") {
  Rng rng(14);
  ParamStore<double> s;
  s.Add("x", {2, 5, 3}).value = RandomArray(rng, {2, 5, 3});
  s.Add("k", {3, 3, 4}).value = RandomArray(rng, {3, 3, 4});
  s.Add("b", {4}).value = RandomArray(rng, {4});
  const A r = RandomArray(rng, {2, 5, 4});
  auto loss = [&](bool grad) {
    A out = Conv1dSameForward(V(s, "x"), V(s, "k"), V(s, "b"));
    if (grad) Conv1dSameBackward(V(s, "x"), V(s, "k"), r, G(s, "x"), G(s, "k"), G(s, "b"));
    return WeightedSum(out, r);
  };
  CHECK(FiniteDifferenceCheck(loss, &s, {.tolerance = 1e-7}).passed);
}

// ----------------------------------------------------- activations, embedding

TEST_CASE("gelu, relu, embedding: backward matches finite differences") {
  Rng rng(15);
  ParamStore<double> s;
  A x = RandomArray(rng, {4, 5});
  for (auto& v : x.values()) v += v > 0 ? 0.1 : -0.1;  // keep relu away from its kink
  s.Add("x", {4, 5}).value = x;
  s.Add("table", {6, 5}).value = RandomArray(rng, {6, 5});
  const std::vector<int32_t> ids = {3, 0, 3, 5};
  const A r1 = RandomArray(rng, {4, 5});
  const A r2 = RandomArray(rng, {4, 5});
  const A r3 = RandomArray(rng, {4, 5});
  auto loss = [&](bool grad) {
    A g = GeluForward(V(s, "x"));
    A re = ReluForward(V(s, "x"));
    A e = EmbeddingLookup(V(s, "table"), ids);
    if (grad) {
      GeluBackward(V(s, "x"), r1, G(s, "x"));
      ReluBackward(V(s, "x"), r2, G(s, "x"));
      EmbeddingBackward(ids, r3, G(s, "table"));
    }
    return WeightedSum(g, r1) + WeightedSum(re, r2) + WeightedSum(e, r3);
  };
  CHECK(FiniteDifferenceCheck(loss, &s, {.tolerance = 1e-6}).passed);
}

TEST_CASE("embedding: out-of-range id is a data error") {
  const std::vector<int32_t> ids = {7};
  CHECK_THROWS_AS(EmbeddingLookup(A({3, 2}), ids), DataError);
}

TEST_CASE("dropout: keeps expectation and is deterministic per seed") {
  A x = A::Full({10000}, 1.0);
  A y = x;
  auto keep = DropoutInPlace(&y, 0.1, 42);
  A z = x;
  auto keep2 = DropoutInPlace(&z, 0.1, 42);
  CHECK(y == z);
  CHECK(keep == keep2);
  const double kept = std::accumulate(keep.begin(), keep.end(), 0.0) / keep.size();
  CHECK(kept == doctest::Approx(0.9).epsilon(0.02));
  CHECK(DropoutInPlace(&x, 0.0, 1).empty());
}

// -------------------------------------------------------------------- loss

TEST_CASE("cross_entropy: closed-form values") {
  const std::vector<int32_t> t1 = {2};
  CHECK(CrossEntropyLoss(A({1, 3}), std::span<const int32_t>(t1)) ==
        doctest::Approx(std::log(3.0)).epsilon(1e-12));
  const std::vector<int32_t> t2 = {1};
  CHECK(CrossEntropyLoss(A({1, 2}, {0.0, std::log(3.0)}), std::span<const int32_t>(t2)) ==
        doctest::Approx(-std::log(0.75)).epsilon(1e-12));
}

TEST_CASE("cross_entropy: ignored rows drop out of the mean") {
  A logits({2, 2}, {0.0, std::log(3.0), 0.0, std::log(3.0)});
  const std::vector<int32_t> targets = {1, -100};
  const std::vector<int32_t> single = {1};
  const double both = CrossEntropyLoss(logits, std::span<const int32_t>(targets), {}, -100);
  const double one = CrossEntropyLoss(A({1, 2}, {0.0, std::log(3.0)}),
                                      std::span<const int32_t>(single));
  CHECK(both == doctest::Approx(one).epsilon(1e-15));
  const std::vector<int32_t> none = {-100, -100};
  CHECK_THROWS_AS(CrossEntropyLoss(logits, std::span<const int32_t>(none), {}, -100), DataError);
}

TEST_CASE("cross_entropy: weighted backward matches finite differences") {
  Rng rng(16);
  ParamStore<double> s;
  s.Add("logits", {5, 3}).value = RandomArray(rng, {5, 3});
  const std::vector<int32_t> targets = {0, 2, -1, 1, 2};
  const std::vector<double> weights = {0.5, 2.0, 1.5};
  auto loss = [&](bool grad) {
    A dlogits({5, 3});
    const double l = CrossEntropyLoss<double>(V(s, "logits"), targets, weights, -1,
                                              grad ? &dlogits : nullptr);
    if (grad) *G(s, "logits") = dlogits;
    return l;
  };
  CHECK(FiniteDifferenceCheck(loss, &s, {.tolerance = 1e-7}).passed);
}

// -------------------------------------------------------------------- adam

TEST_CASE("adam: first step on scalar parameter") {
  ParamStore<double> s;
  auto& p = s.Add("p", {1});
  p.value[0] = 1.0;
  p.grad[0] = 1.0;
  AdamUpdate(&s, {.learning_rate = 0.1});
  // m_hat = v_hat = 1, so the step is lr / (1 + eps).
  CHECK(p.value[0] == doctest::Approx(1.0 - 0.1 / (1.0 + 1e-8)).epsilon(1e-15));
  CHECK(s.step_count == 1);
  CHECK(p.grad[0] == 0.0);
}

TEST_CASE("adam: zero gradients leave parameters unchanged") {
  Rng rng(17);
  ParamStore<double> s;
  auto& p = s.Add("p", {3, 4});
  p.value = RandomArray(rng, {3, 4});
  const A before = p.value;
  AdamUpdate(&s, {.learning_rate = 0.1});
  AdamUpdate(&s, {.learning_rate = 0.1});
  CHECK(s.step_count == 2);
  CHECK(p.value == before);
}

TEST_CASE("adam: zero learning rate is a null update") {
  Rng rng(18);
  ParamStore<double> s;
  auto& p = s.Add("p", {5});
  p.value = RandomArray(rng, {5});
  const A before = p.value;
  p.grad = RandomArray(rng, {5});
  AdamUpdate(&s, {.learning_rate = 0.0});
  CHECK(p.value == before);
}

TEST_CASE("adam: non-finite gradient aborts with the parameter name") {
  ParamStore<double> s;
  s.Add("ok", {2});
  auto& bad = s.Add("encoder.bad", {2});
  bad.grad[1] = std::numeric_limits<double>::quiet_NaN();
  const A before = bad.value;
  try {
    AdamUpdate(&s, {});
    FAIL("expected NumericError");
  } catch (const NumericError& e) {
    CHECK(std::string(e.what()).find("encoder.bad") != std::string::npos);
  }
  CHECK(s.step_count == 0);
}

TEST_CASE("adam: frozen tensors do not move") {
  ParamStore<double> s;
  auto& p = s.Add("frozen", {2});
  p.trainable = false;
  p.grad.Fill(1.0);
  AdamUpdate(&s, {.learning_rate = 0.5});
  CHECK(p.value[0] == 0.0);
  CHECK(p.grad[0] == 0.0);
}

TEST_CASE("clip: global norm is bounded") {
  ParamStore<double> s;
  s.Add("a", {2}).grad = A({2}, {3.0, 0.0});
  s.Add("b", {1}).grad = A({1}, {4.0});
  CHECK(ClipGradNorm(&s, 1.0) == doctest::Approx(5.0));
  CHECK(GlobalGradNorm(s) == doctest::Approx(1.0));
}

// --------------------------------------------------------- grad checker

TEST_CASE("finite difference check: quadratic is exact") {
  ParamStore<double> s;
  s.Add("x", {2}).value = A({2}, {1.0, 2.0});
  auto loss = [&](bool grad) {
    const A& x = V(s, "x");
    if (grad) {
      (*G(s, "x"))[0] = 2 * x[0];
      (*G(s, "x"))[1] = 2 * x[1];
    }
    return x[0] * x[0] + x[1] * x[1];
  };
  const auto report = FiniteDifferenceCheck(loss, &s);
  CHECK(report.passed);
  CHECK(report.max_relative_error < 1e-7);
  CHECK(s.Get("x").value[0] == 1.0);  // restored
}

TEST_CASE("finite difference check: doubled gradient fails") {
  Rng rng(19);
  ParamStore<double> s;
  s.Add("w", {3, 2}).value = RandomArray(rng, {3, 2});
  s.Add("b", {2}).value = RandomArray(rng, {2});
  const A x = RandomArray(rng, {4, 3});
  const A r = RandomArray(rng, {4, 2});
  auto loss = [&](bool grad) {
    A out = LinearForward(x, V(s, "w"), V(s, "b"));
    if (grad) {
      LinearBackward<double>(x, V(s, "w"), r, nullptr, G(s, "w"), G(s, "b"));
      for (auto& g : G(s, "w")->values()) g *= 2.0;
    }
    return WeightedSum(out, r);
  };
  const auto report = FiniteDifferenceCheck(loss, &s);
  CHECK_FALSE(report.passed);
  CHECK(report.max_relative_error > 0.4);
}

}  // namespace
}  // namespace spanfield
