#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "adnet/autodiff.hpp"
#include "adnet/error.hpp"
#include "adnet/optimizer.hpp"
#include "test_support.hpp"

using namespace adnet;
using adnet::testing::max_gradient_error;
using adnet::testing::random_tensor;

namespace {

std::vector<double> values(Var v) {
  const auto d = v.value().data();
  return {d.begin(), d.end()};
}

}  // namespace

TEST(Tensor, ShapeRulesAndDump) {
  Tensor t = Tensor::matrix(2, 3, {1, 2, 3, 4, 5, 6});
  EXPECT_EQ(t.rows(), 2u);
  EXPECT_EQ(t.cols(), 3u);
  EXPECT_DOUBLE_EQ(t.at(1, 2), 6.0);
  EXPECT_THROW(Tensor({2, 0}), Error);
  EXPECT_THROW(Tensor({2, 2}, std::vector<double>{1, 2, 3}), Error);
  std::stringstream ss;
  dump(t, ss);
  EXPECT_EQ(read_dump(ss), t);
}

TEST(Conv1d, IdentityKernelCopiesInput) {
  Tape tape;
  Var x = tape.constant(Tensor({4, 1}, {1, 2, 3, 4}));
  Var k = tape.constant(Tensor({1, 1, 1}, {1}));
  EXPECT_EQ(values(conv1d(x, k)), (std::vector<double>{1, 2, 3, 4}));
}

TEST(Conv1d, OnesKernelWithSamePadding) {
  Tape tape;
  Var x = tape.constant(Tensor({4, 1}, {1, 2, 3, 4}));
  Var k = tape.constant(Tensor({1, 3, 1}, {1, 1, 1}));
  EXPECT_EQ(values(conv1d(x, k)), (std::vector<double>{3, 6, 9, 7}));
}

TEST(Conv1d, PreservesTimeAxisAndRejectsEvenWidth) {
  Tape tape;
  std::mt19937_64 rng(3);
  Var x = tape.constant(random_tensor({7, 2}, rng));
  for (std::size_t w : {1u, 3u, 5u, 7u}) {
    Var k = tape.constant(random_tensor({4, w, 2}, rng));
    EXPECT_EQ(conv1d(x, k).shape(), (Shape{7, 4}));
  }
  EXPECT_THROW(conv1d(x, tape.constant(Tensor({1, 2, 2}))), Error);
}

TEST(Softmax, EqualLogitsAreUniform) {
  Tape tape;
  Var s = softmax(tape.constant(Tensor({3, 1}, 0.7)), 0);
  for (double v : values(s)) EXPECT_NEAR(v, 1.0 / 3.0, 1e-15);
}

TEST(Softmax, MaskedPositionsAreExactlyZero) {
  Tape tape;
  std::mt19937_64 rng(5);
  Var logits = tape.constant(random_tensor({6, 1}, rng, -3, 3));
  const std::vector<double> mask = {1, 1, 0, 1, 0, 0};
  const auto s = values(softmax(logits, 0, std::span<const double>(mask)));
  double total = 0.0;
  for (std::size_t i = 0; i < mask.size(); ++i) {
    if (mask[i] == 0.0) EXPECT_EQ(s[i], 0.0);
    total += s[i];
  }
  EXPECT_NEAR(total, 1.0, 1e-12);
  const std::vector<double> bad = {1, 0.5, 0, 1, 0, 0};
  EXPECT_THROW(softmax(logits, 0, std::span<const double>(bad)), Error);
  const std::vector<double> short_mask = {1, 1};
  EXPECT_THROW(softmax(logits, 0, std::span<const double>(short_mask)), Error);
}

TEST(Backward, SumGivesOnes) {
  std::mt19937_64 rng(1);
  Parameter p("p", random_tensor({2, 3}, rng));
  Tape tape;
  tape.backward(sum(tape.parameter(p)));
  for (double g : p.grad.data()) EXPECT_EQ(g, 1.0);
}

TEST(Backward, SigmoidAtZero) {
  Parameter p("x", Tensor::scalar(0.0));
  Tape tape;
  tape.backward(sigmoid(tape.parameter(p)));
  EXPECT_DOUBLE_EQ(p.grad.item(), 0.25);
}

TEST(Backward, UnreachedParameterGetsZero) {
  Parameter used("a", Tensor::scalar(2.0)), unused("b", Tensor::scalar(3.0));
  Tape tape;
  Var a = tape.parameter(used);
  tape.parameter(unused);
  tape.backward(mul(a, a));
  EXPECT_DOUBLE_EQ(used.grad.item(), 4.0);
  EXPECT_EQ(unused.grad.item(), 0.0);
}

TEST(Backward, RequiresScalarLoss) {
  Parameter p("p", Tensor({2, 2}, 1.0));
  Tape tape;
  Var v = tape.parameter(p);
  try {
    tape.backward(v);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NotScalarLoss);
  }
}

TEST(Backward, GradientsAccumulateUntilZeroed) {
  Parameter p("p", Tensor::scalar(1.5));
  for (int i = 0; i < 2; ++i) {
    Tape tape;
    tape.backward(affine(tape.parameter(p), 2.0));
  }
  EXPECT_DOUBLE_EQ(p.grad.item(), 4.0);
  p.zero_grad();
  EXPECT_EQ(p.grad.item(), 0.0);
}

TEST(Ops, NonFiniteValuesRaise) {
  Tape tape;
  try {
    log(tape.constant(Tensor::scalar(0.0)));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NonFiniteValue);
  }
  EXPECT_THROW(exp(tape.constant(Tensor::scalar(1e6))), Error);
}

TEST(Ops, ShapeMismatchRaises) {
  Tape tape;
  Var a = tape.constant(Tensor({2, 3}));
  Var b = tape.constant(Tensor({2, 2}));
  for (auto fn : {+[](Var x, Var y) { return matmul(x, y); }, +[](Var x, Var y) { return add(x, y); },
                  +[](Var x, Var y) { return mul(x, y); }}) {
    try {
      fn(a, b);
      FAIL();
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::ShapeMismatch);
    }
  }
}

TEST(Ops, MaxPoolAndMean) {
  Tape tape;
  Var x = tape.constant(Tensor({4, 2}, {1, 8, 3, 2, 5, 6, 0, 7}));
  EXPECT_EQ(values(max_pool1d(x, 2)), (std::vector<double>{3, 8, 5, 7}));
  EXPECT_DOUBLE_EQ(mean(x).value().item(), 4.0);
}

// Finite-difference oracle over each primitive with random inputs.
TEST(GradientCheck, EveryPrimitive) {
  std::mt19937_64 rng(11);
  const std::vector<double> mask = {1, 0, 1, 1};
  struct Case {
    const char* name;
    std::vector<Shape> shapes;
    adnet::testing::LossFn fn;
  };
  // Square-and-sum gives every output a distinct upstream gradient.
  auto sq = [](Var v) { return sum(mul(v, v)); };
  const std::vector<Case> cases = {
      {"matmul", {{3, 4}, {4, 2}}, [&](Tape&, const auto& v) { return sq(matmul(v[0], v[1])); }},
      {"add", {{3, 4}, {3, 4}}, [&](Tape&, const auto& v) { return sq(add(v[0], v[1])); }},
      {"add_row", {{3, 4}, {1, 4}}, [&](Tape&, const auto& v) { return sq(add(v[0], v[1])); }},
      {"sub", {{2, 3}, {2, 3}}, [&](Tape&, const auto& v) { return sq(sub(v[0], v[1])); }},
      {"mul", {{2, 3}, {2, 3}}, [&](Tape&, const auto& v) { return sq(mul(v[0], v[1])); }},
      {"affine", {{2, 3}}, [&](Tape&, const auto& v) { return sq(affine(v[0], -1.5, 0.3)); }},
      {"concat0", {{2, 3}, {1, 3}}, [&](Tape&, const auto& v) { return sq(concat(v, 0)); }},
      {"concat1", {{2, 3}, {2, 1}}, [&](Tape&, const auto& v) { return sq(concat(v, 1)); }},
      {"slice", {{4, 3}}, [&](Tape&, const auto& v) { return sq(slice(v[0], 0, 1, 2)); }},
      {"transpose", {{2, 3}}, [&](Tape& t, const auto& v) {
         return sq(matmul(transpose(v[0]), t.constant(Tensor::matrix(2, 1, {0.3, -0.8}))));
       }},
      {"tanh", {{2, 3}}, [&](Tape&, const auto& v) { return sq(tanh(v[0])); }},
      {"sigmoid", {{2, 3}}, [&](Tape&, const auto& v) { return sq(sigmoid(v[0])); }},
      {"relu", {{2, 3}}, [&](Tape&, const auto& v) { return sq(relu(v[0])); }},
      {"exp", {{2, 3}}, [&](Tape&, const auto& v) { return sq(exp(v[0])); }},
      {"log", {{2, 3}}, [&](Tape&, const auto& v) { return sq(log(affine(v[0], 1.0, 2.0))); }},
      {"clamp", {{2, 3}}, [&](Tape&, const auto& v) { return sq(clamp(v[0], -0.5, 0.5)); }},
      {"softmax0", {{4, 2}}, [&](Tape&, const auto& v) { return sq(softmax(v[0], 0)); }},
      {"softmax1", {{2, 4}}, [&](Tape&, const auto& v) { return sq(softmax(v[0], 1)); }},
      {"softmax_masked", {{4, 1}}, [&](Tape&, const auto& v) {
         return sq(softmax(v[0], 0, std::span<const double>(mask)));
       }},
      {"conv1d", {{5, 2}, {3, 3, 2}}, [&](Tape&, const auto& v) { return sq(conv1d(v[0], v[1])); }},
      {"max_pool", {{4, 3}}, [&](Tape&, const auto& v) { return sq(max_pool1d(v[0], 2)); }},
      {"mean", {{2, 3}}, [&](Tape&, const auto& v) { return mul(mean(v[0]), mean(v[0])); }},
  };
  for (const auto& c : cases) {
    for (int draw = 0; draw < 5; ++draw) {
      std::vector<Parameter> params;
      for (std::size_t i = 0; i < c.shapes.size(); ++i)
        params.emplace_back("p" + std::to_string(i), random_tensor(c.shapes[i], rng));
      EXPECT_LT(max_gradient_error(params, c.fn), 1e-4) << c.name << " draw " << draw;
    }
  }
}

TEST(Optimizer, SgdStep) {
  Parameter p("p", Tensor::scalar(0.0));
  p.grad[0] = 1.0;
  Optimizer opt({OptimizerKind::Sgd, 0.1});
  Parameter* ptrs[] = {&p};
  opt.step(ptrs);
  EXPECT_DOUBLE_EQ(p.value.item(), -0.1);
  p.zero_grad();
  opt.step(ptrs);
  EXPECT_DOUBLE_EQ(p.value.item(), -0.1);
}

TEST(Optimizer, AdamFirstStepHasMagnitudeLr) {
  for (double g : {1e-3, 0.5, 250.0, -7.0}) {
    Parameter p("p", Tensor::scalar(1.0));
    p.grad[0] = g;
    Optimizer opt({OptimizerKind::Adam, 1e-3});
    Parameter* ptrs[] = {&p};
    opt.step(ptrs);
    // m_hat = g and v_hat = g^2, so the step is lr * g / (|g| + eps).
    const double expected = 1e-3 * g / (std::abs(g) + 1e-8);
    EXPECT_NEAR(1.0 - p.value.item(), expected, 1e-15) << g;
    EXPECT_NEAR(std::abs(1.0 - p.value.item()), 1e-3, 1e-8);
  }
}

TEST(Optimizer, RejectsNonPositiveLearningRate) {
  EXPECT_THROW(Optimizer({OptimizerKind::Sgd, 0.0}), Error);
}
