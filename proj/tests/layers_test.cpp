#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

#include "grad_check.hpp"
#include "lggnet/layers.hpp"

namespace lggnet {
namespace {

using testing::central_difference;
using testing::gradients_agree;

Rng& unused_rng() {
  static Rng rng(0);
  return rng;
}

// Checks input and parameter gradients of loss = <layer(x), projection>
// against central differences. The layer rng is re-seeded for every forward
// so stochastic layers see the same mask/noise each time.
void expect_gradients_match(Layer<double>& layer, Tensor<double> input, std::uint64_t seed) {
  Rng proj_rng(seed ^ 0xabcdef);
  Rng shape_rng(seed);
  const Shape out_shape = layer.output_shape(input.shape());
  const auto projection = rand_uniform<double>(proj_rng, out_shape, -1, 1);

  auto loss = [&]() {
    Rng rng(seed);
    const auto out = layer.forward(input, LayerMode::Training, rng);
    double total = 0;
    for (std::size_t i = 0; i < out.size(); ++i) total += out[i] * projection[i];
    return total;
  };

  for (Parameter<double>* p : layer.parameters()) p->grad.fill(0.0);
  Rng rng(seed);
  layer.forward(input, LayerMode::Training, rng);
  const auto grad_in = layer.backward(projection);
  ASSERT_EQ(grad_in.shape(), input.shape());

  for (std::size_t i = 0; i < input.size(); ++i) {
    const double numeric = central_difference<double>(loss, input[i]);
    EXPECT_TRUE(gradients_agree(grad_in[i], numeric))
        << layer.kind_name() << " input[" << i << "] analytic " << grad_in[i] << " numeric " << numeric;
  }
  for (Parameter<double>* p : layer.parameters()) {
    const Tensor<double> analytic = p->grad;
    for (std::size_t j = 0; j < p->value.size(); ++j) {
      const double numeric = central_difference<double>(loss, p->value[j]);
      EXPECT_TRUE(gradients_agree(analytic[j], numeric))
          << layer.kind_name() << " " << p->name << "[" << j << "] analytic " << analytic[j] << " numeric " << numeric;
    }
  }
}

// Values spaced well apart from each other and from zero, so no finite
// difference step crosses a max or LeakyReLU kink.
Tensor<double> separated_values(Rng& rng, Shape shape) {
  Tensor<double> t(std::move(shape));
  std::vector<double> values(t.size());
  for (std::size_t i = 0; i < values.size(); ++i) values[i] = (static_cast<double>(i) + 0.5) * 0.01;
  rng.shuffle(std::span(values));
  for (std::size_t i = 0; i < t.size(); ++i) t[i] = (rng.below(2) ? 1.0 : -1.0) * values[i];
  return t;
}

// ---------------------------------------------------------------- Conv2D

TEST(Conv2DTest, OneByOneUnitKernelIsIdentity) {
  Conv2D<double> conv({1, 1, 1});
  conv.weights().value[0] = 1.0;
  Rng rng(1);
  const auto input = rand_uniform<double>(rng, {5, 4, 1}, -1, 1);
  EXPECT_EQ(conv.forward(input, LayerMode::Inference, rng), input);
}

TEST(Conv2DTest, AllOnesKernelSumsWindows) {
  Conv2D<double> conv({1, 1, 2});
  conv.weights().value.fill(1.0);
  const Tensor<double> input({3, 3, 1}, {1, 2, 3, 4, 5, 6, 7, 8, 9});
  // Brute-force window sums.
  std::vector<double> expected;
  for (int y = 0; y < 2; ++y)
    for (int x = 0; x < 2; ++x) {
      double s = 0;
      for (int dy = 0; dy < 2; ++dy)
        for (int dx = 0; dx < 2; ++dx) s += input[static_cast<std::size_t>((y + dy) * 3 + x + dx)];
      expected.push_back(s);
    }
  EXPECT_EQ(expected, (std::vector<double>{12, 16, 24, 28}));
  const auto out = conv.forward(input, LayerMode::Inference, unused_rng());
  EXPECT_EQ(out.shape(), (Shape{2, 2, 1}));
  for (std::size_t i = 0; i < 4; ++i) EXPECT_EQ(out[i], expected[i]);
}

TEST(Conv2DTest, TableOneFirstLayerShape) {
  Conv2D<float> conv({1, 16, 3});
  EXPECT_EQ(conv.output_shape({256, 256, 1}), (Shape{254, 254, 16}));
  const auto out = conv.forward(zeros<float>({256, 256, 1}), LayerMode::Inference, unused_rng());
  EXPECT_EQ(out.shape(), (Shape{254, 254, 16}));
}

TEST(Conv2DTest, ChannelOrExtentMismatch) {
  Conv2D<float> conv({2, 4, 3});
  EXPECT_THROW(conv.forward(zeros<float>({8, 8, 1}), LayerMode::Inference, unused_rng()), ShapeError);
  EXPECT_THROW(conv.forward(zeros<float>({2, 8, 2}), LayerMode::Inference, unused_rng()), ShapeError);
}

TEST(Conv2DTest, BackwardBeforeForwardIsStateError) {
  Conv2D<double> conv({1, 1, 3});
  EXPECT_THROW(conv.backward(zeros<double>({1, 1, 1})), StateError);
  // Inference forward does not arm backward either.
  conv.forward(zeros<double>({3, 3, 1}), LayerMode::Inference, unused_rng());
  EXPECT_THROW(conv.backward(zeros<double>({1, 1, 1})), StateError);
}

TEST(Conv2DTest, BackwardGradientShapeMismatch) {
  Conv2D<double> conv({1, 1, 3});
  conv.forward(zeros<double>({4, 4, 1}), LayerMode::Training, unused_rng());
  EXPECT_THROW(conv.backward(zeros<double>({3, 3, 1})), ShapeError);
}

TEST(Conv2DTest, ZeroUpstreamGradientGivesZeroGradients) {
  Rng rng(3);
  Conv2D<double> conv({2, 3, 3});
  conv.initialize(rng);
  const auto input = rand_uniform<double>(rng, {5, 5, 2}, -1, 1);
  conv.forward(input, LayerMode::Training, rng);
  const auto grad_in = conv.backward(zeros<double>({3, 3, 3}));
  for (double v : grad_in.values()) EXPECT_EQ(v, 0.0);
  for (double v : conv.weights().grad.values()) EXPECT_EQ(v, 0.0);
  for (double v : conv.bias().grad.values()) EXPECT_EQ(v, 0.0);
}

TEST(Conv2DTest, SingleOutputHandChainRule) {
  // 2x2 input, 2x2 kernel -> one output; dL/dW = input, dL/dx = W.
  Conv2D<double> conv({1, 1, 2});
  const Tensor<double> weights({2, 2, 1, 1}, {0.5, -1.0, 2.0, 0.25});
  conv.weights().value = weights;
  const Tensor<double> input({2, 2, 1}, {1, 2, 3, 4});
  conv.forward(input, LayerMode::Training, unused_rng());
  const auto grad_in = conv.backward(Tensor<double>({1, 1, 1}, {1.0}));
  for (std::size_t i = 0; i < 4; ++i) {
    EXPECT_EQ(conv.weights().grad[i], input[i]);
    EXPECT_EQ(grad_in[i], weights[i]);
  }
  EXPECT_EQ(conv.bias().grad[0], 1.0);
}

TEST(Conv2DTest, GradientsMatchFiniteDifferences) {
  for (std::uint64_t instance = 0; instance < 20; ++instance) {
    Rng rng(100 + instance);
    const std::size_t cin = 1 + rng.below(3), cout = 1 + rng.below(4), k = 1 + rng.below(3);
    const std::size_t h = k + rng.below(4), w = k + rng.below(4);
    Conv2D<double> conv({cin, cout, k});
    conv.initialize(rng);
    conv.bias().value = rand_uniform<double>(rng, {cout}, -0.5, 0.5);
    expect_gradients_match(conv, rand_uniform<double>(rng, {h, w, cin}, -1, 1), 100 + instance);
  }
  // The stated 6x6x2 input with 3 kernels.
  Rng rng(7);
  Conv2D<double> conv({2, 3, 3});
  conv.initialize(rng);
  expect_gradients_match(conv, rand_uniform<double>(rng, {6, 6, 2}, -1, 1), 7);
}

// ---------------------------------------------------------------- MaxPool2D

TEST(MaxPoolTest, HandExample) {
  MaxPool2D<double> pool({2, 2});
  const Tensor<double> input({2, 2, 1}, {1, 2, 3, 4});
  const auto out = pool.forward(input, LayerMode::Training, unused_rng());
  EXPECT_EQ(out, Tensor<double>({1, 1, 1}, {4}));
  const auto grad = pool.backward(Tensor<double>({1, 1, 1}, {1}));
  EXPECT_EQ(grad, Tensor<double>({2, 2, 1}, {0, 0, 0, 1}));
}

TEST(MaxPoolTest, TableOneShapes) {
  EXPECT_EQ(MaxPool2D<float>({2, 2}).output_shape({252, 252, 16}), (Shape{126, 126, 16}));
  EXPECT_EQ(MaxPool2D<float>({2, 2}).output_shape({122, 122, 32}), (Shape{61, 61, 32}));
  EXPECT_EQ(MaxPool2D<float>({2, 2}).output_shape({57, 57, 64}), (Shape{28, 28, 64}));
  EXPECT_EQ(MaxPool2D<float>({5, 5}).output_shape({24, 24, 128}), (Shape{4, 4, 128}));
}

TEST(MaxPoolTest, TooSmallInput) {
  MaxPool2D<float> pool({5, 5});
  EXPECT_THROW(pool.forward(zeros<float>({4, 8, 1}), LayerMode::Inference, unused_rng()), ShapeError);
}

TEST(MaxPoolTest, TiesRouteToFirstInScanOrder) {
  MaxPool2D<double> pool({2, 2});
  pool.forward(Tensor<double>({2, 2, 1}, {3, 3, 3, 3}), LayerMode::Training, unused_rng());
  EXPECT_EQ(pool.backward(Tensor<double>({1, 1, 1}, {2})), Tensor<double>({2, 2, 1}, {2, 0, 0, 0}));
}

TEST(MaxPoolTest, OutputIsWindowMaxAndGradientMassIsConserved) {
  Rng rng(21);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t p = 2 + rng.below(3);
    const std::size_t h = p * (1 + rng.below(4)) + rng.below(p), w = p * (1 + rng.below(4)) + rng.below(p);
    const std::size_t c = 1 + rng.below(3);
    MaxPool2D<double> pool({p, p});
    const auto input = rand_uniform<double>(rng, {h, w, c}, -1, 1);
    const auto out = pool.forward(input, LayerMode::Training, rng);
    for (std::size_t y = 0; y < out.extent(0); ++y)
      for (std::size_t x = 0; x < out.extent(1); ++x)
        for (std::size_t k = 0; k < c; ++k) {
          double m = -1e9;
          for (std::size_t dy = 0; dy < p; ++dy)
            for (std::size_t dx = 0; dx < p; ++dx) m = std::max(m, input.at(y * p + dy, x * p + dx, k));
          EXPECT_EQ(out.at(y, x, k), m);
        }
    const auto g = rand_uniform<double>(rng, out.shape(), -1, 1);
    const auto gi = pool.backward(g);
    const double in_sum = std::accumulate(gi.values().begin(), gi.values().end(), 0.0);
    const double out_sum = std::accumulate(g.values().begin(), g.values().end(), 0.0);
    EXPECT_NEAR(in_sum, out_sum, 1e-12);
  }
}

TEST(MaxPoolTest, GradientsMatchFiniteDifferences) {
  for (std::uint64_t instance = 0; instance < 20; ++instance) {
    Rng rng(200 + instance);
    const std::size_t p = 2 + rng.below(2);
    MaxPool2D<double> pool({p, p});
    const std::size_t h = p + rng.below(6), w = p + rng.below(6), c = 1 + rng.below(3);
    expect_gradients_match(pool, separated_values(rng, {h, w, c}), 200 + instance);
  }
}

// ---------------------------------------------------------------- LeakyReLU

TEST(LeakyReLUTest, DefinitionValues) {
  LeakyReLU<double> act;
  const auto out = act.forward(Tensor<double>({3}, {5, -2, 0}), LayerMode::Training, unused_rng());
  EXPECT_EQ(out[0], 5.0);
  EXPECT_DOUBLE_EQ(out[1], -0.02);
  EXPECT_EQ(out[2], 0.0);
  const auto grad = act.backward(Tensor<double>({3}, {1, 1, 1}));
  EXPECT_EQ(grad[0], 1.0);
  EXPECT_DOUBLE_EQ(grad[1], 0.01);
  // Slope at exactly zero is alpha.
  EXPECT_DOUBLE_EQ(grad[2], 0.01);
}

TEST(LeakyReLUTest, GradientAtMinusThreeIsAlpha) {
  LeakyReLU<double> act({0.2});
  act.forward(Tensor<double>({1}, {-3}), LayerMode::Training, unused_rng());
  EXPECT_DOUBLE_EQ(act.backward(Tensor<double>({1}, {1}))[0], 0.2);
}

TEST(LeakyReLUTest, StrictlyMonotone) {
  LeakyReLU<double> act;
  Tensor<double> xs({201});
  for (std::size_t i = 0; i < 201; ++i) xs[i] = -10.0 + 0.1 * static_cast<double>(i);
  const auto ys = act.forward(xs, LayerMode::Inference, unused_rng());
  for (std::size_t i = 1; i < 201; ++i) EXPECT_LT(ys[i - 1], ys[i]);
}

TEST(LeakyReLUTest, NegativeAlphaRejected) { EXPECT_THROW(LeakyReLU<float>({-0.1}), ConfigError); }

TEST(LeakyReLUTest, GradientsMatchFiniteDifferences) {
  for (std::uint64_t instance = 0; instance < 20; ++instance) {
    Rng rng(300 + instance);
    LeakyReLU<double> act({0.01 + 0.2 * rng.uniform()});
    expect_gradients_match(act, separated_values(rng, {1 + rng.below(5), 1 + rng.below(5), 1 + rng.below(3)}),
                           300 + instance);
  }
}

// ---------------------------------------------------------------- Dropout

TEST(DropoutTest, RateZeroIsIdentity) {
  Dropout<double> drop({0.0});
  Rng rng(1);
  const auto input = rand_uniform<double>(rng, {50}, -1, 1);
  EXPECT_EQ(drop.forward(input, LayerMode::Training, rng), input);
}

TEST(DropoutTest, InferenceIsBitwiseIdentity) {
  Dropout<float> drop({0.5});
  Rng rng(1);
  const auto input = rand_uniform<float>(rng, {4, 4, 8}, -1, 1);
  EXPECT_EQ(drop.forward(input, LayerMode::Inference, rng), input);
}

TEST(DropoutTest, InvertedScalingPreservesMean) {
  Dropout<double> drop({0.5});
  Rng rng(77);
  Tensor<double> ones({10000});
  ones.fill(1.0);
  const auto out = drop.forward(ones, LayerMode::Training, rng);
  double mean = 0;
  std::size_t zeros_seen = 0;
  for (double v : out.values()) {
    mean += v;
    if (v == 0.0) ++zeros_seen;
    else EXPECT_EQ(v, 2.0);
  }
  mean /= 10000.0;
  EXPECT_NEAR(mean, 1.0, 0.05);
  EXPECT_GT(zeros_seen, 4500u);
  EXPECT_LT(zeros_seen, 5500u);
}

TEST(DropoutTest, BackwardReusesMask) {
  Dropout<double> drop({0.3});
  Rng rng(4);
  Tensor<double> ones({200});
  ones.fill(1.0);
  const auto out = drop.forward(ones, LayerMode::Training, rng);
  EXPECT_EQ(drop.backward(ones), out);
}

TEST(DropoutTest, RateOneRejected) {
  EXPECT_THROW(Dropout<float>({1.0}), ConfigError);
  EXPECT_THROW(Dropout<float>({-0.1}), ConfigError);
}

TEST(DropoutTest, GradientsMatchFiniteDifferences) {
  for (std::uint64_t instance = 0; instance < 20; ++instance) {
    Rng rng(400 + instance);
    Dropout<double> drop({0.6 * rng.uniform()});
    expect_gradients_match(drop, rand_uniform<double>(rng, {1 + rng.below(6), 1 + rng.below(6), 2}, -1, 1),
                           400 + instance);
  }
}

// ---------------------------------------------------------------- GaussianNoise

TEST(GaussianNoiseTest, ZeroStddevIsIdentity) {
  GaussianNoise<double> noise({0.0});
  Rng rng(1);
  const auto input = rand_uniform<double>(rng, {30}, -1, 1);
  EXPECT_EQ(noise.forward(input, LayerMode::Training, rng), input);
}

TEST(GaussianNoiseTest, InferenceIsBitwiseIdentity) {
  GaussianNoise<float> noise({0.1});
  Rng rng(1);
  const auto input = rand_uniform<float>(rng, {4, 4, 128}, -1, 1);
  EXPECT_EQ(noise.forward(input, LayerMode::Inference, rng), input);
}

TEST(GaussianNoiseTest, NoiseStddevOnZeros) {
  GaussianNoise<double> noise({0.1});
  Rng rng(31);
  const auto out = noise.forward(zeros<double>({4, 4, 128}), LayerMode::Training, rng);
  double mean = 0;
  for (double v : out.values()) mean += v;
  mean /= static_cast<double>(out.size());
  double var = 0;
  for (double v : out.values()) var += (v - mean) * (v - mean);
  EXPECT_NEAR(std::sqrt(var / static_cast<double>(out.size() - 1)), 0.1, 0.01);
}

TEST(GaussianNoiseTest, NegativeStddevRejected) { EXPECT_THROW(GaussianNoise<float>({-1.0}), ConfigError); }

TEST(GaussianNoiseTest, GradientsMatchFiniteDifferences) {
  for (std::uint64_t instance = 0; instance < 20; ++instance) {
    Rng rng(500 + instance);
    GaussianNoise<double> noise({rng.uniform()});
    expect_gradients_match(noise, rand_uniform<double>(rng, {1 + rng.below(5), 3, 1 + rng.below(4)}, -1, 1),
                           500 + instance);
  }
}

// ---------------------------------------------------------------- Flatten

TEST(FlattenTest, PreservesOrderAndRestoresShape) {
  Flatten<double> flat;
  Rng rng(2);
  const auto input = rand_uniform<double>(rng, {4, 4, 128}, -1, 1);
  const auto out = flat.forward(input, LayerMode::Training, rng);
  EXPECT_EQ(out.shape(), (Shape{2048}));
  for (std::size_t i = 0; i < out.size(); ++i) EXPECT_EQ(out[i], input[i]);
  EXPECT_EQ(flat.backward(out), input);
}

TEST(FlattenTest, GradientsMatchFiniteDifferences) {
  for (std::uint64_t instance = 0; instance < 20; ++instance) {
    Rng rng(600 + instance);
    Flatten<double> flat;
    expect_gradients_match(flat, rand_uniform<double>(rng, {1 + rng.below(4), 1 + rng.below(4), 2}, -1, 1),
                           600 + instance);
  }
}

// ---------------------------------------------------------------- Dense

TEST(DenseTest, IdentityWeights) {
  Dense<double> dense({3, 3});
  for (std::size_t i = 0; i < 3; ++i) dense.weights().value[i * 3 + i] = 1.0;
  const Tensor<double> x({3}, {0.5, -2, 7});
  EXPECT_EQ(dense.forward(x, LayerMode::Inference, unused_rng()), x);
}

TEST(DenseTest, HandExample) {
  Dense<double> dense({2, 2});
  dense.weights().value = Tensor<double>({2, 2}, {1, 0, 0, 2});
  dense.bias().value = Tensor<double>({2}, {1, 1});
  EXPECT_EQ(dense.forward(Tensor<double>({2}, {1, 2}), LayerMode::Inference, unused_rng()),
            Tensor<double>({2}, {2, 5}));
}

TEST(DenseTest, TableOneShapeContract) {
  Dense<float> dense({2048, 1024});
  EXPECT_EQ(dense.output_shape({2048}), (Shape{1024}));
  EXPECT_THROW(dense.output_shape({2047}), ShapeError);
  EXPECT_THROW(dense.forward(zeros<float>({10}), LayerMode::Inference, unused_rng()), ShapeError);
}

TEST(DenseTest, BackwardFormulas) {
  Rng rng(8);
  Dense<double> dense({3, 2});
  dense.initialize(rng);
  const auto x = rand_uniform<double>(rng, {3}, -1, 1);
  const auto g = rand_uniform<double>(rng, {2}, -1, 1);
  dense.forward(x, LayerMode::Training, rng);
  const auto gi = dense.backward(g);
  for (std::size_t i = 0; i < 3; ++i) {
    double expected = 0;
    for (std::size_t j = 0; j < 2; ++j) {
      expected += g[j] * dense.weights().value[i * 2 + j];
      EXPECT_DOUBLE_EQ(dense.weights().grad[i * 2 + j], x[i] * g[j]);
    }
    EXPECT_DOUBLE_EQ(gi[i], expected);
  }
  for (std::size_t j = 0; j < 2; ++j) EXPECT_EQ(dense.bias().grad[j], g[j]);
}

TEST(DenseTest, GradientsMatchFiniteDifferences) {
  for (std::uint64_t instance = 0; instance < 20; ++instance) {
    Rng rng(700 + instance);
    const std::size_t n = 1 + rng.below(8), m = 1 + rng.below(6);
    Dense<double> dense({n, m});
    dense.initialize(rng);
    dense.bias().value = rand_uniform<double>(rng, {m}, -0.5, 0.5);
    expect_gradients_match(dense, rand_uniform<double>(rng, {n}, -1, 1), 700 + instance);
  }
}

// ---------------------------------------------------------------- Softmax

TEST(SoftmaxTest, SymmetricInput) {
  const auto p = softmax(Tensor<double>({2}, {0, 0}));
  EXPECT_EQ(p[0], 0.5);
  EXPECT_EQ(p[1], 0.5);
}

TEST(SoftmaxTest, ClosedForm) {
  const auto p = softmax(Tensor<double>({2}, {1, 0}));
  const double e = std::exp(1.0);
  EXPECT_NEAR(p[0], e / (e + 1), 1e-12);
  EXPECT_NEAR(p[0], 0.73106, 1e-4);
  EXPECT_NEAR(p[1], 0.26894, 1e-4);
}

TEST(SoftmaxTest, ShiftInvariantAndNormalized) {
  Rng rng(10);
  for (int trial = 0; trial < 100; ++trial) {
    const auto x = rand_uniform<double>(rng, {2 + rng.below(4)}, -20, 20);
    auto shifted = x;
    const double c = rng.uniform(-50, 50);
    for (double& v : shifted.values()) v += c;
    const auto p = softmax(x);
    const auto q = softmax(shifted);
    double sum = 0;
    for (std::size_t i = 0; i < p.size(); ++i) {
      EXPECT_GT(p[i], 0.0);
      EXPECT_LT(p[i], 1.0);
      EXPECT_NEAR(p[i], q[i], 1e-12);
      sum += p[i];
    }
    EXPECT_NEAR(sum, 1.0, 1e-12);
  }
}

TEST(SoftmaxTest, LargeLogitsDoNotOverflow) {
  const auto p = softmax(Tensor<float>({2}, {1000.0f, 0.0f}));
  EXPECT_EQ(p[0], 1.0f);
  EXPECT_TRUE(std::isfinite(p[1]));
}

TEST(SoftmaxTest, RejectsFewerThanTwoLogits) { EXPECT_THROW(softmax(Tensor<double>({1}, {3})), ShapeError); }

TEST(SoftmaxTest, GradientsMatchFiniteDifferences) {
  for (std::uint64_t instance = 0; instance < 20; ++instance) {
    Rng rng(800 + instance);
    Softmax<double> layer;
    expect_gradients_match(layer, rand_uniform<double>(rng, {2 + rng.below(4)}, -3, 3), 800 + instance);
  }
}

TEST(LayerSpecTest, MakeLayerRoundTripsSpec) {
  const std::vector<LayerSpec> specs = {Conv2DSpec{3, 8, 3}, MaxPoolSpec{5, 5}, LeakyReLUSpec{0.2},
                                        DropoutSpec{0.4},    GaussianNoiseSpec{0.3}, FlattenSpec{},
                                        DenseSpec{7, 2},     SoftmaxSpec{}};
  for (const auto& spec : specs) EXPECT_EQ(make_layer<float>(spec)->spec(), spec);
}

}  // namespace
}  // namespace lggnet
