#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "lggnet/ptf.hpp"
#include "lggnet/tensor.hpp"

namespace lggnet {
namespace {

TEST(TensorTest, ZerosHasShapeAndZeroValues) {
  const auto t = zeros<float>({2, 2});
  EXPECT_EQ(t.shape(), (Shape{2, 2}));
  for (float v : t.values()) EXPECT_EQ(v, 0.0f);
  const auto one = zeros<double>({1});
  ASSERT_EQ(one.size(), 1u);
  EXPECT_EQ(one[0], 0.0);
}

TEST(TensorTest, ZeroExtentIsShapeError) {
  EXPECT_THROW(zeros<float>({2, 0}), ShapeError);
  EXPECT_THROW(zeros<float>({}), ShapeError);
}

TEST(TensorTest, ReshapeFlattensTableOneFeatureMap) {
  const auto t = zeros<float>({4, 4, 128});
  EXPECT_EQ(reshape(t, {2048}).shape(), (Shape{2048}));
}

TEST(TensorTest, ReshapeKeepsOrder) {
  const Tensor<double> t({6}, {1, 2, 3, 4, 5, 6});
  const auto r = reshape(t, {2, 3});
  EXPECT_EQ(r.shape(), (Shape{2, 3}));
  for (std::size_t i = 0; i < 6; ++i) EXPECT_EQ(r[i], t[i]);
}

TEST(TensorTest, ReshapeSizeMismatchIsShapeError) {
  EXPECT_THROW(reshape(zeros<float>({4}), {3}), ShapeError);
}

TEST(TensorTest, ReshapeRoundTripProperty) {
  Rng rng(11);
  const std::vector<Shape> targets = {{24}, {2, 12}, {3, 8}, {4, 6}, {2, 3, 4}, {4, 3, 2}, {1, 24}, {2, 2, 2, 3}};
  for (int trial = 0; trial < 20; ++trial) {
    const auto t = rand_uniform<double>(rng, {2, 3, 4}, -1, 1);
    for (const Shape& s : targets) EXPECT_EQ(reshape(reshape(t, s), t.shape()), t);
  }
}

TEST(TensorTest, MatmulIdentity) {
  const Tensor<double> eye({2, 2}, {1, 0, 0, 1});
  const Tensor<double> m({2, 2}, {1, 2, 3, 4});
  EXPECT_EQ(matmul(eye, m), m);
}

TEST(TensorTest, MatmulRowTimesColumn) {
  const Tensor<double> a({1, 2}, {1, 2});
  const Tensor<double> b({2, 1}, {3, 4});
  const auto c = matmul(a, b);
  EXPECT_EQ(c.shape(), (Shape{1, 1}));
  EXPECT_EQ(c[0], 1 * 3 + 2 * 4);
}

TEST(TensorTest, MatmulInnerMismatch) {
  EXPECT_THROW(matmul(zeros<double>({2, 3}), zeros<double>({2, 3})), ShapeError);
}

TEST(TensorTest, MatmulAssociativeOnSmallIntegers) {
  Rng rng(5);
  auto random_int_matrix = [&](std::size_t r, std::size_t c) {
    Tensor<double> t({r, c});
    for (double& v : t.values()) v = static_cast<double>(rng.below(17)) - 8.0;
    return t;
  };
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t m = 1 + rng.below(4), k = 1 + rng.below(4), n = 1 + rng.below(4), p = 1 + rng.below(4);
    const auto a = random_int_matrix(m, k), b = random_int_matrix(k, n), c = random_int_matrix(n, p);
    EXPECT_EQ(matmul(matmul(a, b), c), matmul(a, matmul(b, c)));
  }
}

TEST(TensorTest, NormalWithZeroStddevIsMean) {
  Rng rng(1);
  const auto t = rand_normal<float>(rng, {4, 4, 128}, 0.0, 0.0);
  for (float v : t.values()) EXPECT_EQ(v, 0.0f);
}

TEST(TensorTest, InvalidDistributionBounds) {
  Rng rng(1);
  EXPECT_THROW(rand_uniform<float>(rng, {3}, 1.0, 1.0), ConfigError);
  EXPECT_THROW(rand_normal<float>(rng, {3}, 0.0, -1.0), ConfigError);
}

TEST(TensorTest, SeededSamplersAreDeterministic) {
  Rng a(1234), b(1234);
  EXPECT_EQ(rand_uniform<float>(a, {5, 7}, -2, 3), rand_uniform<float>(b, {5, 7}, -2, 3));
  EXPECT_EQ(rand_normal<double>(a, {100}, 1, 2), rand_normal<double>(b, {100}, 1, 2));
  std::vector<int> xs(50), ys(50);
  for (int i = 0; i < 50; ++i) xs[i] = ys[i] = i;
  a.shuffle(std::span(xs));
  b.shuffle(std::span(ys));
  EXPECT_EQ(xs, ys);
}

TEST(TensorTest, EngineMatchesStandardSequence) {
  // mt19937_64 default-seeded 10000th output is fixed by the C++ standard.
  Rng rng(5489u);
  std::uint64_t v = 0;
  for (int i = 0; i < 10000; ++i) v = rng.next_u64();
  EXPECT_EQ(v, 9981545732273789042ULL);
}

TEST(TensorTest, NormalSampleMoments) {
  Rng rng(2024);
  const auto t = rand_normal<double>(rng, {10000}, 0.0, 1.0);
  double mean = 0;
  for (double v : t.values()) mean += v;
  mean /= 10000.0;
  double var = 0;
  for (double v : t.values()) var += (v - mean) * (v - mean);
  const double stddev = std::sqrt(var / 9999.0);
  EXPECT_NEAR(mean, 0.0, 0.05);
  EXPECT_NEAR(stddev, 1.0, 0.05);
}

TEST(TensorTest, UniformStaysInRange) {
  Rng rng(3);
  const auto t = rand_uniform<double>(rng, {5000}, -0.5, 0.25);
  for (double v : t.values()) {
    EXPECT_GE(v, -0.5);
    EXPECT_LT(v, 0.25);
  }
}

TEST(PtfTest, HeaderIsAsciiAndPayloadLittleEndian) {
  const Tensor<float> t({1, 2}, {1.0f, -2.0f});
  std::ostringstream out;
  write_ptf(out, t);
  const std::string bytes = out.str();
  const std::string header = "PTF1 f32 2 1 2\n";
  ASSERT_EQ(bytes.substr(0, header.size()), header);
  ASSERT_EQ(bytes.size(), header.size() + 8);
  // 1.0f = 0x3f800000
  EXPECT_EQ(static_cast<unsigned char>(bytes[header.size() + 0]), 0x00);
  EXPECT_EQ(static_cast<unsigned char>(bytes[header.size() + 3]), 0x3f);
}

TEST(PtfTest, RoundTripIsBitwise) {
  Rng rng(9);
  for (int trial = 0; trial < 10; ++trial) {
    const auto f = rand_normal<float>(rng, {3, 1 + rng.below(5), 2}, 0, 10);
    const auto d = rand_normal<double>(rng, {1 + rng.below(7)}, 0, 1e-3);
    std::stringstream sf, sd;
    write_ptf(sf, f);
    write_ptf(sd, d);
    EXPECT_EQ(read_ptf<float>(sf), f);
    EXPECT_EQ(read_ptf<double>(sd), d);
  }
}

TEST(PtfTest, TruncatedPayloadIsCorrupt) {
  std::ostringstream out;
  write_ptf(out, Tensor<double>({4}, {1, 2, 3, 4}));
  std::string bytes = out.str();
  bytes.resize(bytes.size() - 3);
  std::istringstream in(bytes);
  try {
    read_ptf<double>(in);
    FAIL() << "expected CheckpointError";
  } catch (const CheckpointError& e) {
    EXPECT_EQ(e.kind(), CheckpointError::Kind::Corrupt);
  }
}

TEST(PtfTest, BadHeaderIsCorrupt) {
  for (const char* text : {"PTF2 f32 1 1\n0000", "PTF1 f16 1 1\n00", "PTF1 f32 0\n", "garbage"}) {
    std::istringstream in(text);
    EXPECT_THROW(read_ptf<float>(in), CheckpointError) << text;
  }
}

TEST(PtfTest, MissingFileIsNotFound) {
  try {
    load_ptf<float>("/nonexistent/dir/tensor.ptf");
    FAIL();
  } catch (const CheckpointError& e) {
    EXPECT_EQ(e.kind(), CheckpointError::Kind::NotFound);
  }
}

}  // namespace
}  // namespace lggnet
