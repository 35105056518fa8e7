#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "oracles.hpp"
#include "otbench/losses.hpp"

using namespace otbench;

namespace {

struct Instance {
    std::vector<double> p;
    std::vector<std::uint8_t> g;
};

Instance random_instance(std::mt19937_64& rng, std::size_t n)
{
    std::uniform_real_distribution<double> u(0.02, 0.98);
    std::bernoulli_distribution coin(0.4);
    Instance in{std::vector<double>(n), std::vector<std::uint8_t>(n)};
    for (std::size_t i = 0; i < n; ++i) {
        in.p[i] = u(rng);
        in.g[i] = coin(rng);
    }
    return in;
}

}  // namespace

TEST(SoftDice, ClosedForms)
{
    // p = 0.5 everywhere, half the target set, eps = 1 on n = 4:
    // 1 - (2*1 + 1) / (2 + 2 + 1) = 0.4
    const std::vector<double> p(4, 0.5);
    const std::vector<std::uint8_t> g{1, 1, 0, 0};
    EXPECT_DOUBLE_EQ(soft_dice_loss(p, g).loss, 0.4);
    // perfect hard prediction: loss 0 for any eps
    const std::vector<double> hard{1, 1, 0, 0};
    EXPECT_DOUBLE_EQ(soft_dice_loss(hard, g).loss, 0.0);
    // large n, p = 0.5, half positive: approaches 0.5
    const std::vector<double> big(10000, 0.5);
    std::vector<std::uint8_t> half(10000, 0);
    std::fill(half.begin(), half.begin() + 5000, 1);
    EXPECT_NEAR(soft_dice_loss(big, half).loss, 0.5, 1e-4);
    EXPECT_NEAR(soft_jaccard_loss(big, half).loss, 2.0 / 3.0, 1e-4);
}

TEST(SoftJaccard, ClosedForms)
{
    const std::vector<double> p(4, 0.5);
    const std::vector<std::uint8_t> g{1, 1, 0, 0};
    // 1 - (1 + 1) / (2 + 2 - 1 + 1) = 0.5
    EXPECT_DOUBLE_EQ(soft_jaccard_loss(p, g).loss, 0.5);
    // empty target, zero prediction: smoothing gives exactly 0
    const std::vector<double> z(4, 0.0);
    const std::vector<std::uint8_t> e(4, 0);
    EXPECT_DOUBLE_EQ(soft_jaccard_loss(z, e).loss, 0.0);
    EXPECT_DOUBLE_EQ(soft_dice_loss(z, e).loss, 0.0);
}

TEST(SoftLosses, BoundsAndOrdering)
{
    std::mt19937_64 rng(50);
    for (int t = 0; t < 1000; ++t) {
        const Instance in = random_instance(rng, 1 + t % 50);
        const double d = soft_dice_loss(in.p, in.g).loss;
        const double j = soft_jaccard_loss(in.p, in.g).loss;
        EXPECT_GE(d, 0.0);
        EXPECT_LE(d, 1.0);
        EXPECT_GE(j, 0.0);
        EXPECT_LE(j, 1.0);
        EXPECT_GE(j, d);
    }
}

TEST(SoftDice, GradientMatchesFiniteDifferences)
{
    std::mt19937_64 rng(51);
    for (int t = 0; t < 100; ++t) {
        const Instance in = random_instance(rng, 16);
        const auto f = [&](const std::vector<double>& x) { return soft_dice_loss(x, in.g).loss; };
        EXPECT_LE(oracle::max_relative_error(soft_dice_loss(in.p, in.g).grad, oracle::numeric_gradient(f, in.p)), 1e-4);
    }
}

TEST(SoftJaccard, GradientMatchesFiniteDifferences)
{
    std::mt19937_64 rng(52);
    for (int t = 0; t < 100; ++t) {
        const Instance in = random_instance(rng, 16);
        const auto f = [&](const std::vector<double>& x) { return soft_jaccard_loss(x, in.g).loss; };
        EXPECT_LE(oracle::max_relative_error(soft_jaccard_loss(in.p, in.g).grad, oracle::numeric_gradient(f, in.p)),
                  1e-4);
    }
}

TEST(Bce, ValueAndGradient)
{
    const std::vector<double> p{0.5, 0.5};
    const std::vector<std::uint8_t> g{1, 0};
    EXPECT_DOUBLE_EQ(binary_cross_entropy(p, g).loss, std::numbers::ln2);
    std::mt19937_64 rng(53);
    for (int t = 0; t < 20; ++t) {
        const Instance in = random_instance(rng, 10);
        const auto f = [&](const std::vector<double>& x) { return binary_cross_entropy(x, in.g).loss; };
        EXPECT_LE(oracle::max_relative_error(binary_cross_entropy(in.p, in.g).grad, oracle::numeric_gradient(f, in.p)),
                  1e-4);
    }
}

TEST(SegmentationLoss, DispatchAndParse)
{
    const std::vector<double> p{0.3, 0.8};
    const std::vector<std::uint8_t> g{0, 1};
    EXPECT_EQ(segmentation_loss(SegLoss::dice, p, g).loss, soft_dice_loss(p, g).loss);
    EXPECT_EQ(segmentation_loss(SegLoss::jaccard, p, g).loss, soft_jaccard_loss(p, g).loss);
    EXPECT_EQ(parse_seg_loss("jaccard"), SegLoss::jaccard);
    EXPECT_EQ(to_string(SegLoss::dice), "dice");
    EXPECT_THROW(parse_seg_loss("focal"), ValidationError);
    EXPECT_THROW(soft_dice_loss(p, std::vector<std::uint8_t>{1}), ValidationError);
    EXPECT_THROW(soft_dice_loss(p, g, 0.0), ValidationError);
}

TEST(Scce, ClosedForms)
{
    const std::vector<double> equal{0.3, 0.3, 0.3};
    EXPECT_NEAR(scce_loss(equal, 1).loss, std::log(3.0), 1e-15);
    const std::vector<double> sure{10.0, -10.0};
    // -ln sigmoid(20) = log(1 + e^-20)
    EXPECT_NEAR(scce_loss(sure, 0).loss, std::log1p(std::exp(-20.0)), 1e-22);
    EXPECT_NEAR(scce_loss(sure, 0).loss, 2.06115362e-09, 1e-17);
    // shift invariance and stability for huge logits
    const std::vector<double> huge{1000.0, 1001.0};
    const std::vector<double> small{0.0, 1.0};
    EXPECT_NEAR(scce_loss(huge, 0).loss, scce_loss(small, 0).loss, 1e-12);
    EXPECT_TRUE(std::isfinite(scce_loss(huge, 0).loss));
    EXPECT_THROW(scce_loss(small, 2), ValidationError);
}

TEST(Scce, GradientMatchesFiniteDifferences)
{
    std::mt19937_64 rng(54);
    std::normal_distribution<double> n(0.0, 2.0);
    for (int t = 0; t < 100; ++t) {
        std::vector<double> z(2 + t % 4);
        for (double& v : z) v = n(rng);
        const std::size_t label = static_cast<std::size_t>(t) % z.size();
        const auto f = [&](const std::vector<double>& x) { return scce_loss(x, label).loss; };
        EXPECT_LE(oracle::max_relative_error(scce_loss(z, label).grad, oracle::numeric_gradient(f, z)), 1e-4);
    }
}

TEST(Softmax, SumsToOne)
{
    const std::vector<double> z{-3.0, 0.0, 2.5, 700.0};
    const auto s = softmax(z);
    double sum = 0.0;
    for (double v : s) sum += v;
    EXPECT_NEAR(sum, 1.0, 1e-15);
}
