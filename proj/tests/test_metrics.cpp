#include <gtest/gtest.h>

#include <random>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "otbench/metrics.hpp"
#include "reference_scores.hpp"

using namespace otbench;

namespace {

// 3 tp, 1 fp, 2 fn, 4 tn with label 1 positive
const std::vector<int> kPred{1, 1, 1, 1, 0, 0, 0, 0, 0, 0};
const std::vector<int> kTruth{1, 1, 1, 0, 1, 1, 0, 0, 0, 0};

}  // namespace

TEST(Confusion, HandDerivedCase)
{
    const ConfusionCounts c = confusion_counts(kPred, kTruth, 1);
    EXPECT_EQ(c, (ConfusionCounts{3, 1, 4, 2}));
    EXPECT_DOUBLE_EQ(precision(c), 0.75);
    EXPECT_DOUBLE_EQ(recall(c), 0.6);
    EXPECT_DOUBLE_EQ(f1_score(c), 6.0 / 9.0);
    EXPECT_NEAR(f1_score(c), 0.667, 5e-4);
    EXPECT_DOUBLE_EQ(accuracy(c), 0.7);
}

TEST(Confusion, F1IsHarmonicMean)
{
    const ConfusionCounts c = confusion_counts(kPred, kTruth, 1);
    const double p = precision(c), r = recall(c);
    EXPECT_NEAR(f1_score(c), 2 * p * r / (p + r), 1e-15);
}

TEST(Confusion, PositiveClassSwapsRoles)
{
    const ConfusionCounts c0 = confusion_counts(kPred, kTruth, 0);
    EXPECT_EQ(c0, (ConfusionCounts{4, 2, 3, 1}));
    EXPECT_DOUBLE_EQ(accuracy(c0), 0.7);
    EXPECT_DOUBLE_EQ(precision(c0), 4.0 / 6.0);
}

TEST(Confusion, DegenerateRatiosAreFlagged)
{
    const std::vector<int> none{0, 0, 0};
    const ConfusionCounts c = confusion_counts(none, none, 1);
    EXPECT_TRUE(precision(c).degenerate);
    EXPECT_EQ(precision(c).value, 0.0);
    EXPECT_TRUE(recall(c).degenerate);
    EXPECT_FALSE(accuracy(c).degenerate);
    EXPECT_DOUBLE_EQ(accuracy(c), 1.0);
}

TEST(Confusion, InputValidation)
{
    EXPECT_THROW(confusion_counts(std::vector<int>{1}, std::vector<int>{1, 0}, 1), ValidationError);
    EXPECT_THROW(confusion_counts(std::vector<int>{}, std::vector<int>{}, 1), ValidationError);
}

TEST(Confusion, RandomListsAgainstCounting)
{
    std::mt19937_64 rng(40);
    std::bernoulli_distribution coin(0.5);
    for (int t = 0; t < 200; ++t) {
        std::vector<int> p(20), g(20);
        for (int i = 0; i < 20; ++i) p[i] = coin(rng), g[i] = coin(rng);
        std::size_t tp = 0, fp = 0, fn = 0, tn = 0;
        for (int i = 0; i < 20; ++i) {
            if (p[i] && g[i]) ++tp;
            else if (p[i]) ++fp;
            else if (g[i]) ++fn;
            else ++tn;
        }
        const ConfusionCounts c = confusion_counts(p, g, 1);
        EXPECT_EQ(c, (ConfusionCounts{tp, fp, tn, fn}));
        EXPECT_EQ(accuracy(c).value, static_cast<double>(tp + tn) / 20.0);
    }
}

TEST(ClassificationScores, BinaryUsesPositiveClass)
{
    const ClassificationScores s = classification_scores(kPred, kTruth, {0, 1}, 1);
    EXPECT_DOUBLE_EQ(s.precision, 0.75);
    EXPECT_DOUBLE_EQ(s.recall, 0.6);
    EXPECT_FALSE(s.degenerate);
}

TEST(ClassificationScores, MulticlassMacroAverage)
{
    const std::vector<int> pred{0, 1, 2, 2, 1, 0};
    const std::vector<int> truth{0, 1, 2, 1, 1, 2};
    const ClassificationScores s = classification_scores(pred, truth, {0, 1, 2}, 1);
    // per class precision: 1/2, 2/2, 1/2 ; recall: 1/1, 2/3, 1/2
    EXPECT_DOUBLE_EQ(s.precision, (0.5 + 1.0 + 0.5) / 3.0);
    EXPECT_DOUBLE_EQ(s.recall, (1.0 + 2.0 / 3.0 + 0.5) / 3.0);
    EXPECT_DOUBLE_EQ(s.accuracy, 4.0 / 6.0);
}

TEST(Overlap, HandDerivedPair)
{
    // |P|=2, |G|=2, |P∩G|=1 on 4 pixels
    BinaryMask p(2, 2), g(2, 2);
    p.set(0, 0, true);
    p.set(0, 1, true);
    g.set(0, 0, true);
    g.set(1, 0, true);
    EXPECT_DOUBLE_EQ(dice_score(p, g), 0.5);
    EXPECT_DOUBLE_EQ(iou_score(p, g), 1.0 / 3.0);
    EXPECT_DOUBLE_EQ(pixel_accuracy(p, g), 0.5);
}

TEST(Overlap, EmptyMasksScorePerfect)
{
    const BinaryMask e(3, 3);
    EXPECT_EQ(dice_score(e, e), 1.0);
    EXPECT_EQ(iou_score(e, e), 1.0);
    EXPECT_EQ(pixel_accuracy(e, e), 1.0);
    BinaryMask one(3, 3);
    one.set(1, 1, true);
    EXPECT_EQ(dice_score(one, e), 0.0);
}

TEST(Overlap, SetEnumerationOracle)
{
    std::mt19937_64 rng(41);
    std::uniform_real_distribution<double> dens(0.0, 1.0);
    for (int t = 0; t < 200; ++t) {
        const BinaryMask a = oracle::random_mask(rng, 8, 8, dens(rng));
        const BinaryMask b = oracle::random_mask(rng, 8, 8, dens(rng));
        const oracle::SetScores s = oracle::set_scores(a, b);
        EXPECT_EQ(dice_score(a, b), s.dice);
        EXPECT_EQ(iou_score(a, b), s.iou);
        EXPECT_EQ(pixel_accuracy(a, b), s.pixel_acc);
    }
}

TEST(Overlap, IouDiceIdentityAndSymmetry)
{
    std::mt19937_64 rng(42);
    for (int t = 0; t < 500; ++t) {
        const BinaryMask a = oracle::random_mask(rng, 8, 8, 0.3);
        const BinaryMask b = oracle::random_mask(rng, 8, 8, 0.6);
        const double d = dice_score(a, b);
        EXPECT_NEAR(iou_score(a, b), d / (2.0 - d), 1e-12);
        EXPECT_EQ(dice_score(a, b), dice_score(b, a));
        EXPECT_EQ(iou_score(a, b), iou_score(b, a));
        EXPECT_LE(iou_score(a, b), d);
    }
}

TEST(Overlap, ShapeMismatch)
{
    EXPECT_THROW(dice_score(BinaryMask(2, 2), BinaryMask(2, 3)), ValidationError);
}

TEST(Aggregate, PopulationStd)
{
    const MeanStd m = aggregate_folds({1.0, 3.0});
    EXPECT_DOUBLE_EQ(m.mean, 2.0);
    EXPECT_DOUBLE_EQ(m.std, 1.0);
    EXPECT_EQ(aggregate_folds({0.5}).std, 0.0);
    EXPECT_THROW(aggregate_folds({}), ValidationError);
}

TEST(Aggregate, ReferenceRowsReproduce)
{
    // two well-behaved rows; every row is covered by the
    // acceptance binary
    for (const auto& m : reference_scores::models()) {
        if (m.name != "VGG16" && m.name != "MobileNetV2") continue;
        for (const auto* col : {&m.acc, &m.pr, &m.re, &m.f1}) {
            const MeanStd a = aggregate_folds({col->folds.begin(), col->folds.end()});
            EXPECT_NEAR(a.mean, col->mean, 5e-4) << m.name;
            EXPECT_NEAR(a.std, col->std, 1e-3) << m.name;
        }
    }
    const MeanStd vgg = aggregate_folds({0.929, 0.951, 1.0, 1.0, 1.0});
    EXPECT_NEAR(vgg.mean, 0.976, 5e-4);
    EXPECT_NEAR(vgg.std, 0.030, 1e-3);
}

TEST(FoldSummary, RangeChecked)
{
    FoldSummary f;
    f.set(metric_names::dice, 0.5);
    f.set(metric_names::dice, 0.75);
    EXPECT_EQ(f.metrics.size(), 1u);
    EXPECT_EQ(f.get("dice"), 0.75);
    EXPECT_THROW(f.set("iou", 1.5), ValidationError);
    EXPECT_THROW(f.set("iou", std::nan("")), ValidationError);
    EXPECT_THROW(f.get("iou"), ValidationError);
}
