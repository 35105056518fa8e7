#include <gtest/gtest.h>

#include <algorithm>
#include <random>

#include "oracles.hpp"
#include "otbench/augment.hpp"

using namespace otbench;

namespace {

const ImagePlane kSquare = ImagePlane::from_rows({{1, 2}, {3, 4}});  // [[a,b],[c,d]]

std::vector<double> sorted_values(const ImagePlane& p)
{
    std::vector<double> v(p.pixels().begin(), p.pixels().end());
    std::sort(v.begin(), v.end());
    return v;
}

}  // namespace

TEST(Rotate90, OneClockwiseTurn)
{
    EXPECT_EQ(rotate90(kSquare, 1), ImagePlane::from_rows({{3, 1}, {4, 2}}));
}

TEST(Rotate90, NonSquareSwapsDimensions)
{
    const ImagePlane p = ImagePlane::from_rows({{1, 2, 3}, {4, 5, 6}});
    const ImagePlane r = rotate90(p, 1);
    EXPECT_EQ(r, ImagePlane::from_rows({{4, 1}, {5, 2}, {6, 3}}));
    EXPECT_EQ(rotate90(p, 3), ImagePlane::from_rows({{3, 6}, {2, 5}, {1, 4}}));
    EXPECT_EQ(rotate90(p, 2).width(), 3u);
}

TEST(Rotate90, GroupProperties)
{
    std::mt19937_64 rng(30);
    for (int t = 0; t < 10; ++t) {
        const ImagePlane p = oracle::random_plane(rng, 5 + t, 3 + t);
        EXPECT_EQ(rotate90(rotate90(rotate90(rotate90(p, 1), 1), 1), 1), p);
        EXPECT_EQ(rotate90(p, 2), flip_v(flip_h(p)));
        EXPECT_EQ(rotate90(p, 3), rotate90(rotate90(p, 2), 1));
    }
}

TEST(Rotate90, OtherAnglesRejected)
{
    EXPECT_THROW(rotate90(kSquare, 0), ValidationError);
    EXPECT_THROW(rotate90(kSquare, 4), ValidationError);
}

TEST(Flip, IndexPermutation)
{
    EXPECT_EQ(flip_h(kSquare), ImagePlane::from_rows({{2, 1}, {4, 3}}));
    EXPECT_EQ(flip_v(kSquare), ImagePlane::from_rows({{3, 4}, {1, 2}}));
    EXPECT_EQ(flip_h(flip_h(kSquare)), kSquare);
    EXPECT_EQ(flip_v(flip_v(kSquare)), kSquare);
}

TEST(Flip, MaskFollowsImage)
{
    std::mt19937_64 rng(31);
    const BinaryMask m = oracle::random_mask(rng, 7, 5);
    const BinaryMask f = flip_h(m);
    for (std::size_t r = 0; r < 5; ++r)
        for (std::size_t c = 0; c < 7; ++c) EXPECT_EQ(f.at(r, c), m.at(r, 6 - c));
}

TEST(AugmentPair, SixTaggedDerivatives)
{
    std::mt19937_64 rng(32);
    const SamplePair s(oracle::random_plane(rng, 9, 6), oracle::random_mask(rng, 9, 6, 0.3));
    const AugmentSet set = augment_pair(s);
    ASSERT_EQ(set.size(), 6u);
    const std::vector<AugmentTag> tags{AugmentTag::rot90,      AugmentTag::rot180, AugmentTag::rot270,
                                       AugmentTag::normalized, AugmentTag::hflip,  AugmentTag::vflip};
    for (std::size_t i = 0; i < 6; ++i) EXPECT_EQ(set[i].tag, tags[i]);
    EXPECT_EQ(augment_pair(s, true).size(), 7u);
    EXPECT_EQ(augment_pair(s, true).back().tag, AugmentTag::zoom);
}

TEST(AugmentPair, MasksUndergoTheImageTransform)
{
    std::mt19937_64 rng(33);
    for (int t = 0; t < 10; ++t) {
        const ImagePlane img = oracle::random_plane(rng, 8, 5);
        const BinaryMask mask = oracle::random_mask(rng, 8, 5, 0.4);
        const AugmentSet set = augment_pair(SamplePair(img, mask));
        EXPECT_EQ(*set[0].pair.mask, rotate90(mask, 1));
        EXPECT_EQ(*set[1].pair.mask, rotate90(mask, 2));
        EXPECT_EQ(*set[2].pair.mask, rotate90(mask, 3));
        EXPECT_EQ(*set[3].pair.mask, mask);
        EXPECT_EQ(*set[4].pair.mask, flip_h(mask));
        EXPECT_EQ(*set[5].pair.mask, flip_v(mask));
        EXPECT_EQ(set[0].pair.image, rotate90(img, 1));
        EXPECT_EQ(set[3].pair.image, normalize_max(img));

        // pixelwise: where the transformed image holds source pixel (r,c),
        // the transformed mask holds source mask (r,c). Encode positions as
        // distinct intensities to recover the permutation.
        ImagePlane index(8, 5);
        for (std::size_t i = 0; i < index.size(); ++i) index.pixels()[i] = static_cast<double>(i + 1) / 64.0;
        const AugmentSet iset = augment_pair(SamplePair(index, mask));
        for (const auto& d : iset) {
            if (d.tag == AugmentTag::normalized) continue;
            for (std::size_t i = 0; i < d.pair.image.size(); ++i) {
                const auto src = static_cast<std::size_t>(std::lround(d.pair.image.pixels()[i] * 64.0)) - 1;
                EXPECT_EQ((*d.pair.mask)[i], mask[src]);
            }
        }
    }
}

TEST(AugmentPair, GeometricTransformsPermutePixels)
{
    std::mt19937_64 rng(34);
    const ImagePlane img = oracle::random_plane(rng, 10, 7);
    const BinaryMask mask = oracle::random_mask(rng, 10, 7, 0.25);
    for (const auto& d : augment_pair(SamplePair(img, mask))) {
        EXPECT_EQ(d.pair.mask->count(), mask.count());
        if (d.tag != AugmentTag::normalized) {
            EXPECT_EQ(sorted_values(d.pair.image), sorted_values(img));
        }
    }
}

TEST(AugmentPair, EmptyMaskStaysEmpty)
{
    std::mt19937_64 rng(35);
    const AugmentSet set = augment_pair(SamplePair(oracle::random_plane(rng, 6, 6), BinaryMask(6, 6)));
    for (const auto& d : set) EXPECT_EQ(d.pair.mask->count(), 0u);
}

TEST(AugmentPair, ClassificationSampleWithoutMask)
{
    std::mt19937_64 rng(36);
    const AugmentSet set = augment_pair(SamplePair(oracle::random_plane(rng, 6, 4)));
    ASSERT_EQ(set.size(), 6u);
    for (const auto& d : set) EXPECT_FALSE(d.pair.mask.has_value());
}

TEST(AugmentPair, DimensionMismatchRejected)
{
    EXPECT_THROW(SamplePair(ImagePlane(4, 4), BinaryMask(4, 5)), ValidationError);
}

TEST(AugmentPair, Deterministic)
{
    std::mt19937_64 rng(37);
    const SamplePair s(oracle::random_plane(rng, 6, 6), oracle::random_mask(rng, 6, 6));
    const AugmentSet a = augment_pair(s), b = augment_pair(s);
    for (std::size_t i = 0; i < a.size(); ++i) {
        EXPECT_EQ(a[i].pair.image, b[i].pair.image);
        EXPECT_EQ(*a[i].pair.mask, *b[i].pair.mask);
    }
}

TEST(AugmentRgb, ChannelsTransformTogether)
{
    std::mt19937_64 rng(38);
    const RgbImage img(oracle::random_plane(rng, 5, 4), oracle::random_plane(rng, 5, 4), oracle::random_plane(rng, 5, 4));
    const auto set = augment_rgb(img, oracle::random_mask(rng, 5, 4));
    ASSERT_EQ(set.size(), 6u);
    EXPECT_EQ(set[0].image.green, rotate90(img.green, 1));
    EXPECT_EQ(set[4].image.blue, flip_h(img.blue));
    const double joint = std::max({plane_max(img.red), plane_max(img.green), plane_max(img.blue)});
    EXPECT_DOUBLE_EQ(set[3].image.red.at(0, 0), img.red.at(0, 0) / joint);
}

TEST(Zoom, CenterCropResize)
{
    const ImagePlane p = ImagePlane::from_rows({{0, 0, 0, 0}, {0, 1, 2, 0}, {0, 3, 4, 0}, {0, 0, 0, 0}});
    const ImagePlane z = zoom_center(p, 0.5);
    EXPECT_EQ(z, ImagePlane::from_rows({{1, 1, 2, 2}, {1, 1, 2, 2}, {3, 3, 4, 4}, {3, 3, 4, 4}}));
}
