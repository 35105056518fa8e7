#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "otbench/batching.hpp"
#include "otbench/dataset.hpp"

using namespace otbench;
namespace fs = std::filesystem;

namespace {

DatasetManifest parse(const std::string& text, ManifestMode mode = ManifestMode::classify, bool check = false,
                      const fs::path& base = ".")
{
    std::istringstream in(text);
    return parse_manifest(in, "m.csv", base, mode, check);
}

std::string error_of(const std::string& text, ManifestMode mode = ManifestMode::classify, bool check = false,
                     const fs::path& base = ".")
{
    try {
        parse(text, mode, check, base);
    } catch (const ValidationError& e) {
        return e.what();
    }
    return {};
}

const std::string kHeader = "image_path,label,lesion_type,mask_path\n";

}  // namespace

TEST(Manifest, ParsesRecords)
{
    const auto m = parse(kHeader + "a.png,healthy,none,\nb.png,diseased,active/inactive,b_mask.png\n");
    ASSERT_EQ(m.size(), 2u);
    EXPECT_EQ(m.records[0].label, ClassLabel::healthy);
    EXPECT_FALSE(m.records[0].mask_path.has_value());
    EXPECT_EQ(m.records[1].lesion_type, LesionType::active_inactive);
    EXPECT_EQ(*m.records[1].mask_path, "b_mask.png");
}

TEST(Manifest, CrlfAndBlankLines)
{
    const auto m = parse("image_path,label,lesion_type,mask_path\r\na.png,healthy,none,\r\n\r\nb.png,diseased,active,\r\n");
    EXPECT_EQ(m.size(), 2u);
}

TEST(Manifest, RejectsBadRows)
{
    EXPECT_NE(error_of(kHeader + "a.png,healthy,active,\n").find("m.csv:2:"), std::string::npos);
    EXPECT_NE(error_of(kHeader + "a.png,diseased,none,\n").find("lesion_type"), std::string::npos);
    EXPECT_NE(error_of(kHeader + "a.png,sick,none,\n").find("label"), std::string::npos);
    EXPECT_NE(error_of(kHeader + "a.png,healthy,none,\na.png,healthy,none,\n").find("m.csv:3: duplicate"),
              std::string::npos);
    EXPECT_NE(error_of(kHeader + "\"a.png\",healthy,none,\n").find("quoted"), std::string::npos);
    EXPECT_NE(error_of(kHeader + "a.png,healthy,none\n").find("4 fields"), std::string::npos);
    EXPECT_NE(error_of("path,label\n").find("m.csv:1: bad header"), std::string::npos);
    EXPECT_NE(error_of(kHeader).find("no records"), std::string::npos);
}

TEST(Manifest, SegmentModeNeedsMasks)
{
    const std::string text = kHeader + "a.png,healthy,none,\nb.png,diseased,active,\n";
    EXPECT_NO_THROW(parse(text));
    EXPECT_NE(error_of(text, ManifestMode::segment).find("m.csv:3:"), std::string::npos);
}

TEST(Manifest, MissingFileNamesTheRow)
{
    const fs::path dir = fs::temp_directory_path() / "otbench_manifest_test";
    fs::create_directories(dir);
    std::ofstream(dir / "a.png") << "x";
    std::ofstream(dir / "b.png") << "x";
    const std::string text = kHeader + "a.png,healthy,none,\nb.png,diseased,active,missing_mask.png\n";
    const std::string err = error_of(text, ManifestMode::segment, true, dir);
    EXPECT_NE(err.find("m.csv:3:"), std::string::npos) << err;
    EXPECT_NE(err.find("missing_mask.png"), std::string::npos) << err;
    fs::remove_all(dir);
}

TEST(Manifest, WriteAndReload)
{
    const fs::path dir = fs::temp_directory_path() / "otbench_manifest_rt";
    fs::create_directories(dir);
    for (const char* f : {"a.png", "b.png", "bm.png"}) std::ofstream(dir / f) << "x";
    const auto m = parse(kHeader + "a.png,healthy,none,\nb.png,diseased,inactive,bm.png\n");
    write_manifest(m, dir / "out.csv");
    const auto back = load_manifest(dir / "out.csv", ManifestMode::segment);
    ASSERT_EQ(back.size(), 2u);
    EXPECT_EQ(back.records[1].image_path, "b.png");
    EXPECT_EQ(back.records[1].lesion_type, LesionType::inactive);
    EXPECT_EQ(back.resolve("b.png"), dir / "b.png");
    fs::remove_all(dir);
    EXPECT_THROW(load_manifest(dir / "out.csv"), ValidationError);
}

TEST(Kfold, TenSamplesFiveFolds)
{
    // 6 healthy + 4 diseased violates the one-member-per-fold precondition
    const std::vector<int> uneven{0, 0, 0, 0, 0, 0, 1, 1, 1, 1};
    EXPECT_THROW(stratified_kfold(uneven, 5, 0), ValidationError);

    const std::vector<int> labels{0, 0, 0, 0, 0, 1, 1, 1, 1, 1};
    const FoldPlan plan = stratified_kfold(labels, 5, 0);
    ASSERT_EQ(plan.fold_of.size(), 10u);
    for (std::size_t f = 0; f < 5; ++f) {
        const auto v = plan.validation_indices(f);
        EXPECT_EQ(v.size(), 2u);
        EXPECT_EQ(plan.train_indices(f).size(), 8u);
        EXPECT_EQ(labels[v[0]] + labels[v[1]], 1);
    }
}

TEST(Kfold, PartitionProperties)
{
    std::vector<int> labels;
    for (int i = 0; i < 37; ++i) labels.push_back(i % 3 == 0 ? 1 : 0);
    for (std::uint64_t seed : {0ull, 1ull, 99ull}) {
        const FoldPlan plan = stratified_kfold(labels, 5, seed);
        std::set<std::size_t> all;
        std::size_t min_size = 100, max_size = 0;
        for (std::size_t f = 0; f < 5; ++f) {
            const auto v = plan.validation_indices(f), t = plan.train_indices(f);
            EXPECT_EQ(v.size() + t.size(), labels.size());
            for (auto i : v) {
                EXPECT_TRUE(all.insert(i).second);
                EXPECT_EQ(std::count(t.begin(), t.end(), i), 0);
            }
            min_size = std::min(min_size, v.size());
            max_size = std::max(max_size, v.size());
            // per class within one of the even share
            std::map<int, std::size_t> per;
            for (auto i : v) ++per[labels[i]];
            EXPECT_NEAR(static_cast<double>(per[1]), 13.0 / 5.0, 1.0);
        }
        EXPECT_EQ(all.size(), labels.size());
        EXPECT_LE(max_size - min_size, 1u);
    }
}

TEST(Kfold, SeededAndDeterministic)
{
    std::vector<int> labels(40);
    for (int i = 0; i < 40; ++i) labels[i] = i % 2;
    EXPECT_EQ(stratified_kfold(labels, 5, 7).fold_of, stratified_kfold(labels, 5, 7).fold_of);
    EXPECT_NE(stratified_kfold(labels, 5, 7).fold_of, stratified_kfold(labels, 5, 8).fold_of);
}

TEST(Kfold, Errors)
{
    EXPECT_THROW(stratified_kfold(std::vector<int>{0, 0, 0, 0, 0, 1, 1, 1, 1}, 5, 0), ValidationError);
    EXPECT_THROW(stratified_kfold(std::vector<int>{0, 1}, 1, 0), ValidationError);
}

TEST(FoldSeed, DistinctAndStable)
{
    std::set<std::uint64_t> seen;
    for (std::size_t f = 0; f < 10; ++f) EXPECT_TRUE(seen.insert(fold_seed(42, f)).second);
    EXPECT_EQ(fold_seed(42, 3), fold_seed(42, 3));
    EXPECT_NE(fold_seed(42, 3), fold_seed(43, 3));
    // splitmix64 reference value for input 1 with a zero master
    EXPECT_EQ(mix_seed(1), 0x910a2dec89025cc1ull);
}

TEST(BalancedBatches, ImbalancedClassesAreToppedUp)
{
    // A: 6 samples, B: 2 samples, batch 4 -> 3 batches of 2 A + 2 B
    const std::vector<std::size_t> labels{0, 0, 0, 0, 0, 0, 1, 1};
    const auto batches = balanced_batches(labels, 4, 5);
    ASSERT_EQ(batches.size(), 3u);
    std::map<std::size_t, std::size_t> a_uses;
    std::set<std::size_t> b_seen;
    for (const auto& b : batches) {
        ASSERT_EQ(b.size(), 4u);
        std::size_t a = 0;
        for (auto i : b) {
            if (labels[i] == 0) ++a, ++a_uses[i];
            else b_seen.insert(i);
        }
        EXPECT_EQ(a, 2u);
    }
    EXPECT_EQ(a_uses.size(), 6u);
    for (const auto& [i, n] : a_uses) EXPECT_EQ(n, 1u);
    EXPECT_EQ(b_seen.size(), 2u);
}

TEST(BalancedBatches, EvenClassesNeedNoTopUp)
{
    const std::vector<std::size_t> labels{0, 1, 0, 1, 0, 1, 0, 1};
    const auto batches = balanced_batches(labels, 4, 1);
    ASSERT_EQ(batches.size(), 2u);
    std::multiset<std::size_t> used;
    for (const auto& b : batches) used.insert(b.begin(), b.end());
    EXPECT_EQ(used.size(), 8u);
    EXPECT_EQ(std::set<std::size_t>(used.begin(), used.end()).size(), 8u);
}

TEST(BalancedBatches, DeterminismAndErrors)
{
    const std::vector<std::size_t> labels{0, 0, 0, 1, 1, 2};
    EXPECT_EQ(balanced_batches(labels, 6, 3), balanced_batches(labels, 6, 3));
    EXPECT_THROW(balanced_batches(labels, 4, 0), ValidationError);
    EXPECT_THROW(balanced_batches({0, 0, 0}, 2, 0), ValidationError);
}
