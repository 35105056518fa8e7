#pragma once

// Dataset manifests and stratified fold planning.
//
// Manifest CSV: header `image_path,label,lesion_type,mask_path`, one record
// per line. label is healthy|diseased; lesion_type is
// active|inactive|active/inactive|none and must be `none` exactly for
// healthy rows. Paths are resolved relative to the manifest's directory.
// Quoting is not supported; a line containing a quote character or the
// wrong number of fields is rejected.

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "otbench/error.hpp"

namespace otbench {

namespace fs = std::filesystem;

enum class ClassLabel { healthy = 0, diseased = 1 };
enum class LesionType { none, active, inactive, active_inactive };

inline std::string to_string(ClassLabel l) { return l == ClassLabel::healthy ? "healthy" : "diseased"; }

inline std::string to_string(LesionType t)
{
    switch (t) {
    case LesionType::none: return "none";
    case LesionType::active: return "active";
    case LesionType::inactive: return "inactive";
    case LesionType::active_inactive: return "active/inactive";
    }
    return "?";
}

inline std::optional<ClassLabel> parse_class_label(const std::string& s)
{
    if (s == "healthy") return ClassLabel::healthy;
    if (s == "diseased") return ClassLabel::diseased;
    return std::nullopt;
}

inline std::optional<LesionType> parse_lesion_type(const std::string& s)
{
    if (s == "none") return LesionType::none;
    if (s == "active") return LesionType::active;
    if (s == "inactive") return LesionType::inactive;
    if (s == "active/inactive") return LesionType::active_inactive;
    return std::nullopt;
}

struct ManifestRecord {
    std::string image_path;  ///< as written in the manifest
    ClassLabel label = ClassLabel::healthy;
    LesionType lesion_type = LesionType::none;
    std::optional<std::string> mask_path;
};

struct DatasetManifest {
    std::vector<ManifestRecord> records;
    std::string source;  ///< manifest file the records came from
    fs::path base_dir;   ///< directory relative paths resolve against

    fs::path resolve(const std::string& p) const
    {
        const fs::path path(p);
        return path.is_absolute() ? path : base_dir / path;
    }

    std::size_t size() const noexcept { return records.size(); }
};

enum class ManifestMode { classify, segment };

inline constexpr const char* kManifestHeader = "image_path,label,lesion_type,mask_path";

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line)
{
    std::vector<std::string> out;
    std::string field;
    std::istringstream ss(line);
    while (std::getline(ss, field, ',')) out.push_back(field);
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

inline std::string strip_cr(std::string s)
{
    if (!s.empty() && s.back() == '\r') s.pop_back();
    return s;
}

}  // namespace detail

/// Parses and validates manifest text. `check_files` verifies every
/// referenced path exists under `base_dir`.
inline DatasetManifest parse_manifest(std::istream& in, const std::string& source, const fs::path& base_dir,
                                      ManifestMode mode = ManifestMode::classify, bool check_files = true)
{
    DatasetManifest m;
    m.source = source;
    m.base_dir = base_dir;

    auto fail = [&](std::size_t line, const std::string& msg) -> void {
        throw ValidationError(source + ":" + std::to_string(line) + ": " + msg);
    };

    std::string line;
    if (!std::getline(in, line)) throw ValidationError(source + ": empty manifest");
    line = detail::strip_cr(line);
    if (line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line.erase(0, 3);
    if (line != kManifestHeader) fail(1, std::string("bad header, expected '") + kManifestHeader + "'");

    std::set<std::string> seen;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        line = detail::strip_cr(line);
        if (line.empty()) continue;
        if (line.find('"') != std::string::npos) fail(line_no, "quoted fields are not supported");
        const auto f = detail::split_csv_line(line);
        if (f.size() != 4) fail(line_no, "expected 4 fields, got " + std::to_string(f.size()));

        ManifestRecord r;
        r.image_path = f[0];
        if (r.image_path.empty()) fail(line_no, "empty image_path");
        const auto label = parse_class_label(f[1]);
        if (!label) fail(line_no, "label must be healthy|diseased, got '" + f[1] + "'");
        r.label = *label;
        const auto lesion = parse_lesion_type(f[2]);
        if (!lesion) fail(line_no, "unknown lesion_type '" + f[2] + "'");
        r.lesion_type = *lesion;
        if ((r.label == ClassLabel::healthy) != (r.lesion_type == LesionType::none))
            fail(line_no, "lesion_type must be 'none' exactly when label is healthy");
        if (!f[3].empty()) r.mask_path = f[3];

        if (!seen.insert(r.image_path).second) fail(line_no, "duplicate image_path '" + r.image_path + "'");
        if (mode == ManifestMode::segment && r.label == ClassLabel::diseased && !r.mask_path)
            fail(line_no, "diseased record has no mask_path (required for segmentation)");
        if (check_files) {
            if (!fs::exists(m.resolve(r.image_path))) fail(line_no, "image file not found: " + r.image_path);
            if (r.mask_path && !fs::exists(m.resolve(*r.mask_path)))
                fail(line_no, "mask file not found: " + *r.mask_path);
        }
        m.records.push_back(std::move(r));
    }
    if (m.records.empty()) throw ValidationError(source + ": manifest has no records");
    return m;
}

inline DatasetManifest load_manifest(const fs::path& path, ManifestMode mode = ManifestMode::classify)
{
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open manifest: " + path.string());
    return parse_manifest(in, path.string(), path.parent_path(), mode, true);
}

inline void write_manifest(const DatasetManifest& m, const fs::path& path)
{
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ValidationError("cannot write manifest: " + path.string());
    out << kManifestHeader << '\n';
    for (const auto& r : m.records)
        out << r.image_path << ',' << to_string(r.label) << ',' << to_string(r.lesion_type) << ','
            << r.mask_path.value_or("") << '\n';
}

// ---------------------------------------------------------------------------
// folds

/// splitmix64 finaliser; used to derive independent per-fold seeds.
constexpr std::uint64_t mix_seed(std::uint64_t x) noexcept
{
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

constexpr std::uint64_t fold_seed(std::uint64_t master, std::size_t fold) noexcept
{
    return master ^ mix_seed(static_cast<std::uint64_t>(fold) + 1);
}

struct FoldPlan {
    std::size_t k = 0;
    std::uint64_t seed = 0;
    std::vector<std::size_t> fold_of;  ///< per record

    std::vector<std::size_t> validation_indices(std::size_t fold) const
    {
        std::vector<std::size_t> out;
        for (std::size_t i = 0; i < fold_of.size(); ++i)
            if (fold_of[i] == fold) out.push_back(i);
        return out;
    }

    std::vector<std::size_t> train_indices(std::size_t fold) const
    {
        std::vector<std::size_t> out;
        for (std::size_t i = 0; i < fold_of.size(); ++i)
            if (fold_of[i] != fold) out.push_back(i);
        return out;
    }
};

/// Shuffles each stratum with a seeded RNG and deals its members round-robin
/// over the folds; the dealing position carries over from one stratum to the
/// next so fold sizes stay within one of each other.
template <typename Key>
FoldPlan stratified_kfold(const std::vector<Key>& strata, std::size_t k, std::uint64_t seed)
{
    detail::require(k >= 2, "stratified_kfold: k must be >= 2");
    std::map<Key, std::vector<std::size_t>> groups;
    for (std::size_t i = 0; i < strata.size(); ++i) groups[strata[i]].push_back(i);
    for (const auto& [key, members] : groups)
        detail::require(members.size() >= k, "stratified_kfold: a class has fewer members than folds");

    FoldPlan plan{k, seed, std::vector<std::size_t>(strata.size(), 0)};
    std::mt19937_64 rng(seed);
    std::size_t dealer = 0;
    for (auto& [key, members] : groups) {
        std::shuffle(members.begin(), members.end(), rng);
        for (std::size_t idx : members) plan.fold_of[idx] = dealer++ % k;
    }
    return plan;
}

inline FoldPlan stratified_kfold(const DatasetManifest& m, std::size_t k, std::uint64_t seed)
{
    std::vector<int> labels;
    labels.reserve(m.size());
    for (const auto& r : m.records) labels.push_back(static_cast<int>(r.label));
    return stratified_kfold(labels, k, seed);
}

}  // namespace otbench
