#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <map>
#include <random>
#include <vector>

#include "otbench/error.hpp"

namespace otbench {

/// Class-balanced mini-batches over sample indices. Each batch holds
/// batch_size / C samples of every class. Every sample of every class is
/// used at least once per epoch; classes short of the epoch's quota are
/// topped up by sampling with replacement.
inline std::vector<std::vector<std::size_t>> balanced_batches(const std::vector<std::size_t>& labels,
                                                              std::size_t batch_size, std::uint64_t seed)
{
    std::map<std::size_t, std::vector<std::size_t>> by_class;
    for (std::size_t i = 0; i < labels.size(); ++i) by_class[labels[i]].push_back(i);
    detail::require(by_class.size() >= 2, "balanced_batches: need at least 2 classes");
    const std::size_t n_classes = by_class.size();
    detail::require(batch_size > 0 && batch_size % n_classes == 0,
                    "balanced_batches: batch_size must be a positive multiple of the class count");

    const std::size_t per_class = batch_size / n_classes;
    std::size_t largest = 0;
    for (const auto& [c, ids] : by_class) largest = std::max(largest, ids.size());
    const std::size_t n_batches = (largest + per_class - 1) / per_class;
    const std::size_t quota = n_batches * per_class;

    std::mt19937_64 rng(seed);
    std::vector<std::vector<std::size_t>> streams;
    for (auto& [c, ids] : by_class) {
        std::vector<std::size_t> s = ids;
        std::shuffle(s.begin(), s.end(), rng);
        std::uniform_int_distribution<std::size_t> pick(0, ids.size() - 1);
        while (s.size() < quota) s.push_back(ids[pick(rng)]);
        streams.push_back(std::move(s));
    }

    std::vector<std::vector<std::size_t>> batches(n_batches);
    for (std::size_t b = 0; b < n_batches; ++b)
        for (const auto& s : streams)
            batches[b].insert(batches[b].end(), s.begin() + static_cast<std::ptrdiff_t>(b * per_class),
                              s.begin() + static_cast<std::ptrdiff_t>((b + 1) * per_class));
    return batches;
}

}  // namespace otbench
