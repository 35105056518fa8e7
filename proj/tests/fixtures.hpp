#pragma once

#include <string>
#include <vector>

#include "otbench/benchmark.hpp"
#include "otbench/synthetic.hpp"

namespace fixture {

inline std::vector<otbench::DatasetItem> as_items(const std::vector<otbench::synth::SyntheticSample>& xs)
{
    std::vector<otbench::DatasetItem> out;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        otbench::DatasetItem it;
        it.id = "img" + std::to_string(i);
        it.image = xs[i].image;
        it.label = xs[i].label;
        it.lesion_type = xs[i].lesion_type;
        it.mask = xs[i].mask;
        out.push_back(std::move(it));
    }
    return out;
}

inline std::vector<otbench::DatasetItem> disks(std::size_t n, std::uint64_t seed)
{
    return as_items(otbench::synth::bright_disk_dataset(n, seed));
}

inline std::vector<otbench::DatasetItem> mixed(std::size_t healthy, std::size_t diseased, std::uint64_t seed)
{
    return as_items(otbench::synth::classification_dataset(healthy, diseased, seed));
}

inline otbench::BenchmarkConfig quick_segment_config()
{
    otbench::BenchmarkConfig c;
    c.task = otbench::Task::segment;
    c.loss = otbench::SegLoss::jaccard;
    c.epochs = 30;
    c.lr = 0.05;
    c.seed = 0;
    return c;
}

}  // namespace fixture
