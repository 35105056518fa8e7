#pragma once

#include "otbench/adam.hpp"
#include "otbench/augment.hpp"
#include "otbench/batching.hpp"
#include "otbench/benchmark.hpp"
#include "otbench/clahe.hpp"
#include "otbench/dataset.hpp"
#include "otbench/error.hpp"
#include "otbench/features.hpp"
#include "otbench/filters.hpp"
#include "otbench/image.hpp"
#include "otbench/io.hpp"
#include "otbench/losses.hpp"
#include "otbench/metrics.hpp"
#include "otbench/models.hpp"
#include "otbench/pipeline.hpp"
#include "otbench/report.hpp"
#include "otbench/synthetic.hpp"
