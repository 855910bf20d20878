// Copyright 2026 The evmod Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <utility>
#include <vector>

#include "evmod/events.hpp"

namespace evmod {

/// Event embedded in dimensionless 3D space-time: u = x, v = y, w = alpha * (t - t_start).
struct SpatioTemporalPoint {
    double u = 0;
    double v = 0;
    double w = 0;
    std::size_t source_index = 0;  // position in the originating SampleSet
};

/// Factor converting microseconds into the spatial unit before distances.
struct TimeScale {
    double alpha = 0;  // pixels per microsecond, > 0
};

/// Fraction of the sensor width that the time axis spans under the "auto"
/// time scale. Chosen so the time coordinate stays small against typical
/// object separations; a full-width time span makes the within-window time
/// spread dominate every distance and clustering degenerates into time slices.
constexpr double kAutoTimeSpanFraction = 0.1;

/// alpha = width * kAutoTimeSpanFraction / window_duration.
TimeScale auto_time_scale(const SensorGeometry& geometry, std::int64_t window_duration_us);

/// Undirected k-nearest-neighbour graph under the union rule: edge (i, j)
/// exists iff j is among the k nearest neighbours of i or vice versa.
struct KnnGraph {
    std::vector<SpatioTemporalPoint> nodes;
    std::vector<std::pair<std::uint32_t, std::uint32_t>> edges;  // first < second, sorted
    int k = 0;
};

/// Throws std::invalid_argument if the sample is empty or alpha <= 0.
std::vector<SpatioTemporalPoint> embed(const SampleSet& sample, TimeScale scale, std::int64_t t_start);

/// Exact kNN graph, Euclidean distance in (u, v, w), distance ties broken by
/// smaller node index. Requires |points| >= 2 and 1 <= k < |points|.
KnnGraph build_knn_graph(std::span<const SpatioTemporalPoint> points, int k, int threads = 1);

/// Copy of the graph without edges longer than factor * Q(quantile) of all
/// edge lengths. Pre-stage for denoise on noisy streams: background noise only
/// reaches the rest of the graph through long edges, and cutting those lets
/// the component filter see it as fragments.
KnnGraph prune_long_edges(const KnnGraph& graph, double factor, double quantile = 0.25);

struct DenoiseResult {
    std::vector<SpatioTemporalPoint> points;  // survivors, original source_index kept
    std::size_t removed = 0;
};

/// Drop connected components with fewer than min_component_size nodes.
DenoiseResult denoise(const KnnGraph& graph, std::size_t min_component_size);

/// Debug dump: `i j` edge list plus a `u,v,w,source_index` node sidecar CSV.
void dump_graph(const KnnGraph& graph, std::ostream& edges_out, std::ostream& nodes_out);

}  // namespace evmod
