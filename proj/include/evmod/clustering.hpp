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

#include <array>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "evmod/events.hpp"
#include "evmod/knn_graph.hpp"

namespace evmod {

struct Clustering {
    int f = 0;
    std::vector<int> labels;                      // per point, in [0, f)
    std::vector<std::array<double, 3>> centroids; // f centroids in (u, v, w)
    double inertia = 0;                           // sum of squared point-to-centroid distances
    int iterations = 0;                           // Lloyd iterations executed
    std::uint64_t seed = 0;
    std::vector<double> inertia_trace;            // per-iteration inertia, only when requested
};

struct KMeansOptions {
    int max_iter = 300;
    double tol = 1e-6;         // max centroid movement (Euclidean) below which we stop
    bool record_trace = false; // record inertia after every assignment step
};

/// Lloyd's algorithm with seeded k-means++ initialization. Empty clusters are
/// repaired by reseeding at the point farthest from its assigned centroid
/// (ties to the lowest index). Deterministic for fixed (points, f, seed).
/// Requires 2 <= f <= |points| and finite coordinates.
Clustering kmeans(std::span<const SpatioTemporalPoint> points, int f, std::uint64_t seed,
                  const KMeansOptions& options = {});

/// How b(i) treats foreign clusters: the mean distance to the nearest other
/// cluster (the standard definition) or to all foreign points pooled together.
enum class BVariant { nearest_cluster, pooled };

struct SilhouetteRecord {
    std::vector<double> per_point_s;  // each in [-1, 1]
    double mean_s = 0;
    int f = 0;
};

/// Per-point silhouette values, Euclidean distance in (u, v, w). Singleton
/// clusters and all-zero distances get s(i) = 0. Requires f >= 2 and every
/// cluster id in [0, f) non-empty.
SilhouetteRecord silhouette(std::span<const SpatioTemporalPoint> points, std::span<const int> labels,
                            int f, BVariant variant = BVariant::nearest_cluster, int threads = 1);

/// Silhouettes for several labelings of the same points in one pass over the
/// pairwise distances. Entry order matches `labelings`. Per-point results are
/// bitwise identical to calling silhouette() once per labeling.
std::vector<SilhouetteRecord> silhouette_sweep(std::span<const SpatioTemporalPoint> points,
                                               std::span<const std::vector<int>> labelings,
                                               std::span<const int> fs, BVariant variant,
                                               int threads = 1);

struct ModelSelection {
    std::map<int, SilhouetteRecord> evaluated;  // f -> silhouette of the best run
    std::map<int, Clustering> runs;             // f -> lowest-inertia run
    int chosen_f = 0;                           // argmax of mean_s, ties to smaller f
    double sc = 0;                              // the maximum mean_s
};

/// For each f in [f_min, min(f_max, |points|-1)] run kmeans `restarts` times
/// with seeds derived from (seed, f, restart), keep the lowest-inertia run,
/// and pick the f with the highest mean silhouette. Throws
/// std::invalid_argument when the clamped range is empty.
ModelSelection select_f(std::span<const SpatioTemporalPoint> points, int f_min, int f_max,
                        std::uint64_t seed, int restarts = 8,
                        BVariant variant = BVariant::nearest_cluster,
                        const KMeansOptions& options = {}, int threads = 1);

/// `{"evaluated": {"2": 0.61, ...}, "chosen_f": 3, "SC": 0.79}`
std::string model_selection_to_json(const ModelSelection& selection);

/// Regroup sampled events by cluster id via the surviving source indices.
/// Labels below 0 (noise markers from baseline clusterers) are skipped.
/// Throws std::invalid_argument on size or index misalignment.
std::vector<std::vector<Event>> clusters_from_labels(const SampleSet& sample,
                                                     std::span<const std::size_t> denoised_indices,
                                                     std::span<const int> labels, int f);

}  // namespace evmod
