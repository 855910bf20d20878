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
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "evmod/clustering.hpp"
#include "evmod/evaluation.hpp"
#include "evmod/events.hpp"
#include "evmod/knn_graph.hpp"

namespace evmod {

/// Detection pipeline parameters. Zero-valued "auto" fields resolve per run
/// (alpha, eps, bandwidth) or per flag rule (min_component = k/4, minimum 3).
struct RunConfig {
    std::string method = "kmeans";  // kmeans | dbscan | meanshift | gmm
    std::size_t sample_size = 2000;
    int knn = 45;
    double alpha = 0;  // 0 = auto: width * kAutoTimeSpanFraction / window duration
    int f_min = 2;
    int f_max = 20;
    std::uint64_t seed = 42;
    int restarts = 8;
    int min_component = 0;     // 0 = auto (knn/4, minimum 3); 1 disables component filtering
    double prune_factor = 2.0; // 0 disables edge-length pruning before denoise
    double prune_quantile = 0.25;
    double trim_quantile = 0.02;
    std::size_t min_events_per_box = 5;
    BVariant b_variant = BVariant::nearest_cluster;
    double dbscan_eps = 0;          // 0 = auto: 2x median 1-NN distance
    int dbscan_min_pts = 5;
    double meanshift_bandwidth = 0; // 0 = auto: 4x median 1-NN distance
    double gmm_reg_covar = 1e-6;
    int threads = 0;  // 0 = hardware concurrency; EVMOD_THREADS caps either way
};

struct WindowResult {
    int index = 0;
    bool skipped = false;
    std::string skip_reason;
    double alpha = 0;            // resolved time scale for this window
    std::size_t sampled = 0;
    std::size_t denoised_removed = 0;
    DetectionSet detections;
    std::optional<ModelSelection> selection;  // kmeans / gmm sweeps only
    // Per sampled event: cluster id, or -1 when denoised away / noise-labelled.
    std::vector<int> sample_labels;
    SampleSet sample;
};

struct DetectResult {
    std::vector<WindowResult> windows;
    std::map<int, DetectionSet> detections;  // window index -> boxes
    std::string manifest_json;               // full parameter echo, reproduces the run
};

/// Run the detection pipeline over pre-parsed events:
/// partition -> sample -> embed -> kNN graph -> denoise -> cluster -> boxes.
/// Windows with too few surviving points for the cluster range are skipped
/// and recorded. Output is independent of the worker count.
DetectResult run_detect(std::span<const Event> events, std::span<const std::int64_t> frames,
                        const SensorGeometry& geometry, const RunConfig& config);

/// Per-window model selections as a JSON array (kmeans / gmm only).
std::string selections_to_json(const DetectResult& result);

/// Evaluate detections against ground truth window-by-window. Windows present
/// in only one of the two sides count as all-FP / all-FN respectively.
MetricsReport evaluate_detections(const std::map<int, DetectionSet>& detections,
                                  const GroundTruth& truth, double threshold = 0.85);

}  // namespace evmod
