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
#include <map>
#include <span>
#include <string>
#include <vector>

#include "evmod/events.hpp"

namespace evmod {

/// Pixel-aligned box, inclusive min, exclusive max.
struct BoundingBox {
    int x_min = 0;
    int y_min = 0;
    int x_max = 0;
    int y_max = 0;

    long long area() const {
        return static_cast<long long>(x_max - x_min) * static_cast<long long>(y_max - y_min);
    }
    friend bool operator==(const BoundingBox&, const BoundingBox&) = default;
};

struct DetectionBox {
    BoundingBox box;
    int cluster_id = 0;
    std::size_t event_count = 0;
};

struct DetectionSet {
    int window_index = 0;
    std::vector<DetectionBox> boxes;
};

struct MatchedPair {
    int detection = 0;
    int truth = 0;
    double iou = 0;
};

struct MatchResult {
    std::size_t tp = 0;
    std::size_t fp = 0;
    std::size_t fn = 0;
    std::vector<MatchedPair> pairs;
};

struct MetricsReport {
    double precision = 0;
    double recall = 0;
    double f_measure = 0;
    std::size_t tp = 0;
    std::size_t fp = 0;
    std::size_t fn = 0;
    bool empty_evaluation = false;  // set when tp = fp = fn = 0
    std::vector<MatchResult> per_window;
};

/// Ground truth boxes keyed by window index.
struct GroundTruth {
    std::map<int, std::vector<BoundingBox>> windows;
};

/// Box spanning the [q, 1-q] quantiles of the events' x and y independently,
/// rounded outward. q = 0 gives the exact extent; a degenerate extent widens
/// to a 1-pixel side. Requires at least min_events events and q in [0, 0.5).
BoundingBox cluster_bbox(std::span<const Event> events, double trim_quantile = 0.02,
                         std::size_t min_events = 5);

/// Intersection-over-union with half-open pixel areas.
double iou(const BoundingBox& a, const BoundingBox& b);

/// 2 * P * R / (P + R); 0 when P + R = 0.
double f_measure(double precision, double recall);

/// Greedy one-to-one matching in descending IoU order; only pairs at or above
/// the threshold match. Ties broken by lower detection index, then lower truth
/// index. Requires threshold in (0, 1].
MatchResult match_boxes(const DetectionSet& detections, std::span<const BoundingBox> truth,
                        double threshold = 0.85);

/// Micro-averaged precision / recall / F over the summed counts.
/// Degenerate denominators yield 0 (flagged when all counts are zero).
MetricsReport compute_metrics(std::vector<MatchResult> results);

/// `{"format_version": 1, "windows": [{"index": 1, "boxes": [[x0,y0,x1,y1], ...]}, ...]}`
GroundTruth load_ground_truth(std::istream& in);
GroundTruth load_ground_truth_file(const std::string& path);
std::string ground_truth_to_json(const GroundTruth& truth);

/// Detections mirror the ground-truth layout plus cluster ids and event counts.
std::map<int, DetectionSet> load_detections(std::istream& in);
std::map<int, DetectionSet> load_detections_file(const std::string& path);
std::string detections_to_json(const std::map<int, DetectionSet>& detections);

/// `sequence,method,tp,fp,fn,precision,recall,f_measure`
std::string metrics_csv_header();
std::string metrics_csv_row(const std::string& sequence, const std::string& method,
                            const MetricsReport& report);

}  // namespace evmod
