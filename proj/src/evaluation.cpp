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

#include "evmod/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <stdexcept>

#include <json.hpp>

namespace evmod {

namespace {

void check_box(const BoundingBox& b) {
    if (b.x_min >= b.x_max || b.y_min >= b.y_max)
        throw std::invalid_argument("bounding box must have positive extent");
}

// Linear-interpolation quantile over a sorted vector, numpy style.
double sorted_quantile(const std::vector<int>& sorted, double q) {
    const double pos = q * static_cast<double>(sorted.size() - 1);
    const std::size_t lo = static_cast<std::size_t>(pos);
    const double frac = pos - static_cast<double>(lo);
    if (lo + 1 >= sorted.size()) return sorted.back();
    return static_cast<double>(sorted[lo]) + frac * static_cast<double>(sorted[lo + 1] - sorted[lo]);
}

std::ifstream open_or_throw(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path);
    return in;
}

}  // namespace

BoundingBox cluster_bbox(std::span<const Event> events, double trim_quantile, std::size_t min_events) {
    if (events.size() < min_events)
        throw std::invalid_argument("too few events for a bounding box");
    if (trim_quantile < 0 || trim_quantile >= 0.5)
        throw std::invalid_argument("trim quantile must be in [0, 0.5)");

    std::vector<int> xs, ys;
    xs.reserve(events.size());
    ys.reserve(events.size());
    for (const Event& ev : events) {
        xs.push_back(ev.x);
        ys.push_back(ev.y);
    }
    std::sort(xs.begin(), xs.end());
    std::sort(ys.begin(), ys.end());

    BoundingBox box;
    box.x_min = static_cast<int>(std::floor(sorted_quantile(xs, trim_quantile)));
    box.x_max = static_cast<int>(std::ceil(sorted_quantile(xs, 1.0 - trim_quantile))) + 1;
    box.y_min = static_cast<int>(std::floor(sorted_quantile(ys, trim_quantile)));
    box.y_max = static_cast<int>(std::ceil(sorted_quantile(ys, 1.0 - trim_quantile))) + 1;
    return box;
}

double iou(const BoundingBox& a, const BoundingBox& b) {
    check_box(a);
    check_box(b);
    const long long iw = std::min(a.x_max, b.x_max) - std::max(a.x_min, b.x_min);
    const long long ih = std::min(a.y_max, b.y_max) - std::max(a.y_min, b.y_min);
    if (iw <= 0 || ih <= 0) return 0.0;
    const long long inter = iw * ih;
    const long long uni = a.area() + b.area() - inter;
    return static_cast<double>(inter) / static_cast<double>(uni);
}

double f_measure(double precision, double recall) {
    const double denom = precision + recall;
    return denom > 0 ? 2.0 * precision * recall / denom : 0.0;
}

MatchResult match_boxes(const DetectionSet& detections, std::span<const BoundingBox> truth,
                        double threshold) {
    if (!(threshold > 0) || threshold > 1)
        throw std::invalid_argument("threshold must be in (0, 1]");

    struct Candidate {
        double iou;
        int det;
        int gt;
    };
    std::vector<Candidate> candidates;
    for (std::size_t d = 0; d < detections.boxes.size(); ++d) {
        for (std::size_t g = 0; g < truth.size(); ++g) {
            const double v = iou(detections.boxes[d].box, truth[g]);
            if (v >= threshold)
                candidates.push_back({v, static_cast<int>(d), static_cast<int>(g)});
        }
    }
    std::sort(candidates.begin(), candidates.end(), [](const Candidate& a, const Candidate& b) {
        if (a.iou != b.iou) return a.iou > b.iou;
        if (a.det != b.det) return a.det < b.det;
        return a.gt < b.gt;
    });

    MatchResult result;
    std::vector<bool> det_used(detections.boxes.size(), false);
    std::vector<bool> gt_used(truth.size(), false);
    for (const Candidate& c : candidates) {
        if (det_used[static_cast<std::size_t>(c.det)] || gt_used[static_cast<std::size_t>(c.gt)])
            continue;
        det_used[static_cast<std::size_t>(c.det)] = true;
        gt_used[static_cast<std::size_t>(c.gt)] = true;
        result.pairs.push_back({c.det, c.gt, c.iou});
    }
    result.tp = result.pairs.size();
    result.fp = detections.boxes.size() - result.tp;
    result.fn = truth.size() - result.tp;
    return result;
}

MetricsReport compute_metrics(std::vector<MatchResult> results) {
    MetricsReport report;
    for (const MatchResult& r : results) {
        report.tp += r.tp;
        report.fp += r.fp;
        report.fn += r.fn;
    }
    report.empty_evaluation = report.tp == 0 && report.fp == 0 && report.fn == 0;
    report.precision = report.tp + report.fp > 0
                           ? static_cast<double>(report.tp) / static_cast<double>(report.tp + report.fp)
                           : 0.0;
    report.recall = report.tp + report.fn > 0
                        ? static_cast<double>(report.tp) / static_cast<double>(report.tp + report.fn)
                        : 0.0;
    report.f_measure = f_measure(report.precision, report.recall);
    report.per_window = std::move(results);
    return report;
}

namespace {

BoundingBox box_from_json(const nlohmann::json& j) {
    if (!j.is_array() || j.size() != 4) throw std::runtime_error("box must be [x_min,y_min,x_max,y_max]");
    BoundingBox box{j[0].get<int>(), j[1].get<int>(), j[2].get<int>(), j[3].get<int>()};
    check_box(box);
    return box;
}

nlohmann::ordered_json box_to_json(const BoundingBox& b) {
    return nlohmann::ordered_json::array({b.x_min, b.y_min, b.x_max, b.y_max});
}

}  // namespace

GroundTruth load_ground_truth(std::istream& in) {
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw std::runtime_error(std::string("invalid ground-truth JSON: ") + e.what());
    }
    GroundTruth truth;
    if (!j.contains("windows")) throw std::runtime_error("ground truth missing \"windows\"");
    for (const auto& w : j["windows"]) {
        const int index = w.at("index").get<int>();
        auto& boxes = truth.windows[index];
        for (const auto& b : w.at("boxes")) boxes.push_back(box_from_json(b));
    }
    return truth;
}

GroundTruth load_ground_truth_file(const std::string& path) {
    auto in = open_or_throw(path);
    return load_ground_truth(in);
}

std::string ground_truth_to_json(const GroundTruth& truth) {
    nlohmann::ordered_json j;
    j["format_version"] = 1;
    auto windows = nlohmann::ordered_json::array();
    for (const auto& [index, boxes] : truth.windows) {
        nlohmann::ordered_json w;
        w["index"] = index;
        auto arr = nlohmann::ordered_json::array();
        for (const BoundingBox& b : boxes) arr.push_back(box_to_json(b));
        w["boxes"] = std::move(arr);
        windows.push_back(std::move(w));
    }
    j["windows"] = std::move(windows);
    return j.dump(2) + "\n";
}

std::map<int, DetectionSet> load_detections(std::istream& in) {
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw std::runtime_error(std::string("invalid detections JSON: ") + e.what());
    }
    std::map<int, DetectionSet> out;
    if (!j.contains("windows")) throw std::runtime_error("detections missing \"windows\"");
    for (const auto& w : j["windows"]) {
        DetectionSet set;
        set.window_index = w.at("index").get<int>();
        for (const auto& b : w.at("boxes")) {
            DetectionBox det;
            det.box = box_from_json(b.at("box"));
            det.cluster_id = b.at("cluster").get<int>();
            det.event_count = b.at("events").get<std::size_t>();
            set.boxes.push_back(det);
        }
        out.emplace(set.window_index, std::move(set));
    }
    return out;
}

std::map<int, DetectionSet> load_detections_file(const std::string& path) {
    auto in = open_or_throw(path);
    return load_detections(in);
}

std::string detections_to_json(const std::map<int, DetectionSet>& detections) {
    nlohmann::ordered_json j;
    j["format_version"] = 1;
    auto windows = nlohmann::ordered_json::array();
    for (const auto& [index, set] : detections) {
        nlohmann::ordered_json w;
        w["index"] = index;
        auto arr = nlohmann::ordered_json::array();
        for (const DetectionBox& b : set.boxes) {
            nlohmann::ordered_json det;
            det["box"] = box_to_json(b.box);
            det["cluster"] = b.cluster_id;
            det["events"] = b.event_count;
            arr.push_back(std::move(det));
        }
        w["boxes"] = std::move(arr);
        windows.push_back(std::move(w));
    }
    j["windows"] = std::move(windows);
    return j.dump(2) + "\n";
}

std::string metrics_csv_header() { return "sequence,method,tp,fp,fn,precision,recall,f_measure\n"; }

std::string metrics_csv_row(const std::string& sequence, const std::string& method,
                            const MetricsReport& report) {
    char buf[256];
    std::snprintf(buf, sizeof(buf), "%s,%s,%zu,%zu,%zu,%.4f,%.4f,%.4f\n", sequence.c_str(),
                  method.c_str(), report.tp, report.fp, report.fn, report.precision, report.recall,
                  report.f_measure);
    return buf;
}

}  // namespace evmod
