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

#include "evmod/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <json.hpp>

#include "evmod/baselines.hpp"
#include "evmod/parallel.hpp"
#include "evmod/rng.hpp"

namespace evmod {

namespace {

std::size_t auto_min_component(int k) {
    return std::max<std::size_t>(3, (static_cast<std::size_t>(k) + 3) / 4);
}

// Drop empty cluster ids so silhouette sees a compact labelling.
int compact_labels(std::vector<int>& labels, int f) {
    std::vector<int> remap(static_cast<std::size_t>(f), -1);
    int next = 0;
    for (const int l : labels)
        if (l >= 0 && remap[static_cast<std::size_t>(l)] < 0) remap[static_cast<std::size_t>(l)] = next++;
    for (int& l : labels)
        if (l >= 0) l = remap[static_cast<std::size_t>(l)];
    return next;
}

struct MethodOutcome {
    std::vector<int> labels;  // aligned with surviving points, -1 = noise
    int cluster_count = 0;
    std::optional<ModelSelection> selection;
};

MethodOutcome run_gmm_sweep(std::span<const SpatioTemporalPoint> points, const RunConfig& config,
                            std::uint64_t window_seed) {
    const std::size_t n = points.size();
    const int f_hi = static_cast<int>(std::min<std::size_t>(static_cast<std::size_t>(config.f_max), n - 1));

    MethodOutcome outcome;
    ModelSelection selection;
    std::vector<std::vector<int>> labelings;
    std::vector<int> fs_eff;
    std::vector<int> fs_requested;
    std::vector<GmmResult> results;
    for (int f = config.f_min; f <= f_hi; ++f) {
        GmmParams params;
        params.components = f;
        params.reg_covar = config.gmm_reg_covar;
        params.seed = derive_seed(window_seed, static_cast<std::uint64_t>(f));
        GmmResult r = gmm_em(points, params);
        std::vector<int> labels = r.labels;
        const int f_eff = compact_labels(labels, f);
        if (f_eff < 2) continue;  // everything collapsed into one component
        labelings.push_back(std::move(labels));
        fs_eff.push_back(f_eff);
        fs_requested.push_back(f);
        results.push_back(std::move(r));
    }
    if (labelings.empty()) return outcome;

    auto records = silhouette_sweep(points, labelings, fs_eff, config.b_variant);
    selection.chosen_f = 0;
    selection.sc = -std::numeric_limits<double>::infinity();
    std::size_t best = 0;
    for (std::size_t i = 0; i < records.size(); ++i) {
        if (records[i].mean_s > selection.sc) {
            selection.sc = records[i].mean_s;
            selection.chosen_f = fs_requested[i];
            best = i;
        }
        selection.evaluated.emplace(fs_requested[i], std::move(records[i]));
    }
    outcome.labels = labelings[best];
    outcome.cluster_count = fs_eff[best];
    outcome.selection = std::move(selection);
    return outcome;
}

}  // namespace

DetectResult run_detect(std::span<const Event> events, std::span<const std::int64_t> frames,
                        const SensorGeometry& geometry, const RunConfig& config) {
    if (config.method != "kmeans" && config.method != "dbscan" && config.method != "meanshift" &&
        config.method != "gmm")
        throw std::invalid_argument("unknown method: " + config.method);
    if (config.sample_size < 1) throw std::invalid_argument("sample size must be >= 1");
    if (config.knn < 1) throw std::invalid_argument("knn must be >= 1");
    if (config.f_min < 2 || config.f_max < config.f_min)
        throw std::invalid_argument("invalid f range");

    PartitionResult partitioned = partition(events, frames, geometry);
    const std::size_t window_count = partitioned.windows.size();

    DetectResult result;
    result.windows.resize(window_count);

    const int workers = resolve_threads(config.threads);
    parallel_tasks(window_count, workers, [&](std::size_t wi) {
        const EventWindow& window = partitioned.windows[wi];
        WindowResult& out = result.windows[wi];
        out.index = window.index;

        const std::uint64_t window_seed =
            derive_seed(config.seed, static_cast<std::uint64_t>(window.index));
        out.sample = uniform_sample(window, config.sample_size, window_seed);
        out.sampled = out.sample.events.size();
        out.detections.window_index = window.index;
        out.sample_labels.assign(out.sample.events.size(), -1);

        const TimeScale scale = config.alpha > 0
                                    ? TimeScale{config.alpha}
                                    : auto_time_scale(window.geometry, window.t_end - window.t_start);
        out.alpha = scale.alpha;

        if (out.sample.events.size() < 2) {
            out.skipped = true;
            out.skip_reason = "fewer than 2 sampled events";
            return;
        }

        auto points = embed(out.sample, scale, window.t_start);

        // Graph + denoise. k is clamped for small windows.
        const int k_eff = std::min<int>(config.knn, static_cast<int>(points.size()) - 1);
        KnnGraph graph = build_knn_graph(points, k_eff);
        if (config.prune_factor > 0)
            graph = prune_long_edges(graph, config.prune_factor, config.prune_quantile);
        const std::size_t min_component = config.min_component > 0
                                              ? static_cast<std::size_t>(config.min_component)
                                              : auto_min_component(k_eff);
        DenoiseResult denoised = denoise(graph, min_component);
        out.denoised_removed = denoised.removed;

        const std::size_t survivors = denoised.points.size();
        if (config.method == "kmeans" || config.method == "gmm") {
            if (survivors < static_cast<std::size_t>(config.f_min) + 1) {
                out.skipped = true;
                out.skip_reason = "fewer surviving points than the cluster range needs";
                return;
            }
        } else if (survivors < 1) {
            out.skipped = true;
            out.skip_reason = "no surviving points after denoising";
            return;
        }

        MethodOutcome outcome;
        if (config.method == "kmeans") {
            ModelSelection selection = select_f(denoised.points, config.f_min, config.f_max,
                                                window_seed, config.restarts, config.b_variant);
            outcome.labels = selection.runs.at(selection.chosen_f).labels;
            outcome.cluster_count = selection.chosen_f;
            outcome.selection = std::move(selection);
        } else if (config.method == "gmm") {
            outcome = run_gmm_sweep(denoised.points, config, window_seed);
            if (outcome.cluster_count == 0) {
                out.skipped = true;
                out.skip_reason = "gmm sweep produced no valid clustering";
                return;
            }
        } else if (config.method == "dbscan") {
            DbscanParams params;
            params.min_pts = config.dbscan_min_pts;
            params.eps = config.dbscan_eps > 0 ? config.dbscan_eps
                                               : 2.0 * median_nn_distance(denoised.points);
            outcome.labels = dbscan(denoised.points, params);
            outcome.cluster_count = compact_labels(outcome.labels, static_cast<int>(survivors)) ;
        } else {  // meanshift
            MeanShiftParams params;
            params.bandwidth = config.meanshift_bandwidth > 0
                                   ? config.meanshift_bandwidth
                                   : 4.0 * median_nn_distance(denoised.points);
            MeanShiftResult ms = mean_shift(denoised.points, params);
            outcome.labels = std::move(ms.labels);
            outcome.cluster_count = static_cast<int>(ms.modes.size());
        }
        out.selection = std::move(outcome.selection);

        std::vector<std::size_t> denoised_indices(survivors);
        for (std::size_t i = 0; i < survivors; ++i)
            denoised_indices[i] = denoised.points[i].source_index;
        for (std::size_t i = 0; i < survivors; ++i)
            out.sample_labels[denoised_indices[i]] = outcome.labels[i];

        const auto groups = clusters_from_labels(out.sample, denoised_indices, outcome.labels,
                                                 std::max(outcome.cluster_count, 1));
        for (std::size_t c = 0; c < groups.size(); ++c) {
            if (groups[c].size() < config.min_events_per_box) continue;
            DetectionBox box;
            box.box = cluster_bbox(groups[c], config.trim_quantile, config.min_events_per_box);
            box.cluster_id = static_cast<int>(c);
            box.event_count = groups[c].size();
            out.detections.boxes.push_back(box);
        }
    });

    for (WindowResult& w : result.windows) result.detections.emplace(w.index, w.detections);

    nlohmann::ordered_json manifest;
    manifest["format_version"] = 1;
    manifest["method"] = config.method;
    manifest["geometry"] = {{"width", geometry.width}, {"height", geometry.height}};
    manifest["sample_size"] = config.sample_size;
    manifest["knn"] = config.knn;
    manifest["alpha"] = config.alpha;  // 0 = auto, per-window value below
    manifest["f_min"] = config.f_min;
    manifest["f_max"] = config.f_max;
    manifest["seed"] = config.seed;
    manifest["restarts"] = config.restarts;
    manifest["min_component"] = config.min_component;
    manifest["prune_factor"] = config.prune_factor;
    manifest["prune_quantile"] = config.prune_quantile;
    manifest["trim_quantile"] = config.trim_quantile;
    manifest["min_events_per_box"] = config.min_events_per_box;
    manifest["b_variant"] = config.b_variant == BVariant::nearest_cluster ? "nearest" : "pooled";
    manifest["dbscan_eps"] = config.dbscan_eps;
    manifest["dbscan_min_pts"] = config.dbscan_min_pts;
    manifest["meanshift_bandwidth"] = config.meanshift_bandwidth;
    manifest["gmm_reg_covar"] = config.gmm_reg_covar;
    manifest["dropped_events"] = partitioned.dropped;
    auto windows_json = nlohmann::ordered_json::array();
    for (const WindowResult& w : result.windows) {
        nlohmann::ordered_json entry;
        entry["index"] = w.index;
        entry["alpha"] = w.alpha;
        entry["sampled"] = w.sampled;
        entry["denoised_removed"] = w.denoised_removed;
        entry["skipped"] = w.skipped;
        if (w.skipped) entry["skip_reason"] = w.skip_reason;
        windows_json.push_back(std::move(entry));
    }
    manifest["windows"] = std::move(windows_json);
    result.manifest_json = manifest.dump(2) + "\n";
    return result;
}

std::string selections_to_json(const DetectResult& result) {
    nlohmann::ordered_json arr = nlohmann::ordered_json::array();
    for (const WindowResult& w : result.windows) {
        if (!w.selection) continue;
        nlohmann::ordered_json entry;
        entry["index"] = w.index;
        entry["selection"] = nlohmann::ordered_json::parse(model_selection_to_json(*w.selection));
        arr.push_back(std::move(entry));
    }
    nlohmann::ordered_json j;
    j["format_version"] = 1;
    j["windows"] = std::move(arr);
    return j.dump(2) + "\n";
}

MetricsReport evaluate_detections(const std::map<int, DetectionSet>& detections,
                                  const GroundTruth& truth, double threshold) {
    std::vector<int> indices;
    for (const auto& [index, _] : detections) indices.push_back(index);
    for (const auto& [index, _] : truth.windows)
        if (!detections.contains(index)) indices.push_back(index);
    std::sort(indices.begin(), indices.end());

    std::vector<MatchResult> results;
    static const std::vector<BoundingBox> no_truth;
    for (const int index : indices) {
        const auto det_it = detections.find(index);
        const auto truth_it = truth.windows.find(index);
        const DetectionSet empty_set{index, {}};
        const DetectionSet& det = det_it != detections.end() ? det_it->second : empty_set;
        const std::vector<BoundingBox>& gt =
            truth_it != truth.windows.end() ? truth_it->second : no_truth;
        results.push_back(match_boxes(det, gt, threshold));
    }
    return compute_metrics(std::move(results));
}

}  // namespace evmod
