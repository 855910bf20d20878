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

#include "evmod/knn_graph.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>
#include <stdexcept>

#include "evmod/parallel.hpp"

namespace evmod {

TimeScale auto_time_scale(const SensorGeometry& geometry, std::int64_t window_duration_us) {
    if (window_duration_us <= 0) throw std::invalid_argument("window duration must be positive");
    return TimeScale{geometry.width * kAutoTimeSpanFraction / static_cast<double>(window_duration_us)};
}

std::vector<SpatioTemporalPoint> embed(const SampleSet& sample, TimeScale scale, std::int64_t t_start) {
    if (sample.events.empty()) throw std::invalid_argument("cannot embed an empty sample");
    if (!(scale.alpha > 0)) throw std::invalid_argument("time scale alpha must be positive");
    std::vector<SpatioTemporalPoint> points;
    points.reserve(sample.events.size());
    for (std::size_t i = 0; i < sample.events.size(); ++i) {
        const Event& ev = sample.events[i];
        points.push_back({static_cast<double>(ev.x), static_cast<double>(ev.y),
                          scale.alpha * static_cast<double>(ev.t - t_start), i});
    }
    return points;
}

namespace {

struct Neighbour {
    double d2;
    std::uint32_t index;
};

// Max-heap order over (d2, index): the root is the worst of the kept k.
inline bool worse(const Neighbour& a, const Neighbour& b) {
    return a.d2 < b.d2 || (a.d2 == b.d2 && a.index < b.index);
}

}  // namespace

KnnGraph build_knn_graph(std::span<const SpatioTemporalPoint> points, int k, int threads) {
    const std::size_t n = points.size();
    if (n < 2) throw std::invalid_argument("need at least 2 points for a kNN graph");
    if (k < 1 || static_cast<std::size_t>(k) >= n)
        throw std::invalid_argument("k must satisfy 1 <= k < point count");

    for (const auto& p : points)
        if (!std::isfinite(p.u) || !std::isfinite(p.v) || !std::isfinite(p.w))
            throw std::invalid_argument("non-finite point coordinates");

    std::vector<double> xs(n), ys(n), zs(n);
    for (std::size_t i = 0; i < n; ++i) {
        xs[i] = points[i].u;
        ys[i] = points[i].v;
        zs[i] = points[i].w;
    }

    const std::size_t kk = static_cast<std::size_t>(k);
    std::vector<std::uint32_t> neighbours(n * kk);

    parallel_for(n, threads, [&](std::size_t begin, std::size_t end) {
        std::vector<Neighbour> heap;
        heap.reserve(kk + 1);
        for (std::size_t i = begin; i < end; ++i) {
            heap.clear();
            const double xi = xs[i], yi = ys[i], zi = zs[i];
            double worst = std::numeric_limits<double>::infinity();
            for (std::size_t j = 0; j < n; ++j) {
                if (j == i) continue;
                const double dx = xs[j] - xi, dy = ys[j] - yi, dz = zs[j] - zi;
                const double d2 = dx * dx + dy * dy + dz * dz;
                if (heap.size() < kk) {
                    heap.push_back({d2, static_cast<std::uint32_t>(j)});
                    std::push_heap(heap.begin(), heap.end(), worse);
                    worst = heap.front().d2;
                } else if (d2 < worst ||
                           (d2 == worst && static_cast<std::uint32_t>(j) < heap.front().index)) {
                    std::pop_heap(heap.begin(), heap.end(), worse);
                    heap.back() = {d2, static_cast<std::uint32_t>(j)};
                    std::push_heap(heap.begin(), heap.end(), worse);
                    worst = heap.front().d2;
                }
            }
            for (std::size_t m = 0; m < kk; ++m) neighbours[i * kk + m] = heap[m].index;
        }
    });

    KnnGraph graph;
    graph.nodes.assign(points.begin(), points.end());
    graph.k = k;
    graph.edges.reserve(n * kk);
    for (std::uint32_t i = 0; i < n; ++i) {
        for (std::size_t m = 0; m < kk; ++m) {
            const std::uint32_t j = neighbours[i * kk + m];
            graph.edges.emplace_back(std::min(i, j), std::max(i, j));
        }
    }
    std::sort(graph.edges.begin(), graph.edges.end());
    graph.edges.erase(std::unique(graph.edges.begin(), graph.edges.end()), graph.edges.end());
    return graph;
}

namespace {

double edge_length(const KnnGraph& g, std::size_t e) {
    const auto& [i, j] = g.edges[e];
    const double dx = g.nodes[i].u - g.nodes[j].u;
    const double dy = g.nodes[i].v - g.nodes[j].v;
    const double dz = g.nodes[i].w - g.nodes[j].w;
    return std::sqrt(dx * dx + dy * dy + dz * dz);
}

}  // namespace

KnnGraph prune_long_edges(const KnnGraph& graph, double factor, double quantile) {
    if (!(factor > 0)) throw std::invalid_argument("prune factor must be positive");
    if (quantile < 0 || quantile > 1) throw std::invalid_argument("quantile must be in [0, 1]");
    KnnGraph out;
    out.nodes = graph.nodes;
    out.k = graph.k;
    if (graph.edges.empty()) return out;

    std::vector<double> lengths(graph.edges.size());
    for (std::size_t e = 0; e < graph.edges.size(); ++e) lengths[e] = edge_length(graph, e);

    std::vector<double> sorted = lengths;
    std::sort(sorted.begin(), sorted.end());
    const std::size_t pos = std::min(sorted.size() - 1,
                                     static_cast<std::size_t>(quantile * static_cast<double>(sorted.size())));
    const double cutoff = factor * sorted[pos];

    out.edges.reserve(graph.edges.size());
    for (std::size_t e = 0; e < graph.edges.size(); ++e)
        if (lengths[e] <= cutoff) out.edges.push_back(graph.edges[e]);
    return out;
}

DenoiseResult denoise(const KnnGraph& graph, std::size_t min_component_size) {
    if (min_component_size < 1) throw std::invalid_argument("min component size must be >= 1");
    const std::size_t n = graph.nodes.size();

    std::vector<std::uint32_t> parent(n);
    std::iota(parent.begin(), parent.end(), 0u);
    const auto find = [&](std::uint32_t a) {
        while (parent[a] != a) {
            parent[a] = parent[parent[a]];
            a = parent[a];
        }
        return a;
    };
    for (const auto& [i, j] : graph.edges) {
        const std::uint32_t ri = find(i), rj = find(j);
        if (ri != rj) parent[ri] = rj;
    }

    std::vector<std::size_t> component_size(n, 0);
    for (std::uint32_t i = 0; i < n; ++i) ++component_size[find(i)];

    DenoiseResult result;
    result.points.reserve(n);
    for (std::uint32_t i = 0; i < n; ++i) {
        if (component_size[find(i)] >= min_component_size)
            result.points.push_back(graph.nodes[i]);
        else
            ++result.removed;
    }
    return result;
}

void dump_graph(const KnnGraph& graph, std::ostream& edges_out, std::ostream& nodes_out) {
    for (const auto& [i, j] : graph.edges) edges_out << i << ' ' << j << '\n';
    nodes_out << "u,v,w,source_index\n";
    char buf[128];
    for (const auto& p : graph.nodes) {
        std::snprintf(buf, sizeof(buf), "%.17g,%.17g,%.17g,%zu\n", p.u, p.v, p.w, p.source_index);
        nodes_out << buf;
    }
}

}  // namespace evmod
