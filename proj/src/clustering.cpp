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

#include "evmod/clustering.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include <json.hpp>

#include "evmod/parallel.hpp"
#include "evmod/rng.hpp"

namespace evmod {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct Soa {
    std::vector<double> x, y, z;
    std::size_t size() const { return x.size(); }
};

Soa to_soa(std::span<const SpatioTemporalPoint> points) {
    Soa s;
    s.x.reserve(points.size());
    s.y.reserve(points.size());
    s.z.reserve(points.size());
    for (const auto& p : points) {
        if (!std::isfinite(p.u) || !std::isfinite(p.v) || !std::isfinite(p.w))
            throw std::invalid_argument("non-finite point coordinates");
        s.x.push_back(p.u);
        s.y.push_back(p.v);
        s.z.push_back(p.w);
    }
    return s;
}

inline double dist2(const Soa& pts, std::size_t i, const std::array<double, 3>& c) {
    const double dx = pts.x[i] - c[0], dy = pts.y[i] - c[1], dz = pts.z[i] - c[2];
    return dx * dx + dy * dy + dz * dz;
}

// Seeded k-means++: first centre uniform, then proportional to the squared
// distance to the nearest chosen centre.
std::vector<std::array<double, 3>> kmeanspp_init(const Soa& pts, int f, SplitMix64& rng) {
    const std::size_t n = pts.size();
    std::vector<std::array<double, 3>> centroids;
    centroids.reserve(static_cast<std::size_t>(f));
    const std::size_t first = static_cast<std::size_t>(rng.bounded(n));
    centroids.push_back({pts.x[first], pts.y[first], pts.z[first]});

    std::vector<double> d2(n);
    for (std::size_t i = 0; i < n; ++i) d2[i] = dist2(pts, i, centroids[0]);

    for (int m = 1; m < f; ++m) {
        double total = 0;
        for (std::size_t i = 0; i < n; ++i) total += d2[i];
        std::size_t pick;
        if (total > 0) {
            const double r = rng.uniform() * total;
            double cum = 0;
            pick = n - 1;
            for (std::size_t i = 0; i < n; ++i) {
                cum += d2[i];
                if (cum > r) {
                    pick = i;
                    break;
                }
            }
        } else {
            pick = static_cast<std::size_t>(rng.bounded(n));
        }
        centroids.push_back({pts.x[pick], pts.y[pick], pts.z[pick]});
        for (std::size_t i = 0; i < n; ++i) d2[i] = std::min(d2[i], dist2(pts, i, centroids.back()));
    }
    return centroids;
}

struct LloydState {
    std::vector<std::array<double, 3>> centroids;
    std::vector<int> labels;
    std::vector<double> upper;  // upper bound on distance to the assigned centroid
    std::vector<double> lower;  // lower bound on distance to every other centroid
};

// Full assignment: exact argmin per point, ties to the lower centroid id.
// Returns bounds for the Hamerly pruning of later iterations.
void assign_full(const Soa& pts, LloydState& s) {
    const std::size_t n = pts.size();
    const int f = static_cast<int>(s.centroids.size());
    for (std::size_t i = 0; i < n; ++i) {
        double best = kInf, second = kInf;
        int arg = 0;
        for (int c = 0; c < f; ++c) {
            const double d = dist2(pts, i, s.centroids[static_cast<std::size_t>(c)]);
            if (d < best) {
                second = best;
                best = d;
                arg = c;
            } else if (d < second) {
                second = d;
            }
        }
        s.labels[i] = arg;
        s.upper[i] = std::sqrt(best);
        s.lower[i] = std::sqrt(second);
    }
}

double exact_inertia(const Soa& pts, const LloydState& s) {
    double total = 0;
    for (std::size_t i = 0; i < pts.size(); ++i)
        total += dist2(pts, i, s.centroids[static_cast<std::size_t>(s.labels[i])]);
    return total;
}

// Reseed every empty cluster at the point currently farthest from its assigned
// centroid; ties to the lowest point index, points are used at most once.
// Returns true when any repair happened (bounds must then be rebuilt).
bool repair_empty(const Soa& pts, LloydState& s) {
    const std::size_t n = pts.size();
    const int f = static_cast<int>(s.centroids.size());
    std::vector<std::size_t> counts(static_cast<std::size_t>(f), 0);
    for (std::size_t i = 0; i < n; ++i) ++counts[static_cast<std::size_t>(s.labels[i])];

    bool repaired = false;
    std::vector<bool> used(n, false);
    for (int c = 0; c < f; ++c) {
        if (counts[static_cast<std::size_t>(c)] > 0) continue;
        double far_d = -1;
        std::size_t far_i = 0;
        for (std::size_t i = 0; i < n; ++i) {
            if (used[i] || counts[static_cast<std::size_t>(s.labels[i])] <= 1) continue;
            const double d = dist2(pts, i, s.centroids[static_cast<std::size_t>(s.labels[i])]);
            if (d > far_d) {
                far_d = d;
                far_i = i;
            }
        }
        if (far_d < 0) continue;  // fewer distinct points than clusters
        used[far_i] = true;
        --counts[static_cast<std::size_t>(s.labels[far_i])];
        s.centroids[static_cast<std::size_t>(c)] = {pts.x[far_i], pts.y[far_i], pts.z[far_i]};
        s.labels[far_i] = c;
        ++counts[static_cast<std::size_t>(c)];
        repaired = true;
    }
    return repaired;
}

}  // namespace

Clustering kmeans(std::span<const SpatioTemporalPoint> points, int f, std::uint64_t seed,
                  const KMeansOptions& options) {
    const std::size_t n = points.size();
    if (f < 2 || static_cast<std::size_t>(f) > n)
        throw std::invalid_argument("f must satisfy 2 <= f <= point count");
    if (options.max_iter < 1) throw std::invalid_argument("max_iter must be >= 1");

    const Soa pts = to_soa(points);
    SplitMix64 rng(seed);

    LloydState s;
    s.centroids = kmeanspp_init(pts, f, rng);
    s.labels.assign(n, 0);
    s.upper.assign(n, 0);
    s.lower.assign(n, 0);

    Clustering out;
    out.f = f;
    out.seed = seed;

    const std::size_t fz = static_cast<std::size_t>(f);
    std::vector<std::array<double, 3>> sums(fz);
    std::vector<std::size_t> counts(fz);
    std::vector<double> delta(fz);      // centroid movement in the last update
    std::vector<double> half_gap(fz);   // half the distance to the nearest other centroid
    bool bounds_valid = false;

    int iter = 0;
    for (; iter < options.max_iter; ++iter) {
        if (!bounds_valid) {
            assign_full(pts, s);
            bounds_valid = true;
        } else {
            // Hamerly pruning: a point whose upper bound stays below both the
            // half-gap of its centroid and its lower bound cannot change label.
            for (std::size_t i = 0; i < n; ++i) {
                const std::size_t a = static_cast<std::size_t>(s.labels[i]);
                const double m = std::max(half_gap[a], s.lower[i]);
                if (s.upper[i] <= m) continue;
                const double d = std::sqrt(dist2(pts, i, s.centroids[a]));
                s.upper[i] = d;
                if (d <= m) continue;
                double best = kInf, second = kInf;
                int arg = 0;
                for (int c = 0; c < f; ++c) {
                    const double dd = dist2(pts, i, s.centroids[static_cast<std::size_t>(c)]);
                    if (dd < best) {
                        second = best;
                        best = dd;
                        arg = c;
                    } else if (dd < second) {
                        second = dd;
                    }
                }
                s.labels[i] = arg;
                s.upper[i] = std::sqrt(best);
                s.lower[i] = std::sqrt(second);
            }
        }

        if (repair_empty(pts, s)) bounds_valid = false;
        if (options.record_trace) out.inertia_trace.push_back(exact_inertia(pts, s));

        // Update step: exact means, accumulated in index order.
        for (std::size_t c = 0; c < fz; ++c) {
            sums[c] = {0, 0, 0};
            counts[c] = 0;
        }
        for (std::size_t i = 0; i < n; ++i) {
            const std::size_t c = static_cast<std::size_t>(s.labels[i]);
            sums[c][0] += pts.x[i];
            sums[c][1] += pts.y[i];
            sums[c][2] += pts.z[i];
            ++counts[c];
        }
        double max_move = 0;
        for (std::size_t c = 0; c < fz; ++c) {
            if (counts[c] == 0) {  // only when there are fewer distinct points than clusters
                delta[c] = 0;
                continue;
            }
            const std::array<double, 3> next = {sums[c][0] / static_cast<double>(counts[c]),
                                                sums[c][1] / static_cast<double>(counts[c]),
                                                sums[c][2] / static_cast<double>(counts[c])};
            const double dx = next[0] - s.centroids[c][0];
            const double dy = next[1] - s.centroids[c][1];
            const double dz = next[2] - s.centroids[c][2];
            delta[c] = std::sqrt(dx * dx + dy * dy + dz * dz);
            max_move = std::max(max_move, delta[c]);
            s.centroids[c] = next;
        }

        if (bounds_valid) {
            double max_delta = 0;
            for (std::size_t c = 0; c < fz; ++c) max_delta = std::max(max_delta, delta[c]);
            for (std::size_t i = 0; i < n; ++i) {
                s.upper[i] += delta[static_cast<std::size_t>(s.labels[i])];
                s.lower[i] -= max_delta;
            }
            for (std::size_t c = 0; c < fz; ++c) {
                double nearest = kInf;
                for (std::size_t o = 0; o < fz; ++o) {
                    if (o == c) continue;
                    const double dx = s.centroids[c][0] - s.centroids[o][0];
                    const double dy = s.centroids[c][1] - s.centroids[o][1];
                    const double dz = s.centroids[c][2] - s.centroids[o][2];
                    nearest = std::min(nearest, dx * dx + dy * dy + dz * dz);
                }
                half_gap[c] = 0.5 * std::sqrt(nearest);
            }
        }

        if (max_move < options.tol) {
            ++iter;
            break;
        }
    }
    out.iterations = iter;

    // Final exact assignment against the converged centroids, so labels obey
    // the argmin/tie-to-lower-id rule. Kept only if it leaves no cluster empty
    // (a forced duplicate-point repair may otherwise be undone by the tie rule).
    std::vector<int> final_labels(n);
    std::vector<std::size_t> final_counts(fz, 0);
    for (std::size_t i = 0; i < n; ++i) {
        double best = kInf;
        int arg = 0;
        for (int c = 0; c < f; ++c) {
            const double d = dist2(pts, i, s.centroids[static_cast<std::size_t>(c)]);
            if (d < best) {
                best = d;
                arg = c;
            }
        }
        final_labels[i] = arg;
        ++final_counts[static_cast<std::size_t>(arg)];
    }
    if (std::find(final_counts.begin(), final_counts.end(), std::size_t{0}) == final_counts.end())
        s.labels = std::move(final_labels);

    out.labels = s.labels;
    out.centroids = s.centroids;
    out.inertia = exact_inertia(pts, s);
    if (options.record_trace) out.inertia_trace.push_back(out.inertia);
    return out;
}

namespace {

void check_labels(std::size_t n, std::span<const int> labels, int f) {
    if (f < 2) throw std::invalid_argument("silhouette requires f >= 2");
    if (labels.size() != n) throw std::invalid_argument("labels do not align with points");
    std::vector<std::size_t> counts(static_cast<std::size_t>(f), 0);
    for (const int l : labels) {
        if (l < 0 || l >= f) throw std::invalid_argument("label out of range");
        ++counts[static_cast<std::size_t>(l)];
    }
    for (const std::size_t c : counts)
        if (c == 0) throw std::invalid_argument("silhouette requires every cluster non-empty");
}

}  // namespace

std::vector<SilhouetteRecord> silhouette_sweep(std::span<const SpatioTemporalPoint> points,
                                               std::span<const std::vector<int>> labelings,
                                               std::span<const int> fs, BVariant variant,
                                               int threads) {
    const std::size_t n = points.size();
    if (labelings.size() != fs.size()) throw std::invalid_argument("labelings/fs size mismatch");
    const std::size_t L = labelings.size();
    for (std::size_t l = 0; l < L; ++l) check_labels(n, labelings[l], fs[l]);

    const Soa pts = to_soa(points);

    std::vector<std::vector<std::size_t>> cluster_sizes(L);
    for (std::size_t l = 0; l < L; ++l) {
        cluster_sizes[l].assign(static_cast<std::size_t>(fs[l]), 0);
        for (const int lab : labelings[l]) ++cluster_sizes[l][static_cast<std::size_t>(lab)];
    }

    std::vector<SilhouetteRecord> records(L);
    for (std::size_t l = 0; l < L; ++l) {
        records[l].f = fs[l];
        records[l].per_point_s.assign(n, 0.0);
    }

    // One pass over the distance matrix serves every labeling: distances are
    // computed once per (i, j) row element and scattered into per-cluster sums.
    parallel_for(n, threads, [&](std::size_t begin, std::size_t end) {
        std::vector<double> row(n);
        std::size_t max_f = 0;
        for (std::size_t l = 0; l < L; ++l)
            max_f = std::max(max_f, static_cast<std::size_t>(fs[l]));
        std::vector<double> sums(max_f);

        for (std::size_t i = begin; i < end; ++i) {
            const double xi = pts.x[i], yi = pts.y[i], zi = pts.z[i];
            for (std::size_t j = 0; j < n; ++j) {
                const double dx = pts.x[j] - xi, dy = pts.y[j] - yi, dz = pts.z[j] - zi;
                row[j] = std::sqrt(dx * dx + dy * dy + dz * dz);
            }
            for (std::size_t l = 0; l < L; ++l) {
                const std::size_t f = static_cast<std::size_t>(fs[l]);
                const std::vector<int>& labels = labelings[l];
                std::fill(sums.begin(), sums.begin() + f, 0.0);
                for (std::size_t j = 0; j < n; ++j)
                    sums[static_cast<std::size_t>(labels[j])] += row[j];

                const std::size_t own = static_cast<std::size_t>(labels[i]);
                const std::size_t own_size = cluster_sizes[l][own];
                if (own_size <= 1) continue;  // singleton: s = 0 by convention

                const double a = sums[own] / static_cast<double>(own_size - 1);
                double b;
                if (variant == BVariant::nearest_cluster) {
                    b = kInf;
                    for (std::size_t c = 0; c < f; ++c) {
                        if (c == own) continue;
                        b = std::min(b, sums[c] / static_cast<double>(cluster_sizes[l][c]));
                    }
                } else {
                    double foreign = 0;
                    for (std::size_t c = 0; c < f; ++c)
                        if (c != own) foreign += sums[c];
                    b = foreign / static_cast<double>(n - own_size);
                }
                const double denom = std::max(a, b);
                records[l].per_point_s[i] = denom > 0 ? (b - a) / denom : 0.0;
            }
        }
    });

    for (std::size_t l = 0; l < L; ++l) {
        double total = 0;
        for (const double s : records[l].per_point_s) total += s;
        records[l].mean_s = total / static_cast<double>(n);
    }
    return records;
}

SilhouetteRecord silhouette(std::span<const SpatioTemporalPoint> points, std::span<const int> labels,
                            int f, BVariant variant, int threads) {
    std::vector<std::vector<int>> one{std::vector<int>(labels.begin(), labels.end())};
    const int fs[1] = {f};
    return std::move(silhouette_sweep(points, one, fs, variant, threads)[0]);
}

ModelSelection select_f(std::span<const SpatioTemporalPoint> points, int f_min, int f_max,
                        std::uint64_t seed, int restarts, BVariant variant,
                        const KMeansOptions& options, int threads) {
    const std::size_t n = points.size();
    if (f_min < 2) throw std::invalid_argument("f_min must be >= 2");
    if (restarts < 1) throw std::invalid_argument("restarts must be >= 1");
    // f = n would make every point a singleton; cap the sweep below it.
    const int f_hi = static_cast<int>(std::min<std::size_t>(static_cast<std::size_t>(f_max),
                                                            n > 0 ? n - 1 : 0));
    if (f_max < f_min || f_hi < f_min)
        throw std::invalid_argument("cluster range invalid for point count");

    const int num_f = f_hi - f_min + 1;
    std::vector<Clustering> grid(static_cast<std::size_t>(num_f) * static_cast<std::size_t>(restarts));
    parallel_tasks(grid.size(), threads, [&](std::size_t idx) {
        const int fi = static_cast<int>(idx / static_cast<std::size_t>(restarts));
        const int r = static_cast<int>(idx % static_cast<std::size_t>(restarts));
        const int f = f_min + fi;
        const std::uint64_t run_seed = derive_seed(derive_seed(seed, static_cast<std::uint64_t>(f)),
                                                   static_cast<std::uint64_t>(r));
        grid[idx] = kmeans(points, f, run_seed, options);
    });

    ModelSelection selection;
    std::vector<std::vector<int>> labelings;
    std::vector<int> fs;
    for (int fi = 0; fi < num_f; ++fi) {
        const Clustering* best = nullptr;
        for (int r = 0; r < restarts; ++r) {
            const Clustering& run =
                grid[static_cast<std::size_t>(fi) * static_cast<std::size_t>(restarts) +
                     static_cast<std::size_t>(r)];
            if (best == nullptr || run.inertia < best->inertia) best = &run;
        }
        const int f = f_min + fi;
        selection.runs.emplace(f, *best);
        labelings.push_back(best->labels);
        fs.push_back(f);
    }

    auto records = silhouette_sweep(points, labelings, fs, variant, threads);
    selection.chosen_f = 0;
    selection.sc = -kInf;
    for (std::size_t l = 0; l < records.size(); ++l) {
        if (records[l].mean_s > selection.sc) {
            selection.sc = records[l].mean_s;
            selection.chosen_f = fs[l];
        }
        selection.evaluated.emplace(fs[l], std::move(records[l]));
    }
    return selection;
}

std::string model_selection_to_json(const ModelSelection& selection) {
    nlohmann::ordered_json j;
    nlohmann::ordered_json evaluated = nlohmann::ordered_json::object();
    for (const auto& [f, record] : selection.evaluated)
        evaluated[std::to_string(f)] = record.mean_s;
    j["evaluated"] = std::move(evaluated);
    j["chosen_f"] = selection.chosen_f;
    j["SC"] = selection.sc;
    return j.dump();
}

std::vector<std::vector<Event>> clusters_from_labels(const SampleSet& sample,
                                                     std::span<const std::size_t> denoised_indices,
                                                     std::span<const int> labels, int f) {
    if (denoised_indices.size() != labels.size())
        throw std::invalid_argument("labels do not align with denoised indices");
    if (f < 1) throw std::invalid_argument("f must be >= 1");
    std::vector<std::vector<Event>> groups(static_cast<std::size_t>(f));
    for (std::size_t i = 0; i < labels.size(); ++i) {
        const int label = labels[i];
        if (label < 0) continue;  // baseline noise markers
        if (label >= f) throw std::invalid_argument("label out of range");
        const std::size_t src = denoised_indices[i];
        if (src >= sample.events.size()) throw std::invalid_argument("denoised index out of range");
        groups[static_cast<std::size_t>(label)].push_back(sample.events[src]);
    }
    for (auto& g : groups) std::sort(g.begin(), g.end());
    return groups;
}

}  // namespace evmod
