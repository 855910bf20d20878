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

#include "evmod/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "evmod/parallel.hpp"
#include "evmod/rng.hpp"

namespace evmod {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

inline double dist2(const SpatioTemporalPoint& a, const SpatioTemporalPoint& b) {
    const double dx = a.u - b.u, dy = a.v - b.v, dz = a.w - b.w;
    return dx * dx + dy * dy + dz * dz;
}

constexpr int kUnvisited = -2;
constexpr int kNoise = -1;

}  // namespace

std::vector<int> dbscan(std::span<const SpatioTemporalPoint> points, const DbscanParams& params) {
    if (!(params.eps > 0)) throw std::invalid_argument("eps must be positive");
    if (params.min_pts < 1) throw std::invalid_argument("min_pts must be >= 1");

    const std::size_t n = points.size();
    const double eps2 = params.eps * params.eps;
    const auto neighbours = [&](std::size_t i) {
        std::vector<std::size_t> out;
        for (std::size_t j = 0; j < n; ++j)
            if (dist2(points[i], points[j]) <= eps2) out.push_back(j);  // includes i itself
        return out;
    };

    std::vector<int> labels(n, kUnvisited);
    int cluster = 0;
    for (std::size_t i = 0; i < n; ++i) {
        if (labels[i] != kUnvisited) continue;
        auto seed_neighbours = neighbours(i);
        if (seed_neighbours.size() < static_cast<std::size_t>(params.min_pts)) {
            labels[i] = kNoise;
            continue;
        }
        labels[i] = cluster;
        std::deque<std::size_t> queue(seed_neighbours.begin(), seed_neighbours.end());
        while (!queue.empty()) {
            const std::size_t j = queue.front();
            queue.pop_front();
            if (labels[j] == kNoise) labels[j] = cluster;  // border point
            if (labels[j] != kUnvisited) continue;
            labels[j] = cluster;
            auto expanded = neighbours(j);
            if (expanded.size() >= static_cast<std::size_t>(params.min_pts))
                queue.insert(queue.end(), expanded.begin(), expanded.end());
        }
        ++cluster;
    }
    return labels;
}

MeanShiftResult mean_shift(std::span<const SpatioTemporalPoint> points, const MeanShiftParams& params,
                           int threads) {
    if (!(params.bandwidth > 0)) throw std::invalid_argument("bandwidth must be positive");
    const std::size_t n = points.size();
    if (n == 0) return {};
    const double bw2 = params.bandwidth * params.bandwidth;
    const double merge_tol = params.merge_tol > 0 ? params.merge_tol : params.bandwidth / 2;
    const double stop = 1e-4 * params.bandwidth;

    std::vector<std::array<double, 3>> shifted(n);
    parallel_for(n, threads, [&](std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i) {
            std::array<double, 3> y = {points[i].u, points[i].v, points[i].w};
            for (int iter = 0; iter < params.max_iter; ++iter) {
                double sx = 0, sy = 0, sz = 0;
                std::size_t count = 0;
                for (std::size_t j = 0; j < n; ++j) {
                    const double dx = points[j].u - y[0];
                    const double dy = points[j].v - y[1];
                    const double dz = points[j].w - y[2];
                    if (dx * dx + dy * dy + dz * dz <= bw2) {
                        sx += points[j].u;
                        sy += points[j].v;
                        sz += points[j].w;
                        ++count;
                    }
                }
                const std::array<double, 3> next = {sx / static_cast<double>(count),
                                                    sy / static_cast<double>(count),
                                                    sz / static_cast<double>(count)};
                const double mx = next[0] - y[0], my = next[1] - y[1], mz = next[2] - y[2];
                y = next;
                if (std::sqrt(mx * mx + my * my + mz * mz) <= stop) break;
            }
            shifted[i] = y;
        }
    });

    MeanShiftResult result;
    result.labels.assign(n, 0);
    const double merge2 = merge_tol * merge_tol;
    for (std::size_t i = 0; i < n; ++i) {
        int label = -1;
        for (std::size_t m = 0; m < result.modes.size(); ++m) {
            const double dx = shifted[i][0] - result.modes[m][0];
            const double dy = shifted[i][1] - result.modes[m][1];
            const double dz = shifted[i][2] - result.modes[m][2];
            if (dx * dx + dy * dy + dz * dz <= merge2) {
                label = static_cast<int>(m);
                break;
            }
        }
        if (label < 0) {
            label = static_cast<int>(result.modes.size());
            result.modes.push_back(shifted[i]);
        }
        result.labels[i] = label;
    }
    return result;
}

GmmResult gmm_em(std::span<const SpatioTemporalPoint> points, const GmmParams& params) {
    const std::size_t n = points.size();
    const int f = params.components;
    if (f < 1 || static_cast<std::size_t>(f) > n)
        throw std::invalid_argument("component count must satisfy 1 <= f <= point count");
    if (!(params.reg_covar > 0)) throw std::invalid_argument("reg_covar must be positive");

    const std::size_t fz = static_cast<std::size_t>(f);
    GmmResult result;
    result.means.resize(fz);
    result.variances.resize(fz);
    result.weights.assign(fz, 1.0 / static_cast<double>(f));

    // k-means++ style seeding of the means.
    SplitMix64 rng(params.seed);
    {
        std::vector<double> d2(n, kInf);
        const std::size_t first = static_cast<std::size_t>(rng.bounded(n));
        result.means[0] = {points[first].u, points[first].v, points[first].w};
        for (std::size_t m = 1; m < fz; ++m) {
            for (std::size_t i = 0; i < n; ++i) {
                const double dx = points[i].u - result.means[m - 1][0];
                const double dy = points[i].v - result.means[m - 1][1];
                const double dz = points[i].w - result.means[m - 1][2];
                d2[i] = std::min(d2[i], dx * dx + dy * dy + dz * dz);
            }
            double total = 0;
            for (std::size_t i = 0; i < n; ++i) total += d2[i];
            std::size_t pick = n - 1;
            if (total > 0) {
                const double r = rng.uniform() * total;
                double cum = 0;
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
            result.means[m] = {points[pick].u, points[pick].v, points[pick].w};
        }
    }

    // Global per-axis variance initializes every component.
    {
        std::array<double, 3> mean = {0, 0, 0};
        for (const auto& p : points) {
            mean[0] += p.u;
            mean[1] += p.v;
            mean[2] += p.w;
        }
        for (double& m : mean) m /= static_cast<double>(n);
        std::array<double, 3> var = {0, 0, 0};
        for (const auto& p : points) {
            var[0] += (p.u - mean[0]) * (p.u - mean[0]);
            var[1] += (p.v - mean[1]) * (p.v - mean[1]);
            var[2] += (p.w - mean[2]) * (p.w - mean[2]);
        }
        for (double& v : var) v = std::max(v / static_cast<double>(n), params.reg_covar);
        for (std::size_t c = 0; c < fz; ++c) result.variances[c] = var;
    }

    std::vector<double> resp(n * fz);
    constexpr double kLog2Pi = 1.8378770664093453;

    double prev_ll = -kInf;
    int iter = 0;
    for (; iter < params.max_iter; ++iter) {
        // E step with log-sum-exp.
        double ll = 0;
        for (std::size_t i = 0; i < n; ++i) {
            double max_lp = -kInf;
            for (std::size_t c = 0; c < fz; ++c) {
                double lp = std::log(result.weights[c]);
                const double du = points[i].u - result.means[c][0];
                const double dv = points[i].v - result.means[c][1];
                const double dw = points[i].w - result.means[c][2];
                const std::array<double, 3> d2 = {du * du, dv * dv, dw * dw};
                for (int axis = 0; axis < 3; ++axis) {
                    const double var = result.variances[c][static_cast<std::size_t>(axis)];
                    lp -= 0.5 * (kLog2Pi + std::log(var) + d2[static_cast<std::size_t>(axis)] / var);
                }
                resp[i * fz + c] = lp;
                max_lp = std::max(max_lp, lp);
            }
            double sum = 0;
            for (std::size_t c = 0; c < fz; ++c) sum += std::exp(resp[i * fz + c] - max_lp);
            const double lse = max_lp + std::log(sum);
            ll += lse;
            for (std::size_t c = 0; c < fz; ++c)
                resp[i * fz + c] = std::exp(resp[i * fz + c] - lse);
        }
        result.ll_trace.push_back(ll);
        if (ll - prev_ll < params.tol && iter > 0) {
            ++iter;
            break;
        }
        prev_ll = ll;

        // M step, diagonal covariances floored at reg_covar.
        for (std::size_t c = 0; c < fz; ++c) {
            double nc = 0;
            std::array<double, 3> mean = {0, 0, 0};
            for (std::size_t i = 0; i < n; ++i) {
                const double r = resp[i * fz + c];
                nc += r;
                mean[0] += r * points[i].u;
                mean[1] += r * points[i].v;
                mean[2] += r * points[i].w;
            }
            nc = std::max(nc, 1e-300);
            for (double& m : mean) m /= nc;
            std::array<double, 3> var = {0, 0, 0};
            for (std::size_t i = 0; i < n; ++i) {
                const double r = resp[i * fz + c];
                var[0] += r * (points[i].u - mean[0]) * (points[i].u - mean[0]);
                var[1] += r * (points[i].v - mean[1]) * (points[i].v - mean[1]);
                var[2] += r * (points[i].w - mean[2]) * (points[i].w - mean[2]);
            }
            for (double& v : var) v = std::max(v / nc, params.reg_covar);
            result.means[c] = mean;
            result.variances[c] = var;
            result.weights[c] = nc / static_cast<double>(n);
        }
    }

    result.iterations = iter;
    result.log_likelihood = result.ll_trace.empty() ? -kInf : result.ll_trace.back();
    result.labels.assign(n, 0);
    for (std::size_t i = 0; i < n; ++i) {
        double best = -kInf;
        int arg = 0;
        for (std::size_t c = 0; c < fz; ++c) {
            if (resp[i * fz + c] > best) {
                best = resp[i * fz + c];
                arg = static_cast<int>(c);
            }
        }
        result.labels[i] = arg;
    }
    return result;
}

double median_nn_distance(std::span<const SpatioTemporalPoint> points, int threads) {
    const std::size_t n = points.size();
    if (n < 2) throw std::invalid_argument("need at least 2 points");
    std::vector<double> nearest(n);
    parallel_for(n, threads, [&](std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i) {
            double best = kInf;
            for (std::size_t j = 0; j < n; ++j) {
                if (j == i) continue;
                best = std::min(best, dist2(points[i], points[j]));
            }
            nearest[i] = std::sqrt(best);
        }
    });
    std::nth_element(nearest.begin(), nearest.begin() + static_cast<std::ptrdiff_t>(n / 2),
                     nearest.end());
    return nearest[n / 2];
}

}  // namespace evmod
