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
#include <span>
#include <vector>

#include "evmod/knn_graph.hpp"

namespace evmod {

struct DbscanParams {
    double eps = 0;    // scaled-unit neighbourhood radius, > 0
    int min_pts = 5;   // neighbourhood size (including the point) for a core point
};

struct MeanShiftParams {
    double bandwidth = 0;   // flat-kernel radius, > 0
    int max_iter = 200;
    double merge_tol = 0;   // modes closer than this merge; <= 0 means bandwidth / 2
};

struct GmmParams {
    int components = 1;
    int max_iter = 200;
    double tol = 1e-6;       // stop when the log-likelihood gain drops below this
    double reg_covar = 1e-6; // per-axis variance floor
    std::uint64_t seed = 0;
};

struct MeanShiftResult {
    std::vector<int> labels;
    std::vector<std::array<double, 3>> modes;  // one per cluster, lowest-seed representative
};

struct GmmResult {
    std::vector<int> labels;                     // argmax responsibility, ties to lower id
    std::vector<std::array<double, 3>> means;
    std::vector<std::array<double, 3>> variances;  // diagonal covariances
    std::vector<double> weights;
    double log_likelihood = 0;
    std::vector<double> ll_trace;                // per EM iteration
    int iterations = 0;
};

/// Standard core/border/noise DBSCAN; noise labelled -1, cluster ids in
/// discovery order over ascending point index.
std::vector<int> dbscan(std::span<const SpatioTemporalPoint> points, const DbscanParams& params);

/// Flat-kernel mean shift seeded from every point; modes within merge_tol are
/// merged, lowest seed index wins.
MeanShiftResult mean_shift(std::span<const SpatioTemporalPoint> points, const MeanShiftParams& params,
                           int threads = 1);

/// EM for a diagonal-covariance Gaussian mixture, k-means++ initialization
/// from the seed. Log-likelihood is non-decreasing over iterations.
GmmResult gmm_em(std::span<const SpatioTemporalPoint> points, const GmmParams& params);

/// Median over points of the distance to their nearest neighbour. Anchors the
/// default eps (2x) and bandwidth (4x). Requires |points| >= 2.
double median_nn_distance(std::span<const SpatioTemporalPoint> points, int threads = 1);

}  // namespace evmod
