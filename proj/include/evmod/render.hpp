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

#include <span>
#include <string>
#include <vector>

#include "evmod/evaluation.hpp"
#include "evmod/events.hpp"

namespace evmod {

/// Binary PPM (P6) raster of one window: events coloured by cluster id from a
/// fixed palette (negative ids grey), detection boxes outlined solid in the
/// cluster colour, truth boxes outlined dashed white.
void render_window(const SensorGeometry& geometry, std::span<const Event> events,
                   std::span<const int> labels, const DetectionSet& detections,
                   std::span<const BoundingBox> truth, const std::string& path);

/// Palette colour for a cluster id (stable across runs).
std::array<unsigned char, 3> cluster_color(int cluster_id);

}  // namespace evmod
