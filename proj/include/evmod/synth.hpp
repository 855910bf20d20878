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
#include <string>
#include <vector>

#include "evmod/evaluation.hpp"
#include "evmod/events.hpp"

namespace evmod {

enum class ObjectShape { rectangle, disk };

struct MovingObject {
    ObjectShape shape = ObjectShape::rectangle;
    double size = 0;  // side length / diameter in pixels
    double x = 0;     // centre at t = 0
    double y = 0;
    double vx = 0;    // pixels per second
    double vy = 0;
};

struct SceneSpec {
    SensorGeometry geometry{346, 260};
    std::int64_t duration_us = 1'000'000;
    std::int64_t frame_period_us = 33'333;
    std::vector<MovingObject> objects;
    double noise_rate = 0;  // uniform background events per second
    double events_per_edge_pixel_per_frame = 4.0;
    std::uint64_t seed = 7;
};

struct SceneOutput {
    std::vector<Event> events;  // canonical order
    std::vector<std::int64_t> frame_timestamps;
    GroundTruth truth;  // per window: the exact raster extent swept by each object
    std::size_t object_events = 0;
    std::size_t noise_events = 0;
};

/// Throws std::invalid_argument if an object leaves the sensor during the
/// scene, a rate is negative, or the scene is empty (no objects, no noise).
void validate_scene(const SceneSpec& spec);

/// Emit events at the moving boundary pixels of each object (+1 on the leading
/// edge, -1 trailing), uniformly jittered within each micro-step, plus uniform
/// background noise. Fully deterministic under the spec seed.
SceneOutput generate(const SceneSpec& spec);

/// Named scenarios: clean-2, clean-4, noisy, size-disparity.
SceneSpec preset(const std::string& name);
std::vector<std::string> preset_names();

SceneSpec scene_from_json(const std::string& text);
std::string scene_to_json(const SceneSpec& spec);

}  // namespace evmod
