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

#include "evmod/synth.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <json.hpp>

#include "evmod/rng.hpp"

namespace evmod {

namespace {

struct RasterExtent {
    int x_lo, x_hi, y_lo, y_hi;  // inclusive pixel range; empty when x_lo > x_hi
    bool empty() const { return x_lo > x_hi || y_lo > y_hi; }
};

struct BoundaryPixel {
    int x, y;
    double nx, ny;  // outward normal
};

// Pixels whose centre (px + 0.5, py + 0.5) lies inside the shape.
RasterExtent rect_extent(double cx, double cy, double half) {
    return {static_cast<int>(std::ceil(cx - half - 0.5)), static_cast<int>(std::floor(cx + half - 0.5)),
            static_cast<int>(std::ceil(cy - half - 0.5)), static_cast<int>(std::floor(cy + half - 0.5))};
}

bool disk_inside(double cx, double cy, double r, int px, int py) {
    const double dx = px + 0.5 - cx, dy = py + 0.5 - cy;
    return dx * dx + dy * dy <= r * r;
}

RasterExtent object_extent(const MovingObject& o, double t_seconds) {
    const double cx = o.x + o.vx * t_seconds;
    const double cy = o.y + o.vy * t_seconds;
    const double half = o.size / 2;
    if (o.shape == ObjectShape::rectangle) return rect_extent(cx, cy, half);

    const RasterExtent bounds = rect_extent(cx, cy, half);
    RasterExtent e = {bounds.x_hi + 1, bounds.x_lo - 1, bounds.y_hi + 1, bounds.y_lo - 1};
    for (int py = bounds.y_lo; py <= bounds.y_hi; ++py)
        for (int px = bounds.x_lo; px <= bounds.x_hi; ++px)
            if (disk_inside(cx, cy, half, px, py)) {
                e.x_lo = std::min(e.x_lo, px);
                e.x_hi = std::max(e.x_hi, px);
                e.y_lo = std::min(e.y_lo, py);
                e.y_hi = std::max(e.y_hi, py);
            }
    return e;
}

std::vector<BoundaryPixel> boundary_pixels(const MovingObject& o, double t_seconds) {
    const double cx = o.x + o.vx * t_seconds;
    const double cy = o.y + o.vy * t_seconds;
    const double half = o.size / 2;
    std::vector<BoundaryPixel> out;

    if (o.shape == ObjectShape::rectangle) {
        const RasterExtent e = rect_extent(cx, cy, half);
        if (e.empty()) return out;
        for (int py = e.y_lo; py <= e.y_hi; ++py) {
            out.push_back({e.x_lo, py, -1, 0});
            if (e.x_hi != e.x_lo) out.push_back({e.x_hi, py, 1, 0});
        }
        for (int px = e.x_lo; px <= e.x_hi; ++px) {
            out.push_back({px, e.y_lo, 0, -1});
            if (e.y_hi != e.y_lo) out.push_back({px, e.y_hi, 0, 1});
        }
        return out;
    }

    const RasterExtent bounds = rect_extent(cx, cy, half);
    for (int py = bounds.y_lo; py <= bounds.y_hi; ++py) {
        for (int px = bounds.x_lo; px <= bounds.x_hi; ++px) {
            if (!disk_inside(cx, cy, half, px, py)) continue;
            const bool edge = !disk_inside(cx, cy, half, px - 1, py) ||
                              !disk_inside(cx, cy, half, px + 1, py) ||
                              !disk_inside(cx, cy, half, px, py - 1) ||
                              !disk_inside(cx, cy, half, px, py + 1);
            if (!edge) continue;
            const double dx = px + 0.5 - cx, dy = py + 0.5 - cy;
            const double len = std::sqrt(dx * dx + dy * dy);
            if (len <= 0) continue;
            out.push_back({px, py, dx / len, dy / len});
        }
    }
    return out;
}

}  // namespace

void validate_scene(const SceneSpec& spec) {
    if (spec.geometry.width <= 0 || spec.geometry.height <= 0)
        throw std::invalid_argument("sensor geometry must be positive");
    if (spec.duration_us <= 0) throw std::invalid_argument("duration must be positive");
    if (spec.frame_period_us <= 0 || spec.frame_period_us > spec.duration_us)
        throw std::invalid_argument("frame period must be in (0, duration]");
    if (spec.noise_rate < 0) throw std::invalid_argument("noise rate must be non-negative");
    if (spec.events_per_edge_pixel_per_frame < 0)
        throw std::invalid_argument("emission density must be non-negative");
    if (spec.objects.empty() && spec.noise_rate == 0)
        throw std::invalid_argument("empty scene: no objects and no noise");

    const double t_end = static_cast<double>(spec.duration_us) / 1e6;
    for (std::size_t i = 0; i < spec.objects.size(); ++i) {
        const MovingObject& o = spec.objects[i];
        if (o.size < 2) throw std::invalid_argument("object size must be >= 2 pixels");
        for (const double t : {0.0, t_end}) {
            const RasterExtent e = object_extent(o, t);
            if (e.empty() || e.x_lo < 0 || e.y_lo < 0 || e.x_hi >= spec.geometry.width ||
                e.y_hi >= spec.geometry.height)
                throw std::invalid_argument("object " + std::to_string(i) +
                                            " leaves the sensor during the scene");
        }
    }
}

SceneOutput generate(const SceneSpec& spec) {
    validate_scene(spec);

    const std::int64_t frames = spec.duration_us / spec.frame_period_us;
    const std::int64_t t_end = frames * spec.frame_period_us;  // generate on [0, T_M)

    SceneOutput out;
    out.frame_timestamps.reserve(static_cast<std::size_t>(frames));
    for (std::int64_t i = 1; i <= frames; ++i) out.frame_timestamps.push_back(i * spec.frame_period_us);

    double vmax = 0;
    for (const MovingObject& o : spec.objects)
        vmax = std::max(vmax, std::hypot(o.vx, o.vy));
    const double frame_seconds = static_cast<double>(spec.frame_period_us) / 1e6;
    const int steps = std::clamp(static_cast<int>(std::ceil(vmax * frame_seconds / 0.5)), 1, 64);
    const double rate = spec.events_per_edge_pixel_per_frame / static_cast<double>(steps);

    SplitMix64 rng(spec.seed);

    for (std::int64_t frame = 0; frame < frames; ++frame) {
        const std::int64_t frame_start = frame * spec.frame_period_us;
        for (int step = 0; step < steps; ++step) {
            const std::int64_t step_start = frame_start + step * spec.frame_period_us / steps;
            const std::int64_t step_end = frame_start + (step + 1) * spec.frame_period_us / steps;
            const std::int64_t dt = std::max<std::int64_t>(step_end - step_start, 1);
            const double t_seconds = static_cast<double>(step_start) / 1e6;
            for (const MovingObject& o : spec.objects) {
                for (const BoundaryPixel& bp : boundary_pixels(o, t_seconds)) {
                    const double facing = bp.nx * o.vx + bp.ny * o.vy;
                    if (std::abs(facing) < 1e-12) continue;
                    const std::int32_t polarity = facing > 0 ? 1 : -1;
                    double budget = rate;
                    while (budget >= 1.0) {
                        out.events.push_back({step_start + static_cast<std::int64_t>(rng.bounded(
                                                  static_cast<std::uint64_t>(dt))),
                                              bp.x, bp.y, polarity});
                        budget -= 1.0;
                    }
                    if (budget > 0 && rng.uniform() < budget)
                        out.events.push_back({step_start + static_cast<std::int64_t>(rng.bounded(
                                                  static_cast<std::uint64_t>(dt))),
                                              bp.x, bp.y, polarity});
                }
            }
        }
    }
    out.object_events = out.events.size();

    const std::size_t noise_count = static_cast<std::size_t>(
        std::llround(spec.noise_rate * static_cast<double>(t_end) / 1e6));
    for (std::size_t i = 0; i < noise_count; ++i) {
        out.events.push_back({static_cast<std::int64_t>(rng.bounded(static_cast<std::uint64_t>(t_end))),
                              static_cast<std::int32_t>(rng.bounded(
                                  static_cast<std::uint64_t>(spec.geometry.width))),
                              static_cast<std::int32_t>(rng.bounded(
                                  static_cast<std::uint64_t>(spec.geometry.height))),
                              rng.sign()});
    }
    out.noise_events = noise_count;

    std::sort(out.events.begin(), out.events.end());

    // Truth per window: the raster extent swept over [T_{i-1}, T_i]. Linear
    // motion makes the sweep the union of the two endpoint extents.
    for (std::int64_t i = 1; i <= frames; ++i) {
        const double t0 = static_cast<double>((i - 1) * spec.frame_period_us) / 1e6;
        const double t1 = static_cast<double>(i * spec.frame_period_us) / 1e6;
        auto& boxes = out.truth.windows[static_cast<int>(i)];
        for (const MovingObject& o : spec.objects) {
            const RasterExtent a = object_extent(o, t0);
            const RasterExtent b = object_extent(o, t1);
            boxes.push_back({std::min(a.x_lo, b.x_lo), std::min(a.y_lo, b.y_lo),
                             std::max(a.x_hi, b.x_hi) + 1, std::max(a.y_hi, b.y_hi) + 1});
        }
    }
    return out;
}

SceneSpec preset(const std::string& name) {
    SceneSpec spec;
    if (name == "clean-2") {
        spec.objects = {{ObjectShape::rectangle, 34, 80, 80, 60, 25},
                        {ObjectShape::disk, 30, 240, 170, -25, -15}};
    } else if (name == "clean-4") {
        spec.objects = {{ObjectShape::rectangle, 30, 70, 60, 50, 20},
                        {ObjectShape::disk, 32, 270, 60, -40, 25},
                        {ObjectShape::disk, 28, 70, 195, 45, -20},
                        {ObjectShape::rectangle, 34, 270, 195, -35, -22}};
    } else if (name == "noisy") {
        spec.objects = {{ObjectShape::rectangle, 34, 80, 80, 60, 25},
                        {ObjectShape::disk, 30, 240, 170, -25, -15}};
        spec.noise_rate = 40000;
    } else if (name == "size-disparity") {
        spec.objects = {{ObjectShape::rectangle, 90, 100, 130, 25, 8},
                        {ObjectShape::rectangle, 18, 184, 130, 20, -10}};
    } else {
        throw std::invalid_argument("unknown preset: " + name);
    }
    return spec;
}

std::vector<std::string> preset_names() { return {"clean-2", "clean-4", "noisy", "size-disparity"}; }

namespace {

const char* shape_name(ObjectShape s) {
    return s == ObjectShape::rectangle ? "rectangle" : "disk";
}

ObjectShape shape_from_name(const std::string& s) {
    if (s == "rectangle") return ObjectShape::rectangle;
    if (s == "disk") return ObjectShape::disk;
    throw std::runtime_error("unknown shape: " + s);
}

}  // namespace

SceneSpec scene_from_json(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw std::runtime_error(std::string("invalid scene JSON: ") + e.what());
    }
    SceneSpec spec;
    if (j.contains("geometry")) {
        spec.geometry.width = j["geometry"].at("width").get<int>();
        spec.geometry.height = j["geometry"].at("height").get<int>();
    }
    spec.duration_us = j.value("duration_us", spec.duration_us);
    spec.frame_period_us = j.value("frame_period_us", spec.frame_period_us);
    spec.noise_rate = j.value("noise_rate", spec.noise_rate);
    spec.events_per_edge_pixel_per_frame =
        j.value("events_per_edge_pixel_per_frame", spec.events_per_edge_pixel_per_frame);
    spec.seed = j.value("seed", spec.seed);
    if (j.contains("objects")) {
        for (const auto& o : j["objects"]) {
            MovingObject obj;
            obj.shape = shape_from_name(o.at("shape").get<std::string>());
            obj.size = o.at("size").get<double>();
            obj.x = o.at("x").get<double>();
            obj.y = o.at("y").get<double>();
            obj.vx = o.at("vx").get<double>();
            obj.vy = o.at("vy").get<double>();
            spec.objects.push_back(obj);
        }
    }
    return spec;
}

std::string scene_to_json(const SceneSpec& spec) {
    nlohmann::ordered_json j;
    j["format_version"] = 1;
    j["geometry"] = {{"width", spec.geometry.width}, {"height", spec.geometry.height}};
    j["duration_us"] = spec.duration_us;
    j["frame_period_us"] = spec.frame_period_us;
    auto objects = nlohmann::ordered_json::array();
    for (const MovingObject& o : spec.objects) {
        nlohmann::ordered_json obj;
        obj["shape"] = shape_name(o.shape);
        obj["size"] = o.size;
        obj["x"] = o.x;
        obj["y"] = o.y;
        obj["vx"] = o.vx;
        obj["vy"] = o.vy;
        objects.push_back(std::move(obj));
    }
    j["objects"] = std::move(objects);
    j["noise_rate"] = spec.noise_rate;
    j["events_per_edge_pixel_per_frame"] = spec.events_per_edge_pixel_per_frame;
    j["seed"] = spec.seed;
    return j.dump(2) + "\n";
}

}  // namespace evmod
