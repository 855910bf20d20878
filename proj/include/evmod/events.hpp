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

#include <compare>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace evmod {

/// One sensor spike. Canonical ordering is (t, x, y, p).
struct Event {
    std::int64_t t{};  // microseconds, non-negative
    std::int32_t x{};  // pixel column, 0-based
    std::int32_t y{};  // pixel row, 0-based
    std::int32_t p{};  // polarity, +1 or -1

    friend auto operator<=>(const Event&, const Event&) = default;
};

struct SensorGeometry {
    int width = 346;
    int height = 260;
};

/// Events between two consecutive frame timestamps, half-open [t_start, t_end).
struct EventWindow {
    int index = 0;  // 1-based window ordinal
    std::int64_t t_start = 0;
    std::int64_t t_end = 0;
    std::vector<Event> events;  // sorted by (t, x, y, p)
    SensorGeometry geometry;
};

struct ParseReport {
    std::size_t lines = 0;
    std::size_t events = 0;
    std::size_t out_of_order = 0;  // events whose t decreased vs. the previous line
    bool had_header = false;
};

struct ParseResult {
    std::vector<Event> events;  // file order
    ParseReport report;
};

struct PartitionResult {
    std::vector<EventWindow> windows;
    std::size_t dropped = 0;  // events at or after the last frame timestamp
};

/// Uniform random subset of one window's events.
struct SampleSet {
    int window_index = 0;
    std::vector<Event> events;  // sorted by (t, x, y, p)
    std::uint64_t seed = 0;
};

/// Parse `t,x,y,p` CSV (optional single header line). Throws std::runtime_error
/// with the offending line number on malformed input, out-of-bounds coordinates,
/// bad polarity, or negative timestamps. Non-monotonic timestamps are accepted
/// and counted in the report.
ParseResult parse_events(std::istream& in, const SensorGeometry& geometry);
ParseResult parse_events_file(const std::string& path, const SensorGeometry& geometry);

/// Canonical serialization: sorted by (t, x, y, p), no header, '\n' endings.
std::string serialize_events(std::span<const Event> events);

/// One integer microsecond value per line, strictly increasing.
std::vector<std::int64_t> load_frame_timestamps(std::istream& in);
std::vector<std::int64_t> load_frame_timestamps_file(const std::string& path);

/// Assign events to half-open windows [T_{i-1}, T_i) with T_0 = 0. Events at or
/// after the last timestamp are dropped and counted. Events inside each window
/// are sorted canonically. Throws std::invalid_argument on an empty or
/// non-increasing timestamp sequence.
PartitionResult partition(std::span<const Event> events,
                          std::span<const std::int64_t> frame_timestamps,
                          const SensorGeometry& geometry);

/// Draw min(s, window size) distinct events uniformly at random, deterministic
/// under the seed. Output sorted by (t, x, y, p).
SampleSet uniform_sample(const EventWindow& window, std::size_t s, std::uint64_t seed);

}  // namespace evmod
