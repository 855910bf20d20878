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

#include "evmod/events.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <istream>
#include <numeric>
#include <stdexcept>

#include "evmod/rng.hpp"

namespace evmod {

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

[[noreturn]] void fail_line(std::size_t line, const std::string& what) {
    throw std::runtime_error("line " + std::to_string(line) + ": " + what);
}

std::int64_t parse_int(std::string_view field, std::size_t line, const char* name) {
    field = trim(field);
    if (!field.empty() && field.front() == '+') field.remove_prefix(1);
    std::int64_t value = 0;
    const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
    if (ec != std::errc{} || ptr != field.data() + field.size())
        fail_line(line, std::string("malformed ") + name + " field");
    return value;
}

std::ifstream open_or_throw(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path);
    return in;
}

}  // namespace

ParseResult parse_events(std::istream& in, const SensorGeometry& geometry) {
    ParseResult result;
    std::string line;
    std::size_t line_no = 0;
    std::int64_t prev_t = -1;
    while (std::getline(in, line)) {
        ++line_no;
        const std::string_view text = trim(line);
        if (text.empty()) continue;
        if (line_no == 1 && text == "t,x,y,p") {
            result.report.had_header = true;
            continue;
        }
        std::string_view fields[4];
        std::string_view rest = text;
        for (int i = 0; i < 4; ++i) {
            const std::size_t comma = rest.find(',');
            if (i < 3) {
                if (comma == std::string_view::npos) fail_line(line_no, "expected 4 fields t,x,y,p");
                fields[i] = rest.substr(0, comma);
                rest.remove_prefix(comma + 1);
            } else {
                if (comma != std::string_view::npos) fail_line(line_no, "expected 4 fields t,x,y,p");
                fields[i] = rest;
            }
        }
        Event ev;
        ev.t = parse_int(fields[0], line_no, "t");
        ev.x = static_cast<std::int32_t>(parse_int(fields[1], line_no, "x"));
        ev.y = static_cast<std::int32_t>(parse_int(fields[2], line_no, "y"));
        ev.p = static_cast<std::int32_t>(parse_int(fields[3], line_no, "p"));
        if (ev.t < 0) fail_line(line_no, "negative timestamp");
        if (ev.x < 0 || ev.x >= geometry.width) fail_line(line_no, "x out of bounds");
        if (ev.y < 0 || ev.y >= geometry.height) fail_line(line_no, "y out of bounds");
        if (ev.p != 1 && ev.p != -1) fail_line(line_no, "polarity must be +1 or -1");
        if (prev_t >= 0 && ev.t < prev_t) ++result.report.out_of_order;
        prev_t = ev.t;
        result.events.push_back(ev);
    }
    result.report.lines = line_no;
    result.report.events = result.events.size();
    return result;
}

ParseResult parse_events_file(const std::string& path, const SensorGeometry& geometry) {
    auto in = open_or_throw(path);
    return parse_events(in, geometry);
}

std::string serialize_events(std::span<const Event> events) {
    std::vector<Event> sorted(events.begin(), events.end());
    std::sort(sorted.begin(), sorted.end());
    std::string out;
    out.reserve(sorted.size() * 16);
    char buf[64];
    for (const Event& ev : sorted) {
        const int n = std::snprintf(buf, sizeof(buf), "%lld,%d,%d,%d\n",
                                    static_cast<long long>(ev.t), ev.x, ev.y, ev.p);
        out.append(buf, static_cast<std::size_t>(n));
    }
    return out;
}

std::vector<std::int64_t> load_frame_timestamps(std::istream& in) {
    std::vector<std::int64_t> out;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const std::string_view text = trim(line);
        if (text.empty()) continue;
        const std::int64_t value = parse_int(text, line_no, "timestamp");
        if (!out.empty() && value <= out.back())
            fail_line(line_no, "frame timestamps must be strictly increasing");
        if (value <= 0) fail_line(line_no, "frame timestamps must be positive");
        out.push_back(value);
    }
    return out;
}

std::vector<std::int64_t> load_frame_timestamps_file(const std::string& path) {
    auto in = open_or_throw(path);
    return load_frame_timestamps(in);
}

PartitionResult partition(std::span<const Event> events,
                          std::span<const std::int64_t> frame_timestamps,
                          const SensorGeometry& geometry) {
    if (frame_timestamps.empty()) throw std::invalid_argument("frame timestamp sequence is empty");
    for (std::size_t i = 0; i < frame_timestamps.size(); ++i) {
        const std::int64_t prev = i == 0 ? 0 : frame_timestamps[i - 1];
        if (frame_timestamps[i] <= prev)
            throw std::invalid_argument("frame timestamps must be strictly increasing and positive");
    }

    PartitionResult result;
    const std::size_t m = frame_timestamps.size();
    result.windows.resize(m);
    for (std::size_t i = 0; i < m; ++i) {
        EventWindow& w = result.windows[i];
        w.index = static_cast<int>(i + 1);
        w.t_start = i == 0 ? 0 : frame_timestamps[i - 1];
        w.t_end = frame_timestamps[i];
        w.geometry = geometry;
    }
    for (const Event& ev : events) {
        const auto it = std::upper_bound(frame_timestamps.begin(), frame_timestamps.end(), ev.t);
        if (it == frame_timestamps.end()) {
            ++result.dropped;
            continue;
        }
        result.windows[static_cast<std::size_t>(it - frame_timestamps.begin())].events.push_back(ev);
    }
    for (EventWindow& w : result.windows) std::sort(w.events.begin(), w.events.end());
    return result;
}

SampleSet uniform_sample(const EventWindow& window, std::size_t s, std::uint64_t seed) {
    if (s < 1) throw std::invalid_argument("sample size must be >= 1");
    SampleSet out;
    out.window_index = window.index;
    out.seed = seed;
    const std::size_t q = window.events.size();
    if (q <= s) {
        out.events = window.events;
        return out;
    }
    // Partial Fisher-Yates over the index range, then restore window order.
    std::vector<std::uint32_t> indices(q);
    std::iota(indices.begin(), indices.end(), 0u);
    SplitMix64 rng(seed);
    for (std::size_t i = 0; i < s; ++i) {
        const std::size_t j = i + static_cast<std::size_t>(rng.bounded(q - i));
        std::swap(indices[i], indices[j]);
    }
    indices.resize(s);
    std::sort(indices.begin(), indices.end());
    out.events.reserve(s);
    for (const std::uint32_t idx : indices) out.events.push_back(window.events[idx]);
    return out;
}

}  // namespace evmod
