/*
 * Copyright 2026 The nistt Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <charconv>
#include <compare>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <string_view>

namespace nistt {

/// Simulation time in integer picoseconds.
struct SimTime {
    std::uint64_t ps = 0;

    static constexpr SimTime from_ps(std::uint64_t v) { return {v}; }
    static constexpr SimTime from_ns(std::uint64_t v) { return {v * 1'000ULL}; }
    static constexpr SimTime from_us(std::uint64_t v) { return {v * 1'000'000ULL}; }
    static constexpr SimTime from_ms(std::uint64_t v) { return {v * 1'000'000'000ULL}; }
    static constexpr SimTime from_s(std::uint64_t v) { return {v * 1'000'000'000'000ULL}; }

    constexpr double seconds() const { return static_cast<double>(ps) * 1e-12; }

    constexpr SimTime operator+(SimTime o) const { return {ps + o.ps}; }
    constexpr SimTime operator-(SimTime o) const { return {ps - o.ps}; }
    constexpr SimTime operator*(std::uint64_t k) const { return {ps * k}; }
    constexpr auto operator<=>(const SimTime&) const = default;
};

/// Parses `<int><unit>` with unit one of ps|ns|us|ms|s. Rejects overflow,
/// signs, fractions and missing units.
inline std::optional<SimTime> parse_time(std::string_view text) {
    std::uint64_t value = 0;
    const char* first = text.data();
    const char* last = text.data() + text.size();
    auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc{} || ptr == first)
        return std::nullopt;
    std::string_view unit(ptr, static_cast<std::size_t>(last - ptr));
    std::uint64_t scale = 0;
    if (unit == "ps")
        scale = 1;
    else if (unit == "ns")
        scale = 1'000ULL;
    else if (unit == "us")
        scale = 1'000'000ULL;
    else if (unit == "ms")
        scale = 1'000'000'000ULL;
    else if (unit == "s")
        scale = 1'000'000'000'000ULL;
    else
        return std::nullopt;
    if (value > std::numeric_limits<std::uint64_t>::max() / scale)
        return std::nullopt;
    return SimTime{value * scale};
}

/// Renders the largest unit that represents the value exactly.
inline std::string format_time(SimTime t) {
    static constexpr std::pair<std::uint64_t, const char*> units[] = {
        {1'000'000'000'000ULL, "s"}, {1'000'000'000ULL, "ms"},
        {1'000'000ULL, "us"},        {1'000ULL, "ns"}};
    if (t.ps != 0) {
        for (auto [scale, name] : units)
            if (t.ps % scale == 0)
                return std::to_string(t.ps / scale) + name;
    }
    return std::to_string(t.ps) + "ps";
}

} // namespace nistt
