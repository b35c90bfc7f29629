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

/**
 * @file analyzer.hpp
 * @brief Post-processing of trace logs: real-time factor, quantum durations,
 *        event timelines, wait-on-event episodes and per-process compute time.
 *
 * Every function is a pure function of the decoded log.
 */

#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "nistt/time.hpp"
#include "nistt/trace_store.hpp"

namespace nistt::analysis {

using store::TraceLog;

struct RtfPoint {
    std::uint64_t bucket_mid_sim_ps = 0;
    double rtf = 0.0;
    std::uint64_t sim_span_ps = 0;
    std::uint64_t real_span_ns = 0;
};

/// Real-time factor per fixed sim-time bucket.
///
/// Records are grouped by floor(sim_ps / bucket). A group covers the interval
/// from its first record to the first record of the next group (the last
/// group ends at the last record), so the covered spans tile the whole run.
/// Groups with fewer than two records, or whose real-time span is zero, are
/// merged into the following group; a trailing remainder is merged into the
/// last emitted point.
std::vector<RtfPoint> compute_rtf(const TraceLog& log, SimTime bucket);

/// Δsim / Δreal between the first and last record, if Δreal > 0.
std::optional<double> whole_run_rtf(const TraceLog& log);

struct QuantumPoint {
    std::uint64_t sim_ps = 0;
    std::uint64_t duration_ps = 0;
    std::string process;
    bool operator==(const QuantumPoint&) const = default;
};

class UnknownProcess : public std::invalid_argument {
public:
    UnknownProcess(const std::string& name, std::vector<std::string> known);
    const std::vector<std::string>& known() const { return known_; }

private:
    std::vector<std::string> known_;
};

/// One point per time-reason PROC_SUSPEND. `process` empty selects all.
std::vector<QuantumPoint> quantum_points(const TraceLog& log, const std::string& process = {});

struct Span {
    std::uint64_t programmed_at = 0;
    std::uint64_t fires_at = 0;
    bool operator==(const Span&) const = default;
};

struct TimelineEntry {
    std::string event;
    std::vector<std::uint64_t> instants;
    std::vector<Span> spans;
};

/// Entries in order of first notification. `filter` empty selects all;
/// filtered names that never occur yield an empty entry.
std::vector<TimelineEntry> event_timeline(const TraceLog& log, const std::vector<std::string>& filter = {});

struct ComputeTimeRow {
    std::string process;
    double compute_time_s = 0.0;
    double share_pct = 0.0;
    /// False when unpaired records were seen for this process.
    bool complete = true;
};

struct ComputeTable {
    std::vector<ComputeTimeRow> rows; // ascending by compute time
    ComputeTimeRow total;
    double wall_s = 0.0;
};

/// Share column and Total row from per-process compute times and the wall
/// span of the run.
ComputeTable build_compute_table(std::vector<ComputeTimeRow> rows, double wall_s);

/// Compute time per process: real time from each activation (PROC_ENTER or
/// PROC_RESUME) to the process's next PROC_SUSPEND. An activation that is
/// followed by another process's activation first (the process returned)
/// ends there; one still open at the end ends at SIM_END.
ComputeTable compute_time_table(const TraceLog& log);

struct Episode {
    std::string process;
    std::string event;
    std::uint64_t suspend_ps = 0;
    std::optional<std::uint64_t> resume_ps;
};

std::vector<Episode> wait_event_episodes(const TraceLog& log);

// Renderers. CSV and JSON schemas are listed in the README.
void write_rtf_csv(std::ostream& out, const std::vector<RtfPoint>& pts);
void write_rtf_json(std::ostream& out, const std::vector<RtfPoint>& pts);
void write_quantum_csv(std::ostream& out, const std::vector<QuantumPoint>& pts);
void write_quantum_json(std::ostream& out, const std::vector<QuantumPoint>& pts);
void write_timeline_csv(std::ostream& out, const std::vector<TimelineEntry>& entries);
void write_timeline_json(std::ostream& out, const std::vector<TimelineEntry>& entries);
void write_table_csv(std::ostream& out, const ComputeTable& table);
void write_table_json(std::ostream& out, const ComputeTable& table);
void write_episodes_csv(std::ostream& out, const std::vector<Episode>& eps);
void write_episodes_json(std::ostream& out, const std::vector<Episode>& eps);

} // namespace nistt::analysis
