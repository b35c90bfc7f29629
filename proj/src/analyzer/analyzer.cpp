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

#include "nistt/analyzer.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <unordered_map>

namespace nistt::analysis {

using store::RecordKind;
using store::TraceRecord;

namespace {

std::string resolve(const TraceLog& log, std::uint32_t id) {
    const std::string* n = log.name(id);
    return n ? *n : "#" + std::to_string(id);
}

bool is_time_suspend(const TraceRecord& r) {
    return r.kind == RecordKind::ProcSuspend && !r.event_reason();
}

std::string join(const std::vector<std::string>& items) {
    std::string out;
    for (const auto& s : items) {
        if (!out.empty())
            out += ", ";
        out += s;
    }
    return out;
}

} // namespace

UnknownProcess::UnknownProcess(const std::string& name, std::vector<std::string> known)
    : std::invalid_argument("unknown process '" + name + "'; known processes: " + join(known)),
      known_(std::move(known)) {}

// ---------------------------------------------------------------------------
// RTF

std::vector<RtfPoint> compute_rtf(const TraceLog& log, SimTime bucket) {
    std::vector<RtfPoint> out;
    const auto& recs = log.records;
    if (recs.size() < 2 || bucket.ps == 0)
        return out;

    // First record index of each bucket group.
    std::vector<std::size_t> starts;
    for (std::size_t i = 0; i < recs.size(); ++i) {
        if (i == 0 || recs[i].ts.sim_ps / bucket.ps != recs[i - 1].ts.sim_ps / bucket.ps)
            starts.push_back(i);
    }

    auto emit = [&](const TraceRecord& from, const TraceRecord& to) {
        RtfPoint p;
        p.sim_span_ps = to.ts.sim_ps - from.ts.sim_ps;
        p.real_span_ns = to.ts.real_ns - from.ts.real_ns;
        p.bucket_mid_sim_ps = from.ts.sim_ps + p.sim_span_ps / 2;
        p.rtf = static_cast<double>(p.sim_span_ps) / (1000.0 * static_cast<double>(p.real_span_ns));
        out.push_back(p);
    };

    std::size_t acc_from = starts.front();
    std::size_t acc_count = 0;
    std::size_t emitted_from = 0;
    for (std::size_t g = 0; g < starts.size(); ++g) {
        std::size_t group_end = g + 1 < starts.size() ? starts[g + 1] : recs.size();
        acc_count += group_end - starts[g];
        std::size_t to = g + 1 < starts.size() ? starts[g + 1] : recs.size() - 1;
        if (acc_count >= 2 && recs[to].ts.real_ns > recs[acc_from].ts.real_ns) {
            emit(recs[acc_from], recs[to]);
            emitted_from = acc_from;
            acc_from = to;
            acc_count = 0;
        }
    }

    // Remainder that never reached two records or a positive real span.
    if (acc_from != recs.size() - 1 && !out.empty()) {
        out.pop_back();
        emit(recs[emitted_from], recs.back());
    }
    return out;
}

std::optional<double> whole_run_rtf(const TraceLog& log) {
    if (log.records.size() < 2)
        return std::nullopt;
    const auto& a = log.records.front();
    const auto& b = log.records.back();
    if (b.ts.real_ns <= a.ts.real_ns)
        return std::nullopt;
    return static_cast<double>(b.ts.sim_ps - a.ts.sim_ps) /
           (1000.0 * static_cast<double>(b.ts.real_ns - a.ts.real_ns));
}

// ---------------------------------------------------------------------------
// Quantum

std::vector<QuantumPoint> quantum_points(const TraceLog& log, const std::string& process) {
    std::optional<std::uint32_t> want;
    if (!process.empty()) {
        std::set<std::string> known;
        for (const auto& r : log.records) {
            if (r.kind == RecordKind::ProcEnter || r.kind == RecordKind::ProcSuspend ||
                r.kind == RecordKind::ProcResume) {
                auto n = resolve(log, r.subject_id);
                if (n == process)
                    want = r.subject_id;
                known.insert(n);
            }
        }
        if (!want)
            throw UnknownProcess(process, {known.begin(), known.end()});
    }
    std::vector<QuantumPoint> out;
    for (const auto& r : log.records) {
        if (!is_time_suspend(r) || (want && r.subject_id != *want))
            continue;
        out.push_back(QuantumPoint{r.ts.sim_ps, r.aux, resolve(log, r.subject_id)});
    }
    return out;
}

// ---------------------------------------------------------------------------
// Timeline

std::vector<TimelineEntry> event_timeline(const TraceLog& log, const std::vector<std::string>& filter) {
    std::vector<TimelineEntry> out;
    std::unordered_map<std::string, std::size_t> index;
    for (const auto& name : filter) {
        if (index.emplace(name, out.size()).second)
            out.push_back(TimelineEntry{name, {}, {}});
    }
    for (const auto& r : log.records) {
        if (r.kind != RecordKind::NotifyImmediate && r.kind != RecordKind::NotifyDelayed)
            continue;
        auto name = resolve(log, r.subject_id);
        auto it = index.find(name);
        if (it == index.end()) {
            if (!filter.empty())
                continue;
            it = index.emplace(name, out.size()).first;
            out.push_back(TimelineEntry{name, {}, {}});
        }
        auto& entry = out[it->second];
        if (r.kind == RecordKind::NotifyImmediate)
            entry.instants.push_back(r.ts.sim_ps);
        else
            entry.spans.push_back(Span{r.ts.sim_ps, r.ts.sim_ps + r.aux});
    }
    return out;
}

// ---------------------------------------------------------------------------
// Compute time

ComputeTable build_compute_table(std::vector<ComputeTimeRow> rows, double wall_s) {
    ComputeTable table;
    table.wall_s = wall_s;
    table.total.process = "Total";
    for (auto& row : rows) {
        row.share_pct = wall_s > 0.0 ? row.compute_time_s / wall_s * 100.0 : 0.0;
        table.total.compute_time_s += row.compute_time_s;
        table.total.share_pct += row.share_pct;
        table.total.complete = table.total.complete && row.complete;
    }
    std::stable_sort(rows.begin(), rows.end(), [](const ComputeTimeRow& a, const ComputeTimeRow& b) {
        return a.compute_time_s < b.compute_time_s;
    });
    table.rows = std::move(rows);
    return table;
}

ComputeTable compute_time_table(const TraceLog& log) {
    struct State {
        std::optional<std::uint64_t> active_since;
        std::uint64_t total_ns = 0;
        bool complete = true;
    };
    std::map<std::uint32_t, State> procs;
    std::vector<std::uint32_t> order;
    constexpr std::uint64_t kIdle = ~std::uint64_t{0};
    std::uint64_t running = kIdle;
    std::optional<std::uint64_t> start_ns, end_ns;

    auto state_of = [&](std::uint32_t id) -> State& {
        auto [it, inserted] = procs.try_emplace(id);
        if (inserted)
            order.push_back(id);
        return it->second;
    };
    auto close = [&](std::uint32_t id, std::uint64_t at) {
        State& s = state_of(id);
        if (s.active_since) {
            s.total_ns += at - *s.active_since;
            s.active_since.reset();
        }
    };

    for (const auto& r : log.records) {
        switch (r.kind) {
        case RecordKind::SimStart:
            start_ns = r.ts.real_ns;
            break;
        case RecordKind::SimEnd:
            end_ns = r.ts.real_ns;
            break;
        case RecordKind::ProcEnter:
        case RecordKind::ProcResume: {
            if (running != kIdle && running != r.subject_id)
                close(static_cast<std::uint32_t>(running), r.ts.real_ns);
            State& s = state_of(r.subject_id);
            if (s.active_since)
                s.complete = false; // activation without a suspend in between
            s.active_since = r.ts.real_ns;
            running = r.subject_id;
            break;
        }
        case RecordKind::ProcSuspend: {
            State& s = state_of(r.subject_id);
            if (!s.active_since)
                s.complete = false; // suspend without a known activation
            else
                close(r.subject_id, r.ts.real_ns);
            if (running == r.subject_id)
                running = kIdle;
            break;
        }
        default:
            break;
        }
    }

    std::uint64_t first = start_ns.value_or(log.records.empty() ? 0 : log.records.front().ts.real_ns);
    std::uint64_t last = end_ns.value_or(log.records.empty() ? 0 : log.records.back().ts.real_ns);
    if (running != kIdle)
        close(static_cast<std::uint32_t>(running), last);

    std::vector<ComputeTimeRow> rows;
    for (auto id : order) {
        const State& s = procs[id];
        rows.push_back(ComputeTimeRow{resolve(log, id), static_cast<double>(s.total_ns) * 1e-9, 0.0,
                                      s.complete});
    }
    return build_compute_table(std::move(rows), static_cast<double>(last - first) * 1e-9);
}

// ---------------------------------------------------------------------------
// Episodes

std::vector<Episode> wait_event_episodes(const TraceLog& log) {
    std::vector<Episode> out;
    std::unordered_map<std::uint32_t, std::size_t> open; // process id -> episode index
    for (const auto& r : log.records) {
        if (!r.event_reason())
            continue;
        if (r.kind == RecordKind::ProcSuspend) {
            open[r.subject_id] = out.size();
            out.push_back(Episode{resolve(log, r.subject_id), resolve(log, static_cast<std::uint32_t>(r.aux)),
                                  r.ts.sim_ps, std::nullopt});
        } else if (r.kind == RecordKind::ProcResume) {
            auto it = open.find(r.subject_id);
            if (it != open.end()) {
                out[it->second].resume_ps = r.ts.sim_ps;
                open.erase(it);
            }
        }
    }
    return out;
}

} // namespace nistt::analysis
