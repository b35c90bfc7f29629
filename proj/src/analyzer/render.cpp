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

#include <cstdio>
#include <ostream>

#include "json.hpp"
#include "nistt/analyzer.hpp"

namespace nistt::analysis {

namespace {

using nlohmann::json;

std::string fixed(double v, int digits) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", digits, v);
    return buf;
}

std::string general(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.15g", v);
    return buf;
}

// Seconds from integer picoseconds, printed exactly (12 fractional digits).
std::string ps_to_s(std::uint64_t ps) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%llu.%012llu", static_cast<unsigned long long>(ps / 1'000'000'000'000ULL),
                  static_cast<unsigned long long>(ps % 1'000'000'000'000ULL));
    return buf;
}

void dump(std::ostream& out, const json& j) { out << j.dump(2) << '\n'; }

// Names are user strings; quote them when they would break the row.
std::string field(const std::string& text) {
    if (text.find_first_of(",\"\r\n") == std::string::npos)
        return text;
    std::string out = "\"";
    for (char c : text) {
        if (c == '"')
            out += '"';
        out += c;
    }
    return out + '"';
}

} // namespace

void write_rtf_csv(std::ostream& out, const std::vector<RtfPoint>& pts) {
    out << "bucket_mid_s,rtf\n";
    for (const auto& p : pts)
        out << ps_to_s(p.bucket_mid_sim_ps) << ',' << general(p.rtf) << '\n';
}

void write_rtf_json(std::ostream& out, const std::vector<RtfPoint>& pts) {
    json arr = json::array();
    for (const auto& p : pts)
        arr.push_back({{"bucket_mid_sim_ps", p.bucket_mid_sim_ps},
                       {"rtf", p.rtf},
                       {"sim_span_ps", p.sim_span_ps},
                       {"real_span_ns", p.real_span_ns}});
    dump(out, arr);
}

void write_quantum_csv(std::ostream& out, const std::vector<QuantumPoint>& pts) {
    out << "sim_ps,duration_ps,process\n";
    for (const auto& p : pts)
        out << p.sim_ps << ',' << p.duration_ps << ',' << field(p.process) << '\n';
}

void write_quantum_json(std::ostream& out, const std::vector<QuantumPoint>& pts) {
    json arr = json::array();
    for (const auto& p : pts)
        arr.push_back({{"sim_ps", p.sim_ps}, {"duration_ps", p.duration_ps}, {"process", p.process}});
    dump(out, arr);
}

void write_timeline_csv(std::ostream& out, const std::vector<TimelineEntry>& entries) {
    out << "event,kind,start_ps,end_ps\n";
    for (const auto& e : entries) {
        for (auto t : e.instants)
            out << field(e.event) << ",instant," << t << ',' << t << '\n';
        for (const auto& s : e.spans)
            out << field(e.event) << ",span," << s.programmed_at << ',' << s.fires_at << '\n';
    }
}

void write_timeline_json(std::ostream& out, const std::vector<TimelineEntry>& entries) {
    json arr = json::array();
    for (const auto& e : entries) {
        json spans = json::array();
        for (const auto& s : e.spans)
            spans.push_back({{"programmed_at_ps", s.programmed_at}, {"fires_at_ps", s.fires_at}});
        arr.push_back({{"event", e.event}, {"instants_ps", e.instants}, {"spans", spans}});
    }
    dump(out, arr);
}

void write_table_csv(std::ostream& out, const ComputeTable& table) {
    out << "process,compute_time_s,share_pct,complete\n";
    auto row = [&](const ComputeTimeRow& r) {
        out << field(r.process) << ',' << fixed(r.compute_time_s, 6) << ',' << fixed(r.share_pct, 6) << ','
            << (r.complete ? 1 : 0) << '\n';
    };
    for (const auto& r : table.rows)
        row(r);
    row(table.total);
}

void write_table_json(std::ostream& out, const ComputeTable& table) {
    auto row = [](const ComputeTimeRow& r) {
        return json{{"process", r.process},
                    {"compute_time_s", r.compute_time_s},
                    {"share_pct", r.share_pct},
                    {"complete", r.complete}};
    };
    json rows = json::array();
    for (const auto& r : table.rows)
        rows.push_back(row(r));
    dump(out, json{{"rows", rows}, {"total", row(table.total)}, {"wall_s", table.wall_s}});
}

void write_episodes_csv(std::ostream& out, const std::vector<Episode>& eps) {
    out << "process,event,suspend_ps,resume_ps\n";
    for (const auto& e : eps) {
        out << field(e.process) << ',' << field(e.event) << ',' << e.suspend_ps << ',';
        if (e.resume_ps)
            out << *e.resume_ps;
        out << '\n';
    }
}

void write_episodes_json(std::ostream& out, const std::vector<Episode>& eps) {
    json arr = json::array();
    for (const auto& e : eps) {
        json j{{"process", e.process}, {"event", e.event}, {"suspend_ps", e.suspend_ps}};
        j["resume_ps"] = e.resume_ps ? json(*e.resume_ps) : json(nullptr);
        arr.push_back(j);
    }
    dump(out, arr);
}

} // namespace nistt::analysis
