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

#include <cmath>
#include <sstream>

#include "doctest.h"
#include "json.hpp"
#include "nistt/analyzer.hpp"
#include "reference_values.hpp"
#include "support.hpp"

using namespace nistt;
using namespace nistt::analysis;
using store::RecordKind;
using store::TraceRecord;

namespace {

TraceRecord at(RecordKind k, std::uint64_t sim, std::uint64_t real, std::uint32_t subject = 0, std::uint64_t aux = 0,
               std::uint8_t flags = 0) {
    TraceRecord r;
    r.kind = k;
    r.ts = {sim, real};
    r.subject_id = subject;
    r.aux = aux;
    r.flags = flags;
    return r;
}

TraceRecord name(std::uint32_t id, const std::string& text) { return at(RecordKind::NameDef, 0, 0, id, text.size()); }

} // namespace

TEST_CASE("rtf on proportional logs is constant in every bucket") {
    std::mt19937_64 rng(5);
    for (int round = 0; round < 50; ++round) {
        auto log = testing::proportional_log(rng, 2 + rng() % 3000, 3'000'000'000ULL, 5);
        for (auto bucket : {SimTime::from_ms(1), SimTime::from_ms(10), SimTime::from_ms(100), SimTime::from_s(1)}) {
            auto pts = compute_rtf(log, bucket);
            for (const auto& p : pts)
                CHECK(std::abs(p.rtf - 0.2) <= 1e-9 * 0.2);
            // The covered spans tile the run.
            std::uint64_t sim = 0, real = 0;
            for (const auto& p : pts) {
                sim += p.sim_span_ps;
                real += p.real_span_ns;
            }
            if (!pts.empty()) {
                CHECK(sim == log.records.back().ts.sim_ps);
                CHECK(real == log.records.back().ts.real_ns);
            }
        }
    }
}

TEST_CASE("rtf buckets: grouping, merging, midpoints") {
    store::TraceLog log;
    // Bucket 10: [0,10) has records at 0 and 4; [10,20) a single record at 12;
    // [20,30) records at 20 and 25.
    log.records = {at(RecordKind::SimStart, 0, 0), at(RecordKind::ProcSuspend, 4'000, 10),
                   at(RecordKind::ProcSuspend, 12'000, 30), at(RecordKind::ProcSuspend, 20'000, 50),
                   at(RecordKind::SimEnd, 25'000, 100)};
    auto pts = compute_rtf(log, SimTime{10'000});
    REQUIRE(pts.size() == 2);
    // Group 0 covers up to the next group's first record.
    CHECK(pts[0].sim_span_ps == 12'000);
    CHECK(pts[0].real_span_ns == 30);
    CHECK(pts[0].bucket_mid_sim_ps == 6'000);
    // The single-record group merges forward with the last group.
    CHECK(pts[1].sim_span_ps == 13'000);
    CHECK(pts[1].real_span_ns == 70);
    CHECK(pts[1].rtf == doctest::Approx(13'000.0 / 70'000.0));
}

TEST_CASE("rtf: zero real span merges forward, trailing remainder merges back") {
    store::TraceLog log;
    log.records = {at(RecordKind::SimStart, 0, 0), at(RecordKind::ProcSuspend, 5, 0),
                   at(RecordKind::ProcSuspend, 10, 0), at(RecordKind::ProcSuspend, 15, 40),
                   at(RecordKind::ProcSuspend, 21, 60), at(RecordKind::SimEnd, 31, 60)};
    auto pts = compute_rtf(log, SimTime{10});
    REQUIRE(pts.size() == 1);
    CHECK(pts[0].sim_span_ps == 31);
    CHECK(pts[0].real_span_ns == 60);
    CHECK(compute_rtf(store::TraceLog{}, SimTime{10}).empty());
}

TEST_CASE("whole-run rtf of a 2 s / 29.15 s log") {
    store::TraceLog log;
    log.records = {at(RecordKind::SimStart, 0, 0), at(RecordKind::SimEnd, 2'000'000'000'000ULL, 29'150'000'000ULL)};
    auto v = whole_run_rtf(log);
    REQUIRE(v);
    CHECK(std::abs(*v - testing::kReferenceRtf) <= 1e-6);
    CHECK(*v == doctest::Approx(testing::kReferenceSimSeconds / testing::kReferenceRealSeconds).epsilon(1e-12));
    log.records.pop_back();
    CHECK_FALSE(whole_run_rtf(log));
}

TEST_CASE("quantum points select time suspends") {
    store::TraceLog log;
    log.names = {{0, "cpu"}, {1, "dma"}, {2, "irq"}};
    log.records = {name(0, "cpu"),
                   name(1, "dma"),
                   name(2, "irq"),
                   at(RecordKind::ProcSuspend, 0, 0, 0, 100),
                   at(RecordKind::ProcResume, 100, 0, 0, 100),
                   at(RecordKind::ProcSuspend, 100, 0, 1, 2, store::kFlagEventReason),
                   at(RecordKind::ProcSuspend, 100, 0, 0, 50),
                   at(RecordKind::ProcSuspend, 100, 0, 7, 9)};
    auto all = quantum_points(log);
    CHECK(all == std::vector<QuantumPoint>{{0, 100, "cpu"}, {100, 50, "cpu"}, {100, 9, "#7"}});
    CHECK(quantum_points(log, "cpu").size() == 2);
    CHECK(quantum_points(log, "dma").empty());
    try {
        quantum_points(log, "gpu");
        FAIL("expected UnknownProcess");
    } catch (const UnknownProcess& e) {
        CHECK(e.known() == std::vector<std::string>{"#7", "cpu", "dma"});
        CHECK(std::string(e.what()).find("cpu") != std::string::npos);
    }
}

TEST_CASE("event timeline") {
    store::TraceLog log;
    log.names = {{0, "timer"}, {1, "irq"}};
    const std::uint64_t s = 1'000'000'000'000ULL;
    log.records = {name(0, "timer"),
                   at(RecordKind::NotifyDelayed, 4 * s / 10, 0, 0, 7 * s / 10),
                   name(1, "irq"),
                   at(RecordKind::NotifyImmediate, 11 * s / 10, 0, 1),
                   at(RecordKind::NotifyDelayed, 11 * s / 10, 0, 0, 2 * s / 10),
                   at(RecordKind::NotifyDelayed, 13 * s / 10, 0, 0, 5 * s / 10)};
    auto tl = event_timeline(log);
    REQUIRE(tl.size() == 2);
    CHECK(tl[0].event == "timer");
    CHECK(tl[0].spans == std::vector<Span>{{4 * s / 10, 11 * s / 10}, {11 * s / 10, 13 * s / 10},
                                           {13 * s / 10, 18 * s / 10}});
    CHECK(tl[1].instants == std::vector<std::uint64_t>{11 * s / 10});
    auto only = event_timeline(log, {"irq", "never"});
    REQUIRE(only.size() == 2);
    CHECK(only[0].event == "irq");
    CHECK(only[1].instants.empty());
    CHECK(only[1].spans.empty());

    std::ostringstream csv;
    write_timeline_csv(csv, tl);
    CHECK(csv.str() == "event,kind,start_ps,end_ps\n"
                       "timer,span,400000000000,1100000000000\n"
                       "timer,span,1100000000000,1300000000000\n"
                       "timer,span,1300000000000,1800000000000\n"
                       "irq,instant,1100000000000,1100000000000\n");
}

TEST_CASE("compute-time table reproduces the reference shares") {
    std::vector<ComputeTimeRow> rows;
    for (const auto& r : testing::kReferenceRows)
        rows.push_back({r.process, r.compute_time_s, 0.0, true});
    auto table = build_compute_table(rows, testing::kReferenceWall);
    REQUIRE(table.rows.size() == 5);
    for (const auto& ref : testing::kReferenceRows) {
        auto it = std::find_if(table.rows.begin(), table.rows.end(),
                               [&](const ComputeTimeRow& r) { return r.process == ref.process; });
        REQUIRE(it != table.rows.end());
        CHECK(std::abs(it->share_pct - ref.share_pct) <= testing::kShareTolerance);
        // Independent formula: share = time / wall * 100.
        CHECK(it->share_pct == doctest::Approx(ref.compute_time_s * 100.0 / 29.148).epsilon(1e-12));
    }
    for (std::size_t i = 1; i < table.rows.size(); ++i)
        CHECK(table.rows[i - 1].compute_time_s <= table.rows[i].compute_time_s);
    double time_sum = 0, share_sum = 0, printed_share_sum = 0;
    for (const auto& r : table.rows) {
        time_sum += r.compute_time_s;
        share_sum += r.share_pct;
    }
    for (const auto& r : testing::kReferenceRows)
        printed_share_sum += r.share_pct;
    CHECK(table.total.process == "Total");
    CHECK(table.total.compute_time_s == doctest::Approx(time_sum).epsilon(1e-15));
    CHECK(table.total.share_pct == doctest::Approx(share_sum).epsilon(1e-15));
    CHECK(std::abs(table.total.compute_time_s - testing::kReferenceTotalTime) <= testing::kTotalTolerance);
    CHECK(std::abs(printed_share_sum - testing::kReferenceTotalShare) <=
          testing::kTotalTolerance + testing::kPrintSlack);
    CHECK(std::abs(table.total.share_pct - testing::kReferenceTotalShare) <= testing::kShareTolerance);
}

TEST_CASE("compute time from activations") {
    store::TraceLog log;
    log.names = {{0, "a"}, {1, "b"}};
    log.records = {at(RecordKind::SimStart, 0, 0),
                   name(0, "a"),
                   at(RecordKind::ProcEnter, 0, 10, 0),
                   at(RecordKind::ProcSuspend, 0, 30, 0, 5),       // a: 20
                   name(1, "b"),
                   at(RecordKind::ProcEnter, 0, 40, 1),            // b returns without suspending
                   at(RecordKind::ProcResume, 5, 100, 0, 5),       // b: 60, a resumes
                   at(RecordKind::ProcSuspend, 5, 130, 0, 1, 1),   // a: 30
                   at(RecordKind::ProcResume, 9, 200, 0, 1, 1),    // a open until SIM_END
                   at(RecordKind::SimEnd, 9, 1000)};               // a: 800
    auto t = compute_time_table(log);
    REQUIRE(t.rows.size() == 2);
    CHECK(t.wall_s == doctest::Approx(1000e-9));
    CHECK(t.rows[0].process == "b");
    CHECK(t.rows[0].compute_time_s == doctest::Approx(60e-9));
    CHECK(t.rows[1].process == "a");
    CHECK(t.rows[1].compute_time_s == doctest::Approx(850e-9));
    CHECK(t.rows[1].share_pct == doctest::Approx(85.0));
    CHECK(t.total.complete);

    log.records.insert(log.records.begin() + 3, at(RecordKind::ProcResume, 0, 20, 0)); // double activation
    CHECK_FALSE(compute_time_table(log).rows[1].complete);
}

TEST_CASE("wait-on-event episodes") {
    store::TraceLog log;
    log.names = {{0, "cpu"}, {1, "IN_FREE"}};
    const auto ev = store::kFlagEventReason;
    log.records = {name(0, "cpu"), name(1, "IN_FREE"), at(RecordKind::ProcSuspend, 10, 0, 0, 1, ev),
                   at(RecordKind::ProcResume, 15, 0, 0, 1, ev), at(RecordKind::ProcSuspend, 20, 0, 0, 1, ev)};
    auto eps = wait_event_episodes(log);
    REQUIRE(eps.size() == 2);
    CHECK(eps[0].process == "cpu");
    CHECK(eps[0].event == "IN_FREE");
    CHECK(eps[0].suspend_ps == 10);
    CHECK(eps[0].resume_ps == std::optional<std::uint64_t>(15));
    CHECK_FALSE(eps[1].resume_ps);
    std::ostringstream csv;
    write_episodes_csv(csv, eps);
    CHECK(csv.str() == "process,event,suspend_ps,resume_ps\ncpu,IN_FREE,10,15\ncpu,IN_FREE,20,\n");
    std::ostringstream js;
    write_episodes_json(js, eps);
    auto j = nlohmann::json::parse(js.str());
    CHECK(j[1]["resume_ps"].is_null());
}

TEST_CASE("renderers: csv schemas") {
    std::ostringstream rtf, q, table;
    write_rtf_csv(rtf, {RtfPoint{1'500'000'000'000ULL, 0.25, 0, 0}});
    CHECK(rtf.str() == "bucket_mid_s,rtf\n1.500000000000,0.25\n");
    write_quantum_csv(q, {{100, 100, "a,b"}});
    CHECK(q.str() == "sim_ps,duration_ps,process\n100,100,\"a,b\"\n");
    write_table_csv(table, build_compute_table({{"cpu", 1.5, 0, true}}, 2.0));
    CHECK(table.str() == "process,compute_time_s,share_pct,complete\n"
                         "cpu,1.500000,75.000000,1\n"
                         "Total,1.500000,75.000000,1\n");
}

TEST_CASE("many event waits yield one episode each") {
    store::TraceLog log;
    log.names = {{0, "cpu"}, {1, "IN_FREE"}};
    log.records = {name(0, "cpu"), name(1, "IN_FREE")};
    for (std::uint64_t i = 0; i < 68; ++i) {
        log.records.push_back(at(RecordKind::ProcSuspend, 10 * i, 0, 0, 1, store::kFlagEventReason));
        log.records.push_back(at(RecordKind::ProcResume, 10 * i + 5, 0, 0, 1, store::kFlagEventReason));
    }
    auto eps = wait_event_episodes(log);
    CHECK(eps.size() == 68);
    for (const auto& e : eps)
        CHECK(*e.resume_ps - e.suspend_ps == 5);
    log.records.resize(2);
    CHECK(wait_event_episodes(log).empty());
}
