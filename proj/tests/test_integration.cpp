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

// End-to-end checks: preloaded shim on the bundled workloads, exported
// symbols, and the command-line tools.

#include <cstdio>
#include <set>

#include "doctest.h"
#include "json.hpp"
#include "nistt/analyzer.hpp"
#include "nistt/trace_store.hpp"
#include "support.hpp"

using namespace nistt;
using namespace nistt::testing;
using store::RecordKind;

namespace {

std::string workload(const std::string& name) { return std::string(NISTT_WORKLOAD_DIR) + "/" + name; }

Captured traced(const std::string& exe, const std::vector<std::string>& args, const std::string& db,
                const std::string& trace = "all", std::vector<std::string> extra = {}) {
    std::vector<std::string> argv{workload(exe)};
    argv.insert(argv.end(), args.begin(), args.end());
    extra.push_back("LD_PRELOAD=" NISTT_SHIM_PATH);
    extra.push_back("NISTT_DB_PATH=" + db);
    extra.push_back("NISTT_TRACE=" + trace);
    return run(argv, clean_env(extra));
}

std::set<std::string> defined_dynamic_symbols(const std::string& lib) {
    std::set<std::string> out;
    std::string cmd = "nm -D --defined-only " + lib;
    FILE* p = ::popen(cmd.c_str(), "r");
    REQUIRE(p != nullptr);
    char line[512];
    while (std::fgets(line, sizeof line, p)) {
        std::string s(line);
        while (!s.empty() && (s.back() == '\n' || s.back() == ' '))
            s.pop_back();
        auto sp = s.rfind(' ');
        std::string type = sp == std::string::npos || sp < 2 ? "" : s.substr(sp - 1, 1);
        if (type == "T" || type == "W" || type == "i")
            out.insert(s.substr(sp + 1));
    }
    ::pclose(p);
    return out;
}

std::set<std::string> manifest() {
    std::set<std::string> out;
    std::istringstream in(slurp(NISTT_TRACED_SYMBOLS));
    for (std::string line; std::getline(in, line);)
        if (!line.empty())
            out.insert(line);
    return out;
}

std::size_t count(const store::TraceLog& log, RecordKind k) {
    std::size_t n = 0;
    for (const auto& r : log.records)
        n += r.kind == k;
    return n;
}

} // namespace

TEST_CASE("shim exports exactly the traced symbols; the kernel exports them too") {
    auto want = manifest();
    CHECK(want == std::set<std::string>{"process_entry_trampoline", "wait_time", "wait_event", "notify"});
    CHECK(defined_dynamic_symbols(NISTT_SHIM_PATH) == want);
    auto kernel = defined_dynamic_symbols(NISTT_KERNEL_PATH);
    for (const auto& s : want)
        CHECK(kernel.count(s) == 1);
}

TEST_CASE("trace=none stores exactly SIM_START and SIM_END") {
    TempDir dir;
    auto c = traced("timer_idle", {}, dir.file("t.bin"), "none");
    CHECK(c.exit_code == 0);
    auto log = store::read_log(dir.file("t.bin"));
    REQUIRE(log.records.size() == 2);
    CHECK(log.records[0].kind == RecordKind::SimStart);
    CHECK(log.records[1].kind == RecordKind::SimEnd);
    CHECK(log.records[1].ts.sim_ps == 2'000'000'000'000ULL);
}

TEST_CASE("unwritable store path: diagnostic only, same result") {
    auto plain = run({workload("periph"), "--accesses", "300"}, clean_env());
    auto c = traced("periph", {"--accesses", "300"}, "/nonexistent-dir/t.bin");
    CHECK(c.exit_code == plain.exit_code);
    CHECK(c.out == plain.out);
    CHECK(c.err.find("nistt: ") != std::string::npos);
}

TEST_CASE("unknown trace names are reported and ignored") {
    TempDir dir;
    auto c = traced("busy", {"--syncs", "10"}, dir.file("t.bin"), "quantum,bogus");
    CHECK(c.exit_code == 0);
    CHECK(c.err.find("bogus") != std::string::npos);
    auto log = store::read_log(dir.file("t.bin"));
    CHECK(count(log, RecordKind::ProcSuspend) == 10);
    CHECK(count(log, RecordKind::ProcEnter) == 0);
}

TEST_CASE("an aborting simulation leaves a readable store") {
    TempDir dir;
    auto c = traced("busy", {"--syncs", "1000", "--abort-after", "500"}, dir.file("t.bin"), "all",
                    {"NISTT_FLUSH_EVERY=64"});
    CHECK(c.exit_code == 128 + SIGABRT);
    store::TraceLog log;
    CHECK_NOTHROW(log = store::read_log(dir.file("t.bin")));
    CHECK_FALSE(log.truncated);
    CHECK(log.records.size() >= 900);
    CHECK(log.records.size() % 64 == 0);
    CHECK(count(log, RecordKind::SimEnd) == 0);
}

TEST_CASE("record stream structure on the bundled workloads") {
    TempDir dir;
    SUBCASE("timer_idle") {
        REQUIRE(traced("timer_idle", {}, dir.file("t.bin")).exit_code == 0);
        auto log = store::read_log(dir.file("t.bin"));
        std::vector<std::string> entered;
        for (const auto& r : log.records)
            if (r.kind == RecordKind::ProcEnter)
                entered.push_back(*log.name(r.subject_id));
        CHECK(entered == std::vector<std::string>{"processor_thread", "irq_ctrl"});

        // Every suspension is followed by the matching resumption of the same
        // process, with the same reason and aux, unless the run ended first.
        std::map<std::uint32_t, store::TraceRecord> open;
        std::uint64_t last_sim = 0;
        for (const auto& r : log.records) {
            CHECK(r.ts.sim_ps >= last_sim);
            last_sim = r.ts.sim_ps;
            if (r.kind == RecordKind::ProcSuspend) {
                CHECK(open.count(r.subject_id) == 0);
                open[r.subject_id] = r;
            } else if (r.kind == RecordKind::ProcResume) {
                REQUIRE(open.count(r.subject_id) == 1);
                CHECK(open[r.subject_id].flags == r.flags);
                CHECK(open[r.subject_id].aux == r.aux);
                if (!r.event_reason())
                    CHECK(r.ts.sim_ps == open[r.subject_id].ts.sim_ps + r.aux);
                open.erase(r.subject_id);
            }
        }
        CHECK(open.size() <= 2);

        auto table = analysis::compute_time_table(log);
        double share_sum = 0;
        for (const auto& r : table.rows) {
            CHECK(r.share_pct >= 0.0);
            CHECK(r.share_pct <= 100.0);
            CHECK(r.complete);
            share_sum += r.share_pct;
        }
        CHECK(share_sum <= 100.0 + 1e-6);
        CHECK(table.total.share_pct == doctest::Approx(share_sum));

        auto spans = analysis::event_timeline(log, {"arm_timer_ns"});
        std::vector<analysis::Span> idle;
        for (const auto& s : spans[0].spans)
            if (s.fires_at - s.programmed_at > 1'000'000'000ULL)
                idle.push_back(s);
        const std::uint64_t ms = 1'000'000'000ULL;
        CHECK(idle == std::vector<analysis::Span>{{400 * ms, 1100 * ms}, {1100 * ms, 1300 * ms}, {1300 * ms, 1800 * ms}});
    }
    SUBCASE("periph") {
        REQUIRE(traced("periph", {"--accesses", "2000", "--kick-every", "100"}, dir.file("t.bin")).exit_code == 0);
        auto log = store::read_log(dir.file("t.bin"));
        std::size_t in_free = 0, tx = 0;
        for (const auto& r : log.records) {
            if (r.kind == RecordKind::NotifyImmediate && *log.name(r.subject_id) == "IN_FREE")
                ++in_free;
            if (r.kind == RecordKind::NotifyDelayed && *log.name(r.subject_id) == "tx_ev") {
                ++tx;
                CHECK(r.aux == 1'000'000);
            }
        }
        CHECK(in_free == 2000);
        CHECK(tx == 20);
        auto eps = analysis::wait_event_episodes(log);
        CHECK(eps.size() == 21); // 20 wake-ups plus the final open wait
        CHECK_FALSE(eps.back().resume_ps);
    }
    SUBCASE("category filter") {
        REQUIRE(traced("periph", {"--accesses", "100"}, dir.file("t.bin"), "event").exit_code == 0);
        auto log = store::read_log(dir.file("t.bin"));
        for (const auto& r : log.records)
            CHECK((r.kind == RecordKind::SimStart || r.kind == RecordKind::SimEnd || r.kind == RecordKind::NameDef ||
                   r.kind == RecordKind::NotifyImmediate || r.kind == RecordKind::NotifyDelayed));
    }
}

TEST_CASE("workload flags") {
    auto ok = run({workload("busy"), "--syncs", "5", "--quantum", "1us"}, clean_env());
    CHECK(ok.exit_code == 0);
    CHECK(ok.out.find("final_sim_ps=5000000\n") != std::string::npos);
    auto until = run({workload("timer_idle"), "--until", "500ms"}, clean_env());
    CHECK(until.out.find("final_sim_ps=500000000000\n") != std::string::npos);
    CHECK(run({workload("busy"), "--quantum", "10"}, clean_env()).exit_code != 0);
    CHECK(run({workload("busy"), "--quantum", "0us"}, clean_env()).exit_code != 0);
    TempDir dir;
    CHECK(run({workload("busy"), "--syncs", "3", "--out", dir.file("o.txt")}, clean_env()).exit_code == 0);
    CHECK(slurp(dir.file("o.txt")).rfind("workload=busy\nfinal_sim_ps=300000000\ndigest=", 0) == 0);
}

TEST_CASE("nistt-analyze command line") {
    TempDir dir;
    const std::string db = dir.file("t.bin");
    store::TraceLog log;
    auto rec = [](RecordKind k, std::uint64_t sim, std::uint64_t real, std::uint32_t subj = 0, std::uint64_t aux = 0) {
        store::TraceRecord r;
        r.kind = k;
        r.ts = {sim, real};
        r.subject_id = subj;
        r.aux = aux;
        return r;
    };
    log.names = {{0, "cpu"}};
    log.records = {rec(RecordKind::SimStart, 0, 0), rec(RecordKind::NameDef, 0, 0, 0, 3),
                   rec(RecordKind::ProcEnter, 0, 0, 0), rec(RecordKind::ProcSuspend, 0, 1000, 0, 100'000'000),
                   rec(RecordKind::ProcResume, 100'000'000, 1000, 0, 100'000'000),
                   rec(RecordKind::SimEnd, 100'000'000, 2000)};
    store::write_log(log, db);
    const std::string tool = NISTT_ANALYZE;
    auto env = clean_env();

    auto q = run({tool, "quantum", db}, env);
    CHECK(q.exit_code == 0);
    CHECK(q.out == "sim_ps,duration_ps,process\n0,100000000,cpu\n");
    auto qj = run({tool, "quantum", db, "--json"}, env);
    CHECK(nlohmann::json::parse(qj.out)[0]["duration_ps"] == 100000000);
    auto t = run({tool, "table", db}, env);
    CHECK(t.out == "process,compute_time_s,share_pct,complete\ncpu,0.000002,100.000000,1\n"
                   "Total,0.000002,100.000000,1\n");
    auto w = run({tool, "rtf", "--whole-run", db}, env);
    CHECK(w.out == "rtf\n50\n");
    auto e = run({tool, "export", db, "--out", dir.file("e.csv")}, env);
    CHECK(e.exit_code == 0);
    CHECK(slurp(dir.file("e.csv")).rfind("kind,sim_ps,real_ns,subject,flags,aux\nSIM_START,0,0,,0,0\n", 0) == 0);

    // Same input, byte-identical output.
    auto live = dir.file("live.bin");
    REQUIRE(traced("timer_idle", {}, live).exit_code == 0);
    for (const char* sub : {"rtf", "quantum", "events", "episodes", "table", "export"}) {
        auto first = run({tool, sub, live}, env);
        CHECK(first.exit_code == 0);
        CHECK(first.out.size() > 0);
        CHECK(run({tool, sub, live}, env).out == first.out);
    }
    auto ev = run({tool, "events", live, "--event", "arm_timer_ns", "--json"}, env);
    CHECK(nlohmann::json::parse(ev.out)[0]["event"] == "arm_timer_ns");

    auto unknown = run({tool, "quantum", db, "--process", "gpu"}, env);
    CHECK(unknown.exit_code == 3);
    CHECK(unknown.err.find("cpu") != std::string::npos);
    CHECK(run({tool, "rtf", db, "--bucket", "10"}, env).exit_code == 3);
    CHECK(run({tool, "rtf", db, "--bucket", "0ms"}, env).exit_code == 3);
    CHECK(run({tool, "nosuch", db}, env).exit_code == 3);
    CHECK(run({tool, "quantum", dir.file("missing.bin")}, env).exit_code == 2);
    std::ofstream(dir.file("junk.bin")) << "garbage garbage garbage";
    CHECK(run({tool, "table", dir.file("junk.bin")}, env).exit_code == 2);
    CHECK(run({tool, "--help"}, env).exit_code == 0);
}

TEST_CASE("nistt-bench command line") {
    TempDir dir;
    auto env = clean_env();
    const std::string tool = NISTT_BENCH;
    auto bad = run({tool, "--workload", workload("busy"), "--runs", "1"}, env);
    CHECK(bad.exit_code != 0);
    CHECK(bad.err.find("at least 3") != std::string::npos);
    CHECK(run({tool, "--workload", workload("busy"), "--configs", "bogus"}, env).exit_code == 3);

    auto ok = run({tool, "--workload", workload("busy"), "--configs",
                   "reference,intrusive_static,intrusive_shared,nonintrusive_shared", "--traces", "none,process",
                   "--runs", "3", "--warmup", "0", "--format", "json", "--raw", dir.file("raw.csv"), "--",
                   "--syncs", "100"},
                  env);
    REQUIRE(ok.exit_code == 0);
    auto j = nlohmann::json::parse(ok.out);
    REQUIRE(j.size() == 8);
    for (const auto& row : j) {
        CHECK(row["runs"] == 3);
        std::string cfg = row["configuration"];
        std::string ts = row["trace_set"];
        std::uint64_t want = cfg == "reference" ? 0 : ts == "none" ? 2 : 2 * 100 + 4;
        CHECK(row["record_count"] == want);
    }
    std::istringstream raw(slurp(dir.file("raw.csv")));
    std::size_t lines = 0;
    for (std::string l; std::getline(raw, l);)
        ++lines;
    CHECK(lines == 1 + 8 * 3);
}
