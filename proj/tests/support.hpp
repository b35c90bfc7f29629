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

// Helpers shared by the test binaries and the acceptance suite.

#pragma once

#include <fcntl.h>
#include <spawn.h>
#include <stdlib.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "nistt/trace_store.hpp"

extern char** environ;

namespace nistt::testing {

class TempDir {
public:
    TempDir() {
        std::string templ = (std::filesystem::temp_directory_path() / "nistt-test-XXXXXX").string();
        if (!::mkdtemp(templ.data()))
            throw std::runtime_error("mkdtemp failed");
        path_ = templ;
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    std::string file(const std::string& name) const { return (path_ / name).string(); }
    const std::filesystem::path& path() const { return path_; }

private:
    std::filesystem::path path_;
};

inline std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

struct Captured {
    int exit_code = -1;
    std::string out;
    std::string err;
};

/// Parent environment minus LD_PRELOAD and NISTT_*, plus `extra`.
inline std::vector<std::string> clean_env(const std::vector<std::string>& extra = {}) {
    std::vector<std::string> env;
    for (char** e = environ; e && *e; ++e) {
        std::string kv(*e);
        if (kv.rfind("LD_PRELOAD=", 0) == 0 || kv.rfind("NISTT_", 0) == 0)
            continue;
        env.push_back(kv);
    }
    env.insert(env.end(), extra.begin(), extra.end());
    return env;
}

/// Runs `argv` with exactly `env`, capturing stdout and stderr.
inline Captured run(const std::vector<std::string>& argv, const std::vector<std::string>& env) {
    TempDir dir;
    std::string out_path = dir.file("out"), err_path = dir.file("err");
    posix_spawn_file_actions_t actions;
    posix_spawn_file_actions_init(&actions);
    posix_spawn_file_actions_addopen(&actions, STDOUT_FILENO, out_path.c_str(), O_WRONLY | O_CREAT | O_TRUNC, 0644);
    posix_spawn_file_actions_addopen(&actions, STDERR_FILENO, err_path.c_str(), O_WRONLY | O_CREAT | O_TRUNC, 0644);
    std::vector<char*> args, envp;
    for (const auto& a : argv)
        args.push_back(const_cast<char*>(a.c_str()));
    args.push_back(nullptr);
    for (const auto& e : env)
        envp.push_back(const_cast<char*>(e.c_str()));
    envp.push_back(nullptr);
    pid_t pid = 0;
    Captured c;
    int rc = ::posix_spawn(&pid, argv[0].c_str(), &actions, nullptr, args.data(), envp.data());
    posix_spawn_file_actions_destroy(&actions);
    if (rc != 0)
        return c;
    int status = 0;
    while (::waitpid(pid, &status, 0) < 0 && errno == EINTR) {
    }
    if (WIFEXITED(status))
        c.exit_code = WEXITSTATUS(status);
    else if (WIFSIGNALED(status))
        c.exit_code = 128 + WTERMSIG(status);
    c.out = slurp(out_path);
    c.err = slurp(err_path);
    return c;
}

/// Random but well-formed log: names are defined before use and ids are
/// assigned 0, 1, ... in NAME_DEF order, like the recorder does.
inline store::TraceLog random_log(std::mt19937_64& rng, std::size_t max_records = 40) {
    using store::RecordKind;
    store::TraceLog log;
    log.anchor_real_ns = rng();
    std::size_t n = rng() % (max_records + 1);
    std::uint32_t next_id = 0;
    static const char* alphabet = "abcXYZ_[]0 ,\"#";
    for (std::size_t i = 0; i < n; ++i) {
        store::TraceRecord r;
        r.ts.sim_ps = rng();
        r.ts.real_ns = rng();
        r.flags = static_cast<std::uint8_t>(rng());
        r.aux = rng();
        auto kind = static_cast<RecordKind>(rng() % store::kKindCount);
        if (kind == RecordKind::NameDef || next_id == 0) {
            std::string text;
            std::size_t len = rng() % 20;
            for (std::size_t k = 0; k < len; ++k)
                text += alphabet[rng() % 14];
            r.kind = RecordKind::NameDef;
            r.subject_id = next_id;
            r.aux = text.size();
            r.flags = 0;
            log.names[next_id++] = text;
        } else {
            r.kind = kind;
            if (kind == RecordKind::SimStart || kind == RecordKind::SimEnd)
                r.subject_id = 0;
            else
                r.subject_id = static_cast<std::uint32_t>(rng() % next_id);
        }
        log.records.push_back(r);
    }
    return log;
}

/// Record sequence with real time removed, for comparing tracers.
inline std::vector<store::TraceRecord> without_real_time(const store::TraceLog& log) {
    auto recs = log.records;
    for (auto& r : recs)
        r.ts.real_ns = 0;
    return recs;
}

/// Round-trip and truncation-recovery properties over `cases` random logs.
/// Returns a description of the first violation, or an empty string.
inline std::string store_property_violation(std::uint64_t seed, std::size_t cases) {
    std::mt19937_64 rng(seed);
    for (std::size_t c = 0; c < cases; ++c) {
        store::TraceLog log = random_log(rng);
        std::string bytes = store::encode_log(log);
        store::TraceLog back = store::decode_log(bytes);
        if (back.records != log.records || back.names != log.names || back.anchor_real_ns != log.anchor_real_ns ||
            back.truncated)
            return "round trip differs in case " + std::to_string(c);

        // Record boundaries computed from the layout: 32 bytes per record,
        // name text padded to 8 after a NAME_DEF.
        std::vector<std::size_t> ends;
        std::size_t off = store::kHeaderSize;
        for (const auto& r : log.records) {
            off += store::kRecordSize;
            if (r.kind == store::RecordKind::NameDef)
                off += (r.aux + 7) / 8 * 8;
            ends.push_back(off);
        }
        if (off != bytes.size())
            return "encoded size mismatch in case " + std::to_string(c);

        for (int t = 0; t < 4; ++t) {
            std::size_t len = store::kHeaderSize + rng() % (bytes.size() - store::kHeaderSize + 1);
            store::TraceLog cut = store::decode_log(std::string_view(bytes).substr(0, len));
            std::size_t complete = 0;
            while (complete < ends.size() && ends[complete] <= len)
                ++complete;
            bool boundary = len == store::kHeaderSize || (complete > 0 && ends[complete - 1] == len);
            if (cut.records.size() != complete || cut.truncated == boundary)
                return "truncation at " + std::to_string(len) + " in case " + std::to_string(c);
            for (std::size_t i = 0; i < complete; ++i)
                if (!(cut.records[i] == log.records[i]))
                    return "truncated prefix differs in case " + std::to_string(c);
        }
    }
    return {};
}

/// Log whose real time runs exactly `slowdown` times slower than simulated
/// time: real_ns = slowdown * sim_ps / 1000. Sim steps are multiples of
/// 1000 ps so every value is an exact integer.
inline store::TraceLog proportional_log(std::mt19937_64& rng, std::size_t records, std::uint64_t max_step_ps,
                                        std::uint64_t slowdown) {
    store::TraceLog log;
    std::uint64_t sim = 0;
    for (std::size_t i = 0; i < records; ++i) {
        store::TraceRecord r;
        r.kind = i == 0 ? store::RecordKind::SimStart
                        : i + 1 == records ? store::RecordKind::SimEnd : store::RecordKind::ProcSuspend;
        if (i > 0)
            sim += rng() % (max_step_ps / 1000 + 1) * 1000;
        r.ts = {sim, slowdown * sim / 1000};
        log.records.push_back(r);
    }
    return log;
}

} // namespace nistt::testing
