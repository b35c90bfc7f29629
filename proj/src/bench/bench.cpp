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

#include "nistt/bench.hpp"

#include <fcntl.h>
#include <spawn.h>
#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <chrono>
#include <cstring>
#include <filesystem>
#include <iostream>

#include "nistt/recorder.hpp"
#include "nistt/trace_store.hpp"

extern char** environ;

namespace nistt::bench {

namespace fs = std::filesystem;

namespace {

constexpr std::pair<Configuration, std::string_view> kNames[] = {
    {Configuration::Reference, "reference"},
    {Configuration::IntrusiveStatic, "intrusive_static"},
    {Configuration::IntrusiveShared, "intrusive_shared"},
    {Configuration::NonintrusiveShared, "nonintrusive_shared"},
};

bool is_executable(const std::string& path) { return ::access(path.c_str(), X_OK) == 0; }

std::string make_scratch_dir() {
    std::string templ = (fs::temp_directory_path() / "nistt-bench-XXXXXX").string();
    if (!::mkdtemp(templ.data()))
        throw BenchError(std::string("cannot create scratch directory: ") + std::strerror(errno));
    return templ;
}

} // namespace

std::string_view config_name(Configuration c) {
    for (auto [cfg, name] : kNames)
        if (cfg == c)
            return name;
    return "unknown";
}

std::optional<Configuration> parse_configuration(std::string_view name) {
    for (auto [cfg, n] : kNames)
        if (n == name)
            return cfg;
    return std::nullopt;
}

std::string variant_path(const std::string& workload, Configuration c) {
    switch (c) {
    case Configuration::IntrusiveStatic:
        return workload + "_i_static";
    case Configuration::IntrusiveShared:
        return workload + "_i_shared";
    default:
        return workload;
    }
}

const Cell* BenchResult::find(Configuration c, std::string_view trace_set) const {
    for (const auto& cell : cells)
        if (cell.configuration == c && cell.trace_set == trace_set)
            return &cell;
    return nullptr;
}

std::optional<double> BenchResult::reference_median() const {
    std::vector<double> all;
    for (const auto& cell : cells)
        if (cell.configuration == Configuration::Reference)
            all.insert(all.end(), cell.wall_s.begin(), cell.wall_s.end());
    if (all.empty())
        return std::nullopt;
    return median(std::move(all));
}

std::vector<std::string> run_environment(Configuration c, const std::string& trace_set,
                                         const std::string& db_path, const std::string& shim_path) {
    std::vector<std::string> env;
    for (char** e = environ; e && *e; ++e) {
        std::string_view kv(*e);
        if (kv.starts_with("LD_PRELOAD=") || kv.starts_with("NISTT_"))
            continue;
        env.emplace_back(kv);
    }
    if (c == Configuration::Reference)
        return env;
    env.push_back(std::string(trace::kEnvDbPath) + "=" + db_path);
    std::string categories = trace_set;
    std::replace(categories.begin(), categories.end(), '+', ',');
    env.push_back(std::string(trace::kEnvTrace) + "=" + categories);
    if (c == Configuration::NonintrusiveShared)
        env.push_back("LD_PRELOAD=" + shim_path);
    return env;
}

RunOutcome run_process(const std::string& exe, const std::vector<std::string>& args,
                       const std::vector<std::string>& env) {
    std::vector<char*> argv;
    argv.push_back(const_cast<char*>(exe.c_str()));
    for (const auto& a : args)
        argv.push_back(const_cast<char*>(a.c_str()));
    argv.push_back(nullptr);
    std::vector<char*> envp;
    for (const auto& e : env)
        envp.push_back(const_cast<char*>(e.c_str()));
    envp.push_back(nullptr);

    posix_spawn_file_actions_t actions;
    posix_spawn_file_actions_init(&actions);
    posix_spawn_file_actions_addopen(&actions, STDOUT_FILENO, "/dev/null", O_WRONLY, 0);

    auto start = std::chrono::steady_clock::now();
    pid_t pid = 0;
    int rc = ::posix_spawn(&pid, exe.c_str(), &actions, nullptr, argv.data(), envp.data());
    posix_spawn_file_actions_destroy(&actions);
    if (rc != 0)
        throw BenchError("cannot spawn '" + exe + "': " + std::strerror(rc));
    int status = 0;
    while (::waitpid(pid, &status, 0) < 0) {
        if (errno != EINTR)
            throw BenchError(std::string("waitpid failed: ") + std::strerror(errno));
    }
    auto end = std::chrono::steady_clock::now();

    RunOutcome out;
    out.wall_s = std::chrono::duration<double>(end - start).count();
    if (WIFEXITED(status))
        out.exit_code = WEXITSTATUS(status);
    else if (WIFSIGNALED(status))
        out.exit_code = 128 + WTERMSIG(status);
    else
        out.exit_code = -1;
    return out;
}

BenchResult run_benchmark(const BenchConfig& cfg) {
    if (cfg.runs < 3)
        throw BenchError("runs must be at least 3 to compute statistics");
    if (cfg.trace_sets.empty())
        throw BenchError("at least one trace set is required");
    if (cfg.configurations.empty())
        throw BenchError("at least one configuration is required");

    BenchResult result;
    struct Plan {
        Configuration configuration;
        std::string exe;
        std::string trace_set;
        std::string db_path;
    };
    std::string scratch = cfg.scratch_dir.empty() ? make_scratch_dir() : cfg.scratch_dir;
    bool own_scratch = cfg.scratch_dir.empty();

    std::vector<Plan> plans;
    for (auto c : cfg.configurations) {
        std::string exe = variant_path(cfg.workload, c);
        if (!is_executable(exe)) {
            result.warnings.push_back("skipping " + std::string(config_name(c)) + ": '" + exe +
                                      "' is not an executable");
            continue;
        }
        if (c == Configuration::NonintrusiveShared && !fs::exists(cfg.shim_path)) {
            result.warnings.push_back("skipping nonintrusive_shared: shim '" + cfg.shim_path + "' not found");
            continue;
        }
        for (const auto& ts : cfg.trace_sets) {
            std::string db = (fs::path(scratch) / (std::string(config_name(c)) + "_" + std::to_string(plans.size()) +
                                                   ".bin"))
                                 .string();
            plans.push_back(Plan{c, exe, ts, db});
            result.cells.push_back(Cell{c, ts, {}, {}, 0});
        }
    }
    for (const auto& w : result.warnings)
        std::cerr << "nistt-bench: warning: " << w << '\n';

    const unsigned rounds = cfg.warmup + cfg.runs;
    for (unsigned round = 0; round < rounds; ++round) {
        for (std::size_t i = 0; i < plans.size(); ++i) {
            const Plan& p = plans[i];
            auto env = run_environment(p.configuration, p.trace_set, p.db_path, cfg.shim_path);
            std::error_code ec;
            fs::remove(p.db_path, ec);
            RunOutcome run = run_process(p.exe, cfg.args, env);
            if (run.exit_code != 0) {
                std::cerr << "nistt-bench: warning: " << p.exe << " exited with " << run.exit_code
                          << ", re-running once\n";
                fs::remove(p.db_path, ec);
                run = run_process(p.exe, cfg.args, env);
                if (run.exit_code != 0)
                    throw BenchError("'" + p.exe + "' failed twice (exit " + std::to_string(run.exit_code) + ")");
            }
            Cell& cell = result.cells[i];
            if (round >= cfg.warmup)
                cell.wall_s.push_back(run.wall_s);
            if (p.configuration == Configuration::Reference) {
                if (fs::exists(p.db_path))
                    throw BenchError("reference run produced a trace store");
                cell.record_count = 0;
            } else if (round + 1 == rounds) {
                cell.record_count = store::read_log(p.db_path).records.size();
            }
            fs::remove(p.db_path, ec);
        }
    }
    for (auto& cell : result.cells)
        cell.stats = describe(cell.wall_s);
    if (own_scratch) {
        std::error_code ec;
        fs::remove_all(scratch, ec);
    }
    return result;
}

} // namespace nistt::bench
