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
 * @file bench.hpp
 * @brief Tracing-overhead study: one workload under up to four tracing
 *        configurations and several trace-category sets, N runs each.
 *
 * Configurations:
 *   reference            <workload>            no tracing
 *   intrusive_static     <workload>_i_static   tracing compiled into a static kernel
 *   intrusive_shared     <workload>_i_shared   tracing compiled into the shared kernel
 *   nonintrusive_shared  <workload> + LD_PRELOAD=<shim>
 *
 * Every run is a fresh subprocess whose environment is assembled from
 * scratch for that run. Runs are strictly sequential and interleaved
 * round-robin across cells so slow drifts of the machine affect all cells
 * alike. Warmup rounds are executed and discarded.
 */

#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace nistt::bench {

enum class Configuration { Reference, IntrusiveStatic, IntrusiveShared, NonintrusiveShared };

std::string_view config_name(Configuration c);
std::optional<Configuration> parse_configuration(std::string_view name);
/// Executable that implements `c` for the reference workload binary.
std::string variant_path(const std::string& workload, Configuration c);

class BenchError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct BenchConfig {
    std::string workload;
    std::vector<std::string> args;
    std::vector<Configuration> configurations;
    /// Trace-category sets, e.g. "none", "quantum", "process+event" ('+'
    /// joins categories; it becomes ',' in NISTT_TRACE).
    std::vector<std::string> trace_sets{"none"};
    unsigned runs = 20;
    unsigned warmup = 2;
    std::string shim_path;
    /// Directory for per-run trace stores; a fresh temporary one when empty.
    std::string scratch_dir;
};

struct Stats {
    double median = 0, mean = 0, stddev = 0, min = 0, max = 0;
};

/// Sample statistics (stddev with n-1). Requires a non-empty sample.
Stats describe(std::vector<double> sample);
double median(std::vector<double> sample);

struct Cell {
    Configuration configuration;
    std::string trace_set;
    std::vector<double> wall_s; // post-warmup runs, in execution order
    Stats stats;
    std::uint64_t record_count = 0;
};

struct BenchResult {
    std::vector<Cell> cells;
    std::vector<std::string> warnings;

    const Cell* find(Configuration c, std::string_view trace_set) const;
    /// Median over every reference run, or nullopt without reference cells.
    std::optional<double> reference_median() const;
};

struct RunOutcome {
    int exit_code = 0;
    double wall_s = 0;
};

/// Environment for one run of `c`: the parent environment minus LD_PRELOAD
/// and NISTT_*, plus what the configuration needs.
std::vector<std::string> run_environment(Configuration c, const std::string& trace_set,
                                         const std::string& db_path, const std::string& shim_path);

/// Spawns `exe args...` with exactly `env`, stdout discarded, and measures
/// wall time around spawn and reap with the monotonic clock.
RunOutcome run_process(const std::string& exe, const std::vector<std::string>& args,
                       const std::vector<std::string>& env);

BenchResult run_benchmark(const BenchConfig& cfg);

struct SummaryRow {
    std::string configuration;
    std::string trace_set;
    std::size_t runs = 0;
    double median = 0, mean = 0, stddev = 0, min = 0, max = 0;
    std::uint64_t record_count = 0;
    double overhead = 1.0; // median / reference median
    bool operator==(const SummaryRow&) const = default;
};

enum class Format { Csv, Json, Text };

std::vector<SummaryRow> summary_rows(const BenchResult& result);
std::string summarize(const BenchResult& result, Format format);
std::vector<SummaryRow> parse_summary_json(const std::string& text);
/// One row per measured run: configuration,trace_set,run,wall_s.
std::string raw_csv(const BenchResult& result);

struct Interval {
    double lo = 0, hi = 0;
    bool contains(double v) const { return lo <= v && v <= hi; }
};

/// Percentile-bootstrap interval for median(a) - median(b).
Interval bootstrap_median_difference(const std::vector<double>& a, const std::vector<double>& b,
                                     double confidence = 0.95, unsigned resamples = 10000,
                                     std::uint64_t seed = 0x5eed);

/// Percentile-bootstrap interval for the mean over paired cells of
/// (median(a_i) - median(b_i)) / scale.
Interval bootstrap_pooled_difference(const std::vector<std::vector<double>>& a,
                                     const std::vector<std::vector<double>>& b, double scale,
                                     double confidence = 0.95, unsigned resamples = 10000,
                                     std::uint64_t seed = 0x5eed);

} // namespace nistt::bench
