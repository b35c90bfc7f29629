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

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <random>
#include <sstream>

#include "json.hpp"
#include "nistt/bench.hpp"

namespace nistt::bench {

double median(std::vector<double> sample) {
    if (sample.empty())
        throw BenchError("median of an empty sample");
    std::sort(sample.begin(), sample.end());
    std::size_t n = sample.size();
    return n % 2 ? sample[n / 2] : 0.5 * (sample[n / 2 - 1] + sample[n / 2]);
}

Stats describe(std::vector<double> sample) {
    if (sample.empty())
        throw BenchError("statistics of an empty sample");
    Stats s;
    auto [lo, hi] = std::minmax_element(sample.begin(), sample.end());
    s.min = *lo;
    s.max = *hi;
    s.mean = std::accumulate(sample.begin(), sample.end(), 0.0) / static_cast<double>(sample.size());
    if (sample.size() > 1) {
        double ss = 0;
        for (double v : sample)
            ss += (v - s.mean) * (v - s.mean);
        s.stddev = std::sqrt(ss / static_cast<double>(sample.size() - 1));
    }
    s.median = median(std::move(sample));
    return s;
}

std::vector<SummaryRow> summary_rows(const BenchResult& result) {
    std::vector<SummaryRow> rows;
    auto ref = result.reference_median();
    for (const auto& cell : result.cells) {
        SummaryRow r;
        r.configuration = std::string(config_name(cell.configuration));
        r.trace_set = cell.trace_set;
        r.runs = cell.wall_s.size();
        r.median = cell.stats.median;
        r.mean = cell.stats.mean;
        r.stddev = cell.stats.stddev;
        r.min = cell.stats.min;
        r.max = cell.stats.max;
        r.record_count = cell.record_count;
        r.overhead = ref && *ref > 0 ? cell.stats.median / *ref : 1.0;
        rows.push_back(r);
    }
    return rows;
}

namespace {

std::string num(double v, const char* fmt = "%.6f") {
    char buf[64];
    std::snprintf(buf, sizeof buf, fmt, v);
    return buf;
}

} // namespace

std::string summarize(const BenchResult& result, Format format) {
    auto rows = summary_rows(result);
    std::ostringstream out;
    switch (format) {
    case Format::Csv:
        out << "configuration,trace_set,runs,median_s,mean_s,stddev_s,min_s,max_s,record_count,overhead\n";
        for (const auto& r : rows)
            out << r.configuration << ',' << r.trace_set << ',' << r.runs << ',' << num(r.median) << ','
                << num(r.mean) << ',' << num(r.stddev) << ',' << num(r.min) << ',' << num(r.max) << ','
                << r.record_count << ',' << num(r.overhead, "%.4f") << '\n';
        break;
    case Format::Json: {
        nlohmann::json arr = nlohmann::json::array();
        for (const auto& r : rows)
            arr.push_back({{"configuration", r.configuration},
                           {"trace_set", r.trace_set},
                           {"runs", r.runs},
                           {"median_s", r.median},
                           {"mean_s", r.mean},
                           {"stddev_s", r.stddev},
                           {"min_s", r.min},
                           {"max_s", r.max},
                           {"record_count", r.record_count},
                           {"overhead", r.overhead}});
        out << arr.dump(2) << '\n';
        break;
    }
    case Format::Text: {
        char line[256];
        std::snprintf(line, sizeof line, "%-20s %-16s %5s %10s %10s %10s %10s %10s %10s %9s\n", "configuration",
                      "trace_set", "runs", "median_s", "mean_s", "stddev_s", "min_s", "max_s", "records",
                      "overhead");
        out << line;
        for (const auto& r : rows) {
            std::snprintf(line, sizeof line, "%-20s %-16s %5zu %10.6f %10.6f %10.6f %10.6f %10.6f %10llu %9.4f\n",
                          r.configuration.c_str(), r.trace_set.c_str(), r.runs, r.median, r.mean, r.stddev, r.min,
                          r.max, static_cast<unsigned long long>(r.record_count), r.overhead);
            out << line;
        }
        break;
    }
    }
    return out.str();
}

std::vector<SummaryRow> parse_summary_json(const std::string& text) {
    std::vector<SummaryRow> rows;
    for (const auto& j : nlohmann::json::parse(text)) {
        SummaryRow r;
        r.configuration = j.at("configuration").get<std::string>();
        r.trace_set = j.at("trace_set").get<std::string>();
        r.runs = j.at("runs").get<std::size_t>();
        r.median = j.at("median_s").get<double>();
        r.mean = j.at("mean_s").get<double>();
        r.stddev = j.at("stddev_s").get<double>();
        r.min = j.at("min_s").get<double>();
        r.max = j.at("max_s").get<double>();
        r.record_count = j.at("record_count").get<std::uint64_t>();
        r.overhead = j.at("overhead").get<double>();
        rows.push_back(r);
    }
    return rows;
}

std::string raw_csv(const BenchResult& result) {
    std::ostringstream out;
    out << "configuration,trace_set,run,wall_s\n";
    for (const auto& cell : result.cells)
        for (std::size_t i = 0; i < cell.wall_s.size(); ++i)
            out << config_name(cell.configuration) << ',' << cell.trace_set << ',' << i << ','
                << num(cell.wall_s[i], "%.9f") << '\n';
    return out.str();
}

namespace {

std::vector<double> resample(const std::vector<double>& v, std::mt19937_64& rng) {
    std::uniform_int_distribution<std::size_t> pick(0, v.size() - 1);
    std::vector<double> out(v.size());
    for (auto& x : out)
        x = v[pick(rng)];
    return out;
}

Interval percentile_interval(std::vector<double> stats, double confidence) {
    std::sort(stats.begin(), stats.end());
    double alpha = (1.0 - confidence) / 2.0;
    auto at = [&](double q) {
        double pos = q * static_cast<double>(stats.size() - 1);
        auto i = static_cast<std::size_t>(std::floor(pos));
        std::size_t j = std::min(i + 1, stats.size() - 1);
        return stats[i] + (pos - static_cast<double>(i)) * (stats[j] - stats[i]);
    };
    return Interval{at(alpha), at(1.0 - alpha)};
}

} // namespace

Interval bootstrap_median_difference(const std::vector<double>& a, const std::vector<double>& b, double confidence,
                                     unsigned resamples, std::uint64_t seed) {
    if (a.empty() || b.empty() || resamples == 0)
        throw BenchError("bootstrap needs non-empty samples");
    std::mt19937_64 rng(seed);
    std::vector<double> diffs;
    diffs.reserve(resamples);
    for (unsigned i = 0; i < resamples; ++i)
        diffs.push_back(median(resample(a, rng)) - median(resample(b, rng)));
    return percentile_interval(std::move(diffs), confidence);
}

Interval bootstrap_pooled_difference(const std::vector<std::vector<double>>& a,
                                     const std::vector<std::vector<double>>& b, double scale, double confidence,
                                     unsigned resamples, std::uint64_t seed) {
    if (a.size() != b.size() || a.empty() || scale <= 0 || resamples == 0)
        throw BenchError("pooled bootstrap needs paired, non-empty cells");
    std::mt19937_64 rng(seed);
    std::vector<double> stats;
    stats.reserve(resamples);
    for (unsigned i = 0; i < resamples; ++i) {
        double acc = 0;
        for (std::size_t c = 0; c < a.size(); ++c)
            acc += (median(resample(a[c], rng)) - median(resample(b[c], rng))) / scale;
        stats.push_back(acc / static_cast<double>(a.size()));
    }
    return percentile_interval(std::move(stats), confidence);
}

} // namespace nistt::bench
