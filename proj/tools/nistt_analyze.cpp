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

// nistt-analyze: post-processing of trace stores.
//
// Exit codes: 0 success, 2 unreadable or malformed trace store, 3 bad
// arguments (including an unknown --process).

#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>

#include "CLI11.hpp"
#include "nistt/analyzer.hpp"

namespace {

constexpr int kExitFormat = 2;
constexpr int kExitArgs = 3;

struct Common {
    std::string trace;
    std::string out;
    bool json = false;
};

void add_common(CLI::App* sub, Common& c) {
    sub->add_option("trace", c.trace, "trace store file")->required();
    sub->add_option("--out", c.out, "output file (default: stdout)");
    sub->add_flag("--json", c.json, "emit JSON instead of CSV");
}

class Output {
public:
    explicit Output(const std::string& path) {
        if (!path.empty()) {
            file_ = std::make_unique<std::ofstream>(path, std::ios::trunc);
            if (!*file_)
                throw std::invalid_argument("cannot create output file '" + path + "'");
        }
    }
    std::ostream& stream() { return file_ ? *file_ : std::cout; }

private:
    std::unique_ptr<std::ofstream> file_;
};

} // namespace

int main(int argc, char** argv) {
    using namespace nistt;
    CLI::App app{"Analyze nistt trace stores"};
    app.require_subcommand(1);

    Common c;
    std::string bucket_text = "10ms";
    bool whole_run = false;
    std::string process;
    std::vector<std::string> events;

    auto* rtf = app.add_subcommand("rtf", "real-time factor per sim-time bucket");
    add_common(rtf, c);
    rtf->add_option("--bucket", bucket_text, "bucket width <int><unit>");
    rtf->add_flag("--whole-run", whole_run, "single value over the whole run");

    auto* quantum = app.add_subcommand("quantum", "quantum durations");
    add_common(quantum, c);
    quantum->add_option("--process", process, "exact process name (default: all)");

    auto* evs = app.add_subcommand("events", "event notification timeline");
    add_common(evs, c);
    evs->add_option("--event", events, "exact event name, repeatable (default: all)");

    auto* episodes = app.add_subcommand("episodes", "wait-on-event episodes");
    add_common(episodes, c);

    auto* table = app.add_subcommand("table", "compute time per process");
    add_common(table, c);

    auto* exp = app.add_subcommand("export", "lossless CSV export of every record");
    add_common(exp, c);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? 0 : kExitArgs;
    }

    auto bucket = parse_time(bucket_text);
    if (!bucket || bucket->ps == 0) {
        std::cerr << "nistt-analyze: --bucket expects a positive <int><unit> (ps|ns|us|ms|s)\n";
        return kExitArgs;
    }

    try {
        store::TraceLog log = store::read_log(c.trace);
        if (log.truncated)
            std::cerr << "nistt-analyze: warning: " << c.trace << " ends with a partial record\n";
        Output output(c.out);
        std::ostream& out = output.stream();

        if (*rtf) {
            if (whole_run) {
                auto v = analysis::whole_run_rtf(log);
                char buf[64] = "";
                if (v)
                    std::snprintf(buf, sizeof buf, "%.15g", *v);
                if (c.json)
                    out << "{\"rtf\": " << (v ? buf : "null") << "}\n";
                else
                    out << "rtf\n" << buf << '\n';
            } else {
                auto pts = analysis::compute_rtf(log, *bucket);
                c.json ? analysis::write_rtf_json(out, pts) : analysis::write_rtf_csv(out, pts);
            }
        } else if (*quantum) {
            auto pts = analysis::quantum_points(log, process);
            c.json ? analysis::write_quantum_json(out, pts) : analysis::write_quantum_csv(out, pts);
        } else if (*evs) {
            auto tl = analysis::event_timeline(log, events);
            c.json ? analysis::write_timeline_json(out, tl) : analysis::write_timeline_csv(out, tl);
        } else if (*episodes) {
            auto eps = analysis::wait_event_episodes(log);
            c.json ? analysis::write_episodes_json(out, eps) : analysis::write_episodes_csv(out, eps);
        } else if (*table) {
            auto t = analysis::compute_time_table(log);
            c.json ? analysis::write_table_json(out, t) : analysis::write_table_csv(out, t);
        } else if (*exp) {
            if (c.json) {
                std::cerr << "nistt-analyze: export only supports CSV\n";
                return kExitArgs;
            }
            auto r = store::export_csv(log, out);
            if (r.unresolved != 0)
                std::cerr << "nistt-analyze: warning: " << r.unresolved << " unresolved name ids\n";
        }
        out.flush();
    } catch (const store::FormatError& e) {
        std::cerr << "nistt-analyze: " << e.what() << '\n';
        return kExitFormat;
    } catch (const store::IoError& e) {
        std::cerr << "nistt-analyze: " << e.what() << '\n';
        return kExitFormat;
    } catch (const std::invalid_argument& e) {
        std::cerr << "nistt-analyze: " << e.what() << '\n';
        return kExitArgs;
    }
    return 0;
}
