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

#pragma once

#include <cinttypes>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "nistt/simulation.hpp"

namespace nistt::workload {

/// FNV-1a over 64-bit words.
class Digest {
public:
    void mix(std::uint64_t v) {
        for (int i = 0; i < 8; ++i) {
            h_ ^= (v >> (8 * i)) & 0xff;
            h_ *= 0x100000001b3ULL;
        }
    }
    std::uint64_t value() const { return h_; }

private:
    std::uint64_t h_ = 0xcbf29ce484222325ULL;
};

/// Deterministic CPU work standing in for instruction execution.
inline std::uint64_t spin(std::uint64_t state, unsigned iterations) {
    for (unsigned i = 0; i < iterations; ++i) {
        state ^= state << 13;
        state ^= state >> 7;
        state ^= state << 17;
    }
    return state;
}

struct Options {
    std::optional<SimTime> until;
    SimTime quantum = SimTime::from_us(100);
    std::string out;
};

inline CLI::Validator time_validator() {
    return CLI::Validator(
        [](std::string& text) -> std::string {
            return parse_time(text) ? std::string{} : "expected <int><unit> with unit ps|ns|us|ms|s";
        },
        "TIME");
}

/// Common flag handling, simulation lifetime and the digest report.
/// `extra` adds workload-specific flags; `build` spawns processes and
/// returns nothing; the digest it fills is reported with the final time.
inline int run_main(int argc, char** argv, const std::string& name,
                    const std::function<void(CLI::App&)>& extra,
                    const std::function<void(Simulation&, const Options&, Digest&)>& build) {
    CLI::App app{"bundled workload: " + name};
    std::string until_text, quantum_text = "100us";
    Options opts;
    app.add_option("--until", until_text, "stop simulation at <time><unit>")->check(time_validator());
    app.add_option("--quantum", quantum_text, "quantum limit <time><unit>")->check(time_validator());
    app.add_option("--out", opts.out, "write the output digest to this file");
    if (extra)
        extra(app);
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }
    if (!until_text.empty())
        opts.until = parse_time(until_text);
    opts.quantum = *parse_time(quantum_text);
    if (opts.quantum.ps == 0) {
        std::cerr << name << ": quantum must be positive\n";
        return 2;
    }

    Digest digest;
    SimTime final_time;
    {
        KernelConfig cfg;
        cfg.quantum_limit = opts.quantum;
        cfg.run_until = opts.until;
        Simulation sim(cfg);
        build(sim, opts, digest);
        final_time = sim.run();
    }

    std::ostringstream report;
    char hex[17];
    std::snprintf(hex, sizeof hex, "%016" PRIx64, digest.value());
    report << "workload=" << name << "\n"
           << "final_sim_ps=" << final_time.ps << "\n"
           << "digest=" << hex << "\n";
    std::cout << report.str();
    if (!opts.out.empty()) {
        std::ofstream out(opts.out, std::ios::trunc);
        out << report.str();
        if (!out) {
            std::cerr << name << ": cannot write " << opts.out << "\n";
            return 1;
        }
    }
    return 0;
}

} // namespace nistt::workload
