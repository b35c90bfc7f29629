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

// One CPU-like process that never idles: it executes in steps of a tenth of
// the quantum and synchronizes whenever the quantum keeper asks for it.

#include <cstdlib>

#include "workload_common.hpp"

using namespace nistt;

int main(int argc, char** argv) {
    unsigned syncs = 20000;
    unsigned work = 40;
    unsigned abort_after = 0;
    return workload::run_main(
        argc, argv, "busy",
        [&](CLI::App& app) {
            app.add_option("--syncs", syncs, "number of quantum synchronizations");
            app.add_option("--work", work, "spin iterations per execution step");
            app.add_option("--abort-after", abort_after, "abort() after this many syncs (testing)")
                ->group("");
        },
        [&](Simulation& sim, const workload::Options& opts, workload::Digest& digest) {
            SimTime step{opts.quantum.ps / 10 == 0 ? 1 : opts.quantum.ps / 10};
            sim.spawn("cpu", [&, step] {
                QuantumKeeper qk(this_process());
                std::uint64_t state = 0x9e3779b97f4a7c15ULL;
                for (unsigned s = 0; s < syncs; ++s) {
                    while (!qk.need_sync()) {
                        state = workload::spin(state, work);
                        qk.inc(step);
                    }
                    digest.mix(state);
                    digest.mix(qk.local_time().ps);
                    qk.sync();
                    digest.mix(now().ps);
                    if (abort_after != 0 && s + 1 == abort_after)
                        std::abort();
                }
            });
        });
}
