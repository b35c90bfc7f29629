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

// A processor that alternates between busy phases and wait-for-interrupt
// idling. Before idling it programs a one-shot timer (a delayed notification
// of `arm_timer_ns`); the interrupt controller turns the expiry into an
// immediate notification of `IRQ[0]_ev`, which wakes the processor.
//
// Idle windows: 0.4 s -> 1.1 s, 1.1 s -> 1.3 s, 1.3 s -> 1.8 s. The processor
// runs quanta otherwise and stops at 2 s. While busy it also programs a short
// 1 ms tick every 10 ms, whose interrupts find nobody waiting.

#include "workload_common.hpp"

using namespace nistt;

namespace {

struct IdleWindow {
    SimTime start;
    SimTime length;
};

} // namespace

int main(int argc, char** argv) {
    unsigned work = 40;
    return workload::run_main(
        argc, argv, "timer_idle",
        [&](CLI::App& app) { app.add_option("--work", work, "spin iterations per execution step"); },
        [&](Simulation& sim, const workload::Options& opts, workload::Digest& digest) {
            auto timer = sim.event("arm_timer_ns");
            auto irq = sim.event("IRQ[0]_ev");
            const SimTime step{opts.quantum.ps / 10 == 0 ? 1 : opts.quantum.ps / 10};

            sim.spawn("processor_thread", [&, timer, irq, step] {
                static constexpr IdleWindow windows[] = {
                    {SimTime::from_ms(400), SimTime::from_ms(700)},
                    {SimTime::from_ms(1100), SimTime::from_ms(200)},
                    {SimTime::from_ms(1300), SimTime::from_ms(500)},
                };
                const SimTime stop = SimTime::from_ms(2000);
                QuantumKeeper qk(this_process());
                std::uint64_t state = 0x2545f4914f6cdd1dULL;
                SimTime next_tick = SimTime::from_ms(10);
                std::size_t next_idle = 0;

                // Busy until `until`, synchronizing whenever the quantum is used up
                // or the next deadline falls inside it.
                auto execute_until = [&](SimTime until) {
                    while (now() + qk.local_time() < until) {
                        state = workload::spin(state, work);
                        SimTime remaining = until - (now() + qk.local_time());
                        qk.inc(remaining < step ? remaining : step);
                        if (now() + qk.local_time() >= next_tick) {
                            qk.sync();
                            // Must expire before the idle timer is programmed:
                            // an earlier pending expiry would win.
                            if (now() + SimTime::from_ms(1) < until)
                                notify(timer, SimTime::from_ms(1));
                            next_tick = now() + SimTime::from_ms(10);
                        } else if (qk.need_sync()) {
                            qk.sync();
                        }
                    }
                    if (qk.local_time().ps != 0)
                        qk.sync();
                    digest.mix(state);
                    digest.mix(now().ps);
                };

                while (next_idle < std::size(windows)) {
                    const auto& w = windows[next_idle++];
                    execute_until(w.start);
                    notify(timer, w.length);
                    wait(irq); // wait for interrupt
                    digest.mix(now().ps);
                    next_tick = now() + SimTime::from_ms(10);
                }
                execute_until(stop);
            });

            sim.spawn("irq_ctrl", [&, timer, irq] {
                while (true) {
                    wait(timer);
                    digest.mix(now().ps);
                    notify(irq);
                }
            });
        });
}
