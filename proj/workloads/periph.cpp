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

// A processor that accesses a peripheral register file. Every handled access
// notifies the register model's `IN_FREE` serialization event and ends the
// current quantum early. Every `--kick-every` accesses the processor writes
// the transmit register, which wakes the peripheral's `tx_process` one
// microsecond later.

#include <array>

#include "workload_common.hpp"

using namespace nistt;

namespace {

class RegisterModel {
public:
    RegisterModel(EventHandle in_free, EventHandle tx) : in_free_(in_free), tx_(tx) {}

    void write(std::size_t addr, std::uint32_t value) {
        regs_[addr % regs_.size()] = value;
        if (addr == kTxData)
            notify(tx_, SimTime::from_us(1));
        notify(in_free_);
    }

    std::uint32_t read(std::size_t addr) {
        auto v = regs_[addr % regs_.size()];
        notify(in_free_);
        return v;
    }

    static constexpr std::size_t kTxData = 0;

private:
    EventHandle in_free_;
    EventHandle tx_;
    std::array<std::uint32_t, 16> regs_{};
};

} // namespace

int main(int argc, char** argv) {
    unsigned accesses = 10000;
    unsigned kick_every = 1000;
    unsigned work = 40;
    return workload::run_main(
        argc, argv, "periph",
        [&](CLI::App& app) {
            app.add_option("--accesses", accesses, "number of register accesses");
            app.add_option("--kick-every", kick_every, "accesses between transmit kicks")
                ->check(CLI::PositiveNumber);
            app.add_option("--work", work, "spin iterations per execution step");
        },
        [&](Simulation& sim, const workload::Options& opts, workload::Digest& digest) {
            auto in_free = sim.event("IN_FREE");
            auto tx = sim.event("tx_ev");
            auto model = std::make_shared<RegisterModel>(in_free, tx);
            const SimTime step{opts.quantum.ps / 10 == 0 ? 1 : opts.quantum.ps / 10};

            sim.spawn("processor_thread", [&, model, step] {
                QuantumKeeper qk(this_process());
                std::uint64_t state = 0x5851f42d4c957f2dULL;
                for (unsigned i = 0; i < accesses; ++i) {
                    // 3..9 execution steps between accesses.
                    for (unsigned k = 0; k < 3 + i % 7; ++k) {
                        state = workload::spin(state, work);
                        qk.inc(step);
                        if (qk.need_sync())
                            qk.sync();
                    }
                    if ((i + 1) % kick_every == 0)
                        model->write(RegisterModel::kTxData, static_cast<std::uint32_t>(state));
                    else if (i % 2 == 0)
                        model->write(1 + i % 15, static_cast<std::uint32_t>(state));
                    else
                        state += model->read(1 + i % 15);
                    qk.sync(); // peripheral access ends the quantum
                    digest.mix(now().ps);
                }
                digest.mix(state);
            });

            sim.spawn("tx_process", [&, tx] {
                while (true) {
                    wait(tx);
                    digest.mix(now().ps ^ 0x7478);
                }
            });
        });
}
