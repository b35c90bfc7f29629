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
 * @file kernel.cpp
 * @brief Cooperative loosely-timed scheduler behind the C ABI in kernel.h.
 *
 * Processes are stackful ucontext coroutines. The scheduler runs on the
 * caller's stack inside sk_run(); a process returns control to it only by
 * calling wait_time()/wait_event() or by returning from its entry.
 *
 * Dispatch order within one instant is FIFO by the order processes became
 * runnable. Timed work (wake-ups and delayed event firings) is ordered by
 * (time, insertion sequence).
 *
 * Built twice: plain, and with NISTT_INTRUSIVE defined, which records the
 * traced calls from inside the kernel through the same Recorder the shim uses.
 */

#include "nistt/kernel.h"

#include <ucontext.h>

#include <cstdio>
#include <cstdlib>
#include <deque>
#include <memory>
#include <optional>
#include <queue>
#include <string>
#include <unordered_map>
#include <vector>

#ifdef NISTT_INTRUSIVE
#include "nistt/recorder.hpp"
#endif

namespace {

constexpr std::size_t kStackSize = 256 * 1024;

// Plain data so it stays readable after static destruction (the shim asks
// for the final time from its own destructor).
std::uint64_t g_last_now = 0;

[[noreturn]] void fatal(const char* what) {
    std::fprintf(stderr, "nistt kernel: %s\n", what);
    std::fflush(stderr);
    std::abort();
}

struct Process {
    std::uint32_t id;
    std::string name;
    sk_entry_fn entry;
    void* arg;
    sk_state state = SK_CREATED;
    std::uint64_t local_time = 0;
    ucontext_t ctx{};
    std::unique_ptr<char[]> stack;
};

struct Event {
    std::uint32_t id;
    std::string name;
    std::optional<std::uint64_t> pending;
    std::uint64_t pending_seq = 0;
    std::vector<std::uint32_t> waiters;
};

struct TimedEntry {
    enum class Kind : std::uint8_t { Wake, Fire };
    std::uint64_t when;
    std::uint64_t seq;
    Kind kind;
    std::uint32_t target;

    bool operator>(const TimedEntry& o) const {
        return when != o.when ? when > o.when : seq > o.seq;
    }
};

class Kernel {
public:
    explicit Kernel(const sk_config& cfg) : cfg_(cfg) { g_last_now = 0; }

    const sk_config& config() const { return cfg_; }
    std::uint64_t now() const { return now_; }
    bool started() const { return started_; }

    int spawn(const char* name, sk_entry_fn entry, void* arg, std::uint64_t* out) {
        if (!name || !*name || !entry)
            return SK_EINVAL;
        if (started_)
            return SK_ESTATE;
        if (process_by_name_.count(name))
            return SK_EDUPLICATE;
        auto id = static_cast<std::uint32_t>(processes_.size());
        auto p = std::make_unique<Process>();
        p->id = id;
        p->name = name;
        p->entry = entry;
        p->arg = arg;
        processes_.push_back(std::move(p));
        process_by_name_.emplace(name, id);
        if (out)
            *out = id;
        return SK_OK;
    }

    int create_event(const char* name, std::uint64_t* out) {
        if (!name || !*name)
            return SK_EINVAL;
        if (event_by_name_.count(name))
            return SK_EDUPLICATE;
        auto id = static_cast<std::uint32_t>(events_.size());
        events_.push_back(Event{id, name, std::nullopt, 0, {}});
        event_by_name_.emplace(name, id);
        if (out)
            *out = id;
        return SK_OK;
    }

    Process* process(std::uint64_t id) {
        return id < processes_.size() ? processes_[static_cast<std::size_t>(id)].get() : nullptr;
    }
    Event* event(std::uint64_t id) {
        return id < events_.size() ? &events_[static_cast<std::size_t>(id)] : nullptr;
    }
    Process* current() { return current_; }

    std::uint64_t run(std::uint64_t until) {
        if (current_)
            fatal("sk_run called from inside a process");
        if (!started_) {
            started_ = true;
            for (auto& p : processes_) {
                p->state = SK_RUNNABLE;
                runnable_.push_back(p->id);
            }
        }
        while (true) {
            while (!runnable_.empty()) {
                auto id = runnable_.front();
                runnable_.pop_front();
                dispatch(*processes_[id]);
            }
            while (!timed_.empty() && stale(timed_.top()))
                timed_.pop();
            if (timed_.empty() || timed_.top().when > until)
                break;
            set_now(timed_.top().when);
            while (!timed_.empty() && timed_.top().when == now_) {
                auto entry = timed_.top();
                timed_.pop();
                if (entry.kind == TimedEntry::Kind::Wake) {
                    make_runnable(*processes_[entry.target]);
                } else if (!stale(entry)) {
                    Event& ev = events_[entry.target];
                    ev.pending.reset();
                    fire(ev);
                }
            }
        }
        if (until != SK_UNBOUNDED && now_ < until)
            set_now(until);
        return now_;
    }

    void wait_time(std::uint64_t duration) {
        Process& p = require_current("wait_time");
        p.local_time = 0;
        if (duration == 0) {
            make_runnable(p);
        } else {
            if (duration > SK_UNBOUNDED - now_)
                fatal("wait_time overflows simulation time");
            p.state = SK_WAITING_TIME;
            timed_.push(TimedEntry{now_ + duration, seq_++, TimedEntry::Kind::Wake, p.id});
        }
        yield(p);
    }

    void wait_event(std::uint64_t ev_id) {
        Process& p = require_current("wait_event");
        Event* ev = event(ev_id);
        if (!ev)
            fatal("wait_event on an invalid event handle");
        p.state = SK_WAITING_EVENT;
        ev->waiters.push_back(p.id);
        yield(p);
    }

    void notify(std::uint64_t ev_id, std::uint64_t delay) {
        Event* ev = event(ev_id);
        if (!ev)
            fatal("notify on an invalid event handle");
        if (delay == 0) {
            ev->pending.reset();
            fire(*ev);
            return;
        }
        if (delay > SK_UNBOUNDED - now_)
            fatal("notify delay overflows simulation time");
        std::uint64_t when = now_ + delay;
        if (ev->pending && *ev->pending <= when)
            return;
        ev->pending = when;
        ev->pending_seq = seq_++;
        timed_.push(TimedEntry{when, ev->pending_seq, TimedEntry::Kind::Fire, ev->id});
    }

    void qk_sync(std::uint64_t proc);

    // Called on the process's own stack by process_entry_trampoline.
    void run_entry(Process& p) {
        p.entry(p.arg);
        p.state = SK_TERMINATED;
    }

private:
    static void process_main();

    Process& require_current(const char* op) {
        if (!current_) {
            std::string msg = std::string(op) + " called outside of a process";
            fatal(msg.c_str());
        }
        return *current_;
    }

    // A superseded or cancelled notification; it must not advance time.
    bool stale(const TimedEntry& e) const {
        if (e.kind != TimedEntry::Kind::Fire)
            return false;
        const Event& ev = events_[e.target];
        return !ev.pending || ev.pending_seq != e.seq;
    }

    void set_now(std::uint64_t t) {
        now_ = t;
        g_last_now = t;
    }

    void make_runnable(Process& p) {
        p.state = SK_RUNNABLE;
        runnable_.push_back(p.id);
    }

    void fire(Event& ev) {
        auto waiters = std::move(ev.waiters);
        ev.waiters.clear();
        for (auto id : waiters)
            make_runnable(*processes_[id]);
    }

    void dispatch(Process& p) {
        bool first = p.stack == nullptr;
        if (first) {
            p.stack = std::make_unique<char[]>(kStackSize);
            getcontext(&p.ctx);
            p.ctx.uc_stack.ss_sp = p.stack.get();
            p.ctx.uc_stack.ss_size = kStackSize;
            p.ctx.uc_link = &scheduler_ctx_;
            makecontext(&p.ctx, &Kernel::process_main, 0);
        }
        current_ = &p;
        p.state = SK_RUNNING;
        swapcontext(&scheduler_ctx_, &p.ctx);
        current_ = nullptr;
        if (p.state == SK_TERMINATED)
            p.stack.reset();
    }

    void yield(Process& p) { swapcontext(&p.ctx, &scheduler_ctx_); }

    sk_config cfg_;
    std::uint64_t now_ = 0;
    std::uint64_t seq_ = 0;
    bool started_ = false;
    Process* current_ = nullptr;
    ucontext_t scheduler_ctx_{};
    std::vector<std::unique_ptr<Process>> processes_;
    std::vector<Event> events_;
    std::unordered_map<std::string, std::uint32_t> process_by_name_;
    std::unordered_map<std::string, std::uint32_t> event_by_name_;
    std::deque<std::uint32_t> runnable_;
    std::priority_queue<TimedEntry, std::vector<TimedEntry>, std::greater<>> timed_;
};

Kernel* g_kernel = nullptr;

void Kernel::process_main() {
    // Resolved through the dynamic symbol table so an interposed definition
    // sees the first activation of every process.
    process_entry_trampoline(g_kernel->current_->id);
}

Kernel& require_kernel(const char* op) {
    if (!g_kernel) {
        std::string msg = std::string(op) + " called without a simulation";
        fatal(msg.c_str());
    }
    return *g_kernel;
}

#ifdef NISTT_INTRUSIVE

struct IntrusiveTracer {
    IntrusiveTracer()
        : recorder(nistt::trace::config_from_env(),
                   nistt::trace::KernelProbe{&sk_now, &sk_current_process, &sk_process_name,
                                             &sk_event_name}) {}
    ~IntrusiveTracer() { recorder.finish(); }
    nistt::trace::Recorder recorder;
};

IntrusiveTracer g_tracer;

#define NISTT_TRACE_HOOK(call) g_tracer.recorder.call
#else
#define NISTT_TRACE_HOOK(call) ((void)0)
#endif

} // namespace

void Kernel::qk_sync(std::uint64_t proc) {
    Process* p = process(proc);
    if (!p)
        fatal("qk_sync on an invalid process handle");
    if (p != current_)
        fatal("qk_sync must be called by the process itself");
    // Through the symbol table, like any other caller of wait_time.
    ::wait_time(p->local_time);
    p->local_time = 0;
}

extern "C" {

void sk_default_config(sk_config* cfg) {
    if (!cfg)
        return;
    cfg->quantum_limit_ps = 100'000'000ULL; // 100 us
    cfg->run_until_ps = SK_UNBOUNDED;
    cfg->rng_seed = 0;
}

int sk_create_simulation(const sk_config* cfg) {
    sk_config c;
    sk_default_config(&c);
    if (cfg)
        c = *cfg;
    if (c.quantum_limit_ps == 0)
        return SK_EINVAL;
    if (g_kernel)
        return SK_ESTATE;
    g_kernel = new Kernel(c);
    return SK_OK;
}

void sk_destroy_simulation(void) {
    if (g_kernel && g_kernel->current())
        fatal("sk_destroy_simulation called from inside a process");
    delete g_kernel;
    g_kernel = nullptr;
}

int sk_spawn_process(const char* name, sk_entry_fn entry, void* arg, uint64_t* out_proc) {
    if (!g_kernel)
        return SK_ENOSIM;
    return g_kernel->spawn(name, entry, arg, out_proc);
}

int sk_create_event(const char* name, uint64_t* out_event) {
    if (!g_kernel)
        return SK_ENOSIM;
    return g_kernel->create_event(name, out_event);
}

uint64_t sk_run(uint64_t until_ps) {
    Kernel& k = require_kernel("sk_run");
    std::uint64_t limit = until_ps;
    if (limit == SK_UNBOUNDED)
        limit = k.config().run_until_ps;
    return k.run(limit);
}

uint64_t sk_now(void) { return g_kernel ? g_kernel->now() : g_last_now; }

void sk_qk_inc(uint64_t proc, uint64_t delta_ps) {
    Process* p = require_kernel("sk_qk_inc").process(proc);
    if (!p)
        fatal("sk_qk_inc on an invalid process handle");
    p->local_time += delta_ps;
}

int sk_qk_need_sync(uint64_t proc) {
    Kernel& k = require_kernel("sk_qk_need_sync");
    Process* p = k.process(proc);
    if (!p)
        fatal("sk_qk_need_sync on an invalid process handle");
    return p->local_time >= k.config().quantum_limit_ps ? 1 : 0;
}

void sk_qk_sync(uint64_t proc) { require_kernel("sk_qk_sync").qk_sync(proc); }

uint64_t sk_qk_local_time(uint64_t proc) {
    Process* p = require_kernel("sk_qk_local_time").process(proc);
    return p ? p->local_time : 0;
}

uint64_t sk_qk_quantum_limit(void) { return require_kernel("sk_qk_quantum_limit").config().quantum_limit_ps; }

uint64_t sk_rng_seed(void) { return require_kernel("sk_rng_seed").config().rng_seed; }

uint64_t sk_current_process(void) {
    if (!g_kernel || !g_kernel->current())
        return SK_NO_PROCESS;
    return g_kernel->current()->id;
}

const char* sk_current_process_name(void) {
    if (!g_kernel || !g_kernel->current())
        return nullptr;
    return g_kernel->current()->name.c_str();
}

const char* sk_process_name(uint64_t proc) {
    Process* p = g_kernel ? g_kernel->process(proc) : nullptr;
    return p ? p->name.c_str() : nullptr;
}

const char* sk_event_name(uint64_t ev) {
    Event* e = g_kernel ? g_kernel->event(ev) : nullptr;
    return e ? e->name.c_str() : nullptr;
}

int sk_process_state(uint64_t proc) {
    Process* p = g_kernel ? g_kernel->process(proc) : nullptr;
    return p ? static_cast<int>(p->state) : -1;
}

void process_entry_trampoline(uint64_t proc) {
    Kernel& k = require_kernel("process_entry_trampoline");
    Process* p = k.process(proc);
    if (!p || p != k.current())
        fatal("process_entry_trampoline invoked for a process that is not scheduled");
    NISTT_TRACE_HOOK(process_enter(proc));
    k.run_entry(*p);
}

void wait_time(uint64_t duration_ps) {
    NISTT_TRACE_HOOK(suspend_time(duration_ps));
    require_kernel("wait_time").wait_time(duration_ps);
    NISTT_TRACE_HOOK(resume_time(duration_ps));
}

void wait_event(uint64_t ev) {
    NISTT_TRACE_HOOK(suspend_event(ev));
    require_kernel("wait_event").wait_event(ev);
    NISTT_TRACE_HOOK(resume_event(ev));
}

void notify(uint64_t ev, uint64_t delay_ps) {
    NISTT_TRACE_HOOK(notify(ev, delay_ps));
    require_kernel("notify").notify(ev, delay_ps);
}

} // extern "C"
