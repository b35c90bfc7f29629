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

#include "nistt/recorder.hpp"

#include <charconv>
#include <cstdio>
#include <cstdlib>
#include <string_view>

namespace nistt::trace {

using store::RecordKind;
using store::TimeStamp;

namespace {

void diagnose(const std::string& msg) { std::fprintf(stderr, "nistt: %s\n", msg.c_str()); }

} // namespace

ShimConfig parse_config(const char* db_path, const char* trace, const char* flush_every) {
    ShimConfig cfg;
    if (db_path && *db_path)
        cfg.db_path = db_path;

    if (trace) {
        cfg.enabled = kNone;
        std::string_view rest(trace);
        while (true) {
            auto comma = rest.find(',');
            std::string_view item = rest.substr(0, comma);
            while (!item.empty() && item.front() == ' ')
                item.remove_prefix(1);
            while (!item.empty() && item.back() == ' ')
                item.remove_suffix(1);
            if (item == "process")
                cfg.enabled |= kProcess;
            else if (item == "quantum")
                cfg.enabled |= kQuantum;
            else if (item == "wait_event")
                cfg.enabled |= kWaitEvent;
            else if (item == "event")
                cfg.enabled |= kEvent;
            else if (item == "all")
                cfg.enabled |= kAll;
            else if (item == "none" || item.empty())
                ;
            else
                cfg.diagnostics.push_back("ignoring unknown trace name '" + std::string(item) + "'");
            if (comma == std::string_view::npos)
                break;
            rest = rest.substr(comma + 1);
        }
    }

    if (flush_every && *flush_every) {
        std::string_view text(flush_every);
        std::uint32_t v = 0;
        auto [p, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
        if (ec != std::errc{} || p != text.data() + text.size() || v == 0)
            cfg.diagnostics.push_back("ignoring invalid " + std::string(kEnvFlushEvery) + " '" +
                                      std::string(text) + "'");
        else
            cfg.flush_every = v;
    }
    return cfg;
}

ShimConfig config_from_env() {
    return parse_config(std::getenv(kEnvDbPath), std::getenv(kEnvTrace), std::getenv(kEnvFlushEvery));
}

std::uint8_t record_categories(RecordKind kind, std::uint8_t flags) {
    switch (kind) {
    case RecordKind::ProcEnter:
        return kProcess;
    case RecordKind::ProcSuspend:
    case RecordKind::ProcResume:
        return kProcess | ((flags & store::kFlagEventReason) ? kWaitEvent : kQuantum);
    case RecordKind::NotifyImmediate:
    case RecordKind::NotifyDelayed:
        return kEvent;
    default:
        return 0;
    }
}

Recorder::Recorder(ShimConfig config, KernelProbe probe)
    : config_(std::move(config)), probe_(probe), anchor_(std::chrono::steady_clock::now()) {
    for (const auto& d : config_.diagnostics)
        diagnose(d);
    auto anchor_ns = static_cast<std::uint64_t>(
        std::chrono::duration_cast<std::chrono::nanoseconds>(anchor_.time_since_epoch()).count());
    try {
        writer_ = std::make_unique<store::Writer>(config_.db_path, anchor_ns, config_.flush_every);
        emit(RecordKind::SimStart, 0, 0, 0, TimeStamp{0, 0});
    } catch (const std::exception& e) {
        fail("tracing disabled", e);
    }
}

Recorder::~Recorder() { finish(); }

TimeStamp Recorder::stamp() const {
    auto elapsed = std::chrono::steady_clock::now() - anchor_;
    return TimeStamp{probe_.now ? probe_.now() : 0,
                     static_cast<std::uint64_t>(
                         std::chrono::duration_cast<std::chrono::nanoseconds>(elapsed).count())};
}

std::uint32_t Recorder::intern(NameKind kind, std::uint64_t handle, TimeStamp ts) {
    std::uint64_t key = handle * 2 + static_cast<std::uint64_t>(kind);
    auto [it, inserted] = ids_.try_emplace(key, next_id_);
    if (!inserted)
        return it->second;
    ++next_id_;
    const char* text = nullptr;
    if (kind == NameKind::Process)
        text = probe_.process_name ? probe_.process_name(handle) : nullptr;
    else
        text = probe_.event_name ? probe_.event_name(handle) : nullptr;
    std::string name = text ? std::string(text) : "unknown_" + std::to_string(handle);
    try {
        if (writer_)
            writer_->append_name(it->second, name, ts);
    } catch (const std::exception& e) {
        fail("tracing disabled", e);
    }
    return it->second;
}

void Recorder::emit(RecordKind kind, std::uint8_t flags, std::uint32_t subject, std::uint64_t aux,
                    TimeStamp ts) {
    if (!writer_)
        return;
    try {
        writer_->append(store::TraceRecord{kind, flags, ts, subject, aux});
    } catch (const std::exception& e) {
        fail("tracing disabled", e);
    }
}

void Recorder::fail(const char* what, const std::exception& e) {
    diagnose(std::string(what) + ": " + e.what());
    writer_.reset();
}

void Recorder::process_enter(std::uint64_t proc) {
    if (!wants(kProcess))
        return;
    auto ts = stamp();
    auto id = intern(NameKind::Process, proc, ts);
    emit(RecordKind::ProcEnter, 0, id, 0, ts);
}

void Recorder::suspend_time(std::uint64_t duration_ps) {
    if (!wants(kProcess | kQuantum))
        return;
    auto ts = stamp();
    auto id = intern(NameKind::Process, probe_.current_process(), ts);
    emit(RecordKind::ProcSuspend, 0, id, duration_ps, ts);
}

void Recorder::resume_time(std::uint64_t duration_ps) {
    if (!wants(kProcess | kQuantum))
        return;
    auto ts = stamp();
    auto id = intern(NameKind::Process, probe_.current_process(), ts);
    emit(RecordKind::ProcResume, 0, id, duration_ps, ts);
}

void Recorder::suspend_event(std::uint64_t ev) {
    if (!wants(kProcess | kWaitEvent))
        return;
    auto ts = stamp();
    auto id = intern(NameKind::Process, probe_.current_process(), ts);
    auto ev_id = intern(NameKind::Event, ev, ts);
    emit(RecordKind::ProcSuspend, store::kFlagEventReason, id, ev_id, ts);
}

void Recorder::resume_event(std::uint64_t ev) {
    if (!wants(kProcess | kWaitEvent))
        return;
    auto ts = stamp();
    auto id = intern(NameKind::Process, probe_.current_process(), ts);
    auto ev_id = intern(NameKind::Event, ev, ts);
    emit(RecordKind::ProcResume, store::kFlagEventReason, id, ev_id, ts);
}

void Recorder::notify(std::uint64_t ev, std::uint64_t delay_ps) {
    if (!wants(kEvent))
        return;
    auto ts = stamp();
    auto id = intern(NameKind::Event, ev, ts);
    emit(delay_ps == 0 ? RecordKind::NotifyImmediate : RecordKind::NotifyDelayed, 0, id, delay_ps, ts);
}

void Recorder::finish() {
    if (finished_)
        return;
    finished_ = true;
    if (!writer_)
        return;
    emit(RecordKind::SimEnd, 0, 0, 0, stamp());
    try {
        if (writer_)
            writer_->close();
    } catch (const std::exception& e) {
        fail("trace store flush failed", e);
    }
    writer_.reset();
}

} // namespace nistt::trace
