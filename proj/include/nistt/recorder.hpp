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
 * @file recorder.hpp
 * @brief Turns traced kernel calls into trace-store records.
 *
 * Shared by the preloaded shim and by the intrusive kernel build so both
 * produce the same record stream for the same run. Configuration comes from
 * the NISTT_* environment variables. Any I/O failure disables recording and
 * prints one diagnostic on stderr; it never reaches the simulation.
 */

#pragma once

#include <chrono>
#include <cstdint>
#include <memory>
#include <string>
#include <unordered_map>
#include <vector>

#include "nistt/trace_store.hpp"

namespace nistt::trace {

enum Category : std::uint8_t {
    kProcess = 1 << 0,
    kQuantum = 1 << 1,
    kWaitEvent = 1 << 2,
    kEvent = 1 << 3,
    kAll = kProcess | kQuantum | kWaitEvent | kEvent,
    kNone = 0,
};

inline constexpr const char* kEnvDbPath = "NISTT_DB_PATH";
inline constexpr const char* kEnvTrace = "NISTT_TRACE";
inline constexpr const char* kEnvFlushEvery = "NISTT_FLUSH_EVERY";

struct ShimConfig {
    std::string db_path = "./nistt_trace.bin";
    std::uint8_t enabled = kAll;
    std::uint32_t flush_every = 4096;
    /// Problems found while parsing; reported, never fatal.
    std::vector<std::string> diagnostics;
};

/// Null arguments select the defaults.
ShimConfig parse_config(const char* db_path, const char* trace, const char* flush_every);
ShimConfig config_from_env();

/// Category set of a record; zero for bookkeeping records that are always
/// written (SIM_START, SIM_END, NAME_DEF).
std::uint8_t record_categories(store::RecordKind kind, std::uint8_t flags);

/// Read access to the kernel's introspection exports.
struct KernelProbe {
    std::uint64_t (*now)() = nullptr;
    std::uint64_t (*current_process)() = nullptr;
    const char* (*process_name)(std::uint64_t) = nullptr;
    const char* (*event_name)(std::uint64_t) = nullptr;
};

class Recorder {
public:
    /// Opens the store and writes SIM_START. The real-time anchor is taken
    /// here. If the store cannot be opened the recorder stays inactive.
    Recorder(ShimConfig config, KernelProbe probe);
    ~Recorder();

    Recorder(const Recorder&) = delete;
    Recorder& operator=(const Recorder&) = delete;

    bool active() const { return writer_ != nullptr; }
    bool wants(std::uint8_t categories) const { return active() && (config_.enabled & categories); }
    const ShimConfig& config() const { return config_; }

    void process_enter(std::uint64_t proc);
    void suspend_time(std::uint64_t duration_ps);
    void resume_time(std::uint64_t duration_ps);
    void suspend_event(std::uint64_t ev);
    void resume_event(std::uint64_t ev);
    void notify(std::uint64_t ev, std::uint64_t delay_ps);

    /// Writes SIM_END and closes the store. Idempotent.
    void finish();

private:
    enum class NameKind : std::uint8_t { Process, Event };

    store::TimeStamp stamp() const;
    std::uint32_t intern(NameKind kind, std::uint64_t handle, store::TimeStamp ts);
    void emit(store::RecordKind kind, std::uint8_t flags, std::uint32_t subject, std::uint64_t aux,
              store::TimeStamp ts);
    void fail(const char* what, const std::exception& e);

    ShimConfig config_;
    KernelProbe probe_;
    std::chrono::steady_clock::time_point anchor_;
    std::unique_ptr<store::Writer> writer_;
    // key: handle * 2 + kind
    std::unordered_map<std::uint64_t, std::uint32_t> ids_;
    std::uint32_t next_id_ = 0;
    bool finished_ = false;
};

} // namespace nistt::trace
