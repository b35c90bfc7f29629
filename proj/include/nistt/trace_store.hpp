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
 * @file trace_store.hpp
 * @brief Append-only binary trace log: writer, reader and CSV export.
 *
 * File layout (all integers little-endian):
 *
 *   header  16 bytes  "NSTT" | version u16 | reserved u16 | anchor_real_ns u64
 *   record  32 bytes  kind u8 | flags u8 | reserved u16 | subject_id u32 |
 *                     sim_ps u64 | real_ns u64 | aux u64
 *
 * A NAME_DEF record is followed by `aux` bytes of name text, zero-padded to
 * the next multiple of 8. Every other record has a fixed 32-byte stride.
 */

#pragma once

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace nistt::store {

inline constexpr char kMagic[4] = {'N', 'S', 'T', 'T'};
inline constexpr std::uint16_t kVersion = 1;
inline constexpr std::size_t kHeaderSize = 16;
inline constexpr std::size_t kRecordSize = 32;

enum class RecordKind : std::uint8_t {
    SimStart = 0,
    SimEnd = 1,
    NameDef = 2,
    ProcEnter = 3,
    ProcSuspend = 4,
    ProcResume = 5,
    NotifyImmediate = 6,
    NotifyDelayed = 7,
};
inline constexpr std::uint8_t kKindCount = 8;

/// flags bit0: the suspension (or resumption) is caused by an event wait.
inline constexpr std::uint8_t kFlagEventReason = 0x01;

std::string_view kind_name(RecordKind kind);
bool kind_from_name(std::string_view name, RecordKind& out);

struct TimeStamp {
    std::uint64_t sim_ps = 0;
    std::uint64_t real_ns = 0;
    bool operator==(const TimeStamp&) const = default;
};

struct TraceRecord {
    RecordKind kind = RecordKind::SimStart;
    std::uint8_t flags = 0;
    TimeStamp ts;
    std::uint32_t subject_id = 0;
    std::uint64_t aux = 0;
    bool operator==(const TraceRecord&) const = default;

    bool event_reason() const { return (flags & kFlagEventReason) != 0; }
};

struct TraceLog {
    std::uint16_t version = kVersion;
    std::uint64_t anchor_real_ns = 0;
    std::vector<TraceRecord> records;
    std::map<std::uint32_t, std::string> names;
    /// Set when the file ended inside a record or name payload.
    bool truncated = false;

    const std::string* name(std::uint32_t id) const;
};

class FormatError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Single writer per path, enforced with an exclusive advisory lock.
/// Records are buffered and written out every `flush_every` records.
class Writer {
public:
    Writer(const std::string& path, std::uint64_t anchor_real_ns, std::uint32_t flush_every = 4096);
    ~Writer();

    Writer(const Writer&) = delete;
    Writer& operator=(const Writer&) = delete;
    Writer(Writer&& other) noexcept;
    Writer& operator=(Writer&& other) noexcept;

    void append(const TraceRecord& rec);
    /// Appends a NAME_DEF record for `id` carrying `text`.
    void append_name(std::uint32_t id, std::string_view text, TimeStamp ts);
    void flush();
    void close();

    bool is_open() const { return fd_ >= 0; }
    std::uint64_t records_written() const { return count_; }

private:
    void maybe_flush();

    int fd_ = -1;
    std::string path_;
    std::vector<unsigned char> buffer_;
    std::uint32_t flush_every_ = 4096;
    std::uint32_t pending_ = 0;
    std::uint64_t count_ = 0;
};

void encode_header(std::uint64_t anchor_real_ns, unsigned char* out);
void encode_record(const TraceRecord& rec, unsigned char* out);
TraceRecord decode_record(const unsigned char* in);

/// Decodes a complete log image. Throws FormatError on bad magic/version or
/// an unknown record kind; a trailing partial record only sets `truncated`.
TraceLog decode_log(std::string_view bytes);
TraceLog read_log(const std::string& path);

/// Whole-log encoder used by tests and tools that synthesise logs.
std::string encode_log(const TraceLog& log);
void write_log(const TraceLog& log, const std::string& path);

struct CsvExportResult {
    std::size_t rows = 0;
    std::size_t unresolved = 0;
};

/// One row per record: `kind,sim_ps,real_ns,subject,flags,aux`.
CsvExportResult export_csv(const TraceLog& log, std::ostream& out);
CsvExportResult export_csv(const TraceLog& log, const std::string& path);

/// Inverse of export_csv. Name ids are reassigned in NAME_DEF order, which
/// matches the ids written by the recorder.
TraceLog import_csv(std::istream& in);

} // namespace nistt::store
