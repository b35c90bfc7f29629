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

#include "nistt/trace_store.hpp"

#include <fcntl.h>
#include <sys/file.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>
#include <fstream>
#include <iterator>
#include <utility>

namespace nistt::store {

namespace {

constexpr std::string_view kKindNames[kKindCount] = {
    "SIM_START",   "SIM_END",      "NAME_DEF",         "PROC_ENTER",
    "PROC_SUSPEND", "PROC_RESUME", "NOTIFY_IMMEDIATE", "NOTIFY_DELAYED",
};

void put_u16(unsigned char* p, std::uint16_t v) {
    p[0] = static_cast<unsigned char>(v);
    p[1] = static_cast<unsigned char>(v >> 8);
}

void put_u32(unsigned char* p, std::uint32_t v) {
    for (int i = 0; i < 4; ++i)
        p[i] = static_cast<unsigned char>(v >> (8 * i));
}

void put_u64(unsigned char* p, std::uint64_t v) {
    for (int i = 0; i < 8; ++i)
        p[i] = static_cast<unsigned char>(v >> (8 * i));
}

std::uint16_t get_u16(const unsigned char* p) {
    return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}

std::uint32_t get_u32(const unsigned char* p) {
    std::uint32_t v = 0;
    for (int i = 3; i >= 0; --i)
        v = (v << 8) | p[i];
    return v;
}

std::uint64_t get_u64(const unsigned char* p) {
    std::uint64_t v = 0;
    for (int i = 7; i >= 0; --i)
        v = (v << 8) | p[i];
    return v;
}

std::size_t padded(std::uint64_t n) { return static_cast<std::size_t>((n + 7) & ~std::uint64_t{7}); }

std::string errno_text(const std::string& what, const std::string& path) {
    return what + " '" + path + "': " + std::strerror(errno);
}

} // namespace

std::string_view kind_name(RecordKind kind) {
    auto idx = static_cast<std::uint8_t>(kind);
    return idx < kKindCount ? kKindNames[idx] : std::string_view{"UNKNOWN"};
}

bool kind_from_name(std::string_view name, RecordKind& out) {
    for (std::uint8_t i = 0; i < kKindCount; ++i) {
        if (kKindNames[i] == name) {
            out = static_cast<RecordKind>(i);
            return true;
        }
    }
    return false;
}

const std::string* TraceLog::name(std::uint32_t id) const {
    auto it = names.find(id);
    return it == names.end() ? nullptr : &it->second;
}

void encode_header(std::uint64_t anchor_real_ns, unsigned char* out) {
    std::memcpy(out, kMagic, 4);
    put_u16(out + 4, kVersion);
    put_u16(out + 6, 0);
    put_u64(out + 8, anchor_real_ns);
}

void encode_record(const TraceRecord& rec, unsigned char* out) {
    out[0] = static_cast<unsigned char>(rec.kind);
    out[1] = rec.flags;
    put_u16(out + 2, 0);
    put_u32(out + 4, rec.subject_id);
    put_u64(out + 8, rec.ts.sim_ps);
    put_u64(out + 16, rec.ts.real_ns);
    put_u64(out + 24, rec.aux);
}

TraceRecord decode_record(const unsigned char* in) {
    TraceRecord rec;
    rec.kind = static_cast<RecordKind>(in[0]);
    rec.flags = in[1];
    rec.subject_id = get_u32(in + 4);
    rec.ts.sim_ps = get_u64(in + 8);
    rec.ts.real_ns = get_u64(in + 16);
    rec.aux = get_u64(in + 24);
    return rec;
}

// ---------------------------------------------------------------------------
// Writer

Writer::Writer(const std::string& path, std::uint64_t anchor_real_ns, std::uint32_t flush_every)
    : path_(path), flush_every_(flush_every == 0 ? 1 : flush_every) {
    // No O_TRUNC: a second writer must not clobber a locked file.
    fd_ = ::open(path.c_str(), O_WRONLY | O_CREAT | O_CLOEXEC, 0644);
    if (fd_ < 0)
        throw IoError(errno_text("cannot open trace store", path));
    if (::flock(fd_, LOCK_EX | LOCK_NB) != 0) {
        int saved = errno;
        ::close(fd_);
        fd_ = -1;
        errno = saved;
        throw IoError(errno_text("trace store is locked by another writer", path));
    }
    if (::ftruncate(fd_, 0) != 0) {
        int saved = errno;
        ::close(fd_);
        fd_ = -1;
        errno = saved;
        throw IoError(errno_text("cannot truncate trace store", path));
    }
    buffer_.reserve(static_cast<std::size_t>(flush_every_) * kRecordSize + kHeaderSize);
    buffer_.resize(kHeaderSize);
    encode_header(anchor_real_ns, buffer_.data());
}

Writer::~Writer() {
    try {
        close();
    } catch (...) {
        // Destructors stay silent; callers wanting the error call close().
    }
}

Writer::Writer(Writer&& other) noexcept
    : fd_(std::exchange(other.fd_, -1)), path_(std::move(other.path_)),
      buffer_(std::move(other.buffer_)), flush_every_(other.flush_every_),
      pending_(other.pending_), count_(other.count_) {}

Writer& Writer::operator=(Writer&& other) noexcept {
    if (this != &other) {
        try {
            close();
        } catch (...) {
        }
        fd_ = std::exchange(other.fd_, -1);
        path_ = std::move(other.path_);
        buffer_ = std::move(other.buffer_);
        flush_every_ = other.flush_every_;
        pending_ = other.pending_;
        count_ = other.count_;
    }
    return *this;
}

void Writer::append(const TraceRecord& rec) {
    if (fd_ < 0)
        throw IoError("append on closed trace store '" + path_ + "'");
    auto at = buffer_.size();
    buffer_.resize(at + kRecordSize);
    encode_record(rec, buffer_.data() + at);
    ++count_;
    maybe_flush();
}

void Writer::append_name(std::uint32_t id, std::string_view text, TimeStamp ts) {
    if (fd_ < 0)
        throw IoError("append on closed trace store '" + path_ + "'");
    TraceRecord rec;
    rec.kind = RecordKind::NameDef;
    rec.subject_id = id;
    rec.ts = ts;
    rec.aux = text.size();
    auto at = buffer_.size();
    buffer_.resize(at + kRecordSize + padded(text.size()), 0);
    encode_record(rec, buffer_.data() + at);
    std::memcpy(buffer_.data() + at + kRecordSize, text.data(), text.size());
    ++count_;
    maybe_flush();
}

void Writer::maybe_flush() {
    if (++pending_ >= flush_every_)
        flush();
}

void Writer::flush() {
    if (fd_ < 0 || buffer_.empty())
        return;
    const unsigned char* p = buffer_.data();
    std::size_t left = buffer_.size();
    while (left > 0) {
        ssize_t n = ::write(fd_, p, left);
        if (n < 0) {
            if (errno == EINTR)
                continue;
            throw IoError(errno_text("write failed on trace store", path_));
        }
        p += n;
        left -= static_cast<std::size_t>(n);
    }
    buffer_.clear();
    pending_ = 0;
}

void Writer::close() {
    if (fd_ < 0)
        return;
    int fd = fd_;
    try {
        flush();
    } catch (...) {
        fd_ = -1;
        ::close(fd);
        throw;
    }
    fd_ = -1;
    if (::close(fd) != 0)
        throw IoError(errno_text("close failed on trace store", path_));
}

// ---------------------------------------------------------------------------
// Reader

TraceLog decode_log(std::string_view bytes) {
    if (bytes.size() < kHeaderSize || std::memcmp(bytes.data(), kMagic, 4) != 0)
        throw FormatError("not a trace store (bad magic)");
    auto* base = reinterpret_cast<const unsigned char*>(bytes.data());
    TraceLog log;
    log.version = get_u16(base + 4);
    if (log.version != kVersion)
        throw FormatError("unsupported trace store version " + std::to_string(log.version));
    log.anchor_real_ns = get_u64(base + 8);

    std::size_t off = kHeaderSize;
    const std::size_t end = bytes.size();
    while (off < end) {
        if (end - off < kRecordSize) {
            log.truncated = true;
            break;
        }
        TraceRecord rec = decode_record(base + off);
        if (static_cast<std::uint8_t>(rec.kind) >= kKindCount)
            throw FormatError("unknown record kind " + std::to_string(base[off]) + " at offset " +
                              std::to_string(off));
        std::size_t stride = kRecordSize;
        if (rec.kind == RecordKind::NameDef) {
            if (rec.aux > end - off - kRecordSize) {
                log.truncated = true;
                break;
            }
            stride += padded(rec.aux);
            if (stride > end - off) {
                log.truncated = true;
                break;
            }
            log.names[rec.subject_id] =
                std::string(bytes.substr(off + kRecordSize, static_cast<std::size_t>(rec.aux)));
        }
        log.records.push_back(rec);
        off += stride;
    }
    return log;
}

TraceLog read_log(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw IoError(errno_text("cannot open trace store", path));
    std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return decode_log(bytes);
}

std::string encode_log(const TraceLog& log) {
    std::string out(kHeaderSize, '\0');
    auto* hdr = reinterpret_cast<unsigned char*>(out.data());
    encode_header(log.anchor_real_ns, hdr);
    put_u16(hdr + 4, log.version);
    unsigned char buf[kRecordSize];
    for (const auto& rec : log.records) {
        encode_record(rec, buf);
        out.append(reinterpret_cast<const char*>(buf), kRecordSize);
        if (rec.kind == RecordKind::NameDef) {
            const std::string* text = log.name(rec.subject_id);
            std::string_view payload = text ? std::string_view(*text) : std::string_view{};
            // aux is authoritative for the payload length.
            std::string body(padded(rec.aux), '\0');
            std::memcpy(body.data(), payload.data(),
                        std::min<std::size_t>(payload.size(), static_cast<std::size_t>(rec.aux)));
            out += body;
        }
    }
    return out;
}

void write_log(const TraceLog& log, const std::string& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out)
        throw IoError(errno_text("cannot create", path));
    auto bytes = encode_log(log);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out)
        throw IoError(errno_text("write failed", path));
}

} // namespace nistt::store
