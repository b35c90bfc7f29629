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

#include <charconv>
#include <fstream>
#include <ostream>
#include <istream>
#include <map>
#include <sstream>
#include <vector>

#include "nistt/trace_store.hpp"

namespace nistt::store {

namespace {

constexpr const char* kCsvHeader = "kind,sim_ps,real_ns,subject,flags,aux";

bool has_subject(RecordKind kind) {
    return kind != RecordKind::SimStart && kind != RecordKind::SimEnd;
}

template <typename T>
T parse_number(std::string_view field, std::size_t line) {
    T v{};
    auto [p, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
    if (ec != std::errc{} || p != field.data() + field.size())
        throw FormatError("csv line " + std::to_string(line) + ": bad number '" +
                          std::string(field) + "'");
    return v;
}

// Names are quoted when they contain a delimiter or a quote, or could be
// mistaken for an `#id` placeholder.
void write_name(std::ostream& out, const std::string& name) {
    bool quote = name.find_first_of(",\"\r\n") != std::string::npos || name.empty() || name.front() == '#';
    if (!quote) {
        out << name;
        return;
    }
    out << '"';
    for (char c : name) {
        if (c == '"')
            out << '"';
        out << c;
    }
    out << '"';
}

// Splits one CSV record into fields; a quoted field may span lines.
bool read_row(std::istream& in, std::vector<std::string>& fields, std::vector<bool>& quoted, std::size_t& lineno) {
    fields.assign(1, {});
    quoted.assign(1, false);
    std::string line;
    if (!std::getline(in, line))
        return false;
    ++lineno;
    bool in_quotes = false;
    for (std::size_t i = 0;; ++i) {
        if (i == line.size()) {
            if (!in_quotes)
                break;
            fields.back() += '\n';
            if (!std::getline(in, line))
                throw FormatError("csv line " + std::to_string(lineno) + ": unterminated quote");
            ++lineno;
            i = static_cast<std::size_t>(-1);
            continue;
        }
        char c = line[i];
        if (in_quotes) {
            if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
                fields.back() += '"';
                ++i;
            } else if (c == '"') {
                in_quotes = false;
            } else {
                fields.back() += c;
            }
        } else if (c == ',') {
            fields.emplace_back();
            quoted.push_back(false);
        } else if (c == '"' && fields.back().empty()) {
            in_quotes = true;
            quoted.back() = true;
        } else {
            fields.back() += c;
        }
    }
    return true;
}

} // namespace

CsvExportResult export_csv(const TraceLog& log, std::ostream& out) {
    CsvExportResult result;
    // Text shared by several ids (a process and an event with the same name)
    // is written as `#id` so the export stays lossless.
    std::map<std::string_view, unsigned> uses;
    for (const auto& [id, text] : log.names)
        ++uses[text];
    out << kCsvHeader << '\n';
    for (const auto& rec : log.records) {
        out << kind_name(rec.kind) << ',' << rec.ts.sim_ps << ',' << rec.ts.real_ns << ',';
        if (rec.kind == RecordKind::NameDef) {
            const std::string* n = log.name(rec.subject_id);
            write_name(out, n ? *n : std::string{});
        } else if (has_subject(rec.kind)) {
            const std::string* n = log.name(rec.subject_id);
            if (n && uses[*n] == 1) {
                write_name(out, *n);
            } else if (n) {
                out << '#' << rec.subject_id;
            } else {
                out << '#' << rec.subject_id;
                ++result.unresolved;
            }
        }
        out << ',' << static_cast<unsigned>(rec.flags) << ',' << rec.aux << '\n';
        ++result.rows;
    }
    return result;
}

CsvExportResult export_csv(const TraceLog& log, const std::string& path) {
    std::ofstream out(path, std::ios::trunc);
    if (!out)
        throw IoError("cannot create '" + path + "'");
    auto r = export_csv(log, out);
    out.flush();
    if (!out)
        throw IoError("write failed on '" + path + "'");
    return r;
}

TraceLog import_csv(std::istream& in) {
    TraceLog log;
    std::string header;
    if (!std::getline(in, header) || header != kCsvHeader)
        throw FormatError("csv: missing or unexpected header");

    std::map<std::string, std::uint32_t, std::less<>> by_name;
    std::uint32_t next_id = 0;
    std::size_t lineno = 1;
    std::vector<std::string> fields;
    std::vector<bool> quoted;
    while (read_row(in, fields, quoted, lineno)) {
        if (fields.size() == 1 && fields[0].empty() && !quoted[0])
            continue;
        if (fields.size() != 6)
            throw FormatError("csv line " + std::to_string(lineno) + ": expected 6 fields");
        TraceRecord rec;
        if (!kind_from_name(fields[0], rec.kind))
            throw FormatError("csv line " + std::to_string(lineno) + ": unknown kind");
        rec.ts.sim_ps = parse_number<std::uint64_t>(fields[1], lineno);
        rec.ts.real_ns = parse_number<std::uint64_t>(fields[2], lineno);
        unsigned flags = parse_number<unsigned>(fields[4], lineno);
        if (flags > 0xff)
            throw FormatError("csv line " + std::to_string(lineno) + ": flags out of range");
        rec.flags = static_cast<std::uint8_t>(flags);
        rec.aux = parse_number<std::uint64_t>(fields[5], lineno);

        const std::string& subject = fields[3];
        if (rec.kind == RecordKind::NameDef) {
            rec.subject_id = next_id++;
            by_name.emplace(subject, rec.subject_id);
            log.names[rec.subject_id] = subject;
        } else if (has_subject(rec.kind)) {
            if (!quoted[3] && !subject.empty() && subject.front() == '#') {
                rec.subject_id = parse_number<std::uint32_t>(std::string_view(subject).substr(1), lineno);
            } else {
                auto it = by_name.find(subject);
                if (it == by_name.end())
                    throw FormatError("csv line " + std::to_string(lineno) + ": undefined name '" + subject + "'");
                rec.subject_id = it->second;
            }
        }
        log.records.push_back(rec);
    }
    return log;
}

} // namespace nistt::store
