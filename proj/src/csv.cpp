#include "rowcalc/csv.hpp"

namespace rowcalc {

CsvError::CsvError(std::size_t line_, const std::string& message)
    : DataError("line " + std::to_string(line_) + ": " + message), line(line_) {}

namespace {

Record split_naive(std::string_view text) {
    Record fields;
    std::size_t start = 0;
    while (true) {
        const std::size_t comma = text.find(',', start);
        if (comma == std::string_view::npos) {
            fields.emplace_back(text.substr(start));
            return fields;
        }
        fields.emplace_back(text.substr(start, comma - start));
        start = comma + 1;
    }
}

// Parses a complete RFC 4180 record. Throws CsvError on text after a closing
// quote or an unterminated quoted field.
Record split_rfc(std::string_view text, std::size_t line) {
    Record fields;
    std::string field;
    std::size_t i = 0;
    while (true) {
        field.clear();
        if (i < text.size() && text[i] == '"') {
            ++i;
            while (true) {
                if (i >= text.size()) throw CsvError(line, "unterminated quoted field");
                if (text[i] == '"') {
                    if (i + 1 < text.size() && text[i + 1] == '"') {
                        field.push_back('"');
                        i += 2;
                        continue;
                    }
                    ++i;
                    break;
                }
                field.push_back(text[i++]);
            }
            if (i < text.size() && text[i] != ',') {
                throw CsvError(line, "unexpected character after closing quote in field " +
                                         std::to_string(fields.size() + 1));
            }
        } else {
            while (i < text.size() && text[i] != ',') field.push_back(text[i++]);
        }
        fields.push_back(field);
        if (i >= text.size()) return fields;
        ++i;  // comma
    }
}

// True when `text` ends inside an open quoted field.
bool inside_quotes(std::string_view text) {
    enum class State { FieldStart, Unquoted, Quoted, QuoteInQuoted };
    State state = State::FieldStart;
    for (char c : text) {
        switch (state) {
            case State::FieldStart:
                state = c == '"' ? State::Quoted : (c == ',' ? State::FieldStart : State::Unquoted);
                break;
            case State::Unquoted:
                if (c == ',') state = State::FieldStart;
                break;
            case State::Quoted:
                if (c == '"') state = State::QuoteInQuoted;
                break;
            case State::QuoteInQuoted:
                state = c == '"' ? State::Quoted : (c == ',' ? State::FieldStart : State::Unquoted);
                break;
        }
    }
    return state == State::Quoted;
}

}  // namespace

bool RecordReader::read_line(std::string& out) {
    if (!std::getline(in_, out)) return false;
    ++line_;
    if (!out.empty() && out.back() == '\r') out.pop_back();
    return true;
}

std::optional<RawRecord> RecordReader::next() {
    std::string line;
    while (true) {
        if (!read_line(line)) return std::nullopt;
        if (!line.empty()) break;
    }
    RawRecord record;
    record.line = line_;
    if (mode_ == CsvMode::NaiveSplit) {
        record.fields = split_naive(line);
        record.raw = std::move(line);
        return record;
    }

    record.raw = std::move(line);
    while (inside_quotes(record.raw)) {
        std::string more;
        if (!read_line(more)) throw CsvError(record.line, "unterminated quoted field");
        record.raw.push_back('\n');
        record.raw += more;
    }
    record.fields = split_rfc(record.raw, record.line);
    return record;
}

Record parse_record(std::string_view text, CsvMode mode) {
    return mode == CsvMode::NaiveSplit ? split_naive(text) : split_rfc(text, 1);
}

std::string format_record(std::span<const std::string> fields, CsvMode mode) {
    std::string out;
    for (std::size_t i = 0; i < fields.size(); ++i) {
        if (i > 0) out.push_back(',');
        const std::string& f = fields[i];
        if (mode == CsvMode::NaiveSplit) {
            if (f.find_first_of("\r\n") != std::string::npos) {
                throw DataError("field " + std::to_string(i + 1) + " contains a line break, which naive-split output cannot represent");
            }
            out += f;
            continue;
        }
        if (f.find_first_of(",\"\r\n") == std::string::npos) {
            out += f;
            continue;
        }
        out.push_back('"');
        for (char c : f) {
            out.push_back(c);
            if (c == '"') out.push_back('"');
        }
        out.push_back('"');
    }
    return out;
}

std::vector<Record> read_all(std::istream& in, CsvMode mode) {
    std::vector<Record> out;
    RecordReader reader(in, mode);
    while (auto r = reader.next()) out.push_back(std::move(r->fields));
    return out;
}

}  // namespace rowcalc
