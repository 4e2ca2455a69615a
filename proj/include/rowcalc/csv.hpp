#pragma once

#include <cstddef>
#include <istream>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "rowcalc/errors.hpp"

namespace rowcalc {

enum class CsvMode {
    Rfc4180,     // quoted fields, "" escapes, embedded commas and newlines
    NaiveSplit,  // split each line on every comma, no quote handling
};

using Record = std::vector<std::string>;

struct RawRecord {
    Record fields;
    std::string raw;        // source text without the line terminator
    std::size_t line = 0;   // 1-based line where the record starts
};

class CsvError : public DataError {
public:
    CsvError(std::size_t line, const std::string& message);
    std::size_t line;
};

// Reads delimited records from a stream. Lines end in LF or CRLF. Blank lines
// are skipped.
class RecordReader {
public:
    RecordReader(std::istream& in, CsvMode mode) : in_(in), mode_(mode) {}

    std::optional<RawRecord> next();
    std::size_t line() const { return line_; }

private:
    bool read_line(std::string& out);

    std::istream& in_;
    CsvMode mode_;
    std::size_t line_ = 0;
};

// One line of text, parsed according to mode.
Record parse_record(std::string_view text, CsvMode mode);

// Joins fields with ",". Rfc4180 quotes fields containing a comma, quote, CR
// or LF; NaiveSplit writes fields verbatim and rejects embedded newlines.
std::string format_record(std::span<const std::string> fields, CsvMode mode);

std::vector<Record> read_all(std::istream& in, CsvMode mode);

}  // namespace rowcalc
