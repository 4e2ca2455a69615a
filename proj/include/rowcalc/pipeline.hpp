#pragma once

#include <cstddef>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "rowcalc/calc.hpp"
#include "rowcalc/csv.hpp"
#include "rowcalc/errors.hpp"
#include "rowcalc/value.hpp"

namespace rowcalc {

enum class HeaderPolicy { PassThrough, Validate, None };
enum class FieldCountPolicy { Strict, PadTruncate };
enum class RecordErrorPolicy { FailFast, SkipAndLog };

// How one streaming run binds a file to the workbook. Range and cell fields
// hold range names defined in the workbook.
struct PipelineSpec {
    std::filesystem::path input_path;
    std::filesystem::path output_path;
    std::string input_range = "InputCells";
    std::string output_range = "OutputCells";
    std::optional<std::string> skip_cell;
    CellValue skip_sentinel = std::string("Skip");
    std::optional<std::string> carry_forward_range;
    HeaderPolicy header_policy = HeaderPolicy::PassThrough;
    std::vector<std::string> expected_headers;
    CsvMode csv_mode = CsvMode::Rfc4180;
    FieldCountPolicy field_count_policy = FieldCountPolicy::Strict;
    RecordErrorPolicy on_record_error = RecordErrorPolicy::FailFast;
    std::size_t max_records = 0;  // 0: unlimited
};

struct RunStats {
    std::size_t records_read = 0;
    std::size_t records_written = 0;
    std::size_t records_skipped = 0;
    std::size_t records_errored = 0;
    bool header_passed = false;
    double elapsed_seconds = 0.0;

    bool conserved() const { return records_read == records_written + records_skipped + records_errored; }
};

struct HeaderReport {
    bool ok = true;
    std::size_t position = 0;  // 1-based first differing column, 0 when ok
    std::string found;
    std::string expected;
    std::vector<std::string> warnings;

    std::string message() const;
};

// Positional, case-insensitive comparison of a header record against the
// expected column names. With `trim`, surrounding spaces are ignored but
// reported as warnings.
HeaderReport validate_headers(std::span<const std::string> found, std::span<const std::string> expected, bool trim);

class HeaderMismatch : public ConfigError {
public:
    explicit HeaderMismatch(HeaderReport report);
    HeaderReport report;
};

class FieldCountError : public DataError {
public:
    FieldCountError(std::size_t record, std::size_t line, std::size_t expected, std::size_t found);
    std::size_t record;
    std::size_t expected;
    std::size_t found;
};

class RecordError : public DataError {
public:
    RecordError(std::size_t record, std::size_t line, std::string cell, ErrorCode code);
    std::size_t record;
    std::string cell;
    ErrorCode code;
};

// Prints "records processed: N" to the diagnostic stream every `every_n`
// records. Quiet reporters print nothing.
class ProgressReporter {
public:
    ProgressReporter(std::ostream& out, std::size_t every_n, bool quiet = false);

    void update(std::size_t records_processed);
    std::size_t lines_emitted() const { return lines_; }

private:
    std::ostream& out_;
    std::size_t every_n_;
    bool quiet_;
    std::size_t lines_ = 0;
};

void report_progress(const RunStats& stats, std::size_t every_n, std::ostream& out);

struct PipelineHooks {
    std::ostream* diagnostics = nullptr;
    ProgressReporter* progress = nullptr;
    // Called for every line written to the output, header first.
    std::function<void(const std::string& line, bool is_header)> on_output;
};

// Streams every record through the workbook: write the fields into the input
// range, recalculate, test the skip cell, write the output range, and copy the
// kept output into the carry-forward range. Output order follows input order.
RunStats run_pipeline(const PipelineSpec& spec, Calculator& calc, std::istream& in, std::ostream& out,
                      const PipelineHooks& hooks = {});
RunStats run_pipeline(const PipelineSpec& spec, Calculator& calc, const PipelineHooks& hooks = {});

// ---------------------------------------------------------------------------
// Sorted-file comparison

struct CompareSpec {
    std::filesystem::path left_path;
    std::filesystem::path right_path;
    std::filesystem::path output_path;
    std::string left_range = "LeftCells";
    std::string right_range = "RightCells";
    std::string status_cell = "Status";
    bool has_headings = true;
    bool field_diffs = false;
    CsvMode csv_mode = CsvMode::Rfc4180;
};

enum class DiffSide { LeftOnly, RightOnly, Changed };

struct DiffEntry {
    DiffSide side;
    std::size_t left_index = 0;   // 1-based data record number, 0 when absent
    std::size_t right_index = 0;
    Record left;
    Record right;
    std::vector<std::size_t> changed_fields;  // 1-based, Changed entries only

    friend bool operator==(const DiffEntry&, const DiffEntry&) = default;
};

struct DiffReport {
    std::vector<DiffEntry> entries;
    std::size_t left_records = 0;
    std::size_t right_records = 0;
    std::size_t matched = 0;
};

class StatusCellError : public DataError {
public:
    StatusCellError(std::size_t left_index, std::size_t right_index, const std::string& value);
    std::size_t left_index;
    std::size_t right_index;
};

// Merge loop over two files sorted on the comparison key. The workbook's
// status cell decides each step: LEFT (left record missing on the right),
// RIGHT (the reverse) or MATCH.
DiffReport compare_streams(const CompareSpec& spec, Calculator& calc, std::istream& left, std::istream& right);
DiffReport compare_files(const CompareSpec& spec, Calculator& calc);

// CSV lines: side (LEFT/RIGHT/CHANGED), left index, right index, changed
// field positions (space separated, CHANGED only), then the record fields
// (the right record for RIGHT, otherwise the left one).
std::string render_diff(const DiffReport& report, CsvMode mode = CsvMode::Rfc4180);

}  // namespace rowcalc
