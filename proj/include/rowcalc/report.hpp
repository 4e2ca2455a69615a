#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "rowcalc/csv.hpp"
#include "rowcalc/errors.hpp"
#include "rowcalc/pipeline.hpp"

namespace rowcalc {

enum class Aggregate { Sum, Count };
enum class ReportFormat { Csv, AlignedText };

class UnknownColumn : public ConfigError {
public:
    explicit UnknownColumn(std::string column);
    std::string column;
};

class NonNumericMeasure : public DataError {
public:
    NonNumericMeasure(std::size_t record, std::string column, const std::string& value);
    std::size_t record;  // 1-based data record
    std::string column;
};

// Maps column names (trimmed, case-insensitive) to 0-based indices. Aliases
// let configuration keep using an old name after a heading changes.
class HeaderTranslation {
public:
    HeaderTranslation() = default;
    static HeaderTranslation from_header(std::span<const std::string> header);

    void add_column(std::string_view name, std::size_t index);
    // `alias` resolves wherever `column` does. Throws UnknownColumn.
    void add_alias(std::string_view alias, std::string_view column);

    std::optional<std::size_t> find(std::string_view name) const;
    std::size_t resolve(std::string_view name) const;  // throws UnknownColumn

private:
    static std::string key(std::string_view name);
    std::map<std::string, std::size_t> index_;
};

struct SubtotalJob {
    std::vector<std::string> measures;
    std::vector<std::string> group_by;
    Aggregate aggregate = Aggregate::Sum;
    std::vector<std::size_t> measure_columns;  // 0-based, filled by resolution
    std::vector<std::size_t> group_columns;

    friend bool operator==(const SubtotalJob&, const SubtotalJob&) = default;
};

struct SubtotalSpec {
    std::vector<SubtotalJob> jobs;
    std::vector<std::string> warnings;
};

// Splits a comma-separated column list; empty items are dropped. Names with
// surrounding spaces are trimmed and reported through `warnings`.
std::vector<std::string> split_column_list(std::string_view text, std::string_view where,
                                           std::vector<std::string>& warnings);

// Resolves the job's names to columns. Throws UnknownColumn, or
// BadControlTable when a column is both measured and grouped.
void resolve_job(SubtotalJob& job, const HeaderTranslation& translation);

// The subtotal control table: one job per row, measures in the first cell and
// group-by columns in the second, an optional third cell holding "sum" or
// "count". A leading label row ("Subtotal these ...") is skipped.
SubtotalSpec parse_subtotal_spec(const std::vector<std::vector<std::string>>& block,
                                 const HeaderTranslation& translation);

struct ReportRow {
    std::vector<std::string> key;
    std::vector<double> values;

    friend bool operator==(const ReportRow&, const ReportRow&) = default;
};

struct ReportTable {
    std::vector<std::string> key_names;
    std::vector<std::string> value_names;  // "Sum of X" / "Count of X"
    std::vector<ReportRow> rows;           // ascending by key tuple
};

struct AggregateStats {
    std::size_t records = 0;
    std::size_t errored = 0;
};

// One row per distinct group-key tuple. Sums accumulate in input order.
// Non-numeric measures raise NonNumericMeasure under fail-fast; under
// skip-and-log the record is left out and counted as errored.
ReportTable aggregate(std::span<const Record> records, const SubtotalJob& job,
                      RecordErrorPolicy policy = RecordErrorPolicy::FailFast, AggregateStats* stats = nullptr,
                      std::ostream* diagnostics = nullptr);

std::string render_report(const ReportTable& table, ReportFormat format);

}  // namespace rowcalc
