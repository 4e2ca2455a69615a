#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "rowcalc/csv.hpp"
#include "rowcalc/errors.hpp"

namespace rowcalc {

enum class SortOrder { Asc, Desc };

// NumericAware: numbers (as parse_number reads them) sort before text and
// compare by value; text compares case-insensitively. Text: case-insensitive
// text for everything.
enum class Collation { NumericAware, Text };

struct SortKey {
    std::size_t column = 1;   // 1-based; ignored when `name` is set
    std::string name;         // header name, requires headings
    SortOrder order = SortOrder::Asc;
    Collation collation = Collation::NumericAware;
};

struct SortSpec {
    std::filesystem::path input_path;
    std::filesystem::path output_path;
    bool has_headings = true;
    std::vector<SortKey> keys{SortKey{}};
    std::size_t memory_budget_rows = 0;  // 0: sort everything in memory
    std::filesystem::path scratch_dir;   // empty: system temp directory
    CsvMode csv_mode = CsvMode::Rfc4180;
    std::size_t max_records = 0;         // 0: unlimited
};

struct SortResult {
    std::size_t rows = 0;  // data rows, heading excluded
    std::size_t runs = 0;  // 1 for an in-memory sort
};

class MissingColumn : public DataError {
public:
    using DataError::DataError;
};

class BadControlTable : public ConfigError {
public:
    BadControlTable(std::string cell, std::string detail);
    std::string cell;  // empty when the problem is not tied to one cell
    std::string detail;
};

// A key with its column resolved to a 0-based index.
struct ResolvedKey {
    std::size_t index = 0;
    SortOrder order = SortOrder::Asc;
    Collation collation = Collation::NumericAware;
};

int compare_fields(std::string_view a, std::string_view b, Collation collation);

// Composite comparison over the keys; <0, 0 or >0.
int compare_records(const Record& a, const Record& b, std::span<const ResolvedKey> keys);

// Resolves named keys against a header row (trimmed, case-insensitive).
std::vector<ResolvedKey> resolve_keys(std::span<const SortKey> keys, const Record* header);

// Stable in-memory sort. Rows lacking a key column throw MissingColumn.
void sort_records(std::vector<Record>& rows, std::span<const ResolvedKey> keys);

// Sorts a delimited file. Rows are written back byte-for-byte (LF line ends),
// the heading stays first, and equal keys keep their input order. With a
// memory budget smaller than the file, sorted runs go to a scratch directory
// and are merged; the result is byte-identical to the in-memory path.
// Scratch files are removed whether or not the sort succeeds.
SortResult sort_file(const SortSpec& spec);

// The four-row sort control table:
//
//   Sort In    | <input path>
//   Sort Out   | <output path>
//   Headings ? | Ascending/Descending
//   y|n        | asc|desc
//
// Values are trimmed; surrounding spaces produce a warning. Anything else
// raises BadControlTable naming the cell (A1 is the block's top-left).
struct SortParams {
    SortSpec spec;
    std::vector<std::string> warnings;
};
SortParams parse_sort_params(const std::vector<std::vector<std::string>>& block);

}  // namespace rowcalc
