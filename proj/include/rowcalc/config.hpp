#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "rowcalc/address.hpp"
#include "rowcalc/errors.hpp"
#include "rowcalc/pipeline.hpp"
#include "rowcalc/report.hpp"
#include "rowcalc/sortio.hpp"
#include "rowcalc/workbook.hpp"

namespace rowcalc {

// A configuration problem tied to a line of a file. what() reads
// "<path>:<line>: <detail>".
class ConfigFileError : public ConfigError {
public:
    ConfigFileError(std::string path, std::size_t line, std::string detail);
    std::string path;
    std::size_t line;
    std::string detail;
};

// Definition files.
class DefinitionSyntaxError : public ConfigFileError {
public:
    using ConfigFileError::ConfigFileError;
};
class DuplicateCell : public ConfigFileError {
public:
    using ConfigFileError::ConfigFileError;
};
class NameOutOfBounds : public ConfigFileError {
public:
    using ConfigFileError::ConfigFileError;
};
class DefinitionCycle : public ConfigFileError {
public:
    DefinitionCycle(std::string path, std::size_t line, std::vector<CellAddress> cells, const std::string& detail);
    std::vector<CellAddress> cells;
};

// Job files.
class UnknownSection : public ConfigFileError {
public:
    using ConfigFileError::ConfigFileError;
};
class UnknownKey : public ConfigFileError {
public:
    using ConfigFileError::ConfigFileError;
};
class UnknownRangeName : public ConfigFileError {
public:
    using ConfigFileError::ConfigFileError;
};

// Reads configuration files and counts every read, so callers (and tests)
// can confirm that a run fetches its configuration once.
class FileLoader {
public:
    virtual ~FileLoader() = default;

    // Contents of the file, or nullopt when it cannot be read.
    virtual std::optional<std::string> read(const std::filesystem::path& path);

    std::size_t reads() const { return total_; }
    std::size_t reads_of(const std::filesystem::path& path) const;

private:
    std::map<std::string, std::size_t> counts_;
    std::size_t total_ = 0;
};

// Line-oriented workbook definition:
//
//   # comment
//   format = 1
//   [sheet Main]
//   cell A1 = Id            text (trimmed)
//   cell A2 = "  padded "   quoted text, "" for one quote
//   cell B2 = 42            number
//   cell C2 = =A2&B2        formula
//   [names]
//   InputCells = Main!A2:D2
//
// Names may also be written `name X = Sheet!A1:B2`, anywhere in the file.
// Loading registers everything, then builds the dependency graph once to
// reject cycles and unknown names.
Workbook parse_definition(std::string_view text, const std::string& source_name = "<definition>");
Workbook load_definition(const std::filesystem::path& path, FileLoader* loader = nullptr);

// Canonical text of a workbook; parse_definition(render_definition(wb))
// reproduces the same cells and names.
std::string render_definition(const Workbook& workbook);

struct JobLimits {
    std::size_t max_rows = 0;  // data records per file, 0: unlimited
    std::size_t max_control_entries = 10000;
};

struct SubtotalConfig {
    std::vector<SubtotalJob> jobs;  // names unresolved until the data header is known
    std::vector<std::pair<std::string, std::string>> aliases;  // alias -> column
    std::filesystem::path output_path;
    ReportFormat format = ReportFormat::Csv;
};

// Everything a run needs, read once. Paths are absolute or relative to the
// job file's directory, already resolved.
struct JobConfig {
    std::filesystem::path job_path;
    std::filesystem::path definition_path;
    Workbook workbook;

    std::optional<PipelineSpec> pipeline;
    std::optional<SortSpec> sort;
    std::optional<SubtotalConfig> subtotals;
    std::optional<CompareSpec> compare;
    std::vector<std::string> expected_headers;
    JobLimits limits;
    std::vector<std::string> warnings;
};

// INI-style job file with top-level `format` and `definition` keys and the
// sections [pipeline], [sort], [subtotals], [expected-headers], [compare] and
// [limits]. A missing or unreadable job or definition file is a ConfigError
// naming the file.
JobConfig load_job(const std::filesystem::path& path, FileLoader* loader = nullptr);

// Translation table for a data header plus the job's aliases.
HeaderTranslation make_translation(std::span<const std::string> header, const SubtotalConfig& config);

}  // namespace rowcalc
