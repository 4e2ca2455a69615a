#include "rowcalc/report.hpp"

#include <algorithm>
#include <ostream>

#include "rowcalc/functions.hpp"
#include "rowcalc/sortio.hpp"
#include "rowcalc/value.hpp"

namespace rowcalc {

UnknownColumn::UnknownColumn(std::string column_)
    : ConfigError("unknown column '" + column_ + "'"), column(std::move(column_)) {}

NonNumericMeasure::NonNumericMeasure(std::size_t record_, std::string column_, const std::string& value)
    : DataError("record " + std::to_string(record_) + ": measure column '" + column_ + "' holds non-numeric '" +
                value + "'"),
      record(record_),
      column(std::move(column_)) {}

std::string HeaderTranslation::key(std::string_view name) { return to_upper_ascii(trim_spaces(name)); }

HeaderTranslation HeaderTranslation::from_header(std::span<const std::string> header) {
    HeaderTranslation t;
    for (std::size_t i = 0; i < header.size(); ++i) t.add_column(header[i], i);
    return t;
}

void HeaderTranslation::add_column(std::string_view name, std::size_t index) {
    // First occurrence wins for repeated headings.
    index_.emplace(key(name), index);
}

void HeaderTranslation::add_alias(std::string_view alias, std::string_view column) {
    index_[key(alias)] = resolve(column);
}

std::optional<std::size_t> HeaderTranslation::find(std::string_view name) const {
    auto it = index_.find(key(name));
    if (it == index_.end()) return std::nullopt;
    return it->second;
}

std::size_t HeaderTranslation::resolve(std::string_view name) const {
    if (auto i = find(name)) return *i;
    throw UnknownColumn(std::string(trim_spaces(name)));
}

std::vector<std::string> split_column_list(std::string_view text, std::string_view where,
                                           std::vector<std::string>& warnings) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (start <= text.size()) {
        std::size_t comma = text.find(',', start);
        if (comma == std::string_view::npos) comma = text.size();
        const std::string_view item = text.substr(start, comma - start);
        const std::string_view t = trim_spaces(item);
        if (!t.empty()) {
            // One space after a separating comma is ordinary list layout.
            const bool leading_ok = item.size() - t.size() <= 1 && !out.empty() && item.front() == ' ' &&
                                    item.back() != ' ' && item.back() != '\t';
            const bool untouched = t.size() == item.size();
            if (!untouched && !leading_ok) {
                warnings.push_back("superfluous spaces around '" + std::string(t) + "' in " + std::string(where));
            }
            out.emplace_back(t);
        }
        start = comma + 1;
    }
    return out;
}

void resolve_job(SubtotalJob& job, const HeaderTranslation& translation) {
    job.measure_columns.clear();
    job.group_columns.clear();
    for (const auto& m : job.measures) job.measure_columns.push_back(translation.resolve(m));
    for (const auto& g : job.group_by) job.group_columns.push_back(translation.resolve(g));
    for (std::size_t i = 0; i < job.measure_columns.size(); ++i) {
        const auto& groups = job.group_columns;
        if (std::find(groups.begin(), groups.end(), job.measure_columns[i]) != groups.end()) {
            throw BadControlTable("", "column '" + job.measures[i] + "' is both a measure and a group-by column");
        }
    }
}

namespace {

std::string cell_ref(std::size_t row, std::size_t col) {
    return std::string(1, static_cast<char>('A' + col)) + std::to_string(row + 1);
}

}  // namespace

SubtotalSpec parse_subtotal_spec(const std::vector<std::vector<std::string>>& block,
                                 const HeaderTranslation& translation) {
    SubtotalSpec spec;
    for (std::size_t r = 0; r < block.size(); ++r) {
        const auto& row = block[r];
        auto cell = [&](std::size_t c) -> std::string_view { return c < row.size() ? row[c] : std::string_view{}; };
        for (std::size_t c = 3; c < row.size(); ++c) {
            if (!trim_spaces(row[c]).empty()) throw BadControlTable(cell_ref(r, c), "value outside the subtotal table");
        }
        if (trim_spaces(cell(0)).empty() && trim_spaces(cell(1)).empty() && trim_spaces(cell(2)).empty()) continue;
        if (r == 0 && to_lower_ascii(trim_spaces(cell(0))).starts_with("subtotal")) continue;

        SubtotalJob job;
        job.measures = split_column_list(cell(0), cell_ref(r, 0), spec.warnings);
        job.group_by = split_column_list(cell(1), cell_ref(r, 1), spec.warnings);
        if (job.measures.empty()) throw BadControlTable(cell_ref(r, 0), "no measure columns");
        if (job.group_by.empty()) throw BadControlTable(cell_ref(r, 1), "no group-by columns");

        const std::string agg = to_lower_ascii(trim_spaces(cell(2)));
        if (agg.size() != cell(2).size() && !agg.empty()) {
            spec.warnings.push_back("superfluous spaces in " + cell_ref(r, 2));
        }
        if (agg.empty() || agg == "sum") {
            job.aggregate = Aggregate::Sum;
        } else if (agg == "count") {
            job.aggregate = Aggregate::Count;
        } else {
            throw BadControlTable(cell_ref(r, 2), "aggregate must be 'sum' or 'count', found '" + agg + "'");
        }
        try {
            resolve_job(job, translation);
        } catch (const BadControlTable& e) {
            if (e.cell.empty()) throw BadControlTable(cell_ref(r, 0), e.detail);
            throw;
        }
        spec.jobs.push_back(std::move(job));
    }
    return spec;
}

ReportTable aggregate(std::span<const Record> records, const SubtotalJob& job, RecordErrorPolicy policy,
                      AggregateStats* stats, std::ostream* diagnostics) {
    ReportTable table;
    table.key_names = job.group_by;
    const char* prefix = job.aggregate == Aggregate::Sum ? "Sum of " : "Count of ";
    for (const auto& m : job.measures) table.value_names.push_back(prefix + m);

    std::size_t width = 0;
    for (std::size_t c : job.measure_columns) width = std::max(width, c + 1);
    for (std::size_t c : job.group_columns) width = std::max(width, c + 1);

    AggregateStats local;
    std::map<std::vector<std::string>, std::vector<double>> groups;
    std::vector<double> values(job.measures.size());
    std::vector<std::string> key(job.group_by.size());

    for (std::size_t i = 0; i < records.size(); ++i) {
        const Record& rec = records[i];
        ++local.records;
        try {
            if (rec.size() < width) {
                throw DataError("record " + std::to_string(i + 1) + " has " + std::to_string(rec.size()) +
                                " fields; the report needs " + std::to_string(width));
            }
            for (std::size_t m = 0; m < job.measure_columns.size(); ++m) {
                if (job.aggregate == Aggregate::Count) {
                    values[m] = 1.0;
                    continue;
                }
                const std::string& field = rec[job.measure_columns[m]];
                auto v = parse_number(field);
                if (!v) throw NonNumericMeasure(i + 1, job.measures[m], field);
                values[m] = *v;
            }
        } catch (const DataError& e) {
            if (policy == RecordErrorPolicy::FailFast) throw;
            ++local.errored;
            if (diagnostics) *diagnostics << "skipped: " << e.what() << '\n';
            continue;
        }
        for (std::size_t g = 0; g < job.group_columns.size(); ++g) key[g] = rec[job.group_columns[g]];
        auto [it, inserted] = groups.try_emplace(key, job.measures.size(), 0.0);
        for (std::size_t m = 0; m < values.size(); ++m) it->second[m] += values[m];
    }

    table.rows.reserve(groups.size());
    for (auto& [k, v] : groups) table.rows.push_back({k, std::move(v)});
    if (stats) *stats = local;
    return table;
}

std::string render_report(const ReportTable& table, ReportFormat format) {
    std::vector<std::vector<std::string>> lines;
    std::vector<std::string> header = table.key_names;
    header.insert(header.end(), table.value_names.begin(), table.value_names.end());
    lines.push_back(header);
    for (const auto& row : table.rows) {
        std::vector<std::string> line = row.key;
        for (double v : row.values) line.push_back(render_number(v));
        lines.push_back(std::move(line));
    }

    std::string out;
    if (format == ReportFormat::Csv) {
        for (const auto& line : lines) {
            out += format_record(line, CsvMode::Rfc4180);
            out.push_back('\n');
        }
        return out;
    }

    const std::size_t keys = table.key_names.size();
    std::vector<std::size_t> widths(header.size(), 0);
    for (const auto& line : lines) {
        for (std::size_t c = 0; c < line.size(); ++c) widths[c] = std::max(widths[c], utf8_length(line[c]));
    }
    for (const auto& line : lines) {
        std::string text;
        for (std::size_t c = 0; c < line.size(); ++c) {
            if (c > 0) text += "  ";
            const std::string pad(widths[c] - utf8_length(line[c]), ' ');
            // Values are right-aligned, keys and headings left-aligned.
            if (c >= keys && &line != &lines.front()) {
                text += pad + line[c];
            } else {
                text += line[c] + pad;
            }
        }
        while (!text.empty() && text.back() == ' ') text.pop_back();
        out += text;
        out.push_back('\n');
    }
    return out;
}

}  // namespace rowcalc
