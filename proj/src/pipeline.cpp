#include "rowcalc/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <fstream>
#include <ostream>

namespace rowcalc {

std::string HeaderReport::message() const {
    if (ok) return "headers match";
    return "header mismatch at position " + std::to_string(position) + ": found '" + found + "', expected '" +
           expected + "'";
}

HeaderMismatch::HeaderMismatch(HeaderReport r) : ConfigError(r.message()), report(std::move(r)) {}

FieldCountError::FieldCountError(std::size_t record_, std::size_t line, std::size_t expected_, std::size_t found_)
    : DataError("record " + std::to_string(record_) + " (line " + std::to_string(line) + "): expected " +
                std::to_string(expected_) + " fields, found " + std::to_string(found_)),
      record(record_),
      expected(expected_),
      found(found_) {}

RecordError::RecordError(std::size_t record_, std::size_t line, std::string cell_, ErrorCode code_)
    : DataError("record " + std::to_string(record_) + " (line " + std::to_string(line) + "): cell " + cell_ +
                " evaluated to " + std::string(error_text(code_))),
      record(record_),
      cell(std::move(cell_)),
      code(code_) {}

StatusCellError::StatusCellError(std::size_t left, std::size_t right, const std::string& value)
    : DataError("status cell returned '" + value + "' at left record " + std::to_string(left) + ", right record " +
                std::to_string(right) + " (expected LEFT, RIGHT or MATCH)"),
      left_index(left),
      right_index(right) {}

HeaderReport validate_headers(std::span<const std::string> found, std::span<const std::string> expected, bool trim) {
    HeaderReport report;
    const std::size_t n = std::max(found.size(), expected.size());
    for (std::size_t i = 0; i < n; ++i) {
        const std::string_view f = i < found.size() ? std::string_view(found[i]) : std::string_view();
        const std::string_view e = i < expected.size() ? std::string_view(expected[i]) : std::string_view();
        std::string_view f_cmp = f;
        if (trim) {
            f_cmp = trim_spaces(f);
            if (f_cmp.size() != f.size()) {
                report.warnings.push_back("superfluous spaces in header column " + std::to_string(i + 1) + ": '" +
                                          std::string(f) + "'");
            }
        }
        const bool missing = i >= found.size() || i >= expected.size();
        if (missing || compare_text_ci(f_cmp, e) != 0) {
            if (report.ok) {
                report.ok = false;
                report.position = i + 1;
                report.found = i < found.size() ? std::string(f) : "<missing>";
                report.expected = i < expected.size() ? std::string(e) : "<none>";
            }
        }
    }
    return report;
}

ProgressReporter::ProgressReporter(std::ostream& out, std::size_t every_n, bool quiet)
    : out_(out), every_n_(std::max<std::size_t>(every_n, 1)), quiet_(quiet) {}

void report_progress(const RunStats& stats, std::size_t every_n, std::ostream& out) {
    if (every_n == 0 || stats.records_read == 0 || stats.records_read % every_n != 0) return;
    out << "records processed: " << stats.records_read << '\n';
}

void ProgressReporter::update(std::size_t records_processed) {
    if (quiet_ || records_processed == 0 || records_processed % every_n_ != 0) return;
    RunStats stats;
    stats.records_read = records_processed;
    report_progress(stats, every_n_, out_);
    ++lines_;
}

namespace {

struct Binding {
    CellRange range;
    std::vector<CellKey> keys;  // row-major
};

Binding bind(Calculator& calc, const std::string& name, const char* role) {
    const Workbook& wb = calc.workbook();
    if (!wb.find_name(name)) throw UnknownName(std::string(role) + " range '" + name + "' is not defined");
    Binding b;
    b.range = wb.resolve_name(name);
    const CellRange ranges[] = {b.range};
    b.keys = calc.keys_of(ranges);
    return b;
}

void log(const PipelineHooks& hooks, const std::string& message) {
    if (hooks.diagnostics) *hooks.diagnostics << message << '\n';
}

bool should_skip(const CellValue& v, const CellValue& sentinel) {
    if (v.is_boolean() && v.boolean()) return true;
    return v.kind() == sentinel.kind() && !v.is_error() && compare_values(v, sentinel) == 0;
}

Matrix fields_matrix(const Binding& b, const Record& fields) {
    Matrix m(b.range.rows(), b.range.cols());
    for (std::size_t i = 0; i < m.values.size(); ++i) {
        m.values[i] = CellValue(i < fields.size() ? fields[i] : std::string());
    }
    return m;
}

}  // namespace

RunStats run_pipeline(const PipelineSpec& spec, Calculator& calc, std::istream& in, std::ostream& out,
                      const PipelineHooks& hooks) {
    const auto started = std::chrono::steady_clock::now();
    Workbook& wb = calc.workbook();

    const Binding input = bind(calc, spec.input_range, "input");
    const Binding output = bind(calc, spec.output_range, "output");
    std::optional<Binding> skip;
    if (spec.skip_cell) {
        skip = bind(calc, *spec.skip_cell, "skip");
        if (skip->keys.size() != 1) throw ConfigError("skip cell '" + *spec.skip_cell + "' must be a single cell");
    }

    // The skip cell may sit inside the output range; it is never part of the
    // written record.
    std::vector<CellKey> payload;
    for (const CellKey& k : output.keys) {
        if (!skip || k != skip->keys.front()) payload.push_back(k);
    }
    if (payload.empty()) throw ConfigError("output range '" + spec.output_range + "' has no cells besides the skip cell");

    std::optional<Binding> carry;
    if (spec.carry_forward_range) {
        carry = bind(calc, *spec.carry_forward_range, "carry-forward");
        if (carry->keys.size() != 1 && carry->keys.size() != payload.size()) {
            throw ConfigError("carry-forward range '" + *spec.carry_forward_range + "' must be one cell or " +
                              std::to_string(payload.size()) + " cells wide");
        }
        wb.declare_writable(carry->range);
    }
    wb.declare_writable(input.range);

    std::vector<CellKey> dirty = input.keys;
    if (carry) dirty.insert(dirty.end(), carry->keys.begin(), carry->keys.end());

    RunStats stats;
    RecordReader reader(in, spec.csv_mode);
    const std::size_t width = input.keys.size();

    auto emit = [&](const std::string& line, bool is_header) {
        out << line << '\n';
        if (hooks.on_output) hooks.on_output(line, is_header);
    };

    if (spec.header_policy != HeaderPolicy::None) {
        std::optional<RawRecord> header = reader.next();
        if (header) {
            if (spec.header_policy == HeaderPolicy::Validate) {
                HeaderReport report = validate_headers(header->fields, spec.expected_headers, true);
                for (const auto& w : report.warnings) log(hooks, "warning: " + w);
                if (!report.ok) throw HeaderMismatch(std::move(report));
            }
            emit(header->raw, true);
            stats.header_passed = true;
        }
    }

    auto record_failed = [&](const DataError& error) {
        if (spec.on_record_error == RecordErrorPolicy::FailFast) throw;
        ++stats.records_errored;
        log(hooks, std::string("skipped: ") + error.what());
    };

    std::vector<std::string> rendered(payload.size());
    std::size_t line_no = 0;
    while (true) {
        std::optional<RawRecord> record;
        try {
            record = reader.next();
        } catch (const CsvError& e) {
            ++stats.records_read;
            if (spec.on_record_error == RecordErrorPolicy::FailFast) throw;
            ++stats.records_errored;
            log(hooks, std::string("skipped: ") + e.what());
            if (hooks.progress) hooks.progress->update(stats.records_read);
            continue;
        }
        if (!record) break;

        ++stats.records_read;
        if (spec.max_records != 0 && stats.records_read > spec.max_records) {
            throw LimitExceeded("input has more than max_rows = " + std::to_string(spec.max_records) +
                                " records (line " + std::to_string(record->line) + ")");
        }
        const std::size_t index = stats.records_read;
        line_no = record->line;

        try {
            if (spec.field_count_policy == FieldCountPolicy::Strict && record->fields.size() != width) {
                throw FieldCountError(index, line_no, width, record->fields.size());
            }
            wb.write_range(input.range, fields_matrix(input, record->fields));
            calc.recalculate(std::span<const CellKey>(dirty));

            if (skip) {
                const CellValue& flag = wb.value_at(skip->keys.front());
                if (flag.is_error()) {
                    throw RecordError(index, line_no, format_a1(wb.address_of(skip->keys.front())), flag.error());
                }
                if (should_skip(flag, spec.skip_sentinel)) {
                    ++stats.records_skipped;
                    if (hooks.progress) hooks.progress->update(stats.records_read);
                    continue;
                }
            }

            for (std::size_t i = 0; i < payload.size(); ++i) {
                const CellValue& v = wb.value_at(payload[i]);
                if (v.is_error()) throw RecordError(index, line_no, format_a1(wb.address_of(payload[i])), v.error());
                rendered[i] = render(v);
            }
        } catch (const FieldCountError& e) {
            record_failed(e);
            if (hooks.progress) hooks.progress->update(stats.records_read);
            continue;
        } catch (const RecordError& e) {
            record_failed(e);
            if (hooks.progress) hooks.progress->update(stats.records_read);
            continue;
        }

        // A single output cell is already a whole record (built on-sheet).
        const std::string line = payload.size() == 1 ? rendered.front() : format_record(rendered, spec.csv_mode);
        emit(line, false);
        ++stats.records_written;

        if (carry) {
            Matrix m(carry->range.rows(), carry->range.cols());
            if (carry->keys.size() == 1) {
                m.values[0] = CellValue(line);
            } else {
                for (std::size_t i = 0; i < payload.size(); ++i) m.values[i] = wb.value_at(payload[i]);
            }
            wb.write_range(carry->range, m);
        }
        if (hooks.progress) hooks.progress->update(stats.records_read);
    }

    out.flush();
    if (!out) throw IoError("failed writing output");
    stats.elapsed_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    return stats;
}

RunStats run_pipeline(const PipelineSpec& spec, Calculator& calc, const PipelineHooks& hooks) {
    std::ifstream in(spec.input_path, std::ios::binary);
    if (!in) throw IoError("cannot open input file '" + spec.input_path.string() + "'");
    std::ofstream out(spec.output_path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open output file '" + spec.output_path.string() + "'");
    return run_pipeline(spec, calc, in, out, hooks);
}

// ---------------------------------------------------------------------------

DiffReport compare_streams(const CompareSpec& spec, Calculator& calc, std::istream& left_in, std::istream& right_in) {
    Workbook& wb = calc.workbook();
    const Binding left_cells = bind(calc, spec.left_range, "left");
    const Binding right_cells = bind(calc, spec.right_range, "right");
    const Binding status = bind(calc, spec.status_cell, "status");
    if (status.keys.size() != 1) throw ConfigError("status cell '" + spec.status_cell + "' must be a single cell");
    wb.declare_writable(left_cells.range);
    wb.declare_writable(right_cells.range);

    std::vector<CellKey> dirty = left_cells.keys;
    dirty.insert(dirty.end(), right_cells.keys.begin(), right_cells.keys.end());

    RecordReader left_reader(left_in, spec.csv_mode);
    RecordReader right_reader(right_in, spec.csv_mode);
    if (spec.has_headings) {
        left_reader.next();
        right_reader.next();
    }

    DiffReport report;
    std::optional<RawRecord> left = left_reader.next();
    std::optional<RawRecord> right = right_reader.next();
    std::size_t li = left ? 1 : 0;
    std::size_t ri = right ? 1 : 0;

    auto advance_left = [&] {
        left = left_reader.next();
        if (left) ++li;
    };
    auto advance_right = [&] {
        right = right_reader.next();
        if (right) ++ri;
    };

    while (left && right) {
        wb.write_range(left_cells.range, fields_matrix(left_cells, left->fields));
        wb.write_range(right_cells.range, fields_matrix(right_cells, right->fields));
        calc.recalculate(std::span<const CellKey>(dirty));
        const CellValue& v = wb.value_at(status.keys.front());
        const std::string verdict = v.is_text() ? to_upper_ascii(trim_spaces(v.text())) : std::string();
        if (verdict == "LEFT") {
            report.entries.push_back({DiffSide::LeftOnly, li, 0, left->fields, {}, {}});
            advance_left();
        } else if (verdict == "RIGHT") {
            report.entries.push_back({DiffSide::RightOnly, 0, ri, {}, right->fields, {}});
            advance_right();
        } else if (verdict == "MATCH") {
            ++report.matched;
            if (spec.field_diffs && left->fields != right->fields) {
                DiffEntry e{DiffSide::Changed, li, ri, left->fields, right->fields, {}};
                const std::size_t n = std::max(left->fields.size(), right->fields.size());
                for (std::size_t i = 0; i < n; ++i) {
                    const bool same = i < left->fields.size() && i < right->fields.size() &&
                                      left->fields[i] == right->fields[i];
                    if (!same) e.changed_fields.push_back(i + 1);
                }
                report.entries.push_back(std::move(e));
            }
            advance_left();
            advance_right();
        } else {
            throw StatusCellError(li, ri, render(v));
        }
    }
    while (left) {
        report.entries.push_back({DiffSide::LeftOnly, li, 0, left->fields, {}, {}});
        advance_left();
    }
    while (right) {
        report.entries.push_back({DiffSide::RightOnly, 0, ri, {}, right->fields, {}});
        advance_right();
    }
    report.left_records = li;
    report.right_records = ri;
    return report;
}

DiffReport compare_files(const CompareSpec& spec, Calculator& calc) {
    std::ifstream left(spec.left_path, std::ios::binary);
    if (!left) throw IoError("cannot open left file '" + spec.left_path.string() + "'");
    std::ifstream right(spec.right_path, std::ios::binary);
    if (!right) throw IoError("cannot open right file '" + spec.right_path.string() + "'");
    DiffReport report = compare_streams(spec, calc, left, right);
    if (!spec.output_path.empty()) {
        std::ofstream out(spec.output_path, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError("cannot open report file '" + spec.output_path.string() + "'");
        out << render_diff(report, spec.csv_mode);
        if (!out) throw IoError("failed writing '" + spec.output_path.string() + "'");
    }
    return report;
}

std::string render_diff(const DiffReport& report, CsvMode mode) {
    std::string out;
    for (const DiffEntry& e : report.entries) {
        Record line;
        switch (e.side) {
            case DiffSide::LeftOnly: line.push_back("LEFT"); break;
            case DiffSide::RightOnly: line.push_back("RIGHT"); break;
            case DiffSide::Changed: line.push_back("CHANGED"); break;
        }
        line.push_back(std::to_string(e.left_index));
        line.push_back(std::to_string(e.right_index));
        std::string changed;
        for (auto f : e.changed_fields) {
            if (!changed.empty()) changed.push_back(' ');
            changed += std::to_string(f);
        }
        line.push_back(changed);
        const Record& fields = e.side == DiffSide::RightOnly ? e.right : e.left;
        line.insert(line.end(), fields.begin(), fields.end());
        out += format_record(line, mode);
        out.push_back('\n');
    }
    return out;
}

}  // namespace rowcalc
