#include "rowcalc/cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <fstream>
#include <ostream>
#include <sstream>

#include "rowcalc/calc.hpp"
#include "rowcalc/config.hpp"
#include "rowcalc/formula.hpp"
#include "rowcalc/pipeline.hpp"
#include "rowcalc/report.hpp"
#include "rowcalc/sortio.hpp"

namespace rowcalc {

namespace {

struct RunOptions {
    std::size_t progress_every = 10000;
    bool quiet = false;
    bool strict_csv = false;
    bool naive_split = false;
    bool fail_fast = false;
    bool lenient = false;
    std::string raw_out;
    std::string stats_json;
};

void print_warnings(const std::vector<std::string>& warnings, std::ostream& err) {
    for (const auto& w : warnings) err << "warning: " << w << '\n';
}

void write_file(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
    out << text;
    if (!out) throw IoError("failed writing '" + path.string() + "'");
}

std::string stats_line(const RunStats& s) {
    std::ostringstream line;
    line << "records read: " << s.records_read << ", written: " << s.records_written
         << ", skipped: " << s.records_skipped << ", errored: " << s.records_errored;
    line.setf(std::ios::fixed);
    line.precision(3);
    line << ", elapsed: " << s.elapsed_seconds << " s";
    return line.str();
}

std::string stats_json(const RunStats& s) {
    nlohmann::ordered_json j;
    j["records_read"] = s.records_read;
    j["records_written"] = s.records_written;
    j["records_skipped"] = s.records_skipped;
    j["records_errored"] = s.records_errored;
    j["header_passed"] = s.header_passed;
    j["elapsed_seconds"] = s.elapsed_seconds;
    return j.dump(2) + "\n";
}

// Header plus data records, read in full (reports work on kept output).
std::pair<Record, std::vector<Record>> split_table(const std::vector<std::string>& lines, CsvMode mode) {
    if (lines.empty()) throw DataError("report input has no header line");
    Record header = parse_record(lines.front(), mode);
    std::vector<Record> rows;
    rows.reserve(lines.size() - 1);
    for (std::size_t i = 1; i < lines.size(); ++i) rows.push_back(parse_record(lines[i], mode));
    return {std::move(header), std::move(rows)};
}

std::string build_report(const SubtotalConfig& config, const Record& header, const std::vector<Record>& rows,
                         RecordErrorPolicy policy, std::ostream& err) {
    const HeaderTranslation translation = make_translation(header, config);
    std::string text;
    for (std::size_t i = 0; i < config.jobs.size(); ++i) {
        SubtotalJob job = config.jobs[i];
        resolve_job(job, translation);
        AggregateStats stats;
        const ReportTable table = aggregate(rows, job, policy, &stats, &err);
        if (i > 0) text.push_back('\n');
        text += render_report(table, config.format);
    }
    return text;
}

int cmd_run(const std::string& job_path, const RunOptions& options, std::ostream& out, std::ostream& err) {
    JobConfig job = load_job(job_path);
    print_warnings(job.warnings, err);

    if (job.sort) {
        SortResult r = sort_file(*job.sort);
        out << "sorted " << r.rows << " rows into " << job.sort->output_path.string() << '\n';
    }
    if (!job.pipeline) {
        if (job.subtotals) throw ConfigError("a job with [subtotals] but no [pipeline] runs through 'report'");
        return kExitOk;
    }

    PipelineSpec spec = *job.pipeline;
    if (options.strict_csv) spec.csv_mode = CsvMode::Rfc4180;
    if (options.naive_split) spec.csv_mode = CsvMode::NaiveSplit;
    if (options.fail_fast) spec.on_record_error = RecordErrorPolicy::FailFast;
    if (options.lenient) spec.on_record_error = RecordErrorPolicy::SkipAndLog;

    Calculator calc(job.workbook);
    ProgressReporter progress(err, options.progress_every, options.quiet);
    std::vector<std::string> kept;
    const bool collect = job.subtotals.has_value() || !options.raw_out.empty();

    PipelineHooks hooks;
    hooks.diagnostics = &err;
    hooks.progress = &progress;
    if (collect) hooks.on_output = [&](const std::string& line, bool) { kept.push_back(line); };

    const RunStats stats = run_pipeline(spec, calc, hooks);
    out << stats_line(stats) << '\n';
    if (!options.stats_json.empty()) write_file(options.stats_json, stats_json(stats));

    if (!options.raw_out.empty()) {
        std::string raw;
        for (const auto& line : kept) raw += line + "\n";
        write_file(options.raw_out, raw);
    }
    if (job.subtotals) {
        if (spec.header_policy == HeaderPolicy::None) {
            throw ConfigError("[subtotals] names columns, so the pipeline needs a header line");
        }
        auto [header, rows] = split_table(kept, spec.csv_mode);
        write_file(job.subtotals->output_path, build_report(*job.subtotals, header, rows, spec.on_record_error, err));
        out << "report written to " << job.subtotals->output_path.string() << '\n';
    }
    return kExitOk;
}

int cmd_sort(const std::string& job_path, std::ostream& out, std::ostream& err) {
    JobConfig job = load_job(job_path);
    print_warnings(job.warnings, err);
    if (!job.sort) throw ConfigError(job_path + ": the job has no [sort] section");
    SortResult r = sort_file(*job.sort);
    out << "sorted " << r.rows << " rows into " << job.sort->output_path.string() << '\n';
    return kExitOk;
}

int cmd_report(const std::string& job_path, const std::string& data_path, std::ostream& out, std::ostream& err) {
    JobConfig job = load_job(job_path);
    print_warnings(job.warnings, err);
    if (!job.subtotals) throw ConfigError(job_path + ": the job has no [subtotals] section");
    const CsvMode mode = job.pipeline ? job.pipeline->csv_mode : CsvMode::Rfc4180;
    const RecordErrorPolicy policy = job.pipeline ? job.pipeline->on_record_error : RecordErrorPolicy::FailFast;

    std::ifstream in(data_path, std::ios::binary);
    if (!in) throw IoError("cannot open data file '" + data_path + "'");
    RecordReader reader(in, mode);
    auto header = reader.next();
    if (!header) throw DataError(data_path + ": no header line");
    std::vector<Record> rows;
    while (auto r = reader.next()) rows.push_back(std::move(r->fields));

    write_file(job.subtotals->output_path, build_report(*job.subtotals, header->fields, rows, policy, err));
    out << "report over " << rows.size() << " records written to " << job.subtotals->output_path.string() << '\n';
    return kExitOk;
}

int cmd_compare(const std::string& job_path, std::ostream& out, std::ostream& err) {
    JobConfig job = load_job(job_path);
    print_warnings(job.warnings, err);
    if (!job.compare) throw ConfigError(job_path + ": the job has no [compare] section");
    Calculator calc(job.workbook);
    const DiffReport report = compare_files(*job.compare, calc);
    std::size_t left = 0, right = 0, changed = 0;
    for (const auto& e : report.entries) {
        (e.side == DiffSide::LeftOnly ? left : e.side == DiffSide::RightOnly ? right : changed)++;
    }
    out << "left records: " << report.left_records << ", right records: " << report.right_records
        << ", matched: " << report.matched << ", left only: " << left << ", right only: " << right
        << ", changed: " << changed << '\n';
    return kExitOk;
}

// The header check reads the first line of the input, or of the sort input
// when the pipeline consumes the sort's output.
std::optional<std::filesystem::path> header_source(const JobConfig& job) {
    const auto& input = job.pipeline->input_path;
    if (std::filesystem::exists(input)) return input;
    if (job.sort && job.sort->output_path == input && std::filesystem::exists(job.sort->input_path)) {
        return job.sort->input_path;
    }
    return std::nullopt;
}

int cmd_check(const std::string& job_path, std::ostream& out, std::ostream& err) {
    JobConfig job = load_job(job_path);
    print_warnings(job.warnings, err);
    build_graph(job.workbook);

    if (job.sort && !std::filesystem::exists(job.sort->input_path)) {
        throw IoError("sort input '" + job.sort->input_path.string() + "' does not exist");
    }
    if (job.pipeline && job.pipeline->header_policy == HeaderPolicy::Validate) {
        auto source = header_source(job);
        if (!source) throw IoError("input '" + job.pipeline->input_path.string() + "' does not exist");
        std::ifstream in(*source, std::ios::binary);
        if (!in) throw IoError("cannot open '" + source->string() + "'");
        RecordReader reader(in, job.pipeline->csv_mode);
        auto header = reader.next();
        if (!header) throw DataError(source->string() + ": no header line");
        HeaderReport report = validate_headers(header->fields, job.pipeline->expected_headers, true);
        print_warnings(report.warnings, err);
        if (!report.ok) throw HeaderMismatch(std::move(report));
    }
    if (job.compare) {
        for (const auto& p : {job.compare->left_path, job.compare->right_path}) {
            if (!std::filesystem::exists(p)) throw IoError("compare input '" + p.string() + "' does not exist");
        }
    }
    out << "OK\n";
    return kExitOk;
}

int cmd_eval(const std::string& definition_path, const std::string& formula, std::ostream& out) {
    Workbook wb = load_definition(definition_path);
    Calculator calc(wb);
    const FormulaAst ast = parse_formula(formula);
    for (const Reference& ref : extract_references(ast)) {
        if (ref.kind == Reference::Kind::Name && !wb.find_name(ref.name)) {
            throw UnknownName("unknown range name '" + ref.name + "'");
        }
    }
    out << render(evaluate(ast, EvalContext{wb})) << '\n';
    return kExitOk;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Streams delimited records through spreadsheet-style business rules.", "rowcalc"};
    app.require_subcommand(1);

    RunOptions run_options;
    std::string job_path;
    std::string data_path;
    std::string definition_path;
    std::string formula;

    auto* run = app.add_subcommand("run", "Sort (if configured), stream the input through the workbook, report");
    run->add_option("job", job_path, "Job file")->required();
    run->add_option("--progress", run_options.progress_every, "Progress line every N records")
        ->check(CLI::PositiveNumber);
    run->add_flag("--quiet", run_options.quiet, "No progress lines");
    auto* strict = run->add_flag("--strict-csv", run_options.strict_csv, "RFC 4180 parsing");
    auto* naive = run->add_flag("--naive-split", run_options.naive_split, "Split on every comma");
    strict->excludes(naive);
    auto* fail_fast = run->add_flag("--fail-fast", run_options.fail_fast, "Stop at the first bad record");
    auto* lenient = run->add_flag("--lenient", run_options.lenient, "Skip and log bad records");
    fail_fast->excludes(lenient);
    run->add_option("--raw-out", run_options.raw_out, "Also write the kept records to this file");
    run->add_option("--stats-json", run_options.stats_json, "Write run statistics as JSON");

    auto* sort = app.add_subcommand("sort", "Sort a file per the job's [sort] section");
    sort->add_option("job", job_path, "Job file")->required();

    auto* report = app.add_subcommand("report", "Subtotal a data file per the job's [subtotals] section");
    report->add_option("job", job_path, "Job file")->required();
    report->add_option("data", data_path, "Data file with a header line")->required();

    auto* compare = app.add_subcommand("compare", "Compare two sorted files per the job's [compare] section");
    compare->add_option("job", job_path, "Job file")->required();

    auto* check = app.add_subcommand("check", "Validate the job, definition and input header; touch no data");
    check->add_option("job", job_path, "Job file")->required();

    auto* eval = app.add_subcommand("eval", "Evaluate one formula against a definition");
    eval->add_option("definition", definition_path, "Definition file")->required();
    eval->add_option("formula", formula, "Formula, starting with =")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitConfig;
    }

    try {
        if (run->parsed()) return cmd_run(job_path, run_options, out, err);
        if (sort->parsed()) return cmd_sort(job_path, out, err);
        if (report->parsed()) return cmd_report(job_path, data_path, out, err);
        if (compare->parsed()) return cmd_compare(job_path, out, err);
        if (check->parsed()) return cmd_check(job_path, out, err);
        if (eval->parsed()) return cmd_eval(definition_path, formula, out);
    } catch (const IoError& e) {
        err << "error: " << e.what() << '\n';
        return kExitIo;
    } catch (const DataError& e) {
        err << "error: " << e.what() << '\n';
        return kExitData;
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const std::filesystem::filesystem_error& e) {
        err << "error: " << e.what() << '\n';
        return kExitIo;
    }
    return kExitConfig;
}

}  // namespace rowcalc
