#include "rowcalc/config.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include "rowcalc/calc.hpp"
#include "rowcalc/formula.hpp"
#include "rowcalc/value.hpp"

namespace rowcalc {

ConfigFileError::ConfigFileError(std::string path_, std::size_t line_, std::string detail_)
    : ConfigError(path_ + ":" + std::to_string(line_) + ": " + detail_),
      path(std::move(path_)),
      line(line_),
      detail(std::move(detail_)) {}

DefinitionCycle::DefinitionCycle(std::string path_, std::size_t line_, std::vector<CellAddress> cells_,
                                 const std::string& detail_)
    : ConfigFileError(std::move(path_), line_, detail_), cells(std::move(cells_)) {}

std::optional<std::string> FileLoader::read(const std::filesystem::path& path) {
    ++counts_[path.lexically_normal().string()];
    ++total_;
    std::ifstream in(path, std::ios::binary);
    if (!in) return std::nullopt;
    std::ostringstream buffer;
    buffer << in.rdbuf();
    if (in.bad()) return std::nullopt;
    return buffer.str();
}

std::size_t FileLoader::reads_of(const std::filesystem::path& path) const {
    auto it = counts_.find(path.lexically_normal().string());
    return it == counts_.end() ? 0 : it->second;
}

namespace {

struct Line {
    std::size_t number;
    std::string_view text;  // trimmed
};

std::vector<Line> split_lines(std::string_view text) {
    std::vector<Line> lines;
    std::size_t start = 0;
    std::size_t number = 0;
    while (start <= text.size()) {
        std::size_t end = text.find('\n', start);
        if (end == std::string_view::npos) end = text.size();
        std::string_view line = text.substr(start, end - start);
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        ++number;
        line = trim_spaces(line);
        if (!line.empty() && line.front() != '#' && line.front() != ';') lines.push_back({number, line});
        if (end == text.size()) break;
        start = end + 1;
    }
    return lines;
}

bool starts_with_word(std::string_view text, std::string_view word) {
    return text.size() > word.size() && compare_text_ci(text.substr(0, word.size()), word) == 0 &&
           (text[word.size()] == ' ' || text[word.size()] == '\t');
}

// "key = value" with both sides trimmed; nullopt without an "=".
std::optional<std::pair<std::string_view, std::string_view>> split_assignment(std::string_view text) {
    const std::size_t eq = text.find('=');
    if (eq == std::string_view::npos) return std::nullopt;
    return std::pair{trim_spaces(text.substr(0, eq)), trim_spaces(text.substr(eq + 1))};
}

std::optional<std::string> unquote_text(std::string_view v) {
    if (v.size() < 2 || v.front() != '"' || v.back() != '"') return std::nullopt;
    std::string out;
    for (std::size_t i = 1; i + 1 < v.size(); ++i) {
        if (v[i] == '"') {
            if (i + 2 < v.size() && v[i + 1] == '"') {
                out.push_back('"');
                ++i;
                continue;
            }
            return std::nullopt;
        }
        out.push_back(v[i]);
    }
    return out;
}

std::optional<std::size_t> parse_count(std::string_view text) {
    if (text.empty() || text.size() > 18) return std::nullopt;
    std::size_t n = 0;
    for (char c : text) {
        if (c < '0' || c > '9') return std::nullopt;
        n = n * 10 + static_cast<std::size_t>(c - '0');
    }
    return n;
}

class DefinitionParser {
public:
    explicit DefinitionParser(std::string source) : source_(std::move(source)) {}

    Workbook parse(std::string_view text) {
        for (const Line& line : split_lines(text)) handle(line);
        ensure_workbook();
        check_references();
        try {
            build_graph(*wb_);
        } catch (const CycleError& e) {
            const CellKey first = wb_->key_of(e.cells.front());
            throw DefinitionCycle(source_, cell_lines_.at(first), e.cells, e.what());
        }
        return std::move(*wb_);
    }

private:
    enum class Section { Top, Sheet, Names };

    [[noreturn]] void fail(std::size_t line, const std::string& detail) const {
        throw DefinitionSyntaxError(source_, line, detail);
    }

    void ensure_workbook() {
        if (!wb_) wb_.emplace(limits_);
    }

    void handle(const Line& line) {
        const std::string_view t = line.text;
        if (t.front() == '[') {
            if (t.back() != ']') fail(line.number, "unterminated section header");
            const std::string_view inner = trim_spaces(t.substr(1, t.size() - 2));
            ensure_workbook();
            if (compare_text_ci(inner, "names") == 0) {
                section_ = Section::Names;
            } else if (starts_with_word(inner, "sheet")) {
                const std::string name(trim_spaces(inner.substr(5)));
                try {
                    sheet_ = wb_->add_sheet(name);
                } catch (const ConfigError& e) {
                    fail(line.number, e.what());
                }
                section_ = Section::Sheet;
            } else {
                fail(line.number, "unknown section [" + std::string(inner) + "]");
            }
            return;
        }
        if (starts_with_word(t, "name")) {
            ensure_workbook();
            define(line, t.substr(4));
            return;
        }
        switch (section_) {
            case Section::Top:
                top_level(line);
                return;
            case Section::Names:
                define(line, t);
                return;
            case Section::Sheet:
                if (!starts_with_word(t, "cell")) fail(line.number, "expected 'cell <A1> = <value>'");
                assign(line, t.substr(4));
                return;
        }
    }

    void top_level(const Line& line) {
        auto kv = split_assignment(line.text);
        if (!kv) fail(line.number, "expected 'key = value' or a section header");
        auto [key, value] = *kv;
        const std::string k = to_lower_ascii(key);
        if (k == "format") {
            if (value != "1") fail(line.number, "unsupported definition format '" + std::string(value) + "'");
        } else if (k == "max_rows" || k == "max_cols") {
            auto n = parse_count(value);
            if (!n || *n < 1 || *n > 0x7fffffff) fail(line.number, "bad " + k + " '" + std::string(value) + "'");
            (k == "max_rows" ? limits_.max_rows : limits_.max_cols) = static_cast<std::int32_t>(*n);
        } else if (k == "cell") {
            fail(line.number, "cell assignment outside a [sheet] section");
        } else {
            fail(line.number, "unknown key '" + std::string(key) + "'");
        }
    }

    void define(const Line& line, std::string_view body) {
        auto kv = split_assignment(body);
        if (!kv || kv->first.empty() || kv->second.empty()) fail(line.number, "expected '<Name> = <Sheet>!<A1>:<A1>'");
        CellRange range;
        try {
            range = parse_range(kv->second);
        } catch (const ConfigError& e) {
            fail(line.number, e.what());
        }
        try {
            wb_->define_name(std::string(kv->first), range);
        } catch (const BadAddress& e) {
            throw NameOutOfBounds(source_, line.number, "range name '" + std::string(kv->first) + "': " + e.what());
        } catch (const ConfigError& e) {
            fail(line.number, e.what());
        }
        name_lines_[to_upper_ascii(kv->first)] = line.number;
    }

    void assign(const Line& line, std::string_view body) {
        auto kv = split_assignment(body);
        if (!kv) fail(line.number, "expected 'cell <A1> = <value>'");
        auto [where, value] = *kv;
        CellAddress address;
        try {
            address = parse_a1(where);
        } catch (const ConfigError& e) {
            fail(line.number, e.what());
        }
        if (!address.sheet.empty()) fail(line.number, "cell addresses inside a [sheet] section take no sheet prefix");
        address.sheet = wb_->sheet_name(sheet_);

        CellKey key;
        try {
            key = wb_->key_of(address);
        } catch (const ConfigError& e) {
            fail(line.number, e.what());
        }
        if (auto [it, fresh] = cell_lines_.emplace(key, line.number); !fresh) {
            throw DuplicateCell(source_, line.number,
                                "cell " + format_a1(address) + " already assigned on line " + std::to_string(it->second));
        }

        if (value.empty()) fail(line.number, "missing value (write \"\" for empty text)");
        if (value.front() == '=') {
            try {
                wb_->set_formula(address, value);
            } catch (const ParseError& e) {
                fail(line.number, std::string(e.what()) + " in " + std::string(value));
            } catch (const LexError& e) {
                fail(line.number, std::string(e.what()) + " in " + std::string(value));
            }
        } else if (value.front() == '"') {
            auto text = unquote_text(value);
            if (!text) fail(line.number, "malformed quoted text " + std::string(value));
            wb_->set_cell(address, *text);
        } else if (auto number = parse_number(value)) {
            wb_->set_cell(address, *number);
        } else {
            wb_->set_cell(address, std::string(value));
        }
    }

    void check_references() const {
        for (const CellKey& key : wb_->formula_cells()) {
            const Cell* cell = wb_->find_cell(key);
            for (const Reference& ref : extract_references(cell->formula->ast)) {
                if (ref.kind == Reference::Kind::Name && !wb_->find_name(ref.name)) {
                    throw DefinitionSyntaxError(source_, cell_lines_.at(key),
                                                "unknown range name '" + ref.name + "' in " + cell->formula->source);
                }
            }
        }
    }

    std::string source_;
    Limits limits_;
    std::optional<Workbook> wb_;
    Section section_ = Section::Top;
    SheetId sheet_ = 0;
    std::map<CellKey, std::size_t> cell_lines_;
    std::map<std::string, std::size_t> name_lines_;
};

}  // namespace

Workbook parse_definition(std::string_view text, const std::string& source_name) {
    return DefinitionParser(source_name).parse(text);
}

Workbook load_definition(const std::filesystem::path& path, FileLoader* loader) {
    FileLoader fallback;
    FileLoader& files = loader ? *loader : fallback;
    auto text = files.read(path);
    if (!text) throw ConfigError("cannot read definition file '" + path.string() + "'");
    return parse_definition(*text, path.string());
}

namespace {

std::string render_literal(const CellValue& v, const std::string& where) {
    switch (v.kind()) {
        case CellValue::Kind::Number:
            return render_number(v.number());
        case CellValue::Kind::Text: {
            const std::string& s = v.text();
            if (s.find_first_of("\r\n") != std::string::npos) {
                throw ConfigError("cell " + where + ": text with a line break has no definition syntax");
            }
            const bool plain = !s.empty() && trim_spaces(s).size() == s.size() && s.front() != '=' &&
                               s.front() != '"' && !parse_number(s);
            if (plain) return s;
            std::string out = "\"";
            for (char c : s) {
                out.push_back(c);
                if (c == '"') out.push_back('"');
            }
            out.push_back('"');
            return out;
        }
        default:
            throw ConfigError("cell " + where + ": only text and number literals have definition syntax");
    }
}

}  // namespace

std::string render_definition(const Workbook& workbook) {
    std::ostringstream out;
    out << "format = 1\n";
    const Limits defaults;
    if (workbook.limits().max_rows != defaults.max_rows) out << "max_rows = " << workbook.limits().max_rows << '\n';
    if (workbook.limits().max_cols != defaults.max_cols) out << "max_cols = " << workbook.limits().max_cols << '\n';

    std::vector<std::pair<CellKey, const Cell*>> cells;
    workbook.for_each_cell([&](const CellKey& k, const Cell& c) { cells.emplace_back(k, &c); });
    std::sort(cells.begin(), cells.end(), [](const auto& a, const auto& b) { return a.first < b.first; });

    std::size_t next = 0;
    for (SheetId s = 0; s < workbook.sheet_count(); ++s) {
        out << "\n[sheet " << workbook.sheet_name(s) << "]\n";
        for (; next < cells.size() && cells[next].first.sheet == s; ++next) {
            const auto& [key, cell] = cells[next];
            CellAddress a = workbook.address_of(key);
            a.sheet.clear();
            const std::string where = format_a1(a);
            if (cell->is_formula()) {
                out << "cell " << where << " = " << render_formula(cell->formula->ast) << '\n';
            } else {
                out << "cell " << where << " = " << render_literal(cell->value, where) << '\n';
            }
        }
    }

    const auto names = workbook.names();
    if (!names.empty()) {
        out << "\n[names]\n";
        for (const NamedRange& n : names) out << n.name << " = " << format_range(n.range) << '\n';
    }
    return out.str();
}

// ---------------------------------------------------------------------------
// Job files

namespace {

struct Entry {
    std::string key;  // lower-cased
    std::string value;
    std::size_t line;
};

struct SectionBlock {
    std::size_t line = 0;
    std::vector<Entry> entries;
};

const std::map<std::string, std::set<std::string>>& job_schema() {
    static const std::map<std::string, std::set<std::string>> schema = {
        {"", {"format", "definition"}},
        {"pipeline",
         {"input", "output", "input_range", "output_range", "skip_cell", "skip_sentinel", "carry_forward", "header",
          "csv_mode", "field_count", "on_record_error"}},
        {"sort",
         {"sort_in", "sort_out", "headings", "order", "keys", "collation", "memory_budget_rows", "scratch_dir",
          "csv_mode"}},
        {"subtotals", {"job", "alias", "output", "format"}},
        {"expected-headers", {"columns"}},
        {"compare",
         {"left", "right", "output", "left_range", "right_range", "status_cell", "headings", "field_diffs",
          "csv_mode"}},
        {"limits", {"max_rows", "max_control_entries"}},
    };
    return schema;
}

bool repeatable(std::string_view key) { return key == "job" || key == "alias"; }

class JobParser {
public:
    JobParser(std::filesystem::path path, FileLoader& files) : path_(std::move(path)), files_(files) {
        source_ = path_.string();
        base_ = path_.parent_path();
    }

    JobConfig parse(std::string_view text) {
        read_sections(text);
        JobConfig job;
        job.job_path = path_;

        limits(job);
        top(job);
        if (has("expected-headers")) expected_headers(job);
        if (has("pipeline")) pipeline(job);
        if (has("sort")) sort(job);
        if (has("subtotals")) subtotals(job);
        if (has("compare")) compare(job);
        if (!job.pipeline && !job.sort && !job.subtotals && !job.compare) {
            fail(1, "the job configures none of [pipeline], [sort], [subtotals] or [compare]");
        }
        return job;
    }

private:
    [[noreturn]] void fail(std::size_t line, const std::string& detail) const {
        throw ConfigFileError(source_, line, detail);
    }

    void read_sections(std::string_view text) {
        std::string current;
        sections_[current].line = 1;
        for (const Line& line : split_lines(text)) {
            const std::string_view t = line.text;
            if (t.front() == '[') {
                if (t.back() != ']') fail(line.number, "unterminated section header");
                current = to_lower_ascii(trim_spaces(t.substr(1, t.size() - 2)));
                if (!job_schema().count(current)) {
                    throw UnknownSection(source_, line.number, "unknown section [" + current + "]");
                }
                if (sections_.count(current)) fail(line.number, "section [" + current + "] appears twice");
                sections_[current].line = line.number;
                continue;
            }
            auto kv = split_assignment(t);
            if (!kv || kv->first.empty()) fail(line.number, "expected 'key = value'");
            Entry e{to_lower_ascii(kv->first), std::string(kv->second), line.number};
            const auto& allowed = job_schema().at(current);
            if (!allowed.count(e.key)) {
                const std::string where = current.empty() ? "top level" : "[" + current + "]";
                throw UnknownKey(source_, line.number, "unknown key '" + e.key + "' in " + where);
            }
            auto& entries = sections_[current].entries;
            if (!repeatable(e.key)) {
                for (const Entry& prior : entries) {
                    if (prior.key == e.key) {
                        fail(line.number, "key '" + e.key + "' repeats line " + std::to_string(prior.line));
                    }
                }
            }
            entries.push_back(std::move(e));
        }
    }

    bool has(const std::string& section) const { return sections_.count(section) != 0; }
    std::size_t section_line(const std::string& section) const { return sections_.at(section).line; }

    const Entry* find(const std::string& section, std::string_view key) const {
        auto it = sections_.find(section);
        if (it == sections_.end()) return nullptr;
        for (const Entry& e : it->second.entries) {
            if (e.key == key) return &e;
        }
        return nullptr;
    }

    std::vector<const Entry*> all(const std::string& section, std::string_view key) const {
        std::vector<const Entry*> out;
        for (const Entry& e : sections_.at(section).entries) {
            if (e.key == key) out.push_back(&e);
        }
        return out;
    }

    const Entry& require(const std::string& section, std::string_view key) const {
        if (const Entry* e = find(section, key)) {
            if (e->value.empty()) fail(e->line, "key '" + std::string(key) + "' is empty");
            return *e;
        }
        fail(section_line(section), "[" + section + "] needs a '" + std::string(key) + "' key");
    }

    std::filesystem::path path_value(const Entry& e) const {
        std::string v = e.value;
        if (auto q = unquote_text(v)) v = *q;
        if (v.empty()) fail(e.line, "empty path");
        std::filesystem::path p(v);
        return p.is_absolute() ? p : (base_ / p).lexically_normal();
    }

    template <typename T>
    T choice(const std::string& section, std::string_view key, T fallback,
             std::initializer_list<std::pair<std::string_view, T>> options) const {
        const Entry* e = find(section, key);
        if (!e) return fallback;
        const std::string v = to_lower_ascii(e->value);
        std::string names;
        for (const auto& [name, value] : options) {
            if (v == name) return value;
            names += names.empty() ? "" : ", ";
            names += name;
        }
        fail(e->line, "'" + std::string(key) + "' must be one of " + names + "; found '" + e->value + "'");
    }

    bool flag(const std::string& section, std::string_view key, bool fallback) const {
        return choice<bool>(section, key, fallback,
                            {{"y", true}, {"yes", true}, {"true", true}, {"1", true},
                             {"n", false}, {"no", false}, {"false", false}, {"0", false}});
    }

    CsvMode csv_mode(const std::string& section) const {
        return choice<CsvMode>(section, "csv_mode", CsvMode::Rfc4180,
                               {{"rfc4180", CsvMode::Rfc4180}, {"naive-split", CsvMode::NaiveSplit}});
    }

    std::size_t count(const Entry& e) const {
        auto n = parse_count(e.value);
        if (!n) fail(e.line, "'" + e.key + "' must be a non-negative integer, found '" + e.value + "'");
        return *n;
    }

    void check_entries(std::size_t n, std::size_t line, const std::string& what) const {
        if (n > limits_.max_control_entries) {
            throw LimitExceeded(source_ + ":" + std::to_string(line) + ": " + what + " has " + std::to_string(n) +
                                " entries; max_control_entries is " + std::to_string(limits_.max_control_entries));
        }
    }

    void limits(JobConfig& job) {
        if (const Entry* e = find("limits", "max_rows")) limits_.max_rows = count(*e);
        if (const Entry* e = find("limits", "max_control_entries")) limits_.max_control_entries = count(*e);
        job.limits = limits_;
    }

    void top(JobConfig& job) {
        if (const Entry* e = find("", "format"); e && e->value != "1") {
            fail(e->line, "unsupported job format '" + e->value + "'");
        }
        const Entry* def = find("", "definition");
        if (!def) {
            if (has("pipeline") || has("compare")) fail(1, "the job needs a top-level 'definition' key");
            return;
        }
        job.definition_path = path_value(*def);
        auto text = files_.read(job.definition_path);
        if (!text) fail(def->line, "cannot read definition file '" + job.definition_path.string() + "'");
        job.workbook = parse_definition(*text, job.definition_path.string());
    }

    void expected_headers(JobConfig& job) {
        const Entry& e = require("expected-headers", "columns");
        std::vector<std::string> warnings;
        job.expected_headers = split_column_list(e.value, source_ + ":" + std::to_string(e.line), warnings);
        check_entries(job.expected_headers.size(), e.line, "[expected-headers] columns");
        job.warnings.insert(job.warnings.end(), warnings.begin(), warnings.end());
    }

    std::string range_name(const JobConfig& job, const std::string& section, std::string_view key,
                           std::string fallback) const {
        const Entry* e = find(section, key);
        std::string name = e ? e->value : std::move(fallback);
        const std::size_t line = e ? e->line : section_line(section);
        if (!job.workbook.find_name(name)) {
            throw UnknownRangeName(source_, line,
                                   "range name '" + name + "' is not defined in " + job.definition_path.string());
        }
        return name;
    }

    void pipeline(JobConfig& job) {
        PipelineSpec spec;
        spec.input_path = path_value(require("pipeline", "input"));
        spec.output_path = path_value(require("pipeline", "output"));
        spec.input_range = range_name(job, "pipeline", "input_range", "InputCells");
        spec.output_range = range_name(job, "pipeline", "output_range", "OutputCells");
        if (find("pipeline", "skip_cell")) spec.skip_cell = range_name(job, "pipeline", "skip_cell", "");
        if (find("pipeline", "carry_forward")) {
            spec.carry_forward_range = range_name(job, "pipeline", "carry_forward", "");
        }
        if (const Entry* e = find("pipeline", "skip_sentinel")) {
            auto q = unquote_text(e->value);
            spec.skip_sentinel = q ? *q : e->value;
        }
        const HeaderPolicy fallback = job.expected_headers.empty() ? HeaderPolicy::PassThrough : HeaderPolicy::Validate;
        spec.header_policy = choice<HeaderPolicy>("pipeline", "header", fallback,
                                                  {{"pass-through", HeaderPolicy::PassThrough},
                                                   {"validate", HeaderPolicy::Validate},
                                                   {"none", HeaderPolicy::None}});
        if (spec.header_policy == HeaderPolicy::Validate && job.expected_headers.empty()) {
            fail(find("pipeline", "header")->line, "header = validate needs an [expected-headers] section");
        }
        spec.expected_headers = job.expected_headers;
        spec.csv_mode = csv_mode("pipeline");
        spec.field_count_policy = choice<FieldCountPolicy>(
            "pipeline", "field_count", FieldCountPolicy::Strict,
            {{"strict", FieldCountPolicy::Strict}, {"pad-truncate", FieldCountPolicy::PadTruncate}});
        spec.on_record_error = choice<RecordErrorPolicy>(
            "pipeline", "on_record_error", RecordErrorPolicy::FailFast,
            {{"fail-fast", RecordErrorPolicy::FailFast}, {"skip-and-log", RecordErrorPolicy::SkipAndLog}});
        spec.max_records = limits_.max_rows;
        job.pipeline = std::move(spec);
    }

    SortKey parse_key(const std::string& item, std::size_t line, SortOrder order, Collation collation,
                      bool headings) const {
        std::istringstream words(item);
        std::string column;
        words >> column;
        SortKey key;
        key.order = order;
        key.collation = collation;
        if (auto n = parse_count(column)) {
            if (*n < 1) fail(line, "sort key columns are numbered from 1");
            key.column = *n;
        } else {
            if (!headings) fail(line, "sort key '" + column + "' names a column but headings = n");
            key.name = column;
        }
        std::string word;
        while (words >> word) {
            const std::string w = to_lower_ascii(word);
            if (w == "asc") {
                key.order = SortOrder::Asc;
            } else if (w == "desc") {
                key.order = SortOrder::Desc;
            } else if (w == "text") {
                key.collation = Collation::Text;
            } else if (w == "numeric") {
                key.collation = Collation::NumericAware;
            } else {
                fail(line, "sort key '" + item + "': expected asc, desc, text or numeric after the column");
            }
        }
        return key;
    }

    void sort(JobConfig& job) {
        SortSpec spec;
        spec.input_path = path_value(require("sort", "sort_in"));
        spec.output_path = path_value(require("sort", "sort_out"));
        spec.has_headings = flag("sort", "headings", true);
        const SortOrder order =
            choice<SortOrder>("sort", "order", SortOrder::Asc, {{"asc", SortOrder::Asc}, {"desc", SortOrder::Desc}});
        const Collation collation = choice<Collation>(
            "sort", "collation", Collation::NumericAware,
            {{"numeric", Collation::NumericAware}, {"text", Collation::Text}});
        spec.keys.clear();
        if (const Entry* e = find("sort", "keys")) {
            std::vector<std::string> warnings;
            for (const std::string& item : split_column_list(e->value, source_ + ":" + std::to_string(e->line), warnings)) {
                spec.keys.push_back(parse_key(item, e->line, order, collation, spec.has_headings));
            }
            if (spec.keys.empty()) fail(e->line, "'keys' lists no columns");
            check_entries(spec.keys.size(), e->line, "[sort] keys");
            job.warnings.insert(job.warnings.end(), warnings.begin(), warnings.end());
        } else {
            SortKey key;
            key.order = order;
            key.collation = collation;
            spec.keys.push_back(key);
        }
        if (const Entry* e = find("sort", "memory_budget_rows")) spec.memory_budget_rows = count(*e);
        if (const Entry* e = find("sort", "scratch_dir")) spec.scratch_dir = path_value(*e);
        spec.csv_mode = csv_mode("sort");
        spec.max_records = limits_.max_rows;
        job.sort = std::move(spec);
    }

    void subtotals(JobConfig& job) {
        SubtotalConfig config;
        const auto jobs = all("subtotals", "job");
        if (jobs.empty()) fail(section_line("subtotals"), "[subtotals] needs at least one 'job = measures : group-by'");
        if (jobs.size() > limits_.max_control_entries) {
            check_entries(jobs.size(), jobs[limits_.max_control_entries]->line, "[subtotals]");
        }
        for (const Entry* e : jobs) {
            const std::string where = source_ + ":" + std::to_string(e->line);
            std::vector<std::string> parts;
            std::string_view rest = e->value;
            while (true) {
                const std::size_t colon = rest.find(':');
                parts.emplace_back(trim_spaces(rest.substr(0, colon)));
                if (colon == std::string_view::npos) break;
                rest.remove_prefix(colon + 1);
            }
            if (parts.size() < 2 || parts.size() > 3) fail(e->line, "expected 'job = measures : group-by [: sum|count]'");
            SubtotalJob sj;
            sj.measures = split_column_list(parts[0], where, job.warnings);
            sj.group_by = split_column_list(parts[1], where, job.warnings);
            if (sj.measures.empty()) fail(e->line, "subtotal job lists no measure columns");
            if (sj.group_by.empty()) fail(e->line, "subtotal job lists no group-by columns");
            if (parts.size() == 3) {
                const std::string agg = to_lower_ascii(trim_spaces(parts[2]));
                if (agg == "sum") {
                    sj.aggregate = Aggregate::Sum;
                } else if (agg == "count") {
                    sj.aggregate = Aggregate::Count;
                } else {
                    fail(e->line, "aggregate must be sum or count, found '" + agg + "'");
                }
            }
            for (const auto& m : sj.measures) {
                for (const auto& g : sj.group_by) {
                    if (compare_text_ci(m, g) == 0) fail(e->line, "column '" + m + "' is both measured and grouped");
                }
            }
            config.jobs.push_back(std::move(sj));
        }
        for (const Entry* e : all("subtotals", "alias")) {
            const std::size_t colon = e->value.find(':');
            if (colon == std::string::npos) fail(e->line, "expected 'alias = <name> : <column>'");
            std::string alias(trim_spaces(std::string_view(e->value).substr(0, colon)));
            std::string column(trim_spaces(std::string_view(e->value).substr(colon + 1)));
            if (alias.empty() || column.empty()) fail(e->line, "expected 'alias = <name> : <column>'");
            config.aliases.emplace_back(std::move(alias), std::move(column));
        }
        config.output_path = path_value(require("subtotals", "output"));
        config.format = choice<ReportFormat>("subtotals", "format", ReportFormat::Csv,
                                             {{"csv", ReportFormat::Csv}, {"aligned-text", ReportFormat::AlignedText}});
        job.subtotals = std::move(config);
    }

    void compare(JobConfig& job) {
        CompareSpec spec;
        spec.left_path = path_value(require("compare", "left"));
        spec.right_path = path_value(require("compare", "right"));
        spec.output_path = path_value(require("compare", "output"));
        spec.left_range = range_name(job, "compare", "left_range", "LeftCells");
        spec.right_range = range_name(job, "compare", "right_range", "RightCells");
        spec.status_cell = range_name(job, "compare", "status_cell", "Status");
        spec.has_headings = flag("compare", "headings", true);
        spec.field_diffs = flag("compare", "field_diffs", false);
        spec.csv_mode = csv_mode("compare");
        job.compare = std::move(spec);
    }

    std::filesystem::path path_;
    std::string source_;
    std::filesystem::path base_;
    FileLoader& files_;
    std::map<std::string, SectionBlock> sections_;
    JobLimits limits_;
};

}  // namespace

JobConfig load_job(const std::filesystem::path& path, FileLoader* loader) {
    FileLoader fallback;
    FileLoader& files = loader ? *loader : fallback;
    auto text = files.read(path);
    if (!text) throw ConfigError("cannot read job file '" + path.string() + "'");
    return JobParser(path, files).parse(*text);
}

HeaderTranslation make_translation(std::span<const std::string> header, const SubtotalConfig& config) {
    HeaderTranslation t = HeaderTranslation::from_header(header);
    for (const auto& [alias, column] : config.aliases) t.add_alias(alias, column);
    return t;
}

}  // namespace rowcalc
