#include "rowcalc/sortio.hpp"

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <memory>
#include <optional>
#include <queue>
#include <random>

#include "rowcalc/address.hpp"
#include "rowcalc/value.hpp"

namespace rowcalc {

BadControlTable::BadControlTable(std::string cell_, std::string detail_)
    : ConfigError(cell_.empty() ? "control table: " + detail_ : "control table cell " + cell_ + ": " + detail_),
      cell(std::move(cell_)),
      detail(std::move(detail_)) {}

int compare_fields(std::string_view a, std::string_view b, Collation collation) {
    if (collation == Collation::NumericAware) {
        const auto na = parse_number(a);
        const auto nb = parse_number(b);
        if (na && nb) return *na < *nb ? -1 : (*na > *nb ? 1 : 0);
        if (na) return -1;
        if (nb) return 1;
    }
    return compare_text_ci(a, b);
}

int compare_records(const Record& a, const Record& b, std::span<const ResolvedKey> keys) {
    for (const ResolvedKey& key : keys) {
        int c = compare_fields(a[key.index], b[key.index], key.collation);
        if (c != 0) return key.order == SortOrder::Asc ? c : -c;
    }
    return 0;
}

std::vector<ResolvedKey> resolve_keys(std::span<const SortKey> keys, const Record* header) {
    if (keys.empty()) throw ConfigError("a sort needs at least one key");
    std::vector<ResolvedKey> out;
    for (const SortKey& key : keys) {
        ResolvedKey r{0, key.order, key.collation};
        if (!key.name.empty()) {
            if (!header) throw ConfigError("sort key '" + key.name + "' names a column but the file has no headings");
            auto it = std::find_if(header->begin(), header->end(), [&](const std::string& h) {
                return compare_text_ci(trim_spaces(h), trim_spaces(key.name)) == 0;
            });
            if (it == header->end()) throw MissingColumn("sort key column '" + key.name + "' is not in the heading");
            r.index = static_cast<std::size_t>(it - header->begin());
        } else {
            if (key.column < 1) throw ConfigError("sort key columns are 1-based");
            r.index = key.column - 1;
        }
        out.push_back(r);
    }
    return out;
}

namespace {

std::size_t needed_width(std::span<const ResolvedKey> keys) {
    std::size_t w = 0;
    for (const auto& k : keys) w = std::max(w, k.index + 1);
    return w;
}

void check_width(const Record& row, std::size_t width, std::size_t line) {
    if (row.size() < width) {
        throw MissingColumn("line " + std::to_string(line) + " has " + std::to_string(row.size()) +
                            " fields; the sort keys need " + std::to_string(width));
    }
}

struct Row {
    Record fields;
    std::string raw;
};

void stable_sort_rows(std::vector<Row>& rows, std::span<const ResolvedKey> keys) {
    std::stable_sort(rows.begin(), rows.end(),
                     [&](const Row& a, const Row& b) { return compare_records(a.fields, b.fields, keys) < 0; });
}

// Scratch directory removed (with its contents) on scope exit.
class ScratchDir {
public:
    explicit ScratchDir(const std::filesystem::path& parent) {
        std::random_device rd;
        std::mt19937_64 rng(rd());
        std::filesystem::path base = parent.empty() ? std::filesystem::temp_directory_path() : parent;
        for (int attempt = 0; attempt < 100; ++attempt) {
            auto candidate = base / ("rowcalc-sort-" + std::to_string(rng()));
            std::error_code ec;
            if (std::filesystem::create_directories(candidate, ec)) {
                path_ = candidate;
                return;
            }
        }
        throw IoError("cannot create a scratch directory under '" + base.string() + "'");
    }
    ~ScratchDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    ScratchDir(const ScratchDir&) = delete;
    ScratchDir& operator=(const ScratchDir&) = delete;

    std::filesystem::path file(std::size_t n) const { return path_ / ("runs-" + std::to_string(n) + ".bin"); }

private:
    std::filesystem::path path_;
};

void write_rows(std::ostream& out, const std::vector<Row>& rows) {
    for (const Row& r : rows) {
        out << r.raw << '\n';
    }
}

// Sorted runs of one merge pass, appended to a single scratch file. Each row
// is stored as its field count, the fields and the raw text, every string
// length-prefixed, so merging never re-parses delimited text.
class RunStore {
public:
    struct Extent {
        std::uint64_t begin = 0;
        std::uint64_t end = 0;
    };

    explicit RunStore(std::filesystem::path path) : path_(std::move(path)), out_(path_, std::ios::binary) {
        if (!out_) throw IoError("cannot create sort run file '" + path_.string() + "'");
    }

    void begin_run() { start_ = written_; }
    void add(const Record& fields, const std::string& raw) {
        put(fields.size());
        for (const auto& f : fields) put_string(f);
        put_string(raw);
    }
    void end_run() { runs_.push_back({start_, written_}); }

    // Flushes and closes the file; the runs can then be read back.
    void finish() {
        out_.close();
        if (!out_) throw IoError("failed writing sort run file '" + path_.string() + "'");
    }

    const std::filesystem::path& path() const { return path_; }
    const std::vector<Extent>& runs() const { return runs_; }

private:
    void put(std::uint64_t n) {
        out_.write(reinterpret_cast<const char*>(&n), sizeof n);
        written_ += sizeof n;
    }
    void put_string(const std::string& text) {
        put(text.size());
        out_.write(text.data(), static_cast<std::streamsize>(text.size()));
        written_ += text.size();
    }

    std::filesystem::path path_;
    std::ofstream out_;
    std::vector<Extent> runs_;
    std::uint64_t start_ = 0;
    std::uint64_t written_ = 0;
};

// Reads one run back through a stream shared by every cursor of the merge.
class RunCursor {
public:
    RunCursor(std::istream& in, RunStore::Extent extent) : in_(in), next_(extent.begin), end_(extent.end) {
        advance();
    }
    bool done() const { return done_; }
    const Record& fields() const { return fields_; }
    const std::string& raw() const { return raw_; }

    void advance() {
        if (pos_ == buffer_.size() && next_ == end_) {
            done_ = true;
            return;
        }
        fields_.resize(static_cast<std::size_t>(get()));
        for (auto& f : fields_) get_string(f);
        get_string(raw_);
    }

private:
    static constexpr std::uint64_t kChunk = 64 * 1024;

    void need(std::size_t n) {
        if (buffer_.size() - pos_ >= n) return;
        buffer_.erase(0, pos_);
        pos_ = 0;
        const std::uint64_t want = std::min(end_ - next_, std::max<std::uint64_t>(kChunk, n - buffer_.size()));
        const std::size_t old = buffer_.size();
        buffer_.resize(old + static_cast<std::size_t>(want));
        in_.clear();
        in_.seekg(static_cast<std::streamoff>(next_));
        in_.read(buffer_.data() + old, static_cast<std::streamsize>(want));
        if (static_cast<std::uint64_t>(in_.gcount()) != want || buffer_.size() < n) {
            throw IoError("sort run file is truncated");
        }
        next_ += want;
    }
    std::uint64_t get() {
        need(sizeof(std::uint64_t));
        std::uint64_t n;
        std::copy_n(buffer_.data() + pos_, sizeof n, reinterpret_cast<char*>(&n));
        pos_ += sizeof n;
        return n;
    }
    void get_string(std::string& out) {
        const auto n = static_cast<std::size_t>(get());
        need(n);
        out.assign(buffer_, pos_, n);
        pos_ += n;
    }

    std::istream& in_;
    std::uint64_t next_;
    std::uint64_t end_;
    std::string buffer_;
    std::size_t pos_ = 0;
    Record fields_;
    std::string raw_;
    bool done_ = false;
};

// Merges the given runs of a store in order; on equal keys the earlier
// run wins, which keeps the merge stable.
template <typename Sink>
void merge_runs(std::istream& in, std::span<const RunStore::Extent> runs, std::span<const ResolvedKey> keys,
                Sink&& sink) {
    std::vector<std::unique_ptr<RunCursor>> cursors;
    cursors.reserve(runs.size());
    for (const auto& extent : runs) cursors.push_back(std::make_unique<RunCursor>(in, extent));

    auto later = [&](std::size_t a, std::size_t b) {
        int c = compare_records(cursors[a]->fields(), cursors[b]->fields(), keys);
        return c != 0 ? c > 0 : a > b;
    };
    std::priority_queue<std::size_t, std::vector<std::size_t>, decltype(later)> heap(later);
    for (std::size_t i = 0; i < cursors.size(); ++i) {
        if (!cursors[i]->done()) heap.push(i);
    }
    while (!heap.empty()) {
        const std::size_t i = heap.top();
        heap.pop();
        sink(cursors[i]->fields(), cursors[i]->raw());
        cursors[i]->advance();
        if (!cursors[i]->done()) heap.push(i);
    }
}

constexpr std::size_t kMergeFanIn = 32;

}  // namespace

void sort_records(std::vector<Record>& rows, std::span<const ResolvedKey> keys) {
    const std::size_t width = needed_width(keys);
    for (std::size_t i = 0; i < rows.size(); ++i) check_width(rows[i], width, i + 1);
    std::stable_sort(rows.begin(), rows.end(),
                     [&](const Record& a, const Record& b) { return compare_records(a, b, keys) < 0; });
}

SortResult sort_file(const SortSpec& spec) {
    std::ifstream in(spec.input_path, std::ios::binary);
    if (!in) throw IoError("cannot open sort input '" + spec.input_path.string() + "'");
    RecordReader reader(in, spec.csv_mode);

    std::optional<RawRecord> header;
    if (spec.has_headings) header = reader.next();
    const std::vector<ResolvedKey> keys = resolve_keys(spec.keys, header ? &header->fields : nullptr);
    const std::size_t width = needed_width(keys);
    const std::size_t budget = spec.memory_budget_rows == 0 ? SIZE_MAX : spec.memory_budget_rows;

    SortResult result;
    std::vector<Row> chunk;
    std::optional<ScratchDir> scratch;
    std::optional<RunStore> store;
    std::size_t files_made = 0;

    auto flush_run = [&] {
        stable_sort_rows(chunk, keys);
        if (!scratch) scratch.emplace(spec.scratch_dir);
        if (!store) store.emplace(scratch->file(files_made++));
        store->begin_run();
        for (const Row& r : chunk) store->add(r.fields, r.raw);
        store->end_run();
        chunk.clear();
    };

    while (auto record = reader.next()) {
        check_width(record->fields, width, record->line);
        ++result.rows;
        if (spec.max_records != 0 && result.rows > spec.max_records) {
            throw LimitExceeded("sort input has more than max_rows = " + std::to_string(spec.max_records) + " rows");
        }
        chunk.push_back({std::move(record->fields), std::move(record->raw)});
        if (chunk.size() >= budget) flush_run();
    }

    auto open_output = [&] {
        std::ofstream out(spec.output_path, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError("cannot open sort output '" + spec.output_path.string() + "'");
        if (header) out << header->raw << '\n';
        return out;
    };

    if (!store) {
        stable_sort_rows(chunk, keys);
        std::ofstream out = open_output();
        write_rows(out, chunk);
        if (!out) throw IoError("failed writing sort output '" + spec.output_path.string() + "'");
        result.runs = 1;
        return result;
    }
    if (!chunk.empty()) flush_run();
    store->finish();
    result.runs = store->runs().size();

    auto open_runs = [](const RunStore& s) {
        std::ifstream in(s.path(), std::ios::binary);
        if (!in) throw IoError("cannot reopen sort run file '" + s.path().string() + "'");
        return in;
    };

    // Merge passes until one group of runs remains.
    while (store->runs().size() > kMergeFanIn) {
        RunStore next(scratch->file(files_made++));
        {
            std::ifstream in = open_runs(*store);
            const auto& runs = store->runs();
            for (std::size_t i = 0; i < runs.size(); i += kMergeFanIn) {
                const std::size_t n = std::min(runs.size() - i, kMergeFanIn);
                next.begin_run();
                merge_runs(in, std::span(runs).subspan(i, n), keys,
                           [&](const Record& fields, const std::string& raw) { next.add(fields, raw); });
                next.end_run();
            }
        }
        next.finish();
        std::filesystem::remove(store->path());
        store.reset();
        store.emplace(std::move(next));
    }

    std::ofstream out = open_output();
    {
        std::ifstream in = open_runs(*store);
        merge_runs(in, std::span(store->runs()), keys,
                   [&](const Record&, const std::string& raw) { out << raw << '\n'; });
    }
    if (!out) throw IoError("failed writing sort output '" + spec.output_path.string() + "'");
    return result;
}

// ---------------------------------------------------------------------------

namespace {

std::string cell_name(std::size_t row, std::size_t col) {
    return column_letters(static_cast<std::int32_t>(col + 1)) + std::to_string(row + 1);
}

std::string_view cell_at(const std::vector<std::vector<std::string>>& block, std::size_t row, std::size_t col) {
    if (row >= block.size() || col >= block[row].size()) return {};
    return block[row][col];
}

std::string trimmed_value(const std::vector<std::vector<std::string>>& block, std::size_t row, std::size_t col,
                          std::vector<std::string>& warnings) {
    const std::string_view raw = cell_at(block, row, col);
    const std::string_view t = trim_spaces(raw);
    if (t.size() != raw.size()) {
        warnings.push_back("superfluous spaces in " + cell_name(row, col) + " ('" + std::string(raw) + "')");
    }
    return std::string(t);
}

void expect_label(const std::vector<std::vector<std::string>>& block, std::size_t row, std::size_t col,
                  std::string_view label, std::vector<std::string>& warnings) {
    const std::string value = trimmed_value(block, row, col, warnings);
    if (compare_text_ci(value, label) != 0) {
        throw BadControlTable(cell_name(row, col), "expected label '" + std::string(label) + "', found '" + value + "'");
    }
}

}  // namespace

SortParams parse_sort_params(const std::vector<std::vector<std::string>>& block) {
    SortParams params;
    auto& warnings = params.warnings;

    for (std::size_t r = 0; r < block.size(); ++r) {
        for (std::size_t c = 0; c < block[r].size(); ++c) {
            if ((r >= 4 || c >= 2) && !trim_spaces(block[r][c]).empty()) {
                throw BadControlTable(cell_name(r, c), "value outside the 4x2 SortParams block");
            }
        }
    }

    expect_label(block, 0, 0, "Sort In", warnings);
    expect_label(block, 1, 0, "Sort Out", warnings);
    expect_label(block, 2, 0, "Headings ?", warnings);
    expect_label(block, 2, 1, "Ascending/Descending", warnings);

    params.spec.input_path = trimmed_value(block, 0, 1, warnings);
    if (params.spec.input_path.empty()) throw BadControlTable("B1", "sort input path is empty");
    params.spec.output_path = trimmed_value(block, 1, 1, warnings);
    if (params.spec.output_path.empty()) throw BadControlTable("B2", "sort output path is empty");

    const std::string headings = to_lower_ascii(trimmed_value(block, 3, 0, warnings));
    if (headings == "y") {
        params.spec.has_headings = true;
    } else if (headings == "n") {
        params.spec.has_headings = false;
    } else {
        throw BadControlTable("A4", "headings must be 'y' or 'n', found '" + headings + "'");
    }

    const std::string order = to_lower_ascii(trimmed_value(block, 3, 1, warnings));
    SortKey key;
    if (order == "asc") {
        key.order = SortOrder::Asc;
    } else if (order == "desc") {
        key.order = SortOrder::Desc;
    } else {
        throw BadControlTable("B4", "order must be 'asc' or 'desc', found '" + order + "'");
    }
    params.spec.keys = {key};
    return params;
}

}  // namespace rowcalc
