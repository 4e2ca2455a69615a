// Acceptance checks. Prints one PASS/FAIL line per criterion with its timing
// and exits non-zero when any criterion fails.

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <functional>
#include <map>
#include <set>
#include <sstream>
#include <string>

#include "rowcalc/calc.hpp"
#include "rowcalc/cli.hpp"
#include "rowcalc/config.hpp"
#include "rowcalc/functions.hpp"
#include "rowcalc/pipeline.hpp"
#include "rowcalc/report.hpp"
#include "rowcalc/sortio.hpp"
#include "rowcalc/value.hpp"
#include "support.hpp"

using namespace rowcalc;
using rowcalc::testkit::Rng;
using rowcalc::testkit::uniform;

namespace {

struct Verdict {
    bool ok = true;
    std::string detail;
};

int failures = 0;

void criterion(const char* id, const char* title, double limit_seconds, const std::function<Verdict()>& body) {
    const auto started = std::chrono::steady_clock::now();
    Verdict v;
    try {
        v = body();
    } catch (const std::exception& e) {
        v = {false, std::string("exception: ") + e.what()};
    }
    const double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    const bool in_time = elapsed < limit_seconds;
    const bool pass = v.ok && in_time;
    if (!pass) ++failures;
    std::printf("%s %s  %s  (%.4f s, limit %g s)%s%s\n", id, pass ? "PASS" : "FAIL", title, elapsed, limit_seconds,
                v.detail.empty() ? "" : "  ", v.detail.c_str());
    if (v.ok && !in_time) std::printf("%s     over the time limit\n", id);
    std::fflush(stdout);
}

int cli(std::vector<std::string> args) {
    args.insert(args.begin(), "rowcalc");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out, err;
    return run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
}

std::map<std::string, int> roman_values() {
    std::map<std::string, int> m;
    for (int n = 1; n <= 3999; ++n) m[testkit::roman_oracle(n)] = n;
    return m;
}

std::vector<CellValue> formula_values(const Workbook& wb) {
    std::vector<CellValue> out;
    for (const CellKey& k : wb.formula_cells()) out.push_back(wb.value_at(k));
    return out;
}

std::vector<std::string> lines_of(const std::string& text) {
    std::vector<std::string> out;
    std::istringstream in(text);
    for (std::string line; std::getline(in, line);) out.push_back(line);
    return out;
}

// AC1 ---------------------------------------------------------------------

Verdict roman_rule(const Workbook& loaded) {
    Workbook scratch;
    scratch.add_sheet("S");
    const CellValue direct = evaluate(parse_formula("=ARABIC(\"MCDLIX\")"), EvalContext{scratch});
    if (direct != CellValue(1459)) return {false, "ARABIC(\"MCDLIX\") = " + render(direct)};

    Workbook wb = loaded;
    Calculator calc(wb);
    const double expected[] = {1000, 400, 50, 9};
    const char* cells[] = {"Roman!B8", "Roman!C8", "Roman!D8", "Roman!E8"};
    for (int i = 0; i < 4; ++i) {
        const CellValue v = wb.get_value(parse_a1(cells[i]));
        if (v != CellValue(expected[i])) return {false, std::string(cells[i]) + " = " + render(v)};
    }
    const CellValue total = wb.get_value(wb.resolve_name("Answer").start);
    if (total != CellValue(1459)) return {false, "Answer = " + render(total)};
    return {true, "1000 + 400 + 50 + 9 = 1459"};
}

// AC2 ---------------------------------------------------------------------

Verdict roman_round_trip() {
    int bad = 0;
    for (int n = 1; n <= 3999; ++n) {
        if (arabic(roman(CellValue(n))) != CellValue(n)) ++bad;
    }
    return {bad == 0, std::to_string(bad) + " failures over 1..3999"};
}

// AC3 ---------------------------------------------------------------------

Verdict caesar_end_to_end() {
    testkit::TempDir dir;
    dir.copy_fixtures({"caesar.job", "caesar.sheet", "caesar_input.csv"});
    const int code = cli({"run", (dir / "caesar.job").string(), "--quiet"});
    const std::string out = testkit::read_file(dir / "caesar_output.csv");
    const std::string expected = "Id,Item,Colour,Number\n1,Toga,Purple,1459\n";
    return {code == 0 && out == expected, "exit " + std::to_string(code) + ", output " +
                                              (out == expected ? "byte-exact" : "differs")};
}

// AC4 ---------------------------------------------------------------------

Verdict dedup_oracle() {
    testkit::TempDir dir;
    dir.copy_fixtures({"dedup.job", "dedup.sheet"});
    Rng rng(2024);
    auto rows = testkit::sales_records(rng, 1000, 0.25);
    std::shuffle(rows.begin(), rows.end(), rng);
    testkit::write_file(dir / "sales.csv", "Id,Item,Colour,Number\n" + testkit::join_lines(rows));

    const int code = cli({"run", (dir / "dedup.job").string(), "--quiet"});
    if (code != 0) return {false, "run exited " + std::to_string(code)};

    // Oracle: stable sort by integer Id, keep the first record per Id.
    auto sorted = rows;
    std::stable_sort(sorted.begin(), sorted.end(),
                     [](const Record& a, const Record& b) { return std::stoi(a[0]) < std::stoi(b[0]); });
    const auto romans = roman_values();
    std::vector<std::string> expected{"Id,Item,Colour,Number"};
    for (const auto& r : testkit::first_per_key(sorted, 0)) {
        expected.push_back(r[0] + "," + r[1] + "," + r[2] + "," + std::to_string(romans.at(r[3])));
    }
    const auto got = lines_of(testkit::read_file(dir / "sales_dedup.csv"));
    std::size_t diffs = got.size() > expected.size() ? got.size() - expected.size() : expected.size() - got.size();
    for (std::size_t i = 0; i < std::min(got.size(), expected.size()); ++i) diffs += got[i] != expected[i];
    return {diffs == 0, std::to_string(expected.size() - 1) + " unique of 1000, " + std::to_string(diffs) + " diffs"};
}

// AC5 ---------------------------------------------------------------------

Verdict sort_properties() {
    static const char* words[] = {"toga", "Toga", "tunic", "belt", "10", "9", "2.5", "-1", "", "cloak", "007", "7"};
    Rng rng(55);
    testkit::TempDir dir;
    std::size_t problems = 0, external_checked = 0;
    for (int table = 0; table < 200; ++table) {
        const std::size_t rows_n = static_cast<std::size_t>(uniform(rng, 0, 5000));
        const std::size_t cols = static_cast<std::size_t>(uniform(rng, 1, 5));
        std::vector<Record> rows(rows_n);
        for (std::size_t r = 0; r < rows_n; ++r) {
            for (std::size_t c = 0; c < cols; ++c) rows[r].push_back(words[uniform(rng, 0, 11)]);
            rows[r].push_back(std::to_string(r));  // sequence tag, the sixth column at most
        }
        std::vector<SortKey> keys;
        std::vector<ResolvedKey> resolved;
        for (int k = uniform(rng, 1, 3); k > 0; --k) {
            SortKey key;
            key.column = static_cast<std::size_t>(uniform(rng, 1, static_cast<int>(cols)));
            key.order = testkit::chance(rng, 0.5) ? SortOrder::Asc : SortOrder::Desc;
            key.collation = testkit::chance(rng, 0.5) ? Collation::NumericAware : Collation::Text;
            keys.push_back(key);
            resolved.push_back({key.column - 1, key.order, key.collation});
        }

        auto sorted = rows;
        sort_records(sorted, resolved);

        auto a = rows, b = sorted;
        std::sort(a.begin(), a.end());
        std::sort(b.begin(), b.end());
        if (a != b) ++problems;

        for (std::size_t i = 1; i < sorted.size(); ++i) {
            const int c = compare_records(sorted[i - 1], sorted[i], resolved);
            if (c > 0 || (c == 0 && std::stoul(sorted[i - 1].back()) > std::stoul(sorted[i].back()))) {
                ++problems;
                break;
            }
        }

        auto sequential = rows;
        for (auto k = resolved.rbegin(); k != resolved.rend(); ++k) {
            const ResolvedKey one[] = {*k};
            sort_records(sequential, one);
        }
        if (sequential != sorted) ++problems;

        SortSpec spec;
        spec.input_path = dir / "in.csv";
        spec.has_headings = false;
        spec.keys = keys;
        testkit::write_file(spec.input_path, testkit::join_lines(rows));
        spec.output_path = dir / "memory.csv";
        sort_file(spec);
        spec.output_path = dir / "external.csv";
        spec.memory_budget_rows = 2;
        spec.scratch_dir = dir.path();
        sort_file(spec);
        const std::string memory = testkit::read_file(dir / "memory.csv");
        if (memory != testkit::join_lines(sorted)) ++problems;
        if (memory != testkit::read_file(dir / "external.csv")) ++problems;
        ++external_checked;
    }
    return {problems == 0, "200 tables, " + std::to_string(external_checked) + " external sorts at budget 2, " +
                               std::to_string(problems) + " problems"};
}

// AC6 ---------------------------------------------------------------------

Verdict calc_properties() {
    Rng rng(606);
    std::size_t divergences = 0;
    for (int trial = 0; trial < 1000; ++trial) {
        testkit::RandomWorkbook model = testkit::random_workbook(rng, 50);
        Workbook wb = model.build();
        Calculator calc(wb);

        testkit::RandomWorkbook changed = model;
        std::vector<CellKey> dirty;
        const auto literals = model.literal_indices();
        if (!literals.empty()) {
            for (int n = uniform(rng, 1, static_cast<int>(literals.size())); n > 0; --n) {
                const std::size_t idx = literals[static_cast<std::size_t>(uniform(rng, 0, int(literals.size()) - 1))];
                const CellValue v = testkit::random_literal(rng);
                wb.set_cell(model.cells[idx].address, v);
                changed.cells[idx].literal = v;
                dirty.push_back(wb.key_of(model.cells[idx].address));
            }
        }
        calc.recalculate(std::span<const CellKey>(dirty));
        const auto incremental = formula_values(wb);

        Workbook fresh = changed.build();
        Calculator full(fresh);
        if (formula_values(fresh) != incremental) ++divergences;

        calc.recalculate_all();
        if (formula_values(wb) != incremental) ++divergences;
        calc.recalculate(std::span<const CellKey>(dirty));
        if (formula_values(wb) != incremental) ++divergences;
    }
    return {divergences == 0, "1000 workbooks, " + std::to_string(divergences) + " divergences"};
}

// AC7 ---------------------------------------------------------------------

Verdict throughput(double& seconds) {
    testkit::TempDir dir;
    dir.copy_fixtures({"caesar.job", "caesar.sheet"});
    Rng rng(7);
    const auto rows = testkit::sales_records(rng, 50000, 0.0);
    testkit::write_file(dir / "caesar_input.csv", "Id,Item,Colour,Number\n" + testkit::join_lines(rows));

    Workbook wb = load_definition(dir / "caesar.sheet");
    const JobConfig job = load_job(dir / "caesar.job");
    Calculator calc(wb);
    const auto started = std::chrono::steady_clock::now();
    const RunStats stats = run_pipeline(*job.pipeline, calc);
    seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    const bool ok = stats.records_read == 50000 && stats.records_written == 50000 && stats.conserved();
    char detail[160];
    std::snprintf(detail, sizeof detail, "50000 records in %.3f s (%.0f records/s; target 10 s)", seconds,
                  50000 / std::max(seconds, 1e-9));
    return {ok, detail};
}

// AC8 ---------------------------------------------------------------------

Verdict subtotal_oracle() {
    static const char* items[] = {"Toga", "Tunic", "Sandals", "Cloak", "Belt"};
    static const char* colours[] = {"Purple", "White", "Red", "Brown"};
    const std::vector<std::string> header{"Id", "Item", "Colour", "Number", "Amount"};
    Rng rng(88);
    std::vector<Record> records;
    for (int i = 0; i < 1000; ++i) {
        records.push_back({std::to_string(i + 1), items[uniform(rng, 0, 4)], colours[uniform(rng, 0, 3)],
                           std::to_string(uniform(rng, 1, 3999)), std::to_string(uniform(rng, -500, 100000))});
    }
    const std::vector<std::vector<std::string>> block{{"Subtotal these Amounts", "for Column Names"},
                                                      {"Number", "Item, Colour"},
                                                      {"Number, Amount", "Item"}};
    const SubtotalSpec spec = parse_subtotal_spec(block, HeaderTranslation::from_header(header));
    if (spec.jobs.size() != 2) return {false, "expected two jobs"};

    std::size_t diffs = 0;
    for (const SubtotalJob& job : spec.jobs) {
        const ReportTable table = aggregate(records, job);
        // Brute force: every distinct key, then a full scan per key and measure.
        std::set<std::vector<std::string>> keys;
        for (const auto& r : records) {
            std::vector<std::string> k;
            for (auto c : job.group_columns) k.push_back(r[c]);
            keys.insert(k);
        }
        if (table.rows.size() != keys.size()) ++diffs;
        std::size_t i = 0;
        for (const auto& k : keys) {
            if (i >= table.rows.size()) break;
            const ReportRow& row = table.rows[i++];
            if (row.key != k) ++diffs;
            for (std::size_t m = 0; m < job.measure_columns.size(); ++m) {
                double sum = 0;
                for (const auto& r : records) {
                    bool match = true;
                    for (std::size_t g = 0; g < job.group_columns.size(); ++g) match &= r[job.group_columns[g]] == k[g];
                    if (match) sum += std::stod(r[job.measure_columns[m]]);
                }
                if (row.values[m] != sum) ++diffs;
            }
        }
        for (std::size_t m = 0; m < job.measure_columns.size(); ++m) {
            double total = 0, grouped = 0;
            for (const auto& r : records) total += std::stod(r[job.measure_columns[m]]);
            for (const auto& row : table.rows) grouped += row.values[m];
            if (total != grouped) ++diffs;
        }
    }
    return {diffs == 0, "2 jobs over 1000 records, " + std::to_string(diffs) + " diffs"};
}

// AC9 ---------------------------------------------------------------------

Verdict compare_oracle() {
    Rng rng(99);
    testkit::TempDir dir;
    std::size_t diffs = 0;
    for (int pair = 0; pair < 20; ++pair) {
        std::vector<int> left_ids, right_ids;
        std::set<int> changed;
        std::string left = "Id,Item,Colour,Number\n", right = left;
        for (int id = 1; id <= 1000; ++id) {
            const int fate = uniform(rng, 0, 9);  // 0: left only, 1: right only, 2: changed, else equal
            const std::string row = std::to_string(id) + ",Toga,Purple," + std::to_string(id % 97);
            if (fate != 1) {
                left_ids.push_back(id);
                left += row + "\n";
            }
            if (fate != 0) {
                right_ids.push_back(id);
                right += fate == 2 ? std::to_string(id) + ",Toga,White," + std::to_string(id % 97) + "\n" : row + "\n";
                if (fate == 2) changed.insert(id);
            }
        }
        testkit::write_file(dir / "left.csv", left);
        testkit::write_file(dir / "right.csv", right);

        Workbook wb = load_definition(testkit::fixture("compare.sheet"));
        Calculator calc(wb);
        CompareSpec spec;
        spec.left_path = dir / "left.csv";
        spec.right_path = dir / "right.csv";
        spec.field_diffs = true;
        const DiffReport report = compare_files(spec, calc);

        std::vector<int> only_left, only_right, got_left, got_right;
        std::set<int> got_changed;
        std::set_difference(left_ids.begin(), left_ids.end(), right_ids.begin(), right_ids.end(),
                            std::back_inserter(only_left));
        std::set_difference(right_ids.begin(), right_ids.end(), left_ids.begin(), left_ids.end(),
                            std::back_inserter(only_right));
        for (const auto& e : report.entries) {
            if (e.side == DiffSide::LeftOnly) got_left.push_back(std::stoi(e.left[0]));
            if (e.side == DiffSide::RightOnly) got_right.push_back(std::stoi(e.right[0]));
            if (e.side == DiffSide::Changed) {
                got_changed.insert(std::stoi(e.left[0]));
                if (e.changed_fields != std::vector<std::size_t>{3}) ++diffs;
            }
        }
        diffs += got_left != only_left;
        diffs += got_right != only_right;
        diffs += got_changed != changed;
    }
    return {diffs == 0, "20 file pairs of 1000 keys, " + std::to_string(diffs) + " diffs"};
}

}  // namespace

int main() {
    // Fixture loading is setup, not part of the timed rule.
    const Workbook roman_steps = load_definition(testkit::fixture("roman_steps.sheet"));
    criterion("AC1", "Roman rule and decomposition", 0.001, [&] { return roman_rule(roman_steps); });
    criterion("AC2", "Roman round trip 1..3999", 1.0, roman_round_trip);
    criterion("AC3", "Caesar job end to end", 1.0, caesar_end_to_end);
    criterion("AC4", "dedup against first-occurrence oracle", 5.0, dedup_oracle);
    criterion("AC5", "sort properties and external equivalence", 30.0, sort_properties);
    criterion("AC6", "calc idempotence and incremental equivalence", 30.0, calc_properties);
    double seconds = 0;
    criterion("AC7", "throughput benchmark", 60.0, [&] { return throughput(seconds); });
    criterion("AC8", "subtotal oracle", 5.0, subtotal_oracle);
    criterion("AC9", "compare against set-difference oracle", 5.0, compare_oracle);
    std::printf("%s\n", failures == 0 ? "all criteria passed" : "some criteria failed");
    return failures == 0 ? 0 : 1;
}
