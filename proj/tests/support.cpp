#include "support.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "rowcalc/address.hpp"
#include "rowcalc/value.hpp"

namespace rowcalc::testkit {

std::filesystem::path fixture(const std::string& name) { return std::filesystem::path(ROWCALC_FIXTURE_DIR) / name; }

TempDir::TempDir() {
    static std::random_device rd;
    auto base = std::filesystem::temp_directory_path();
    for (;;) {
        auto candidate = base / ("rowcalc-test-" + std::to_string(rd()) + std::to_string(rd()));
        if (std::filesystem::create_directory(candidate)) {
            path_ = candidate;
            return;
        }
    }
}

TempDir::~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
}

void TempDir::copy_fixtures(const std::vector<std::string>& names) const {
    for (const auto& n : names) std::filesystem::copy_file(fixture(n), path_ / n);
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

void write_file(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out << text;
}

std::string join_lines(const std::vector<Record>& rows) {
    std::string out;
    for (const auto& r : rows) {
        for (std::size_t i = 0; i < r.size(); ++i) {
            if (i) out += ',';
            out += r[i];
        }
        out += '\n';
    }
    return out;
}

int uniform(Rng& rng, int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); }

bool chance(Rng& rng, double p) { return std::bernoulli_distribution(p)(rng); }

std::string roman_oracle(int n) {
    static const std::pair<int, const char*> table[] = {{1000, "M"}, {900, "CM"}, {500, "D"}, {400, "CD"},
                                                        {100, "C"},  {90, "XC"},  {50, "L"},  {40, "XL"},
                                                        {10, "X"},   {9, "IX"},   {5, "V"},   {4, "IV"},
                                                        {1, "I"}};
    std::string out;
    for (const auto& [value, symbol] : table) {
        while (n >= value) {
            out += symbol;
            n -= value;
        }
    }
    return out;
}

std::vector<Record> sales_records(Rng& rng, std::size_t rows, double duplicate_rate) {
    static const char* items[] = {"Toga", "Tunic", "Sandals", "Cloak", "Belt"};
    static const char* colours[] = {"Purple", "White", "Red", "Brown"};
    std::vector<Record> out;
    int next_id = 1;
    while (out.size() < rows) {
        if (!out.empty() && chance(rng, duplicate_rate)) {
            out.push_back(out[static_cast<std::size_t>(uniform(rng, 0, static_cast<int>(out.size()) - 1))]);
            continue;
        }
        out.push_back({std::to_string(next_id++), items[uniform(rng, 0, 4)], colours[uniform(rng, 0, 3)],
                       roman_oracle(uniform(rng, 1, 3999))});
    }
    return out;
}

std::vector<Record> first_per_key(const std::vector<Record>& rows, std::size_t key) {
    std::set<std::string> seen;
    std::vector<Record> out;
    for (const auto& r : rows) {
        if (seen.insert(r[key]).second) out.push_back(r);
    }
    return out;
}

Workbook RandomWorkbook::build() const {
    Workbook wb;
    wb.add_sheet("S");
    for (const Entry& e : cells) {
        if (e.formula) {
            wb.set_formula(e.address, e.source);
        } else {
            wb.set_cell(e.address, e.literal);
        }
    }
    return wb;
}

std::vector<std::size_t> RandomWorkbook::literal_indices() const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < cells.size(); ++i) {
        if (!cells[i].formula) out.push_back(i);
    }
    return out;
}

CellValue random_literal(Rng& rng) {
    switch (uniform(rng, 0, 5)) {
        case 0:
            return static_cast<double>(uniform(rng, -20, 20));
        case 1:
            return uniform(rng, -1000, 1000) / 8.0;
        case 2:
            return std::to_string(uniform(rng, 0, 9));
        case 3:
            return std::string(1, static_cast<char>('a' + uniform(rng, 0, 3)));
        case 4:
            return chance(rng, 0.5);
        default:
            return 0.0;
    }
}

namespace {

constexpr int kGrid = 8;

class FormulaGen {
public:
    FormulaGen(Rng& rng, const std::map<std::pair<int, int>, int>& order, int self)
        : rng_(rng), order_(order), self_(self) {}

    std::string expr(int depth) {
        const int pick = depth <= 0 ? uniform(rng_, 0, 1) : uniform(rng_, 0, 9);
        switch (pick) {
            case 0:
                return ref();
            case 1:
                return constant();
            case 2:
            case 3: {
                static const char* ops[] = {"+", "-", "*", "/", "&", "=", "<", ">=", "^", "<>"};
                return "(" + expr(depth - 1) + ops[uniform(rng_, 0, 9)] + expr(depth - 1) + ")";
            }
            case 4:
                return "-" + expr(depth - 1);
            case 5:
                return "SUM(" + range() + ")";
            case 6:
                return "IF(" + expr(depth - 1) + "," + expr(depth - 1) + "," + expr(depth - 1) + ")";
            case 7: {
                static const char* fns[] = {"MAX", "MIN", "COUNT", "AND", "OR"};
                return std::string(fns[uniform(rng_, 0, 4)]) + "(" + expr(depth - 1) + "," + range() + ")";
            }
            case 8: {
                static const char* fns[] = {"LEN", "UPPER", "TRIM", "NOT", "ISBLANK", "VALUE"};
                return std::string(fns[uniform(rng_, 0, 5)]) + "(" + expr(depth - 1) + ")";
            }
            default:
                return "CONCATENATE(" + expr(depth - 1) + "," + ref() + ")";
        }
    }

private:
    // A cell is readable when it is placed earlier or never placed (blank).
    bool readable(int r, int c) const {
        auto it = order_.find({r, c});
        return it == order_.end() || it->second < self_;
    }

    std::string cell(int r, int c) const { return format_a1({"", r, c}); }

    std::string ref() {
        for (int attempt = 0; attempt < 20; ++attempt) {
            const int r = uniform(rng_, 1, kGrid), c = uniform(rng_, 1, kGrid);
            if (readable(r, c)) return cell(r, c);
        }
        return constant();
    }

    std::string range() {
        for (int attempt = 0; attempt < 20; ++attempt) {
            const int r1 = uniform(rng_, 1, kGrid), c1 = uniform(rng_, 1, kGrid);
            const int r2 = std::min(kGrid, r1 + uniform(rng_, 0, 2)), c2 = std::min(kGrid, c1 + uniform(rng_, 0, 2));
            bool ok = true;
            for (int r = r1; r <= r2 && ok; ++r) {
                for (int c = c1; c <= c2 && ok; ++c) ok = readable(r, c);
            }
            if (ok) return cell(r1, c1) + ":" + cell(r2, c2);
        }
        return ref();
    }

    std::string constant() {
        switch (uniform(rng_, 0, 3)) {
            case 0:
                return std::to_string(uniform(rng_, 0, 9));
            case 1:
                return "\"" + std::to_string(uniform(rng_, 0, 9)) + "\"";
            case 2:
                return chance(rng_, 0.5) ? "TRUE" : "FALSE";
            default:
                return "\"x\"";
        }
    }

    Rng& rng_;
    const std::map<std::pair<int, int>, int>& order_;
    int self_;
};

}  // namespace

RandomWorkbook random_workbook(Rng& rng, int max_cells) {
    std::vector<std::pair<int, int>> all;
    for (int r = 1; r <= kGrid; ++r) {
        for (int c = 1; c <= kGrid; ++c) all.emplace_back(r, c);
    }
    std::shuffle(all.begin(), all.end(), rng);
    const int n = uniform(rng, 1, std::min<int>(max_cells, static_cast<int>(all.size())));
    all.resize(static_cast<std::size_t>(n));

    std::map<std::pair<int, int>, int> order;
    for (int i = 0; i < n; ++i) order[all[static_cast<std::size_t>(i)]] = i;

    RandomWorkbook out;
    for (int i = 0; i < n; ++i) {
        RandomWorkbook::Entry e;
        e.address = {"", all[static_cast<std::size_t>(i)].first, all[static_cast<std::size_t>(i)].second};
        e.formula = chance(rng, 0.6);
        if (e.formula) {
            e.source = "=" + FormulaGen(rng, order, i).expr(3);
        } else {
            e.literal = random_literal(rng);
        }
        out.cells.push_back(std::move(e));
    }
    return out;
}

}  // namespace rowcalc::testkit
