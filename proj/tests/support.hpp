#pragma once

#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "rowcalc/csv.hpp"
#include "rowcalc/workbook.hpp"

namespace rowcalc::testkit {

std::filesystem::path fixture(const std::string& name);

// Fresh directory under the system temp directory, removed on destruction.
class TempDir {
public:
    TempDir();
    ~TempDir();
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const std::filesystem::path& path() const { return path_; }
    std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

    // Copies fixture files into the directory.
    void copy_fixtures(const std::vector<std::string>& names) const;

private:
    std::filesystem::path path_;
};

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, const std::string& text);
std::string join_lines(const std::vector<Record>& rows);

using Rng = std::mt19937_64;

int uniform(Rng& rng, int lo, int hi);  // inclusive
bool chance(Rng& rng, double p);

// Roman numeral by the subtractive-pair table, independent of the library.
std::string roman_oracle(int n);

// Caesar's Store sales records (Id,Item,Colour,Number). `duplicate_rate` of
// the rows repeat an earlier record verbatim.
std::vector<Record> sales_records(Rng& rng, std::size_t rows, double duplicate_rate);

// Keeps the first record seen for each value of column `key`.
std::vector<Record> first_per_key(const std::vector<Record>& rows, std::size_t key);

// Small random workbook on one sheet: literal and formula cells over
// A1:H8. Formulas only read cells placed before them, so there are no cycles.
struct RandomWorkbook {
    struct Entry {
        CellAddress address;
        bool formula = false;
        CellValue literal;
        std::string source;
    };
    std::vector<Entry> cells;

    Workbook build() const;
    std::vector<std::size_t> literal_indices() const;
};

RandomWorkbook random_workbook(Rng& rng, int max_cells);
CellValue random_literal(Rng& rng);

}  // namespace rowcalc::testkit
