#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "rowcalc/address.hpp"
#include "rowcalc/errors.hpp"
#include "rowcalc/formula.hpp"
#include "rowcalc/value.hpp"

namespace rowcalc {

class DuplicateName : public ConfigError {
public:
    using ConfigError::ConfigError;
};

class UnknownName : public ConfigError {
public:
    using ConfigError::ConfigError;
};

class ShapeMismatch : public Error {
public:
    using Error::Error;
};

class FormulaOverwrite : public ConfigError {
public:
    using ConfigError::ConfigError;
};

using SheetId = std::uint32_t;

// Resolved cell position used as a hash key inside the engine.
struct CellKey {
    SheetId sheet = 0;
    std::int32_t row = 1;
    std::int32_t col = 1;

    friend bool operator==(const CellKey&, const CellKey&) = default;
    friend auto operator<=>(const CellKey&, const CellKey&) = default;
};

struct CellKeyHash {
    std::size_t operator()(const CellKey& k) const noexcept {
        std::uint64_t h = (std::uint64_t{k.sheet} << 48) ^ (std::uint64_t(std::uint32_t(k.row)) << 20) ^
                          std::uint64_t(std::uint32_t(k.col));
        h ^= h >> 33;
        h *= 0xff51afd7ed558ccdULL;
        h ^= h >> 33;
        return static_cast<std::size_t>(h);
    }
};

struct Formula {
    FormulaAst ast;
    std::string source;
};

struct Cell {
    std::shared_ptr<const Formula> formula;  // null for literal cells
    CellValue value;                         // the literal, or the cached result

    bool is_formula() const { return formula != nullptr; }
};

// Row-major block of values, the unit of bulk transfer in and out of a range.
struct Matrix {
    std::int32_t rows = 0;
    std::int32_t cols = 0;
    std::vector<CellValue> values;

    Matrix() = default;
    Matrix(std::int32_t r, std::int32_t c) : rows(r), cols(c), values(std::size_t(r) * std::size_t(c)) {}
    static Matrix row(std::vector<CellValue> values);

    CellValue& at(std::int32_t r, std::int32_t c) { return values[std::size_t(r) * cols + c]; }
    const CellValue& at(std::int32_t r, std::int32_t c) const { return values[std::size_t(r) * cols + c]; }

    friend bool operator==(const Matrix&, const Matrix&) = default;
};

struct Limits {
    std::int32_t max_rows = kDefaultMaxRows;
    std::int32_t max_cols = kDefaultMaxCols;
};

struct NamedRange {
    std::string name;  // as first declared
    CellRange range;   // sheet-qualified
};

// Sheets of sparse cells plus the named-range registry. Storage is a hash map
// keyed by populated cell, so memory follows the number of cells set rather
// than the addressable grid.
//
// Not thread-safe; one owner at a time.
class Workbook {
public:
    explicit Workbook(Limits limits = {});

    const Limits& limits() const { return limits_; }

    SheetId add_sheet(std::string name);
    std::optional<SheetId> find_sheet(std::string_view name) const;
    const std::string& sheet_name(SheetId id) const { return sheets_.at(id); }
    std::size_t sheet_count() const { return sheets_.size(); }

    // Resolves an address to a key, checking bounds. An empty sheet means
    // `default_sheet`. Throws BadAddress.
    CellKey key_of(const CellAddress& address, SheetId default_sheet = 0) const;
    std::optional<CellKey> try_key_of(const CellAddress& address, SheetId default_sheet = 0) const;
    CellAddress address_of(const CellKey& key) const;
    CellRange qualified(const CellRange& range, SheetId default_sheet = 0) const;

    void set_cell(const CellAddress& address, CellValue literal);
    // Parses `source` (leading "=") and stores it; the cached value is Blank
    // until the next calculation.
    void set_formula(const CellAddress& address, std::string_view source);
    void clear_cell(const CellAddress& address);

    const CellValue& get_value(const CellAddress& address) const;
    const CellValue& value_at(const CellKey& key) const;
    const Cell* find_cell(const CellKey& key) const;

    void define_name(std::string name, const CellRange& range);
    const CellRange& resolve_name(std::string_view name) const;
    const NamedRange* find_name(std::string_view name) const;
    std::vector<NamedRange> names() const;  // in declaration order

    Matrix read_range(const CellRange& range) const;
    // Stores literals. Overwriting a formula cell throws FormulaOverwrite
    // unless the cell lies in a range passed to declare_writable.
    void write_range(const CellRange& range, const Matrix& values);
    void declare_writable(const CellRange& range);
    bool is_writable(const CellKey& key) const;

    // Engine-facing: store a formula's computed result.
    void store_result(const CellKey& key, CellValue value);

    // Bumped whenever formulas or names change; the engine rebuilds its
    // dependency graph when this moves.
    std::uint64_t structure_version() const { return structure_version_; }

    std::size_t cell_count() const { return cells_.size(); }
    void for_each_cell(const std::function<void(const CellKey&, const Cell&)>& fn) const;
    std::vector<CellKey> formula_cells() const;  // sorted by (sheet, row, col)

private:
    static std::string name_key(std::string_view name);
    void put(const CellKey& key, Cell cell);

    Limits limits_;
    std::vector<std::string> sheets_;
    std::unordered_map<CellKey, Cell, CellKeyHash> cells_;
    std::unordered_map<std::string, std::size_t> name_index_;  // upper-cased name -> names_ slot
    std::vector<NamedRange> names_;
    std::vector<CellRange> writable_;  // qualified
    std::uint64_t structure_version_ = 0;
};

}  // namespace rowcalc
