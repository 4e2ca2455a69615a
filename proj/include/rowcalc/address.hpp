#pragma once

#include <cstdint>
#include <string>
#include <string_view>

#include "rowcalc/errors.hpp"

namespace rowcalc {

class BadAddress : public ConfigError {
public:
    using ConfigError::ConfigError;
};

// Compatibility ceiling; a Workbook can be configured with larger limits.
inline constexpr std::int32_t kDefaultMaxRows = 1'048'576;
inline constexpr std::int32_t kDefaultMaxCols = 16'384;

// A1-style cell position. An empty sheet means "relative to whoever is
// asking": the formula's own sheet, or the workbook's first sheet.
struct CellAddress {
    std::string sheet;
    std::int32_t row = 1;
    std::int32_t col = 1;

    friend bool operator==(const CellAddress&, const CellAddress&) = default;
};

struct CellRange {
    CellAddress start;
    CellAddress end;

    std::int32_t rows() const { return end.row - start.row + 1; }
    std::int32_t cols() const { return end.col - start.col + 1; }
    std::int64_t size() const { return std::int64_t{rows()} * cols(); }
    bool is_single_cell() const { return rows() == 1 && cols() == 1; }
    bool contains(std::int32_t row, std::int32_t col) const {
        return row >= start.row && row <= end.row && col >= start.col && col <= end.col;
    }

    static CellRange single(CellAddress cell) { return {cell, cell}; }

    friend bool operator==(const CellRange&, const CellRange&) = default;
};

// "A" -> 1, "Z" -> 26, "AA" -> 27. Case-insensitive.
std::int32_t column_index(std::string_view letters);
std::string column_letters(std::int32_t col);

// Accepts an optional "Sheet!" prefix and `$` absolute markers (ignored).
CellAddress parse_a1(std::string_view text);
std::string format_a1(const CellAddress& address);

// "Sheet!A1:B2" or a single cell. Inverted corners are normalised so that
// start is the top-left cell.
CellRange parse_range(std::string_view text);
std::string format_range(const CellRange& range);
CellRange normalized(CellRange range);

}  // namespace rowcalc
