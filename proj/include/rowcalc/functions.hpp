#pragma once

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <variant>
#include <vector>

#include "rowcalc/value.hpp"
#include "rowcalc/workbook.hpp"

namespace rowcalc {

// Coercions shared by operators and functions. Each returns either a value
// of the requested kind or an Error value.
//
//   to_number:  Blank -> 0, Boolean -> 1/0, Text -> parsed (else #VALUE!)
//   to_text:    Blank -> "", Number -> render(), Boolean -> TRUE/FALSE
//   to_boolean: Blank -> FALSE, Number -> != 0, Text "TRUE"/"FALSE" only
CellValue to_number(const CellValue& value);
CellValue to_text(const CellValue& value);
CellValue to_boolean(const CellValue& value);

// Ordering used by comparison operators and lookups. Blank takes the zero
// value of the other side's type; across types Number < Text < Boolean; text
// compares case-insensitively. Neither side may be an Error.
int compare_values(const CellValue& a, const CellValue& b);

// A function argument is either a scalar or the values of a referenced range.
using FunctionArg = std::variant<CellValue, Matrix>;

enum class ArgKind : std::uint8_t {
    Scalar,  // multi-cell ranges are #VALUE!
    Range,   // must be a reference
    Any,     // references arrive as Matrix, other expressions as scalars
};

struct FunctionSignature {
    std::string name;
    int min_args = 0;
    int max_args = 0;            // -1: unbounded
    std::vector<ArgKind> kinds;  // per position; the last entry repeats
    std::function<CellValue(std::span<const FunctionArg>)> impl;
    bool lazy = false;           // arguments evaluated by the engine on demand (IF)

    ArgKind kind_at(std::size_t index) const {
        if (kinds.empty()) return ArgKind::Scalar;
        return index < kinds.size() ? kinds[index] : kinds.back();
    }
};

class FunctionRegistry {
public:
    void add(FunctionSignature signature);
    const FunctionSignature* find(std::string_view name) const;  // case-insensitive
    std::vector<std::string> names() const;

    // IF, AND, OR, NOT, SUM, COUNT, MIN, MAX, CONCATENATE, LEN, LEFT, RIGHT,
    // MID, SUBSTITUTE, TRIM, UPPER, LOWER, VALUE, EXACT, ISBLANK, VLOOKUP,
    // ARABIC, ROMAN.
    static const FunctionRegistry& builtin();

private:
    std::unordered_map<std::string, FunctionSignature> functions_;
};

// Roman numerals. arabic_value accepts classic forms plus lenient additive
// spellings ("IIII" is 4) as long as the expanded symbols never increase.
// Errors: empty or non-MDCLXVI text -> #VALUE!; out-of-order symbols or a
// total above 3999 -> #NUM!.
CellValue arabic(const CellValue& roman_text);
CellValue roman(const CellValue& number);

std::string roman_numeral(int value);  // classic form; value in [1, 3999]

// UTF-8 aware helpers used by LEN/LEFT/RIGHT/MID.
std::size_t utf8_length(std::string_view text);
std::string utf8_substr(std::string_view text, std::size_t first, std::size_t count);

}  // namespace rowcalc
