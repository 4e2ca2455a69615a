#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <variant>

namespace rowcalc {

enum class ErrorCode : std::uint8_t { Div0, Value, Name, Ref, NA, Num, Cycle };

std::string_view error_text(ErrorCode code);
std::optional<ErrorCode> parse_error_text(std::string_view text);

struct Blank {
    friend bool operator==(Blank, Blank) { return true; }
};

// Tagged scalar held by every cell. Numbers are always finite: anything that
// would produce NaN or infinity is stored as #NUM! instead.
class CellValue {
public:
    enum class Kind : std::uint8_t { Blank, Number, Text, Boolean, Error };

    CellValue() = default;
    CellValue(Blank) {}
    CellValue(double number);
    CellValue(int number) : CellValue(static_cast<double>(number)) {}
    CellValue(std::string text) : data_(std::move(text)) {}
    CellValue(const char* text) : data_(std::string(text)) {}
    CellValue(bool flag) : data_(flag) {}
    CellValue(ErrorCode code) : data_(code) {}

    Kind kind() const { return static_cast<Kind>(data_.index()); }
    bool is_blank() const { return kind() == Kind::Blank; }
    bool is_number() const { return kind() == Kind::Number; }
    bool is_text() const { return kind() == Kind::Text; }
    bool is_boolean() const { return kind() == Kind::Boolean; }
    bool is_error() const { return kind() == Kind::Error; }

    double number() const { return std::get<double>(data_); }
    const std::string& text() const { return std::get<std::string>(data_); }
    bool boolean() const { return std::get<bool>(data_); }
    ErrorCode error() const { return std::get<ErrorCode>(data_); }

    // Bitwise equality of the stored representation (not formula `=`).
    friend bool operator==(const CellValue& a, const CellValue& b);

private:
    std::variant<Blank, double, std::string, bool, ErrorCode> data_;
};

// Text form used by `&`, CONCATENATE and output records. Integers print
// without a decimal point; other numbers use the shortest string that
// round-trips the double.
std::string render(const CellValue& value);
std::string render_number(double number);

// Strict numeric parse of a text field: optional surrounding spaces, optional
// sign, digits with an optional fraction and exponent. No hex, inf or nan.
std::optional<double> parse_number(std::string_view text);

// Case-insensitive ordinal comparison (ASCII letters folded to upper case,
// other bytes compared as unsigned). Returns <0, 0 or >0.
int compare_text_ci(std::string_view a, std::string_view b);

std::string to_upper_ascii(std::string_view text);
std::string to_lower_ascii(std::string_view text);
std::string_view trim_spaces(std::string_view text);

}  // namespace rowcalc
