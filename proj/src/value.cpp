#include "rowcalc/value.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <cstring>

namespace rowcalc {

namespace {

constexpr std::array<std::string_view, 7> kErrorTexts = {
    "#DIV/0!", "#VALUE!", "#NAME?", "#REF!", "#N/A", "#NUM!", "#CYCLE!"};

bool is_digit(char c) { return c >= '0' && c <= '9'; }

char upper(char c) { return (c >= 'a' && c <= 'z') ? static_cast<char>(c - 'a' + 'A') : c; }
char lower(char c) { return (c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a') : c; }

}  // namespace

std::string_view error_text(ErrorCode code) {
    return kErrorTexts[static_cast<std::size_t>(code)];
}

std::optional<ErrorCode> parse_error_text(std::string_view text) {
    for (std::size_t i = 0; i < kErrorTexts.size(); ++i) {
        if (kErrorTexts[i] == text) return static_cast<ErrorCode>(i);
    }
    return std::nullopt;
}

CellValue::CellValue(double number) {
    if (std::isfinite(number)) {
        data_ = number;
    } else {
        data_ = ErrorCode::Num;
    }
}

bool operator==(const CellValue& a, const CellValue& b) {
    if (a.kind() != b.kind()) return false;
    if (a.is_number()) {
        // Compare bit patterns so that idempotence checks see -0 vs 0.
        double x = a.number();
        double y = b.number();
        return std::memcmp(&x, &y, sizeof x) == 0;
    }
    return a.data_ == b.data_;
}

std::string render_number(double number) {
    if (number == 0.0) return "0";
    if (number == std::trunc(number) && std::fabs(number) < 1e15) {
        return std::to_string(static_cast<long long>(number));
    }
    std::array<char, 32> buf{};
    auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), number);
    return std::string(buf.data(), end);
}

std::string render(const CellValue& value) {
    switch (value.kind()) {
        case CellValue::Kind::Blank:
            return {};
        case CellValue::Kind::Number:
            return render_number(value.number());
        case CellValue::Kind::Text:
            return value.text();
        case CellValue::Kind::Boolean:
            return value.boolean() ? "TRUE" : "FALSE";
        case CellValue::Kind::Error:
            return std::string(error_text(value.error()));
    }
    return {};
}

std::string_view trim_spaces(std::string_view text) {
    std::size_t begin = 0;
    std::size_t end = text.size();
    while (begin < end && (text[begin] == ' ' || text[begin] == '\t')) ++begin;
    while (end > begin && (text[end - 1] == ' ' || text[end - 1] == '\t')) --end;
    return text.substr(begin, end - begin);
}

std::optional<double> parse_number(std::string_view text) {
    text = trim_spaces(text);
    if (text.empty()) return std::nullopt;

    std::size_t pos = 0;
    bool negative = false;
    if (text[pos] == '+' || text[pos] == '-') {
        negative = text[pos] == '-';
        ++pos;
    }
    const std::size_t body = pos;
    std::size_t int_digits = 0;
    while (pos < text.size() && is_digit(text[pos])) {
        ++pos;
        ++int_digits;
    }
    std::size_t frac_digits = 0;
    if (pos < text.size() && text[pos] == '.') {
        ++pos;
        while (pos < text.size() && is_digit(text[pos])) {
            ++pos;
            ++frac_digits;
        }
    }
    if (int_digits + frac_digits == 0) return std::nullopt;
    if (pos < text.size() && (text[pos] == 'e' || text[pos] == 'E')) {
        ++pos;
        if (pos < text.size() && (text[pos] == '+' || text[pos] == '-')) ++pos;
        std::size_t exp_digits = 0;
        while (pos < text.size() && is_digit(text[pos])) {
            ++pos;
            ++exp_digits;
        }
        if (exp_digits == 0) return std::nullopt;
    }
    if (pos != text.size()) return std::nullopt;

    double value = 0.0;
    auto [end, ec] = std::from_chars(text.data() + body, text.data() + text.size(), value);
    if (ec != std::errc{} || end != text.data() + text.size()) return std::nullopt;
    if (!std::isfinite(value)) return std::nullopt;
    return negative ? -value : value;
}

int compare_text_ci(std::string_view a, std::string_view b) {
    const std::size_t n = std::min(a.size(), b.size());
    for (std::size_t i = 0; i < n; ++i) {
        auto x = static_cast<unsigned char>(upper(a[i]));
        auto y = static_cast<unsigned char>(upper(b[i]));
        if (x != y) return x < y ? -1 : 1;
    }
    if (a.size() == b.size()) return 0;
    return a.size() < b.size() ? -1 : 1;
}

std::string to_upper_ascii(std::string_view text) {
    std::string out(text);
    for (char& c : out) c = upper(c);
    return out;
}

std::string to_lower_ascii(std::string_view text) {
    std::string out(text);
    for (char& c : out) c = lower(c);
    return out;
}

}  // namespace rowcalc
