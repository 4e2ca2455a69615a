#include "rowcalc/address.hpp"

#include <algorithm>
#include <limits>

namespace rowcalc {

namespace {

bool is_alpha(char c) { return (c >= 'A' && c <= 'Z') || (c >= 'a' && c <= 'z'); }
bool is_digit(char c) { return c >= '0' && c <= '9'; }

[[noreturn]] void bad(std::string_view text, std::string_view why) {
    throw BadAddress("bad cell address '" + std::string(text) + "': " + std::string(why));
}

}  // namespace

std::int32_t column_index(std::string_view letters) {
    if (letters.empty()) throw BadAddress("empty column letters");
    std::int64_t col = 0;
    for (char c : letters) {
        if (!is_alpha(c)) bad(letters, "column must be letters");
        col = col * 26 + ((c | 0x20) - 'a' + 1);
        if (col > std::numeric_limits<std::int32_t>::max()) bad(letters, "column too large");
    }
    return static_cast<std::int32_t>(col);
}

std::string column_letters(std::int32_t col) {
    if (col < 1) throw BadAddress("column index must be >= 1");
    std::string out;
    while (col > 0) {
        --col;
        out.push_back(static_cast<char>('A' + col % 26));
        col /= 26;
    }
    std::reverse(out.begin(), out.end());
    return out;
}

CellAddress parse_a1(std::string_view text) {
    if (text.empty()) bad(text, "empty");
    CellAddress address;
    std::string_view cell = text;
    if (auto bang = text.rfind('!'); bang != std::string_view::npos) {
        address.sheet = std::string(text.substr(0, bang));
        if (address.sheet.empty()) bad(text, "empty sheet name");
        cell = text.substr(bang + 1);
    }

    std::size_t pos = 0;
    if (pos < cell.size() && cell[pos] == '$') ++pos;
    const std::size_t letters_begin = pos;
    while (pos < cell.size() && is_alpha(cell[pos])) ++pos;
    const std::string_view letters = cell.substr(letters_begin, pos - letters_begin);
    if (pos < cell.size() && cell[pos] == '$') ++pos;
    const std::size_t digits_begin = pos;
    while (pos < cell.size() && is_digit(cell[pos])) ++pos;
    const std::string_view digits = cell.substr(digits_begin, pos - digits_begin);

    if (letters.empty() || digits.empty() || pos != cell.size()) bad(text, "expected column letters then row digits");
    if (letters.size() > 7) bad(text, "column too large");
    if (digits.size() > 9) bad(text, "row too large");
    if (digits.front() == '0') bad(text, "row must not start with 0");

    address.col = column_index(letters);
    std::int32_t row = 0;
    for (char c : digits) row = row * 10 + (c - '0');
    if (row < 1) bad(text, "row must be >= 1");
    address.row = row;
    return address;
}

std::string format_a1(const CellAddress& address) {
    std::string out;
    if (!address.sheet.empty()) {
        out = address.sheet;
        out.push_back('!');
    }
    out += column_letters(address.col);
    out += std::to_string(address.row);
    return out;
}

CellRange normalized(CellRange range) {
    if (range.start.row > range.end.row) std::swap(range.start.row, range.end.row);
    if (range.start.col > range.end.col) std::swap(range.start.col, range.end.col);
    return range;
}

CellRange parse_range(std::string_view text) {
    std::string sheet;
    std::string_view body = text;
    if (auto bang = text.find('!'); bang != std::string_view::npos) {
        sheet = std::string(text.substr(0, bang));
        if (sheet.empty()) bad(text, "empty sheet name");
        body = text.substr(bang + 1);
    }
    const auto colon = body.find(':');
    CellAddress start = parse_a1(body.substr(0, colon));
    CellAddress end = colon == std::string_view::npos ? start : parse_a1(body.substr(colon + 1));
    if (!start.sheet.empty() || !end.sheet.empty()) bad(text, "sheet prefix belongs before the first corner");
    start.sheet = sheet;
    end.sheet = sheet;
    return normalized({start, end});
}

std::string format_range(const CellRange& range) {
    std::string out = format_a1(range.start);
    if (!range.is_single_cell()) {
        CellAddress end = range.end;
        end.sheet.clear();
        out.push_back(':');
        out += format_a1(end);
    }
    return out;
}

}  // namespace rowcalc
