#include "rowcalc/functions.hpp"

#include <algorithm>
#include <array>
#include <cmath>

namespace rowcalc {

CellValue to_number(const CellValue& value) {
    switch (value.kind()) {
        case CellValue::Kind::Blank: return 0.0;
        case CellValue::Kind::Number: return value;
        case CellValue::Kind::Boolean: return value.boolean() ? 1.0 : 0.0;
        case CellValue::Kind::Error: return value;
        case CellValue::Kind::Text:
            if (auto n = parse_number(value.text())) return *n;
            return ErrorCode::Value;
    }
    return ErrorCode::Value;
}

CellValue to_text(const CellValue& value) {
    if (value.is_error() || value.is_text()) return value;
    return render(value);
}

CellValue to_boolean(const CellValue& value) {
    switch (value.kind()) {
        case CellValue::Kind::Blank: return false;
        case CellValue::Kind::Number: return value.number() != 0.0;
        case CellValue::Kind::Boolean: return value;
        case CellValue::Kind::Error: return value;
        case CellValue::Kind::Text: {
            auto t = trim_spaces(value.text());
            if (compare_text_ci(t, "TRUE") == 0) return true;
            if (compare_text_ci(t, "FALSE") == 0) return false;
            return ErrorCode::Value;
        }
    }
    return ErrorCode::Value;
}

namespace {

int type_rank(CellValue::Kind kind) {
    switch (kind) {
        case CellValue::Kind::Number: return 0;
        case CellValue::Kind::Text: return 1;
        case CellValue::Kind::Boolean: return 2;
        default: return 3;
    }
}

CellValue blank_as(CellValue::Kind kind) {
    switch (kind) {
        case CellValue::Kind::Text: return std::string();
        case CellValue::Kind::Boolean: return false;
        default: return 0.0;
    }
}

}  // namespace

int compare_values(const CellValue& a_in, const CellValue& b_in) {
    if (a_in.is_blank() && b_in.is_blank()) return 0;
    const CellValue a = a_in.is_blank() ? blank_as(b_in.kind()) : a_in;
    const CellValue b = b_in.is_blank() ? blank_as(a_in.kind()) : b_in;
    if (a.kind() != b.kind()) return type_rank(a.kind()) < type_rank(b.kind()) ? -1 : 1;
    switch (a.kind()) {
        case CellValue::Kind::Number:
            return a.number() < b.number() ? -1 : (a.number() > b.number() ? 1 : 0);
        case CellValue::Kind::Text:
            return compare_text_ci(a.text(), b.text());
        case CellValue::Kind::Boolean:
            return int(a.boolean()) - int(b.boolean());
        default:
            return 0;
    }
}

std::size_t utf8_length(std::string_view text) {
    return static_cast<std::size_t>(
        std::count_if(text.begin(), text.end(), [](char c) { return (static_cast<unsigned char>(c) & 0xC0) != 0x80; }));
}

std::string utf8_substr(std::string_view text, std::size_t first, std::size_t count) {
    std::size_t index = 0;
    std::size_t begin = text.size();
    std::size_t end = text.size();
    for (std::size_t i = 0; i < text.size(); ++i) {
        if ((static_cast<unsigned char>(text[i]) & 0xC0) == 0x80) continue;
        if (index == first) begin = i;
        if (index == first + count) {
            end = i;
            break;
        }
        ++index;
    }
    if (begin >= end) return {};
    return std::string(text.substr(begin, end - begin));
}

// ---------------------------------------------------------------------------
// Roman numerals

namespace {

int symbol_value(char c) {
    switch (c) {
        case 'I': return 1;
        case 'V': return 5;
        case 'X': return 10;
        case 'L': return 50;
        case 'C': return 100;
        case 'D': return 500;
        case 'M': return 1000;
        default: return 0;
    }
}

// Subtractive pair -> additive spelling, e.g. "CD" -> "CCCC".
std::string_view expansion(char lo, char hi) {
    if (lo == 'I' && hi == 'V') return "IIII";
    if (lo == 'I' && hi == 'X') return "VIIII";
    if (lo == 'X' && hi == 'L') return "XXXX";
    if (lo == 'X' && hi == 'C') return "LXXXX";
    if (lo == 'C' && hi == 'D') return "CCCC";
    if (lo == 'C' && hi == 'M') return "DCCCC";
    return {};
}

}  // namespace

CellValue arabic(const CellValue& input) {
    CellValue text = to_text(input);
    if (text.is_error()) return text;
    const std::string upper = to_upper_ascii(trim_spaces(text.text()));
    if (upper.empty()) return ErrorCode::Value;
    for (char c : upper) {
        if (symbol_value(c) == 0) return ErrorCode::Value;
    }

    std::string expanded;
    for (std::size_t i = 0; i < upper.size(); ++i) {
        if (i + 1 < upper.size()) {
            auto pair = expansion(upper[i], upper[i + 1]);
            if (!pair.empty()) {
                expanded += pair;
                ++i;
                continue;
            }
        }
        expanded.push_back(upper[i]);
    }

    int total = 0;
    int previous = 1000;
    for (char c : expanded) {
        const int v = symbol_value(c);
        if (v > previous) return ErrorCode::Num;
        previous = v;
        total += v;
        if (total > 3999) return ErrorCode::Num;
    }
    return static_cast<double>(total);
}

std::string roman_numeral(int value) {
    static constexpr std::array<std::pair<int, std::string_view>, 13> kTable = {{
        {1000, "M"}, {900, "CM"}, {500, "D"}, {400, "CD"}, {100, "C"}, {90, "XC"},
        {50, "L"}, {40, "XL"}, {10, "X"}, {9, "IX"}, {5, "V"}, {4, "IV"}, {1, "I"},
    }};
    std::string out;
    for (const auto& [amount, letters] : kTable) {
        while (value >= amount) {
            out += letters;
            value -= amount;
        }
    }
    return out;
}

CellValue roman(const CellValue& input) {
    if (input.is_text() && !parse_number(input.text())) return ErrorCode::Value;
    CellValue n = to_number(input);
    if (n.is_error()) return n;
    const double v = n.number();
    if (v != std::trunc(v) || v < 1 || v > 3999) return ErrorCode::Num;
    return roman_numeral(static_cast<int>(v));
}

// ---------------------------------------------------------------------------
// Registry

void FunctionRegistry::add(FunctionSignature signature) {
    std::string key = to_upper_ascii(signature.name);
    functions_.insert_or_assign(std::move(key), std::move(signature));
}

const FunctionSignature* FunctionRegistry::find(std::string_view name) const {
    auto it = functions_.find(to_upper_ascii(name));
    return it == functions_.end() ? nullptr : &it->second;
}

std::vector<std::string> FunctionRegistry::names() const {
    std::vector<std::string> out;
    for (const auto& [name, sig] : functions_) out.push_back(name);
    std::sort(out.begin(), out.end());
    return out;
}

namespace {

using Args = std::span<const FunctionArg>;

const CellValue& scalar(const FunctionArg& arg) { return std::get<CellValue>(arg); }

// Walks every value an aggregate sees. Scalars typed directly into the call
// are coerced; values inside references are filtered by kind, as
// spreadsheets do.
template <typename OnScalar, typename OnCell>
void visit_all(Args args, OnScalar on_scalar, OnCell on_cell) {
    for (const auto& arg : args) {
        if (const auto* m = std::get_if<Matrix>(&arg)) {
            for (const auto& v : m->values) on_cell(v);
        } else {
            on_scalar(std::get<CellValue>(arg));
        }
    }
}

struct NumberList {
    std::vector<double> values;
    std::optional<ErrorCode> error;
};

NumberList collect_numbers(Args args) {
    NumberList out;
    visit_all(
        args,
        [&](const CellValue& v) {
            CellValue n = to_number(v);
            if (n.is_error()) {
                if (!out.error) out.error = n.error();
            } else {
                out.values.push_back(n.number());
            }
        },
        [&](const CellValue& v) {
            if (v.is_number()) out.values.push_back(v.number());
            else if (v.is_error() && !out.error) out.error = v.error();
        });
    return out;
}

CellValue fn_sum(Args args) {
    auto numbers = collect_numbers(args);
    if (numbers.error) return *numbers.error;
    double total = 0.0;
    for (double v : numbers.values) total += v;
    return total;
}

CellValue fn_count(Args args) {
    double count = 0;
    visit_all(
        args,
        [&](const CellValue& v) {
            if (v.is_number() || v.is_boolean() || (v.is_text() && parse_number(v.text()))) ++count;
        },
        [&](const CellValue& v) {
            if (v.is_number()) ++count;
        });
    return count;
}

template <typename Pick>
CellValue extreme(Args args, Pick pick) {
    auto numbers = collect_numbers(args);
    if (numbers.error) return *numbers.error;
    if (numbers.values.empty()) return 0.0;
    double best = numbers.values.front();
    for (double v : numbers.values) best = pick(best, v);
    return best;
}

template <typename Combine>
CellValue logical(Args args, bool initial, Combine combine) {
    bool result = initial;
    bool seen = false;
    std::optional<ErrorCode> error;
    auto on_scalar = [&](const CellValue& v) {
        CellValue b = to_boolean(v);
        if (b.is_error()) {
            if (!error) error = b.error();
            return;
        }
        seen = true;
        result = combine(result, b.boolean());
    };
    // A single-cell reference is a value in boolean position, so a blank
    // reads as FALSE; larger ranges skip blanks and text.
    for (const auto& arg : args) {
        const auto* m = std::get_if<Matrix>(&arg);
        if (!m) {
            on_scalar(std::get<CellValue>(arg));
        } else if (m->values.size() == 1) {
            on_scalar(m->values.front());
        } else {
            for (const auto& v : m->values) {
                if (v.is_error()) {
                    if (!error) error = v.error();
                } else if (v.is_boolean() || v.is_number()) {
                    seen = true;
                    result = combine(result, to_boolean(v).boolean());
                }
            }
        }
    }
    if (error) return *error;
    if (!seen) return ErrorCode::Value;
    return result;
}

// Integer-valued count argument; negative or non-numeric is #VALUE!.
std::optional<std::size_t> count_arg(const CellValue& v) {
    CellValue n = to_number(v);
    if (n.is_error() || n.number() < 0) return std::nullopt;
    return static_cast<std::size_t>(std::trunc(n.number()));
}

CellValue fn_left(Args args) {
    CellValue text = to_text(scalar(args[0]));
    if (text.is_error()) return text;
    std::size_t n = 1;
    if (args.size() > 1) {
        auto c = count_arg(scalar(args[1]));
        if (!c) return ErrorCode::Value;
        n = *c;
    }
    return utf8_substr(text.text(), 0, n);
}

CellValue fn_right(Args args) {
    CellValue text = to_text(scalar(args[0]));
    if (text.is_error()) return text;
    std::size_t n = 1;
    if (args.size() > 1) {
        auto c = count_arg(scalar(args[1]));
        if (!c) return ErrorCode::Value;
        n = *c;
    }
    const std::size_t len = utf8_length(text.text());
    n = std::min(n, len);
    return utf8_substr(text.text(), len - n, n);
}

CellValue fn_mid(Args args) {
    CellValue text = to_text(scalar(args[0]));
    if (text.is_error()) return text;
    CellValue start = to_number(scalar(args[1]));
    if (start.is_error()) return start;
    if (start.number() < 1) return ErrorCode::Value;
    auto n = count_arg(scalar(args[2]));
    if (!n) return ErrorCode::Value;
    const auto first = static_cast<std::size_t>(std::trunc(start.number())) - 1;
    return utf8_substr(text.text(), first, *n);
}

CellValue fn_substitute(Args args) {
    CellValue text = to_text(scalar(args[0]));
    CellValue from = to_text(scalar(args[1]));
    CellValue to = to_text(scalar(args[2]));
    for (const auto* v : {&text, &from, &to}) {
        if (v->is_error()) return *v;
    }
    std::size_t instance = 0;  // 0: all occurrences
    if (args.size() > 3) {
        auto c = count_arg(scalar(args[3]));
        if (!c || *c < 1) return ErrorCode::Value;
        instance = *c;
    }
    const std::string& s = text.text();
    const std::string& needle = from.text();
    if (needle.empty()) return text;

    std::string out;
    std::size_t pos = 0;
    std::size_t seen = 0;
    while (true) {
        const std::size_t hit = s.find(needle, pos);
        if (hit == std::string::npos) break;
        ++seen;
        out.append(s, pos, hit - pos);
        if (instance == 0 || seen == instance) {
            out += to.text();
        } else {
            out += needle;
        }
        pos = hit + needle.size();
    }
    out.append(s, pos, std::string::npos);
    return out;
}

CellValue fn_trim(Args args) {
    CellValue text = to_text(scalar(args[0]));
    if (text.is_error()) return text;
    std::string out;
    bool pending_space = false;
    for (char c : text.text()) {
        if (c == ' ') {
            pending_space = !out.empty();
            continue;
        }
        if (pending_space) out.push_back(' ');
        pending_space = false;
        out.push_back(c);
    }
    return out;
}

CellValue fn_value(Args args) {
    const CellValue& v = scalar(args[0]);
    if (v.is_boolean()) return ErrorCode::Value;
    return to_number(v);
}

CellValue fn_vlookup(Args args) {
    const CellValue& key = scalar(args[0]);
    const Matrix& table = std::get<Matrix>(args[1]);
    CellValue col = to_number(scalar(args[2]));
    if (col.is_error()) return col;
    if (args.size() > 3) {
        CellValue approximate = to_boolean(scalar(args[3]));
        if (approximate.is_error()) return approximate;
        if (approximate.boolean()) return ErrorCode::Value;  // approximate match is not supported
    }
    const double c = std::trunc(col.number());
    if (c < 1) return ErrorCode::Value;
    if (c > table.cols) return ErrorCode::Ref;
    if (key.is_blank()) return ErrorCode::NA;
    for (std::int32_t r = 0; r < table.rows; ++r) {
        const CellValue& candidate = table.at(r, 0);
        if (candidate.is_blank()) continue;
        if (candidate.kind() == key.kind() && compare_values(candidate, key) == 0) {
            return table.at(r, static_cast<std::int32_t>(c) - 1);
        }
    }
    return ErrorCode::NA;
}

template <typename Fn>
FunctionSignature text_fn(std::string name, Fn fn) {
    return {std::move(name), 1, 1, {ArgKind::Scalar}, [fn](Args args) -> CellValue {
                CellValue text = to_text(scalar(args[0]));
                if (text.is_error()) return text;
                return fn(text.text());
            }};
}

FunctionRegistry make_builtin() {
    FunctionRegistry r;
    using K = ArgKind;

    // IF is evaluated lazily by the engine; this entry only carries arity.
    r.add({"IF", 2, 3, {K::Scalar}, nullptr, true});

    r.add({"AND", 1, -1, {K::Any}, [](Args a) { return logical(a, true, [](bool x, bool y) { return x && y; }); }});
    r.add({"OR", 1, -1, {K::Any}, [](Args a) { return logical(a, false, [](bool x, bool y) { return x || y; }); }});
    r.add({"NOT", 1, 1, {K::Scalar}, [](Args a) -> CellValue {
               CellValue b = to_boolean(scalar(a[0]));
               if (b.is_error()) return b;
               return !b.boolean();
           }});

    r.add({"SUM", 1, -1, {K::Any}, fn_sum});
    r.add({"COUNT", 1, -1, {K::Any}, fn_count});
    r.add({"MIN", 1, -1, {K::Any}, [](Args a) { return extreme(a, [](double x, double y) { return std::min(x, y); }); }});
    r.add({"MAX", 1, -1, {K::Any}, [](Args a) { return extreme(a, [](double x, double y) { return std::max(x, y); }); }});

    r.add({"CONCATENATE", 1, -1, {K::Scalar}, [](Args a) -> CellValue {
               std::string out;
               for (const auto& arg : a) {
                   CellValue t = to_text(scalar(arg));
                   if (t.is_error()) return t;
                   out += t.text();
               }
               return out;
           }});
    r.add(text_fn("LEN", [](const std::string& s) -> CellValue { return static_cast<double>(utf8_length(s)); }));
    r.add(text_fn("UPPER", [](const std::string& s) -> CellValue { return to_upper_ascii(s); }));
    r.add(text_fn("LOWER", [](const std::string& s) -> CellValue { return to_lower_ascii(s); }));
    r.add({"TRIM", 1, 1, {K::Scalar}, fn_trim});
    r.add({"LEFT", 1, 2, {K::Scalar}, fn_left});
    r.add({"RIGHT", 1, 2, {K::Scalar}, fn_right});
    r.add({"MID", 3, 3, {K::Scalar}, fn_mid});
    r.add({"SUBSTITUTE", 3, 4, {K::Scalar}, fn_substitute});
    r.add({"VALUE", 1, 1, {K::Scalar}, fn_value});
    r.add({"EXACT", 2, 2, {K::Scalar}, [](Args a) -> CellValue {
               CellValue x = to_text(scalar(a[0]));
               if (x.is_error()) return x;
               CellValue y = to_text(scalar(a[1]));
               if (y.is_error()) return y;
               return x.text() == y.text();
           }});
    r.add({"ISBLANK", 1, 1, {K::Scalar}, [](Args a) -> CellValue { return scalar(a[0]).is_blank(); }});
    r.add({"VLOOKUP", 3, 4, {K::Scalar, K::Range, K::Scalar}, fn_vlookup});

    r.add({"ARABIC", 1, 1, {K::Scalar}, [](Args a) { return arabic(scalar(a[0])); }});
    r.add({"ROMAN", 1, 1, {K::Scalar}, [](Args a) { return roman(scalar(a[0])); }});
    return r;
}

}  // namespace

const FunctionRegistry& FunctionRegistry::builtin() {
    static const FunctionRegistry registry = make_builtin();
    return registry;
}

}  // namespace rowcalc
