#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "rowcalc/address.hpp"
#include "rowcalc/errors.hpp"
#include "rowcalc/value.hpp"

namespace rowcalc {

// Formula language
//
//   formula := "=" expr
//   expr    := cmp
//   cmp     := concat { ("=" | "<>" | "<" | "<=" | ">" | ">=") concat }
//   concat  := add { "&" add }
//   add     := mul { ("+" | "-") mul }
//   mul     := pow { ("*" | "/") pow }
//   pow     := unary { "^" unary }
//   unary   := ("-" | "+") unary | primary
//   primary := number | string | boolean | cellref [":" cellref]
//            | name "(" [expr {"," expr}] ")" | name | "(" expr ")"
//
// All binary operators are left-associative. Unary minus binds tighter than
// `^`, so `-2^2` is 4 as in desktop spreadsheets (not -4 as in most
// programming languages).

class LexError : public ConfigError {
public:
    LexError(std::size_t offset, std::string found);
    std::size_t offset;
    std::string found;
};

class ParseError : public ConfigError {
public:
    ParseError(std::size_t offset, std::string expected, std::string found);
    std::size_t offset;
    std::string expected;
    std::string found;
};

enum class TokenKind : std::uint8_t { Number, String, Boolean, CellRef, Name, Operator, Punctuation };

struct Token {
    TokenKind kind;
    std::string lexeme;   // raw source text, quotes included for strings
    std::size_t offset;   // 0-based index into the tokenized text

    friend bool operator==(const Token&, const Token&) = default;
};

// Splits a formula body (no leading "=") into tokens. Throws LexError on an
// unterminated string or a character outside the language.
std::vector<Token> tokenize(std::string_view source);

// Decodes a string token's lexeme: strips the outer quotes, `""` -> `"`.
std::string unquote(std::string_view lexeme);
std::string quote(std::string_view text);

enum class NodeKind : std::uint8_t { Literal, CellRef, RangeRef, NameRef, Unary, Binary, Call };
enum class UnaryOp : std::uint8_t { Neg, Plus };
enum class BinaryOp : std::uint8_t { Add, Sub, Mul, Div, Pow, Concat, Eq, Ne, Lt, Le, Gt, Ge };

std::string_view op_text(UnaryOp op);
std::string_view op_text(BinaryOp op);

struct SourceSpan {
    std::size_t begin = 0;
    std::size_t end = 0;
};

struct FormulaAst {
    NodeKind kind = NodeKind::Literal;
    CellValue literal;                  // Literal
    CellRange range;                    // CellRef (start == end) and RangeRef
    std::string name;                   // NameRef and Call, upper-cased
    UnaryOp unary_op = UnaryOp::Neg;
    BinaryOp binary_op = BinaryOp::Add;
    std::vector<FormulaAst> children;
    SourceSpan span;

    // Structural equality; source spans are ignored.
    friend bool operator==(const FormulaAst& a, const FormulaAst& b);
};

// `source` must start with "=". Error offsets index into `source`.
FormulaAst parse_formula(std::string_view source);

// Canonical text including the leading "=", with the minimum parentheses
// needed for parse_formula to rebuild the same tree.
std::string render_formula(const FormulaAst& ast);

struct Reference {
    enum class Kind : std::uint8_t { Cell, Range, Name };
    Kind kind;
    CellRange range;   // Cell and Range
    std::string name;  // Name, upper-cased

    friend bool operator==(const Reference&, const Reference&) = default;
};

// References in first-appearance order, duplicates collapsed. Function names
// are not references.
std::vector<Reference> extract_references(const FormulaAst& ast);

bool is_valid_name(std::string_view text);

}  // namespace rowcalc
