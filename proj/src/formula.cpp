#include "rowcalc/formula.hpp"

#include <algorithm>

namespace rowcalc {

LexError::LexError(std::size_t offset_, std::string found_)
    : ConfigError("lex error at offset " + std::to_string(offset_) + ": unexpected '" + found_ + "'"),
      offset(offset_),
      found(std::move(found_)) {}

ParseError::ParseError(std::size_t offset_, std::string expected_, std::string found_)
    : ConfigError("parse error at offset " + std::to_string(offset_) + ": expected " + expected_ + ", found " +
                  found_),
      offset(offset_),
      expected(std::move(expected_)),
      found(std::move(found_)) {}

namespace {

bool is_alpha(char c) { return (c >= 'A' && c <= 'Z') || (c >= 'a' && c <= 'z'); }
bool is_digit(char c) { return c >= '0' && c <= '9'; }
bool is_word_char(char c) { return is_alpha(c) || is_digit(c) || c == '_' || c == '.' || c == '$'; }
bool is_space(char c) { return c == ' ' || c == '\t' || c == '\r' || c == '\n'; }

// $?[A-Za-z]{1,3}$?[0-9]{1,7}
bool looks_like_cell(std::string_view word) {
    std::size_t pos = 0;
    if (pos < word.size() && word[pos] == '$') ++pos;
    std::size_t letters = 0;
    while (pos < word.size() && is_alpha(word[pos])) {
        ++pos;
        ++letters;
    }
    if (letters == 0 || letters > 3) return false;
    if (pos < word.size() && word[pos] == '$') ++pos;
    std::size_t digits = 0;
    while (pos < word.size() && is_digit(word[pos])) {
        ++pos;
        ++digits;
    }
    return digits > 0 && digits <= 7 && pos == word.size() && word[pos - digits] != '0';
}

std::size_t scan_number(std::string_view src, std::size_t pos) {
    while (pos < src.size() && is_digit(src[pos])) ++pos;
    if (pos < src.size() && src[pos] == '.') {
        ++pos;
        while (pos < src.size() && is_digit(src[pos])) ++pos;
    }
    if (pos < src.size() && (src[pos] == 'e' || src[pos] == 'E')) {
        std::size_t exp = pos + 1;
        if (exp < src.size() && (src[exp] == '+' || src[exp] == '-')) ++exp;
        if (exp < src.size() && is_digit(src[exp])) {
            while (exp < src.size() && is_digit(src[exp])) ++exp;
            pos = exp;
        }
    }
    return pos;
}

std::size_t skip_spaces(std::string_view src, std::size_t pos) {
    while (pos < src.size() && is_space(src[pos])) ++pos;
    return pos;
}

}  // namespace

bool is_valid_name(std::string_view text) {
    if (text.empty()) return false;
    if (!is_alpha(text[0]) && text[0] != '_') return false;
    return std::all_of(text.begin(), text.end(), [](char c) { return is_word_char(c) && c != '$'; });
}

std::vector<Token> tokenize(std::string_view src) {
    std::vector<Token> tokens;
    std::size_t pos = 0;
    auto push = [&](TokenKind kind, std::size_t begin, std::size_t end) {
        tokens.push_back({kind, std::string(src.substr(begin, end - begin)), begin});
    };

    while (true) {
        pos = skip_spaces(src, pos);
        if (pos >= src.size()) break;
        const char c = src[pos];
        const std::size_t begin = pos;

        if (is_digit(c) || (c == '.' && pos + 1 < src.size() && is_digit(src[pos + 1]))) {
            pos = scan_number(src, pos);
            push(TokenKind::Number, begin, pos);
            continue;
        }

        if (c == '"') {
            ++pos;
            while (true) {
                if (pos >= src.size()) throw LexError(begin, "unterminated string");
                if (src[pos] == '"') {
                    if (pos + 1 < src.size() && src[pos + 1] == '"') {
                        pos += 2;
                        continue;
                    }
                    ++pos;
                    break;
                }
                ++pos;
            }
            push(TokenKind::String, begin, pos);
            continue;
        }

        if (is_alpha(c) || c == '_' || c == '$') {
            while (pos < src.size() && is_word_char(src[pos])) ++pos;
            std::string_view word = src.substr(begin, pos - begin);

            if (pos < src.size() && src[pos] == '!') {
                if (!is_valid_name(word)) throw LexError(begin, std::string(word));
                std::size_t cell_begin = pos + 1;
                std::size_t cell_end = cell_begin;
                while (cell_end < src.size() && is_word_char(src[cell_end])) ++cell_end;
                if (!looks_like_cell(src.substr(cell_begin, cell_end - cell_begin))) {
                    throw LexError(pos, "!");
                }
                pos = cell_end;
                push(TokenKind::CellRef, begin, pos);
                continue;
            }

            const std::size_t after = skip_spaces(src, pos);
            const bool call_follows = after < src.size() && src[after] == '(';
            if (looks_like_cell(word) && !call_follows) {
                push(TokenKind::CellRef, begin, pos);
            } else if (!call_follows && (compare_text_ci(word, "TRUE") == 0 || compare_text_ci(word, "FALSE") == 0)) {
                push(TokenKind::Boolean, begin, pos);
            } else if (is_valid_name(word)) {
                push(TokenKind::Name, begin, pos);
            } else {
                auto dollar = word.find('$');
                throw LexError(begin + (dollar == std::string_view::npos ? 0 : dollar), "$");
            }
            continue;
        }

        switch (c) {
            case '+': case '-': case '*': case '/': case '^': case '&': case '=':
                ++pos;
                push(TokenKind::Operator, begin, pos);
                continue;
            case '<':
                ++pos;
                if (pos < src.size() && (src[pos] == '=' || src[pos] == '>')) ++pos;
                push(TokenKind::Operator, begin, pos);
                continue;
            case '>':
                ++pos;
                if (pos < src.size() && src[pos] == '=') ++pos;
                push(TokenKind::Operator, begin, pos);
                continue;
            case '(': case ')': case ',': case ':':
                ++pos;
                push(TokenKind::Punctuation, begin, pos);
                continue;
            default:
                throw LexError(begin, std::string(1, c));
        }
    }
    return tokens;
}

std::string unquote(std::string_view lexeme) {
    std::string out;
    if (lexeme.size() < 2) return out;
    for (std::size_t i = 1; i + 1 < lexeme.size(); ++i) {
        out.push_back(lexeme[i]);
        if (lexeme[i] == '"') ++i;
    }
    return out;
}

std::string quote(std::string_view text) {
    std::string out = "\"";
    for (char c : text) {
        out.push_back(c);
        if (c == '"') out.push_back('"');
    }
    out.push_back('"');
    return out;
}

std::string_view op_text(UnaryOp op) { return op == UnaryOp::Neg ? "-" : "+"; }

std::string_view op_text(BinaryOp op) {
    switch (op) {
        case BinaryOp::Add: return "+";
        case BinaryOp::Sub: return "-";
        case BinaryOp::Mul: return "*";
        case BinaryOp::Div: return "/";
        case BinaryOp::Pow: return "^";
        case BinaryOp::Concat: return "&";
        case BinaryOp::Eq: return "=";
        case BinaryOp::Ne: return "<>";
        case BinaryOp::Lt: return "<";
        case BinaryOp::Le: return "<=";
        case BinaryOp::Gt: return ">";
        case BinaryOp::Ge: return ">=";
    }
    return "?";
}

bool operator==(const FormulaAst& a, const FormulaAst& b) {
    if (a.kind != b.kind) return false;
    switch (a.kind) {
        case NodeKind::Literal:
            if (!(a.literal == b.literal)) return false;
            break;
        case NodeKind::CellRef:
        case NodeKind::RangeRef:
            if (!(a.range == b.range)) return false;
            break;
        case NodeKind::NameRef:
        case NodeKind::Call:
            if (a.name != b.name) return false;
            break;
        case NodeKind::Unary:
            if (a.unary_op != b.unary_op) return false;
            break;
        case NodeKind::Binary:
            if (a.binary_op != b.binary_op) return false;
            break;
    }
    return a.children == b.children;
}

namespace {

enum Precedence : int { kCompare = 1, kConcat, kAdd, kMul, kPow, kUnary, kPrimary };

int precedence(BinaryOp op) {
    switch (op) {
        case BinaryOp::Pow: return kPow;
        case BinaryOp::Mul: case BinaryOp::Div: return kMul;
        case BinaryOp::Add: case BinaryOp::Sub: return kAdd;
        case BinaryOp::Concat: return kConcat;
        default: return kCompare;
    }
}

int precedence(const FormulaAst& node) {
    if (node.kind == NodeKind::Binary) return precedence(node.binary_op);
    if (node.kind == NodeKind::Unary) return kUnary;
    return kPrimary;
}

class Parser {
public:
    // Token offsets are relative to the body; `base` shifts them back into
    // the caller's coordinates (past the leading "=").
    Parser(std::vector<Token> tokens, std::size_t base, std::size_t source_size)
        : tokens_(std::move(tokens)), base_(base), source_size_(source_size) {}

    FormulaAst parse() {
        FormulaAst ast = compare();
        if (!at_end()) fail("end of formula");
        return ast;
    }

private:
    bool at_end() const { return pos_ >= tokens_.size(); }
    const Token& peek() const { return tokens_[pos_]; }

    std::size_t offset_here() const { return at_end() ? source_size_ : base_ + peek().offset; }
    std::size_t end_of(const Token& t) const { return base_ + t.offset + t.lexeme.size(); }

    [[noreturn]] void fail(std::string expected) const {
        throw ParseError(offset_here(), std::move(expected), at_end() ? "end of formula" : "'" + peek().lexeme + "'");
    }

    bool next_is(TokenKind kind, std::string_view lexeme) const {
        return !at_end() && peek().kind == kind && peek().lexeme == lexeme;
    }

    void expect(std::string_view lexeme) {
        if (!next_is(TokenKind::Punctuation, lexeme)) fail("'" + std::string(lexeme) + "'");
        ++pos_;
    }

    static FormulaAst binary(BinaryOp op, FormulaAst lhs, FormulaAst rhs) {
        FormulaAst node;
        node.kind = NodeKind::Binary;
        node.binary_op = op;
        node.span = {lhs.span.begin, rhs.span.end};
        node.children.push_back(std::move(lhs));
        node.children.push_back(std::move(rhs));
        return node;
    }

    template <typename Next, typename Match>
    FormulaAst left_assoc(Next next, Match match) {
        FormulaAst lhs = (this->*next)();
        while (!at_end() && peek().kind == TokenKind::Operator) {
            auto op = match(peek().lexeme);
            if (!op) break;
            ++pos_;
            lhs = binary(*op, std::move(lhs), (this->*next)());
        }
        return lhs;
    }

    FormulaAst compare() {
        return left_assoc(&Parser::concat, [](std::string_view s) -> std::optional<BinaryOp> {
            if (s == "=") return BinaryOp::Eq;
            if (s == "<>") return BinaryOp::Ne;
            if (s == "<") return BinaryOp::Lt;
            if (s == "<=") return BinaryOp::Le;
            if (s == ">") return BinaryOp::Gt;
            if (s == ">=") return BinaryOp::Ge;
            return std::nullopt;
        });
    }
    FormulaAst concat() {
        return left_assoc(&Parser::add, [](std::string_view s) -> std::optional<BinaryOp> {
            if (s == "&") return BinaryOp::Concat;
            return std::nullopt;
        });
    }
    FormulaAst add() {
        return left_assoc(&Parser::mul, [](std::string_view s) -> std::optional<BinaryOp> {
            if (s == "+") return BinaryOp::Add;
            if (s == "-") return BinaryOp::Sub;
            return std::nullopt;
        });
    }
    FormulaAst mul() {
        return left_assoc(&Parser::pow, [](std::string_view s) -> std::optional<BinaryOp> {
            if (s == "*") return BinaryOp::Mul;
            if (s == "/") return BinaryOp::Div;
            return std::nullopt;
        });
    }
    FormulaAst pow() {
        return left_assoc(&Parser::unary, [](std::string_view s) -> std::optional<BinaryOp> {
            if (s == "^") return BinaryOp::Pow;
            return std::nullopt;
        });
    }

    FormulaAst unary() {
        if (!at_end() && peek().kind == TokenKind::Operator && (peek().lexeme == "-" || peek().lexeme == "+")) {
            FormulaAst node;
            node.kind = NodeKind::Unary;
            node.unary_op = peek().lexeme == "-" ? UnaryOp::Neg : UnaryOp::Plus;
            node.span.begin = base_ + peek().offset;
            ++pos_;
            node.children.push_back(unary());
            node.span.end = node.children.back().span.end;
            return node;
        }
        return primary();
    }

    CellAddress cell_from(const Token& token) const {
        try {
            return parse_a1(token.lexeme);
        } catch (const BadAddress&) {
            throw ParseError(base_ + token.offset, "cell reference", "'" + token.lexeme + "'");
        }
    }

    FormulaAst primary() {
        if (at_end()) fail("expression");
        const Token& token = peek();
        FormulaAst node;
        node.span = {base_ + token.offset, end_of(token)};

        switch (token.kind) {
            case TokenKind::Number: {
                auto value = parse_number(token.lexeme);
                if (!value) throw ParseError(base_ + token.offset, "number", "'" + token.lexeme + "'");
                node.literal = CellValue(*value);
                ++pos_;
                return node;
            }
            case TokenKind::String:
                node.literal = CellValue(unquote(token.lexeme));
                ++pos_;
                return node;
            case TokenKind::Boolean:
                node.literal = CellValue(compare_text_ci(token.lexeme, "TRUE") == 0);
                ++pos_;
                return node;
            case TokenKind::CellRef: {
                CellAddress start = cell_from(token);
                ++pos_;
                node.kind = NodeKind::CellRef;
                node.range = CellRange::single(start);
                if (next_is(TokenKind::Punctuation, ":")) {
                    ++pos_;
                    if (at_end() || peek().kind != TokenKind::CellRef) fail("cell reference after ':'");
                    const Token& end_token = peek();
                    CellAddress end = cell_from(end_token);
                    if (!end.sheet.empty() && end.sheet != start.sheet) {
                        throw ParseError(base_ + end_token.offset, "range corners on one sheet",
                                         "'" + end_token.lexeme + "'");
                    }
                    end.sheet = start.sheet;
                    ++pos_;
                    node.kind = NodeKind::RangeRef;
                    node.range = normalized({start, end});
                    node.span.end = end_of(end_token);
                }
                return node;
            }
            case TokenKind::Name: {
                node.name = to_upper_ascii(token.lexeme);
                ++pos_;
                if (next_is(TokenKind::Punctuation, "(")) {
                    ++pos_;
                    node.kind = NodeKind::Call;
                    if (!next_is(TokenKind::Punctuation, ")")) {
                        node.children.push_back(compare());
                        while (next_is(TokenKind::Punctuation, ",")) {
                            ++pos_;
                            node.children.push_back(compare());
                        }
                    }
                    if (!next_is(TokenKind::Punctuation, ")")) fail("',' or ')'");
                    node.span.end = end_of(peek());
                    ++pos_;
                } else {
                    node.kind = NodeKind::NameRef;
                }
                return node;
            }
            case TokenKind::Punctuation:
                if (token.lexeme == "(") {
                    ++pos_;
                    FormulaAst inner = compare();
                    expect(")");
                    return inner;
                }
                break;
            case TokenKind::Operator:
                break;
        }
        fail("expression");
    }

    std::vector<Token> tokens_;
    std::size_t base_;
    std::size_t source_size_;
    std::size_t pos_ = 0;
};

void render_into(const FormulaAst& node, std::string& out) {
    auto child = [&](const FormulaAst& c, bool parens) {
        if (parens) out.push_back('(');
        render_into(c, out);
        if (parens) out.push_back(')');
    };

    switch (node.kind) {
        case NodeKind::Literal:
            if (node.literal.is_text()) {
                out += quote(node.literal.text());
            } else {
                out += render(node.literal);
            }
            return;
        case NodeKind::CellRef:
            out += format_a1(node.range.start);
            return;
        case NodeKind::RangeRef:
            out += format_range(node.range);
            return;
        case NodeKind::NameRef:
            out += node.name;
            return;
        case NodeKind::Unary:
            out += op_text(node.unary_op);
            child(node.children[0], precedence(node.children[0]) < kUnary);
            return;
        case NodeKind::Binary: {
            const int p = precedence(node.binary_op);
            child(node.children[0], precedence(node.children[0]) < p);
            out += op_text(node.binary_op);
            child(node.children[1], precedence(node.children[1]) <= p);
            return;
        }
        case NodeKind::Call:
            out += node.name;
            out.push_back('(');
            for (std::size_t i = 0; i < node.children.size(); ++i) {
                if (i > 0) out.push_back(',');
                render_into(node.children[i], out);
            }
            out.push_back(')');
            return;
    }
}

void collect(const FormulaAst& node, std::vector<Reference>& out) {
    auto add = [&](Reference ref) {
        if (std::find(out.begin(), out.end(), ref) == out.end()) out.push_back(std::move(ref));
    };
    switch (node.kind) {
        case NodeKind::CellRef:
            add({Reference::Kind::Cell, node.range, {}});
            break;
        case NodeKind::RangeRef:
            add({Reference::Kind::Range, node.range, {}});
            break;
        case NodeKind::NameRef:
            add({Reference::Kind::Name, {}, node.name});
            break;
        default:
            break;
    }
    for (const auto& c : node.children) collect(c, out);
}

}  // namespace

FormulaAst parse_formula(std::string_view source) {
    if (source.empty() || source[0] != '=') {
        throw ParseError(0, "'='", source.empty() ? "end of formula" : "'" + std::string(1, source[0]) + "'");
    }
    std::vector<Token> tokens;
    try {
        tokens = tokenize(source.substr(1));
    } catch (const LexError& e) {
        throw LexError(e.offset + 1, e.found);
    }
    return Parser(std::move(tokens), 1, source.size()).parse();
}

std::string render_formula(const FormulaAst& ast) {
    std::string out = "=";
    render_into(ast, out);
    return out;
}

std::vector<Reference> extract_references(const FormulaAst& ast) {
    std::vector<Reference> out;
    collect(ast, out);
    return out;
}

}  // namespace rowcalc
