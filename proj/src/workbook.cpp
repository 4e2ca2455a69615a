#include "rowcalc/workbook.hpp"

#include <algorithm>

namespace rowcalc {

Matrix Matrix::row(std::vector<CellValue> values) {
    Matrix m;
    m.rows = 1;
    m.cols = static_cast<std::int32_t>(values.size());
    m.values = std::move(values);
    return m;
}

Workbook::Workbook(Limits limits) : limits_(limits) {}

SheetId Workbook::add_sheet(std::string name) {
    if (!is_valid_name(name)) throw BadAddress("invalid sheet name '" + name + "'");
    if (find_sheet(name)) throw DuplicateName("sheet '" + name + "' already exists");
    sheets_.push_back(std::move(name));
    ++structure_version_;
    return static_cast<SheetId>(sheets_.size() - 1);
}

std::optional<SheetId> Workbook::find_sheet(std::string_view name) const {
    for (std::size_t i = 0; i < sheets_.size(); ++i) {
        if (compare_text_ci(sheets_[i], name) == 0) return static_cast<SheetId>(i);
    }
    return std::nullopt;
}

std::optional<CellKey> Workbook::try_key_of(const CellAddress& address, SheetId default_sheet) const {
    CellKey key;
    if (address.sheet.empty()) {
        if (default_sheet >= sheets_.size()) return std::nullopt;
        key.sheet = default_sheet;
    } else {
        auto sheet = find_sheet(address.sheet);
        if (!sheet) return std::nullopt;
        key.sheet = *sheet;
    }
    if (address.row < 1 || address.row > limits_.max_rows) return std::nullopt;
    if (address.col < 1 || address.col > limits_.max_cols) return std::nullopt;
    key.row = address.row;
    key.col = address.col;
    return key;
}

CellKey Workbook::key_of(const CellAddress& address, SheetId default_sheet) const {
    if (auto key = try_key_of(address, default_sheet)) return *key;
    if (!address.sheet.empty() && !find_sheet(address.sheet)) {
        throw BadAddress("unknown sheet '" + address.sheet + "'");
    }
    if (address.sheet.empty() && default_sheet >= sheets_.size()) {
        throw BadAddress("workbook has no sheet for unqualified address " + format_a1(address));
    }
    throw BadAddress("address " + format_a1(address) + " is outside the sheet bounds");
}

CellAddress Workbook::address_of(const CellKey& key) const {
    return {sheets_.at(key.sheet), key.row, key.col};
}

CellRange Workbook::qualified(const CellRange& range, SheetId default_sheet) const {
    const CellKey start = key_of(range.start, default_sheet);
    CellAddress end_address = range.end;
    if (end_address.sheet.empty()) end_address.sheet = sheets_.at(start.sheet);
    const CellKey end = key_of(end_address, default_sheet);
    if (end.sheet != start.sheet) throw BadAddress("range corners lie on different sheets");
    return normalized({address_of(start), address_of(end)});
}

void Workbook::put(const CellKey& key, Cell cell) {
    auto it = cells_.find(key);
    const bool had_formula = it != cells_.end() && it->second.is_formula();
    if (had_formula || cell.is_formula()) ++structure_version_;
    if (it == cells_.end()) {
        cells_.emplace(key, std::move(cell));
    } else {
        it->second = std::move(cell);
    }
}

void Workbook::set_cell(const CellAddress& address, CellValue literal) {
    put(key_of(address), Cell{nullptr, std::move(literal)});
}

void Workbook::set_formula(const CellAddress& address, std::string_view source) {
    const CellKey key = key_of(address);
    auto formula = std::make_shared<Formula>(Formula{parse_formula(source), std::string(source)});
    put(key, Cell{std::move(formula), CellValue{}});
}

void Workbook::clear_cell(const CellAddress& address) {
    const CellKey key = key_of(address);
    auto it = cells_.find(key);
    if (it == cells_.end()) return;
    if (it->second.is_formula()) ++structure_version_;
    cells_.erase(it);
}

const CellValue& Workbook::value_at(const CellKey& key) const {
    static const CellValue blank;
    auto it = cells_.find(key);
    return it == cells_.end() ? blank : it->second.value;
}

const CellValue& Workbook::get_value(const CellAddress& address) const { return value_at(key_of(address)); }

const Cell* Workbook::find_cell(const CellKey& key) const {
    auto it = cells_.find(key);
    return it == cells_.end() ? nullptr : &it->second;
}

std::string Workbook::name_key(std::string_view name) { return to_upper_ascii(name); }

void Workbook::define_name(std::string name, const CellRange& range) {
    std::vector<Token> tokens;
    try {
        tokens = tokenize(name);
    } catch (const LexError&) {
    }
    if (tokens.size() != 1 || tokens[0].kind != TokenKind::Name || !is_valid_name(name)) {
        throw UnknownName("'" + name + "' is not a valid range name");
    }
    const std::string key = name_key(name);
    if (name_index_.count(key)) throw DuplicateName("range name '" + name + "' is already defined");
    CellRange q = qualified(range);
    name_index_.emplace(key, names_.size());
    names_.push_back({std::move(name), std::move(q)});
    ++structure_version_;
}

const NamedRange* Workbook::find_name(std::string_view name) const {
    auto it = name_index_.find(name_key(name));
    return it == name_index_.end() ? nullptr : &names_[it->second];
}

const CellRange& Workbook::resolve_name(std::string_view name) const {
    if (const NamedRange* found = find_name(name)) return found->range;
    throw UnknownName("unknown range name '" + std::string(name) + "'");
}

std::vector<NamedRange> Workbook::names() const { return names_; }

Matrix Workbook::read_range(const CellRange& range) const {
    const CellRange q = qualified(range);
    const SheetId sheet = *find_sheet(q.start.sheet);
    Matrix out(q.rows(), q.cols());
    for (std::int32_t r = 0; r < q.rows(); ++r) {
        for (std::int32_t c = 0; c < q.cols(); ++c) {
            out.at(r, c) = value_at({sheet, q.start.row + r, q.start.col + c});
        }
    }
    return out;
}

void Workbook::write_range(const CellRange& range, const Matrix& values) {
    const CellRange q = qualified(range);
    if (values.rows != q.rows() || values.cols != q.cols()) {
        throw ShapeMismatch("cannot write a " + std::to_string(values.rows) + "x" + std::to_string(values.cols) +
                            " block into " + format_range(q) + " (" + std::to_string(q.rows()) + "x" +
                            std::to_string(q.cols()) + ")");
    }
    const SheetId sheet = *find_sheet(q.start.sheet);
    for (std::int32_t r = 0; r < q.rows(); ++r) {
        for (std::int32_t c = 0; c < q.cols(); ++c) {
            const CellKey key{sheet, q.start.row + r, q.start.col + c};
            const Cell* cell = find_cell(key);
            if (cell && cell->is_formula() && !is_writable(key)) {
                throw FormulaOverwrite("refusing to overwrite formula in " + format_a1(address_of(key)) +
                                       " (declare the range writable first)");
            }
        }
    }
    for (std::int32_t r = 0; r < q.rows(); ++r) {
        for (std::int32_t c = 0; c < q.cols(); ++c) {
            const CellKey key{sheet, q.start.row + r, q.start.col + c};
            auto it = cells_.find(key);
            if (it != cells_.end() && !it->second.is_formula()) {
                it->second.value = values.at(r, c);
            } else {
                put(key, Cell{nullptr, values.at(r, c)});
            }
        }
    }
}

void Workbook::declare_writable(const CellRange& range) { writable_.push_back(qualified(range)); }

bool Workbook::is_writable(const CellKey& key) const {
    return std::any_of(writable_.begin(), writable_.end(), [&](const CellRange& r) {
        return *find_sheet(r.start.sheet) == key.sheet && r.contains(key.row, key.col);
    });
}

void Workbook::store_result(const CellKey& key, CellValue value) {
    auto it = cells_.find(key);
    if (it != cells_.end()) it->second.value = std::move(value);
}

void Workbook::for_each_cell(const std::function<void(const CellKey&, const Cell&)>& fn) const {
    for (const auto& [key, cell] : cells_) fn(key, cell);
}

std::vector<CellKey> Workbook::formula_cells() const {
    std::vector<CellKey> out;
    for (const auto& [key, cell] : cells_) {
        if (cell.is_formula()) out.push_back(key);
    }
    std::sort(out.begin(), out.end());
    return out;
}

}  // namespace rowcalc
