#include "rowcalc/calc.hpp"

#include <algorithm>
#include <cmath>
#include <queue>

namespace rowcalc {

namespace {

std::string describe_cycle(const std::vector<CellAddress>& cells) {
    std::string out = "circular reference: ";
    for (const auto& c : cells) out += format_a1(c) + " -> ";
    if (!cells.empty()) out += format_a1(cells.front());
    return out;
}

// Ranges up to this many cells are expanded into per-cell edges; larger
// ones are matched by containment.
constexpr std::int64_t kExpandLimit = 4096;

// Evaluating a range materialises its values; refuse absurd ones.
constexpr std::int64_t kMaxRangeCells = std::int64_t{1} << 24;

struct ResolvedRange {
    SheetId sheet;
    CellRange range;
};

std::optional<ResolvedRange> resolve_cells(const Workbook& wb, const CellRange& range, SheetId sheet) {
    auto start = wb.try_key_of(range.start, sheet);
    if (!start) return std::nullopt;
    CellAddress end_address = range.end;
    if (end_address.sheet.empty()) end_address.sheet = range.start.sheet;
    auto end = wb.try_key_of(end_address, sheet);
    if (!end || end->sheet != start->sheet) return std::nullopt;
    CellRange r{{{}, start->row, start->col}, {{}, end->row, end->col}};
    return ResolvedRange{start->sheet, normalized(r)};
}

std::optional<ResolvedRange> resolve_name(const Workbook& wb, const std::string& name) {
    const NamedRange* named = wb.find_name(name);
    if (!named) return std::nullopt;
    return resolve_cells(wb, named->range, 0);
}

}  // namespace

CycleError::CycleError(std::vector<CellAddress> cycle) : ConfigError(describe_cycle(cycle)), cells(std::move(cycle)) {}

std::optional<std::size_t> DependencyGraph::position(const CellKey& key) const {
    auto it = position_.find(key);
    if (it == position_.end()) return std::nullopt;
    return it->second;
}

std::vector<std::uint32_t> DependencyGraph::affected(std::span<const CellKey> dirty) const {
    std::vector<char> seen(order_.size(), 0);
    std::vector<std::uint32_t> stack;
    auto push = [&](std::uint32_t p) {
        if (!seen[p]) {
            seen[p] = 1;
            stack.push_back(p);
        }
    };
    for (const CellKey& key : dirty) {
        if (auto it = position_.find(key); it != position_.end()) push(it->second);
        if (auto it = readers_.find(key); it != readers_.end()) {
            for (auto p : it->second) push(p);
        }
        for (const auto& w : wide_readers_) {
            if (w.sheet == key.sheet && w.range.contains(key.row, key.col)) push(w.reader);
        }
    }
    while (!stack.empty()) {
        const std::uint32_t p = stack.back();
        stack.pop_back();
        for (auto d : dependents_[p]) push(d);
    }
    std::vector<std::uint32_t> out;
    for (std::uint32_t p = 0; p < seen.size(); ++p) {
        if (seen[p]) out.push_back(p);
    }
    return out;
}

DependencyGraph build_graph(const Workbook& wb) {
    const std::vector<CellKey> keys = wb.formula_cells();
    const std::size_t n = keys.size();
    std::unordered_map<CellKey, std::uint32_t, CellKeyHash> index;
    index.reserve(n);
    for (std::uint32_t i = 0; i < n; ++i) index.emplace(keys[i], i);

    std::vector<std::vector<std::uint32_t>> dependents(n);  // i -> formulas reading i
    std::vector<std::vector<std::uint32_t>> dependencies(n);
    std::unordered_map<CellKey, std::vector<std::uint32_t>, CellKeyHash> readers;
    std::vector<std::pair<ResolvedRange, std::uint32_t>> wide;

    auto add_edge = [&](std::uint32_t from, std::uint32_t to) {
        dependents[from].push_back(to);
        dependencies[to].push_back(from);
    };

    for (std::uint32_t i = 0; i < n; ++i) {
        const Cell* cell = wb.find_cell(keys[i]);
        for (const Reference& ref : extract_references(cell->formula->ast)) {
            std::optional<ResolvedRange> resolved;
            if (ref.kind == Reference::Kind::Name) {
                resolved = resolve_name(wb, ref.name);
                if (!resolved) {
                    if (!wb.find_name(ref.name)) {
                        throw UnknownName("unknown name '" + ref.name + "' in " + format_a1(wb.address_of(keys[i])));
                    }
                    continue;
                }
            } else {
                resolved = resolve_cells(wb, ref.range, keys[i].sheet);
                if (!resolved) continue;  // evaluates to #REF!
            }

            const auto& [sheet, range] = *resolved;
            if (range.size() <= kExpandLimit) {
                for (std::int32_t r = range.start.row; r <= range.end.row; ++r) {
                    for (std::int32_t c = range.start.col; c <= range.end.col; ++c) {
                        const CellKey member{sheet, r, c};
                        if (auto it = index.find(member); it != index.end()) {
                            add_edge(it->second, i);
                        } else {
                            readers[member].push_back(i);
                        }
                    }
                }
            } else {
                wide.push_back({*resolved, i});
                for (std::uint32_t j = 0; j < n; ++j) {
                    if (keys[j].sheet == sheet && range.contains(keys[j].row, keys[j].col)) add_edge(j, i);
                }
            }
        }
    }

    // Kahn's algorithm, always taking the smallest remaining cell so the
    // order is deterministic.
    std::vector<std::size_t> indegree(n, 0);
    for (std::uint32_t i = 0; i < n; ++i) {
        std::sort(dependents[i].begin(), dependents[i].end());
        dependents[i].erase(std::unique(dependents[i].begin(), dependents[i].end()), dependents[i].end());
        for (auto d : dependents[i]) ++indegree[d];
    }
    std::priority_queue<std::uint32_t, std::vector<std::uint32_t>, std::greater<>> ready;
    for (std::uint32_t i = 0; i < n; ++i) {
        if (indegree[i] == 0) ready.push(i);
    }
    std::vector<std::uint32_t> topo;
    topo.reserve(n);
    while (!ready.empty()) {
        const std::uint32_t i = ready.top();
        ready.pop();
        topo.push_back(i);
        for (auto d : dependents[i]) {
            if (--indegree[d] == 0) ready.push(d);
        }
    }

    if (topo.size() != n) {
        // Every leftover node still has an unprocessed dependency, so walking
        // dependencies from any of them must revisit a node.
        std::uint32_t start = 0;
        while (indegree[start] == 0) ++start;
        std::vector<std::int64_t> visited_at(n, -1);
        std::vector<std::uint32_t> path;
        std::uint32_t current = start;
        while (visited_at[current] < 0) {
            visited_at[current] = static_cast<std::int64_t>(path.size());
            path.push_back(current);
            for (auto dep : dependencies[current]) {
                if (indegree[dep] > 0) {
                    current = dep;
                    break;
                }
            }
        }
        std::vector<CellAddress> cycle;
        for (auto k = static_cast<std::size_t>(visited_at[current]); k < path.size(); ++k) {
            cycle.push_back(wb.address_of(keys[path[k]]));
        }
        throw CycleError(std::move(cycle));
    }

    DependencyGraph graph;
    std::vector<std::uint32_t> pos_of(n);
    for (std::uint32_t p = 0; p < n; ++p) pos_of[topo[p]] = p;

    graph.order_.reserve(n);
    graph.dependents_.resize(n);
    for (std::uint32_t p = 0; p < n; ++p) {
        const std::uint32_t i = topo[p];
        graph.order_.push_back(keys[i]);
        graph.position_.emplace(keys[i], p);
        for (auto d : dependents[i]) graph.dependents_[p].push_back(pos_of[d]);
    }
    for (auto& [key, list] : readers) {
        auto& out = graph.readers_[key];
        for (auto i : list) out.push_back(pos_of[i]);
        std::sort(out.begin(), out.end());
        out.erase(std::unique(out.begin(), out.end()), out.end());
    }
    for (const auto& [resolved, i] : wide) {
        graph.wide_readers_.push_back({resolved.sheet, resolved.range, pos_of[i]});
    }
    graph.version_ = wb.structure_version();
    return graph;
}

// ---------------------------------------------------------------------------
// Evaluation

namespace {

CellValue arithmetic(BinaryOp op, double a, double b) {
    switch (op) {
        case BinaryOp::Add: return a + b;
        case BinaryOp::Sub: return a - b;
        case BinaryOp::Mul: return a * b;
        case BinaryOp::Div:
            if (b == 0.0) return ErrorCode::Div0;
            return a / b;
        case BinaryOp::Pow:
            if (a == 0.0 && b == 0.0) return ErrorCode::Num;
            if (a == 0.0 && b < 0.0) return ErrorCode::Div0;
            if (a < 0.0 && b != std::trunc(b)) return ErrorCode::Num;
            return std::pow(a, b);
        default:
            return ErrorCode::Value;
    }
}

bool is_reference(const FormulaAst& node) {
    return node.kind == NodeKind::CellRef || node.kind == NodeKind::RangeRef || node.kind == NodeKind::NameRef;
}

std::optional<ResolvedRange> reference_range(const FormulaAst& node, const EvalContext& ctx, ErrorCode& error) {
    std::optional<ResolvedRange> resolved;
    if (node.kind == NodeKind::NameRef) {
        if (!ctx.workbook.find_name(node.name)) {
            error = ErrorCode::Name;
            return std::nullopt;
        }
        resolved = resolve_name(ctx.workbook, node.name);
    } else {
        resolved = resolve_cells(ctx.workbook, node.range, ctx.sheet);
    }
    if (!resolved || resolved->range.size() > kMaxRangeCells) {
        error = ErrorCode::Ref;
        return std::nullopt;
    }
    return resolved;
}

FunctionArg read_matrix(const FormulaAst& node, const EvalContext& ctx) {
    ErrorCode error{};
    auto resolved = reference_range(node, ctx, error);
    if (!resolved) return CellValue(error);
    const auto& [sheet, range] = *resolved;
    Matrix m(range.rows(), range.cols());
    for (std::int32_t r = 0; r < m.rows; ++r) {
        for (std::int32_t c = 0; c < m.cols; ++c) {
            m.at(r, c) = ctx.workbook.value_at({sheet, range.start.row + r, range.start.col + c});
        }
    }
    return m;
}

CellValue evaluate_call(const FormulaAst& node, const EvalContext& ctx) {
    const FunctionSignature* fn = ctx.functions.find(node.name);
    if (!fn) return ErrorCode::Name;
    const int argc = static_cast<int>(node.children.size());
    if (argc < fn->min_args || (fn->max_args >= 0 && argc > fn->max_args)) return ErrorCode::Value;

    if (fn->lazy) {
        // IF(condition, then, [else])
        CellValue condition = to_boolean(evaluate(node.children[0], ctx));
        if (condition.is_error()) return condition;
        if (condition.boolean()) return evaluate(node.children[1], ctx);
        if (argc > 2) return evaluate(node.children[2], ctx);
        return false;
    }

    std::vector<FunctionArg> args;
    args.reserve(node.children.size());
    for (std::size_t i = 0; i < node.children.size(); ++i) {
        const FormulaAst& child = node.children[i];
        switch (fn->kind_at(i)) {
            case ArgKind::Scalar:
                args.emplace_back(evaluate(child, ctx));
                break;
            case ArgKind::Range:
                if (!is_reference(child)) return ErrorCode::Value;
                args.push_back(read_matrix(child, ctx));
                break;
            case ArgKind::Any:
                if (is_reference(child)) {
                    args.push_back(read_matrix(child, ctx));
                } else {
                    args.emplace_back(evaluate(child, ctx));
                }
                break;
        }
    }

    // The first error among the arguments, in argument order, wins.
    for (const auto& arg : args) {
        if (const auto* v = std::get_if<CellValue>(&arg)) {
            if (v->is_error()) return *v;
        } else {
            for (const auto& cell : std::get<Matrix>(arg).values) {
                if (cell.is_error()) return cell;
            }
        }
    }
    return fn->impl(args);
}

}  // namespace

CellValue evaluate(const FormulaAst& node, const EvalContext& ctx) {
    switch (node.kind) {
        case NodeKind::Literal:
            return node.literal;

        case NodeKind::CellRef:
        case NodeKind::RangeRef:
        case NodeKind::NameRef: {
            ErrorCode error{};
            auto resolved = reference_range(node, ctx, error);
            if (!resolved) return error;
            if (!resolved->range.is_single_cell()) return ErrorCode::Value;
            return ctx.workbook.value_at({resolved->sheet, resolved->range.start.row, resolved->range.start.col});
        }

        case NodeKind::Unary: {
            CellValue v = to_number(evaluate(node.children[0], ctx));
            if (v.is_error()) return v;
            return node.unary_op == UnaryOp::Neg ? -v.number() : v.number();
        }

        case NodeKind::Binary: {
            const CellValue lhs = evaluate(node.children[0], ctx);
            const CellValue rhs = evaluate(node.children[1], ctx);
            if (lhs.is_error()) return lhs;
            if (rhs.is_error()) return rhs;
            switch (node.binary_op) {
                case BinaryOp::Concat: {
                    CellValue a = to_text(lhs);
                    CellValue b = to_text(rhs);
                    return a.text() + b.text();
                }
                case BinaryOp::Eq: return compare_values(lhs, rhs) == 0;
                case BinaryOp::Ne: return compare_values(lhs, rhs) != 0;
                case BinaryOp::Lt: return compare_values(lhs, rhs) < 0;
                case BinaryOp::Le: return compare_values(lhs, rhs) <= 0;
                case BinaryOp::Gt: return compare_values(lhs, rhs) > 0;
                case BinaryOp::Ge: return compare_values(lhs, rhs) >= 0;
                default: {
                    CellValue a = to_number(lhs);
                    if (a.is_error()) return a;
                    CellValue b = to_number(rhs);
                    if (b.is_error()) return b;
                    return arithmetic(node.binary_op, a.number(), b.number());
                }
            }
        }

        case NodeKind::Call:
            return evaluate_call(node, ctx);
    }
    return ErrorCode::Value;
}

namespace {

std::size_t run_positions(Workbook& wb, const DependencyGraph& graph, const std::vector<std::uint32_t>& positions) {
    const auto& order = graph.order();
    for (auto p : positions) {
        const CellKey& key = order[p];
        const Cell* cell = wb.find_cell(key);
        CellValue value = evaluate(cell->formula->ast, EvalContext{wb, key.sheet});
        wb.store_result(key, std::move(value));
    }
    return positions.size();
}

}  // namespace

std::size_t recalculate(Workbook& wb, const DependencyGraph& graph, std::span<const CellKey> dirty) {
    return run_positions(wb, graph, graph.affected(dirty));
}

std::size_t recalculate_all(Workbook& wb, const DependencyGraph& graph) {
    std::vector<std::uint32_t> all(graph.size());
    for (std::uint32_t p = 0; p < all.size(); ++p) all[p] = p;
    return run_positions(wb, graph, all);
}

Calculator::Calculator(Workbook& workbook) : workbook_(workbook), graph_(build_graph(workbook)) {
    rowcalc::recalculate_all(workbook_, graph_);
}

void Calculator::refresh() {
    if (graph_.structure_version() == workbook_.structure_version()) return;
    graph_ = build_graph(workbook_);
    plan_valid_ = false;
    rowcalc::recalculate_all(workbook_, graph_);
}

const DependencyGraph& Calculator::graph() {
    refresh();
    return graph_;
}

std::size_t Calculator::run(const std::vector<std::uint32_t>& plan) { return run_positions(workbook_, graph_, plan); }

std::size_t Calculator::recalculate(std::span<const CellKey> dirty) {
    refresh();
    if (!plan_valid_ || !std::equal(dirty.begin(), dirty.end(), plan_key_.begin(), plan_key_.end())) {
        plan_key_.assign(dirty.begin(), dirty.end());
        plan_ = graph_.affected(dirty);
        plan_valid_ = true;
    }
    return run(plan_);
}

std::size_t Calculator::recalculate(std::span<const CellRange> dirty) {
    const std::vector<CellKey> keys = keys_of(dirty);
    return recalculate(std::span<const CellKey>(keys));
}

std::size_t Calculator::recalculate_all() {
    refresh();
    return rowcalc::recalculate_all(workbook_, graph_);
}

std::vector<CellKey> Calculator::keys_of(std::span<const CellRange> ranges) const {
    std::vector<CellKey> keys;
    for (const CellRange& range : ranges) {
        const CellRange q = workbook_.qualified(range);
        const SheetId sheet = *workbook_.find_sheet(q.start.sheet);
        for (std::int32_t r = q.start.row; r <= q.end.row; ++r) {
            for (std::int32_t c = q.start.col; c <= q.end.col; ++c) keys.push_back({sheet, r, c});
        }
    }
    return keys;
}

}  // namespace rowcalc
