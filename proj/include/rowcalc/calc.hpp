#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "rowcalc/errors.hpp"
#include "rowcalc/functions.hpp"
#include "rowcalc/workbook.hpp"

namespace rowcalc {

class CycleError : public ConfigError {
public:
    explicit CycleError(std::vector<CellAddress> cycle);
    std::vector<CellAddress> cells;  // one cycle, in dependency order
};

// Formula cells ordered so that every cell comes after everything it reads.
// Edges come from extract_references with names resolved and ranges
// expanded to member cells. Built once per workbook structure and reused for
// every recalculation.
class DependencyGraph {
public:
    std::size_t size() const { return order_.size(); }
    bool empty() const { return order_.empty(); }

    // Formula cells in evaluation order.
    const std::vector<CellKey>& order() const { return order_; }

    // Position of a formula cell in order(), if it is one.
    std::optional<std::size_t> position(const CellKey& key) const;

    // Every formula cell downstream of `dirty` (including dirty formula cells
    // themselves), as positions into order(), ascending.
    std::vector<std::uint32_t> affected(std::span<const CellKey> dirty) const;

    std::uint64_t structure_version() const { return version_; }

private:
    friend DependencyGraph build_graph(const Workbook& workbook);

    struct WideReader {
        SheetId sheet;
        CellRange range;  // rows/cols only; sheet held separately
        std::uint32_t reader;
    };

    std::vector<CellKey> order_;
    std::vector<std::vector<std::uint32_t>> dependents_;  // position -> positions reading it
    std::unordered_map<CellKey, std::uint32_t, CellKeyHash> position_;
    std::unordered_map<CellKey, std::vector<std::uint32_t>, CellKeyHash> readers_;  // non-formula cell -> readers
    std::vector<WideReader> wide_readers_;
    std::uint64_t version_ = 0;
};

// Throws CycleError or UnknownName.
DependencyGraph build_graph(const Workbook& workbook);

struct EvalContext {
    const Workbook& workbook;
    SheetId sheet = 0;  // sheet of the formula being evaluated
    const FunctionRegistry& functions = FunctionRegistry::builtin();
};

// Never throws for formula-level problems: they surface as Error values.
CellValue evaluate(const FormulaAst& ast, const EvalContext& context);

// Re-evaluates every formula cell reachable from `dirty`, once each, in
// dependency order. Returns the number of cells evaluated.
std::size_t recalculate(Workbook& workbook, const DependencyGraph& graph, std::span<const CellKey> dirty);
std::size_t recalculate_all(Workbook& workbook, const DependencyGraph& graph);

// Owns the graph for one workbook, rebuilding it when the workbook's
// structure changes, and memoises the evaluation plan of the last dirty set
// (the streaming loop recalculates the same input cells for every record).
class Calculator {
public:
    // Builds the graph and runs a full calculation.
    explicit Calculator(Workbook& workbook);

    Workbook& workbook() { return workbook_; }
    const DependencyGraph& graph();

    std::size_t recalculate(std::span<const CellKey> dirty);
    std::size_t recalculate(std::span<const CellRange> dirty);
    std::size_t recalculate_all();

    std::vector<CellKey> keys_of(std::span<const CellRange> ranges) const;

private:
    void refresh();
    std::size_t run(const std::vector<std::uint32_t>& plan);

    Workbook& workbook_;
    DependencyGraph graph_;
    std::vector<CellKey> plan_key_;
    std::vector<std::uint32_t> plan_;
    bool plan_valid_ = false;
};

}  // namespace rowcalc
