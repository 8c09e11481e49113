// dsl.hpp — the constrained alpha expression language: AST, lexer/parser,
// canonical printer, complexity analysis, and seeded tree edits.
//
// Grammar (whitespace-insensitive):
//   expr    := additive
//   additive:= term (('+' | '-') term)*
//   term    := unary (('*' | '/') unary)*
//   unary   := '-' unary | primary
//   primary := NUMBER | COLUMN | '(' expr ')' | FUNC '(' args ')'
//   cond    := additive ('<' | '>') additive          (gate's first argument)
//
// Columns: open high low close volume.
// Unary functions: abs log1p sign tanh sqrt neg.
// Time-series (trailing window/lag n in [1, 252]): ts_mean ts_std ts_sum
//   ts_min ts_max ts_rank ts_corr(x,y,w) delay(x,n) delta(x,n).
// Cross-sectional: cs_rank cs_zscore. Conditional: gate(cond, then, else).
#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "alphamine/common.hpp"

namespace alphamine {

enum class Column { Open, High, Low, Close, Volume };

enum class Op {
    Constant,
    ColumnRef,
    Add,
    Sub,
    Mul,
    Div,
    Neg,
    Abs,
    Log1p,
    Sign,
    Tanh,
    Sqrt,
    TsMean,
    TsStd,
    TsSum,
    TsMin,
    TsMax,
    TsRank,
    TsCorr,
    Delay,
    Delta,
    CsRank,
    CsZscore,
    Gate,
    Less,
    Greater,
};

inline constexpr int kMinWindow = 1;
inline constexpr int kMaxWindow = 252;

struct Expr {
    Op op = Op::Constant;
    double constant = 0.0;       // Op::Constant
    Column column = Column::Open;  // Op::ColumnRef
    int window = 0;              // ts window / lag
    std::vector<Expr> children;

    bool operator==(const Expr& other) const;
};

const char* column_name(Column c);
const char* op_name(Op op);  // lowercase function name where one exists

struct ParseError : DataError {
    ParseError(const std::string& msg, std::size_t pos)
        : DataError(msg + " at position " + std::to_string(pos)), position(pos) {}
    std::size_t position;
};

struct ParseOptions {
    // Repair path: clamp out-of-range windows into [1, 252] instead of
    // rejecting them.
    bool clamp_windows = false;
};

Expr parse_expr(std::string_view text, const ParseOptions& opts = {});

// Canonical form: minimal parentheses, single spaces around binary operators,
// lowercase names. parse_expr(print_expr(e)) is structurally equal to e.
std::string print_expr(const Expr& expr);

struct ComplexityReport {
    int logical_steps = 0;  // time-series + cross-sectional + gate nodes
    int node_count = 0;
    int depth = 0;
    std::vector<std::string> redundancy_flags;
};

ComplexityReport complexity(const Expr& expr);

struct ComplexityCaps {
    int max_logical_steps = 5;
    int max_node_count = 64;
    int max_depth = 12;
};

// Empty iff the expression respects the caps, carries no redundant stacking,
// keeps all windows in range, and uses comparisons only as gate conditions.
std::vector<std::string> validate(const Expr& expr, const ComplexityCaps& caps = {});

// --- Seeded tree operations (grammar sampler and breeding edits) -----------

// Random expression within the caps; total on any seed.
Expr sample_expr(Rng& rng, const ComplexityCaps& caps = {});

// Single-node edit: operator swap within its arity class, window perturbation
// by +/-25%, or leaf column swap. Exactly one node differs from the input.
Expr mutate_expr(const Expr& expr, Rng& rng);

// Grafts a random subtree of `donor` onto a random site of `base`; retries a
// few grafts to satisfy the caps, otherwise returns the last attempt.
Expr crossover_expr(const Expr& base, const Expr& donor, Rng& rng,
                    const ComplexityCaps& caps = {});

}  // namespace alphamine
