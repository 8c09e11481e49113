// eval.hpp — vectorized evaluation of DSL expressions over OHLCV panels,
// missing-data policy, and the prefix-consistency (information leakage) check.
#pragma once

#include <functional>

#include "alphamine/dsl.hpp"
#include "alphamine/panel.hpp"

namespace alphamine {

struct EvalOptions {
    double epsilon = 1e-12;       // guarded-division regularizer
    double min_window_fill = 1.0;  // fraction of a rolling window that must be present
};

struct EvalError : DataError {
    using DataError::DataError;
};

// Per-(date,ticker) evaluation. Time-series operators use a trailing window
// ending at the current row inclusive and emit missing until the window is
// full; division a/b is computed as a*b/(b^2 + epsilon); any operation on
// missing yields missing. Refuses expressions that fail validate().
FactorMatrix evaluate(const Expr& expr, const OhlcvPanel& panel, const EvalOptions& opts = {});

// Missing cells / total cells. Errors on an empty matrix.
double nan_ratio(const FactorMatrix& factor);

// Cross-sectional kernels, exposed for score combination: per-row rank in
// [0,1] with average ties (missing when fewer than 2 present), and per-row
// (x - mean) / sample std (missing when std is 0).
Matrix cross_rank(const Matrix& m);
Matrix cross_zscore(const Matrix& m);

using EvalFn = std::function<FactorMatrix(const Expr&, const OhlcvPanel&, const EvalOptions&)>;

struct CausalityReport {
    bool passed = true;
    Date cutoff;          // first failing cutoff
    Date date;            // first differing cell
    std::string ticker;
    std::string subterm;  // printed form of the deepest differing subterm
};

// Evaluates the expression on `probe_count` random prefixes of the panel and
// requires bit-exact agreement with the full evaluation restricted to the
// prefix. `fn` defaults to evaluate(); tests inject broken variants.
CausalityReport causality_check(const Expr& expr, const OhlcvPanel& panel, int probe_count,
                                std::uint64_t seed, const EvalOptions& opts = {},
                                const EvalFn& fn = {});

}  // namespace alphamine
