#include "alphamine/eval.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace alphamine {

namespace {

using Cellwise = double (*)(double, double);

Matrix zip(const Matrix& a, const Matrix& b, Cellwise fn) {
    Matrix out(a.rows(), a.cols());
    for (std::size_t i = 0; i < a.data().size(); ++i) {
        const double x = a.data()[i];
        const double y = b.data()[i];
        if (is_missing(x) || is_missing(y)) continue;
        out.data()[i] = fn(x, y);
    }
    return out;
}

Matrix map_cells(const Matrix& a, double (*fn)(double)) {
    Matrix out(a.rows(), a.cols());
    for (std::size_t i = 0; i < a.data().size(); ++i) {
        const double x = a.data()[i];
        if (is_missing(x)) continue;
        out.data()[i] = fn(x);
    }
    return out;
}

int required_fill(int window, double fill) {
    const int need = static_cast<int>(std::ceil(fill * window - 1e-12));
    return std::max(1, need);
}

struct Evaluator {
    const OhlcvPanel& panel;
    const EvalOptions& opts;

    Matrix eval(const Expr& e) const {
        switch (e.op) {
            case Op::Constant: {
                Matrix m(panel.n_dates(), panel.n_tickers(), e.constant);
                return m;
            }
            case Op::ColumnRef:
                switch (e.column) {
                    case Column::Open: return panel.open;
                    case Column::High: return panel.high;
                    case Column::Low: return panel.low;
                    case Column::Close: return panel.close;
                    case Column::Volume: return panel.volume;
                }
                return {};
            case Op::Add:
                return zip(eval(e.children[0]), eval(e.children[1]),
                           [](double a, double b) { return a + b; });
            case Op::Sub:
                return zip(eval(e.children[0]), eval(e.children[1]),
                           [](double a, double b) { return a - b; });
            case Op::Mul:
                return zip(eval(e.children[0]), eval(e.children[1]),
                           [](double a, double b) { return a * b; });
            case Op::Div: {
                const Matrix a = eval(e.children[0]);
                const Matrix b = eval(e.children[1]);
                Matrix out(a.rows(), a.cols());
                for (std::size_t i = 0; i < a.data().size(); ++i) {
                    const double x = a.data()[i];
                    const double y = b.data()[i];
                    if (is_missing(x) || is_missing(y)) continue;
                    out.data()[i] = x * y / (y * y + opts.epsilon);
                }
                return out;
            }
            case Op::Neg:
                return map_cells(eval(e.children[0]), [](double v) { return -v; });
            case Op::Abs:
                return map_cells(eval(e.children[0]), [](double v) { return std::fabs(v); });
            case Op::Tanh:
                return map_cells(eval(e.children[0]), [](double v) { return std::tanh(v); });
            case Op::Sign:
                return map_cells(eval(e.children[0]),
                                 [](double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); });
            case Op::Log1p:
                return map_cells(eval(e.children[0]),
                                 [](double v) { return v > -1.0 ? std::log1p(v) : missing(); });
            case Op::Sqrt:
                return map_cells(eval(e.children[0]),
                                 [](double v) { return v >= 0.0 ? std::sqrt(v) : missing(); });
            case Op::TsMean: case Op::TsStd: case Op::TsSum:
            case Op::TsMin: case Op::TsMax: case Op::TsRank:
                return rolling(eval(e.children[0]), e.op, e.window);
            case Op::TsCorr:
                return rolling_corr(eval(e.children[0]), eval(e.children[1]), e.window);
            case Op::Delay:
                return delayed(eval(e.children[0]), e.window);
            case Op::Delta: {
                const Matrix x = eval(e.children[0]);
                return zip(x, delayed(x, e.window), [](double a, double b) { return a - b; });
            }
            case Op::CsRank:
                return cross_rank(eval(e.children[0]));
            case Op::CsZscore:
                return cross_zscore(eval(e.children[0]));
            case Op::Gate: {
                const Expr& cmp = e.children[0];
                const Matrix lhs = eval(cmp.children[0]);
                const Matrix rhs = eval(cmp.children[1]);
                const Matrix then_arm = eval(e.children[1]);
                const Matrix else_arm = eval(e.children[2]);
                Matrix out(lhs.rows(), lhs.cols());
                const bool less = cmp.op == Op::Less;
                for (std::size_t i = 0; i < lhs.data().size(); ++i) {
                    const double a = lhs.data()[i];
                    const double b = rhs.data()[i];
                    if (is_missing(a) || is_missing(b)) continue;
                    const bool cond = less ? a < b : a > b;
                    out.data()[i] = cond ? then_arm.data()[i] : else_arm.data()[i];
                }
                return out;
            }
            case Op::Less: case Op::Greater:
                throw EvalError("comparison outside gate condition");
        }
        throw EvalError("unhandled expression node");
    }

    Matrix delayed(const Matrix& x, int lag) const {
        Matrix out(x.rows(), x.cols());
        for (std::size_t t = static_cast<std::size_t>(lag); t < x.rows(); ++t)
            for (std::size_t j = 0; j < x.cols(); ++j)
                out.at(t, j) = x.at(t - static_cast<std::size_t>(lag), j);
        return out;
    }

    Matrix rolling(const Matrix& x, Op op, int window) const {
        Matrix out(x.rows(), x.cols());
        const std::size_t w = static_cast<std::size_t>(window);
        const int need = required_fill(window, opts.min_window_fill);
        std::vector<double> buf;
        buf.reserve(w);
        for (std::size_t j = 0; j < x.cols(); ++j) {
            for (std::size_t t = w - 1; t < x.rows(); ++t) {
                buf.clear();
                for (std::size_t k = t + 1 - w; k <= t; ++k) {
                    const double v = x.at(k, j);
                    if (!is_missing(v)) buf.push_back(v);
                }
                if (static_cast<int>(buf.size()) < need) continue;
                out.at(t, j) = rolling_value(buf, op, x.at(t, j));
            }
        }
        return out;
    }

    static double rolling_value(const std::vector<double>& buf, Op op, double current) {
        switch (op) {
            case Op::TsMean: return mean_of(buf);
            case Op::TsSum: {
                double s = 0.0;
                for (double v : buf) s += v;
                return s;
            }
            case Op::TsMin: return *std::min_element(buf.begin(), buf.end());
            case Op::TsMax: return *std::max_element(buf.begin(), buf.end());
            case Op::TsStd: return sample_std(buf);
            case Op::TsRank: {
                if (is_missing(current) || buf.size() < 2) return missing();
                // Rank of today's value within the trailing window, in [0,1].
                double below = 0.0, equal = 0.0;
                for (double v : buf) {
                    if (v < current) ++below;
                    else if (v == current) ++equal;
                }
                const double rank = below + 0.5 * (equal + 1.0);
                return (rank - 1.0) / (static_cast<double>(buf.size()) - 1.0);
            }
            default: return missing();
        }
    }

    Matrix rolling_corr(const Matrix& x, const Matrix& y, int window) const {
        Matrix out(x.rows(), x.cols());
        const std::size_t w = static_cast<std::size_t>(window);
        const int need = required_fill(window, opts.min_window_fill);
        std::vector<double> bx, by;
        bx.reserve(w);
        by.reserve(w);
        for (std::size_t j = 0; j < x.cols(); ++j) {
            for (std::size_t t = w - 1; t < x.rows(); ++t) {
                bx.clear();
                by.clear();
                for (std::size_t k = t + 1 - w; k <= t; ++k) {
                    const double a = x.at(k, j);
                    const double b = y.at(k, j);
                    if (is_missing(a) || is_missing(b)) continue;
                    bx.push_back(a);
                    by.push_back(b);
                }
                if (static_cast<int>(bx.size()) < need) continue;
                out.at(t, j) = pearson(bx, by);
            }
        }
        return out;
    }
};

}  // namespace

Matrix cross_rank(const Matrix& m) {
    Matrix out(m.rows(), m.cols());
    std::vector<double> vals;
    std::vector<std::size_t> cols;
    for (std::size_t t = 0; t < m.rows(); ++t) {
        vals.clear();
        cols.clear();
        for (std::size_t j = 0; j < m.cols(); ++j) {
            const double v = m.at(t, j);
            if (!is_missing(v)) {
                vals.push_back(v);
                cols.push_back(j);
            }
        }
        if (vals.size() < 2) continue;
        const std::vector<double> ranks = average_ranks(vals);
        const double denom = static_cast<double>(vals.size()) - 1.0;
        for (std::size_t k = 0; k < cols.size(); ++k)
            out.at(t, cols[k]) = (ranks[k] - 1.0) / denom;
    }
    return out;
}

Matrix cross_zscore(const Matrix& m) {
    Matrix out(m.rows(), m.cols());
    std::vector<double> vals;
    std::vector<std::size_t> cols;
    for (std::size_t t = 0; t < m.rows(); ++t) {
        vals.clear();
        cols.clear();
        for (std::size_t j = 0; j < m.cols(); ++j) {
            const double v = m.at(t, j);
            if (!is_missing(v)) {
                vals.push_back(v);
                cols.push_back(j);
            }
        }
        if (vals.size() < 2) continue;
        const double mu = mean_of(vals);
        const double sd = sample_std(vals);
        if (is_missing(sd) || sd == 0.0) continue;
        for (std::size_t k = 0; k < cols.size(); ++k)
            out.at(t, cols[k]) = (vals[k] - mu) / sd;
    }
    return out;
}

FactorMatrix evaluate(const Expr& expr, const OhlcvPanel& panel, const EvalOptions& opts) {
    const auto violations = validate(expr);
    if (!violations.empty())
        throw EvalError("expression rejected: " + violations.front());
    Evaluator ev{panel, opts};
    FactorMatrix out;
    out.dates = panel.dates;
    out.tickers = panel.tickers;
    out.values = ev.eval(expr);
    return out;
}

double nan_ratio(const FactorMatrix& factor) {
    if (factor.values.size() == 0) throw EvalError("nan_ratio of empty matrix");
    std::size_t miss = 0;
    for (double v : factor.values.data())
        if (is_missing(v)) ++miss;
    return static_cast<double>(miss) / static_cast<double>(factor.values.size());
}

namespace {

bool cells_equal(double a, double b) {
    if (is_missing(a) && is_missing(b)) return true;
    return a == b;
}

// True when fn(expr) agrees bit-exactly on prefix vs restriction; on failure
// fills row/col of the first differing cell.
bool prefix_agrees(const Expr& expr, const OhlcvPanel& full, const OhlcvPanel& pre,
                   const EvalOptions& opts, const EvalFn& fn, std::size_t& row, std::size_t& col) {
    const Matrix a = fn(expr, pre, opts).values;
    const Matrix b = fn(expr, full, opts).values;
    for (std::size_t t = 0; t < a.rows(); ++t) {
        for (std::size_t j = 0; j < a.cols(); ++j) {
            if (!cells_equal(a.at(t, j), b.at(t, j))) {
                row = t;
                col = j;
                return false;
            }
        }
    }
    return true;
}

// Deepest subterm that still disagrees between prefix and full evaluation.
// Comparison nodes are transparent: their operands are checked directly.
const Expr* blame(const Expr& expr, const OhlcvPanel& full, const OhlcvPanel& pre,
                  const EvalOptions& opts, const EvalFn& fn) {
    std::size_t r, c;
    for (const Expr& child : expr.children) {
        if (child.op == Op::Less || child.op == Op::Greater) {
            for (const Expr& operand : child.children)
                if (!prefix_agrees(operand, full, pre, opts, fn, r, c))
                    return blame(operand, full, pre, opts, fn);
            continue;
        }
        if (!prefix_agrees(child, full, pre, opts, fn, r, c)) return blame(child, full, pre, opts, fn);
    }
    return &expr;
}

}  // namespace

CausalityReport causality_check(const Expr& expr, const OhlcvPanel& panel, int probe_count,
                                std::uint64_t seed, const EvalOptions& opts, const EvalFn& fn) {
    if (panel.n_dates() < 3) throw EvalError("causality_check needs at least 3 dates");
    const EvalFn eval_fn = fn ? fn : [](const Expr& e, const OhlcvPanel& p, const EvalOptions& o) {
        return evaluate(e, p, o);
    };
    CausalityReport report;
    Rng rng(mix_seed(seed, 0xca05a117ULL));
    for (int probe = 0; probe < probe_count; ++probe) {
        const std::size_t cut = rng.uniform_int(panel.n_dates());
        const OhlcvPanel pre = prefix(panel, panel.dates[cut]);
        std::size_t row = 0, col = 0;
        if (prefix_agrees(expr, panel, pre, opts, eval_fn, row, col)) continue;
        report.passed = false;
        report.cutoff = panel.dates[cut];
        report.date = pre.dates[row];
        report.ticker = pre.tickers[col];
        report.subterm = print_expr(*blame(expr, panel, pre, opts, eval_fn));
        return report;
    }
    return report;
}

}  // namespace alphamine
