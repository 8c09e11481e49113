// common.hpp — shared primitives: missing-value convention, matrices,
// calendar dates, deterministic RNG, small stats helpers.
#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace alphamine {

// ---------------------------------------------------------------------------
// Errors. The CLI maps these onto exit codes, so every throwing path in the
// library uses one of the subtypes below.
// ---------------------------------------------------------------------------

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Bad input data: CSV contents, misaligned matrices, degenerate series.
struct DataError : Error {
    using Error::Error;
};

// Bad configuration or usage.
struct ConfigError : Error {
    using Error::Error;
};

// LLM transport failure after retries.
struct BackendError : Error {
    using Error::Error;
};

// ---------------------------------------------------------------------------
// Missing values. A cell is either a finite observation or missing; missing
// is represented by quiet NaN and only ever tested through is_missing().
// ---------------------------------------------------------------------------

inline double missing() { return std::numeric_limits<double>::quiet_NaN(); }
inline bool is_missing(double v) { return std::isnan(v); }

// ---------------------------------------------------------------------------
// Dense row-major matrix, rows = dates, cols = tickers.
// ---------------------------------------------------------------------------

class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, double fill = missing())
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    std::size_t size() const { return data_.size(); }

    double& at(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
    double at(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

    std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
    std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }

    std::vector<double>& data() { return data_; }
    const std::vector<double>& data() const { return data_; }

    bool same_shape(const Matrix& other) const {
        return rows_ == other.rows_ && cols_ == other.cols_;
    }

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

// ---------------------------------------------------------------------------
// Calendar dates as ISO-8601 strings (lexicographic order == calendar order).
// ---------------------------------------------------------------------------

using Date = std::string;

// Throws DataError unless `text` is a valid YYYY-MM-DD calendar date.
void check_iso_date(const std::string& text);

// Days since 1970-01-01 for a valid ISO date, and back.
long date_to_days(const Date& date);
Date days_to_date(long days);

// The next Mon-Fri date strictly after `date`.
Date next_weekday(const Date& date);

// ---------------------------------------------------------------------------
// Deterministic RNG. Gaussian draws are hand-rolled (Box-Muller, cosine
// branch only) so sequences do not depend on the standard library build.
// ---------------------------------------------------------------------------

class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    // splitmix64 step; full 64-bit output.
    std::uint64_t next_u64();

    // Uniform on [0, 1).
    double uniform();

    // Uniform integer on [0, n); n must be positive.
    std::uint64_t uniform_int(std::uint64_t n);

    // Standard normal.
    double normal();

private:
    std::uint64_t state_;
};

// Stable 64-bit content hash, used to derive sub-seeds from text.
std::uint64_t fnv1a64(std::string_view text);

// Combine two seeds into an independent stream seed.
std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b);

// ---------------------------------------------------------------------------
// Small statistics helpers shared by eval / fitness / backtest.
// ---------------------------------------------------------------------------

// Average-tie ranks, 1-based: values (3, 1, 3) -> (2.5, 1, 2.5).
std::vector<double> average_ranks(std::span<const double> values);

// Pearson correlation; missing() when fewer than 2 points or zero variance.
double pearson(std::span<const double> x, std::span<const double> y);

double mean_of(std::span<const double> values);

// Sample standard deviation (n-1 denominator); missing() when n < 2.
double sample_std(std::span<const double> values);

// Percentile by linear interpolation on sorted values, `pct` in [0, 100].
double percentile(std::vector<double> values, double pct);

// Canonical shortest-round-trip formatting for doubles ("0.1", "1e-9", "3").
std::string format_double(double v);

// Run fn(i) for i in [0, n) on up to `threads` workers; fn must be safe to
// call concurrently on distinct indices. threads <= 1 runs inline.
void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t)>& fn);

}  // namespace alphamine
