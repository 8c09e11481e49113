// panel.hpp — OHLCV panel data model, CSV ingestion, forward-return labels,
// and a synthetic generator with a planted cross-sectional signal.
#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "alphamine/common.hpp"

namespace alphamine {

// Daily bars on a dates x tickers grid. Dates are strictly increasing and
// unique; wherever all four prices are present,
// low <= min(open, close) <= max(open, close) <= high, and volume >= 0.
struct OhlcvPanel {
    std::vector<Date> dates;
    std::vector<std::string> tickers;
    Matrix open, high, low, close, volume;

    std::size_t n_dates() const { return dates.size(); }
    std::size_t n_tickers() const { return tickers.size(); }
    std::optional<std::size_t> date_index(const Date& d) const;
};

// Per-(date,ticker) factor values on the axes of the panel they came from.
struct FactorMatrix {
    std::vector<Date> dates;
    std::vector<std::string> tickers;
    Matrix values;
};

// Forward returns: value at (t, i) is the open-to-open return entered at the
// open of t+1 and exited at the open of t+1+horizon. The last horizon+1 rows
// are always missing.
struct LabelMatrix {
    std::vector<Date> dates;
    std::vector<std::string> tickers;
    Matrix values;
    int horizon = 0;
};

struct CsvError : DataError {
    using DataError::DataError;
};

// Expected header: date,ticker,open,high,low,close,volume. Empty field =
// missing, dates YYYY-MM-DD. Rows violating the price-ordering invariant
// (or negative volume / non-positive price) fail the load with their row
// numbers in the message. Dates are sorted ascending, tickers lexicographic.
OhlcvPanel load_csv(const std::string& path);

// Writes the panel in the exact format load_csv reads.
void write_csv(const OhlcvPanel& panel, const std::string& path);

// Deterministic random-walk panel whose forward 10-day open-to-open returns
// are cross-sectionally correlated (strength in [0,1]) with the planted
// signal cs_rank(-(high - close) / (volume + 1e-9)).
// Requires n_dates >= 30, n_tickers >= 5.
OhlcvPanel synth_panel(std::uint64_t seed, int n_dates, int n_tickers, double signal_strength);

// DSL text of the signal synth_panel plants.
const char* planted_signal_text();

// label(t, i) = open(t+1+horizon, i) / open(t+1, i) - 1; missing when either
// open is missing or out of range. horizon >= 1.
LabelMatrix forward_return(const OhlcvPanel& panel, int horizon);

// Panel restricted to dates <= cutoff. Throws when cutoff is outside the
// panel's date range.
OhlcvPanel prefix(const OhlcvPanel& panel, const Date& cutoff);

}  // namespace alphamine
