#include "alphamine/panel.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace alphamine {

namespace {

std::vector<std::string> split_fields(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            out.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur += c;
        }
    }
    out.push_back(cur);
    return out;
}

double parse_cell(const std::string& field, std::size_t row, const char* what) {
    if (field.empty()) return missing();
    double v = 0.0;
    const char* first = field.data();
    const char* last = field.data() + field.size();
    auto res = std::from_chars(first, last, v);
    if (res.ec != std::errc{} || res.ptr != last)
        throw CsvError("row " + std::to_string(row) + ": unparseable " + what + " '" + field + "'");
    return v;
}

bool violates_bar_invariant(double o, double h, double l, double c, double v) {
    if (!is_missing(v) && v < 0.0) return true;
    for (double p : {o, h, l, c})
        if (!is_missing(p) && p <= 0.0) return true;
    if (is_missing(o) || is_missing(h) || is_missing(l) || is_missing(c)) return false;
    const double body_lo = std::min(o, c);
    const double body_hi = std::max(o, c);
    return !(l <= body_lo && body_hi <= h);
}

}  // namespace

std::optional<std::size_t> OhlcvPanel::date_index(const Date& d) const {
    auto it = std::lower_bound(dates.begin(), dates.end(), d);
    if (it == dates.end() || *it != d) return std::nullopt;
    return static_cast<std::size_t>(it - dates.begin());
}

OhlcvPanel load_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw CsvError("cannot open '" + path + "'");

    std::string line;
    if (!std::getline(in, line)) throw CsvError("empty file '" + path + "'");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != "date,ticker,open,high,low,close,volume")
        throw CsvError("malformed header: expected 'date,ticker,open,high,low,close,volume'");

    struct Row {
        Date date;
        std::string ticker;
        double o, h, l, c, v;
    };
    std::vector<Row> rows;
    std::vector<std::size_t> bad_rows;
    std::set<Date> date_set;
    std::set<std::string> ticker_set;
    std::set<std::pair<Date, std::string>> seen;

    std::size_t row_no = 1;  // header was row 1
    while (std::getline(in, line)) {
        ++row_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        auto f = split_fields(line);
        if (f.size() != 7)
            throw CsvError("row " + std::to_string(row_no) + ": expected 7 fields, got " +
                           std::to_string(f.size()));
        try {
            check_iso_date(f[0]);
        } catch (const DataError& e) {
            throw CsvError("row " + std::to_string(row_no) + ": " + e.what());
        }
        if (f[1].empty())
            throw CsvError("row " + std::to_string(row_no) + ": empty ticker");
        Row r{f[0], f[1],
              parse_cell(f[2], row_no, "open"), parse_cell(f[3], row_no, "high"),
              parse_cell(f[4], row_no, "low"), parse_cell(f[5], row_no, "close"),
              parse_cell(f[6], row_no, "volume")};
        if (!seen.insert({r.date, r.ticker}).second)
            throw CsvError("row " + std::to_string(row_no) + ": duplicate (date,ticker) " +
                           r.date + "," + r.ticker);
        if (violates_bar_invariant(r.o, r.h, r.l, r.c, r.v)) {
            bad_rows.push_back(row_no);
            continue;
        }
        date_set.insert(r.date);
        ticker_set.insert(r.ticker);
        rows.push_back(std::move(r));
    }
    if (!bad_rows.empty()) {
        std::ostringstream msg;
        msg << "price-ordering invariant violated at row";
        if (bad_rows.size() > 1) msg << "s";
        for (std::size_t i = 0; i < bad_rows.size(); ++i)
            msg << (i ? "," : "") << " " << bad_rows[i];
        throw CsvError(msg.str());
    }
    if (rows.empty()) throw CsvError("no data rows in '" + path + "'");

    OhlcvPanel panel;
    panel.dates.assign(date_set.begin(), date_set.end());
    panel.tickers.assign(ticker_set.begin(), ticker_set.end());
    const std::size_t nd = panel.dates.size();
    const std::size_t nt = panel.tickers.size();
    panel.open = panel.high = panel.low = panel.close = panel.volume = Matrix(nd, nt);

    std::map<std::string, std::size_t> tcol;
    for (std::size_t j = 0; j < nt; ++j) tcol[panel.tickers[j]] = j;
    for (const Row& r : rows) {
        const std::size_t i = *panel.date_index(r.date);
        const std::size_t j = tcol[r.ticker];
        panel.open.at(i, j) = r.o;
        panel.high.at(i, j) = r.h;
        panel.low.at(i, j) = r.l;
        panel.close.at(i, j) = r.c;
        panel.volume.at(i, j) = r.v;
    }
    return panel;
}

void write_csv(const OhlcvPanel& panel, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw CsvError("cannot write '" + path + "'");
    out << "date,ticker,open,high,low,close,volume\n";
    auto cell = [](double v) { return is_missing(v) ? std::string() : format_double(v); };
    for (std::size_t i = 0; i < panel.n_dates(); ++i) {
        for (std::size_t j = 0; j < panel.n_tickers(); ++j) {
            out << panel.dates[i] << ',' << panel.tickers[j] << ','
                << cell(panel.open.at(i, j)) << ',' << cell(panel.high.at(i, j)) << ','
                << cell(panel.low.at(i, j)) << ',' << cell(panel.close.at(i, j)) << ','
                << cell(panel.volume.at(i, j)) << '\n';
        }
    }
    if (!out) throw CsvError("write failed for '" + path + "'");
}

const char* planted_signal_text() {
    return "cs_rank(-(high - close) / (volume + 1e-9))";
}

OhlcvPanel synth_panel(std::uint64_t seed, int n_dates, int n_tickers, double signal_strength) {
    if (n_dates < 30 || n_tickers < 5)
        throw DataError("synth_panel needs n_dates >= 30 and n_tickers >= 5");
    if (!(signal_strength >= 0.0 && signal_strength <= 1.0))
        throw ConfigError("signal_strength must lie in [0, 1]");

    const std::size_t nd = static_cast<std::size_t>(n_dates);
    const std::size_t nt = static_cast<std::size_t>(n_tickers);
    Rng rng(mix_seed(seed, 0x5917a8e1ULL));

    OhlcvPanel panel;
    panel.dates.reserve(nd);
    Date d = "2016-01-04";
    for (std::size_t i = 0; i < nd; ++i) {
        panel.dates.push_back(d);
        d = next_weekday(d);
    }
    panel.tickers.reserve(nt);
    for (std::size_t j = 0; j < nt; ++j) {
        char buf[24];
        std::snprintf(buf, sizeof buf, "T%03u", static_cast<unsigned>(j));
        panel.tickers.emplace_back(buf);
    }
    panel.open = panel.high = panel.low = panel.close = panel.volume = Matrix(nd, nt);

    // Latent quality grid q_j in [0,1], shuffled so ticker order is unrelated.
    std::vector<double> q(nt);
    for (std::size_t j = 0; j < nt; ++j) q[j] = static_cast<double>(j) / static_cast<double>(nt - 1);
    for (std::size_t j = nt - 1; j > 0; --j)
        std::swap(q[j], q[rng.uniform_int(j + 1)]);

    const double idio_vol = 0.01;
    const double market_vol = 0.006;
    const double open_vol = 0.0005;
    // Drift per day chosen so the 10-day return's cross-sectional correlation
    // with the planted rank lands near signal_strength.
    const double rho = std::min(signal_strength, 0.985);
    const double beta = idio_vol * std::sqrt(1.2) * rho / std::sqrt(1.0 - rho * rho);

    std::vector<double> log_close(nt);
    for (std::size_t j = 0; j < nt; ++j)
        log_close[j] = std::log(20.0 + 80.0 * rng.uniform());

    for (std::size_t i = 0; i < nd; ++i) {
        const double market = market_vol * rng.normal();
        for (std::size_t j = 0; j < nt; ++j) {
            if (i > 0)
                log_close[j] += beta * (q[j] - 0.5) + idio_vol * rng.normal() + market;
            const double close = std::exp(log_close[j]);
            const double open = close * std::exp(open_vol * rng.normal());
            // Planted gap: the relative high-close distance shrinks with the
            // latent quality grid; volume scales with price so that the
            // (high - close) / volume ratio isolates it.
            const double gap = 0.05 * std::exp(-3.5 * q[j]) * (0.5 + 0.5 * rng.uniform());
            const double low_gap = 0.02 * (0.3 + 0.7 * rng.uniform());
            const double high = std::max(open, close) * (1.0 + gap);
            const double low = std::min(open, close) * (1.0 - low_gap);
            const double volume = 8e3 * close * std::exp(0.15 * rng.normal());
            panel.open.at(i, j) = open;
            panel.high.at(i, j) = high;
            panel.low.at(i, j) = low;
            panel.close.at(i, j) = close;
            panel.volume.at(i, j) = volume;
        }
    }
    return panel;
}

LabelMatrix forward_return(const OhlcvPanel& panel, int horizon) {
    if (horizon < 1) throw DataError("forward_return horizon must be >= 1");
    LabelMatrix labels;
    labels.dates = panel.dates;
    labels.tickers = panel.tickers;
    labels.horizon = horizon;
    const std::size_t nd = panel.n_dates();
    const std::size_t nt = panel.n_tickers();
    labels.values = Matrix(nd, nt);
    const std::size_t h = static_cast<std::size_t>(horizon);
    for (std::size_t t = 0; t + h + 1 < nd; ++t) {
        for (std::size_t j = 0; j < nt; ++j) {
            const double entry = panel.open.at(t + 1, j);
            const double exit = panel.open.at(t + 1 + h, j);
            if (is_missing(entry) || is_missing(exit)) continue;
            labels.values.at(t, j) = exit / entry - 1.0;
        }
    }
    return labels;
}

OhlcvPanel prefix(const OhlcvPanel& panel, const Date& cutoff) {
    if (panel.dates.empty()) throw DataError("prefix of empty panel");
    if (cutoff < panel.dates.front() || cutoff > panel.dates.back())
        throw DataError("cutoff " + cutoff + " outside panel range [" + panel.dates.front() +
                        ", " + panel.dates.back() + "]");
    auto it = std::upper_bound(panel.dates.begin(), panel.dates.end(), cutoff);
    const std::size_t nd = static_cast<std::size_t>(it - panel.dates.begin());
    const std::size_t nt = panel.n_tickers();

    OhlcvPanel out;
    out.dates.assign(panel.dates.begin(), panel.dates.begin() + static_cast<long>(nd));
    out.tickers = panel.tickers;
    auto slice = [&](const Matrix& m) {
        Matrix s(nd, nt);
        for (std::size_t i = 0; i < nd; ++i)
            for (std::size_t j = 0; j < nt; ++j) s.at(i, j) = m.at(i, j);
        return s;
    };
    out.open = slice(panel.open);
    out.high = slice(panel.high);
    out.low = slice(panel.low);
    out.close = slice(panel.close);
    out.volume = slice(panel.volume);
    return out;
}

}  // namespace alphamine
