#include "alphamine/fitness.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace alphamine {

namespace {

void check_axes(const FactorMatrix& factor, const LabelMatrix& labels) {
    if (factor.dates != labels.dates || factor.tickers != labels.tickers)
        throw MetricError("factor and label axes differ");
}

MetricSeries correlation_series(const FactorMatrix& factor, const LabelMatrix& labels,
                                bool use_ranks) {
    check_axes(factor, labels);
    MetricSeries series;
    std::vector<double> f, r;
    std::vector<double> values;
    for (std::size_t t = 0; t < factor.values.rows(); ++t) {
        f.clear();
        r.clear();
        for (std::size_t j = 0; j < factor.values.cols(); ++j) {
            const double fv = factor.values.at(t, j);
            const double rv = labels.values.at(t, j);
            if (is_missing(fv) || is_missing(rv)) continue;
            f.push_back(fv);
            r.push_back(rv);
        }
        if (f.size() < 3) continue;
        double corr;
        if (use_ranks) {
            const std::vector<double> fr = average_ranks(f);
            const std::vector<double> rr = average_ranks(r);
            corr = pearson(fr, rr);
        } else {
            corr = pearson(f, r);
        }
        if (is_missing(corr)) continue;  // zero variance on this date
        series.per_date.emplace_back(factor.dates[t], corr);
        values.push_back(corr);
    }
    if (values.empty())
        throw MetricError(use_ranks ? "rank_ic: no valid dates" : "ic: no valid dates");
    series.valid_dates = values.size();
    series.mean = mean_of(values);
    series.stdev = sample_std(values);
    return series;
}

double series_information_ratio(const MetricSeries& series, const char* what) {
    if (series.valid_dates < 2)
        throw MetricError(std::string(what) + ": needs at least 2 dates");
    if (is_missing(series.stdev) || series.stdev == 0.0)
        throw MetricError(std::string(what) + ": zero standard deviation");
    return series.mean / series.stdev;
}

// Equal-frequency bin index per observation: stable sort by (value, index),
// then split the order into `bins` contiguous runs.
std::vector<int> equal_frequency_bins(const std::vector<double>& values, int bins) {
    const std::size_t n = values.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
    std::vector<int> bin(n, 0);
    for (std::size_t pos = 0; pos < n; ++pos)
        bin[order[pos]] = static_cast<int>(pos * static_cast<std::size_t>(bins) / n);
    return bin;
}

double percentile_threshold(const std::vector<FitnessReport>& cohort, double pct,
                            double FitnessReport::*metric) {
    std::vector<double> values;
    values.reserve(cohort.size());
    for (const FitnessReport& r : cohort) values.push_back(r.*metric);
    return percentile(std::move(values), pct);
}

bool meets(const FitnessReport& report, const std::vector<FitnessReport>& cohort, double pct,
           const MetricFloors& floors) {
    struct Entry {
        double FitnessReport::*metric;
        double MetricFloors::*floor;
    };
    static const Entry entries[] = {
        {&FitnessReport::ic, &MetricFloors::ic},
        {&FitnessReport::rank_ic, &MetricFloors::rank_ic},
        {&FitnessReport::icir, &MetricFloors::icir},
        {&FitnessReport::rank_icir, &MetricFloors::rank_icir},
        {&FitnessReport::mi, &MetricFloors::mi},
    };
    for (const Entry& e : entries) {
        const double value = report.*(e.metric);
        if (value < floors.*(e.floor)) return false;
        if (value < percentile_threshold(cohort, pct, e.metric)) return false;
    }
    return true;
}

}  // namespace

MetricSeries ic_series(const FactorMatrix& factor, const LabelMatrix& labels) {
    return correlation_series(factor, labels, false);
}

MetricSeries rank_ic_series(const FactorMatrix& factor, const LabelMatrix& labels) {
    return correlation_series(factor, labels, true);
}

double icir(const MetricSeries& series) { return series_information_ratio(series, "icir"); }

double rank_icir(const MetricSeries& series) {
    return series_information_ratio(series, "rank_icir");
}

double mutual_info(const FactorMatrix& factor, const LabelMatrix& labels, int bins) {
    if (bins < 2) throw MetricError("mutual_info: bins must be >= 2");
    check_axes(factor, labels);
    std::vector<double> f, r;
    for (std::size_t i = 0; i < factor.values.size(); ++i) {
        const double fv = factor.values.data()[i];
        const double rv = labels.values.data()[i];
        if (is_missing(fv) || is_missing(rv)) continue;
        f.push_back(fv);
        r.push_back(rv);
    }
    const std::size_t n = f.size();
    const std::size_t need = static_cast<std::size_t>(bins) * static_cast<std::size_t>(bins);
    if (n < need)
        throw MetricError("mutual_info: " + std::to_string(n) + " pairs < bins^2 = " +
                          std::to_string(need));

    const std::vector<int> fb = equal_frequency_bins(f, bins);
    const std::vector<int> rb = equal_frequency_bins(r, bins);
    std::vector<double> joint(need, 0.0);
    std::vector<double> fm(bins, 0.0), rm(bins, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        joint[static_cast<std::size_t>(fb[i]) * bins + rb[i]] += 1.0;
        fm[fb[i]] += 1.0;
        rm[rb[i]] += 1.0;
    }
    const double total = static_cast<double>(n);
    double mi = 0.0;
    for (int a = 0; a < bins; ++a) {
        for (int b = 0; b < bins; ++b) {
            const double c = joint[static_cast<std::size_t>(a) * bins + b];
            if (c <= 0.0) continue;
            mi += (c / total) * std::log2(c * total / (fm[a] * rm[b]));
        }
    }
    return std::max(0.0, mi);
}

void ThresholdConfig::check() const {
    if (!(elite_percentile > qualified_percentile))
        throw ConfigError("elite_percentile must exceed qualified_percentile");
    if (elite_floors.ic < qualified_floors.ic || elite_floors.rank_ic < qualified_floors.rank_ic ||
        elite_floors.icir < qualified_floors.icir ||
        elite_floors.rank_icir < qualified_floors.rank_icir ||
        elite_floors.mi < qualified_floors.mi)
        throw ConfigError("elite floors must be >= qualified floors");
    if (qualified_percentile < 0.0 || elite_percentile > 100.0)
        throw ConfigError("percentiles must lie in [0, 100]");
}

Classification classify(const FitnessReport& report, const std::vector<FitnessReport>& cohort,
                        const ThresholdConfig& config) {
    if (cohort.empty()) throw MetricError("classify: empty cohort");
    config.check();
    if (meets(report, cohort, config.elite_percentile, config.elite_floors))
        return Classification::Elite;
    if (meets(report, cohort, config.qualified_percentile, config.qualified_floors))
        return Classification::Qualified;
    return Classification::None;
}

}  // namespace alphamine
