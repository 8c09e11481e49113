// fitness.hpp — the five predictive-power metrics (IC, ICIR, RankIC,
// RankICIR, MI) and cohort-percentile classification of candidates.
#pragma once

#include <utility>
#include <vector>

#include "alphamine/panel.hpp"

namespace alphamine {

struct MetricError : DataError {
    using DataError::DataError;
};

// Per-date correlation series plus its summary moments.
struct MetricSeries {
    std::vector<std::pair<Date, double>> per_date;
    double mean = 0.0;
    double stdev = 0.0;  // sample, T-1 denominator; missing() when T < 2
    std::size_t valid_dates = 0;
};

// Per date, Pearson correlation across assets with both factor and label
// present. Dates with fewer than 3 valid pairs or zero variance in either
// vector are skipped. Errors when no date survives.
MetricSeries ic_series(const FactorMatrix& factor, const LabelMatrix& labels);

// Spearman analog: Pearson on average-tie ranks, same skip rules.
MetricSeries rank_ic_series(const FactorMatrix& factor, const LabelMatrix& labels);

// mean / sample std of the series; errors when T < 2 or std == 0.
double icir(const MetricSeries& series);
double rank_icir(const MetricSeries& series);

// Plug-in mutual information in bits over the pooled (factor, label) pairs,
// each margin discretized into `bins` equal-frequency bins (ties broken by
// stable index order). Requires bins >= 2 and at least bins^2 valid pairs.
double mutual_info(const FactorMatrix& factor, const LabelMatrix& labels, int bins = 16);

enum class Classification { None, Qualified, Elite };

struct FitnessReport {
    double ic = 0.0;
    double icir = 0.0;
    double rank_ic = 0.0;
    double rank_icir = 0.0;
    double mi = 0.0;
    double nan_ratio = 0.0;
    Classification classification = Classification::None;
};

struct MetricFloors {
    double ic = 0.0;
    double rank_ic = 0.0;
    double icir = 0.0;
    double rank_icir = 0.0;
    double mi = 0.0;
};

struct ThresholdConfig {
    double qualified_percentile = 65.0;
    double elite_percentile = 80.0;
    MetricFloors qualified_floors{0.005, 0.005, 0.05, 0.05, 0.02};
    MetricFloors elite_floors{0.01, 0.01, 0.1, 0.1, 0.02};

    void check() const;  // throws ConfigError on invariant violations
};

// Qualified iff every metric is >= both the cohort's qualified-percentile
// value (linear interpolation) and the qualified floor; Elite analogously at
// the elite percentile/floors. Errors on an empty cohort.
Classification classify(const FitnessReport& report, const std::vector<FitnessReport>& cohort,
                        const ThresholdConfig& config);

}  // namespace alphamine
