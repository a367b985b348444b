#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace jdmc {

/// Neumaier-compensated running sum.
class CompensatedSum {
public:
    void add(double x) noexcept;
    double value() const noexcept { return sum_ + compensation_; }

private:
    double sum_ = 0.0;
    double compensation_ = 0.0;
};

struct SampleSummary {
    std::size_t count = 0;
    double mean = 0.0;
    double variance = 0.0;  // unbiased
    double stderr_mean = 0.0;

    double sd() const noexcept;
};

/// Two-pass mean/variance with compensated sums; the result depends only on
/// the order of `values`, so filling them by index keeps it schedule-free.
SampleSummary summarize(std::span<const double> values);

/// Column summaries of a row-major (rows x cols) table.
std::vector<SampleSummary> summarize_columns(std::span<const double> table, std::size_t cols);

struct LineFit {
    double slope = 0.0;
    double intercept = 0.0;
};

/// Ordinary least squares y = intercept + slope * x.
LineFit fit_line(std::span<const double> x, std::span<const double> y);

}  // namespace jdmc
