#include "jdmc/stats.hpp"

#include <cmath>
#include <stdexcept>

namespace jdmc {

void CompensatedSum::add(double x) noexcept {
    const double t = sum_ + x;
    if (std::fabs(sum_) >= std::fabs(x)) {
        compensation_ += (sum_ - t) + x;
    } else {
        compensation_ += (x - t) + sum_;
    }
    sum_ = t;
}

double SampleSummary::sd() const noexcept { return std::sqrt(variance); }

SampleSummary summarize(std::span<const double> values) {
    SampleSummary s;
    s.count = values.size();
    if (s.count == 0) return s;
    CompensatedSum total;
    for (double v : values) total.add(v);
    s.mean = total.value() / static_cast<double>(s.count);
    if (s.count < 2) return s;
    CompensatedSum squares;
    for (double v : values) {
        const double d = v - s.mean;
        squares.add(d * d);
    }
    s.variance = squares.value() / static_cast<double>(s.count - 1);
    s.stderr_mean = std::sqrt(s.variance / static_cast<double>(s.count));
    return s;
}

std::vector<SampleSummary> summarize_columns(std::span<const double> table, std::size_t cols) {
    if (cols == 0 || table.size() % cols != 0) {
        throw std::invalid_argument("summarize_columns: table size is not a multiple of the column count");
    }
    const std::size_t rows = table.size() / cols;
    std::vector<SampleSummary> out;
    out.reserve(cols);
    std::vector<double> column(rows);
    for (std::size_t c = 0; c < cols; ++c) {
        for (std::size_t r = 0; r < rows; ++r) column[r] = table[r * cols + c];
        out.push_back(summarize(column));
    }
    return out;
}

LineFit fit_line(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size() || x.size() < 2) {
        throw std::invalid_argument("fit_line: need at least two paired points");
    }
    const auto n = static_cast<double>(x.size());
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= n;
    my /= n;
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
    }
    if (sxx == 0.0) throw std::invalid_argument("fit_line: abscissae are all equal");
    const double slope = sxy / sxx;
    return {slope, my - slope * mx};
}

}  // namespace jdmc
