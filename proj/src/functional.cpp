#include "jdmc/functional.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace jdmc {

namespace {

double kink_call(double x, double strike, double df) { return df * std::max(x - strike, 0.0); }

double kink_call_derivative(double x, double strike, double df) {
    if (x > strike) return df;
    if (x < strike) return 0.0;
    return 0.5 * df;
}

ScalarMap call_map(double strike, double rate, double horizon, double smoothing) {
    if (!(strike >= 0.0)) throw std::invalid_argument("call payoff: strike must be >= 0");
    if (!(smoothing >= 0.0)) throw std::invalid_argument("call payoff: smoothing must be >= 0");
    if (smoothing == 0.0) {
        const double df = std::exp(-rate * horizon);
        return {[=](double x) { return kink_call(x, strike, df); },
                [=](double x) { return kink_call_derivative(x, strike, df); }};
    }
    return {[=](double x) { return smoothed_call(x, strike, smoothing, rate, horizon); },
            [=](double x) { return smoothed_call_derivative(x, strike, smoothing, rate, horizon); }};
}

}  // namespace

std::string to_string(FunctionalKind kind) {
    switch (kind) {
        case FunctionalKind::terminal: return "terminal";
        case FunctionalKind::time_average: return "time_average";
        case FunctionalKind::discounted_integral: return "discounted_integral";
        case FunctionalKind::smoothed_call_terminal: return "smoothed_call_terminal";
        case FunctionalKind::smoothed_call_average: return "smoothed_call_average";
    }
    return "unknown";
}

FunctionalKind functional_kind_from_string(const std::string& name) {
    for (FunctionalKind k : {FunctionalKind::terminal, FunctionalKind::time_average,
                             FunctionalKind::discounted_integral, FunctionalKind::smoothed_call_terminal,
                             FunctionalKind::smoothed_call_average}) {
        if (to_string(k) == name) return k;
    }
    throw std::invalid_argument("unknown functional kind '" + name + "'");
}

ScalarMap ScalarMap::identity() {
    return {[](double x) { return x; }, [](double) { return 1.0; }};
}

Functional::Functional(FunctionalKind kind, double horizon, ScalarMap map)
    : kind_(kind), horizon_(horizon), map_(std::move(map)) {
    if (!(horizon > 0.0) || !std::isfinite(horizon)) throw std::invalid_argument("functional horizon must be positive");
    if (!map_.value || !map_.derivative) throw std::invalid_argument("functional needs a map and its derivative");
}

std::size_t Functional::terminal_index(const TimeGrid& grid) const {
    if (grid.horizon() < horizon_ * (1.0 - 1e-12)) {
        throw std::invalid_argument("path grid ends before the functional horizon");
    }
    const double exact = horizon_ / grid.dt();
    const double m = std::round(exact);
    if (std::fabs(m - exact) > 1e-9 * std::max(1.0, exact) || m < 1.0) {
        throw std::invalid_argument("functional horizon is not a node of the path grid");
    }
    return static_cast<std::size_t>(m);
}

double Functional::reduce(const Path& path) const {
    const std::size_t m = terminal_index(path.grid);
    switch (kind_) {
        case FunctionalKind::terminal:
        case FunctionalKind::smoothed_call_terminal:
            return path.values[m];
        case FunctionalKind::time_average:
        case FunctionalKind::smoothed_call_average: {
            double sum = 0.5 * (path.values[0] + path.values[m]);
            for (std::size_t k = 1; k < m; ++k) sum += path.values[k];
            return sum * path.grid.dt() / horizon_;
        }
        case FunctionalKind::discounted_integral:
            break;
    }
    throw std::logic_error("discounted_integral has no scalar reduction");
}

double Functional::eval(const Path& path) const {
    if (kind_ != FunctionalKind::discounted_integral) return map_.value(reduce(path));
    const std::size_t m = terminal_index(path.grid);
    const double dt = path.grid.dt();
    const double decay = std::exp(-discount_ * dt);
    double weight = 1.0;
    double sum = 0.0;
    for (std::size_t k = 0; k <= m; ++k) {
        const double w = (k == 0 || k == m) ? 0.5 : 1.0;
        sum += w * weight * map_.value(path.values[k]);
        weight *= decay;
    }
    return sum * dt;
}

Functional terminal(double horizon, ScalarMap payoff) {
    return Functional(FunctionalKind::terminal, horizon, std::move(payoff));
}

Functional time_average(double horizon, ScalarMap payoff) {
    return Functional(FunctionalKind::time_average, horizon, std::move(payoff));
}

Functional discounted_integral(double horizon, double discount, ScalarMap integrand) {
    if (!std::isfinite(discount)) throw std::invalid_argument("discount rate must be finite");
    Functional f(FunctionalKind::discounted_integral, horizon, std::move(integrand));
    f.discount_ = discount;
    return f;
}

double default_smoothing(double strike) { return 1e-3 * strike; }

Functional smoothed_call_terminal(double strike, double rate, double horizon, double smoothing) {
    Functional f(FunctionalKind::smoothed_call_terminal, horizon, call_map(strike, rate, horizon, smoothing));
    f.strike_ = strike;
    f.rate_ = rate;
    f.smoothing_ = smoothing;
    return f;
}

Functional smoothed_call_average(double strike, double rate, double horizon, double smoothing) {
    Functional f(FunctionalKind::smoothed_call_average, horizon, call_map(strike, rate, horizon, smoothing));
    f.strike_ = strike;
    f.rate_ = rate;
    f.smoothing_ = smoothing;
    return f;
}

double smoothed_call(double x, double strike, double smoothing, double rate, double horizon) {
    if (!(smoothing > 0.0)) throw std::invalid_argument("smoothed_call: smoothing width must be positive");
    const double d = x - strike;
    return 0.5 * std::exp(-rate * horizon) * (std::hypot(d, smoothing) + d);
}

double smoothed_call_derivative(double x, double strike, double smoothing, double rate, double horizon) {
    if (!(smoothing > 0.0)) throw std::invalid_argument("smoothed_call: smoothing width must be positive");
    const double d = x - strike;
    return 0.5 * std::exp(-rate * horizon) * (d / std::hypot(d, smoothing) + 1.0);
}

void pathwise_G_into(const Functional& f, const Path& x, const DerivativePath& y, std::span<double> out) {
    if (!(x.grid == y.grid)) throw std::invalid_argument("pathwise_G: X and Y paths use different grids");
    if (out.size() != y.dim) throw std::invalid_argument("pathwise_G: output dimension does not match Y");
    const std::size_t m = f.terminal_index(x.grid);
    const std::size_t p = y.dim;
    const double dt = x.grid.dt();
    std::fill(out.begin(), out.end(), 0.0);

    switch (f.kind_) {
        case FunctionalKind::terminal:
        case FunctionalKind::smoothed_call_terminal: {
            const double slope = f.map_.derivative(x.values[m]);
            const auto ym = y.at(m);
            for (std::size_t i = 0; i < p; ++i) out[i] = slope * ym[i];
            return;
        }
        case FunctionalKind::time_average:
        case FunctionalKind::smoothed_call_average: {
            const double slope = f.map_.derivative(f.reduce(x));
            for (std::size_t k = 0; k <= m; ++k) {
                const double w = (k == 0 || k == m) ? 0.5 : 1.0;
                const auto yk = y.at(k);
                for (std::size_t i = 0; i < p; ++i) out[i] += w * yk[i];
            }
            for (double& g : out) g *= slope * dt / f.horizon_;
            return;
        }
        case FunctionalKind::discounted_integral: {
            const double decay = std::exp(-f.discount_ * dt);
            double weight = 1.0;
            for (std::size_t k = 0; k <= m; ++k) {
                const double w = ((k == 0 || k == m) ? 0.5 : 1.0) * weight * f.map_.derivative(x.values[k]);
                const auto yk = y.at(k);
                for (std::size_t i = 0; i < p; ++i) out[i] += w * yk[i];
                weight *= decay;
            }
            for (double& g : out) g *= dt;
            return;
        }
    }
}

std::vector<double> pathwise_G(const Functional& f, const Path& x, const DerivativePath& y) {
    std::vector<double> g(y.dim);
    pathwise_G_into(f, x, y, g);
    return g;
}

}  // namespace jdmc
