#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "jdmc/simulate.hpp"

namespace jdmc {

enum class FunctionalKind { terminal, time_average, discounted_integral, smoothed_call_terminal, smoothed_call_average };

std::string to_string(FunctionalKind kind);
FunctionalKind functional_kind_from_string(const std::string& name);

/// Scalar map with its derivative: phi/phi' for the outer payoff, V/V' for
/// the discounted integrand.
struct ScalarMap {
    std::function<double(double)> value;
    std::function<double(double)> derivative;

    static ScalarMap identity();
};

/// h(X) in one of two shapes:
///   phi(X_*) with X_* = X_T or (1/T) int_0^T X dt,
///   int_0^T e^{-delta t} V(X_t) dt.
/// Integrals use the trapezoid rule on the path grid; T must be a grid node.
class Functional {
public:
    FunctionalKind kind() const noexcept { return kind_; }
    double horizon() const noexcept { return horizon_; }
    double strike() const noexcept { return strike_; }
    double rate() const noexcept { return rate_; }
    double discount() const noexcept { return discount_; }
    double smoothing() const noexcept { return smoothing_; }
    const ScalarMap& map() const noexcept { return map_; }

    double eval(const Path& path) const;
    /// X_* for the payoff kinds; throws for discounted_integral.
    double reduce(const Path& path) const;

    friend Functional terminal(double horizon, ScalarMap payoff);
    friend Functional time_average(double horizon, ScalarMap payoff);
    friend Functional discounted_integral(double horizon, double discount, ScalarMap integrand);
    friend Functional smoothed_call_terminal(double strike, double rate, double horizon, double smoothing);
    friend Functional smoothed_call_average(double strike, double rate, double horizon, double smoothing);
    friend void pathwise_G_into(const Functional& f, const Path& x, const DerivativePath& y, std::span<double> out);

private:
    Functional(FunctionalKind kind, double horizon, ScalarMap map);
    std::size_t terminal_index(const TimeGrid& grid) const;

    FunctionalKind kind_;
    double horizon_;
    ScalarMap map_;
    double strike_ = 0.0;
    double rate_ = 0.0;
    double discount_ = 0.0;
    double smoothing_ = 0.0;
};

Functional terminal(double horizon, ScalarMap payoff = ScalarMap::identity());
Functional time_average(double horizon, ScalarMap payoff = ScalarMap::identity());
Functional discounted_integral(double horizon, double discount, ScalarMap integrand = ScalarMap::identity());

/// 1e-3 K, used when a config leaves the smoothing width unset.
double default_smoothing(double strike);

/// smoothing = 0 gives the kinked e^{-rT} max(x - K, 0) with derivative
/// e^{-rT} (sgn(x - K) + 1) / 2, sgn(0) = 0.
Functional smoothed_call_terminal(double strike, double rate, double horizon, double smoothing);
Functional smoothed_call_average(double strike, double rate, double horizon, double smoothing);

/// (e^{-rT}/2) (sqrt((x-K)^2 + d^2) + x - K); requires d > 0.
double smoothed_call(double x, double strike, double smoothing, double rate, double horizon);
double smoothed_call_derivative(double x, double strike, double smoothing, double rate, double horizon);

/// One draw of G = phi'(X_*) Y_* (payoff kinds) or int e^{-delta t} V'(X_t) Y_t dt.
std::vector<double> pathwise_G(const Functional& f, const Path& x, const DerivativePath& y);
void pathwise_G_into(const Functional& f, const Path& x, const DerivativePath& y, std::span<double> out);

}  // namespace jdmc
