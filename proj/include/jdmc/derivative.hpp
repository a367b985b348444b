#pragma once

#include <span>
#include <vector>

#include "jdmc/model.hpp"

namespace jdmc {

struct NoiseBundle;
struct Path;
struct DerivativePath;

/// Linear-in-y coefficients of the derivative process Y = d X / d theta:
///   A(x, y, theta) = a_x(x, theta) y + a_theta(x, theta)
///   B(x, y, theta) = b_x(x, theta) y + b_theta(x, theta)
///   C(x, y, z, theta) = c_x(x, z, theta) y + c_theta(x, z, theta)
/// driven by the same W and Ntilde as X, started at x_theta(theta).
/// Holds a pointer to the model, which must outlive it.
class DerivativeSystem {
public:
    explicit DerivativeSystem(const JumpDiffusionModel& model);

    const JumpDiffusionModel& base() const noexcept { return *model_; }
    std::size_t dimension() const noexcept { return model_->dimension(); }

    void initial(ParamSpan theta, std::span<double> out) const;
    void drift(double x, std::span<const double> y, ParamSpan theta, std::span<double> out) const;
    void diffusion(double x, std::span<const double> y, ParamSpan theta, std::span<double> out) const;
    /// C split along the affine kernel: C = level_part + z * slope_part.
    void jump_level(double x, std::span<const double> y, ParamSpan theta, std::span<double> out) const;
    void jump_slope(double x, std::span<const double> y, ParamSpan theta, std::span<double> out) const;
    void jump(double x, std::span<const double> y, double z, ParamSpan theta, std::span<double> out) const;

private:
    static void linear(const Coefficient& f, double x, std::span<const double> y, ParamSpan theta,
                       std::span<double> out);

    const JumpDiffusionModel* model_;
};

/// Throws ModelError naming the first coefficient derivative that is missing.
DerivativeSystem build_derivative_system(const JumpDiffusionModel& model);

/// Explicit solution of the OU derivative system on the simulation grid,
/// with stochastic integrals as left-point sums:
///   Y1_t = -int_0^t X_s e^{-mu(t-s)} ds
///   Y2_t =  int_0^t e^{-mu(t-s)} dW_s
///   Y3_t = (lambda/mu)(1 - e^{-mu t}) + int_0^t e^{-mu(t-s)} (dN_s - lambda ds)
/// where N counts the jumps. Needs the X path generated from `noise`.
DerivativePath ou_derivative_closed_form(ParamSpan theta, const Path& x_path, const NoiseBundle& noise,
                                         double intensity);

}  // namespace jdmc
