#include "jdmc/derivative.hpp"

#include <cmath>
#include <vector>

#include "jdmc/simulate.hpp"

namespace jdmc {

namespace {

void require(bool present, const std::string& model, const char* what) {
    if (!present) throw ModelError("build_derivative_system: model '" + model + "' does not supply " + what);
}

}  // namespace

DerivativeSystem::DerivativeSystem(const JumpDiffusionModel& model) : model_(&model) {}

void DerivativeSystem::linear(const Coefficient& f, double x, std::span<const double> y, ParamSpan theta,
                              std::span<double> out) {
    f.dtheta(x, theta, out);
    const double fx = f.dx(x, theta);
    if (fx != 0.0) {
        for (std::size_t i = 0; i < out.size(); ++i) out[i] += fx * y[i];
    }
}

void DerivativeSystem::initial(ParamSpan theta, std::span<double> out) const { model_->initial.gradient(theta, out); }

void DerivativeSystem::drift(double x, std::span<const double> y, ParamSpan theta, std::span<double> out) const {
    linear(model_->drift, x, y, theta, out);
}

void DerivativeSystem::diffusion(double x, std::span<const double> y, ParamSpan theta,
                                 std::span<double> out) const {
    linear(model_->diffusion, x, y, theta, out);
}

void DerivativeSystem::jump_level(double x, std::span<const double> y, ParamSpan theta,
                                  std::span<double> out) const {
    linear(model_->jump_kernel.level, x, y, theta, out);
}

void DerivativeSystem::jump_slope(double x, std::span<const double> y, ParamSpan theta,
                                  std::span<double> out) const {
    linear(model_->jump_kernel.slope, x, y, theta, out);
}

void DerivativeSystem::jump(double x, std::span<const double> y, double z, ParamSpan theta,
                            std::span<double> out) const {
    std::vector<double> slope(out.size());
    jump_level(x, y, theta, out);
    jump_slope(x, y, theta, slope);
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += z * slope[i];
}

DerivativeSystem build_derivative_system(const JumpDiffusionModel& model) {
    const std::string& name = model.name;
    require(static_cast<bool>(model.initial.value), name, "the initial value x(theta)");
    require(static_cast<bool>(model.initial.gradient), name, "the initial gradient of x(theta)");
    const std::pair<const Coefficient*, const char*> coefficients[] = {
        {&model.drift, "a"}, {&model.diffusion, "b"}, {&model.jump_kernel.level, "c (level)"},
        {&model.jump_kernel.slope, "c (slope)"}};
    for (const auto& [coefficient, label] : coefficients) {
        require(static_cast<bool>(coefficient->value), name, (std::string("coefficient ") + label).c_str());
        require(static_cast<bool>(coefficient->dx), name, (std::string("the x-derivative of ") + label).c_str());
        require(static_cast<bool>(coefficient->dtheta), name,
                (std::string("the theta-gradient of ") + label).c_str());
    }
    if (model.roles.size() != model.dimension() || model.box.size() != model.dimension()) {
        throw ModelError("build_derivative_system: model '" + name + "' has inconsistent parameter metadata");
    }
    return DerivativeSystem(model);
}

DerivativePath ou_derivative_closed_form(ParamSpan theta, const Path& x_path, const NoiseBundle& noise,
                                         double intensity) {
    if (theta.size() != 3) throw std::invalid_argument("ou_derivative_closed_form: theta must be (mu, sigma, eta)");
    const double mu = theta[0];
    if (!(mu > 0.0)) throw ModelError("ou_derivative_closed_form: mu must be positive");
    const TimeGrid& grid = noise.grid;
    if (x_path.grid != grid) throw std::invalid_argument("ou_derivative_closed_form: path and noise grids differ");

    const std::size_t n = grid.steps();
    const double dt = grid.dt();
    const std::vector<std::size_t> counts = noise.jump_counts_per_step();

    DerivativePath y(grid, 3);
    // Left-point sums: the increment over (t_i, t_{i+1}] is weighted by e^{-mu (t_k - t_i)}.
    // Recursively S_{k+1} = e^{-mu dt} (S_k + increment_k).
    const double decay = std::exp(-mu * dt);
    double drift_sum = 0.0, brownian_sum = 0.0, jump_sum = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        drift_sum = decay * (drift_sum + x_path.values[k] * dt);
        brownian_sum = decay * (brownian_sum + noise.brownian_increments[k]);
        jump_sum = decay * (jump_sum + static_cast<double>(counts[k]) - intensity * dt);
        const double t = grid.time(k + 1);
        auto row = y.at(k + 1);
        row[0] = -drift_sum;
        row[1] = brownian_sum;
        row[2] = intensity / mu * (1.0 - std::exp(-mu * t)) + jump_sum;
    }
    return y;
}

}  // namespace jdmc
