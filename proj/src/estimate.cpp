#include "jdmc/estimate.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "jdmc/stats.hpp"

namespace jdmc {

namespace {

void check_observations(const Observations& obs) {
    if (obs.samples.size() != obs.grid.steps() + 1) {
        throw std::invalid_argument("observations: expected n + 1 samples for the grid");
    }
    if (!(obs.epsilon > 0.0) || !std::isfinite(obs.epsilon)) {
        throw std::invalid_argument("observations: epsilon must be positive");
    }
    for (double x : obs.samples) {
        if (!std::isfinite(x)) throw std::invalid_argument("observations: samples must be finite");
    }
}

double unit_scale(const JumpDiffusionModel& model) {
    if (!(model.noise_scale > 0.0)) {
        throw ModelError(model.name + ": contrast needs a positive noise scale to normalize the diffusion");
    }
    return model.noise_scale;
}

bool drift_like(ParamRole role) { return role != ParamRole::diffusion; }

}  // namespace

Observations Observations::from_path(const Path& path, double epsilon) { return {path.grid, path.values, epsilon}; }

double contrast(const Observations& obs, ParamSpan theta, const JumpDiffusionModel& model) {
    check_observations(obs);
    model.check_params(theta);
    const double scale = unit_scale(model);
    const double dt = obs.grid.dt();
    const double noise = dt * obs.epsilon * obs.epsilon;
    CompensatedSum total;
    for (std::size_t k = 1; k < obs.samples.size(); ++k) {
        const double x = obs.samples[k - 1];
        const double b = model.diffusion.value(x, theta) / scale;
        const double b2 = b * b;
        if (!(b2 > 0.0)) throw std::domain_error("contrast: zero diffusion at an observed state");
        const double r = obs.samples[k] - x - dt * model.drift.value(x, theta);
        total.add(r * r / (noise * b2) + std::log(b2));
    }
    return total.value();
}

std::vector<double> contrast_gradient(const Observations& obs, ParamSpan theta, const JumpDiffusionModel& model) {
    check_observations(obs);
    model.check_params(theta);
    const std::size_t p = model.dimension();
    const double scale = unit_scale(model);
    const double dt = obs.grid.dt();
    const double noise = dt * obs.epsilon * obs.epsilon;
    std::vector<CompensatedSum> sums(p);
    std::vector<double> da(p), db(p);
    for (std::size_t k = 1; k < obs.samples.size(); ++k) {
        const double x = obs.samples[k - 1];
        const double b = model.diffusion.value(x, theta) / scale;
        const double b2 = b * b;
        if (!(b2 > 0.0)) throw std::domain_error("contrast: zero diffusion at an observed state");
        const double r = obs.samples[k] - x - dt * model.drift.value(x, theta);
        model.drift.dtheta(x, theta, da);
        model.diffusion.dtheta(x, theta, db);
        for (std::size_t j = 0; j < p; ++j) {
            const double db2 = 2.0 * b * db[j] / scale;  // d(bt^2)/d theta_j
            sums[j].add(-2.0 * r * dt * da[j] / (noise * b2) - r * r * db2 / (noise * b2 * b2) + db2 / b2);
        }
    }
    std::vector<double> g(p);
    for (std::size_t j = 0; j < p; ++j) g[j] = sums[j].value();
    return g;
}

Path limit_path(const JumpDiffusionModel& model, ParamSpan theta, const TimeGrid& grid) {
    model.check_params(theta);
    Path path(grid);
    double x = model.initial.value(theta);
    path.values[0] = x;
    const double dt = grid.dt();
    for (std::size_t k = 0; k < grid.steps(); ++k) {
        x += model.drift.value(x, theta) * dt;
        if (!std::isfinite(x)) throw SimulationError("limit path is not finite", k);
        path.values[k + 1] = x;
    }
    return path;
}

Eigen::MatrixXd fisher_info(const JumpDiffusionModel& model, ParamSpan theta, const TimeGrid& grid) {
    const std::size_t p = model.dimension();
    const double scale = unit_scale(model);
    const Path path = limit_path(model, theta, grid);
    const double dt = grid.dt();
    const double horizon = grid.horizon();

    Eigen::MatrixXd info = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(p));
    std::vector<double> da(p), db(p);
    for (std::size_t k = 0; k <= grid.steps(); ++k) {
        const double x = path.values[k];
        const double b = model.diffusion.value(x, theta) / scale;
        if (!(b * b > 0.0)) throw std::domain_error("fisher_info: zero diffusion on the limit path");
        model.drift.dtheta(x, theta, da);
        model.diffusion.dtheta(x, theta, db);
        const double w = (k == 0 || k == grid.steps()) ? 0.5 * dt : dt;
        for (std::size_t i = 0; i < p; ++i) {
            for (std::size_t j = 0; j < p; ++j) {
                const bool di = drift_like(model.roles[i]);
                if (di != drift_like(model.roles[j])) continue;
                double term;
                if (di) {
                    term = da[i] * da[j] / (b * b);
                } else {
                    // d(bt^2)/bt^2 = 2 d(bt)/bt
                    term = 0.5 / horizon * (2.0 * db[i] / scale / b) * (2.0 * db[j] / scale / b);
                }
                info(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) += w * term;
            }
        }
    }
    return info;
}

EstimatorResult minimize_contrast(const Observations& obs, const JumpDiffusionModel& model, ParamSpan init,
                                  const MinimizerOptions& options) {
    check_observations(obs);
    model.check_params(init);
    const std::size_t p = model.dimension();
    std::vector<double> theta(init.begin(), init.end());
    double value = contrast(obs, theta, model);

    auto gradient_at = [&](std::size_t j, const std::vector<double>& point) {
        return contrast_gradient(obs, point, model)[j];
    };
    auto sup_gradient = [&] {
        const std::vector<double> g = contrast_gradient(obs, theta, model);
        double sup = 0.0;
        for (std::size_t j = 0; j < p; ++j) {
            // A coordinate pinned at a bound with the gradient pushing outward is stationary.
            const bool at_lower = theta[j] <= model.box.lower[j] && g[j] > 0.0;
            const bool at_upper = theta[j] >= model.box.upper[j] && g[j] < 0.0;
            if (!at_lower && !at_upper) sup = std::max(sup, std::fabs(g[j]));
        }
        return sup;
    };

    std::size_t sweeps = 0;
    bool converged = sup_gradient() < options.gradient_tolerance;
    while (!converged && sweeps < options.max_sweeps) {
        ++sweeps;
        for (std::size_t j = 0; j < p; ++j) {
            for (std::size_t inner = 0; inner < options.max_inner; ++inner) {
                const double g = gradient_at(j, theta);
                if (std::fabs(g) < 1e-3 * options.gradient_tolerance) break;

                const double h = std::max(1e-6, 1e-6 * std::fabs(theta[j]));
                std::vector<double> plus = theta, minus = theta;
                plus[j] = model.box.clamp(j, theta[j] + h);
                minus[j] = model.box.clamp(j, theta[j] - h);
                const double curvature = (gradient_at(j, plus) - gradient_at(j, minus)) / (plus[j] - minus[j]);
                double step = curvature > 0.0 ? -g / curvature : -g;

                bool moved = false;
                for (int halving = 0; halving < 60; ++halving) {
                    std::vector<double> trial = theta;
                    trial[j] = model.box.clamp(j, theta[j] + step);
                    if (trial[j] == theta[j]) break;
                    double trial_value = std::numeric_limits<double>::infinity();
                    try {
                        trial_value = contrast(obs, trial, model);
                    } catch (const std::domain_error&) {
                    }
                    if (trial_value <= value) {
                        theta = std::move(trial);
                        value = trial_value;
                        moved = true;
                        break;
                    }
                    step *= 0.5;
                }
                if (!moved) break;
            }
        }
        converged = sup_gradient() < options.gradient_tolerance;
    }

    EstimatorResult result;
    result.theta = ParamVector(theta);
    result.rates.resize(p);
    const double root_n = 1.0 / std::sqrt(static_cast<double>(obs.grid.steps()));
    for (std::size_t j = 0; j < p; ++j) result.rates[j] = drift_like(model.roles[j]) ? obs.epsilon : root_n;
    result.info = fisher_info(model, theta, obs.grid);
    result.converged = converged;
    result.contrast_value = value;
    result.iterations = sweeps;
    return result;
}

EstimatorResult bs_closed_form(const Observations& obs) {
    check_observations(obs);
    for (double x : obs.samples) {
        if (!(x > 0.0)) throw std::domain_error("bs_closed_form: samples must be strictly positive");
    }
    const std::size_t n = obs.grid.steps();
    const double dt = obs.grid.dt();
    const double horizon = obs.grid.horizon();
    const double eps2 = obs.epsilon * obs.epsilon;

    CompensatedSum returns;
    for (std::size_t k = 1; k <= n; ++k) returns.add((obs.samples[k] - obs.samples[k - 1]) / obs.samples[k - 1]);
    const double mu = returns.value() / horizon;

    CompensatedSum squares, logs;
    for (std::size_t k = 1; k <= n; ++k) {
        const double r = (obs.samples[k] - obs.samples[k - 1]) / obs.samples[k - 1] - mu * dt;
        squares.add(r * r);
    }
    const double sigma2 = squares.value() / (horizon * eps2);
    const double sigma = std::sqrt(sigma2);

    EstimatorResult result;
    result.theta = ParamVector{mu, sigma};
    result.rates = {obs.epsilon, 1.0 / std::sqrt(static_cast<double>(n))};
    result.info = Eigen::MatrixXd::Zero(2, 2);
    result.info(0, 0) = horizon / sigma2;
    result.info(1, 1) = 2.0 / sigma2;
    result.converged = true;
    result.iterations = 0;
    if (sigma2 > 0.0) {
        for (std::size_t k = 0; k < n; ++k) logs.add(std::log(sigma2 * obs.samples[k] * obs.samples[k]));
        result.contrast_value = static_cast<double>(n) + logs.value();
    } else {
        result.contrast_value = -std::numeric_limits<double>::infinity();
    }
    return result;
}

}  // namespace jdmc
