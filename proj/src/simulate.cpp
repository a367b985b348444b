#include "jdmc/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "jdmc/parallel.hpp"
#include "jdmc/rng.hpp"
#include "jdmc/stats.hpp"

namespace jdmc {

TimeGrid::TimeGrid(double horizon, std::size_t steps) : horizon_(horizon), steps_(steps) {
    if (!(horizon > 0.0) || !std::isfinite(horizon)) throw std::invalid_argument("TimeGrid: horizon must be positive");
    if (steps == 0) throw std::invalid_argument("TimeGrid: need at least one step");
}

std::size_t TimeGrid::step_of(double t) const {
    const double scaled = std::ceil(t / horizon_ * static_cast<double>(steps_));
    const double k = std::clamp(scaled - 1.0, 0.0, static_cast<double>(steps_ - 1));
    return static_cast<std::size_t>(k);
}

std::vector<std::size_t> NoiseBundle::jump_counts_per_step() const {
    std::vector<std::size_t> counts(grid.steps(), 0);
    for (double t : jump_times) ++counts[grid.step_of(t)];
    return counts;
}

void sample_noise_into(NoiseBundle& out, const TimeGrid& grid, const JumpMeasure& jump, std::uint64_t seed) {
    out.grid = grid;
    out.seed = seed;
    CounterRng rng(seed);
    const double sd = std::sqrt(grid.dt());
    out.brownian_increments.resize(grid.steps());
    for (double& dw : out.brownian_increments) dw = sd * rng.normal();

    out.jump_times.clear();
    out.jump_sizes.clear();
    if (!jump.active()) return;
    double t = 0.0;
    for (;;) {
        t += rng.exponential(jump.intensity);
        if (t > grid.horizon()) break;
        double size = jump.mean;
        switch (jump.law) {
            case JumpSizeLaw::constant:
                break;
            case JumpSizeLaw::normal:
                size = jump.mean + jump.sd * rng.normal();
                break;
            case JumpSizeLaw::exponential:
                size = rng.exponential(1.0 / jump.mean);
                break;
        }
        out.jump_times.push_back(t);
        out.jump_sizes.push_back(size);
    }
}

NoiseBundle sample_noise(const TimeGrid& grid, const JumpMeasure& jump, std::uint64_t seed) {
    NoiseBundle noise{grid, seed, {}, {}, {}};
    sample_noise_into(noise, grid, jump, seed);
    return noise;
}

namespace {

void check_noise(const JumpDiffusionModel& model, ParamSpan theta, const NoiseBundle& noise) {
    model.check_params(theta);
    if (noise.brownian_increments.size() != noise.grid.steps() ||
        noise.jump_times.size() != noise.jump_sizes.size()) {
        throw std::invalid_argument("noise bundle is inconsistent with its grid");
    }
}

[[noreturn]] void blow_up(const std::string& model, std::size_t step) {
    throw SimulationError("euler step " + std::to_string(step) + " of model '" + model + "' produced a non-finite state",
                          step);
}

}  // namespace

Path euler_path(const JumpDiffusionModel& model, ParamSpan theta, const NoiseBundle& noise) {
    check_noise(model, theta, noise);
    const TimeGrid& grid = noise.grid;
    const double dt = grid.dt();
    const bool jumps = model.jump.active();
    Path path(grid);
    double x = model.initial.value(theta);
    path.values[0] = x;
    std::size_t next_jump = 0;
    for (std::size_t k = 0; k < grid.steps(); ++k) {
        double drift = model.drift.value(x, theta);
        if (jumps) drift -= model.jump_compensator(x, theta);
        double next = x + drift * dt + model.diffusion.value(x, theta) * noise.brownian_increments[k];
        const double step_end = grid.time(k + 1);
        while (next_jump < noise.jump_times.size() &&
               (noise.jump_times[next_jump] <= step_end || k + 1 == grid.steps())) {
            next += model.jump_kernel(x, noise.jump_sizes[next_jump], theta);
            ++next_jump;
        }
        if (!std::isfinite(next)) blow_up(model.name, k);
        x = next;
        path.values[k + 1] = x;
    }
    return path;
}

PathWithDerivative euler_path_with_derivative(const DerivativeSystem& system, ParamSpan theta,
                                              const NoiseBundle& noise) {
    const JumpDiffusionModel& model = system.base();
    check_noise(model, theta, noise);
    const TimeGrid& grid = noise.grid;
    const std::size_t p = system.dimension();
    const double dt = grid.dt();
    const bool jumps = model.jump.active();
    const double lambda = model.jump.intensity;
    const double mark_mean = model.jump.mean;

    PathWithDerivative out{Path(grid), DerivativePath(grid, p)};
    std::vector<double> a(p), b(p), level(p), slope(p), y(p);
    double x = model.initial.value(theta);
    system.initial(theta, y);
    out.x.values[0] = x;
    std::copy(y.begin(), y.end(), out.y.at(0).begin());

    std::size_t next_jump = 0;
    for (std::size_t k = 0; k < grid.steps(); ++k) {
        const double dw = noise.brownian_increments[k];
        double drift = model.drift.value(x, theta);
        system.drift(x, y, theta, a);
        system.diffusion(x, y, theta, b);
        if (jumps) {
            drift -= model.jump_compensator(x, theta);
            system.jump_level(x, y, theta, level);
            system.jump_slope(x, y, theta, slope);
            for (std::size_t i = 0; i < p; ++i) a[i] -= lambda * (level[i] + mark_mean * slope[i]);
        }
        double next = x + drift * dt + model.diffusion.value(x, theta) * dw;
        auto row = out.y.at(k + 1);
        for (std::size_t i = 0; i < p; ++i) row[i] = y[i] + a[i] * dt + b[i] * dw;

        const double step_end = grid.time(k + 1);
        while (next_jump < noise.jump_times.size() &&
               (noise.jump_times[next_jump] <= step_end || k + 1 == grid.steps())) {
            const double z = noise.jump_sizes[next_jump];
            next += model.jump_kernel(x, z, theta);
            for (std::size_t i = 0; i < p; ++i) row[i] += level[i] + z * slope[i];
            ++next_jump;
        }
        if (!std::isfinite(next)) blow_up(model.name, k);
        for (std::size_t i = 0; i < p; ++i) {
            if (!std::isfinite(row[i])) blow_up(model.name + " (derivative)", k);
            y[i] = row[i];
        }
        x = next;
        out.x.values[k + 1] = x;
    }
    return out;
}

CoupledPaths coupled_paths(const DerivativeSystem& system, ParamSpan theta, ParamSpan u, const NoiseBundle& noise) {
    if (u.size() != theta.size()) throw std::invalid_argument("coupled_paths: u and theta differ in dimension");
    std::vector<double> shifted_theta(theta.begin(), theta.end());
    for (std::size_t i = 0; i < u.size(); ++i) shifted_theta[i] += u[i];
    system.base().check_params(shifted_theta);

    PathWithDerivative base = euler_path_with_derivative(system, theta, noise);
    Path shifted = euler_path(system.base(), shifted_theta, noise);
    return {std::move(base.x), std::move(shifted), std::move(base.y)};
}

double coupling_residual_sup(const CoupledPaths& paths, ParamSpan u) {
    if (u.size() != paths.derivative.dim) throw std::invalid_argument("coupling_residual_sup: dimension mismatch");
    double sup = 0.0;
    for (std::size_t k = 0; k < paths.base.values.size(); ++k) {
        const auto y = paths.derivative.at(k);
        double linear = 0.0;
        for (std::size_t i = 0; i < u.size(); ++i) linear += u[i] * y[i];
        sup = std::max(sup, std::fabs(paths.shifted.values[k] - paths.base.values[k] - linear));
    }
    return sup;
}

MomentEstimate sup_norm_moment(std::span<const double> sup_norms, int p) {
    if (sup_norms.size() < 100) throw std::invalid_argument("sup_norm_moment: need at least 100 paths");
    if (p != 1 && p != 2 && p != 4) throw std::invalid_argument("sup_norm_moment: exponent must be 1, 2 or 4");
    std::vector<double> powered(sup_norms.size());
    std::transform(sup_norms.begin(), sup_norms.end(), powered.begin(),
                   [p](double r) { return std::pow(std::fabs(r), p); });
    const SampleSummary s = summarize(powered);
    return {s.mean, s.stderr_mean};
}

std::vector<OrderCheckRow> order_check(const DerivativeSystem& system, ParamSpan theta, std::size_t coordinate,
                                       std::span<const double> magnitudes, const TimeGrid& grid,
                                       std::size_t paths, std::uint64_t root_seed, int p, unsigned threads) {
    const JumpDiffusionModel& model = system.base();
    const std::size_t dim = system.dimension();
    if (coordinate >= dim) throw std::invalid_argument("order_check: coordinate out of range");
    const std::size_t m = magnitudes.size();
    std::vector<double> sups(paths * m);

    parallel_for(paths, threads, [&](std::size_t i) {
        const NoiseBundle noise = sample_noise(grid, model.jump, derive_seed(root_seed, i));
        const PathWithDerivative base = euler_path_with_derivative(system, theta, noise);
        std::vector<double> shifted_theta(theta.begin(), theta.end());
        for (std::size_t j = 0; j < m; ++j) {
            shifted_theta[coordinate] = theta[coordinate] + magnitudes[j];
            const Path shifted = euler_path(model, shifted_theta, noise);
            double sup = 0.0;
            for (std::size_t k = 0; k <= grid.steps(); ++k) {
                const double r = shifted.values[k] - base.x.values[k] - magnitudes[j] * base.y.at(k)[coordinate];
                sup = std::max(sup, std::fabs(r));
            }
            sups[i * m + j] = sup;
        }
    });

    std::vector<OrderCheckRow> rows;
    rows.reserve(m);
    std::vector<double> column(paths);
    for (std::size_t j = 0; j < m; ++j) {
        for (std::size_t i = 0; i < paths; ++i) column[i] = sups[i * m + j];
        rows.push_back({magnitudes[j], sup_norm_moment(column, p)});
    }
    return rows;
}

}  // namespace jdmc
