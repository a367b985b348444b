#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include "jdmc/derivative.hpp"
#include "jdmc/model.hpp"

namespace jdmc {

/// Uniform grid t_k = k T / n, k = 0..n.
class TimeGrid {
public:
    TimeGrid(double horizon, std::size_t steps);

    double horizon() const noexcept { return horizon_; }
    std::size_t steps() const noexcept { return steps_; }
    double dt() const noexcept { return horizon_ / static_cast<double>(steps_); }
    double time(std::size_t k) const noexcept { return horizon_ * static_cast<double>(k) / static_cast<double>(steps_); }
    std::size_t step_of(double t) const;  // index k with t in (t_k, t_{k+1}]

    friend bool operator==(const TimeGrid&, const TimeGrid&) = default;

private:
    double horizon_;
    std::size_t steps_;
};

/// One path's driving randomness, reusable across parameter values.
struct NoiseBundle {
    TimeGrid grid;
    std::uint64_t seed = 0;
    std::vector<double> brownian_increments;  // n draws of N(0, dt)
    std::vector<double> jump_times;           // sorted, in (0, T]
    std::vector<double> jump_sizes;           // paired with jump_times

    std::vector<std::size_t> jump_counts_per_step() const;
    friend bool operator==(const NoiseBundle&, const NoiseBundle&) = default;
};

/// X at the grid nodes; node values are post-jump.
struct Path {
    TimeGrid grid;
    std::vector<double> values;

    explicit Path(const TimeGrid& g) : grid(g), values(g.steps() + 1, 0.0) {}
    double terminal() const { return values.back(); }
};

/// p-dimensional path, row-major (n + 1) x p.
struct DerivativePath {
    TimeGrid grid;
    std::size_t dim;
    std::vector<double> values;

    DerivativePath(const TimeGrid& g, std::size_t p) : grid(g), dim(p), values((g.steps() + 1) * p, 0.0) {}
    std::span<double> at(std::size_t k) { return {values.data() + k * dim, dim}; }
    std::span<const double> at(std::size_t k) const { return {values.data() + k * dim, dim}; }
};

class SimulationError : public std::runtime_error {
public:
    SimulationError(const std::string& what, std::size_t step) : std::runtime_error(what), step_(step) {}
    std::size_t step() const noexcept { return step_; }

private:
    std::size_t step_;
};

/// Brownian increments first (n normals), then jump times as exponential
/// spacings at rate lambda with a mark drawn after each time.
NoiseBundle sample_noise(const TimeGrid& grid, const JumpMeasure& jump, std::uint64_t seed);
/// Same, reusing `out`'s storage.
void sample_noise_into(NoiseBundle& out, const TimeGrid& grid, const JumpMeasure& jump, std::uint64_t seed);

/// Euler-Maruyama with exact-time compound Poisson jumps applied at the
/// step's left state:
///   X_{k+1} = X_k + (a(X_k) - int c(X_k, z) nu(dz)) dt + b(X_k) dW_k + sum_j c(X_k, z_j).
/// Throws SimulationError with the step index on a non-finite state.
Path euler_path(const JumpDiffusionModel& model, ParamSpan theta, const NoiseBundle& noise);

/// X and Y = dX/dtheta advanced together from the same noise.
struct PathWithDerivative {
    Path x;
    DerivativePath y;
};
PathWithDerivative euler_path_with_derivative(const DerivativeSystem& system, ParamSpan theta,
                                              const NoiseBundle& noise);

struct CoupledPaths {
    Path base;            // X^theta
    Path shifted;         // X^{theta + u}
    DerivativePath derivative;  // Y^theta
};
CoupledPaths coupled_paths(const DerivativeSystem& system, ParamSpan theta, ParamSpan u, const NoiseBundle& noise);

/// sup_t |X^{theta+u}_t - X^theta_t - u . Y^theta_t| over the grid nodes.
double coupling_residual_sup(const CoupledPaths& paths, ParamSpan u);

struct MomentEstimate {
    double mean = 0.0;
    double stderr_mean = 0.0;
};

/// Mean and standard error of ||R||^p over M >= 100 sup norms, p in {1, 2, 4}.
MomentEstimate sup_norm_moment(std::span<const double> sup_norms, int p);

struct OrderCheckRow {
    double magnitude = 0.0;  // |u|
    MomentEstimate moment;
};

/// Sweeps u = magnitude * e_k with shared noise per path (path i uses seed
/// derive_seed(root_seed, i)) and estimates E||R||^p for each magnitude.
std::vector<OrderCheckRow> order_check(const DerivativeSystem& system, ParamSpan theta, std::size_t coordinate,
                                       std::span<const double> magnitudes, const TimeGrid& grid,
                                       std::size_t paths, std::uint64_t root_seed, int p = 2, unsigned threads = 0);

}  // namespace jdmc
