#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <vector>

#include "jdmc/model.hpp"
#include "jdmc/simulate.hpp"

namespace jdmc {

/// X sampled at the grid nodes, with the noise scale epsilon treated as known.
struct Observations {
    TimeGrid grid;
    std::vector<double> samples;  // n + 1 values
    double epsilon = 0.0;

    static Observations from_path(const Path& path, double epsilon);
};

struct EstimatorResult {
    ParamVector theta;
    std::vector<double> rates;  // diagonal of Gamma_n
    Eigen::MatrixXd info;
    bool converged = false;
    double contrast_value = 0.0;
    std::size_t iterations = 0;
};

/// Gaussian quasi-likelihood contrast with unit-noise diffusion bt = b / noise_scale:
///   M(theta) = sum_k (dX_k - dt a(X_{k-1}))^2 / (dt eps^2 bt^2(X_{k-1})) + log bt^2(X_{k-1}).
double contrast(const Observations& obs, ParamSpan theta, const JumpDiffusionModel& model);
/// Analytic gradient of `contrast`.
std::vector<double> contrast_gradient(const Observations& obs, ParamSpan theta, const JumpDiffusionModel& model);

struct MinimizerOptions {
    std::size_t max_sweeps = 100;
    std::size_t max_inner = 50;
    double gradient_tolerance = 1e-8;
};

/// Coordinate-wise Newton on the contrast, projected onto the parameter box.
/// Rates are eps for drift and jump coordinates and 1/sqrt(n) for diffusion ones;
/// info is fisher_info at the estimate.
EstimatorResult minimize_contrast(const Observations& obs, const JumpDiffusionModel& model, ParamSpan init,
                                  const MinimizerOptions& options = {});

/// Explicit small-noise Black-Scholes estimator:
///   mu = (1/T) sum dX_k / X_{k-1},  sigma^2 = sum (dX_k / X_{k-1} - mu dt)^2 / (T eps^2).
EstimatorResult bs_closed_form(const Observations& obs);

/// Fisher information of the small-noise limit, by trapezoid on the eps = 0 path x' = a(x):
///   drift block      I_ij = int_0^T d_i a d_j a / bt^2 dt
///   diffusion block  I_ij = (1/(2T)) int_0^T d_i bt^2 d_j bt^2 / bt^4 dt
/// with zero cross terms between the blocks.
Eigen::MatrixXd fisher_info(const JumpDiffusionModel& model, ParamSpan theta, const TimeGrid& grid);

/// The eps = 0 Euler path used by fisher_info.
Path limit_path(const JumpDiffusionModel& model, ParamSpan theta, const TimeGrid& grid);

}  // namespace jdmc
