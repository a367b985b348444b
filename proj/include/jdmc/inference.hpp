#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include <json.hpp>

#include "jdmc/derivative.hpp"
#include "jdmc/estimate.hpp"
#include "jdmc/functional.hpp"
#include "jdmc/simulate.hpp"

namespace jdmc {

struct MonteCarloEstimate {
    double mean = 0.0;
    double stderr_mean = 0.0;
};

struct VectorEstimate {
    std::vector<double> mean;
    std::vector<double> stderr_mean;
};

/// Average of h over B >= 100 paths at theta; path i uses derive_seed(root_seed, i).
/// A blown-up path is rethrown as SimulationError naming its index and seed.
MonteCarloEstimate plugin_H(const JumpDiffusionModel& model, const Functional& functional, ParamSpan theta,
                            const TimeGrid& grid, std::size_t paths, std::uint64_t root_seed, unsigned threads = 0);

/// Average of the pathwise gradient G over coupled (X, Y) paths, seeded like plugin_H.
VectorEstimate estimate_C(const DerivativeSystem& system, const Functional& functional, ParamSpan theta,
                          const TimeGrid& grid, std::size_t paths, std::uint64_t root_seed, unsigned threads = 0);

/// H and C from the same paths: the X paths coincide with plugin_H's for the same seed.
struct PluginEstimate {
    MonteCarloEstimate H;
    VectorEstimate C;
};
PluginEstimate plugin_H_and_C(const DerivativeSystem& system, const Functional& functional, ParamSpan theta,
                              const TimeGrid& grid, std::size_t paths, std::uint64_t root_seed,
                              unsigned threads = 0);

/// Call price under the model's own law, X_T = x exp((mu - eps^2 sigma^2/2) T + eps sigma W_T):
///   e^{-(r-mu)T} [x Phi(d1) - K e^{-mu T} Phi(d2)],
///   d1 = (log(x/K) + (mu + eps^2 sigma^2/2) T) / (eps sigma sqrt T),  d2 = d1 - eps sigma sqrt T.
/// theta = (mu, sigma).
double bs_call_closed_form(ParamSpan theta, double epsilon, double x, double strike, double rate, double horizon);

/// E[X_t] for ou_jump_model: x e^{-mu t} + (lambda eta / mu)(1 - e^{-mu t}).
double ou_mean(double mu, double eta, double intensity, double x, double t);

/// int_0^T e^{-delta t} E[X_t] dt for ou_jump_model.
double ou_discounted_closed_form(double mu, double eta, double intensity, double discount, double x,
                                 double horizon);

struct AsymptoticVariance {
    double value = 0.0;
    double rate = 0.0;          // gamma_*, the largest rate
    std::vector<bool> kept;     // coordinates converging at rate gamma_*
};

/// C^T Sigma C over the coordinates whose rate equals the slowest one
/// (largest gamma, relative tolerance 1e-12); faster coordinates are masked.
AsymptoticVariance asymptotic_variance(std::span<const double> C, const Eigen::MatrixXd& sigma,
                                       std::span<const double> rates);
/// Unmasked C^T Sigma C.
double asymptotic_variance(std::span<const double> C, const Eigen::MatrixXd& sigma);

/// Inverse of a positive definite information matrix.
Eigen::MatrixXd covariance_from_info(const Eigen::MatrixXd& info);

struct Interval {
    double lo = 0.0;
    double hi = 0.0;

    bool contains(double v) const noexcept { return lo <= v && v <= hi; }
};

/// H -/+ z_{alpha/2} gamma sqrt(var).
Interval confidence_interval(double H, double variance, double rate, double alpha);

/// grad H^T Sigma grad H with central differences, step max(1e-6, 1e-6 |theta_i|).
double delta_method_variance(const std::function<double(ParamSpan)>& H, ParamSpan theta,
                             const Eigen::MatrixXd& sigma);
std::vector<double> central_gradient(const std::function<double(ParamSpan)>& H, ParamSpan theta);

struct InferenceReport {
    double H_hat = 0.0;
    double H_se_mc = 0.0;
    std::vector<double> C_hat;
    std::vector<double> C_se;
    std::vector<double> theta_hat;
    std::vector<double> rates;
    std::vector<bool> kept;
    double asy_var = 0.0;
    double rate = 0.0;
    double alpha = 0.05;
    Interval ci;
    std::optional<double> z_hat;
};

/// Plug-in report: H and C at theta_hat from one set of paths, the masked
/// variance C^T Sigma C and the alpha-interval. With `H_true` the normalized
/// error (H_hat - H_true) / (gamma sqrt(var)) is filled in.
InferenceReport plugin_report(const DerivativeSystem& system, const Functional& functional, ParamSpan theta_hat,
                              std::span<const double> rates, const Eigen::MatrixXd& sigma, const TimeGrid& grid,
                              std::size_t paths, std::uint64_t root_seed, double alpha,
                              std::optional<double> H_true = std::nullopt, unsigned threads = 0);
/// Same with Sigma = info^{-1} from the estimator.
InferenceReport plugin_report(const DerivativeSystem& system, const Functional& functional,
                              const EstimatorResult& estimate, const TimeGrid& grid, std::size_t paths,
                              std::uint64_t root_seed, double alpha, std::optional<double> H_true = std::nullopt,
                              unsigned threads = 0);

nlohmann::ordered_json to_json(const InferenceReport& report);

}  // namespace jdmc
