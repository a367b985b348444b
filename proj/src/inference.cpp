#include "jdmc/inference.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "jdmc/normal.hpp"
#include "jdmc/parallel.hpp"
#include "jdmc/rng.hpp"
#include "jdmc/stats.hpp"

namespace jdmc {

namespace {

void require_paths(std::size_t paths) {
    if (paths < 100) throw std::invalid_argument("Monte Carlo estimates need at least 100 paths");
}

template <class Body>
void for_each_path(std::size_t paths, std::uint64_t root_seed, unsigned threads, Body&& body) {
    parallel_for(paths, threads, [&](std::size_t i) {
        const std::uint64_t seed = derive_seed(root_seed, i);
        try {
            body(i, seed);
        } catch (const SimulationError& e) {
            throw SimulationError("path " + std::to_string(i) + " (seed " + std::to_string(seed) + "): " + e.what(),
                                  e.step());
        }
    });
}

VectorEstimate column_estimates(const std::vector<double>& table, std::size_t cols) {
    VectorEstimate out;
    for (const SampleSummary& s : summarize_columns(table, cols)) {
        out.mean.push_back(s.mean);
        out.stderr_mean.push_back(s.stderr_mean);
    }
    return out;
}

// (1 - e^{-a T}) / a with the a -> 0 limit T.
double decay_integral(double a, double horizon) {
    if (a == 0.0) return horizon;
    return -std::expm1(-a * horizon) / a;
}

}  // namespace

MonteCarloEstimate plugin_H(const JumpDiffusionModel& model, const Functional& functional, ParamSpan theta,
                            const TimeGrid& grid, std::size_t paths, std::uint64_t root_seed, unsigned threads) {
    require_paths(paths);
    model.check_params(theta);
    std::vector<double> values(paths);
    for_each_path(paths, root_seed, threads, [&](std::size_t i, std::uint64_t seed) {
        const NoiseBundle noise = sample_noise(grid, model.jump, seed);
        values[i] = functional.eval(euler_path(model, theta, noise));
    });
    const SampleSummary s = summarize(values);
    return {s.mean, s.stderr_mean};
}

PluginEstimate plugin_H_and_C(const DerivativeSystem& system, const Functional& functional, ParamSpan theta,
                              const TimeGrid& grid, std::size_t paths, std::uint64_t root_seed, unsigned threads) {
    require_paths(paths);
    const JumpDiffusionModel& model = system.base();
    model.check_params(theta);
    const std::size_t p = system.dimension();
    std::vector<double> values(paths);
    std::vector<double> gradients(paths * p);
    for_each_path(paths, root_seed, threads, [&](std::size_t i, std::uint64_t seed) {
        const NoiseBundle noise = sample_noise(grid, model.jump, seed);
        const PathWithDerivative path = euler_path_with_derivative(system, theta, noise);
        values[i] = functional.eval(path.x);
        pathwise_G_into(functional, path.x, path.y, std::span<double>(gradients.data() + i * p, p));
    });
    const SampleSummary s = summarize(values);
    return {{s.mean, s.stderr_mean}, column_estimates(gradients, p)};
}

VectorEstimate estimate_C(const DerivativeSystem& system, const Functional& functional, ParamSpan theta,
                          const TimeGrid& grid, std::size_t paths, std::uint64_t root_seed, unsigned threads) {
    return plugin_H_and_C(system, functional, theta, grid, paths, root_seed, threads).C;
}

double bs_call_closed_form(ParamSpan theta, double epsilon, double x, double strike, double rate, double horizon) {
    if (theta.size() != 2) throw std::invalid_argument("bs_call_closed_form: theta must be (mu, sigma)");
    if (!(strike >= 0.0)) throw std::invalid_argument("bs_call_closed_form: strike must be >= 0");
    if (!(x > 0.0) || !(horizon > 0.0)) throw std::invalid_argument("bs_call_closed_form: need x > 0 and T > 0");
    const double mu = theta[0];
    const double vol = std::fabs(epsilon * theta[1]) * std::sqrt(horizon);
    const double growth = std::exp((mu - rate) * horizon);
    if (strike == 0.0) return x * growth;
    if (vol == 0.0) return std::exp(-rate * horizon) * std::max(x * std::exp(mu * horizon) - strike, 0.0);
    const double d1 = (std::log(x / strike) + mu * horizon + 0.5 * vol * vol) / vol;
    const double d2 = d1 - vol;
    return growth * (x * normal_cdf(d1) - strike * std::exp(-mu * horizon) * normal_cdf(d2));
}

double ou_mean(double mu, double eta, double intensity, double x, double t) {
    if (!(mu > 0.0)) throw std::invalid_argument("ou_mean: mu must be positive");
    const double decay = std::exp(-mu * t);
    return x * decay + intensity * eta / mu * (1.0 - decay);
}

double ou_discounted_closed_form(double mu, double eta, double intensity, double discount, double x,
                                 double horizon) {
    if (!(mu > 0.0)) throw std::invalid_argument("ou_discounted_closed_form: mu must be positive");
    if (!(horizon > 0.0)) throw std::invalid_argument("ou_discounted_closed_form: horizon must be positive");
    const double both = decay_integral(mu + discount, horizon);
    return x * both + intensity * eta / mu * (decay_integral(discount, horizon) - both);
}

AsymptoticVariance asymptotic_variance(std::span<const double> C, const Eigen::MatrixXd& sigma,
                                       std::span<const double> rates) {
    const auto p = static_cast<Eigen::Index>(C.size());
    if (sigma.rows() != p || sigma.cols() != p || rates.size() != C.size()) {
        throw std::invalid_argument("asymptotic_variance: dimension mismatch");
    }
    if (C.empty()) throw std::invalid_argument("asymptotic_variance: empty C");
    const double magnitude = std::max(1.0, sigma.cwiseAbs().maxCoeff());
    if ((sigma - sigma.transpose()).cwiseAbs().maxCoeff() > 1e-10 * magnitude) {
        throw std::invalid_argument("asymptotic_variance: Sigma must be symmetric");
    }
    for (double r : rates) {
        if (!(r > 0.0) || !std::isfinite(r)) throw std::invalid_argument("asymptotic_variance: rates must be positive");
    }

    AsymptoticVariance out;
    out.rate = *std::max_element(rates.begin(), rates.end());
    out.kept.resize(C.size());
    Eigen::VectorXd c(p);
    for (Eigen::Index i = 0; i < p; ++i) {
        const auto k = static_cast<std::size_t>(i);
        out.kept[k] = std::fabs(rates[k] - out.rate) <= 1e-12 * out.rate;
        c(i) = out.kept[k] ? C[k] : 0.0;
    }

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(sigma, Eigen::EigenvaluesOnly);
    const double scale = std::max(1.0, eig.eigenvalues().cwiseAbs().maxCoeff());
    if (eig.eigenvalues().minCoeff() < -1e-12 * scale) {
        throw std::invalid_argument("asymptotic_variance: Sigma must be positive semi-definite");
    }
    out.value = std::max(0.0, c.dot(sigma * c));
    return out;
}

double asymptotic_variance(std::span<const double> C, const Eigen::MatrixXd& sigma) {
    const std::vector<double> equal(C.size(), 1.0);
    return asymptotic_variance(C, sigma, equal).value;
}

Eigen::MatrixXd covariance_from_info(const Eigen::MatrixXd& info) {
    if (info.rows() != info.cols()) throw std::invalid_argument("covariance_from_info: matrix must be square");
    if (!info.allFinite()) throw std::domain_error("covariance_from_info: information matrix is not finite");
    Eigen::LLT<Eigen::MatrixXd> llt(info);
    if (llt.info() != Eigen::Success) {
        throw std::domain_error("covariance_from_info: information matrix is not positive definite");
    }
    return llt.solve(Eigen::MatrixXd::Identity(info.rows(), info.cols()));
}

Interval confidence_interval(double H, double variance, double rate, double alpha) {
    if (!(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument("confidence_interval: alpha must be in (0, 1)");
    if (!(variance >= 0.0)) throw std::invalid_argument("confidence_interval: variance must be >= 0");
    if (!(rate >= 0.0)) throw std::invalid_argument("confidence_interval: rate must be >= 0");
    const double half = normal_upper_quantile(0.5 * alpha) * rate * std::sqrt(variance);
    return {H - half, H + half};
}

std::vector<double> central_gradient(const std::function<double(ParamSpan)>& H, ParamSpan theta) {
    std::vector<double> grad(theta.size());
    std::vector<double> point(theta.begin(), theta.end());
    for (std::size_t i = 0; i < theta.size(); ++i) {
        const double h = std::max(1e-6, 1e-6 * std::fabs(theta[i]));
        point[i] = theta[i] + h;
        const double up = H(point);
        point[i] = theta[i] - h;
        const double down = H(point);
        point[i] = theta[i];
        if (!std::isfinite(up) || !std::isfinite(down)) {
            throw std::domain_error("delta method: H is not finite near theta in coordinate " + std::to_string(i));
        }
        grad[i] = (up - down) / (2.0 * h);
    }
    return grad;
}

double delta_method_variance(const std::function<double(ParamSpan)>& H, ParamSpan theta,
                             const Eigen::MatrixXd& sigma) {
    const std::vector<double> grad = central_gradient(H, theta);
    return asymptotic_variance(grad, sigma);
}

InferenceReport plugin_report(const DerivativeSystem& system, const Functional& functional, ParamSpan theta_hat,
                              std::span<const double> rates, const Eigen::MatrixXd& sigma, const TimeGrid& grid,
                              std::size_t paths, std::uint64_t root_seed, double alpha,
                              std::optional<double> H_true, unsigned threads) {
    const PluginEstimate est = plugin_H_and_C(system, functional, theta_hat, grid, paths, root_seed, threads);
    const AsymptoticVariance var = asymptotic_variance(est.C.mean, sigma, rates);

    InferenceReport report;
    report.H_hat = est.H.mean;
    report.H_se_mc = est.H.stderr_mean;
    report.C_hat = est.C.mean;
    report.C_se = est.C.stderr_mean;
    report.theta_hat.assign(theta_hat.begin(), theta_hat.end());
    report.rates.assign(rates.begin(), rates.end());
    report.kept = var.kept;
    report.asy_var = var.value;
    report.rate = var.rate;
    report.alpha = alpha;
    report.ci = confidence_interval(report.H_hat, var.value, var.rate, alpha);
    if (H_true && var.value > 0.0) report.z_hat = (report.H_hat - *H_true) / (var.rate * std::sqrt(var.value));
    return report;
}

InferenceReport plugin_report(const DerivativeSystem& system, const Functional& functional,
                              const EstimatorResult& estimate, const TimeGrid& grid, std::size_t paths,
                              std::uint64_t root_seed, double alpha, std::optional<double> H_true,
                              unsigned threads) {
    return plugin_report(system, functional, estimate.theta, estimate.rates, covariance_from_info(estimate.info),
                         grid, paths, root_seed, alpha, H_true, threads);
}

nlohmann::ordered_json to_json(const InferenceReport& report) {
    nlohmann::ordered_json j;
    j["H_hat"] = report.H_hat;
    j["H_se_mc"] = report.H_se_mc;
    j["C_hat"] = report.C_hat;
    j["C_se"] = report.C_se;
    j["theta_hat"] = report.theta_hat;
    j["rates"] = report.rates;
    j["kept"] = report.kept;
    j["asy_var"] = report.asy_var;
    j["rate"] = report.rate;
    j["alpha"] = report.alpha;
    j["ci"] = {report.ci.lo, report.ci.hi};
    j["z_hat"] = report.z_hat ? nlohmann::ordered_json(*report.z_hat) : nlohmann::ordered_json(nullptr);
    return j;
}

}  // namespace jdmc
