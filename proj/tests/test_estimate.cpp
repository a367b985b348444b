#include <doctest.h>

#include <cmath>
#include <vector>

#include "jdmc/estimate.hpp"
#include "jdmc/rng.hpp"
#include "jdmc/stats.hpp"

using namespace jdmc;

namespace {

Observations bs_observations(double mu, double sigma, std::size_t n, std::uint64_t seed, double noise = -1.0) {
    const double eps = 1.0 / std::sqrt(static_cast<double>(n));
    const auto model = bs_small_noise_model(mu, sigma, noise < 0.0 ? eps : noise, 1.0);
    const TimeGrid g(1.0, n);
    const Path p = euler_path(model, model.nominal, sample_noise(g, model.jump, seed));
    return Observations::from_path(p, eps);
}

}  // namespace

TEST_SUITE("estimate") {
    TEST_CASE("contrast on noise-free data reduces to the log term") {
        const Observations obs = bs_observations(0.2, 1.0, 200, 1, 0.0);
        const auto model = bs_small_noise_model(0.2, 1.0, obs.epsilon, 1.0);
        double logs = 0.0;
        for (std::size_t k = 0; k < 200; ++k) logs += std::log(obs.samples[k] * obs.samples[k]);
        CHECK(contrast(obs, std::vector<double>{0.2, 1.0}, model) == doctest::Approx(logs).epsilon(1e-9));
    }

    TEST_CASE("doubling residuals quadruples the quadratic part") {
        const auto levy = levy_model(0.3, 0.7, 1.0, 0.0);
        const TimeGrid g(1.0, 100);
        const Path p = euler_path(levy, levy.nominal, sample_noise(g, JumpMeasure::none(), 4));
        const Observations obs = Observations::from_path(p, 1.0);
        const double a = levy.drift.value(0.0, levy.nominal);
        Observations doubled = obs;
        for (std::size_t k = 1; k < obs.samples.size(); ++k) {
            const double r = obs.samples[k] - obs.samples[k - 1] - a * g.dt();
            doubled.samples[k] = doubled.samples[k - 1] + a * g.dt() + 2.0 * r;
        }
        const double log_part = 100.0 * std::log(0.49);
        const double q1 = contrast(obs, levy.nominal, levy) - log_part;
        const double q2 = contrast(doubled, levy.nominal, levy) - log_part;
        CHECK(q2 == doctest::Approx(4.0 * q1).epsilon(1e-12));
    }

    TEST_CASE("contrast gradient matches finite differences") {
        const Observations obs = bs_observations(0.2, 1.0, 300, 9);
        const auto model = bs_small_noise_model(0.2, 1.0, obs.epsilon, 1.0);
        const std::vector<double> theta{0.1, 1.3};
        const auto g = contrast_gradient(obs, theta, model);
        for (std::size_t j = 0; j < 2; ++j) {
            std::vector<double> up = theta, down = theta;
            up[j] += 1e-6;
            down[j] -= 1e-6;
            const double fd = (contrast(obs, up, model) - contrast(obs, down, model)) / 2e-6;
            CHECK(g[j] == doctest::Approx(fd).epsilon(1e-5));
        }
    }

    TEST_CASE("contrast minimizer solves the normal equations on OU data") {
        const auto ou = ou_jump_model(1.5, 0.4, 0.0, 0.0, 1.0);
        const TimeGrid g(2.0, 400);
        const Path p = euler_path(ou, ou.nominal, sample_noise(g, ou.jump, 12));
        const Observations obs = Observations::from_path(p, 1.0);
        const EstimatorResult r = minimize_contrast(obs, ou, std::vector<double>{1.0, 1.0, 0.0});
        CHECK(r.converged);
        // weighted least squares with constant weights: mu = -sum x dX / (dt sum x^2)
        double num = 0.0, den = 0.0;
        for (std::size_t k = 1; k < obs.samples.size(); ++k) {
            num += obs.samples[k - 1] * (obs.samples[k] - obs.samples[k - 1]);
            den += obs.samples[k - 1] * obs.samples[k - 1];
        }
        const double mu = -num / (g.dt() * den);
        double rss = 0.0;
        for (std::size_t k = 1; k < obs.samples.size(); ++k) {
            const double res = obs.samples[k] - obs.samples[k - 1] + mu * obs.samples[k - 1] * g.dt();
            rss += res * res;
        }
        CHECK(r.theta[0] == doctest::Approx(mu).epsilon(1e-9));
        CHECK(r.theta[1] == doctest::Approx(std::sqrt(rss / (400 * g.dt()))).epsilon(1e-9));
    }

    TEST_CASE("contrast minimizer equals the closed form on BS data") {
        for (std::uint64_t seed = 0; seed < 5; ++seed) {
            const Observations obs = bs_observations(0.2, 1.0, 500, derive_seed(77, seed));
            const auto model = bs_small_noise_model(0.2, 1.0, obs.epsilon, 1.0);
            const EstimatorResult closed = bs_closed_form(obs);
            const EstimatorResult numeric = minimize_contrast(obs, model, std::vector<double>{0.2, 1.0});
            CHECK(numeric.converged);
            CHECK(numeric.iterations <= 3);
            CHECK(std::fabs(numeric.theta[0] - closed.theta[0]) < 1e-10);
            CHECK(std::fabs(numeric.theta[1] - closed.theta[1]) < 1e-10);
            CHECK(numeric.contrast_value == doctest::Approx(closed.contrast_value).epsilon(1e-12));
            const EstimatorResult far = minimize_contrast(obs, model, std::vector<double>{-3.0, 4.0});
            CHECK(far.converged);
            CHECK(std::fabs(far.theta[0] - closed.theta[0]) < 1e-10);
            CHECK(std::fabs(far.theta[1] - closed.theta[1]) < 1e-10);
        }
    }

    TEST_CASE("closed form: degenerate data") {
        const TimeGrid g(1.0, 10);
        const Observations flat{g, std::vector<double>(11, 1.0), 0.1};
        const EstimatorResult r = bs_closed_form(flat);
        CHECK(r.theta[0] == 0.0);
        CHECK(r.theta[1] == 0.0);

        const Observations noiseless = bs_observations(0.2, 1.0, 500, 3, 0.0);
        const EstimatorResult d = bs_closed_form(noiseless);
        CHECK(d.theta[0] == doctest::Approx(0.2).epsilon(1e-12));
        CHECK(d.theta[1] < 1e-6);

        Observations bad = flat;
        bad.samples[4] = -1.0;
        CHECK_THROWS_AS(bs_closed_form(bad), std::domain_error);
        Observations short_obs = flat;
        short_obs.samples.pop_back();
        CHECK_THROWS_AS(bs_closed_form(short_obs), std::invalid_argument);
    }

    TEST_CASE("closed form: residual identity, rates and information") {
        const Observations obs = bs_observations(0.2, 1.0, 500, 5);
        const EstimatorResult r = bs_closed_form(obs);
        double returns = 0.0;
        for (std::size_t k = 1; k < obs.samples.size(); ++k) {
            returns += (obs.samples[k] - obs.samples[k - 1]) / obs.samples[k - 1];
        }
        CHECK(returns - r.theta[0] == doctest::Approx(0.0).scale(1.0).epsilon(1e-14));
        CHECK(r.rates[0] == doctest::Approx(1.0 / std::sqrt(500.0)));
        CHECK(r.rates[1] == doctest::Approx(1.0 / std::sqrt(500.0)));
        const double s2 = r.theta[1] * r.theta[1];
        CHECK(r.info(0, 0) == doctest::Approx(1.0 / s2));
        CHECK(r.info(1, 1) == doctest::Approx(2.0 / s2));
        CHECK(r.info(0, 1) == 0.0);
    }

    TEST_CASE("fisher information on the limit path") {
        const TimeGrid g(1.0, 500);
        const auto bs1 = bs_small_noise_model(0.2, 1.0, 0.1, 1.0);
        const Eigen::MatrixXd I1 = fisher_info(bs1, bs1.nominal, g);
        CHECK(I1(0, 0) == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(I1(1, 1) == doctest::Approx(2.0).epsilon(1e-12));
        CHECK(I1(0, 1) == 0.0);

        const auto bs2 = bs_small_noise_model(0.2, 2.0, 0.1, 1.0);
        const Eigen::MatrixXd I2 = fisher_info(bs2, bs2.nominal, g);
        CHECK(I2(0, 0) == doctest::Approx(0.25).epsilon(1e-12));
        CHECK(I2(1, 1) == doctest::Approx(0.5).epsilon(1e-12));

        JumpDiffusionModel steep = bs1;
        steep.drift.dtheta = [](double x, ParamSpan, std::span<double> g2) {
            g2[0] = 2.0 * x;
            g2[1] = 0.0;
        };
        CHECK(fisher_info(steep, steep.nominal, g)(0, 0) == doctest::Approx(4.0 * I1(0, 0)));

        const auto flat = bs_small_noise_model(0.2, 1.0, 0.0, 1.0);
        CHECK_THROWS_AS(fisher_info(flat, flat.nominal, g), ModelError);
    }

    TEST_CASE("drift information at sigma = 2 matches the simulated spread of the estimator") {
        // eps^{-1}(mu_hat - mu) has variance sigma^2 T, the inverse of the drift information.
        const std::size_t n = 500;
        std::vector<double> z;
        for (std::uint64_t seed = 0; seed < 300; ++seed) {
            const Observations obs = bs_observations(0.2, 2.0, n, derive_seed(2024, seed));
            z.push_back((bs_closed_form(obs).theta[0] - 0.2) / obs.epsilon);
        }
        const double var = summarize(z).variance;
        CHECK(var > 3.0);
        CHECK(var < 5.2);
    }
}
