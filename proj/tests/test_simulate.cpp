#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "jdmc/derivative.hpp"
#include "jdmc/rng.hpp"
#include "jdmc/simulate.hpp"
#include "jdmc/stats.hpp"

using namespace jdmc;

TEST_SUITE("simulate") {
    TEST_CASE("time grid") {
        const TimeGrid g(2.0, 4);
        CHECK(g.dt() == 0.5);
        CHECK(g.time(3) == 1.5);
        CHECK(g.step_of(0.5) == 0);
        CHECK(g.step_of(0.50001) == 1);
        CHECK(g.step_of(2.0) == 3);
        CHECK(g.step_of(1e-9) == 0);
        CHECK_THROWS_AS(TimeGrid(0.0, 4), std::invalid_argument);
        CHECK_THROWS_AS(TimeGrid(1.0, 0), std::invalid_argument);
    }

    TEST_CASE("noise bundles are reproducible and well formed") {
        const TimeGrid g(3.0, 300);
        const JumpMeasure jumps = JumpMeasure::compound_poisson(2.0, JumpSizeLaw::normal, 0.5, 1.0);
        const NoiseBundle a = sample_noise(g, jumps, 99);
        CHECK(a == sample_noise(g, jumps, 99));
        CHECK_FALSE(a == sample_noise(g, jumps, 100));
        CHECK(a.brownian_increments.size() == 300);
        CHECK(a.jump_times.size() == a.jump_sizes.size());
        CHECK(std::is_sorted(a.jump_times.begin(), a.jump_times.end()));
        for (double t : a.jump_times) CHECK((t > 0.0 && t <= 3.0));

        NoiseBundle reused = sample_noise(g, JumpMeasure::none(), 5);
        sample_noise_into(reused, g, jumps, 99);
        CHECK(reused == a);
    }

    TEST_CASE("jump counts and increments have the right laws") {
        const TimeGrid g(1.0, 50);
        const JumpMeasure jumps = JumpMeasure::compound_poisson(3.0, JumpSizeLaw::exponential, 2.0);
        std::vector<double> counts, sizes, w;
        for (std::uint64_t i = 0; i < 4000; ++i) {
            const NoiseBundle n = sample_noise(g, jumps, derive_seed(1, i));
            counts.push_back(static_cast<double>(n.jump_times.size()));
            sizes.insert(sizes.end(), n.jump_sizes.begin(), n.jump_sizes.end());
            double total = 0.0;
            for (double dw : n.brownian_increments) total += dw;
            w.push_back(total);
            const auto per_step = n.jump_counts_per_step();
            std::size_t sum = 0;
            for (auto c : per_step) sum += c;
            REQUIRE(sum == n.jump_times.size());
        }
        const SampleSummary c = summarize(counts), s = summarize(sizes), ws = summarize(w);
        CHECK(std::fabs(c.mean - 3.0) < 4 * c.stderr_mean);
        CHECK(c.variance == doctest::Approx(3.0).epsilon(0.1));
        CHECK(std::fabs(s.mean - 2.0) < 4 * s.stderr_mean);
        CHECK(ws.variance == doctest::Approx(1.0).epsilon(0.1));
    }

    TEST_CASE("euler matches a hand-rolled recursion on the same noise") {
        const auto bs = bs_small_noise_model(0.3, 0.8, 0.2, 1.5);
        const TimeGrid g(1.0, 100);
        const NoiseBundle noise = sample_noise(g, bs.jump, 17);
        const Path path = euler_path(bs, bs.nominal, noise);
        double x = 1.5;
        CHECK(path.values[0] == x);
        for (std::size_t k = 0; k < 100; ++k) {
            x = x + 0.3 * x * g.dt() + 0.2 * 0.8 * x * noise.brownian_increments[k];
            CHECK(path.values[k + 1] == doctest::Approx(x).epsilon(1e-14));
        }
    }

    TEST_CASE("deterministic limit: X and Y follow the discrete ODE") {
        const auto bs = bs_small_noise_model(0.2, 1.0, 0.0, 1.0);
        const DerivativeSystem sys = build_derivative_system(bs);
        const TimeGrid g(1.0, 200);
        const NoiseBundle noise = sample_noise(g, bs.jump, 3);
        const PathWithDerivative p = euler_path_with_derivative(sys, bs.nominal, noise);
        const double dt = g.dt();
        for (std::size_t k = 0; k <= 200; ++k) {
            const double growth = std::pow(1.0 + 0.2 * dt, static_cast<double>(k));
            CHECK(p.x.values[k] == doctest::Approx(growth).epsilon(1e-12));
            // d/dmu (1 + mu dt)^k = k dt (1 + mu dt)^{k-1}
            const double dmu = k == 0 ? 0.0 : k * dt * std::pow(1.0 + 0.2 * dt, static_cast<double>(k) - 1.0);
            CHECK(p.y.at(k)[0] == doctest::Approx(dmu).epsilon(1e-12));
            CHECK(p.y.at(k)[1] == 0.0);
        }
    }

    TEST_CASE("jumps inside a step use the left state") {
        JumpDiffusionModel m = ou_jump_model(1.0, 0.0, 0.5, 1.0, 2.0, 0.0);
        m.jump_kernel.slope = Coefficient::zero();
        m.jump_kernel.level.value = [](double x, ParamSpan) { return x; };  // c = x: doubles the left state
        const TimeGrid g(1.0, 4);
        NoiseBundle noise{g, 0, std::vector<double>(4, 0.0), {0.3, 0.4}, {0.0, 0.0}};
        const Path p = euler_path(m, m.nominal, noise);
        // Step 1 covers (0.25, 0.5]: both jumps add X_1 while drift and compensator are evaluated at X_1.
        const double x1 = p.values[1];
        const double expected = x1 + (-1.0 * x1 + 0.5 - x1) * 0.25 + 2.0 * x1;
        CHECK(p.values[2] == doctest::Approx(expected));
    }

    TEST_CASE("blow-ups name the step") {
        JumpDiffusionModel m = bs_small_noise_model(0.2, 1.0, 0.0, 1.0);
        m.drift.value = [](double x, ParamSpan) { return x * x * 1e100; };
        const TimeGrid g(1.0, 10);
        const NoiseBundle noise = sample_noise(g, m.jump, 1);
        try {
            euler_path(m, m.nominal, noise);
            FAIL("expected SimulationError");
        } catch (const SimulationError& e) {
            CHECK(e.step() < 10);
            CHECK(std::string(e.what()).find("step") != std::string::npos);
        }
    }

    TEST_CASE("levy: derivative process is (t, W_t, S_t) and the coupling is exact") {
        const auto levy = levy_model(0.1, 0.5, 2.0, 0.0);
        const DerivativeSystem sys = build_derivative_system(levy);
        const TimeGrid g(1.0, 100);
        for (std::uint64_t seed = 0; seed < 20; ++seed) {
            const NoiseBundle noise = sample_noise(g, levy.jump, seed);
            const PathWithDerivative p = euler_path_with_derivative(sys, levy.nominal, noise);
            const auto counts = noise.jump_counts_per_step();
            double w = 0.0, s = 0.0;
            std::size_t next = 0;
            for (std::size_t k = 0; k < 100; ++k) {
                w += noise.brownian_increments[k];
                for (std::size_t c = 0; c < counts[k]; ++c) s += noise.jump_sizes[next++];
                const auto y = p.y.at(k + 1);
                CHECK(y[0] == doctest::Approx(g.time(k + 1)).epsilon(1e-12));
                CHECK(y[1] == doctest::Approx(w).epsilon(1e-12));
                CHECK(y[2] == doctest::Approx(s).scale(1.0).epsilon(1e-12));
            }
            const std::vector<double> u{0.3, -0.2, 0.7};
            CHECK(coupling_residual_sup(coupled_paths(sys, levy.nominal, u, noise), u) < 1e-10);
        }
    }

    TEST_CASE("ou: euler derivative converges to the explicit solution") {
        const auto ou = ou_jump_model(1.0, 0.3, 0.5, 1.0, 1.0);
        const DerivativeSystem sys = build_derivative_system(ou);
        double previous = 0.0;
        for (std::size_t n : {250, 500, 1000, 2000}) {
            const TimeGrid g(1.0, n);
            double worst = 0.0;
            for (std::uint64_t seed = 0; seed < 50; ++seed) {
                const NoiseBundle noise = sample_noise(g, ou.jump, derive_seed(n, seed));
                const PathWithDerivative p = euler_path_with_derivative(sys, ou.nominal, noise);
                const DerivativePath exact = ou_derivative_closed_form(ou.nominal, p.x, noise, 1.0);
                for (std::size_t i = 0; i < exact.values.size(); ++i) {
                    worst = std::max(worst, std::fabs(exact.values[i] - p.y.values[i]));
                }
            }
            CHECK(worst < 10.0 * g.dt());
            if (previous > 0.0) CHECK(worst < 0.75 * previous);
            previous = worst;
        }
    }

    TEST_CASE("coupled paths share noise and validate the shift") {
        const auto bs = bs_small_noise_model(0.2, 1.0, 0.1, 1.0);
        const DerivativeSystem sys = build_derivative_system(bs);
        const TimeGrid g(1.0, 50);
        const NoiseBundle noise = sample_noise(g, bs.jump, 8);
        const std::vector<double> zero{0.0, 0.0};
        const CoupledPaths same = coupled_paths(sys, bs.nominal, zero, noise);
        CHECK(same.shifted.values == same.base.values);
        CHECK(coupling_residual_sup(same, zero) == 0.0);
        const std::vector<double> out_of_box{0.0, -2.0};
        CHECK_THROWS_AS(coupled_paths(sys, bs.nominal, out_of_box, noise), ModelError);
    }

    TEST_CASE("sup-norm moments validate their inputs") {
        std::vector<double> r(100, 2.0);
        CHECK(sup_norm_moment(r, 2).mean == 4.0);
        CHECK(sup_norm_moment(r, 4).mean == 16.0);
        CHECK_THROWS_AS(sup_norm_moment(r, 3), std::invalid_argument);
        r.resize(99);
        CHECK_THROWS_AS(sup_norm_moment(r, 2), std::invalid_argument);
    }

    TEST_CASE("order check is independent of the thread count") {
        const auto bs = bs_small_noise_model(0.2, 1.0, 0.3, 1.0);
        const DerivativeSystem sys = build_derivative_system(bs);
        const TimeGrid g(1.0, 50);
        const std::vector<double> mags{0.1, 0.05};
        const auto one = order_check(sys, bs.nominal, 0, mags, g, 200, 5, 2, 1);
        const auto four = order_check(sys, bs.nominal, 0, mags, g, 200, 5, 2, 4);
        for (std::size_t i = 0; i < mags.size(); ++i) {
            CHECK(one[i].moment.mean == four[i].moment.mean);
            CHECK(one[i].moment.stderr_mean == four[i].moment.stderr_mean);
        }
        CHECK(one[0].moment.mean > one[1].moment.mean);
    }
}
