#include <doctest.h>

#include <cmath>
#include <vector>

#include "jdmc/derivative.hpp"
#include "jdmc/model.hpp"

using namespace jdmc;

namespace {

// Central difference of a coefficient in theta_j, for checking hand-written gradients.
double fd_theta(const Coefficient& f, double x, std::vector<double> theta, std::size_t j) {
    const double h = 1e-6;
    theta[j] += h;
    const double up = f.value(x, theta);
    theta[j] -= 2 * h;
    return (up - f.value(x, theta)) / (2 * h);
}

double fd_x(const Coefficient& f, double x, const std::vector<double>& theta) {
    const double h = 1e-6;
    return (f.value(x + h, theta) - f.value(x - h, theta)) / (2 * h);
}

void check_gradients(const JumpDiffusionModel& m, const std::vector<double>& theta) {
    const std::size_t p = m.dimension();
    std::vector<double> g(p);
    for (const Coefficient* f : {&m.drift, &m.diffusion, &m.jump_kernel.level, &m.jump_kernel.slope}) {
        for (double x : {-2.0, -0.3, 0.4, 1.7}) {
            f->dtheta(x, theta, g);
            for (std::size_t j = 0; j < p; ++j) CHECK(g[j] == doctest::Approx(fd_theta(*f, x, theta, j)).epsilon(1e-6));
            CHECK(f->dx(x, theta) == doctest::Approx(fd_x(*f, x, theta)).epsilon(1e-6));
        }
    }
}

}  // namespace

TEST_SUITE("model") {
    TEST_CASE("builders expose consistent metadata") {
        const auto bs = bs_small_noise_model(0.2, 1.0, 0.05, 1.0);
        CHECK(bs.dimension() == 2);
        CHECK(bs.roles == std::vector<ParamRole>{ParamRole::drift, ParamRole::diffusion});
        CHECK(bs.nominal == ParamVector{0.2, 1.0});
        CHECK(bs.drift.value(2.0, bs.nominal) == doctest::Approx(0.4));
        CHECK(bs.diffusion.value(2.0, bs.nominal) == doctest::Approx(0.1));
        CHECK_FALSE(bs.jump.active());

        const auto ou = ou_jump_model(1.0, 0.3, 0.5, 2.0, 1.0);
        CHECK(ou.dimension() == 3);
        CHECK(ou.jump.intensity == 2.0);
        // drift -mu x + lambda eta, compensator lambda (eta + slope * 0)
        CHECK(ou.drift.value(1.0, ou.nominal) == doctest::Approx(-1.0 + 1.0));
        CHECK(ou.jump_compensator(1.0, ou.nominal) == doctest::Approx(1.0));

        const auto levy = levy_model(0.1, 0.5, 2.0, 0.0);
        CHECK(levy.jump.law == JumpSizeLaw::exponential);
        CHECK(levy.jump_kernel(0.0, 1.5, levy.nominal) == doctest::Approx(3.0));
        // the compensated drift is mu
        CHECK(levy.drift.value(0.0, levy.nominal) - levy.jump_compensator(0.0, levy.nominal) == doctest::Approx(0.1));
    }

    TEST_CASE("hand-written coefficient derivatives agree with finite differences") {
        check_gradients(bs_small_noise_model(0.2, 1.0, 0.3, 1.0), {0.2, 1.0});
        check_gradients(ou_jump_model(1.0, 0.3, 0.5, 1.0, 1.0), {1.0, 0.3, 0.5});
        check_gradients(levy_model(0.1, 0.5, 2.0, 0.0), {0.1, 0.5, 2.0});
    }

    TEST_CASE("builders reject invalid structural inputs") {
        CHECK_THROWS_AS(bs_small_noise_model(0.2, 0.0, 0.1, 1.0), ModelError);
        CHECK_THROWS_AS(bs_small_noise_model(0.2, 1.0, -0.1, 1.0), ModelError);
        CHECK_THROWS_AS(bs_small_noise_model(0.2, 1.0, 0.1, 0.0), ModelError);
        CHECK_THROWS_AS(ou_jump_model(0.0, 0.3, 0.5, 1.0, 1.0), ModelError);
        CHECK_THROWS_AS(ou_jump_model(1.0, 0.3, 0.5, -1.0, 1.0), ModelError);
        CHECK_THROWS_AS(levy_model(0.0, 1.0, 0.0, 0.0), ModelError);
        CHECK_THROWS_AS(JumpMeasure::compound_poisson(1.0, JumpSizeLaw::exponential, -1.0), ModelError);
        CHECK_THROWS_AS(ParamVector({1.0, NAN}), std::invalid_argument);
    }

    TEST_CASE("zero noise scale is a valid deterministic limit") {
        const auto bs = bs_small_noise_model(0.2, 1.0, 0.0, 1.0);
        CHECK(bs.diffusion.value(3.0, bs.nominal) == 0.0);
    }

    TEST_CASE("parameter checks enforce size and box") {
        const auto bs = bs_small_noise_model(0.2, 1.0, 0.1, 1.0);
        CHECK_NOTHROW(bs.check_params(std::vector<double>{0.0, 2.0}));
        CHECK_THROWS_AS(bs.check_params(std::vector<double>{0.0}), ModelError);
        CHECK_THROWS_AS(bs.check_params(std::vector<double>{11.0, 1.0}), ModelError);
        CHECK_THROWS_AS(bs.check_params(std::vector<double>{0.0, 0.0}), ModelError);
    }

    TEST_CASE("growth spot checks pass for the shipped models") {
        const std::vector<ParamVector> bs_thetas{{0.2, 1.0}, {-1.0, 3.0}};
        const auto bs = bs_small_noise_model(0.2, 1.0, 0.1, 1.0);
        CHECK(validate_model(bs, probe_grid(bs_thetas, 50, 100.0, 5.0)).passed());

        const std::vector<ParamVector> ou_thetas{{1.0, 0.3, 0.5}, {5.0, 2.0, -1.0}};
        const auto ou = ou_jump_model(1.0, 0.3, 0.5, 1.0, 1.0);
        const ValidationReport r = validate_model(ou, probe_grid(ou_thetas, 50, 100.0, 5.0));
        CHECK(r.passed());
        CHECK(r.probes_checked == 100);

        const std::vector<ParamVector> levy_thetas{{0.1, 0.5, 2.0}};
        CHECK(validate_model(levy_model(0.1, 0.5, 2.0, 0.0), probe_grid(levy_thetas, 50, 100.0, 5.0)).passed());
    }

    TEST_CASE("growth violations are reported, non-finite coefficients throw") {
        JumpDiffusionModel m = bs_small_noise_model(0.2, 1.0, 0.1, 1.0);
        m.drift.value = [](double x, ParamSpan) { return x * x; };
        const std::vector<ProbePoint> probes{{0.5, 0.0, {0.2, 1.0}}, {50.0, 0.0, {0.2, 1.0}}};
        const ValidationReport r = validate_model(m, probes);
        REQUIRE(r.violations.size() == 1);
        CHECK(r.violations[0].probe_index == 1);
        CHECK(r.violations[0].coefficient == "a+b");

        m.diffusion.value = [](double x, ParamSpan) { return std::log(x); };
        const std::vector<ProbePoint> bad{{-1.0, 0.0, {0.2, 1.0}}};
        try {
            validate_model(m, bad);
            FAIL("expected ModelError");
        } catch (const ModelError& e) {
            CHECK(std::string(e.what()).find("coefficient b") != std::string::npos);
            CHECK(std::string(e.what()).find("probe #0") != std::string::npos);
        }
    }

    TEST_CASE("derivative system needs every coefficient derivative") {
        JumpDiffusionModel m = ou_jump_model(1.0, 0.3, 0.5, 1.0, 1.0);
        CHECK_NOTHROW(build_derivative_system(m));
        m.diffusion.dtheta = nullptr;
        try {
            build_derivative_system(m);
            FAIL("expected ModelError");
        } catch (const ModelError& e) {
            CHECK(std::string(e.what()).find("theta-gradient of b") != std::string::npos);
        }
    }

    TEST_CASE("derivative coefficients are linear in y") {
        const auto ou = ou_jump_model(1.0, 0.3, 0.5, 1.0, 1.0);
        const DerivativeSystem sys = build_derivative_system(ou);
        std::vector<double> y{0.3, -0.2, 1.1}, out(3);
        sys.drift(0.7, y, ou.nominal, out);
        // a_x y + a_theta = -mu y + (-x, 0, lambda)
        CHECK(out[0] == doctest::Approx(-0.3 - 0.7));
        CHECK(out[1] == doctest::Approx(0.2));
        CHECK(out[2] == doctest::Approx(-1.1 + 1.0));
        sys.jump(0.7, y, 2.5, ou.nominal, out);
        CHECK(out[0] == 0.0);
        CHECK(out[2] == 1.0);
    }
}
