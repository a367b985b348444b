#include "jdmc/model.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace jdmc {

namespace {

bool all_finite(ParamSpan values) {
    return std::all_of(values.begin(), values.end(), [](double v) { return std::isfinite(v); });
}

void fill(std::span<double> out, double value) { std::fill(out.begin(), out.end(), value); }

Coefficient constant_coefficient(double c) {
    return {[c](double, ParamSpan) { return c; }, [](double, ParamSpan) { return 0.0; },
            [](double, ParamSpan, std::span<double> g) { fill(g, 0.0); }};
}

std::string describe_probe(std::size_t index, const ProbePoint& probe) {
    std::ostringstream os;
    os << "probe #" << index << " (x=" << probe.x << ", z=" << probe.z << ", theta=[";
    for (std::size_t i = 0; i < probe.theta.size(); ++i) os << (i ? "," : "") << probe.theta[i];
    os << "])";
    return os.str();
}

}  // namespace

ParamVector::ParamVector(std::vector<double> values) : values_(std::move(values)) {
    if (!all_finite(values_)) throw std::invalid_argument("ParamVector: entries must be finite");
}

ParamVector::ParamVector(std::initializer_list<double> values) : ParamVector(std::vector<double>(values)) {}

ParamVector ParamVector::shifted(ParamSpan direction, double scale) const {
    if (direction.size() != values_.size()) throw std::invalid_argument("ParamVector::shifted: dimension mismatch");
    std::vector<double> out(values_);
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += scale * direction[i];
    return ParamVector(std::move(out));
}

bool ParamBox::contains(ParamSpan theta) const noexcept {
    if (theta.size() != lower.size() || theta.size() != upper.size()) return false;
    for (std::size_t i = 0; i < theta.size(); ++i) {
        if (!(theta[i] >= lower[i] && theta[i] <= upper[i])) return false;
    }
    return true;
}

double ParamBox::clamp(std::size_t i, double value) const { return std::clamp(value, lower.at(i), upper.at(i)); }

Coefficient Coefficient::zero() { return constant_coefficient(0.0); }

JumpMeasure JumpMeasure::compound_poisson(double intensity, JumpSizeLaw law, double mean, double sd) {
    JumpMeasure m{intensity, law, mean, sd};
    m.validate();
    return m;
}

void JumpMeasure::validate() const {
    if (!std::isfinite(intensity) || intensity < 0.0) throw ModelError("jump intensity must be finite and >= 0");
    if (!std::isfinite(mean) || !std::isfinite(sd) || sd < 0.0) {
        throw ModelError("jump size moments must be finite with sd >= 0");
    }
    if (law == JumpSizeLaw::exponential && intensity > 0.0 && !(mean > 0.0)) {
        throw ModelError("exponential jump sizes need a positive mean");
    }
}

double JumpDiffusionModel::jump_compensator(double x, ParamSpan theta) const {
    if (!jump.active()) return 0.0;
    return jump.intensity * (jump_kernel.level.value(x, theta) + jump_kernel.slope.value(x, theta) * jump.mean);
}

void JumpDiffusionModel::check_params(ParamSpan theta) const {
    if (theta.size() != dimension()) {
        throw ModelError(name + ": expected " + std::to_string(dimension()) + " parameters, got " +
                         std::to_string(theta.size()));
    }
    if (!all_finite(theta)) throw ModelError(name + ": parameters must be finite");
    if (!box.contains(theta)) throw ModelError(name + ": parameters outside the parameter box");
}

ValidationReport validate_model(const JumpDiffusionModel& model, std::span<const ProbePoint> probes) {
    ValidationReport report;
    const double kappa = model.growth_bound;
    for (std::size_t i = 0; i < probes.size(); ++i) {
        const ProbePoint& probe = probes[i];
        if (!std::isfinite(probe.x) || !std::isfinite(probe.z) || !all_finite(probe.theta)) {
            throw ModelError("validate_model: non-finite " + describe_probe(i, probe));
        }
        model.check_params(probe.theta);

        auto evaluate = [&](const char* what, double value) {
            if (!std::isfinite(value)) {
                throw ModelError(std::string("validate_model: coefficient ") + what + " is not finite at " +
                                 describe_probe(i, probe));
            }
            return value;
        };
        const double a = evaluate("a", model.drift.value(probe.x, probe.theta));
        const double b = evaluate("b", model.diffusion.value(probe.x, probe.theta));
        const double c = evaluate("c", model.jump_kernel(probe.x, probe.z, probe.theta));

        const double ab_bound = kappa * (1.0 + std::fabs(probe.x));
        if (std::fabs(a) + std::fabs(b) > ab_bound) {
            report.violations.push_back({i, "a+b", std::fabs(a) + std::fabs(b), ab_bound});
        }
        const double c_bound = kappa * (1.0 + std::fabs(probe.z)) * (1.0 + std::fabs(probe.x));
        if (std::fabs(c) > c_bound) report.violations.push_back({i, "c", std::fabs(c), c_bound});
        ++report.probes_checked;
    }
    return report;
}

std::vector<ProbePoint> probe_grid(std::span<const ParamVector> thetas, std::size_t points, double x_range,
                                   double z_range) {
    std::vector<ProbePoint> probes;
    if (points == 0) return probes;
    probes.reserve(thetas.size() * points);
    for (const ParamVector& theta : thetas) {
        for (std::size_t i = 0; i < points; ++i) {
            const double s = points == 1 ? 0.5 : static_cast<double>(i) / static_cast<double>(points - 1);
            probes.push_back({-x_range + 2.0 * x_range * s, z_range - 2.0 * z_range * s, theta.values()});
        }
    }
    return probes;
}

JumpDiffusionModel bs_small_noise_model(double mu, double sigma, double epsilon, double x0) {
    if (!(sigma > 0.0)) throw ModelError("bs_small_noise_model: sigma must be positive");
    if (!(epsilon >= 0.0) || !std::isfinite(epsilon)) throw ModelError("bs_small_noise_model: epsilon must be >= 0");
    if (!(x0 > 0.0)) throw ModelError("bs_small_noise_model: x0 must be positive");

    JumpDiffusionModel m;
    m.name = "bs";
    m.param_names = {"mu", "sigma"};
    m.roles = {ParamRole::drift, ParamRole::diffusion};
    m.box = {{-10.0, 1e-6}, {10.0, 10.0}};
    m.initial = {[x0](ParamSpan) { return x0; }, [](ParamSpan, std::span<double> g) { fill(g, 0.0); }};
    m.drift = {[](double x, ParamSpan th) { return th[0] * x; }, [](double, ParamSpan th) { return th[0]; },
               [](double x, ParamSpan, std::span<double> g) {
                   g[0] = x;
                   g[1] = 0.0;
               }};
    m.diffusion = {[epsilon](double x, ParamSpan th) { return epsilon * th[1] * x; },
                   [epsilon](double, ParamSpan th) { return epsilon * th[1]; },
                   [epsilon](double x, ParamSpan, std::span<double> g) {
                       g[0] = 0.0;
                       g[1] = epsilon * x;
                   }};
    m.jump_kernel = {Coefficient::zero(), Coefficient::zero()};
    m.jump = JumpMeasure::none();
    m.growth_bound = 10.0 + 10.0 * epsilon;
    m.noise_scale = epsilon;
    m.nominal = ParamVector{mu, sigma};
    m.check_params(m.nominal);
    return m;
}

JumpDiffusionModel ou_jump_model(double mu, double sigma, double eta, double intensity, double x0,
                                 double mark_sd) {
    if (!(mu > 0.0)) throw ModelError("ou_jump_model: mu must be positive");
    if (!(intensity >= 0.0) || !std::isfinite(intensity)) throw ModelError("ou_jump_model: intensity must be >= 0");
    if (!std::isfinite(x0)) throw ModelError("ou_jump_model: x0 must be finite");

    const double lambda = intensity;
    JumpDiffusionModel m;
    m.name = "ou";
    m.param_names = {"mu", "sigma", "eta"};
    m.roles = {ParamRole::drift, ParamRole::diffusion, ParamRole::jump};
    m.box = {{1e-6, 0.0, -10.0}, {20.0, 10.0, 10.0}};
    m.initial = {[x0](ParamSpan) { return x0; }, [](ParamSpan, std::span<double> g) { fill(g, 0.0); }};
    m.drift = {[lambda](double x, ParamSpan th) { return -th[0] * x + lambda * th[2]; },
               [](double, ParamSpan th) { return -th[0]; },
               [lambda](double x, ParamSpan, std::span<double> g) {
                   g[0] = -x;
                   g[1] = 0.0;
                   g[2] = lambda;
               }};
    m.diffusion = {[](double, ParamSpan th) { return th[1]; }, [](double, ParamSpan) { return 0.0; },
                   [](double, ParamSpan, std::span<double> g) {
                       g[0] = 0.0;
                       g[1] = 1.0;
                       g[2] = 0.0;
                   }};
    m.jump_kernel.level = {[](double, ParamSpan th) { return th[2]; }, [](double, ParamSpan) { return 0.0; },
                           [](double, ParamSpan, std::span<double> g) {
                               g[0] = 0.0;
                               g[1] = 0.0;
                               g[2] = 1.0;
                           }};
    m.jump_kernel.slope = constant_coefficient(1.0);
    m.jump = lambda > 0.0 ? JumpMeasure::compound_poisson(
                                lambda, mark_sd > 0.0 ? JumpSizeLaw::normal : JumpSizeLaw::constant, 0.0, mark_sd)
                          : JumpMeasure::none();
    m.growth_bound = std::max(20.0, 10.0 * lambda + 10.0);
    m.noise_scale = 1.0;
    m.nominal = ParamVector{mu, sigma, eta};
    m.check_params(m.nominal);
    return m;
}

JumpDiffusionModel levy_model(double mu, double sigma, double eta, double x0, JumpMeasure jumps) {
    if (eta == 0.0) throw ModelError("levy_model: eta must be non-zero");
    if (!(sigma >= 0.0)) throw ModelError("levy_model: sigma must be >= 0");
    if (!std::isfinite(x0)) throw ModelError("levy_model: x0 must be finite");
    jumps.validate();

    const double jump_drift = jumps.compensator_mean();
    JumpDiffusionModel m;
    m.name = "levy";
    m.param_names = {"mu", "sigma", "eta"};
    m.roles = {ParamRole::drift, ParamRole::diffusion, ParamRole::jump};
    m.box = {{-10.0, 0.0, -10.0}, {10.0, 10.0, 10.0}};
    m.initial = {[x0](ParamSpan) { return x0; }, [](ParamSpan, std::span<double> g) { fill(g, 0.0); }};
    m.drift = {[jump_drift](double, ParamSpan th) { return th[0] + th[2] * jump_drift; },
               [](double, ParamSpan) { return 0.0; },
               [jump_drift](double, ParamSpan, std::span<double> g) {
                   g[0] = 1.0;
                   g[1] = 0.0;
                   g[2] = jump_drift;
               }};
    m.diffusion = {[](double, ParamSpan th) { return th[1]; }, [](double, ParamSpan) { return 0.0; },
                   [](double, ParamSpan, std::span<double> g) {
                       g[0] = 0.0;
                       g[1] = 1.0;
                       g[2] = 0.0;
                   }};
    m.jump_kernel.level = Coefficient::zero();
    m.jump_kernel.slope = {[](double, ParamSpan th) { return th[2]; }, [](double, ParamSpan) { return 0.0; },
                           [](double, ParamSpan, std::span<double> g) {
                               g[0] = 0.0;
                               g[1] = 0.0;
                               g[2] = 1.0;
                           }};
    m.jump = jumps;
    m.growth_bound = 20.0 + 10.0 * std::fabs(jump_drift);
    m.noise_scale = 1.0;
    m.nominal = ParamVector{mu, sigma, eta};
    m.check_params(m.nominal);
    return m;
}

}  // namespace jdmc
