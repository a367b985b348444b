#pragma once

#include <cstddef>
#include <functional>
#include <initializer_list>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace jdmc {

using ParamSpan = std::span<const double>;

/// Model parameter vector theta, dimension p >= 1, all entries finite.
class ParamVector {
public:
    ParamVector() = default;
    explicit ParamVector(std::vector<double> values);
    ParamVector(std::initializer_list<double> values);

    std::size_t size() const noexcept { return values_.size(); }
    double operator[](std::size_t i) const { return values_[i]; }
    double& operator[](std::size_t i) { return values_[i]; }
    ParamSpan span() const noexcept { return values_; }
    operator ParamSpan() const noexcept { return values_; }
    const std::vector<double>& values() const noexcept { return values_; }

    /// theta + scale * direction
    ParamVector shifted(ParamSpan direction, double scale = 1.0) const;

    friend bool operator==(const ParamVector&, const ParamVector&) = default;

private:
    std::vector<double> values_;
};

/// Component-wise bounds defining the parameter space.
struct ParamBox {
    std::vector<double> lower;
    std::vector<double> upper;

    std::size_t size() const noexcept { return lower.size(); }
    bool contains(ParamSpan theta) const noexcept;
    double clamp(std::size_t i, double value) const;
};

/// A model parameter either moves the drift (estimated at rate epsilon under
/// small noise) or the diffusion (rate 1/sqrt(n)).
enum class ParamRole { drift, diffusion, jump };

/// Scalar coefficient f(x, theta) with its x-derivative and theta-gradient.
struct Coefficient {
    std::function<double(double, ParamSpan)> value;
    std::function<double(double, ParamSpan)> dx;
    std::function<void(double, ParamSpan, std::span<double>)> dtheta;

    static Coefficient zero();
};

/// Jump kernel affine in the mark: c(x, z, theta) = level(x, theta) + slope(x, theta) * z.
struct JumpKernel {
    Coefficient level;
    Coefficient slope;

    double operator()(double x, double z, ParamSpan theta) const { return level.value(x, theta) + slope.value(x, theta) * z; }
};

enum class JumpSizeLaw { constant, normal, exponential };

/// Finite-activity (compound Poisson) Levy measure nu(dz) = intensity * law(dz).
struct JumpMeasure {
    double intensity = 0.0;  // lambda, jumps per unit time
    JumpSizeLaw law = JumpSizeLaw::constant;
    double mean = 0.0;       // mean jump size
    double sd = 0.0;         // jump size standard deviation (normal law)

    static JumpMeasure none() { return {}; }
    static JumpMeasure compound_poisson(double intensity, JumpSizeLaw law, double mean, double sd = 0.0);

    bool active() const noexcept { return intensity > 0.0; }
    /// Integral of z against nu(dz).
    double compensator_mean() const noexcept { return intensity * mean; }
    void validate() const;
};

struct InitialValue {
    std::function<double(ParamSpan)> value;
    std::function<void(ParamSpan, std::span<double>)> gradient;
};

class ModelError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// dX = a(X, theta) dt + b(X, theta) dW + int c(X-, z, theta) Ntilde(dt, dz),
/// X_0 = x(theta). Immutable once built; share by const reference.
struct JumpDiffusionModel {
    std::string name;
    std::vector<std::string> param_names;
    std::vector<ParamRole> roles;
    ParamBox box;
    InitialValue initial;
    Coefficient drift;
    Coefficient diffusion;
    JumpKernel jump_kernel;
    JumpMeasure jump;
    double growth_bound = 1.0;  // kappa in the linear-growth spot checks
    double noise_scale = 1.0;   // structural epsilon multiplying the diffusion
    ParamVector nominal;        // parameter point supplied at construction

    std::size_t dimension() const noexcept { return param_names.size(); }

    /// int c(x, z, theta) nu(dz) for the affine kernel.
    double jump_compensator(double x, ParamSpan theta) const;

    /// Throws ModelError unless theta has the right size, is finite and lies in the box.
    void check_params(ParamSpan theta) const;
};

struct ProbePoint {
    double x = 0.0;
    double z = 0.0;
    std::vector<double> theta;
};

struct GrowthViolation {
    std::size_t probe_index = 0;
    std::string coefficient;
    double observed = 0.0;
    double bound = 0.0;
};

struct ValidationReport {
    std::size_t probes_checked = 0;
    std::vector<GrowthViolation> violations;

    bool passed() const noexcept { return violations.empty(); }
};

/// Spot-checks finiteness and linear growth at the probe points. Growth is
/// |a| + |b| <= kappa (1 + |x|) and |c| <= kappa (1 + |z|)(1 + |x|).
/// A non-finite coefficient value throws ModelError naming the coefficient
/// and the probe.
ValidationReport validate_model(const JumpDiffusionModel& model, std::span<const ProbePoint> probes);

/// Probe grid over x in [-x_range, x_range], z in [-z_range, z_range] and the
/// given thetas (count ~ points per theta).
std::vector<ProbePoint> probe_grid(std::span<const ParamVector> thetas, std::size_t points, double x_range,
                                   double z_range);

/// Small-noise Black-Scholes: a = mu x, b = eps sigma x, theta = (mu, sigma).
/// (mu, sigma) become `nominal`; eps and x0 are structural.
JumpDiffusionModel bs_small_noise_model(double mu, double sigma, double epsilon, double x0);

/// OU with compound Poisson jumps of mean eta, written against the centred
/// measure: a = -mu x + lambda eta, b = sigma, c = z + eta; theta = (mu, sigma, eta).
/// Marks are centred normal with standard deviation `mark_sd` (0 gives jumps of exactly eta).
JumpDiffusionModel ou_jump_model(double mu, double sigma, double eta, double intensity, double x0,
                                 double mark_sd = 1.0);

/// X_t = x0 + mu t + sigma W_t + eta S_t with S compound Poisson under `jumps`:
/// a = mu + eta * lambda * m, b = sigma, c = eta z; theta = (mu, sigma, eta).
JumpDiffusionModel levy_model(double mu, double sigma, double eta, double x0,
                              JumpMeasure jumps = JumpMeasure::compound_poisson(1.0, JumpSizeLaw::exponential, 1.0));

}  // namespace jdmc
