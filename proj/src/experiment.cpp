#include "jdmc/experiment.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "jdmc/normal.hpp"
#include "jdmc/parallel.hpp"
#include "jdmc/rng.hpp"
#include "jdmc/stats.hpp"

namespace jdmc {

namespace {

constexpr double kHistogramLow = -4.0;
constexpr double kHistogramHigh = 4.0;
constexpr double kHistogramWidth = 0.25;

template <class T>
T get_or(const Json& j, const char* key, T fallback) {
    if (!j.contains(key)) return fallback;
    try {
        return j.at(key).get<T>();
    } catch (const Json::exception& e) {
        throw ConfigError(std::string("config key '") + key + "': " + e.what());
    }
}

std::string one_line(std::string text) {
    std::replace(text.begin(), text.end(), ',', ';');
    std::replace(text.begin(), text.end(), '\n', ' ');
    std::replace(text.begin(), text.end(), '\r', ' ');
    return text;
}

std::vector<double> completed_z(std::span<const ReplicationRow> rows) {
    std::vector<double> z;
    for (const ReplicationRow& row : rows) {
        if (row.ok) z.push_back(row.z);
    }
    return z;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
    out << text;
}

double parse_real(std::string_view field) {
    double v = 0.0;
    const auto res = std::from_chars(field.data(), field.data() + field.size(), v);
    if (res.ec != std::errc() || res.ptr != field.data() + field.size()) {
        throw std::invalid_argument("replications csv: bad number '" + std::string(field) + "'");
    }
    return v;
}

template <class Int>
Int parse_integer(std::string_view field) {
    Int v = 0;
    const auto res = std::from_chars(field.data(), field.data() + field.size(), v);
    if (res.ec != std::errc() || res.ptr != field.data() + field.size()) {
        throw std::invalid_argument("replications csv: bad integer '" + std::string(field) + "'");
    }
    return v;
}

}  // namespace

double ks_statistic(std::span<const double> samples) {
    if (samples.size() < 2) throw std::invalid_argument("ks_statistic: need at least 2 samples");
    std::vector<double> sorted(samples.begin(), samples.end());
    std::sort(sorted.begin(), sorted.end());
    const double m = static_cast<double>(sorted.size());
    double d = 0.0;
    for (std::size_t i = 0; i < sorted.size(); ++i) {
        const double f = normal_cdf(sorted[i]);
        d = std::max({d, static_cast<double>(i + 1) / m - f, f - static_cast<double>(i) / m});
    }
    return d;
}

double ks_critical_value(std::size_t samples, double level) {
    if (samples == 0 || !(level > 0.0 && level < 1.0)) throw std::invalid_argument("ks_critical_value: bad input");
    return std::sqrt(-0.5 * std::log(0.5 * level)) / std::sqrt(static_cast<double>(samples));
}

ExperimentConfig ExperimentConfig::from_json(const Json& j) {
    ExperimentConfig c;
    Json model = j;
    if (!model.contains("model")) model["model"] = "bs";
    if (!model.contains("epsilon")) model["epsilon"] = "inv_sqrt_n";
    c.model = model_spec_from_json(model);
    c.functional = functional_spec_from_json(j.contains("functional") ? j.at("functional") : Json(),
                                             c.model.horizon);
    c.paths = get_or<std::size_t>(j, "B", c.paths);
    c.replications = get_or<std::size_t>(j, "R", c.replications);
    c.pricing_steps = get_or<std::size_t>(j, "pricing_steps", c.model.observations);
    c.c_paths = get_or<std::size_t>(j, "C_paths", c.c_paths);
    c.c_steps = get_or<std::size_t>(j, "C_steps", c.c_steps);
    c.alpha = get_or(j, "alpha", c.alpha);
    c.root_seed = get_or<std::uint64_t>(j, "root_seed", c.root_seed);
    c.threads = get_or<unsigned>(j, "threads", c.threads);
    c.validate();
    return c;
}

void ExperimentConfig::validate() const {
    if (model.model != "bs") throw ConfigError("the replication study runs on the bs model");
    if (replications < 30) throw ConfigError("R must be at least 30");
    if (paths < 1000) throw ConfigError("B must be at least 1000");
    if (c_paths < 100) throw ConfigError("C_paths must be at least 100");
    if (!(model.epsilon > 0.0)) throw ConfigError("epsilon must be positive");
    if (model.steps != model.observations) throw ConfigError("observation paths use n steps; leave 'steps' unset");
    if (!(alpha > 0.0 && alpha < 1.0)) throw ConfigError("alpha must be in (0, 1)");
    if (pricing_steps == 0 || c_steps == 0) throw ConfigError("step counts must be positive");
}

std::optional<double> closed_form_H(const ModelSpec& model, const FunctionalSpec& functional, ParamSpan theta) {
    const FunctionalKind kind = functional_kind_from_string(functional.kind);
    if (model.model == "bs" && theta.size() == 2) {
        if (kind == FunctionalKind::terminal) return model.x0 * std::exp(theta[0] * functional.horizon);
        if (kind == FunctionalKind::smoothed_call_terminal) {
            return bs_call_closed_form(theta, model.epsilon, model.x0, functional.strike, functional.rate,
                                       functional.horizon);
        }
    }
    if (model.model == "ou" && theta.size() == 3 && kind == FunctionalKind::discounted_integral) {
        return ou_discounted_closed_form(theta[0], theta[2], model.jump.intensity, functional.discount, model.x0,
                                         functional.horizon);
    }
    return std::nullopt;
}

ExperimentOutput run_bs_experiment(const ExperimentConfig& config) {
    config.validate();
    const JumpDiffusionModel model = build_model(config.model);
    const DerivativeSystem system = build_derivative_system(model);
    const Functional functional = build_functional(config.functional);
    const ParamVector theta0 = model.nominal;
    const double epsilon = config.model.epsilon;
    const TimeGrid obs_grid(config.model.horizon, config.model.observations);
    const TimeGrid price_grid(config.model.horizon, config.pricing_steps);
    const TimeGrid c_grid(config.model.horizon, config.c_steps);

    const std::optional<double> H0 = closed_form_H(config.model, config.functional, theta0);
    if (!H0) throw ConfigError("no closed-form H(theta0) for functional '" + config.functional.kind + "'");

    const VectorEstimate C0 = estimate_C(system, functional, theta0, c_grid, config.c_paths,
                                         derive_seed(~config.root_seed, 0), config.threads);
    const Eigen::MatrixXd sigma0 = covariance_from_info(fisher_info(model, theta0, obs_grid));
    const std::vector<double> rates0 = {epsilon, 1.0 / std::sqrt(static_cast<double>(obs_grid.steps()))};
    const AsymptoticVariance var0 = asymptotic_variance(C0.mean, sigma0, rates0);
    if (!(var0.value > 0.0)) throw ExperimentAborted("C^T I^{-1} C vanishes at theta0; Z_n is undefined");
    const double z_scale = var0.rate * std::sqrt(var0.value);

    std::vector<ReplicationRow> rows(config.replications);
    parallel_for(config.replications, config.threads, [&](std::size_t r) {
        ReplicationRow& row = rows[r];
        row.index = r;
        row.seed = derive_seed(config.root_seed, r);
        try {
            const NoiseBundle noise = sample_noise(obs_grid, model.jump, derive_seed(row.seed, 0));
            const Path observed = euler_path(model, theta0, noise);
            const EstimatorResult est = bs_closed_form(Observations::from_path(observed, epsilon));
            const InferenceReport report = plugin_report(system, functional, est, price_grid, config.paths,
                                                         derive_seed(row.seed, 1), config.alpha, *H0, 1);
            row.mu_hat = est.theta[0];
            row.sigma_hat = est.theta[1];
            row.H_hat = report.H_hat;
            row.H_se = report.H_se_mc;
            row.z = (report.H_hat - *H0) / z_scale;
            row.asy_var_hat = report.asy_var;
            row.ci_lo = report.ci.lo;
            row.ci_hi = report.ci.hi;
            row.covered = report.ci.contains(*H0);
            row.ok = true;
        } catch (const std::exception& e) {
            row = ReplicationRow{};
            row.index = r;
            row.seed = derive_seed(config.root_seed, r);
            row.error = one_line(e.what());
        }
    });

    ExperimentSummary s;
    s.replications = rows.size();
    s.failures = static_cast<std::size_t>(std::count_if(rows.begin(), rows.end(), [](const auto& r) { return !r.ok; }));
    if (s.failures * 20 > s.replications) {
        const auto first = std::find_if(rows.begin(), rows.end(), [](const auto& r) { return !r.ok; });
        throw ExperimentAborted(std::to_string(s.failures) + " of " + std::to_string(s.replications) +
                                " replications failed; first: " + first->error);
    }
    s.epsilon = epsilon;
    s.H_true = *H0;
    s.C_true = C0.mean;
    s.C_true_se = C0.stderr_mean;
    s.asy_var_true = var0.value;
    s.rate = var0.rate;

    const std::vector<double> z = completed_z(rows);
    const SampleSummary zs = summarize(z);
    s.ks = ks_statistic(z);
    s.ks_critical_1pct = ks_critical_value(z.size(), 0.01);
    s.z_mean = zs.mean;
    s.z_sd = zs.sd();
    const auto covered = std::count_if(rows.begin(), rows.end(), [](const auto& r) { return r.ok && r.covered; });
    s.coverage = static_cast<double>(covered) / static_cast<double>(z.size());
    s.z_outside_histogram = static_cast<std::size_t>(
        std::count_if(z.begin(), z.end(), [](double v) { return v < kHistogramLow || v > kHistogramHigh; }));
    return {std::move(rows), s};
}

std::string replications_csv(std::span<const ReplicationRow> rows) {
    std::ostringstream os;
    os << "replication,seed,status,mu_hat,sigma_hat,H_hat,H_se,z,asy_var_hat,ci_lo,ci_hi,covered,error\n";
    for (const ReplicationRow& r : rows) {
        os << r.index << ',' << r.seed << ',' << (r.ok ? "ok" : "failed") << ',' << format_real(r.mu_hat) << ','
           << format_real(r.sigma_hat) << ',' << format_real(r.H_hat) << ',' << format_real(r.H_se) << ','
           << format_real(r.z) << ',' << format_real(r.asy_var_hat) << ',' << format_real(r.ci_lo) << ','
           << format_real(r.ci_hi) << ',' << (r.covered ? 1 : 0) << ',' << one_line(r.error) << '\n';
    }
    return os.str();
}

std::vector<ReplicationRow> parse_replications_csv(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line)) throw std::invalid_argument("replications csv: missing header");
    std::vector<ReplicationRow> rows;
    while (std::getline(in, line)) {
        std::vector<std::string_view> fields;
        std::string_view rest = line;
        for (int i = 0; i < 12; ++i) {
            const auto comma = rest.find(',');
            if (comma == std::string_view::npos) throw std::invalid_argument("replications csv: short row");
            fields.push_back(rest.substr(0, comma));
            rest.remove_prefix(comma + 1);
        }
        fields.push_back(rest);
        ReplicationRow r;
        r.index = parse_integer<std::size_t>(fields[0]);
        r.seed = parse_integer<std::uint64_t>(fields[1]);
        r.ok = fields[2] == "ok";
        r.mu_hat = parse_real(fields[3]);
        r.sigma_hat = parse_real(fields[4]);
        r.H_hat = parse_real(fields[5]);
        r.H_se = parse_real(fields[6]);
        r.z = parse_real(fields[7]);
        r.asy_var_hat = parse_real(fields[8]);
        r.ci_lo = parse_real(fields[9]);
        r.ci_hi = parse_real(fields[10]);
        r.covered = fields[11] == "1";
        r.error = std::string(fields[12]);
        rows.push_back(std::move(r));
    }
    return rows;
}

nlohmann::ordered_json summary_json(const ExperimentSummary& s, const ExperimentConfig& config) {
    nlohmann::ordered_json j;
    j["n"] = config.model.observations;
    j["epsilon"] = s.epsilon;
    j["B"] = config.paths;
    j["R"] = s.replications;
    j["root_seed"] = config.root_seed;
    j["failures"] = s.failures;
    j["H_true"] = s.H_true;
    j["C_true"] = s.C_true;
    j["C_true_se"] = s.C_true_se;
    j["asy_var_true"] = s.asy_var_true;
    j["rate"] = s.rate;
    j["ks"] = s.ks;
    j["ks_critical_1pct"] = s.ks_critical_1pct;
    j["z_mean"] = s.z_mean;
    j["z_sd"] = s.z_sd;
    j["coverage"] = s.coverage;
    j["alpha"] = config.alpha;
    j["z_outside_histogram"] = s.z_outside_histogram;
    return j;
}

std::string qq_csv(std::span<const ReplicationRow> rows) {
    std::vector<double> z = completed_z(rows);
    std::sort(z.begin(), z.end());
    std::ostringstream os;
    os << "theoretical,empirical\n";
    const double m = static_cast<double>(z.size());
    for (std::size_t i = 0; i < z.size(); ++i) {
        os << format_real(normal_quantile((static_cast<double>(i) + 0.5) / m)) << ',' << format_real(z[i]) << '\n';
    }
    return os.str();
}

std::string histogram_csv(std::span<const ReplicationRow> rows) {
    const std::vector<double> z = completed_z(rows);
    const auto bins = static_cast<std::size_t>(std::lround((kHistogramHigh - kHistogramLow) / kHistogramWidth));
    std::vector<std::size_t> counts(bins, 0);
    for (double v : z) {
        if (v < kHistogramLow || v > kHistogramHigh) continue;
        const auto b = std::min(bins - 1, static_cast<std::size_t>((v - kHistogramLow) / kHistogramWidth));
        ++counts[b];
    }
    std::ostringstream os;
    os << "lo,hi,count,density,normal_density\n";
    for (std::size_t b = 0; b < bins; ++b) {
        const double lo = kHistogramLow + kHistogramWidth * static_cast<double>(b);
        const double hi = lo + kHistogramWidth;
        const double density =
            z.empty() ? 0.0 : static_cast<double>(counts[b]) / (static_cast<double>(z.size()) * kHistogramWidth);
        const double reference = (normal_cdf(hi) - normal_cdf(lo)) / kHistogramWidth;
        os << format_real(lo) << ',' << format_real(hi) << ',' << counts[b] << ',' << format_real(density) << ','
           << format_real(reference) << '\n';
    }
    return os.str();
}

void write_experiment_outputs(const ExperimentOutput& output, const ExperimentConfig& config,
                              const std::string& dir) {
    const std::filesystem::path root(dir);
    std::filesystem::create_directories(root);
    write_text(root / "replications.csv", replications_csv(output.rows));
    write_text(root / "summary.json", summary_json(output.summary, config).dump(2) + "\n");
    write_text(root / "qq.csv", qq_csv(output.rows));
    write_text(root / "histogram.csv", histogram_csv(output.rows));
}

OuOracleConfig OuOracleConfig::from_json(const Json& j) {
    OuOracleConfig c;
    Json model = j;
    if (!model.contains("model")) model["model"] = "ou";
    c.model = model_spec_from_json(model);
    if (c.model.model != "ou") throw ConfigError("the OU oracle needs model \"ou\"");
    if (c.model.params.size() != 3 || !(c.model.params[0] > 0.0)) throw ConfigError("ou needs mu > 0");
    double discount = c.discount;
    if (j.contains("functional")) discount = get_or(j.at("functional"), "delta", discount);
    c.discount = get_or(j, "delta", discount);
    c.paths = get_or<std::size_t>(j, "B", c.paths);
    c.root_seed = get_or<std::uint64_t>(j, "root_seed", c.root_seed);
    c.threads = get_or<unsigned>(j, "threads", c.threads);
    return c;
}

OuOracleReport run_ou_oracle(const OuOracleConfig& config) {
    const JumpDiffusionModel model = build_model(config.model);
    const DerivativeSystem system = build_derivative_system(model);
    const double horizon = config.model.horizon;
    const Functional functional = discounted_integral(horizon, config.discount);
    const TimeGrid grid(horizon, config.model.steps);
    const ParamVector theta = model.nominal;
    const double lambda = config.model.jump.intensity;
    const double x0 = config.model.x0;
    const double discount = config.discount;

    const PluginEstimate est = plugin_H_and_C(system, functional, theta, grid, config.paths, config.root_seed,
                                              config.threads);
    const auto closed = [&](ParamSpan th) {
        return ou_discounted_closed_form(th[0], th[2], lambda, discount, x0, horizon);
    };

    OuOracleReport report;
    report.H_mc = est.H.mean;
    report.H_se = est.H.stderr_mean;
    report.H_closed = closed(theta);
    report.H_z = report.H_se > 0.0 ? (report.H_mc - report.H_closed) / report.H_se : 0.0;
    report.H_relative_error = std::fabs(report.H_mc - report.H_closed) / std::fabs(report.H_closed);
    report.C_mc = est.C.mean;
    report.C_se = est.C.stderr_mean;
    report.C_numeric = central_gradient(closed, theta);
    for (std::size_t i = 0; i < report.C_mc.size(); ++i) {
        const double diff = report.C_mc[i] - report.C_numeric[i];
        report.C_z.push_back(report.C_se[i] > 0.0 ? diff / report.C_se[i] : (diff == 0.0 ? 0.0 : INFINITY));
    }
    return report;
}

nlohmann::ordered_json to_json(const OuOracleReport& r) {
    nlohmann::ordered_json j;
    j["H_mc"] = r.H_mc;
    j["H_se"] = r.H_se;
    j["H_closed"] = r.H_closed;
    j["H_z"] = r.H_z;
    j["H_relative_error"] = r.H_relative_error;
    j["C_mc"] = r.C_mc;
    j["C_se"] = r.C_se;
    j["C_numeric"] = r.C_numeric;
    j["C_z"] = r.C_z;
    return j;
}

nlohmann::ordered_json price_from_config(const Json& config, std::size_t paths, std::uint64_t seed,
                                         unsigned threads) {
    const ModelSpec spec = model_spec_from_json(config);
    const FunctionalSpec fspec =
        functional_spec_from_json(config.contains("functional") ? config.at("functional") : Json(), spec.horizon);
    const JumpDiffusionModel model = build_model(spec);
    const DerivativeSystem system = build_derivative_system(model);
    const Functional functional = build_functional(fspec);
    const TimeGrid grid(spec.horizon, spec.steps);
    const ParamVector theta_hat = model.nominal;
    const std::size_t p = model.dimension();

    std::vector<double> rates;
    if (config.contains("rates")) {
        rates = get_or<std::vector<double>>(config, "rates", {});
    } else {
        const double root_n = 1.0 / std::sqrt(static_cast<double>(spec.observations));
        for (ParamRole role : model.roles) rates.push_back(role == ParamRole::diffusion ? root_n : spec.epsilon);
    }
    if (rates.size() != p) throw ConfigError("'rates' must have one entry per parameter");

    Eigen::MatrixXd sigma;
    if (config.contains("covariance")) {
        const auto rows = get_or<std::vector<std::vector<double>>>(config, "covariance", {});
        if (rows.size() != p) throw ConfigError("'covariance' must be p x p");
        sigma.resize(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(p));
        for (std::size_t i = 0; i < p; ++i) {
            if (rows[i].size() != p) throw ConfigError("'covariance' must be p x p");
            for (std::size_t k = 0; k < p; ++k) {
                sigma(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = rows[i][k];
            }
        }
    } else {
        sigma = covariance_from_info(fisher_info(model, theta_hat, TimeGrid(spec.horizon, spec.observations)));
    }

    std::optional<double> H_true;
    if (config.contains("theta0")) {
        const auto theta0 = get_or<std::vector<double>>(config, "theta0", {});
        H_true = closed_form_H(spec, fspec, theta0);
        if (!H_true) throw ConfigError("'theta0' given but no closed-form H exists for this model and functional");
    }

    const double alpha = get_or(config, "alpha", 0.05);
    const InferenceReport report = plugin_report(system, functional, theta_hat, rates, sigma, grid, paths, seed,
                                                 alpha, H_true, threads);
    nlohmann::ordered_json j = to_json(report);
    j["model"] = spec.model;
    j["functional"] = fspec.kind;
    j["B"] = paths;
    j["seed"] = seed;
    return j;
}

}  // namespace jdmc
