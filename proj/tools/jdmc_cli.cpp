// jdmc: simulate, estimate, price and run experiments from the command line.

#include <CLI11.hpp>
#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "jdmc/config.hpp"
#include "jdmc/estimate.hpp"
#include "jdmc/experiment.hpp"
#include "jdmc/rng.hpp"
#include "jdmc/simulate.hpp"

namespace {

using namespace jdmc;

struct ModelFlags {
    std::string model = "bs";
    std::vector<double> params;
    std::size_t steps = 500;
    double horizon = 1.0;
    std::string epsilon = "inv_sqrt_n";
    double x0 = 1.0;
    double intensity = 1.0;
    std::string jump_law = "exponential";
    double jump_mean = 1.0;
    double jump_sd = 1.0;

    void attach(CLI::App* app) {
        app->add_option("--model", model, "bs, ou or levy")->check(CLI::IsMember({"bs", "ou", "levy"}));
        app->add_option("--params", params, "parameter vector, e.g. 0.2,1.0")->delimiter(',');
        app->add_option("--n", steps, "number of Euler steps")->check(CLI::PositiveNumber);
        app->add_option("--T", horizon, "horizon")->check(CLI::PositiveNumber);
        app->add_option("--epsilon", epsilon, "noise scale for bs, or inv_sqrt_n");
        app->add_option("--x0", x0, "initial value");
        app->add_option("--intensity", intensity, "jump intensity (ou, levy)");
        app->add_option("--jump-law", jump_law, "levy jump law: constant, normal or exponential");
        app->add_option("--jump-mean", jump_mean, "levy mean jump size");
        app->add_option("--jump-sd", jump_sd, "jump size sd (ou marks, normal levy law)");
    }

    ModelSpec spec() const {
        Json j;
        j["model"] = model;
        if (!params.empty()) j["params"] = params;
        j["n"] = steps;
        j["T"] = horizon;
        j["x0"] = x0;
        if (epsilon == "inv_sqrt_n") {
            j["epsilon"] = epsilon;
        } else {
            try {
                j["epsilon"] = std::stod(epsilon);
            } catch (const std::exception&) {
                throw ConfigError("--epsilon must be a number or inv_sqrt_n");
            }
        }
        j["jump"] = {{"intensity", intensity}, {"law", jump_law}, {"mean", jump_mean}, {"sd", jump_sd}};
        return model_spec_from_json(j);
    }
};

void emit(const std::string& text, const std::string& out_path) {
    if (out_path.empty()) {
        std::cout << text;
        return;
    }
    std::ofstream out(out_path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write '" + out_path + "'");
    out << text;
}

std::string run_simulate(const ModelFlags& flags, std::size_t paths, std::uint64_t seed) {
    const ModelSpec spec = flags.spec();
    const JumpDiffusionModel model = build_model(spec);
    const DerivativeSystem system = build_derivative_system(model);
    const TimeGrid grid(spec.horizon, spec.steps);
    std::ostringstream os;
    os << "path_id,t,X";
    for (std::size_t i = 1; i <= model.dimension(); ++i) os << ",Y" << i;
    os << '\n';
    for (std::size_t id = 0; id < paths; ++id) {
        const NoiseBundle noise = sample_noise(grid, model.jump, derive_seed(seed, id));
        const PathWithDerivative path = euler_path_with_derivative(system, model.nominal, noise);
        for (std::size_t k = 0; k <= grid.steps(); ++k) {
            os << id << ',' << format_real(grid.time(k)) << ',' << format_real(path.x.values[k]);
            for (double y : path.y.at(k)) os << ',' << format_real(y);
            os << '\n';
        }
    }
    return os.str();
}

// Reads the X column (first path only when a path_id column is present) and the horizon from t.
std::pair<std::vector<double>, double> read_observations(const std::string& file, double horizon_flag) {
    std::ifstream in(file);
    if (!in) throw std::runtime_error("cannot open data file '" + file + "'");
    std::string line;
    std::vector<std::string> header;
    if (!std::getline(in, line)) throw std::runtime_error("data file is empty");
    {
        std::stringstream ss(line);
        for (std::string cell; std::getline(ss, cell, ',');) header.push_back(cell);
    }
    auto column = [&](const std::string& name) -> std::ptrdiff_t {
        const auto it = std::find(header.begin(), header.end(), name);
        return it == header.end() ? -1 : it - header.begin();
    };
    const std::ptrdiff_t x_col = header.size() == 1 ? 0 : column("X");
    if (x_col < 0) throw std::runtime_error("data file needs an X column");
    const std::ptrdiff_t t_col = column("t");
    const std::ptrdiff_t id_col = column("path_id");

    std::vector<double> samples;
    double last_t = 0.0;
    std::string first_id;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<std::string> cells;
        std::stringstream ss(line);
        for (std::string cell; std::getline(ss, cell, ',');) cells.push_back(cell);
        if (cells.size() != header.size()) throw std::runtime_error("ragged row in data file");
        if (id_col >= 0) {
            if (first_id.empty()) first_id = cells[static_cast<std::size_t>(id_col)];
            if (cells[static_cast<std::size_t>(id_col)] != first_id) break;
        }
        samples.push_back(std::stod(cells[static_cast<std::size_t>(x_col)]));
        if (t_col >= 0) last_t = std::stod(cells[static_cast<std::size_t>(t_col)]);
    }
    const double horizon = horizon_flag > 0.0 ? horizon_flag : (t_col >= 0 ? last_t : 1.0);
    return {samples, horizon};
}

std::string run_estimate(const std::string& data, const std::string& model, const std::string& method,
                         const std::string& epsilon_flag, double horizon_flag) {
    if (model != "bs") throw ConfigError("estimate supports --model bs");
    auto [samples, horizon] = read_observations(data, horizon_flag);
    if (samples.size() < 2) throw std::runtime_error("need at least two observations");
    const std::size_t n = samples.size() - 1;
    const double epsilon =
        epsilon_flag == "inv_sqrt_n" ? 1.0 / std::sqrt(static_cast<double>(n)) : std::stod(epsilon_flag);
    Observations obs{TimeGrid(horizon, n), std::move(samples), epsilon};

    EstimatorResult result = bs_closed_form(obs);
    if (method == "contrast") {
        const JumpDiffusionModel bs = bs_small_noise_model(0.0, 1.0, epsilon, obs.samples.front());
        result = minimize_contrast(obs, bs, std::vector<double>{0.0, 1.0});
    }
    nlohmann::ordered_json j;
    j["method"] = method;
    j["mu_hat"] = result.theta[0];
    j["sigma_hat"] = result.theta[1];
    j["rates"] = result.rates;
    j["fisher"] = {{result.info(0, 0), result.info(0, 1)}, {result.info(1, 0), result.info(1, 1)}};
    j["converged"] = result.converged;
    j["iterations"] = result.iterations;
    j["contrast"] = result.contrast_value;
    j["n"] = n;
    j["epsilon"] = epsilon;
    return j.dump(2) + "\n";
}

std::string run_order_check(const ModelFlags& flags, std::size_t coordinate, const std::vector<double>& magnitudes,
                            std::size_t paths, std::uint64_t seed, int p, unsigned threads) {
    const ModelSpec spec = flags.spec();
    const JumpDiffusionModel model = build_model(spec);
    const DerivativeSystem system = build_derivative_system(model);
    const TimeGrid grid(spec.horizon, spec.steps);
    const auto rows = order_check(system, model.nominal, coordinate, magnitudes, grid, paths, seed, p, threads);
    std::ostringstream os;
    os << "magnitude,moment,stderr\n";
    for (const OrderCheckRow& row : rows) {
        os << format_real(row.magnitude) << ',' << format_real(row.moment.mean) << ','
           << format_real(row.moment.stderr_mean) << '\n';
    }
    return os.str();
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Plug-in Monte Carlo estimation for jump-diffusions"};
    app.require_subcommand(1);
    unsigned threads = 0;
    app.add_option("--threads", threads, "worker threads (0 = all cores); results do not depend on it");

    ModelFlags sim_flags;
    std::size_t sim_paths = 1;
    std::uint64_t sim_seed = 1;
    std::string sim_out;
    auto* sim = app.add_subcommand("simulate", "emit X and Y paths as CSV");
    sim_flags.attach(sim);
    sim->add_option("--seed", sim_seed, "root seed");
    sim->add_option("--paths", sim_paths, "number of paths")->check(CLI::PositiveNumber);
    sim->add_option("--out", sim_out, "output file (default stdout)");

    std::string est_data, est_model = "bs", est_method = "closed_form", est_epsilon = "inv_sqrt_n", est_out;
    double est_horizon = 0.0;
    auto* est = app.add_subcommand("estimate", "small-noise estimator from observations");
    est->add_option("--data", est_data, "CSV with an X column")->required()->check(CLI::ExistingFile);
    est->add_option("--model", est_model, "model (bs)");
    est->add_option("--epsilon", est_epsilon, "known noise scale, or inv_sqrt_n");
    est->add_option("--method", est_method, "closed_form or contrast")
        ->check(CLI::IsMember({"closed_form", "contrast"}));
    est->add_option("--T", est_horizon, "horizon (default: last t, else 1)");
    est->add_option("--out", est_out, "output file (default stdout)");

    std::string price_config, price_out;
    std::size_t price_paths = 10000;
    std::uint64_t price_seed = 1;
    auto* price = app.add_subcommand("price", "plug-in estimate with asymptotic error");
    price->add_option("--config", price_config, "JSON config")->required()->check(CLI::ExistingFile);
    price->add_option("--B", price_paths, "Monte Carlo paths");
    price->add_option("--seed", price_seed, "root seed");
    price->add_option("--out", price_out, "output file (default stdout)");

    std::string exp_config, exp_out = "experiment_out";
    auto* exp = app.add_subcommand("experiment", "replication study (bs) or OU oracle (ou)");
    exp->add_option("--config", exp_config, "JSON config")->required()->check(CLI::ExistingFile);
    exp->add_option("--out", exp_out, "output directory");

    ModelFlags oc_flags;
    std::size_t oc_coordinate = 0, oc_paths = 1000;
    std::vector<double> oc_magnitudes{0.1, 0.05, 0.025, 0.0125};
    std::uint64_t oc_seed = 1;
    int oc_p = 2;
    std::string oc_out;
    auto* oc = app.add_subcommand("order-check", "E sup|X(theta+u) - X(theta) - u Y|^p against |u|");
    oc_flags.attach(oc);
    oc->add_option("--coordinate", oc_coordinate, "parameter index");
    oc->add_option("--magnitudes", oc_magnitudes, "|u| values")->delimiter(',');
    oc->add_option("--paths", oc_paths, "paths per magnitude (>= 100)");
    oc->add_option("--seed", oc_seed, "root seed");
    oc->add_option("--p", oc_p, "moment order")->check(CLI::IsMember({1, 2, 4}));
    oc->add_option("--out", oc_out, "output file (default stdout)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (sim->parsed()) {
            emit(run_simulate(sim_flags, sim_paths, sim_seed), sim_out);
        } else if (est->parsed()) {
            emit(run_estimate(est_data, est_model, est_method, est_epsilon, est_horizon), est_out);
        } else if (price->parsed()) {
            const Json config = read_json_file(price_config);
            emit(price_from_config(config, price_paths, price_seed, threads).dump(2) + "\n", price_out);
        } else if (exp->parsed()) {
            Json config = read_json_file(exp_config);
            if (threads != 0) config["threads"] = threads;
            const std::string kind = config.value("experiment", std::string("bs"));
            if (kind == "ou") {
                const std::string text = to_json(run_ou_oracle(OuOracleConfig::from_json(config))).dump(2) + "\n";
                std::filesystem::create_directories(exp_out);
                emit(text, (std::filesystem::path(exp_out) / "ou_oracle.json").string());
                std::cout << text;
            } else if (kind == "bs") {
                const ExperimentConfig cfg = ExperimentConfig::from_json(config);
                const ExperimentOutput output = run_bs_experiment(cfg);
                write_experiment_outputs(output, cfg, exp_out);
                std::cout << summary_json(output.summary, cfg).dump(2) << "\n";
            } else {
                throw ConfigError("unknown experiment '" + kind + "' (expected bs or ou)");
            }
        } else if (oc->parsed()) {
            emit(run_order_check(oc_flags, oc_coordinate, oc_magnitudes, oc_paths, oc_seed, oc_p, threads), oc_out);
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
