#include "jdmc/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>

namespace jdmc {

namespace {

template <class T>
T get_or(const Json& j, const char* key, T fallback) {
    if (!j.contains(key)) return fallback;
    try {
        return j.at(key).get<T>();
    } catch (const Json::exception& e) {
        throw ConfigError(std::string("config key '") + key + "': " + e.what());
    }
}

JumpSizeLaw law_from_string(const std::string& name) {
    if (name == "constant") return JumpSizeLaw::constant;
    if (name == "normal") return JumpSizeLaw::normal;
    if (name == "exponential") return JumpSizeLaw::exponential;
    throw ConfigError("unknown jump size law '" + name + "'");
}

std::vector<double> default_params(const std::string& model) {
    if (model == "bs") return {0.2, 1.0};
    if (model == "ou") return {1.0, 0.3, 0.5};
    if (model == "levy") return {0.0, 1.0, 1.0};
    throw ConfigError("unknown model '" + model + "' (expected bs, ou or levy)");
}

}  // namespace

ModelSpec model_spec_from_json(const Json& j) {
    if (!j.is_object()) throw ConfigError("model config must be a JSON object");
    ModelSpec spec;
    spec.model = get_or<std::string>(j, "model", spec.model);
    spec.params = get_or<std::vector<double>>(j, "params", default_params(spec.model));
    spec.x0 = get_or(j, "x0", spec.x0);
    spec.horizon = get_or(j, "T", spec.horizon);
    spec.observations = get_or<std::size_t>(j, "n", spec.observations);
    spec.steps = get_or<std::size_t>(j, "steps", spec.observations);

    if (j.contains("epsilon") && j.at("epsilon").is_string()) {
        if (j.at("epsilon").get<std::string>() != "inv_sqrt_n") {
            throw ConfigError("epsilon must be a number or \"inv_sqrt_n\"");
        }
        spec.epsilon = 1.0 / std::sqrt(static_cast<double>(spec.observations));
    } else {
        spec.epsilon = get_or(j, "epsilon", 1.0 / std::sqrt(static_cast<double>(spec.observations)));
    }

    const Json jump = j.contains("jump") ? j.at("jump") : Json::object();
    if (spec.model == "ou") {
        spec.jump = {get_or(jump, "intensity", 1.0), JumpSizeLaw::normal, 0.0, get_or(jump, "sd", 1.0)};
    } else if (spec.model == "levy") {
        spec.jump = {get_or(jump, "intensity", 1.0), law_from_string(get_or<std::string>(jump, "law", "exponential")),
                     get_or(jump, "mean", 1.0), get_or(jump, "sd", 0.0)};
    }
    return spec;
}

JumpDiffusionModel build_model(const ModelSpec& spec) {
    const auto& p = spec.params;
    if (spec.model == "bs") {
        if (p.size() != 2) throw ConfigError("bs takes params [mu, sigma]");
        return bs_small_noise_model(p[0], p[1], spec.epsilon, spec.x0);
    }
    if (spec.model == "ou") {
        if (p.size() != 3) throw ConfigError("ou takes params [mu, sigma, eta]");
        return ou_jump_model(p[0], p[1], p[2], spec.jump.intensity, spec.x0, spec.jump.sd);
    }
    if (spec.model == "levy") {
        if (p.size() != 3) throw ConfigError("levy takes params [mu, sigma, eta]");
        return levy_model(p[0], p[1], p[2], spec.x0, spec.jump);
    }
    throw ConfigError("unknown model '" + spec.model + "' (expected bs, ou or levy)");
}

FunctionalSpec functional_spec_from_json(const Json& j, double default_horizon) {
    FunctionalSpec spec;
    spec.horizon = default_horizon;
    if (j.is_null()) return spec;
    if (!j.is_object()) throw ConfigError("functional config must be a JSON object");
    spec.kind = get_or<std::string>(j, "kind", spec.kind);
    spec.strike = get_or(j, "K", spec.strike);
    spec.rate = get_or(j, "r", spec.rate);
    spec.horizon = get_or(j, "T", spec.horizon);
    spec.discount = get_or(j, "delta", spec.discount);
    if (j.contains("epsilon_smooth")) spec.smoothing = get_or(j, "epsilon_smooth", 0.0);
    spec.integrand = get_or<std::string>(j, "V", spec.integrand);
    return spec;
}

Functional build_functional(const FunctionalSpec& spec) {
    if (spec.integrand != "identity") throw ConfigError("only V = \"identity\" is supported");
    const double smoothing = spec.smoothing.value_or(default_smoothing(spec.strike));
    try {
        switch (functional_kind_from_string(spec.kind)) {
            case FunctionalKind::terminal: return terminal(spec.horizon);
            case FunctionalKind::time_average: return time_average(spec.horizon);
            case FunctionalKind::discounted_integral: return discounted_integral(spec.horizon, spec.discount);
            case FunctionalKind::smoothed_call_terminal:
                return smoothed_call_terminal(spec.strike, spec.rate, spec.horizon, smoothing);
            case FunctionalKind::smoothed_call_average:
                return smoothed_call_average(spec.strike, spec.rate, spec.horizon, smoothing);
        }
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
    throw ConfigError("unknown functional kind '" + spec.kind + "'");
}

Json read_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    try {
        return Json::parse(in);
    } catch (const Json::parse_error& e) {
        throw ConfigError("config file '" + path + "' is not valid JSON: " + e.what());
    }
}

std::string format_real(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

}  // namespace jdmc
