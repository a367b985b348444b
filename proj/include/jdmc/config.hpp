#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "jdmc/functional.hpp"
#include "jdmc/model.hpp"

namespace jdmc {

using Json = nlohmann::json;

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// {"model": "bs"|"ou"|"levy", "params": [...], "epsilon": x | "inv_sqrt_n", "x0": x,
///  "jump": {"intensity", "law", "mean", "sd"}, "T": x, "steps": n, "n": n}
struct ModelSpec {
    std::string model = "bs";
    std::vector<double> params;
    double epsilon = 0.0;
    double x0 = 1.0;
    JumpMeasure jump;
    double horizon = 1.0;
    std::size_t steps = 500;
    std::size_t observations = 500;  // n, used by "inv_sqrt_n" and the rates
};

ModelSpec model_spec_from_json(const Json& j);
JumpDiffusionModel build_model(const ModelSpec& spec);

/// {"kind", "K", "r", "T", "delta", "epsilon_smooth", "V": "identity"}
struct FunctionalSpec {
    std::string kind = "smoothed_call_terminal";
    double strike = 0.75;
    double rate = 0.05;
    double horizon = 1.0;
    double discount = 0.0;
    std::optional<double> smoothing;  // default 1e-3 K
    std::string integrand = "identity";
};

FunctionalSpec functional_spec_from_json(const Json& j, double default_horizon);
Functional build_functional(const FunctionalSpec& spec);

Json read_json_file(const std::string& path);

/// Shortest text that parses back to the same double.
std::string format_real(double v);

}  // namespace jdmc
