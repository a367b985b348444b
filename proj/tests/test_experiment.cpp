#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <vector>

#include "jdmc/experiment.hpp"
#include "jdmc/normal.hpp"
#include "jdmc/rng.hpp"

using namespace jdmc;

namespace {

Json small_study() {
    return Json{{"n", 50},        {"B", 1000},          {"R", 30},
                {"C_paths", 1000}, {"C_steps", 50},      {"root_seed", 11},
                {"functional", {{"kind", "smoothed_call_terminal"}, {"K", 0.75}, {"r", 0.05}}}};
}

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

}  // namespace

TEST_SUITE("experiment") {
    TEST_CASE("ks statistic on exact quantiles and on degenerate samples") {
        const std::size_t R = 200;
        std::vector<double> q(R);
        for (std::size_t i = 0; i < R; ++i) q[i] = normal_quantile((static_cast<double>(i) + 0.5) / R);
        CHECK(ks_statistic(q) == doctest::Approx(0.5 / R).epsilon(1e-9));
        const std::vector<double> zeros(50, 0.0);
        CHECK(ks_statistic(zeros) == doctest::Approx(0.5));
        CHECK_THROWS_AS(ks_statistic(std::vector<double>{1.0}), std::invalid_argument);
    }

    TEST_CASE("ks statistic accepts genuine normals") {
        CounterRng rng(5);
        std::vector<double> z(10000);
        for (double& v : z) v = rng.normal();
        CHECK(ks_statistic(z) < ks_critical_value(z.size(), 0.01));
        CHECK(ks_critical_value(10000, 0.01) == doctest::Approx(0.016276).epsilon(1e-4));
    }

    TEST_CASE("closed-form targets") {
        ModelSpec bs;
        bs.epsilon = 0.1;
        FunctionalSpec identity;
        identity.kind = "terminal";
        const std::vector<double> theta{0.2, 1.0};
        CHECK(*closed_form_H(bs, identity, theta) == doctest::Approx(std::exp(0.2)));
        FunctionalSpec call;
        CHECK(*closed_form_H(bs, call, theta) == doctest::Approx(bs_call_closed_form(theta, 0.1, 1.0, 0.75, 0.05, 1.0)));
        FunctionalSpec average;
        average.kind = "time_average";
        CHECK_FALSE(closed_form_H(bs, average, theta).has_value());
    }

    TEST_CASE("config parsing") {
        const ExperimentConfig c = ExperimentConfig::from_json(small_study());
        CHECK(c.model.model == "bs");
        CHECK(c.model.epsilon == doctest::Approx(1.0 / std::sqrt(50.0)));
        CHECK(c.pricing_steps == 50);
        CHECK(c.functional.strike == 0.75);

        Json bad = small_study();
        bad["R"] = 10;
        CHECK_THROWS_AS(ExperimentConfig::from_json(bad), ConfigError);
        bad = small_study();
        bad["model"] = "ou";
        CHECK_THROWS_AS(ExperimentConfig::from_json(bad), ConfigError);
        bad = small_study();
        bad["epsilon"] = "tiny";
        CHECK_THROWS_AS(ExperimentConfig::from_json(bad), ConfigError);
        bad = small_study();
        bad["B"] = "many";
        CHECK_THROWS_AS(ExperimentConfig::from_json(bad), ConfigError);
        bad = small_study();
        bad["functional"]["kind"] = "lookback";
        CHECK_THROWS(build_functional(ExperimentConfig::from_json(bad).functional));
    }

    TEST_CASE("replication csv round-trips, including failures") {
        std::vector<ReplicationRow> rows(3);
        rows[0] = {0, derive_seed(1, 0), true, 0.21, 0.98, 0.4485, 1.6e-4, -0.3, 1.3, 0.44, 0.46, true, ""};
        rows[1] = {1, derive_seed(1, 1), true, 1.0 / 3.0, 1e-300, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, false, ""};
        rows[2].index = 2;
        rows[2].seed = 77;
        rows[2].error = "path 3, step 9: blew up";
        const auto parsed = parse_replications_csv(replications_csv(rows));
        REQUIRE(parsed.size() == 3);
        CHECK(parsed[0] == rows[0]);
        CHECK(parsed[1] == rows[1]);
        CHECK_FALSE(parsed[2].ok);
        CHECK(parsed[2].error == "path 3; step 9: blew up");
    }

    TEST_CASE("small study runs, is deterministic and writes its files") {
        const ExperimentConfig c = ExperimentConfig::from_json(small_study());
        const ExperimentOutput a = run_bs_experiment(c);
        REQUIRE(a.rows.size() == 30);
        CHECK(a.summary.failures == 0);
        for (const ReplicationRow& row : a.rows) {
            CHECK(row.ok);
            CHECK(row.ci_lo <= row.H_hat);
            CHECK(row.H_hat <= row.ci_hi);
        }
        CHECK(a.summary.rate == doctest::Approx(1.0 / std::sqrt(50.0)));

        ExperimentConfig threaded = c;
        threaded.threads = 3;
        const ExperimentOutput b = run_bs_experiment(threaded);
        CHECK(a.rows == b.rows);

        const auto dir = std::filesystem::temp_directory_path() / "jdmc_experiment_test";
        std::filesystem::remove_all(dir);
        write_experiment_outputs(a, c, dir.string());
        for (const char* name : {"replications.csv", "summary.json", "qq.csv", "histogram.csv"}) {
            CHECK(std::filesystem::exists(dir / name));
        }
        CHECK(parse_replications_csv(slurp(dir / "replications.csv")) == a.rows);
        const Json summary = Json::parse(slurp(dir / "summary.json"));
        CHECK(summary.contains("ks"));
        std::istringstream hist(slurp(dir / "histogram.csv"));
        std::string line;
        std::size_t lines = 0;
        while (std::getline(hist, line)) ++lines;
        CHECK(lines == 33);
        std::filesystem::remove_all(dir);
    }

    TEST_CASE("ou oracle config") {
        const OuOracleConfig c = OuOracleConfig::from_json(Json{{"functional", {{"delta", 0.1}}}, {"B", 500}});
        CHECK(c.model.model == "ou");
        CHECK(c.discount == 0.1);
        CHECK_THROWS_AS(OuOracleConfig::from_json(Json{{"model", "bs"}}), ConfigError);
    }
}
