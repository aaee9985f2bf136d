#pragma once

#include <fstream>
#include <optional>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "bran/config.hpp"

namespace bran {

struct ConfigNotFoundError : std::runtime_error {
    explicit ConfigNotFoundError(const std::string& path)
        : std::runtime_error("config file not found: " + path) {}
};

// Flat view of a config file: the system tuple plus the confirmation and
// attacker parameters, with the toolkit defaults (lambda_c = 1 fixes the
// time unit at the mean service time).
struct ToolConfig {
    double lambda_a = 0.4;
    double lambda_b = 25.0;
    double lambda_c = 1.0;
    int s = 4;
    int n_confirmations = 1;
    double beta = 0.2;
    std::optional<long long> give_up;  // nullopt = never gives up

    SystemConfig system() const { return SystemConfig(lambda_a, lambda_b, lambda_c, s); }
    ConfirmationPolicy policy() const { return ConfirmationPolicy(n_confirmations); }
    AttackerProfile attacker() const { return AttackerProfile(beta, give_up); }
};

inline ToolConfig load_tool_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigNotFoundError(path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::parse_error& e) {
        throw std::invalid_argument("config parse error in " + path + ": " + e.what());
    }
    ToolConfig cfg;
    if (j.contains("lambda_a")) cfg.lambda_a = j["lambda_a"].get<double>();
    if (j.contains("lambda_b")) cfg.lambda_b = j["lambda_b"].get<double>();
    if (j.contains("lambda_c")) cfg.lambda_c = j["lambda_c"].get<double>();
    if (j.contains("s")) cfg.s = j["s"].get<int>();
    if (j.contains("n_confirmations")) cfg.n_confirmations = j["n_confirmations"].get<int>();
    if (j.contains("beta")) cfg.beta = j["beta"].get<double>();
    if (j.contains("give_up")) {
        if (j["give_up"].is_null())
            cfg.give_up = std::nullopt;
        else
            cfg.give_up = j["give_up"].get<long long>();
    }
    return cfg;
}

}  // namespace bran
