// runconfig.hpp — the full run configuration: evolution schedule, thresholds,
// strategy, evaluator options and backend selection, with strict JSON I/O.
#pragma once

#include <string>

#include <json.hpp>

#include "alphamine/backend.hpp"
#include "alphamine/backtest.hpp"
#include "alphamine/evolve.hpp"

namespace alphamine {

enum class BackendKind { Mock, Http };

struct RunConfig {
    EvolutionConfig evolution;
    StrategyConfig strategy;
    EvalOptions eval;
    BackendKind backend_kind = BackendKind::Mock;
    HttpBackendConfig http;
    int horizon = 10;

    void check() const;

    // Strict: unknown keys anywhere are rejected with the offending key named.
    static RunConfig from_json(const nlohmann::json& j);
    nlohmann::json to_json() const;
};

RunConfig load_run_config(const std::string& path);

}  // namespace alphamine
