#include "alphamine/runconfig.hpp"

#include <fstream>
#include <set>

namespace alphamine {

namespace {

// Reads known keys out of `j`; any key outside `allowed` is rejected.
class StrictObject {
public:
    StrictObject(const nlohmann::json& j, std::string where,
                 std::initializer_list<const char*> allowed)
        : j_(j), where_(std::move(where)) {
        if (!j.is_object()) throw ConfigError(where_ + ": expected a JSON object");
        const std::set<std::string> ok(allowed.begin(), allowed.end());
        for (auto it = j.begin(); it != j.end(); ++it)
            if (!ok.count(it.key()))
                throw ConfigError(where_ + ": unknown key '" + it.key() + "'");
    }

    template <typename T>
    void get(const char* key, T& out) {
        if (auto it = j_.find(key); it != j_.end()) {
            try {
                out = it->get<T>();
            } catch (const nlohmann::json::exception&) {
                throw ConfigError(where_ + "." + key + ": wrong type");
            }
        }
    }

    const nlohmann::json* child(const char* key) const {
        auto it = j_.find(key);
        return it == j_.end() ? nullptr : &*it;
    }

private:
    const nlohmann::json& j_;
    std::string where_;
};

MetricFloors floors_from(const nlohmann::json& j, const std::string& where) {
    MetricFloors f;
    StrictObject o(j, where, {"ic", "rank_ic", "icir", "rank_icir", "mi"});
    o.get("ic", f.ic);
    o.get("rank_ic", f.rank_ic);
    o.get("icir", f.icir);
    o.get("rank_icir", f.rank_icir);
    o.get("mi", f.mi);
    return f;
}

nlohmann::json floors_to(const MetricFloors& f) {
    return {{"ic", f.ic}, {"rank_ic", f.rank_ic}, {"icir", f.icir},
            {"rank_icir", f.rank_icir}, {"mi", f.mi}};
}

}  // namespace

void RunConfig::check() const {
    evolution.check();
    strategy.check();
    if (eval.epsilon <= 0.0) throw ConfigError("eval.epsilon must be positive");
    if (eval.min_window_fill <= 0.0 || eval.min_window_fill > 1.0)
        throw ConfigError("eval.min_window_fill must lie in (0, 1]");
    if (horizon < 1) throw ConfigError("horizon must be >= 1");
    if (backend_kind == BackendKind::Http) {
        if (http.base_url.empty()) throw ConfigError("backend.base_url required for http");
        if (http.model.empty()) throw ConfigError("backend.model required for http");
    }
}

RunConfig RunConfig::from_json(const nlohmann::json& j) {
    RunConfig rc;
    StrictObject root(j, "config", {"horizon", "evolution", "thresholds", "strategy", "eval",
                                    "backend"});
    root.get("horizon", rc.horizon);

    if (const nlohmann::json* e = root.child("evolution")) {
        StrictObject o(*e, "evolution",
                       {"initial_pool", "parent_pool", "children_multiplier", "generations",
                        "subcycles", "gens_per_subcycle", "inject_every", "inject_count",
                        "elites_forward", "nan_max", "num_per_request", "max_repairs", "mi_bins",
                        "seed", "threads", "seed_exprs"});
        o.get("initial_pool", rc.evolution.initial_pool);
        o.get("parent_pool", rc.evolution.parent_pool);
        o.get("children_multiplier", rc.evolution.children_multiplier);
        o.get("generations", rc.evolution.generations);
        o.get("subcycles", rc.evolution.subcycles);
        o.get("gens_per_subcycle", rc.evolution.gens_per_subcycle);
        o.get("inject_every", rc.evolution.inject_every);
        o.get("inject_count", rc.evolution.inject_count);
        o.get("elites_forward", rc.evolution.elites_forward);
        o.get("nan_max", rc.evolution.nan_max);
        o.get("num_per_request", rc.evolution.num_per_request);
        o.get("max_repairs", rc.evolution.max_repairs);
        o.get("mi_bins", rc.evolution.mi_bins);
        o.get("seed", rc.evolution.seed);
        o.get("threads", rc.evolution.threads);
        o.get("seed_exprs", rc.evolution.seed_exprs);
    }
    if (const nlohmann::json* t = root.child("thresholds")) {
        StrictObject o(*t, "thresholds",
                       {"qualified_percentile", "elite_percentile", "qualified_floors",
                        "elite_floors"});
        o.get("qualified_percentile", rc.evolution.thresholds.qualified_percentile);
        o.get("elite_percentile", rc.evolution.thresholds.elite_percentile);
        if (const nlohmann::json* q = o.child("qualified_floors"))
            rc.evolution.thresholds.qualified_floors =
                floors_from(*q, "thresholds.qualified_floors");
        if (const nlohmann::json* e = o.child("elite_floors"))
            rc.evolution.thresholds.elite_floors = floors_from(*e, "thresholds.elite_floors");
    }
    if (const nlohmann::json* s = root.child("strategy")) {
        StrictObject o(*s, "strategy",
                       {"top_k", "drop_n", "buy_cost", "sell_cost", "min_fee", "periods_per_year",
                        "initial_cash"});
        o.get("top_k", rc.strategy.top_k);
        o.get("drop_n", rc.strategy.drop_n);
        o.get("buy_cost", rc.strategy.buy_cost);
        o.get("sell_cost", rc.strategy.sell_cost);
        o.get("min_fee", rc.strategy.min_fee);
        o.get("periods_per_year", rc.strategy.periods_per_year);
        o.get("initial_cash", rc.strategy.initial_cash);
    }
    if (const nlohmann::json* e = root.child("eval")) {
        StrictObject o(*e, "eval", {"epsilon", "min_window_fill"});
        o.get("epsilon", rc.eval.epsilon);
        o.get("min_window_fill", rc.eval.min_window_fill);
    }
    if (const nlohmann::json* b = root.child("backend")) {
        StrictObject o(*b, "backend",
                       {"kind", "base_url", "model", "auth_env", "timeout_ms", "max_retries",
                        "retry_backoff_ms", "max_in_flight"});
        std::string kind = "mock";
        o.get("kind", kind);
        if (kind == "mock") {
            rc.backend_kind = BackendKind::Mock;
        } else if (kind == "http") {
            rc.backend_kind = BackendKind::Http;
        } else {
            throw ConfigError("backend.kind must be 'mock' or 'http'");
        }
        o.get("base_url", rc.http.base_url);
        o.get("model", rc.http.model);
        o.get("auth_env", rc.http.auth_env);
        o.get("timeout_ms", rc.http.timeout_ms);
        o.get("max_retries", rc.http.max_retries);
        o.get("retry_backoff_ms", rc.http.retry_backoff_ms);
        o.get("max_in_flight", rc.http.max_in_flight);
    }
    rc.check();
    return rc;
}

nlohmann::json RunConfig::to_json() const {
    nlohmann::json j;
    j["horizon"] = horizon;
    j["evolution"] = {
        {"initial_pool", evolution.initial_pool},
        {"parent_pool", evolution.parent_pool},
        {"children_multiplier", evolution.children_multiplier},
        {"generations", evolution.generations},
        {"subcycles", evolution.subcycles},
        {"gens_per_subcycle", evolution.gens_per_subcycle},
        {"inject_every", evolution.inject_every},
        {"inject_count", evolution.inject_count},
        {"elites_forward", evolution.elites_forward},
        {"nan_max", evolution.nan_max},
        {"num_per_request", evolution.num_per_request},
        {"max_repairs", evolution.max_repairs},
        {"mi_bins", evolution.mi_bins},
        {"seed", evolution.seed},
        {"threads", evolution.threads},
        {"seed_exprs", evolution.seed_exprs},
    };
    j["thresholds"] = {
        {"qualified_percentile", evolution.thresholds.qualified_percentile},
        {"elite_percentile", evolution.thresholds.elite_percentile},
        {"qualified_floors", floors_to(evolution.thresholds.qualified_floors)},
        {"elite_floors", floors_to(evolution.thresholds.elite_floors)},
    };
    j["strategy"] = {
        {"top_k", strategy.top_k},
        {"drop_n", strategy.drop_n},
        {"buy_cost", strategy.buy_cost},
        {"sell_cost", strategy.sell_cost},
        {"min_fee", strategy.min_fee},
        {"periods_per_year", strategy.periods_per_year},
        {"initial_cash", strategy.initial_cash},
    };
    j["eval"] = {{"epsilon", eval.epsilon}, {"min_window_fill", eval.min_window_fill}};
    nlohmann::json b;
    b["kind"] = backend_kind == BackendKind::Mock ? "mock" : "http";
    b["base_url"] = http.base_url;
    b["model"] = http.model;
    b["auth_env"] = http.auth_env;
    b["timeout_ms"] = http.timeout_ms;
    b["max_retries"] = http.max_retries;
    b["retry_backoff_ms"] = http.retry_backoff_ms;
    b["max_in_flight"] = http.max_in_flight;
    j["backend"] = b;
    return j;
}

RunConfig load_run_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config '" + path + "'");
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("config '" + path + "' is not valid JSON: " + e.what());
    }
    return RunConfig::from_json(j);
}

}  // namespace alphamine
