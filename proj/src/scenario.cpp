#include "lecam/scenario.hpp"

#include "lecam/lp.hpp"
#include "lecam/scenarios.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

namespace lecam {

namespace {

template <typename T>
T get_as(const Json& obj, const char* key, T fallback)
{
    if (!obj.contains(key) || obj.at(key).is_null())
        return fallback;
    try {
        return obj.at(key).get<T>();
    } catch (const nlohmann::json::exception&) {
        throw InvalidArgument(fmt::format("config field \"{}\" has the wrong type", key));
    }
}

template <typename F>
auto staged(const char* stage, F&& f) -> decltype(f())
{
    try {
        return f();
    } catch (const ScenarioError&) {
        throw;
    } catch (const std::exception& e) {
        throw ScenarioError(fmt::format("{}: {}", stage, e.what()));
    }
}

} // namespace

ScenarioConfig ScenarioConfig::from_json(const Json& value)
{
    if (!value.is_object())
        throw InvalidArgument("config must be a JSON object");
    static const std::set<std::string> known{"scenario",     "t_grid",     "n_grid", "discretization",
                                             "schedule",     "stages",     "loss",   "rprime_ratio",
                                             "rprime",       "refinement_tolerance", "seed"};
    for (const auto& [key, _] : value.items())
        if (!known.count(key))
            throw InvalidArgument(fmt::format("unknown config field \"{}\"", key));

    ScenarioConfig c;
    c.scenario = get_as(value, "scenario", c.scenario);
    c.t_grid = get_as(value, "t_grid", c.t_grid);
    c.n_grid = get_as(value, "n_grid", c.n_grid);
    if (value.contains("discretization")) {
        const auto& d = value.at("discretization");
        c.discretization.lo = get_as(d, "lo", c.discretization.lo);
        c.discretization.hi = get_as(d, "hi", c.discretization.hi);
        c.discretization.step = get_as(d, "step", c.discretization.step);
    }
    c.stages = get_as(value, "stages", c.stages);
    if (value.contains("schedule") && !value.at("schedule").is_null()) {
        const auto& s = value.at("schedule");
        if (s.is_string()) {
            if (s.get<std::string>() != "default")
                throw InvalidArgument(fmt::format("unknown schedule '{}'", s.get<std::string>()));
        } else if (s.is_array()) {
            for (const auto& st : s)
                c.schedule.push_back({get_as(st, "delta", 0.0), get_as(st, "epsilon", 0.0)});
        } else {
            throw InvalidArgument("\"schedule\" must be \"default\" or a list of {delta, epsilon}");
        }
    }
    if (value.contains("loss")) {
        const auto& l = value.at("loss");
        if (l.contains("L")) {
            c.loss = l;
        } else {
            const auto type = get_as<std::string>(l, "type", "truncated-squared-error");
            if (type != "truncated-squared-error")
                throw InvalidArgument(fmt::format("unknown loss type '{}'", type));
            if (l.contains("actions")) {
                const auto& a = l.at("actions");
                c.action_lo = get_as(a, "lo", c.action_lo);
                c.action_hi = get_as(a, "hi", c.action_hi);
                c.action_step = get_as(a, "step", c.action_step);
            }
            c.truncation = get_as(l, "M", c.truncation);
        }
    }
    c.rprime_ratio = get_as(value, "rprime_ratio", c.rprime_ratio);
    if (value.contains("rprime") && !value.at("rprime").is_null())
        c.rprime = get_as(value, "rprime", 0.0);
    c.refinement_tolerance = get_as(value, "refinement_tolerance", c.refinement_tolerance);
    c.seed = get_as(value, "seed", c.seed);
    c.validate();
    return c;
}

Json ScenarioConfig::to_json() const
{
    Json schedule_json = Json::array();
    for (const auto& st : resolved_schedule())
        schedule_json.push_back(Json{{"delta", st.delta}, {"epsilon", st.epsilon}});
    Json loss_json = loss.is_null() ? Json{{"type", "truncated-squared-error"},
                                           {"actions", Json{{"lo", action_lo}, {"hi", action_hi}, {"step", action_step}}},
                                           {"M", truncation}}
                                    : loss;
    return Json{{"scenario", scenario},
                {"t_grid", t_grid},
                {"n_grid", n_grid},
                {"discretization", Json{{"lo", discretization.lo}, {"hi", discretization.hi}, {"step", discretization.step}}},
                {"schedule", schedule_json},
                {"loss", loss_json},
                {"rprime_ratio", rprime_ratio},
                {"rprime", rprime ? Json(*rprime) : Json(nullptr)},
                {"refinement_tolerance", refinement_tolerance},
                {"seed", seed}};
}

void ScenarioConfig::validate() const
{
    if (scenario != "binomial-lan" && scenario != "constant")
        throw InvalidArgument(fmt::format("unknown scenario '{}' (expected binomial-lan or constant)", scenario));
    if (t_grid.empty())
        throw InvalidArgument("t_grid is empty");
    if (n_grid.empty())
        throw InvalidArgument("n_grid is empty");
    for (std::size_t i = 0; i < n_grid.size(); ++i) {
        if (n_grid[i] < 1)
            throw InvalidArgument(fmt::format("n_grid entry {} is below 1", n_grid[i]));
        if (i && n_grid[i] <= n_grid[i - 1])
            throw InvalidArgument("n_grid must be strictly increasing");
    }
    if (scenario == "binomial-lan")
        for (double t : t_grid)
            for (int n : n_grid) {
                const double p = 0.5 + t / (2.0 * std::sqrt(static_cast<double>(n)));
                if (!(p > 0.0 && p < 1.0))
                    throw InvalidArgument(fmt::format("t = {} gives success probability {} at n = {}", t, p, n));
            }
    if (!(discretization.step > 0.0) || !(discretization.hi > discretization.lo))
        throw InvalidArgument("discretization needs lo < hi and step > 0");
    if (schedule.empty() && stages < 1)
        throw InvalidArgument("stages must be at least 1");
    if (loss.is_null() && (!(action_step > 0.0) || action_hi < action_lo))
        throw InvalidArgument("action grid needs lo <= hi and step > 0");
    if (!(refinement_tolerance > 0.0))
        throw InvalidArgument("refinement_tolerance must be positive");
}

std::vector<ScheduleStage> ScenarioConfig::resolved_schedule() const
{
    return schedule.empty() ? default_schedule(stages) : schedule;
}

std::vector<double> ScenarioConfig::action_grid() const
{
    return lattice(action_lo, action_hi, action_step);
}

std::string fnv1a_hex(const std::string& text)
{
    std::uint64_t h = 14695981039346656037ull;
    for (unsigned char c : text) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return fmt::format("{:016x}", h);
}

std::vector<double> lattice(double lo, double hi, double step)
{
    const auto count = static_cast<long>(std::floor((hi - lo) / step + 1e-9)) + 1;
    std::vector<double> out;
    for (long i = 0; i < count; ++i) {
        double v = lo + static_cast<double>(i) * step;
        if (std::abs(v) < 1e-12)
            v = 0.0;
        out.push_back(v);
    }
    return out;
}

ScenarioOutcome run_scenario(const ScenarioConfig& config)
{
    config.validate();
    lp::reset_solve_stats();
    const auto& d = config.discretization;
    const auto subset = local_params(config.t_grid);

    const auto limit_shift = staged("limit", [&] { return gen_gaussian_shift(config.t_grid, d.lo, d.hi, d.step); });
    const auto limit_exp = limit_shift.experiment.restrict_to(subset);
    const auto limit = LabeledSpace::from(limit_exp);

    std::function<FiniteExperiment(int)> generator;
    if (config.scenario == "constant")
        generator = [limit_exp](int) { return limit_exp; };
    else
        generator = [t = config.t_grid](int n) { return gen_binomial_lan(n, t); };
    const ExperimentSequence sequence{generator, subset, {}};

    const auto loss = staged("loss", [&] {
        return config.loss.is_null() ? LossSpec::truncated_squared_error(subset, config.action_grid(), config.truncation)
                                     : read_loss(config.loss, subset);
    });

    const auto convergence = staged("convergence", [&] {
        return certify_convergence(sequence, limit, config.resolved_schedule(), config.n_grid);
    });

    const auto game = staged("limit game", [&] { return minimax_value(limit_exp, loss, subset); });
    const double rprime = config.rprime ? *config.rprime : config.rprime_ratio * game.value;

    std::vector<IndexedKernel> kernels;
    for (const auto& row : convergence.rows)
        kernels.push_back({row.n, row.lp.kernel});
    const auto transfer = staged("transfer", [&] {
        return lam_transfer_check([&](int n) { return generator(n).restrict_to(subset); }, config.n_grid, limit_exp,
                                  loss, subset, rprime, kernels);
    });

    // Halving the limit's grid step should barely move R''.
    const auto refined = staged("refinement", [&] {
        return gen_gaussian_shift(config.t_grid, d.lo, d.hi, d.step / 2.0);
    });
    const auto refined_exp = refined.experiment.restrict_to(subset);
    const auto refined_game = staged("refinement", [&] { return minimax_value(refined_exp, loss, subset); });
    const double refinement_change = std::abs(refined_game.value - game.value);
    const double refinement_transport =
        transport_distance(limit.law(), LabeledSpace::from(refined_exp).law());

    Json lan = Json::array();
    bool lan_ok = true;
    if (config.scenario == "binomial-lan") {
        for (double t : config.t_grid) {
            if (t == 0.0)
                continue;
            Json values = Json::array();
            double previous = std::numeric_limits<double>::infinity();
            bool decreasing = true;
            for (int n : config.n_grid) {
                const double r = lan_remainder(n, t);
                values.push_back(r);
                decreasing = decreasing && r <= previous;
                previous = r;
            }
            lan_ok = lan_ok && decreasing;
            lan.push_back(Json{{"t", t}, {"remainders", values}, {"decreasing", decreasing}});
        }
    }

    const auto stats = lp::solve_stats();
    Json checks{{"convergence_consistent", convergence.consistent()},
                {"transfer_bounds_hold", transfer.all_bounds_hold()},
                {"lp_gaps_within_1e-7", stats.max_gap <= 1e-7 && stats.non_optimal == 0},
                {"game_gap_within_1e-7", game.gap <= 1e-7},
                {"refinement_within_tolerance", refinement_change < config.refinement_tolerance}};
    if (config.scenario == "binomial-lan") {
        checks["lan_remainders_decrease"] = lan_ok;
        checks["deficiency_decreases"] = convergence.rows.back().lp_deficiency < convergence.rows.front().lp_deficiency;
    }
    bool passed = true;
    for (const auto& [_, v] : checks.items())
        passed = passed && v.get<bool>();

    const auto config_json = config.to_json();
    Json report;
    report["provenance"] = Json{{"version", kVersion}, {"config_hash", fnv1a_hex(config_json.dump())}};
    report["config"] = config_json;
    report["subset"] = subset;
    report["limit"] = Json{{"atoms", limit_exp.sample_size()},
                           {"likelihood_atoms", limit.law().size()},
                           {"relative_error_bound", limit_shift.relative_error_bound},
                           {"max_relative_error", limit_shift.max_relative_error},
                           {"minimax_value", game.value},
                           {"prior", game.prior},
                           {"refined_minimax_value", refined_game.value},
                           {"refinement_change", refinement_change},
                           {"refinement_tolerance", config.refinement_tolerance},
                           {"refinement_transport", refinement_transport}};
    report["lan"] = lan;
    report["convergence"] = to_json(convergence);
    report["transfer"] = to_json(transfer);
    report["lp"] = Json{{"solves", stats.solves},
                        {"non_optimal", stats.non_optimal},
                        {"max_gap", stats.max_gap},
                        {"max_dual_infeasibility", stats.max_dual_infeasibility},
                        {"max_primal_infeasibility", stats.max_primal_infeasibility}};
    report["checks"] = checks;
    report["passed"] = passed;
    return {std::move(report), passed};
}

} // namespace lecam
