// Command-line front end: deficiency, couple, converge, minimax, lam-check, scenario.
//
// Exit codes: 0 all checks passed, 2 a certified bound or inequality failed,
// 1 usage or IO error.

#include "lecam/convergence.hpp"
#include "lecam/coupling.hpp"
#include "lecam/deficiency.hpp"
#include "lecam/io.hpp"
#include "lecam/minimax.hpp"
#include "lecam/scenario.hpp"
#include "lecam/scenarios.hpp"

#include <CLI11.hpp>
#include <fmt/format.h>

#include <iostream>
#include <optional>

using namespace lecam;

namespace {

constexpr int kOk = 0;
constexpr int kUsage = 1;
constexpr int kCheckFailed = 2;

void emit(const std::string& out, const Json& value)
{
    if (out.empty() || out == "-")
        std::cout << value.dump(2) << "\n";
    else
        write_json_file(out, value);
}

std::string num(double v)
{
    return fmt::format("{:.12g}", v);
}

std::vector<ParamLabel> subset_or_all(const std::string& text, const FiniteExperiment& exp)
{
    return text.empty() ? exp.params() : split_labels(text);
}

ScenarioConfig load_config(const std::string& path)
{
    return path.empty() ? ScenarioConfig{} : ScenarioConfig::from_json(read_json_file(path));
}

std::string convergence_csv(const ConvergenceReport& report)
{
    std::vector<std::vector<std::string>> rows;
    for (const auto& r : report.rows)
        rows.push_back({std::to_string(r.n), r.stage ? std::to_string(*r.stage) : "",
                        r.stage ? num(r.certified_bound) : "", r.stage ? num(r.achieved) : "", num(r.lp_deficiency),
                        num(r.transport)});
    return to_csv({"n", "stage", "certified_bound", "achieved", "lp_deficiency", "transport"}, rows);
}

std::string transfer_csv(const TransferReport& report)
{
    std::vector<std::vector<std::string>> rows;
    for (const auto& r : report.rows)
        rows.push_back({std::to_string(r.n), num(r.exact), num(r.epsilon), num(r.transfer_bound),
                        r.bound_holds ? "1" : "0", r.exceeds_rprime ? "1" : "0"});
    return to_csv({"n", "exact", "epsilon", "transfer_bound", "bound_holds", "exceeds_rprime"}, rows);
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Deficiency, coupling kernels and minimax transfer for finite experiments"};
    app.require_subcommand(1);
    int status = kOk;

    // deficiency
    std::string d_p, d_q, d_subset, d_mode = "paper-min", d_out;
    bool d_distance = false;
    auto* def = app.add_subcommand("deficiency", "delta_S(P, Q) by linear programming");
    def->add_option("--source,--p", d_p, "source experiment JSON")->required();
    def->add_option("--target,--q", d_q, "target experiment JSON")->required();
    def->add_option("--subset", d_subset, "comma-separated parameters (default: all of P)");
    def->add_flag("--distance", d_distance, "also solve delta_S(Q, P) and combine");
    def->add_option("--mode", d_mode, "paper-min or standard-max");
    def->add_option("--out", d_out, "output JSON (default stdout)");
    def->callback([&] {
        const auto p = read_experiment(read_json_file(d_p));
        const auto q = read_experiment(read_json_file(d_q));
        const auto s = subset_or_all(d_subset, p);
        if (d_distance)
            emit(d_out, to_json(lecam_distance(p, q, s, parse_distance_mode(d_mode))));
        else
            emit(d_out, to_json(deficiency(p, q, s)));
    });

    // couple
    std::string c_p, c_q, c_out;
    double c_delta = 0.5, c_eps = 0.1;
    auto* cpl = app.add_subcommand("couple", "coupling kernel from Q to P with the 2 delta + 4 epsilon certificate");
    cpl->add_option("--p-side,--p", c_p, "experiment whose likelihood law plays X")->required();
    cpl->add_option("--q-side,--q", c_q, "experiment whose likelihood law plays Y")->required();
    cpl->add_option("--delta", c_delta, "cell diameter bound")->check(CLI::PositiveNumber);
    cpl->add_option("--epsilon", c_eps, "mass slack")->check(CLI::Range(0.0, 1.0));
    cpl->add_option("--out", c_out, "output JSON (default stdout)");
    cpl->callback([&] {
        const auto p = LabeledSpace::from(read_experiment(read_json_file(c_p)));
        auto qexp = read_experiment(read_json_file(c_q));
        const auto q = LabeledSpace::from(qexp.restrict_to(p.base.params()));
        const auto partition = build_partition(q.law(), c_delta, c_eps);
        const auto cond = check_condition_iii(p.law(), q.law(), partition, c_eps);
        if (!cond.holds) {
            const auto& cell = cond.cells[*cond.failing_cell];
            emit(c_out, Json{{"condition_holds", false},
                             {"failing_cell", *cond.failing_cell},
                             {"p_mass", cell.p_mass},
                             {"q_mass", cell.q_mass}});
            status = kCheckFailed;
            return;
        }
        const auto kernel = construct_kernel(p, q, partition, c_eps);
        emit(c_out, to_json(certify_bound(p, q, kernel, partition, c_eps), partition));
    });

    // converge
    std::string v_config, v_scenario, v_subset, v_schedule = "default", v_probe, v_out, v_csv;
    auto* conv = app.add_subcommand("converge", "stage thresholds and coupling bounds along a scenario sequence");
    conv->add_option("--config", v_config, "scenario config JSON");
    conv->add_option("--scenario", v_scenario, "binomial-lan or constant");
    conv->add_option("--subset", v_subset, "local parameters, e.g. -1,0,1");
    conv->add_option("--schedule", v_schedule, "'default' or a number of stages");
    conv->add_option("--probe", v_probe, "probe indices, e.g. 8,16,32");
    conv->add_option("--out", v_out, "output JSON (default stdout)");
    conv->add_option("--csv", v_csv, "also write the per-n table as CSV");
    conv->callback([&] {
        auto cfg = load_config(v_config);
        if (!v_scenario.empty())
            cfg.scenario = v_scenario;
        if (!v_subset.empty()) {
            cfg.t_grid.clear();
            for (const auto& l : split_labels(v_subset))
                cfg.t_grid.push_back(parse_label(l));
        }
        if (v_schedule != "default")
            cfg.stages = std::stoi(v_schedule);
        if (!v_probe.empty())
            cfg.n_grid = split_ints(v_probe);
        cfg.validate();
        const auto subset = local_params(cfg.t_grid);
        const auto& d = cfg.discretization;
        const auto limit_exp = gen_gaussian_shift(cfg.t_grid, d.lo, d.hi, d.step).experiment.restrict_to(subset);
        std::function<FiniteExperiment(int)> gen;
        if (cfg.scenario == "constant")
            gen = [limit_exp](int) { return limit_exp; };
        else
            gen = [t = cfg.t_grid](int n) { return gen_binomial_lan(n, t); };
        const auto report = certify_convergence({gen, subset, {}}, LabeledSpace::from(limit_exp),
                                                cfg.resolved_schedule(), cfg.n_grid);
        emit(v_out, to_json(report));
        if (!v_csv.empty())
            write_text_file(v_csv, convergence_csv(report));
        if (!report.consistent())
            status = kCheckFailed;
    });

    // minimax
    std::string m_exp, m_loss, m_subset, m_out;
    auto* mm = app.add_subcommand("minimax", "truncated minimax value, decision and least-favourable prior");
    mm->add_option("--exp", m_exp, "experiment JSON")->required();
    mm->add_option("--loss", m_loss, "loss JSON {actions, L, M}")->required();
    mm->add_option("--subset", m_subset, "comma-separated parameters (default: all)");
    mm->add_option("--out", m_out, "output JSON (default stdout)");
    mm->callback([&] {
        const auto exp = read_experiment(read_json_file(m_exp));
        const auto loss = read_loss(read_json_file(m_loss), exp.params());
        const auto s = subset_or_all(m_subset, exp);
        const auto game = minimax_value(exp, loss, s);
        emit(m_out, to_json(game, loss));
        if (game.gap > 1e-7)
            status = kCheckFailed;
    });

    // lam-check
    std::string l_config, l_scenario, l_out, l_csv;
    std::optional<double> l_ratio, l_abs;
    auto* lam = app.add_subcommand("lam-check", "exact local minimax risks against the transferred lower bound");
    lam->add_option("--config", l_config, "scenario config JSON");
    lam->add_option("--scenario", l_scenario, "binomial-lan or constant");
    auto* ratio_opt = lam->add_option("--rprime", l_ratio, "R' as a fraction of the limit value R''");
    lam->add_option("--rprime-abs", l_abs, "R' as an absolute value")->excludes(ratio_opt);
    lam->add_option("--out", l_out, "output JSON (default stdout)");
    lam->add_option("--csv", l_csv, "also write the per-n table as CSV");
    lam->callback([&] {
        auto cfg = load_config(l_config);
        if (!l_scenario.empty())
            cfg.scenario = l_scenario;
        if (l_ratio)
            cfg.rprime_ratio = *l_ratio;
        if (l_abs)
            cfg.rprime = *l_abs;
        const auto outcome = run_scenario(cfg);
        Json out = outcome.report["transfer"];
        out["subset"] = outcome.report["subset"];
        out["provenance"] = outcome.report["provenance"];
        emit(l_out, out);
        if (!l_csv.empty()) {
            TransferReport tr;
            for (const auto& r : out["rows"])
                tr.rows.push_back({r["n"].get<int>(), r["exact"].get<double>(), r["epsilon"].get<double>(),
                                   r["transfer_bound"].get<double>(), r["composed_limit_risk"].get<double>(),
                                   r["bound_holds"].get<bool>(), r["exceeds_rprime"].get<bool>()});
            write_text_file(l_csv, transfer_csv(tr));
        }
        if (!out["all_bounds_hold"].get<bool>())
            status = kCheckFailed;
    });

    // scenario
    std::string s_config, s_out;
    auto* sc = app.add_subcommand("scenario", "full pipeline report for a scenario config");
    sc->add_option("--config", s_config, "scenario config JSON (default: built-in binomial-lan)");
    sc->add_option("--out", s_out, "output JSON (default stdout)");
    sc->callback([&] {
        const auto outcome = run_scenario(load_config(s_config));
        emit(s_out, outcome.report);
        if (!outcome.passed)
            status = kCheckFailed;
    });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kUsage;
    } catch (const CertificationError& e) {
        std::cerr << "check failed: " << e.what() << "\n";
        return kCheckFailed;
    } catch (const ConditionError& e) {
        std::cerr << "check failed: " << e.what() << "\n";
        return kCheckFailed;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kUsage;
    }
    return status;
}
