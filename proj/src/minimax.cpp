#include "lecam/minimax.hpp"

#include "lecam/lp.hpp"
#include "lecam/scenarios.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

namespace lecam {

LossSpec::LossSpec(std::vector<ParamLabel> params, std::vector<std::string> actions, Matrix loss, double truncation)
    : params_(std::move(params)), actions_(std::move(actions)), loss_(std::move(loss)), truncation_(truncation)
{
    if (!(truncation_ > 0.0) || !std::isfinite(truncation_))
        throw InvalidArgument(fmt::format("loss: truncation must be finite and positive, got {}", truncation_));
    if (actions_.empty())
        throw InvalidArgument("loss: no actions");
    if (loss_.size() != params_.size())
        throw DimensionError(fmt::format("loss: {} rows for {} parameters", loss_.size(), params_.size()));
    for (std::size_t i = 0; i < params_.size(); ++i) {
        if (std::find(params_.begin(), params_.begin() + i, params_[i]) != params_.begin() + i)
            throw InvalidArgument(fmt::format("loss: duplicate parameter '{}'", params_[i]));
        if (loss_[i].size() != actions_.size())
            throw DimensionError(fmt::format("loss: row '{}' has {} entries for {} actions", params_[i],
                                             loss_[i].size(), actions_.size()));
        for (double v : loss_[i])
            if (!(v >= 0.0) || !std::isfinite(v))
                throw InvalidArgument(fmt::format("loss: entry {} in row '{}' is not a finite nonnegative number", v,
                                                  params_[i]));
    }
}

LossSpec LossSpec::truncated_squared_error(std::vector<ParamLabel> params, std::span<const double> actions,
                                           double truncation)
{
    std::vector<std::string> names;
    for (double z : actions)
        names.push_back(format_label(z));
    Matrix loss;
    for (const auto& p : params) {
        const double t = parse_label(p);
        Vector row;
        for (double z : actions)
            row.push_back((t - z) * (t - z));
        loss.push_back(std::move(row));
    }
    return LossSpec(std::move(params), std::move(names), std::move(loss), truncation);
}

LossSpec LossSpec::zero_one(std::vector<ParamLabel> params)
{
    Matrix loss(params.size(), Vector(params.size(), 1.0));
    for (std::size_t i = 0; i < params.size(); ++i)
        loss[i][i] = 0.0;
    auto actions = params;
    return LossSpec(std::move(params), std::move(actions), std::move(loss), 1.0);
}

std::size_t LossSpec::row_of(const ParamLabel& t) const
{
    const auto it = std::find(params_.begin(), params_.end(), t);
    if (it == params_.end())
        throw DimensionError(fmt::format("loss has no row for parameter '{}'", t));
    return static_cast<std::size_t>(it - params_.begin());
}

double LossSpec::truncated(std::size_t row, std::size_t action) const
{
    return std::min(truncation_, loss_[row][action]);
}

LossSpec LossSpec::with_truncation(double truncation) const
{
    return LossSpec(params_, actions_, loss_, truncation);
}

namespace {

void check_decision(const FiniteExperiment& experiment, const Kernel& decision, const LossSpec& loss)
{
    if (decision.from_size() != experiment.sample_size() || decision.to_size() != loss.num_actions())
        throw DimensionError(fmt::format("decision kernel is {}x{}, expected {}x{}", decision.from_size(),
                                         decision.to_size(), experiment.sample_size(), loss.num_actions()));
}

void check_subset(const FiniteExperiment& experiment, const LossSpec& loss, std::span<const ParamLabel> subset)
{
    if (subset.empty())
        throw InvalidArgument("empty parameter subset");
    for (const auto& t : subset) {
        if (!experiment.has_param(t))
            throw DimensionError(fmt::format("experiment has no parameter '{}'", t));
        loss.row_of(t);
    }
}

} // namespace

double risk(const FiniteExperiment& experiment, const Kernel& decision, const LossSpec& loss, const ParamLabel& t)
{
    check_decision(experiment, decision, loss);
    const auto& q = experiment.row(experiment.index_of(t));
    const auto r = loss.row_of(t);
    double total = 0.0;
    for (std::size_t y = 0; y < q.size(); ++y) {
        if (q[y] == 0.0)
            continue;
        double inner = 0.0;
        for (std::size_t z = 0; z < loss.num_actions(); ++z)
            inner += decision(y, z) * loss.truncated(r, z);
        total += q[y] * inner;
    }
    return total;
}

double max_risk(const FiniteExperiment& experiment, const Kernel& decision, const LossSpec& loss,
                std::span<const ParamLabel> subset)
{
    check_subset(experiment, loss, subset);
    double worst = 0.0;
    for (const auto& t : subset)
        worst = std::max(worst, risk(experiment, decision, loss, t));
    return worst;
}

BayesResult bayes_risk(const FiniteExperiment& experiment, const LossSpec& loss, std::span<const ParamLabel> subset,
                       std::span<const double> prior)
{
    check_subset(experiment, loss, subset);
    if (prior.size() != subset.size())
        throw DimensionError(fmt::format("prior has {} weights for {} parameters", prior.size(), subset.size()));
    double mass = 0.0;
    for (double w : prior) {
        if (!(w >= 0.0))
            throw InvalidArgument("prior weights must be nonnegative");
        mass += w;
    }
    if (std::abs(mass - 1.0) > 1e-9)
        throw InvalidArgument(fmt::format("prior sums to {}, not 1", mass));

    std::vector<std::size_t> rows, lrows;
    for (const auto& t : subset) {
        rows.push_back(experiment.index_of(t));
        lrows.push_back(loss.row_of(t));
    }
    const std::size_t na = loss.num_actions();
    Matrix choice(experiment.sample_size(), Vector(na, 0.0));
    double value = 0.0;
    for (std::size_t y = 0; y < experiment.sample_size(); ++y) {
        std::size_t best = 0;
        double best_cost = 0.0;
        for (std::size_t z = 0; z < na; ++z) {
            double cost = 0.0;
            for (std::size_t i = 0; i < subset.size(); ++i)
                cost += prior[i] * experiment.row(rows[i])[y] * loss.truncated(lrows[i], z);
            if (z == 0 || cost < best_cost) {
                best = z;
                best_cost = cost;
            }
        }
        choice[y][best] = 1.0;
        value += best_cost;
    }
    return {value, Kernel(experiment.sample_size(), na, std::move(choice))};
}

GameResult minimax_value(const FiniteExperiment& experiment, const LossSpec& loss, std::span<const ParamLabel> subset)
{
    check_subset(experiment, loss, subset);
    const std::size_t k = subset.size();
    const std::size_t ny = experiment.sample_size();
    const std::size_t na = loss.num_actions();
    std::vector<std::size_t> rows, lrows;
    for (const auto& t : subset) {
        rows.push_back(experiment.index_of(t));
        lrows.push_back(loss.row_of(t));
    }

    std::vector<bool> live(ny, false);
    for (std::size_t y = 0; y < ny; ++y)
        for (auto r : rows)
            live[y] = live[y] || experiment.row(r)[y] > 0.0;

    using lp::Sense;
    lp::LinearProgram program;
    const std::size_t npos = static_cast<std::size_t>(-1);
    std::vector<std::size_t> var(ny * na, npos);
    for (std::size_t y = 0; y < ny; ++y) {
        if (!live[y])
            continue;
        const auto row = program.add_row(Sense::Equal, 1.0);
        for (std::size_t z = 0; z < na; ++z) {
            var[y * na + z] = program.add_variable(0.0);
            program.add_coefficient(row, var[y * na + z], 1.0);
        }
    }
    const auto v = program.add_variable(1.0);
    std::vector<std::size_t> risk_rows;
    for (std::size_t i = 0; i < k; ++i) {
        const auto row = program.add_row(Sense::LessEqual, 0.0);
        risk_rows.push_back(row);
        program.add_coefficient(row, v, -1.0);
        for (std::size_t y = 0; y < ny; ++y) {
            const double q = experiment.row(rows[i])[y];
            if (q == 0.0)
                continue;
            for (std::size_t z = 0; z < na; ++z) {
                const double c = q * loss.truncated(lrows[i], z);
                if (c != 0.0)
                    program.add_coefficient(row, var[y * na + z], c);
            }
        }
    }

    const auto sol = lp::solve(program);
    if (!sol.optimal())
        throw SolverError(fmt::format("minimax LP ended with status {}", lp::to_string(sol.status)));

    Matrix rho(ny, Vector(na, 0.0));
    for (std::size_t y = 0; y < ny; ++y)
        if (live[y])
            for (std::size_t z = 0; z < na; ++z)
                rho[y][z] = sol.x[var[y * na + z]];
    Vector fallback(na, 0.0);
    fallback[0] = 1.0;
    auto decision = Kernel::cleaned(std::move(rho), fallback);

    // Duals of the <= rows are nonpositive; their negation is the prior.
    Vector prior(k, 0.0);
    double mass = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
        prior[i] = std::max(0.0, -sol.duals[risk_rows[i]]);
        mass += prior[i];
    }
    if (mass > 0.0)
        for (auto& w : prior)
            w /= mass;
    else
        std::fill(prior.begin(), prior.end(), 1.0 / static_cast<double>(k));

    GameResult out{0.0, decision, prior, std::vector<ParamLabel>(subset.begin(), subset.end()), 0.0, {}, {}};
    for (const auto& t : subset) {
        out.risks.push_back(risk(experiment, decision, loss, t));
        out.value = std::max(out.value, out.risks.back());
    }
    out.gap = std::abs(out.value - bayes_risk(experiment, loss, subset, prior).value);
    out.certificate = {sol.duals,           sol.primal_objective,     sol.dual_objective, sol.gap,
                       sol.dual_infeasibility, sol.primal_infeasibility, sol.iterations};
    return out;
}

bool TransferReport::all_bounds_hold() const
{
    return std::all_of(rows.begin(), rows.end(), [](const TransferRow& r) { return r.bound_holds; });
}

TransferReport lam_transfer_check(const std::function<FiniteExperiment(int)>& sequence, const std::vector<int>& probes,
                                  const FiniteExperiment& limit, const LossSpec& loss,
                                  std::span<const ParamLabel> subset, double rprime,
                                  const std::vector<IndexedKernel>& kernels)
{
    std::map<int, const Kernel*> by_n;
    for (const auto& k : kernels)
        by_n[k.n] = &k.kernel;
    for (int n : probes)
        if (!by_n.count(n))
            throw InvalidArgument(fmt::format("lam_transfer_check: no certified kernel for n = {}", n));

    const auto game = minimax_value(limit, loss, subset);
    TransferReport report;
    report.limit_value = game.value;
    report.limit_prior = game.prior;
    report.rprime = rprime;
    report.truncation = loss.truncation();
    for (int n : probes) {
        const auto pn = sequence(n);
        const Kernel& kn = *by_n.at(n);
        TransferRow row;
        row.n = n;
        const auto local = minimax_value(pn, loss, subset);
        row.exact = local.value;
        row.epsilon = max_deviation(limit, pn, kn, subset);
        row.transfer_bound = game.value - loss.truncation() * row.epsilon;
        row.composed_limit_risk = max_risk(limit, compose_kernels(kn, local.decision), loss, subset);
        row.bound_holds = row.exact >= row.transfer_bound - 1e-7;
        row.exceeds_rprime = row.exact > rprime;
        report.rows.push_back(row);
    }
    for (auto it = report.rows.rbegin(); it != report.rows.rend() && it->exceeds_rprime; ++it)
        report.crossing = it->n;
    return report;
}

} // namespace lecam
