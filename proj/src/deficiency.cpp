#include "lecam/deficiency.hpp"

#include "lecam/lp.hpp"

#include <fmt/format.h>

#include <algorithm>

namespace lecam {

namespace {

void check_subset(const FiniteExperiment& source, const FiniteExperiment& target, std::span<const ParamLabel> subset)
{
    if (subset.empty())
        throw InvalidArgument("deficiency: empty parameter subset");
    for (const auto& label : subset) {
        if (!source.has_param(label))
            throw DimensionError(fmt::format("deficiency: source experiment has no parameter '{}'", label));
        if (!target.has_param(label))
            throw DimensionError(fmt::format("deficiency: target experiment has no parameter '{}'", label));
    }
}

} // namespace

double max_deviation(const FiniteExperiment& source, const FiniteExperiment& target, const Kernel& kernel,
                     std::span<const ParamLabel> subset)
{
    check_subset(source, target, subset);
    if (kernel.from_size() != source.sample_size() || kernel.to_size() != target.sample_size())
        throw DimensionError(fmt::format("max_deviation: kernel {}x{} between spaces of size {} and {}",
                                         kernel.from_size(), kernel.to_size(), source.sample_size(),
                                         target.sample_size()));
    const auto pushed = push_forward(source.restrict_to(subset), kernel);
    double worst = 0.0;
    for (std::size_t i = 0; i < subset.size(); ++i)
        worst = std::max(worst, total_variation(pushed.row(i), target.row(target.index_of(subset[i]))));
    return worst;
}

DeficiencyResult deficiency(const FiniteExperiment& source, const FiniteExperiment& target,
                            std::span<const ParamLabel> subset)
{
    check_subset(source, target, subset);
    const auto p = source.restrict_to(subset);
    const auto q = target.restrict_to(subset);
    const std::size_t k = subset.size();
    const std::size_t n_from = p.sample_size();
    const std::size_t n_to = q.sample_size();

    // Source atoms no parameter in the subset can produce do not enter the
    // objective; their kernel rows are filled in afterwards.
    std::vector<bool> live(n_from, false);
    for (std::size_t w = 0; w < n_from; ++w)
        for (std::size_t t = 0; t < k; ++t)
            live[w] = live[w] || p.row(t)[w] > 0.0;

    using lp::Sense;
    lp::LinearProgram program;
    const std::size_t npos = static_cast<std::size_t>(-1);
    std::vector<std::size_t> kvar(n_from * n_to, npos);
    std::vector<std::size_t> row_sum(n_from, npos);
    for (std::size_t w = 0; w < n_from; ++w) {
        if (!live[w])
            continue;
        row_sum[w] = program.add_row(Sense::Equal, 1.0);
        for (std::size_t y = 0; y < n_to; ++y) {
            const auto v = program.add_variable(0.0);
            kvar[w * n_to + y] = v;
            program.add_coefficient(row_sum[w], v, 1.0);
        }
    }
    const auto s = program.add_variable(1.0);
    for (std::size_t t = 0; t < k; ++t) {
        const auto budget = program.add_row(Sense::LessEqual, 0.0);
        program.add_coefficient(budget, s, -1.0);
        for (std::size_t y = 0; y < n_to; ++y) {
            const auto match = program.add_row(Sense::Equal, q.row(t)[y]);
            for (std::size_t w = 0; w < n_from; ++w)
                if (live[w] && p.row(t)[w] > 0.0)
                    program.add_coefficient(match, kvar[w * n_to + y], p.row(t)[w]);
            const auto over = program.add_variable(0.0);
            const auto under = program.add_variable(0.0);
            program.add_coefficient(match, over, -1.0);
            program.add_coefficient(match, under, 1.0);
            program.add_coefficient(budget, over, 1.0);
            program.add_coefficient(budget, under, 1.0);
        }
    }

    const auto sol = lp::solve(program);
    if (!sol.optimal())
        throw SolverError(fmt::format("deficiency LP ended with status {}", lp::to_string(sol.status)));

    Matrix km(n_from, Vector(n_to, 0.0));
    for (std::size_t w = 0; w < n_from; ++w)
        if (live[w])
            for (std::size_t y = 0; y < n_to; ++y)
                km[w][y] = sol.x[kvar[w * n_to + y]];
    auto kernel = Kernel::cleaned(std::move(km));

    DualCertificate cert{sol.duals,           sol.primal_objective,     sol.dual_objective, sol.gap,
                         sol.dual_infeasibility, sol.primal_infeasibility, sol.iterations};
    const double value = max_deviation(source, target, kernel, subset);
    return {value, std::move(kernel), std::vector<ParamLabel>(subset.begin(), subset.end()), std::move(cert)};
}

DeficiencyResult deficiency(const FiniteExperiment& source, const FiniteExperiment& target)
{
    return deficiency(source, target, source.params());
}

std::string to_string(DistanceMode mode)
{
    return mode == DistanceMode::MinDirected ? "paper-min" : "standard-max";
}

DistanceMode parse_distance_mode(const std::string& text)
{
    if (text == "paper-min")
        return DistanceMode::MinDirected;
    if (text == "standard-max")
        return DistanceMode::StandardMax;
    throw InvalidArgument(fmt::format("unknown distance mode '{}' (expected paper-min or standard-max)", text));
}

LeCamDistance lecam_distance(const FiniteExperiment& p, const FiniteExperiment& q, std::span<const ParamLabel> subset,
                             DistanceMode mode)
{
    auto forward = deficiency(p, q, subset);
    auto backward = deficiency(q, p, subset);
    const double value = mode == DistanceMode::MinDirected ? std::min(forward.value, backward.value)
                                                        : std::max(forward.value, backward.value);
    return {value, mode, std::move(forward), std::move(backward)};
}

} // namespace lecam
