#include "lecam/convergence.hpp"

#include "lecam/lp.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <limits>

namespace lecam {

double transport_distance(const PointDistribution& a, const PointDistribution& b, TransportCost cost)
{
    if (a.dim() != b.dim())
        throw DimensionError(fmt::format("transport_distance: dimensions {} and {}", a.dim(), b.dim()));
    using lp::Sense;
    lp::LinearProgram program;
    std::vector<std::size_t> supply(a.size());
    std::vector<std::size_t> demand(b.size());
    for (std::size_t i = 0; i < a.size(); ++i)
        supply[i] = program.add_row(Sense::Equal, a[i].weight);
    for (std::size_t j = 0; j < b.size(); ++j)
        demand[j] = program.add_row(Sense::Equal, b[j].weight);
    for (std::size_t i = 0; i < a.size(); ++i)
        for (std::size_t j = 0; j < b.size(); ++j) {
            double c = euclidean(a[i].point, b[j].point);
            if (cost == TransportCost::CappedEuclidean)
                c = std::min(c, 2.0);
            const auto v = program.add_variable(c);
            program.add_coefficient(supply[i], v, 1.0);
            program.add_coefficient(demand[j], v, 1.0);
        }
    const auto sol = lp::solve(program);
    if (!sol.optimal())
        throw SolverError(fmt::format("transport LP ended with status {}", lp::to_string(sol.status)));
    return std::max(0.0, sol.primal_objective);
}

LabeledSpace ExperimentSequence::space(int n) const
{
    auto exp = generator(n).restrict_to(subset);
    if (dominating)
        return LabeledSpace::from(exp, dominating(exp));
    return LabeledSpace::from(exp);
}

std::vector<ScheduleStage> default_schedule(int stages)
{
    std::vector<ScheduleStage> out;
    for (int j = 1; j <= stages; ++j)
        out.push_back({std::ldexp(1.0, -j), std::ldexp(1.0, -j)});
    return out;
}

bool ConvergenceReport::consistent() const
{
    double previous = std::numeric_limits<double>::infinity();
    for (const auto& row : rows) {
        if (!row.stage)
            continue;
        if (row.lp_deficiency > row.achieved + 1e-7 || row.achieved > row.certified_bound + 1e-9)
            return false;
        if (row.certified_bound > previous)
            return false;
        previous = row.certified_bound;
    }
    return true;
}

ConvergenceReport certify_convergence(const ExperimentSequence& sequence, const LabeledSpace& limit,
                                      const std::vector<ScheduleStage>& schedule, const std::vector<int>& probes)
{
    if (probes.empty())
        throw InvalidArgument("certify_convergence: no probe indices");
    if (!std::is_sorted(probes.begin(), probes.end()) ||
        std::adjacent_find(probes.begin(), probes.end()) != probes.end())
        throw InvalidArgument("certify_convergence: probes must be strictly increasing");
    for (std::size_t j = 1; j < schedule.size(); ++j)
        if (!(schedule[j].delta < schedule[j - 1].delta) || !(schedule[j].epsilon < schedule[j - 1].epsilon))
            throw InvalidArgument("certify_convergence: schedule must decrease strictly in delta and epsilon");
    if (limit.base.params() != sequence.subset)
        throw DimensionError("certify_convergence: the limit must be restricted to the sequence subset");

    std::vector<LabeledSpace> spaces;
    for (int n : probes)
        spaces.push_back(sequence.space(n));

    ConvergenceReport report;
    std::vector<Partition> partitions;
    int floor_n = probes.front();
    for (std::size_t j = 0; j < schedule.size(); ++j) {
        const auto& st = schedule[j];
        auto partition = build_partition(limit.law(), st.delta, st.epsilon);
        StageReport sr{j + 1, st, partition.num_cells(), std::nullopt, {}};

        // Walk probes from the top; n_j is the start of the longest run of
        // successes that reaches the largest probe.
        std::optional<int> threshold;
        bool run_alive = true;
        for (std::size_t p = probes.size(); p-- > 0;) {
            const auto cond = check_condition_iii(spaces[p].law(), limit.law(), partition, st.epsilon);
            if (cond.holds) {
                if (run_alive)
                    threshold = probes[p];
            } else {
                run_alive = false;
                sr.failures.emplace_back(probes[p], *cond.failing_cell);
            }
        }
        std::reverse(sr.failures.begin(), sr.failures.end());
        if (threshold)
            sr.threshold = std::max(*threshold, floor_n);
        report.stages.push_back(sr);
        if (!sr.threshold) {
            report.truncated = true;
            report.diagnostic = fmt::format(
                "stage {} (delta = {}, epsilon = {}): condition (iii) fails at the largest probe n = {}; "
                "the likelihood laws do not appear to converge to the limit at this resolution",
                j + 1, st.delta, st.epsilon, probes.back());
            break;
        }
        floor_n = *sr.threshold;
        partitions.push_back(std::move(partition));
    }

    for (std::size_t p = 0; p < probes.size(); ++p) {
        const int n = probes[p];
        ConvergenceRow row{n, std::nullopt, 0.0, 0.0, 0.0, 0.0, 0.0, deficiency(limit.base, spaces[p].base)};
        row.lp_deficiency = row.lp.value;
        row.lp_gap = row.lp.dual_certificate ? row.lp.dual_certificate->gap : 0.0;
        // Stage j in force when n_j <= n < n_{j+1}.
        std::optional<std::size_t> in_force;
        for (std::size_t j = 0; j < partitions.size(); ++j)
            if (*report.stages[j].threshold <= n)
                in_force = j;
        if (in_force) {
            const auto& st = schedule[*in_force];
            const auto coupling = construct_kernel(spaces[p], limit, partitions[*in_force], st.epsilon);
            const auto cert = certify_bound(spaces[p], limit, coupling, partitions[*in_force], st.epsilon);
            row.stage = *in_force + 1;
            row.certified_bound = cert.bound;
            row.achieved = cert.achieved;
        }
        row.transport = transport_distance(spaces[p].law(), limit.law());
        report.rows.push_back(std::move(row));
    }
    return report;
}

} // namespace lecam
