#pragma once

#include "lecam/coupling.hpp"
#include "lecam/deficiency.hpp"
#include "lecam/experiment.hpp"

#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace lecam {

enum class TransportCost {
    Euclidean,
    /// min(2, |x - y|)
    CappedEuclidean,
};

/// Optimal transport cost between two finitely supported laws, solved as the
/// transportation LP over couplings with the given marginals.
double transport_distance(const PointDistribution& a, const PointDistribution& b,
                          TransportCost cost = TransportCost::Euclidean);

/// n -> P_n, restricted to `subset` before use.
struct ExperimentSequence {
    std::function<FiniteExperiment(int)> generator;
    std::vector<ParamLabel> subset;
    /// Dominating vector for P_n restricted to the subset; uniform mixture if empty.
    std::function<Vector(const FiniteExperiment&)> dominating;

    LabeledSpace space(int n) const;
};

struct ScheduleStage {
    double delta = 0.0;
    double epsilon = 0.0;
};

/// delta_j = epsilon_j = 2^-j for j = 1..stages.
std::vector<ScheduleStage> default_schedule(int stages = 6);

struct StageReport {
    std::size_t index = 0; ///< j, starting at 1
    ScheduleStage stage;
    std::size_t cells = 0;
    /// n_j: least probed n from which (iii) holds at every larger probe.
    std::optional<int> threshold;
    /// Probes at which (iii) failed, with the first failing cell.
    std::vector<std::pair<int, std::size_t>> failures;
};

struct ConvergenceRow {
    int n = 0;
    /// Stage whose partition builds the coupling kernel at this n.
    std::optional<std::size_t> stage;
    double certified_bound = 0.0;
    double achieved = 0.0;
    double lp_deficiency = 0.0;
    double lp_gap = 0.0;
    double transport = 0.0;
    DeficiencyResult lp;
};

struct ConvergenceReport {
    std::vector<StageReport> stages;
    std::vector<ConvergenceRow> rows;
    /// Set when some stage never satisfied (iii) within the probes.
    bool truncated = false;
    std::string diagnostic;

    /// LP deficiency <= achieved + 1e-7 and achieved <= bound + 1e-9 on every
    /// row with a stage, and bounds nonincreasing in n.
    bool consistent() const;
};

/// Partitions per stage from the limit's likelihood law, thresholds n_j by
/// probing, then for every probe n a coupling kernel from the stage in force
/// plus the exact LP deficiency delta_S(limit, P_n) as a cross-check.
ConvergenceReport certify_convergence(const ExperimentSequence& sequence, const LabeledSpace& limit,
                                      const std::vector<ScheduleStage>& schedule, const std::vector<int>& probes);

} // namespace lecam
