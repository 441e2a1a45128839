#pragma once

#include "lecam/experiment.hpp"

#include <optional>
#include <span>
#include <string>
#include <vector>

namespace lecam {

/// Dual side of a solved LP, kept so a caller can re-check optimality.
struct DualCertificate {
    Vector row_duals;
    double primal_objective = 0.0;
    double dual_objective = 0.0;
    double gap = 0.0;
    double dual_infeasibility = 0.0;
    double primal_infeasibility = 0.0;
    std::size_t iterations = 0;
};

struct DeficiencyResult {
    /// max over the subset of ||p_theta K - q_theta||_1 for `kernel`.
    double value = 0.0;
    Kernel kernel;
    std::vector<ParamLabel> subset;
    std::optional<DualCertificate> dual_certificate;
};

/// max_{theta in subset} ||p_theta K - q_theta||_1.
double max_deviation(const FiniteExperiment& source, const FiniteExperiment& target, const Kernel& kernel,
                     std::span<const ParamLabel> subset);

/// delta_S(source, target): the smallest worst-case total variation with
/// which a randomization of `source` reproduces `target` on `subset`.
///
/// Solved as
///
///     min s  st  sum_y K(w,y) = 1,
///                sum_w p_t(w) K(w,y) - u+(t,y) + u-(t,y) = q_t(y),
///                sum_y u+(t,y) + u-(t,y) <= s,       all variables >= 0.
DeficiencyResult deficiency(const FiniteExperiment& source, const FiniteExperiment& target,
                            std::span<const ParamLabel> subset);

/// Full parameter set of `source`.
DeficiencyResult deficiency(const FiniteExperiment& source, const FiniteExperiment& target);

/// How the two directed deficiencies are combined into one distance.
enum class DistanceMode {
    /// min(delta(P,Q), delta(Q,P)).
    MinDirected,
    /// max(delta(P,Q), delta(Q,P)), the classical Le Cam distance.
    StandardMax,
};

std::string to_string(DistanceMode mode);
DistanceMode parse_distance_mode(const std::string& text);

struct LeCamDistance {
    double value = 0.0;
    DistanceMode mode = DistanceMode::MinDirected;
    DeficiencyResult forward;  ///< delta(P, Q)
    DeficiencyResult backward; ///< delta(Q, P)
};

LeCamDistance lecam_distance(const FiniteExperiment& p, const FiniteExperiment& q, std::span<const ParamLabel> subset,
                             DistanceMode mode = DistanceMode::MinDirected);

} // namespace lecam
