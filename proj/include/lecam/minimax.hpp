#pragma once

#include "lecam/deficiency.hpp"
#include "lecam/experiment.hpp"

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace lecam {

/// Loss L[t][z] >= 0 over a finite action set, read through the truncation
/// min(M, L[t][z]).
class LossSpec {
public:
    LossSpec(std::vector<ParamLabel> params, std::vector<std::string> actions, Matrix loss, double truncation);

    /// (t - z)^2 on a numeric action grid; parameters must be numeric labels.
    static LossSpec truncated_squared_error(std::vector<ParamLabel> params, std::span<const double> actions,
                                            double truncation);
    /// One action per parameter; loss 1 unless the action names the parameter.
    static LossSpec zero_one(std::vector<ParamLabel> params);

    const std::vector<ParamLabel>& params() const { return params_; }
    const std::vector<std::string>& actions() const { return actions_; }
    const Matrix& loss() const { return loss_; }
    double truncation() const { return truncation_; }
    std::size_t num_actions() const { return actions_.size(); }

    std::size_t row_of(const ParamLabel& t) const;
    double truncated(std::size_t row, std::size_t action) const;
    /// Same loss, different truncation level.
    LossSpec with_truncation(double truncation) const;

private:
    std::vector<ParamLabel> params_;
    std::vector<std::string> actions_;
    Matrix loss_;
    double truncation_;
};

/// sum_y q_t(y) sum_z rho(y, z) min(M, L_t(z)).
double risk(const FiniteExperiment& experiment, const Kernel& decision, const LossSpec& loss, const ParamLabel& t);

/// max_{t in subset} risk.
double max_risk(const FiniteExperiment& experiment, const Kernel& decision, const LossSpec& loss,
                std::span<const ParamLabel> subset);

struct BayesResult {
    double value = 0.0;
    Kernel decision;
};

/// Pointwise Bayes rule for `prior` over `subset`; ties go to the lowest
/// action index.
BayesResult bayes_risk(const FiniteExperiment& experiment, const LossSpec& loss, std::span<const ParamLabel> subset,
                       std::span<const double> prior);

struct GameResult {
    /// max_t risk of `decision`.
    double value = 0.0;
    Kernel decision;
    /// Least-favourable prior read from the LP duals.
    Vector prior;
    std::vector<ParamLabel> subset;
    /// |value - bayes_risk(prior)|: the inf-sup / sup-inf gap.
    double gap = 0.0;
    Vector risks;
    DualCertificate certificate;
};

/// inf_rho max_{t in subset} risk(rho, t) as the LP
///
///     min v  st  sum_z rho(y, z) = 1,  risk(rho, t) <= v  for t in subset.
GameResult minimax_value(const FiniteExperiment& experiment, const LossSpec& loss, std::span<const ParamLabel> subset);

/// Kernel from the limit's sample space to the sample space of P_n.
struct IndexedKernel {
    int n = 0;
    Kernel kernel;
};

struct TransferRow {
    int n = 0;
    /// (a): inf_tau max_t risk under P_n.
    double exact = 0.0;
    /// epsilon_n = max_t ||Q_t K_n - P_{n,t}||_1.
    double epsilon = 0.0;
    /// (b): R'' - M epsilon_n.
    double transfer_bound = 0.0;
    /// max_t risk under Q of K_n composed with the P_n minimax rule.
    double composed_limit_risk = 0.0;
    bool bound_holds = false;   ///< a >= b - 1e-7
    bool exceeds_rprime = false; ///< a > R'
};

struct TransferReport {
    /// R'': minimax value of the limit on the subset.
    double limit_value = 0.0;
    Vector limit_prior;
    double rprime = 0.0;
    double truncation = 0.0;
    std::vector<TransferRow> rows;
    /// Least probed n from which a > R' at every larger probe.
    std::optional<int> crossing;

    bool all_bounds_hold() const;
};

/// For each probed n, compares the exact minimax risk of P_n with the lower
/// bound R'' - M epsilon_n transferred from the limit through K_n. Throws
/// InvalidArgument if some probe has no kernel.
TransferReport lam_transfer_check(const std::function<FiniteExperiment(int)>& sequence, const std::vector<int>& probes,
                                  const FiniteExperiment& limit, const LossSpec& loss,
                                  std::span<const ParamLabel> subset, double rprime,
                                  const std::vector<IndexedKernel>& kernels);

} // namespace lecam
