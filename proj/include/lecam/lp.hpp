#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace lecam::lp {

enum class Sense { LessEqual, Equal, GreaterEqual };

enum class Status { Optimal, Infeasible, Unbounded, IterationLimit, NumericalFailure };

std::string to_string(Status status);

/// A linear program in the form
///
///     minimize c'x  subject to  a_i'x (<=|=|>=) b_i,  x >= 0.
///
/// Built incrementally; coefficients are stored sparsely by column.
class LinearProgram {
public:
    std::size_t add_variable(double cost);
    std::size_t add_row(Sense sense, double rhs);
    /// Accumulates into an existing entry.
    void add_coefficient(std::size_t row, std::size_t column, double value);

    std::size_t num_variables() const { return cost_.size(); }
    std::size_t num_rows() const { return rhs_.size(); }

    double cost(std::size_t column) const { return cost_[column]; }
    double rhs(std::size_t row) const { return rhs_[row]; }
    Sense sense(std::size_t row) const { return sense_[row]; }

    struct Entry {
        std::size_t row;
        double value;
    };
    /// Column entries, merged and sorted by row.
    std::vector<std::vector<Entry>> columns() const;

private:
    std::vector<double> cost_;
    std::vector<double> rhs_;
    std::vector<Sense> sense_;
    std::vector<std::vector<Entry>> raw_columns_;
};

struct SolverOptions {
    double feasibility_tol = 1e-9;
    double optimality_tol = 1e-9;
    double pivot_tol = 1e-9;
    /// Matrix entries smaller than this in magnitude are treated as zero by
    /// the pivoting. Certification still uses the exact program.
    double small_matrix_value = 1e-12;
    std::size_t max_iterations = 1'000'000;
    std::size_t refactor_interval = 400;
    /// Consecutive degenerate pivots before falling back to Bland's rule.
    std::size_t degenerate_limit = 60;
};

/// Primal vertex plus row duals of the optimal basis.
///
/// Dual signs follow the usual convention for a minimization: y_i <= 0 on
/// `<=` rows, y_i >= 0 on `>=` rows, free on equalities, with A'y <= c.
struct Solution {
    Status status = Status::IterationLimit;
    std::vector<double> x;
    std::vector<double> duals;
    double primal_objective = 0.0;
    double dual_objective = 0.0;
    /// |primal_objective - dual_objective|.
    double gap = 0.0;
    /// Largest violation of A'y <= c or of a dual sign constraint.
    double dual_infeasibility = 0.0;
    /// Largest violation of a row or of x >= 0.
    double primal_infeasibility = 0.0;
    std::size_t iterations = 0;

    bool optimal() const { return status == Status::Optimal; }
};

/// Two-phase revised simplex with an explicit dense basis inverse.
///
/// Pricing is Dantzig with a Harris ratio test; long runs of degenerate
/// pivots switch to Bland's rule until progress resumes. The basis is
/// refactored periodically and once more before the duals are extracted,
/// so the reported gap reflects a fresh solve rather than accumulated
/// update error.
Solution solve(const LinearProgram& program, const SolverOptions& options = {});

/// Running maxima over every solve in the process. Used by the acceptance
/// suite to bound the duality gap across whole batches.
struct SolveStats {
    std::size_t solves = 0;
    /// Solves that ended in any status but optimal.
    std::size_t non_optimal = 0;
    double max_gap = 0.0;
    double max_dual_infeasibility = 0.0;
    double max_primal_infeasibility = 0.0;
};

SolveStats solve_stats();
void reset_solve_stats();

} // namespace lecam::lp
