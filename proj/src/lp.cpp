#include "lecam/lp.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <mutex>
#include <stdexcept>

namespace lecam::lp {

std::string to_string(Status status)
{
    switch (status) {
    case Status::Optimal: return "optimal";
    case Status::Infeasible: return "infeasible";
    case Status::Unbounded: return "unbounded";
    case Status::IterationLimit: return "iteration-limit";
    case Status::NumericalFailure: return "numerical-failure";
    }
    return "unknown";
}

std::size_t LinearProgram::add_variable(double cost)
{
    cost_.push_back(cost);
    raw_columns_.emplace_back();
    return cost_.size() - 1;
}

std::size_t LinearProgram::add_row(Sense sense, double rhs)
{
    sense_.push_back(sense);
    rhs_.push_back(rhs);
    return rhs_.size() - 1;
}

void LinearProgram::add_coefficient(std::size_t row, std::size_t column, double value)
{
    if (row >= rhs_.size() || column >= cost_.size())
        throw std::out_of_range("LinearProgram::add_coefficient: index out of range");
    if (value != 0.0)
        raw_columns_[column].push_back({row, value});
}

std::vector<std::vector<LinearProgram::Entry>> LinearProgram::columns() const
{
    std::vector<std::vector<Entry>> out(raw_columns_.size());
    for (std::size_t j = 0; j < raw_columns_.size(); ++j) {
        auto col = raw_columns_[j];
        std::sort(col.begin(), col.end(), [](const Entry& a, const Entry& b) { return a.row < b.row; });
        for (const auto& e : col) {
            if (!out[j].empty() && out[j].back().row == e.row)
                out[j].back().value += e.value;
            else
                out[j].push_back(e);
        }
        std::erase_if(out[j], [](const Entry& e) { return e.value == 0.0; });
    }
    return out;
}

namespace {

std::mutex stats_mutex;
SolveStats global_stats;

void record(const Solution& s)
{
    std::lock_guard lock(stats_mutex);
    ++global_stats.solves;
    if (!s.optimal()) {
        ++global_stats.non_optimal;
        return;
    }
    global_stats.max_gap = std::max(global_stats.max_gap, s.gap);
    global_stats.max_dual_infeasibility = std::max(global_stats.max_dual_infeasibility, s.dual_infeasibility);
    global_stats.max_primal_infeasibility =
        std::max(global_stats.max_primal_infeasibility, s.primal_infeasibility);
}

using Column = std::vector<LinearProgram::Entry>;

class Simplex {
public:
    Simplex(const LinearProgram& program, const SolverOptions& options)
        : opt_(options), m_(program.num_rows()), structural_(program.num_variables())
    {
        cols_ = program.columns();
        for (auto& col : cols_)
            std::erase_if(col, [&](const LinearProgram::Entry& e) { return std::abs(e.value) < opt_.small_matrix_value; });
        b_.resize(static_cast<Eigen::Index>(m_));
        row_sign_.assign(m_, 1.0);

        for (std::size_t i = 0; i < m_; ++i) {
            double rhs = program.rhs(i);
            if (rhs < 0.0)
                row_sign_[i] = -1.0;
            b_[static_cast<Eigen::Index>(i)] = rhs * row_sign_[i];
        }
        for (auto& col : cols_)
            for (auto& e : col)
                e.value *= row_sign_[e.row];
        cost_.resize(structural_);
        for (std::size_t j = 0; j < structural_; ++j)
            cost_[j] = program.cost(j);
        artificial_.assign(structural_, false);

        basis_.assign(m_, 0);
        for (std::size_t i = 0; i < m_; ++i) {
            Sense s = program.sense(i);
            if (row_sign_[i] < 0.0)
                s = s == Sense::LessEqual ? Sense::GreaterEqual
                  : s == Sense::GreaterEqual ? Sense::LessEqual : Sense::Equal;
            if (s == Sense::LessEqual) {
                basis_[i] = push_column({{i, 1.0}}, false);
            } else {
                if (s == Sense::GreaterEqual)
                    push_column({{i, -1.0}}, false);
                basis_[i] = push_column({{i, 1.0}}, true);
            }
        }
        position_.assign(cols_.size(), npos);
        for (std::size_t i = 0; i < m_; ++i)
            position_[basis_[i]] = i;

        binv_ = Eigen::MatrixXd::Identity(static_cast<Eigen::Index>(m_), static_cast<Eigen::Index>(m_));
        xb_ = b_;
    }

    Solution run()
    {
        Solution out;
        std::vector<double> phase1_cost(cols_.size(), 0.0);
        for (std::size_t j = 0; j < cols_.size(); ++j)
            if (artificial_[j])
                phase1_cost[j] = 1.0;

        Status st = iterate(phase1_cost, true);
        if (st == Status::IterationLimit || st == Status::NumericalFailure) {
            out.status = st;
            out.iterations = iterations_;
            return out;
        }
        double infeas = 0.0;
        for (std::size_t i = 0; i < m_; ++i)
            if (artificial_[basis_[i]])
                infeas += xb_[static_cast<Eigen::Index>(i)];
        if (infeas > 1e-7 * std::max(1.0, b_.lpNorm<Eigen::Infinity>())) {
            out.status = Status::Infeasible;
            out.iterations = iterations_;
            return out;
        }
        drive_out_artificials();

        std::vector<double> phase2_cost(cols_.size(), 0.0);
        std::copy(cost_.begin(), cost_.end(), phase2_cost.begin());
        st = iterate(phase2_cost, false);
        // Harris steps leave small negative basics that a fresh factorization
        // can magnify; polish them with dual steps and re-check optimality.
        for (int round = 0; st == Status::Optimal && round < 5; ++round) {
            if (!refactor()) {
                st = Status::NumericalFailure;
                break;
            }
            if (xb_.minCoeff() >= -opt_.feasibility_tol)
                break;
            st = dual_cleanup(phase2_cost);
            if (st == Status::Optimal)
                st = iterate(phase2_cost, false);
        }
        out.status = st;
        out.iterations = iterations_;
        if (st != Status::Optimal)
            return out;
        Eigen::VectorXd y = duals(phase2_cost);
        if (!y.allFinite()) {
            out.status = Status::NumericalFailure;
            return out;
        }

        out.x.assign(structural_, 0.0);
        for (std::size_t i = 0; i < m_; ++i)
            if (basis_[i] < structural_)
                out.x[basis_[i]] = xb_[static_cast<Eigen::Index>(i)];
        out.duals.resize(m_);
        for (std::size_t i = 0; i < m_; ++i)
            out.duals[i] = row_sign_[i] * y[static_cast<Eigen::Index>(i)];
        return out;
    }

private:
    static constexpr std::size_t npos = std::numeric_limits<std::size_t>::max();

    std::size_t push_column(Column col, bool artificial)
    {
        cols_.push_back(std::move(col));
        artificial_.push_back(artificial);
        return cols_.size() - 1;
    }

    Eigen::VectorXd duals(const std::vector<double>& cost) const
    {
        Eigen::VectorXd cb(static_cast<Eigen::Index>(m_));
        for (std::size_t i = 0; i < m_; ++i)
            cb[static_cast<Eigen::Index>(i)] = cost[basis_[i]];
        return binv_.transpose() * cb;
    }

    double reduced_cost(std::size_t j, const std::vector<double>& cost, const Eigen::VectorXd& y) const
    {
        double d = cost[j];
        for (const auto& e : cols_[j])
            d -= y[static_cast<Eigen::Index>(e.row)] * e.value;
        return d;
    }

    Eigen::VectorXd ftran(std::size_t j) const
    {
        Eigen::VectorXd alpha = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(m_));
        for (const auto& e : cols_[j])
            alpha.noalias() += e.value * binv_.col(static_cast<Eigen::Index>(e.row));
        return alpha;
    }

    /// False when the basis is numerically singular.
    bool refactor()
    {
        const auto m = static_cast<Eigen::Index>(m_);
        Eigen::MatrixXd basis_matrix = Eigen::MatrixXd::Zero(m, m);
        for (std::size_t i = 0; i < m_; ++i)
            for (const auto& e : cols_[basis_[i]])
                basis_matrix(static_cast<Eigen::Index>(e.row), static_cast<Eigen::Index>(i)) = e.value;
        Eigen::PartialPivLU<Eigen::MatrixXd> lu(basis_matrix);
        binv_ = lu.inverse();
        xb_ = binv_ * b_;
        since_refactor_ = 0;
        return binv_.allFinite() && xb_.allFinite();
    }

    double residual() const
    {
        Eigen::VectorXd r = b_;
        for (std::size_t i = 0; i < m_; ++i) {
            const double v = xb_[static_cast<Eigen::Index>(i)];
            for (const auto& e : cols_[basis_[i]])
                r[static_cast<Eigen::Index>(e.row)] -= e.value * v;
        }
        return r.lpNorm<Eigen::Infinity>();
    }

    void pivot(std::size_t r, std::size_t entering, const Eigen::VectorXd& alpha, double theta)
    {
        const auto ri = static_cast<Eigen::Index>(r);
        xb_.noalias() -= theta * alpha;
        xb_[ri] = theta;

        Eigen::RowVectorXd pivot_row = binv_.row(ri) / alpha[ri];
        Eigen::VectorXd col = alpha;
        col[ri] = 0.0;
        binv_.noalias() -= col * pivot_row;
        binv_.row(ri) = pivot_row;

        position_[basis_[r]] = npos;
        basis_[r] = entering;
        position_[entering] = r;
        ++iterations_;
        ++since_refactor_;
    }

    Status iterate(const std::vector<double>& cost, bool phase_one)
    {
        std::size_t degenerate_run = 0;
        bool verified = false;
        for (;;) {
            if (iterations_ >= opt_.max_iterations)
                return Status::IterationLimit;
            if (since_refactor_ >= opt_.refactor_interval ||
                (since_refactor_ > 0 && since_refactor_ % 50 == 0 && residual() > 1e-10)) {
                if (!refactor())
                    return Status::NumericalFailure;
            }

            const bool bland = degenerate_run > opt_.degenerate_limit;
            const Eigen::VectorXd y = duals(cost);

            std::size_t entering = npos;
            double best = -opt_.optimality_tol;
            for (std::size_t j = 0; j < cols_.size(); ++j) {
                if (position_[j] != npos || (!phase_one && artificial_[j]))
                    continue;
                const double d = reduced_cost(j, cost, y);
                if (d < best) {
                    entering = j;
                    best = d;
                    if (bland)
                        break;
                }
            }
            if (entering == npos) {
                if (verified || since_refactor_ == 0)
                    return Status::Optimal;
                if (!refactor())
                    return Status::NumericalFailure;
                verified = true;
                continue;
            }
            verified = false;

            const Eigen::VectorXd alpha = ftran(entering);
            std::size_t leaving = npos;

            if (!phase_one) {
                double biggest = opt_.pivot_tol;
                for (std::size_t i = 0; i < m_; ++i) {
                    const double a = std::abs(alpha[static_cast<Eigen::Index>(i)]);
                    if (artificial_[basis_[i]] && a > biggest) {
                        biggest = a;
                        leaving = i;
                    }
                }
            }

            double theta = 0.0;
            if (leaving == npos) {
                double bound = std::numeric_limits<double>::infinity();
                for (std::size_t i = 0; i < m_; ++i) {
                    const double a = alpha[static_cast<Eigen::Index>(i)];
                    if (a > opt_.pivot_tol)
                        bound = std::min(bound,
                                         (std::max(xb_[static_cast<Eigen::Index>(i)], 0.0) + opt_.feasibility_tol) / a);
                }
                if (!std::isfinite(bound))
                    return Status::Unbounded;

                double best_alpha = 0.0;
                double best_ratio = std::numeric_limits<double>::infinity();
                for (std::size_t i = 0; i < m_; ++i) {
                    const double a = alpha[static_cast<Eigen::Index>(i)];
                    if (a <= opt_.pivot_tol)
                        continue;
                    const double ratio = std::max(xb_[static_cast<Eigen::Index>(i)], 0.0) / a;
                    if (ratio > bound)
                        continue;
                    if (bland) {
                        if (leaving == npos || ratio < best_ratio - 1e-12 ||
                            (ratio <= best_ratio + 1e-12 && basis_[i] < basis_[leaving])) {
                            best_ratio = std::min(best_ratio, ratio);
                            leaving = i;
                        }
                    } else if (a > best_alpha) {
                        best_alpha = a;
                        leaving = i;
                    }
                }
                theta = std::max(xb_[static_cast<Eigen::Index>(leaving)], 0.0) /
                        alpha[static_cast<Eigen::Index>(leaving)];
            }

            degenerate_run = theta <= 1e-12 ? degenerate_run + 1 : 0;
            pivot(leaving, entering, alpha, theta);
        }
    }

    Status dual_cleanup(const std::vector<double>& cost)
    {
        for (;;) {
            if (iterations_ >= opt_.max_iterations)
                return Status::IterationLimit;
            std::size_t r = npos;
            double worst = -opt_.feasibility_tol;
            for (std::size_t i = 0; i < m_; ++i)
                if (xb_[static_cast<Eigen::Index>(i)] < worst) {
                    worst = xb_[static_cast<Eigen::Index>(i)];
                    r = i;
                }
            if (r == npos)
                return Status::Optimal;

            const Eigen::VectorXd y = duals(cost);
            const Eigen::RowVectorXd row = binv_.row(static_cast<Eigen::Index>(r));
            std::size_t entering = npos;
            double best_ratio = std::numeric_limits<double>::infinity();
            double best_alpha = 0.0;
            for (std::size_t j = 0; j < cols_.size(); ++j) {
                if (position_[j] != npos || artificial_[j])
                    continue;
                double a = 0.0;
                for (const auto& e : cols_[j])
                    a += row[static_cast<Eigen::Index>(e.row)] * e.value;
                if (a >= -opt_.pivot_tol)
                    continue;
                const double ratio = std::max(reduced_cost(j, cost, y), 0.0) / -a;
                if (ratio < best_ratio - 1e-12 || (ratio <= best_ratio + 1e-12 && -a > best_alpha)) {
                    best_ratio = std::min(best_ratio, ratio);
                    best_alpha = -a;
                    entering = j;
                }
            }
            // No improving column: the residual negativity is noise the
            // factorization cannot remove.
            if (entering == npos)
                return Status::Optimal;
            const Eigen::VectorXd alpha = ftran(entering);
            pivot(r, entering, alpha, xb_[static_cast<Eigen::Index>(r)] / alpha[static_cast<Eigen::Index>(r)]);
            if (since_refactor_ >= opt_.refactor_interval && !refactor())
                return Status::NumericalFailure;
        }
    }

    void drive_out_artificials()
    {
        for (std::size_t r = 0; r < m_; ++r) {
            if (!artificial_[basis_[r]])
                continue;
            const Eigen::RowVectorXd row = binv_.row(static_cast<Eigen::Index>(r));
            std::size_t entering = npos;
            double biggest = 1e-7;
            for (std::size_t j = 0; j < cols_.size(); ++j) {
                if (position_[j] != npos || artificial_[j])
                    continue;
                double v = 0.0;
                for (const auto& e : cols_[j])
                    v += row[static_cast<Eigen::Index>(e.row)] * e.value;
                if (std::abs(v) > biggest) {
                    biggest = std::abs(v);
                    entering = j;
                }
            }
            // No candidate means the row is a combination of the others.
            if (entering == npos)
                continue;
            xb_[static_cast<Eigen::Index>(r)] = 0.0;
            pivot(r, entering, ftran(entering), 0.0);
        }
    }

    SolverOptions opt_;
    std::size_t m_;
    std::size_t structural_;
    std::vector<Column> cols_;
    std::vector<double> cost_;
    std::vector<bool> artificial_;
    std::vector<double> row_sign_;
    std::vector<std::size_t> basis_;
    std::vector<std::size_t> position_;
    Eigen::VectorXd b_;
    Eigen::MatrixXd binv_;
    Eigen::VectorXd xb_;
    std::size_t iterations_ = 0;
    std::size_t since_refactor_ = 0;
};

void certify(const LinearProgram& program, Solution& s)
{
    const auto cols = program.columns();
    s.primal_objective = 0.0;
    std::vector<double> activity(program.num_rows(), 0.0);
    s.primal_infeasibility = 0.0;
    s.dual_infeasibility = 0.0;
    for (std::size_t j = 0; j < program.num_variables(); ++j) {
        s.primal_objective += program.cost(j) * s.x[j];
        s.primal_infeasibility = std::max(s.primal_infeasibility, -s.x[j]);
        double ay = 0.0;
        for (const auto& e : cols[j]) {
            activity[e.row] += e.value * s.x[j];
            ay += e.value * s.duals[e.row];
        }
        s.dual_infeasibility = std::max(s.dual_infeasibility, ay - program.cost(j));
    }
    s.dual_objective = 0.0;
    for (std::size_t i = 0; i < program.num_rows(); ++i) {
        const double y = s.duals[i];
        const double diff = activity[i] - program.rhs(i);
        s.dual_objective += program.rhs(i) * y;
        switch (program.sense(i)) {
        case Sense::LessEqual:
            s.primal_infeasibility = std::max(s.primal_infeasibility, diff);
            s.dual_infeasibility = std::max(s.dual_infeasibility, y);
            break;
        case Sense::GreaterEqual:
            s.primal_infeasibility = std::max(s.primal_infeasibility, -diff);
            s.dual_infeasibility = std::max(s.dual_infeasibility, -y);
            break;
        case Sense::Equal:
            s.primal_infeasibility = std::max(s.primal_infeasibility, std::abs(diff));
            break;
        }
    }
    s.gap = std::abs(s.primal_objective - s.dual_objective);
}

} // namespace

Solution solve(const LinearProgram& program, const SolverOptions& options)
{
    Solution s;
    if (program.num_rows() == 0) {
        // Every variable sits at its lower bound unless a negative cost makes it unbounded.
        s.x.assign(program.num_variables(), 0.0);
        s.status = Status::Optimal;
        for (std::size_t j = 0; j < program.num_variables(); ++j)
            if (program.cost(j) < 0.0)
                s.status = Status::Unbounded;
    } else {
        // A singular basis usually comes from a run of tiny pivots; retry with
        // coarser tolerances before giving up.
        SolverOptions opt = options;
        for (int attempt = 0; attempt < 3; ++attempt) {
            s = Simplex(program, opt).run();
            if (s.status != Status::NumericalFailure)
                break;
            opt.pivot_tol *= 100.0;
            opt.small_matrix_value = std::max(opt.small_matrix_value * 1000.0, 1e-12);
        }
    }
    if (s.optimal())
        certify(program, s);
    record(s);
    return s;
}

SolveStats solve_stats()
{
    std::lock_guard lock(stats_mutex);
    return global_stats;
}

void reset_solve_stats()
{
    std::lock_guard lock(stats_mutex);
    global_stats = {};
}

} // namespace lecam::lp
