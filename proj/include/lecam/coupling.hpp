#pragma once

#include "lecam/experiment.hpp"

#include <optional>
#include <span>
#include <string>
#include <vector>

namespace lecam {

/// A finite experiment together with its dominating vector and the
/// likelihood point X(omega) of every atom.
struct LabeledSpace {
    FiniteExperiment base;
    Vector dominating;
    LikelihoodVectors lr;

    /// Uses the uniform mixture of the rows as the dominating vector.
    static LabeledSpace from(const FiniteExperiment& experiment);
    static LabeledSpace from(const FiniteExperiment& experiment, Vector dominating);

    std::size_t dim() const { return base.num_params(); }
    std::size_t size() const { return base.sample_size(); }
    const PointDistribution& law() const { return lr.law; }
};

struct Ball {
    Point centre;
    double radius = 0.0;
};

/// Cells B_1..B_m over R^k, with B_alpha = ball_alpha minus the earlier
/// balls, and the remainder B_0 = everything outside every ball.
class Partition {
public:
    Partition(std::size_t dim, double delta, std::vector<Ball> balls);

    std::size_t dim() const { return dim_; }
    double delta() const { return delta_; }
    const std::vector<Ball>& balls() const { return balls_; }
    /// m + 1: the remainder is cell 0.
    std::size_t num_cells() const { return balls_.size() + 1; }

    /// Cell containing `point` (closed balls, first match wins).
    std::size_t cell_of(std::span<const double> point) const;
    /// Cell per atom of `dist`.
    std::vector<std::size_t> assign(const PointDistribution& dist) const;
    /// Cell per sample point of `space`; atoms outside the support go to 0.
    std::vector<std::size_t> assign(const LabeledSpace& space) const;

    /// Upper bound 2 r_alpha on diam(B_alpha) for alpha >= 1; entry 0 is +inf.
    Vector diameter_bounds() const;
    /// Largest pairwise distance among atoms of `dists` landing in each cell.
    Vector atom_diameters(std::span<const PointDistribution> dists) const;
    /// True when no atom of `dist` lies within `tol` of a ball boundary.
    bool boundary_clear(const PointDistribution& dist, double tol = 1e-12) const;

private:
    std::size_t dim_;
    double delta_;
    std::vector<Ball> balls_;
};

double euclidean(std::span<const double> a, std::span<const double> b);

/// Laws of Y under each Q_i, read off the law of Y under the dominating Q:
/// Q_i{Y = y} = y_i Q{Y = y}.
std::vector<PointDistribution> component_laws(const PointDistribution& q_dist);

/// Greedy ball cover. Atoms of `q_dist` are taken in decreasing mass order
/// until every component leaves at most epsilon/2 outside; each still
/// uncovered atom becomes the centre of a closed ball whose radius sits just
/// below the top of the gap in sorted centre-to-atom distances that contains
/// delta/2 (capped at delta/2), so no atom of `q_dist` sits on a boundary.
Partition build_partition(const PointDistribution& q_dist, std::span<const PointDistribution> q_components,
                          double delta, double epsilon);
Partition build_partition(const PointDistribution& q_dist, double delta, double epsilon);

struct CellMasses {
    double p_mass = 0.0;
    double q_mass = 0.0;
    bool holds = true;
};

struct ConditionReport {
    std::vector<CellMasses> cells;
    bool holds = true;
    /// First cell where P{X in B} < (1 - eps) Q{Y in B}.
    std::optional<std::size_t> failing_cell;
};

/// P{X in B_alpha} >= (1 - epsilon) Q{Y in B_alpha} for every alpha, B_0 included.
ConditionReport check_condition_iii(const PointDistribution& p_side, const PointDistribution& q_side,
                                    const Partition& partition, double epsilon);

/// Thrown when the mass condition fails; carries the offending cell.
class ConditionError : public Error {
public:
    ConditionError(std::size_t cell, double p_mass, double q_mass, double epsilon);
    std::size_t cell;
    double p_mass;
    double q_mass;
};

/// Thrown when a constructed kernel misses the 2 delta + 4 epsilon bound.
class CertificationError : public Error {
public:
    using Error::Error;
};

struct CouplingKernel {
    /// Rows indexed by atoms of the Q side, columns by atoms of the P side.
    Kernel kernel;
    /// The repair measure; equal to the P-side dominating vector when epsilon = 0.
    Vector mu;
    std::vector<CellMasses> cells;
    std::vector<std::size_t> p_cells;
    std::vector<std::size_t> q_cells;
};

/// K_y = eps mu + (1 - eps) P(. | F_alpha(y)), with
/// eps mu(F) = sum_alpha (P F_alpha - (1 - eps) Q A_alpha) P(F | F_alpha),
/// so that Q^y K_y = P.
CouplingKernel construct_kernel(const LabeledSpace& p_space, const LabeledSpace& q_space, const Partition& partition,
                                double epsilon);

struct CouplingMeasure {
    /// joint[y][omega]
    Matrix joint;
    /// The (1 - eps) M_0 part alone.
    Matrix concentrated;
};

/// M = eps (Q x mu) + (1 - eps) sum_alpha Q(A_alpha) Q(.|A_alpha) x P(.|F_alpha),
/// evaluated directly from the cell masses rather than through the kernel.
CouplingMeasure build_coupling_measure(const LabeledSpace& p_space, const LabeledSpace& q_space,
                                       const Partition& partition, double epsilon);

struct CouplingCertificate {
    double delta = 0.0;
    double epsilon = 0.0;
    double bound = 0.0;
    /// max_i ||Q_i K - P_i||_1
    double achieved = 0.0;
    Vector deviations;
    /// M|Y_i - X_i| per parameter.
    Vector transport_costs;
    /// Q_i A_0 per parameter.
    Vector q_remainders;
    Kernel kernel;
    Vector mu;
    std::vector<CellMasses> cells;
};

/// Measures the constructed kernel against the 2 delta + 4 epsilon bound;
/// throws CertificationError if it is exceeded by more than 1e-9.
CouplingCertificate certify_bound(const LabeledSpace& p_space, const LabeledSpace& q_space,
                                  const CouplingKernel& coupling, const Partition& partition, double epsilon);

/// build_partition on the Q side, then construct_kernel and certify_bound.
CouplingCertificate couple(const LabeledSpace& p_space, const LabeledSpace& q_space, double delta, double epsilon);

} // namespace lecam
