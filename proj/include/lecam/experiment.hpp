#pragma once

#include "lecam/errors.hpp"

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace lecam {

using Vector = std::vector<double>;
/// Row-major dense matrix.
using Matrix = std::vector<Vector>;
using Point = std::vector<double>;

/// Tolerance on row sums of user-supplied probabilities.
inline constexpr double kInputTolerance = 1e-12;
/// Tolerance on identities that hold for derived quantities.
inline constexpr double kDerivedTolerance = 1e-10;

/// Parameter labels are opaque; only their order and identity matter here.
using ParamLabel = std::string;

/// An indexed family of probability vectors on a common finite sample space.
class FiniteExperiment {
public:
    /// Validates: distinct labels, nonnegative entries, rows summing to 1
    /// within `tolerance`.
    FiniteExperiment(std::vector<ParamLabel> params, Matrix probs, double tolerance = kInputTolerance);

    /// Renormalizes rows that are off by at most `tolerance`; rejects the rest.
    static FiniteExperiment normalized(std::vector<ParamLabel> params, Matrix probs, double tolerance);

    const std::vector<ParamLabel>& params() const { return params_; }
    std::size_t num_params() const { return params_.size(); }
    std::size_t sample_size() const { return sample_size_; }
    const Matrix& probs() const { return probs_; }
    const Vector& row(std::size_t i) const { return probs_[i]; }

    /// Throws DimensionError when the label is absent.
    std::size_t index_of(const ParamLabel& label) const;
    bool has_param(const ParamLabel& label) const;

    /// Subexperiment on `labels`, in the order given.
    FiniteExperiment restrict_to(std::span<const ParamLabel> labels) const;

private:
    std::vector<ParamLabel> params_;
    std::size_t sample_size_ = 0;
    Matrix probs_;
};

/// Row-stochastic matrix from a space of `from_size` atoms to one of `to_size`.
class Kernel {
public:
    Kernel(std::size_t from_size, std::size_t to_size, Matrix matrix, double tolerance = kInputTolerance);

    static Kernel identity(std::size_t size);
    /// Every row equal to `row`.
    static Kernel constant(std::size_t from_size, const Vector& row);
    /// Clamps negatives to zero and rescales each row to sum to 1.
    /// Rows that are entirely zero become `fallback` (uniform if empty).
    static Kernel cleaned(Matrix matrix, const Vector& fallback = {});

    std::size_t from_size() const { return from_size_; }
    std::size_t to_size() const { return to_size_; }
    const Matrix& matrix() const { return matrix_; }
    const Vector& row(std::size_t i) const { return matrix_[i]; }
    double operator()(std::size_t i, std::size_t j) const { return matrix_[i][j]; }

private:
    std::size_t from_size_;
    std::size_t to_size_;
    Matrix matrix_;
};

struct WeightedPoint {
    Point point;
    double weight;
};

/// Finitely supported probability distribution on R^k.
class PointDistribution {
public:
    /// Requires distinct points, weights in (0,1] summing to 1.
    PointDistribution(std::size_t dim, std::vector<WeightedPoint> atoms);

    /// Drops zero weights and merges points that agree to 12 significant
    /// digits, keeping the first-seen representative. Returns, for each
    /// input atom, the index of its merged atom (npos if dropped).
    static PointDistribution merged(std::size_t dim, const std::vector<WeightedPoint>& atoms,
                                    std::vector<std::size_t>* index_map = nullptr);

    std::size_t dim() const { return dim_; }
    std::size_t size() const { return atoms_.size(); }
    const std::vector<WeightedPoint>& atoms() const { return atoms_; }
    const WeightedPoint& operator[](std::size_t i) const { return atoms_[i]; }

    static constexpr std::size_t npos = static_cast<std::size_t>(-1);

private:
    std::size_t dim_;
    std::vector<WeightedPoint> atoms_;
};

/// L1 distance sum |p - q|; equals sup over |f| <= 1 of |pf - qf|.
double total_variation(std::span<const double> p, std::span<const double> q);

/// Row theta of the result is p_theta * K.
FiniteExperiment push_forward(const FiniteExperiment& experiment, const Kernel& kernel);

/// Matrix product: first `first`, then `second`.
Kernel compose_kernels(const Kernel& first, const Kernel& second);

/// sum_theta w_theta P_theta. Weights must be strictly positive and sum to 1.
Vector dominating_mixture(const FiniteExperiment& experiment, std::span<const double> weights);
/// Uniform weights.
Vector dominating_mixture(const FiniteExperiment& experiment);

struct LikelihoodVectors {
    /// ratios[theta][omega] = p_theta(omega) / p(omega); NaN where p(omega) = 0.
    Matrix ratios;
    /// Law of omega -> (ratios[.][omega]) under the dominating measure.
    PointDistribution law;
    /// Atom of `law` carrying each omega, or PointDistribution::npos if dropped.
    std::vector<std::size_t> atom_of;

    /// Likelihood point of omega (all parameters), or empty if dropped.
    Point point(std::size_t omega) const;
};

/// Densities with respect to `dominating`. Throws DominationError if some
/// p_theta charges an atom where the dominating vector vanishes.
LikelihoodVectors likelihood_vectors(const FiniteExperiment& experiment, std::span<const double> dominating);

} // namespace lecam
