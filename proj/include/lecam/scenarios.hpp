#pragma once

#include "lecam/experiment.hpp"

#include <span>
#include <string>
#include <vector>

namespace lecam {

/// Canonical label for a numeric local parameter ("-1", "0", "0.5").
ParamLabel format_label(double t);
/// Inverse of format_label; throws InvalidArgument on junk.
double parse_label(const ParamLabel& label);

/// Sorted union of `t_grid` and {0}, as labels.
std::vector<ParamLabel> local_params(std::span<const double> t_grid);

/// Binomial(n, 1/2 + t/(2 sqrt n)) on {0, ..., n} for each t in t_grid and
/// t = 0. With Z_n = (2 S_n - n)/sqrt(n) the likelihood ratios against t = 0
/// are (1 + eps_n(t)) exp(t Z_n - t^2/2).
FiniteExperiment gen_binomial_lan(int n, std::span<const double> t_grid);

/// (2s - n)/sqrt(n) for s = 0..n.
Vector binomial_lan_statistic(int n);

/// max over atoms with P_{n,0} mass >= 1e-6 of
/// |(dP_{n,t}/dP_{n,0}) / exp(t Z_n - t^2/2) - 1|.
double lan_remainder(int n, double t);

struct GaussianShift {
    /// Discretized N(t, 1) on the grid centres, tails folded into the edge cells.
    FiniteExperiment experiment;
    Vector centres;
    /// Law of (dQ_t/dQ_0)_t under Q_0.
    PointDistribution likelihood_law;
    /// Largest relative error of the interior-cell likelihood ratio against
    /// exp(t z - t^2/2) at the cell centre z.
    double max_relative_error = 0.0;
    /// exp(|t| step / 2) - 1 maximized over t: the exact ratio is an average
    /// of exp(t u - t^2/2) over the cell.
    double relative_error_bound = 0.0;
};

/// Requires step > 0 and [lo, hi] to cover [min t - 5, max t + 5].
GaussianShift gen_gaussian_shift(std::span<const double> t_grid, double lo, double hi, double step);

} // namespace lecam
