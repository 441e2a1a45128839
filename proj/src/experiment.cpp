#include "lecam/experiment.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <limits>
#include <map>
#include <numeric>
#include <set>

namespace lecam {

namespace {

double row_sum(std::span<const double> v)
{
    return std::accumulate(v.begin(), v.end(), 0.0);
}

void check_probability_row(std::span<const double> v, double tolerance, const std::string& what)
{
    for (double x : v)
        if (!(x >= 0.0) || !std::isfinite(x))
            throw InvalidArgument(fmt::format("{}: entry {} is negative or not finite", what, x));
    const double s = row_sum(v);
    if (std::abs(s - 1.0) > tolerance)
        throw InvalidArgument(fmt::format("{}: sums to {:.17g}, not 1", what, s));
}

double round_significant(double x)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.11e", x);
    return std::strtod(buf, nullptr);
}

} // namespace

FiniteExperiment::FiniteExperiment(std::vector<ParamLabel> params, Matrix probs, double tolerance)
    : params_(std::move(params)), probs_(std::move(probs))
{
    if (params_.empty())
        throw InvalidArgument("FiniteExperiment: no parameters");
    if (params_.size() != probs_.size())
        throw DimensionError(fmt::format("FiniteExperiment: {} labels but {} rows", params_.size(), probs_.size()));
    std::set<ParamLabel> seen;
    for (const auto& p : params_)
        if (!seen.insert(p).second)
            throw InvalidArgument(fmt::format("FiniteExperiment: duplicate parameter '{}'", p));
    sample_size_ = probs_.front().size();
    if (sample_size_ == 0)
        throw InvalidArgument("FiniteExperiment: empty sample space");
    for (std::size_t i = 0; i < probs_.size(); ++i) {
        if (probs_[i].size() != sample_size_)
            throw DimensionError(fmt::format("FiniteExperiment: row '{}' has {} atoms, expected {}", params_[i],
                                             probs_[i].size(), sample_size_));
        check_probability_row(probs_[i], tolerance, fmt::format("FiniteExperiment row '{}'", params_[i]));
    }
}

FiniteExperiment FiniteExperiment::normalized(std::vector<ParamLabel> params, Matrix probs, double tolerance)
{
    for (std::size_t i = 0; i < probs.size(); ++i) {
        for (double x : probs[i])
            if (!(x >= 0.0) || !std::isfinite(x))
                throw InvalidArgument(fmt::format("experiment row {}: entry {} is negative or not finite", i, x));
        const double s = row_sum(probs[i]);
        if (std::abs(s - 1.0) > tolerance)
            throw InvalidArgument(fmt::format("experiment row {}: sums to {:.17g}, off by more than {}", i, s,
                                              tolerance));
        for (double& x : probs[i])
            x /= s;
    }
    return FiniteExperiment(std::move(params), std::move(probs));
}

std::size_t FiniteExperiment::index_of(const ParamLabel& label) const
{
    auto it = std::find(params_.begin(), params_.end(), label);
    if (it == params_.end())
        throw DimensionError(fmt::format("parameter '{}' not in experiment", label));
    return static_cast<std::size_t>(it - params_.begin());
}

bool FiniteExperiment::has_param(const ParamLabel& label) const
{
    return std::find(params_.begin(), params_.end(), label) != params_.end();
}

FiniteExperiment FiniteExperiment::restrict_to(std::span<const ParamLabel> labels) const
{
    std::vector<ParamLabel> params(labels.begin(), labels.end());
    Matrix rows;
    rows.reserve(params.size());
    for (const auto& label : params)
        rows.push_back(probs_[index_of(label)]);
    return FiniteExperiment(std::move(params), std::move(rows));
}

Kernel::Kernel(std::size_t from_size, std::size_t to_size, Matrix matrix, double tolerance)
    : from_size_(from_size), to_size_(to_size), matrix_(std::move(matrix))
{
    if (matrix_.size() != from_size_)
        throw DimensionError(fmt::format("Kernel: {} rows, expected {}", matrix_.size(), from_size_));
    for (std::size_t i = 0; i < matrix_.size(); ++i) {
        if (matrix_[i].size() != to_size_)
            throw DimensionError(fmt::format("Kernel: row {} has {} entries, expected {}", i, matrix_[i].size(),
                                             to_size_));
        check_probability_row(matrix_[i], tolerance, fmt::format("Kernel row {}", i));
    }
}

Kernel Kernel::identity(std::size_t size)
{
    Matrix m(size, Vector(size, 0.0));
    for (std::size_t i = 0; i < size; ++i)
        m[i][i] = 1.0;
    return Kernel(size, size, std::move(m));
}

Kernel Kernel::constant(std::size_t from_size, const Vector& row)
{
    return Kernel(from_size, row.size(), Matrix(from_size, row));
}

Kernel Kernel::cleaned(Matrix matrix, const Vector& fallback)
{
    if (matrix.empty())
        throw DimensionError("Kernel::cleaned: no rows");
    const std::size_t to = matrix.front().size();
    for (auto& row : matrix) {
        if (row.size() != to)
            throw DimensionError("Kernel::cleaned: ragged matrix");
        for (double& x : row)
            x = std::max(x, 0.0);
        const double s = row_sum(row);
        if (s > 0.0) {
            for (double& x : row)
                x /= s;
        } else if (!fallback.empty()) {
            row = fallback;
        } else {
            std::fill(row.begin(), row.end(), 1.0 / static_cast<double>(to));
        }
    }
    const std::size_t from = matrix.size();
    return Kernel(from, to, std::move(matrix));
}

PointDistribution::PointDistribution(std::size_t dim, std::vector<WeightedPoint> atoms)
    : dim_(dim), atoms_(std::move(atoms))
{
    if (atoms_.empty())
        throw InvalidArgument("PointDistribution: no atoms");
    double total = 0.0;
    std::set<Point> seen;
    for (const auto& a : atoms_) {
        if (a.point.size() != dim_)
            throw DimensionError(fmt::format("PointDistribution: point of dimension {}, expected {}", a.point.size(),
                                             dim_));
        if (!(a.weight > 0.0) || a.weight > 1.0 + kInputTolerance)
            throw InvalidArgument(fmt::format("PointDistribution: weight {} outside (0,1]", a.weight));
        if (!seen.insert(a.point).second)
            throw InvalidArgument("PointDistribution: repeated point");
        total += a.weight;
    }
    if (std::abs(total - 1.0) > kInputTolerance)
        throw InvalidArgument(fmt::format("PointDistribution: weights sum to {:.17g}", total));
}

PointDistribution PointDistribution::merged(std::size_t dim, const std::vector<WeightedPoint>& atoms,
                                            std::vector<std::size_t>* index_map)
{
    std::map<Point, std::size_t> index;
    std::vector<WeightedPoint> out;
    if (index_map)
        index_map->assign(atoms.size(), npos);
    for (std::size_t i = 0; i < atoms.size(); ++i) {
        const auto& a = atoms[i];
        if (a.weight == 0.0)
            continue;
        Point key(a.point.size());
        std::transform(a.point.begin(), a.point.end(), key.begin(), round_significant);
        auto [it, inserted] = index.try_emplace(key, out.size());
        if (inserted)
            out.push_back(a);
        else
            out[it->second].weight += a.weight;
        if (index_map)
            (*index_map)[i] = it->second;
    }
    return PointDistribution(dim, std::move(out));
}

double total_variation(std::span<const double> p, std::span<const double> q)
{
    if (p.size() != q.size())
        throw DimensionError(fmt::format("total_variation: lengths {} and {}", p.size(), q.size()));
    double s = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i)
        s += std::abs(p[i] - q[i]);
    return s;
}

FiniteExperiment push_forward(const FiniteExperiment& experiment, const Kernel& kernel)
{
    if (experiment.sample_size() != kernel.from_size())
        throw DimensionError(fmt::format("push_forward: experiment has {} atoms, kernel expects {}",
                                         experiment.sample_size(), kernel.from_size()));
    Matrix rows(experiment.num_params(), Vector(kernel.to_size(), 0.0));
    for (std::size_t t = 0; t < experiment.num_params(); ++t) {
        const auto& p = experiment.row(t);
        for (std::size_t w = 0; w < p.size(); ++w) {
            if (p[w] == 0.0)
                continue;
            const auto& k = kernel.row(w);
            for (std::size_t y = 0; y < k.size(); ++y)
                rows[t][y] += p[w] * k[y];
        }
    }
    return FiniteExperiment(experiment.params(), std::move(rows), kDerivedTolerance);
}

Kernel compose_kernels(const Kernel& first, const Kernel& second)
{
    if (first.to_size() != second.from_size())
        throw DimensionError(fmt::format("compose_kernels: {} -> {} then {} -> {}", first.from_size(),
                                         first.to_size(), second.from_size(), second.to_size()));
    Matrix out(first.from_size(), Vector(second.to_size(), 0.0));
    for (std::size_t i = 0; i < first.from_size(); ++i)
        for (std::size_t k = 0; k < first.to_size(); ++k) {
            const double a = first(i, k);
            if (a == 0.0)
                continue;
            const auto& row = second.row(k);
            for (std::size_t j = 0; j < row.size(); ++j)
                out[i][j] += a * row[j];
        }
    return Kernel(first.from_size(), second.to_size(), std::move(out), kDerivedTolerance);
}

Vector dominating_mixture(const FiniteExperiment& experiment, std::span<const double> weights)
{
    if (weights.size() != experiment.num_params())
        throw DimensionError(fmt::format("dominating_mixture: {} weights for {} parameters", weights.size(),
                                         experiment.num_params()));
    for (double w : weights)
        if (!(w > 0.0))
            throw InvalidArgument(fmt::format("dominating_mixture: weight {} is not strictly positive", w));
    if (std::abs(row_sum(weights) - 1.0) > kInputTolerance)
        throw InvalidArgument("dominating_mixture: weights do not sum to 1");
    Vector mix(experiment.sample_size(), 0.0);
    for (std::size_t t = 0; t < experiment.num_params(); ++t)
        for (std::size_t w = 0; w < mix.size(); ++w)
            mix[w] += weights[t] * experiment.row(t)[w];
    return mix;
}

Vector dominating_mixture(const FiniteExperiment& experiment)
{
    const Vector weights(experiment.num_params(), 1.0 / static_cast<double>(experiment.num_params()));
    return dominating_mixture(experiment, weights);
}

Point LikelihoodVectors::point(std::size_t omega) const
{
    if (atom_of[omega] == PointDistribution::npos)
        return {};
    Point p(ratios.size());
    for (std::size_t t = 0; t < ratios.size(); ++t)
        p[t] = ratios[t][omega];
    return p;
}

LikelihoodVectors likelihood_vectors(const FiniteExperiment& experiment, std::span<const double> dominating)
{
    const std::size_t n = experiment.sample_size();
    if (dominating.size() != n)
        throw DimensionError(fmt::format("likelihood_vectors: dominating vector has {} atoms, experiment {}",
                                         dominating.size(), n));
    check_probability_row(dominating, kInputTolerance, "likelihood_vectors: dominating vector");

    const std::size_t k = experiment.num_params();
    Matrix ratios(k, Vector(n, std::numeric_limits<double>::quiet_NaN()));
    std::vector<WeightedPoint> atoms;
    atoms.reserve(n);
    for (std::size_t w = 0; w < n; ++w) {
        const double d = dominating[w];
        Point pt(k);
        for (std::size_t t = 0; t < k; ++t) {
            const double p = experiment.row(t)[w];
            if (d == 0.0) {
                if (p != 0.0)
                    throw DominationError(fmt::format(
                        "parameter '{}' charges atom {} with mass {} but the dominating measure does not",
                        experiment.params()[t], w, p));
                continue;
            }
            ratios[t][w] = p / d;
            pt[t] = ratios[t][w];
        }
        atoms.push_back({std::move(pt), d});
    }
    std::vector<std::size_t> atom_of;
    auto law = PointDistribution::merged(k, atoms, &atom_of);
    return {std::move(ratios), std::move(law), std::move(atom_of)};
}

} // namespace lecam
