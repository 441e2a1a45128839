#include "lecam/scenarios.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <numeric>

namespace lecam {

namespace {

double upper_tail(double x)
{
    return 0.5 * std::erfc(x / std::sqrt(2.0));
}

// N(0,1) mass of [a, b] without cancellation in either tail.
double normal_mass(double a, double b)
{
    if (a >= 0.0)
        return upper_tail(a) - upper_tail(b);
    if (b <= 0.0)
        return upper_tail(-b) - upper_tail(-a);
    return 1.0 - upper_tail(-a) - upper_tail(b);
}

} // namespace

ParamLabel format_label(double t)
{
    if (t == 0.0)
        t = 0.0; // drop the sign of -0
    return fmt::format("{}", t);
}

double parse_label(const ParamLabel& label)
{
    char* end = nullptr;
    const double t = std::strtod(label.c_str(), &end);
    if (label.empty() || end != label.c_str() + label.size() || !std::isfinite(t))
        throw InvalidArgument(fmt::format("'{}' is not a numeric parameter", label));
    return t;
}

std::vector<ParamLabel> local_params(std::span<const double> t_grid)
{
    std::vector<double> ts(t_grid.begin(), t_grid.end());
    ts.push_back(0.0);
    std::sort(ts.begin(), ts.end());
    ts.erase(std::unique(ts.begin(), ts.end()), ts.end());
    std::vector<ParamLabel> labels;
    for (double t : ts)
        labels.push_back(format_label(t));
    return labels;
}

FiniteExperiment gen_binomial_lan(int n, std::span<const double> t_grid)
{
    if (n < 1)
        throw InvalidArgument(fmt::format("gen_binomial_lan: n = {} must be positive", n));
    auto labels = local_params(t_grid);
    Matrix rows;
    const double root = std::sqrt(static_cast<double>(n));
    for (const auto& label : labels) {
        const double t = parse_label(label);
        const double p = 0.5 + t / (2.0 * root);
        if (!(p > 0.0 && p < 1.0))
            throw InvalidArgument(
                fmt::format("gen_binomial_lan: t = {} gives success probability {} at n = {}", t, p, n));
        Vector row(static_cast<std::size_t>(n) + 1);
        const double lp = std::log(p);
        const double lq = std::log1p(-p);
        for (int s = 0; s <= n; ++s)
            row[static_cast<std::size_t>(s)] = std::exp(std::lgamma(n + 1.0) - std::lgamma(s + 1.0) -
                                                        std::lgamma(n - s + 1.0) + s * lp + (n - s) * lq);
        const double total = std::accumulate(row.begin(), row.end(), 0.0);
        for (double& x : row)
            x /= total;
        rows.push_back(std::move(row));
    }
    return FiniteExperiment(std::move(labels), std::move(rows));
}

Vector binomial_lan_statistic(int n)
{
    Vector z(static_cast<std::size_t>(n) + 1);
    const double root = std::sqrt(static_cast<double>(n));
    for (int s = 0; s <= n; ++s)
        z[static_cast<std::size_t>(s)] = (2.0 * s - n) / root;
    return z;
}

double lan_remainder(int n, double t)
{
    const double grid[] = {t};
    const auto exp = gen_binomial_lan(n, grid);
    const auto& base = exp.row(exp.index_of("0"));
    const auto& alt = exp.row(exp.index_of(format_label(t)));
    const auto z = binomial_lan_statistic(n);
    double worst = 0.0;
    for (std::size_t s = 0; s < z.size(); ++s) {
        if (base[s] < 1e-6)
            continue;
        const double lan = std::exp(t * z[s] - 0.5 * t * t);
        worst = std::max(worst, std::abs(alt[s] / base[s] / lan - 1.0));
    }
    return worst;
}

GaussianShift gen_gaussian_shift(std::span<const double> t_grid, double lo, double hi, double step)
{
    if (!(step > 0.0) || !(hi > lo))
        throw InvalidArgument(fmt::format("gen_gaussian_shift: degenerate grid [{}, {}] step {}", lo, hi, step));
    auto labels = local_params(t_grid);
    std::vector<double> ts;
    for (const auto& l : labels)
        ts.push_back(parse_label(l));
    if (lo > ts.front() - 5.0 + 1e-12 || hi < ts.back() + 5.0 - 1e-12)
        throw InvalidArgument(fmt::format("gen_gaussian_shift: grid [{}, {}] does not cover [{}, {}]", lo, hi,
                                          ts.front() - 5.0, ts.back() + 5.0));

    const auto cells = static_cast<std::size_t>(std::floor((hi - lo) / step + 1e-9)) + 1;
    if (cells < 2)
        throw InvalidArgument("gen_gaussian_shift: fewer than two grid cells");
    Vector centres(cells);
    for (std::size_t i = 0; i < cells; ++i)
        centres[i] = lo + static_cast<double>(i) * step;

    const double inf = std::numeric_limits<double>::infinity();
    Matrix rows;
    for (double t : ts) {
        Vector row(cells);
        for (std::size_t i = 0; i < cells; ++i) {
            const double a = i == 0 ? -inf : centres[i] - step / 2;
            const double b = i + 1 == cells ? inf : centres[i] + step / 2;
            row[i] = normal_mass(a - t, b - t);
        }
        const double total = std::accumulate(row.begin(), row.end(), 0.0);
        for (double& x : row)
            x /= total;
        rows.push_back(std::move(row));
    }
    FiniteExperiment experiment(labels, rows);

    const std::size_t zero = experiment.index_of("0");
    const auto lr = likelihood_vectors(experiment, experiment.row(zero));

    double worst = 0.0;
    double bound = 0.0;
    for (std::size_t k = 0; k < ts.size(); ++k) {
        bound = std::max(bound, std::expm1(std::abs(ts[k]) * step / 2));
        for (std::size_t i = 1; i + 1 < cells; ++i) {
            const double exact = std::exp(ts[k] * centres[i] - 0.5 * ts[k] * ts[k]);
            worst = std::max(worst, std::abs(lr.ratios[k][i] / exact - 1.0));
        }
    }
    return {std::move(experiment), std::move(centres), lr.law, worst, bound};
}

} // namespace lecam
