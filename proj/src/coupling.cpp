#include "lecam/coupling.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>

namespace lecam {

namespace {

constexpr double kMassSlack = 1e-12;

void require_dim(std::size_t got, std::size_t want, const char* what)
{
    if (got != want)
        throw DimensionError(fmt::format("{}: dimension {} but the partition lives in R^{}", what, got, want));
}

void require_same_params(const LabeledSpace& p, const LabeledSpace& q)
{
    if (p.base.params() != q.base.params())
        throw DimensionError("coupling: P side and Q side must carry the same parameters in the same order");
}

// Cell of every sample point, through the merged likelihood law so that
// atom-level and law-level masses agree exactly.
std::vector<std::size_t> cells_by_atom(const Partition& partition, const LabeledSpace& space)
{
    const auto law_cells = partition.assign(space.law());
    std::vector<std::size_t> out(space.size(), 0);
    for (std::size_t w = 0; w < space.size(); ++w)
        if (space.lr.atom_of[w] != PointDistribution::npos)
            out[w] = law_cells[space.lr.atom_of[w]];
    return out;
}

Vector cell_totals(const std::vector<std::size_t>& cells, std::span<const double> mass, std::size_t num_cells)
{
    Vector out(num_cells, 0.0);
    for (std::size_t i = 0; i < cells.size(); ++i)
        out[cells[i]] += mass[i];
    return out;
}

} // namespace

LabeledSpace LabeledSpace::from(const FiniteExperiment& experiment)
{
    return from(experiment, dominating_mixture(experiment));
}

LabeledSpace LabeledSpace::from(const FiniteExperiment& experiment, Vector dominating)
{
    auto lr = likelihood_vectors(experiment, dominating);
    return {experiment, std::move(dominating), std::move(lr)};
}

double euclidean(std::span<const double> a, std::span<const double> b)
{
    if (a.size() != b.size())
        throw DimensionError(fmt::format("euclidean: dimensions {} and {}", a.size(), b.size()));
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i)
        s += (a[i] - b[i]) * (a[i] - b[i]);
    return std::sqrt(s);
}

Partition::Partition(std::size_t dim, double delta, std::vector<Ball> balls)
    : dim_(dim), delta_(delta), balls_(std::move(balls))
{
    if (!(delta_ > 0.0))
        throw InvalidArgument(fmt::format("Partition: delta = {} must be positive", delta_));
    for (const auto& b : balls_) {
        require_dim(b.centre.size(), dim_, "Partition ball");
        if (!(b.radius > 0.0) || 2.0 * b.radius > delta_)
            throw InvalidArgument(fmt::format("Partition: radius {} incompatible with delta {}", b.radius, delta_));
    }
}

std::size_t Partition::cell_of(std::span<const double> point) const
{
    require_dim(point.size(), dim_, "Partition::cell_of");
    for (std::size_t i = 0; i < balls_.size(); ++i)
        if (euclidean(point, balls_[i].centre) <= balls_[i].radius)
            return i + 1;
    return 0;
}

std::vector<std::size_t> Partition::assign(const PointDistribution& dist) const
{
    require_dim(dist.dim(), dim_, "Partition::assign");
    std::vector<std::size_t> out(dist.size());
    for (std::size_t i = 0; i < dist.size(); ++i)
        out[i] = cell_of(dist[i].point);
    return out;
}

std::vector<std::size_t> Partition::assign(const LabeledSpace& space) const
{
    return cells_by_atom(*this, space);
}

Vector Partition::diameter_bounds() const
{
    Vector out(num_cells(), std::numeric_limits<double>::infinity());
    for (std::size_t i = 0; i < balls_.size(); ++i)
        out[i + 1] = 2.0 * balls_[i].radius;
    return out;
}

Vector Partition::atom_diameters(std::span<const PointDistribution> dists) const
{
    std::vector<std::vector<const Point*>> members(num_cells());
    for (const auto& d : dists) {
        const auto cells = assign(d);
        for (std::size_t i = 0; i < d.size(); ++i)
            members[cells[i]].push_back(&d[i].point);
    }
    Vector out(num_cells(), 0.0);
    for (std::size_t c = 0; c < members.size(); ++c)
        for (std::size_t i = 0; i < members[c].size(); ++i)
            for (std::size_t j = i + 1; j < members[c].size(); ++j)
                out[c] = std::max(out[c], euclidean(*members[c][i], *members[c][j]));
    return out;
}

bool Partition::boundary_clear(const PointDistribution& dist, double tol) const
{
    require_dim(dist.dim(), dim_, "Partition::boundary_clear");
    for (const auto& b : balls_)
        for (const auto& a : dist.atoms())
            if (std::abs(euclidean(a.point, b.centre) - b.radius) <= tol)
                return false;
    return true;
}

std::vector<PointDistribution> component_laws(const PointDistribution& q_dist)
{
    std::vector<PointDistribution> out;
    for (std::size_t i = 0; i < q_dist.dim(); ++i) {
        std::vector<WeightedPoint> atoms;
        for (const auto& a : q_dist.atoms())
            atoms.push_back({a.point, a.point[i] * a.weight});
        // Rounding can leave the total a few ulps off 1.
        const double total =
            std::accumulate(atoms.begin(), atoms.end(), 0.0, [](double s, const auto& a) { return s + a.weight; });
        for (auto& a : atoms)
            a.weight /= total;
        out.push_back(PointDistribution::merged(q_dist.dim(), atoms));
    }
    return out;
}

Partition build_partition(const PointDistribution& q_dist, std::span<const PointDistribution> q_components,
                          double delta, double epsilon)
{
    if (!(delta > 0.0) || !(epsilon > 0.0))
        throw InvalidArgument(fmt::format("build_partition: delta = {} and epsilon = {} must be positive", delta,
                                          epsilon));
    const std::size_t n = q_dist.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return q_dist[a].weight > q_dist[b].weight; });

    // Component mass per q_dist atom, matched by point.
    std::map<Point, std::size_t> index;
    for (std::size_t i = 0; i < n; ++i)
        index.emplace(q_dist[i].point, i);
    Matrix component_mass(q_components.size(), Vector(n, 0.0));
    Vector outside(q_components.size(), 1.0);
    for (std::size_t c = 0; c < q_components.size(); ++c) {
        require_dim(q_components[c].dim(), q_dist.dim(), "build_partition component");
        for (const auto& a : q_components[c].atoms()) {
            auto it = index.find(a.point);
            if (it != index.end())
                component_mass[c][it->second] += a.weight;
        }
    }

    // Compact core: heaviest atoms until each component leaves <= eps/2 outside.
    std::vector<std::size_t> core;
    auto satisfied = [&] {
        return std::all_of(outside.begin(), outside.end(), [&](double m) { return m <= epsilon / 2; });
    };
    for (std::size_t idx : order) {
        if (satisfied())
            break;
        core.push_back(idx);
        for (std::size_t c = 0; c < q_components.size(); ++c)
            outside[c] -= component_mass[c][idx];
    }
    if (core.empty())
        core.push_back(order.front());

    std::vector<bool> covered(n, false);
    std::vector<Ball> balls;
    const double cap = delta / 2;
    for (std::size_t centre_idx : core) {
        if (covered[centre_idx])
            continue;
        const auto& centre = q_dist[centre_idx].point;
        Vector dist(n);
        for (std::size_t i = 0; i < n; ++i)
            dist[i] = euclidean(centre, q_dist[i].point);
        Vector sorted = dist;
        std::sort(sorted.begin(), sorted.end());
        double below = 0.0;
        double above = cap;
        for (double d : sorted) {
            if (d < cap) {
                below = std::max(below, d);
            } else {
                break;
            }
        }
        for (double d : sorted)
            if (d > below) {
                above = std::min(cap, d);
                break;
            }
        const double radius = above - 0.05 * (above - below);
        for (std::size_t i = 0; i < n; ++i)
            if (dist[i] <= radius)
                covered[i] = true;
        balls.push_back({centre, radius});
    }
    return Partition(q_dist.dim(), delta, std::move(balls));
}

Partition build_partition(const PointDistribution& q_dist, double delta, double epsilon)
{
    return build_partition(q_dist, component_laws(q_dist), delta, epsilon);
}

ConditionReport check_condition_iii(const PointDistribution& p_side, const PointDistribution& q_side,
                                    const Partition& partition, double epsilon)
{
    require_dim(p_side.dim(), partition.dim(), "check_condition_iii P side");
    require_dim(q_side.dim(), partition.dim(), "check_condition_iii Q side");
    ConditionReport report;
    report.cells.resize(partition.num_cells());
    const auto pc = partition.assign(p_side);
    const auto qc = partition.assign(q_side);
    for (std::size_t i = 0; i < pc.size(); ++i)
        report.cells[pc[i]].p_mass += p_side[i].weight;
    for (std::size_t i = 0; i < qc.size(); ++i)
        report.cells[qc[i]].q_mass += q_side[i].weight;
    for (std::size_t c = 0; c < report.cells.size(); ++c) {
        auto& cell = report.cells[c];
        cell.holds = cell.p_mass >= (1.0 - epsilon) * cell.q_mass - kMassSlack;
        if (!cell.holds && report.holds) {
            report.holds = false;
            report.failing_cell = c;
        }
    }
    return report;
}

ConditionError::ConditionError(std::size_t cell_, double p_mass_, double q_mass_, double epsilon)
    : Error(fmt::format("condition (iii) fails on cell {}: P mass {:.6g} < (1 - {}) * Q mass {:.6g}", cell_, p_mass_,
                        epsilon, q_mass_)),
      cell(cell_), p_mass(p_mass_), q_mass(q_mass_)
{
}

CouplingKernel construct_kernel(const LabeledSpace& p_space, const LabeledSpace& q_space, const Partition& partition,
                                double epsilon)
{
    require_same_params(p_space, q_space);
    require_dim(p_space.dim(), partition.dim(), "construct_kernel");
    if (!(epsilon >= 0.0 && epsilon <= 1.0))
        throw InvalidArgument(fmt::format("construct_kernel: epsilon = {} outside [0, 1]", epsilon));

    const std::size_t cells = partition.num_cells();
    const auto p_cells = cells_by_atom(partition, p_space);
    const auto q_cells = cells_by_atom(partition, q_space);
    const auto& P = p_space.dominating;
    const auto& Q = q_space.dominating;
    const Vector p_mass = cell_totals(p_cells, P, cells);
    const Vector q_mass = cell_totals(q_cells, Q, cells);

    std::vector<CellMasses> report(cells);
    for (std::size_t c = 0; c < cells; ++c) {
        report[c] = {p_mass[c], q_mass[c], p_mass[c] >= (1.0 - epsilon) * q_mass[c] - kMassSlack};
        if (!report[c].holds)
            throw ConditionError(c, p_mass[c], q_mass[c], epsilon);
    }

    const std::size_t n_p = p_space.size();
    const std::size_t n_q = q_space.size();

    // P(. | F_alpha) as per-atom weights.
    Vector conditional(n_p, 0.0);
    for (std::size_t w = 0; w < n_p; ++w)
        if (p_mass[p_cells[w]] > 0.0)
            conditional[w] = P[w] / p_mass[p_cells[w]];

    Vector mu = P;
    if (epsilon > 0.0) {
        for (std::size_t w = 0; w < n_p; ++w) {
            const std::size_t c = p_cells[w];
            const double weight = std::max(0.0, (p_mass[c] - (1.0 - epsilon) * q_mass[c]) / epsilon);
            mu[w] = weight * conditional[w];
        }
    }
    const double mu_weight = epsilon > 0.0 ? epsilon : 0.0;

    Matrix rows(n_q, Vector(n_p, 0.0));
    for (std::size_t y = 0; y < n_q; ++y) {
        const std::size_t c = q_cells[y];
        auto& row = rows[y];
        for (std::size_t w = 0; w < n_p; ++w)
            row[w] = mu_weight * mu[w];
        if (epsilon < 1.0) {
            if (p_mass[c] > 0.0) {
                for (std::size_t w = 0; w < n_p; ++w)
                    if (p_cells[w] == c)
                        row[w] += (1.0 - epsilon) * conditional[w];
            } else {
                // No P mass in the cell: (iii) forces Q(y) = 0, so any law will do.
                if (Q[y] > 0.0)
                    throw ConditionError(c, p_mass[c], q_mass[c], epsilon);
                for (std::size_t w = 0; w < n_p; ++w)
                    row[w] += (1.0 - epsilon) * P[w];
            }
        }
    }
    return {Kernel::cleaned(std::move(rows)), std::move(mu), std::move(report), p_cells, q_cells};
}

CouplingMeasure build_coupling_measure(const LabeledSpace& p_space, const LabeledSpace& q_space,
                                       const Partition& partition, double epsilon)
{
    const auto coupling = construct_kernel(p_space, q_space, partition, epsilon);
    const auto& P = p_space.dominating;
    const auto& Q = q_space.dominating;
    const std::size_t n_p = p_space.size();
    const std::size_t n_q = q_space.size();

    Vector p_mass(partition.num_cells(), 0.0);
    Vector q_mass(partition.num_cells(), 0.0);
    for (std::size_t w = 0; w < n_p; ++w)
        p_mass[coupling.p_cells[w]] += P[w];
    for (std::size_t y = 0; y < n_q; ++y)
        q_mass[coupling.q_cells[y]] += Q[y];

    CouplingMeasure out{Matrix(n_q, Vector(n_p, 0.0)), Matrix(n_q, Vector(n_p, 0.0))};
    for (std::size_t y = 0; y < n_q; ++y) {
        const std::size_t c = coupling.q_cells[y];
        for (std::size_t w = 0; w < n_p; ++w) {
            // (Q A_c) Q(y | A_c) P(w | F_c) on the diagonal blocks A_c x F_c.
            double m0 = 0.0;
            if (coupling.p_cells[w] == c && q_mass[c] > 0.0 && p_mass[c] > 0.0)
                m0 = q_mass[c] * (Q[y] / q_mass[c]) * (P[w] / p_mass[c]);
            out.concentrated[y][w] = (1.0 - epsilon) * m0;
            const double product = epsilon > 0.0 ? epsilon * Q[y] * coupling.mu[w] : 0.0;
            out.joint[y][w] = product + out.concentrated[y][w];
        }
    }
    return out;
}

CouplingCertificate certify_bound(const LabeledSpace& p_space, const LabeledSpace& q_space,
                                  const CouplingKernel& coupling, const Partition& partition, double epsilon)
{
    require_same_params(p_space, q_space);
    const double delta = partition.delta();
    const std::size_t k = p_space.dim();
    const auto pushed = push_forward(q_space.base, coupling.kernel);

    CouplingCertificate cert{delta,          epsilon,         2.0 * delta + 4.0 * epsilon,
                             0.0,            Vector(k, 0.0),  Vector(k, 0.0),
                             Vector(k, 0.0), coupling.kernel, coupling.mu,
                             coupling.cells};
    for (std::size_t i = 0; i < k; ++i) {
        cert.deviations[i] = total_variation(pushed.row(i), p_space.base.row(i));
        cert.achieved = std::max(cert.achieved, cert.deviations[i]);
    }

    const auto& Q = q_space.dominating;
    for (std::size_t y = 0; y < q_space.size(); ++y) {
        if (Q[y] == 0.0)
            continue;
        if (coupling.q_cells[y] == 0)
            for (std::size_t i = 0; i < k; ++i)
                cert.q_remainders[i] += q_space.base.row(i)[y];
        const auto& row = coupling.kernel.row(y);
        for (std::size_t w = 0; w < p_space.size(); ++w) {
            const double m = Q[y] * row[w];
            if (m == 0.0 || p_space.lr.atom_of[w] == PointDistribution::npos)
                continue;
            for (std::size_t i = 0; i < k; ++i)
                cert.transport_costs[i] += m * std::abs(q_space.lr.ratios[i][y] - p_space.lr.ratios[i][w]);
        }
    }

    if (cert.achieved > cert.bound + 1e-9)
        throw CertificationError(fmt::format("coupling kernel achieves {:.12g}, above the bound 2*{} + 4*{} = {:.12g}",
                                             cert.achieved, delta, epsilon, cert.bound));
    return cert;
}

CouplingCertificate couple(const LabeledSpace& p_space, const LabeledSpace& q_space, double delta, double epsilon)
{
    const auto partition = build_partition(q_space.law(), delta, epsilon);
    const auto coupling = construct_kernel(p_space, q_space, partition, epsilon);
    return certify_bound(p_space, q_space, coupling, partition, epsilon);
}

} // namespace lecam
