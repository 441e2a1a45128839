#pragma once

// Random instances shared by the unit tests and the acceptance binary.

#include "lecam/coupling.hpp"
#include "lecam/experiment.hpp"
#include "lecam/minimax.hpp"

#include <fmt/format.h>

#include <cmath>
#include <optional>
#include <random>
#include <string>
#include <vector>

namespace lecam::testing {

using Rng = std::mt19937_64;

inline double uniform(Rng& rng, double lo = 0.0, double hi = 1.0)
{
    return std::uniform_real_distribution<double>(lo, hi)(rng);
}

inline int uniform_int(Rng& rng, int lo, int hi)
{
    return std::uniform_int_distribution<int>(lo, hi)(rng);
}

/// Dirichlet(1, ..., 1), optionally with some exact zeros.
inline Vector random_probability(Rng& rng, std::size_t size, double zero_chance = 0.0)
{
    Vector v(size);
    double total = 0.0;
    for (auto& x : v) {
        x = uniform(rng) < zero_chance ? 0.0 : -std::log(1.0 - uniform(rng));
        total += x;
    }
    if (total == 0.0) {
        v[static_cast<std::size_t>(uniform_int(rng, 0, static_cast<int>(size) - 1))] = 1.0;
        return v;
    }
    for (auto& x : v)
        x /= total;
    return v;
}

inline std::vector<ParamLabel> labels(std::size_t k)
{
    std::vector<ParamLabel> out;
    for (std::size_t i = 0; i < k; ++i)
        out.push_back(fmt::format("t{}", i));
    return out;
}

inline FiniteExperiment random_experiment(Rng& rng, std::size_t k, std::size_t atoms, double zero_chance = 0.0)
{
    Matrix probs;
    for (std::size_t i = 0; i < k; ++i)
        probs.push_back(random_probability(rng, atoms, zero_chance));
    return FiniteExperiment::normalized(labels(k), std::move(probs), 1e-9);
}

inline Kernel random_kernel(Rng& rng, std::size_t from, std::size_t to, double zero_chance = 0.0)
{
    Matrix m;
    for (std::size_t i = 0; i < from; ++i)
        m.push_back(random_probability(rng, to, zero_chance));
    return Kernel(from, to, std::move(m), 1e-9);
}

inline LossSpec random_loss(Rng& rng, const std::vector<ParamLabel>& params, std::size_t actions)
{
    Matrix l;
    for (std::size_t i = 0; i < params.size(); ++i) {
        Vector row;
        for (std::size_t z = 0; z < actions; ++z)
            row.push_back(uniform(rng) < 0.2 ? 0.0 : uniform(rng, 0.0, 3.0));
        l.push_back(std::move(row));
    }
    std::vector<std::string> names;
    for (std::size_t z = 0; z < actions; ++z)
        names.push_back(fmt::format("a{}", z));
    return LossSpec(params, std::move(names), std::move(l), uniform(rng, 0.5, 2.5));
}

/// A Q experiment and a P experiment built by splitting Q's atoms and
/// perturbing the pieces. Both sides carry the uniform-mixture dominating
/// vector.
struct CouplingInstance {
    LabeledSpace p;
    LabeledSpace q;
    double delta = 0.0;
    double epsilon = 0.0;
    int attempts = 0;
};

/// Q has between 2 and `max_q_atoms` atoms (exactly `min_q_atoms` if equal);
/// every Q atom splits into up to `max_pieces` P atoms.
inline std::optional<CouplingInstance> random_coupling_instance(Rng& rng, std::size_t k, double delta, double epsilon,
                                                                std::size_t max_q_atoms, std::size_t min_q_atoms = 2,
                                                                int max_pieces = 2, int max_attempts = 200)
{
    for (int attempt = 1; attempt <= max_attempts; ++attempt) {
        const auto q_atoms =
            static_cast<std::size_t>(uniform_int(rng, static_cast<int>(min_q_atoms), static_cast<int>(max_q_atoms)));
        const auto q_exp = random_experiment(rng, k, q_atoms, 0.1);
        const double noise = uniform(rng, 0.0, 0.3) * delta;
        Matrix p_probs(k);
        for (std::size_t w = 0; w < q_atoms; ++w) {
            const int pieces = min_q_atoms == max_q_atoms ? max_pieces : uniform_int(rng, 1, max_pieces);
            Vector shares(static_cast<std::size_t>(pieces));
            double total = 0.0;
            for (auto& x : shares) {
                x = uniform(rng, 0.2, 1.0);
                total += x;
            }
            for (double share : shares)
                for (std::size_t i = 0; i < k; ++i)
                    p_probs[i].push_back(q_exp.row(i)[w] * share / total * (1.0 + noise * uniform(rng, -1.0, 1.0)));
        }
        for (auto& row : p_probs) {
            double total = 0.0;
            for (double x : row)
                total += x;
            for (auto& x : row)
                x /= total;
        }
        const auto p_exp = FiniteExperiment(labels(k), std::move(p_probs), 1e-9);
        auto p = LabeledSpace::from(p_exp);
        auto q = LabeledSpace::from(q_exp);
        const auto partition = build_partition(q.law(), delta, epsilon);
        if (check_condition_iii(p.law(), q.law(), partition, epsilon).holds)
            return CouplingInstance{std::move(p), std::move(q), delta, epsilon, attempt};
    }
    return std::nullopt;
}

/// k <= 4 parameters, at most 30 atoms per side, delta in {0.1, ..., 1.0},
/// epsilon in [0.01, 0.3] on a 0.01 lattice.
inline std::optional<CouplingInstance> random_coupling_instance(Rng& rng)
{
    const auto k = static_cast<std::size_t>(uniform_int(rng, 1, 4));
    const double delta = 0.1 * uniform_int(rng, 1, 10);
    const double epsilon = 0.01 * uniform_int(rng, 1, 30);
    return random_coupling_instance(rng, k, delta, epsilon, 15);
}

} // namespace lecam::testing
