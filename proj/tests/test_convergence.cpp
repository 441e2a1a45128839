#include <catch2/catch_amalgamated.hpp>

#include "lecam/convergence.hpp"
#include "lecam/deficiency.hpp"
#include "lecam/scenarios.hpp"
#include "support.hpp"

#include <cmath>

using namespace lecam;
using namespace lecam::testing;
using Catch::Approx;

namespace {

PointDistribution random_cloud(Rng& rng, std::size_t dim, std::size_t atoms)
{
    std::vector<WeightedPoint> pts;
    const auto w = random_probability(rng, atoms);
    for (std::size_t i = 0; i < atoms; ++i) {
        Point p(dim);
        for (auto& x : p)
            x = uniform(rng, -2.0, 2.0);
        pts.push_back({p, w[i]});
    }
    return PointDistribution::merged(dim, pts);
}

// Gaussian limit N(scale * t, 1) on [-6, 6] step 0.25, labelled by t.
FiniteExperiment gaussian_limit(const std::vector<double>& t, double scale)
{
    std::vector<double> shifted;
    for (double x : t)
        shifted.push_back(scale * x);
    const double reach = 6.0 + 5.0 * (scale - 1.0);
    const auto g = gen_gaussian_shift(shifted, -reach, reach, 0.25);
    return FiniteExperiment(local_params(t), g.experiment.probs());
}

} // namespace

TEST_CASE("transport distance examples", "[convergence][transport]")
{
    const PointDistribution a(1, {{{0.0}, 0.5}, {{1.0}, 0.5}});
    const PointDistribution b(1, {{{0.5}, 0.5}, {{1.5}, 0.5}});
    CHECK(transport_distance(a, a) == Approx(0.0).margin(1e-12));
    CHECK(transport_distance(a, b) == Approx(0.5).margin(1e-12));

    const PointDistribution origin(2, {{{0.0, 0.0}, 1.0}});
    const PointDistribution v(2, {{{3.0, 4.0}, 1.0}});
    CHECK(transport_distance(origin, v) == Approx(5.0).margin(1e-12));
    CHECK(transport_distance(origin, v, TransportCost::CappedEuclidean) == Approx(2.0).margin(1e-12));

    CHECK_THROWS_AS(transport_distance(a, origin), DimensionError);
}

TEST_CASE("transport distance in one dimension matches the CDF formula", "[convergence][transport][property]")
{
    Rng rng(41);
    for (int rep = 0; rep < 50; ++rep) {
        const auto a = random_cloud(rng, 1, static_cast<std::size_t>(uniform_int(rng, 1, 8)));
        const auto b = random_cloud(rng, 1, static_cast<std::size_t>(uniform_int(rng, 1, 8)));
        // W1 = integral of |F_a - F_b| over the line.
        std::vector<double> xs;
        for (const auto& x : a.atoms())
            xs.push_back(x.point[0]);
        for (const auto& x : b.atoms())
            xs.push_back(x.point[0]);
        std::sort(xs.begin(), xs.end());
        auto cdf = [](const PointDistribution& d, double x) {
            double s = 0.0;
            for (const auto& at : d.atoms())
                if (at.point[0] <= x)
                    s += at.weight;
            return s;
        };
        double w1 = 0.0;
        for (std::size_t i = 0; i + 1 < xs.size(); ++i)
            w1 += std::abs(cdf(a, xs[i]) - cdf(b, xs[i])) * (xs[i + 1] - xs[i]);
        CHECK(transport_distance(a, b) == Approx(w1).margin(1e-9));
    }
}

TEST_CASE("transport distance is a metric", "[convergence][transport][property]")
{
    Rng rng(42);
    for (int rep = 0; rep < 40; ++rep) {
        const auto dim = static_cast<std::size_t>(uniform_int(rng, 1, 3));
        const auto a = random_cloud(rng, dim, 6);
        const auto b = random_cloud(rng, dim, 5);
        const auto c = random_cloud(rng, dim, 7);
        for (auto cost : {TransportCost::Euclidean, TransportCost::CappedEuclidean}) {
            const double ab = transport_distance(a, b, cost);
            CHECK(ab >= 0.0);
            CHECK(ab == Approx(transport_distance(b, a, cost)).margin(1e-9));
            CHECK(transport_distance(a, c, cost) <= ab + transport_distance(b, c, cost) + 1e-9);
        }
    }
}

TEST_CASE("default schedule halves each stage", "[convergence]")
{
    const auto s = default_schedule();
    REQUIRE(s.size() == 6);
    CHECK(s[0].delta == 0.5);
    CHECK(s[5].epsilon == Approx(1.0 / 64));
}

TEST_CASE("constant sequence certifies every stage from the first probe", "[convergence]")
{
    Rng rng(43);
    const auto q = random_experiment(rng, 3, 8);
    const auto limit = LabeledSpace::from(q);
    const ExperimentSequence seq{[q](int) { return q; }, q.params(), {}};
    const auto report = certify_convergence(seq, limit, default_schedule(4), {1, 2, 3});
    CHECK_FALSE(report.truncated);
    REQUIRE(report.stages.size() == 4);
    for (const auto& st : report.stages) {
        REQUIRE(st.threshold);
        CHECK(*st.threshold == 1);
    }
    for (const auto& row : report.rows) {
        REQUIRE(row.stage);
        CHECK(*row.stage == 4);
        CHECK(row.certified_bound == Approx(2.0 / 16 + 4.0 / 16));
        CHECK(row.achieved <= 4.0 / 16 + 1e-9);
        CHECK(row.lp_deficiency == Approx(0.0).margin(1e-9));
        CHECK(row.transport == Approx(0.0).margin(1e-9));
    }
    CHECK(report.consistent());
}

TEST_CASE("binomial LAN sequence against the Gaussian limit", "[convergence][scenario]")
{
    const std::vector<double> t{-1.0, 0.0, 1.0};
    const auto subset = local_params(t);
    const auto limit_exp = gaussian_limit(t, 1.0);
    const auto limit = LabeledSpace::from(limit_exp);
    const ExperimentSequence seq{[t](int n) { return gen_binomial_lan(n, t); }, subset, {}};
    const auto report = certify_convergence(seq, limit, default_schedule(3), {8, 16, 32, 64});

    CHECK(report.consistent());
    // At n = 64 the lattice of Z_n has spacing 0.25, the limit's grid step, so
    // every stage lines up there and nowhere below.
    REQUIRE(report.stages.size() == 3);
    for (const auto& st : report.stages) {
        REQUIRE(st.threshold);
        CHECK(*st.threshold == 64);
    }
    CHECK_FALSE(report.truncated);
    REQUIRE(report.rows.back().stage);
    CHECK(*report.rows.back().stage == 3);
    CHECK(report.rows.back().certified_bound == Approx(0.75));
    for (const auto& row : report.rows) {
        CHECK(row.lp_gap <= 1e-7);
        if (row.stage)
            CHECK(row.lp_deficiency <= row.achieved + 1e-7);
    }
    CHECK(report.rows.back().lp_deficiency < report.rows.front().lp_deficiency);
    CHECK(report.rows.back().transport < report.rows.front().transport);
}

TEST_CASE("a wrong limit is flagged", "[convergence][scenario]")
{
    const std::vector<double> t{-1.0, 0.0, 1.0};
    const auto subset = local_params(t);
    // N(2t, 1) has twice the Fisher information of the true limit.
    const auto wrong = LabeledSpace::from(gaussian_limit(t, 2.0));
    const ExperimentSequence seq{[t](int n) { return gen_binomial_lan(n, t); }, subset, {}};
    const auto report = certify_convergence(seq, wrong, default_schedule(3), {16, 64, 256});
    CHECK(report.truncated);
    CHECK(report.stages.front().failures.size() == 3);
    for (const auto& row : report.rows)
        CHECK_FALSE(row.stage);
    // The wrong limit is more informative, so it reproduces P_n almost for
    // free; the gap shows in the other direction and in the likelihood laws.
    for (const auto& row : report.rows) {
        CHECK(row.lp_deficiency <= 1e-6);
        CHECK(row.transport > 0.7);
    }
    const auto p256 = gen_binomial_lan(256, t);
    CHECK(deficiency(p256, gaussian_limit(t, 2.0)).value > 0.35);
}

TEST_CASE("certify_convergence input checks", "[convergence]")
{
    Rng rng(44);
    const auto q = random_experiment(rng, 2, 4);
    const auto limit = LabeledSpace::from(q);
    const ExperimentSequence seq{[q](int) { return q; }, q.params(), {}};
    CHECK_THROWS_AS(certify_convergence(seq, limit, default_schedule(2), {}), InvalidArgument);
    CHECK_THROWS_AS(certify_convergence(seq, limit, default_schedule(2), {4, 2}), InvalidArgument);
    CHECK_THROWS_AS(certify_convergence(seq, limit, {{0.5, 0.5}, {0.5, 0.25}}, {1}), InvalidArgument);
    const ExperimentSequence narrow{[q](int) { return q; }, {q.params()[0]}, {}};
    CHECK_THROWS_AS(certify_convergence(narrow, limit, default_schedule(2), {1}), DimensionError);
}
