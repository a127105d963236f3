#include <doctest.h>

#include <cmath>
#include <random>

#include "hopdyn/errors.hpp"
#include "hopdyn/kmc.hpp"
#include "hopdyn/lindblad.hpp"

using namespace hopdyn;

namespace {

DisorderRealization realization(std::size_t n, std::uint64_t seed, double beta = 1.0, double mu = 0.0)
{
    ModelParams p;
    p.beta = beta;
    p.mu = mu;
    p.dim = 1;
    p.box = {static_cast<int>(std::max<std::size_t>(n, 2))};
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> e(p.delta.lo, p.delta.hi);
    std::vector<Impurity> imps;
    const Box box(p.box);
    for (std::size_t i = 0; i < n; ++i) imps.push_back({box.point(i), e(rng)});
    return DisorderRealization(p, imps);
}

} // namespace

TEST_CASE("configuration bitmask")
{
    Configuration c{{1, 0, 1, 1}};
    CHECK(c.particles() == 3);
    CHECK(c.mask() == 0b1101u);
}

TEST_CASE("classical generator matches the dissipator on diagonal observables")
{
    for (std::uint64_t seed = 0; seed < 4; ++seed) {
        const std::size_t n = 2 + seed % 3;
        const auto w = realization(n, seed, 0.5 + seed);
        const auto cat = enumerate_jumps(w);
        const ClassicalGenerator q(cat);
        const Generator gen({cat, false, {}, true});
        std::mt19937_64 rng(seed);
        std::normal_distribution<double> g;
        Eigen::VectorXd f(static_cast<Eigen::Index>(1u << n));
        for (Eigen::Index i = 0; i < f.size(); ++i) f[i] = g(rng);
        const Eigen::MatrixXcd d = gen.dissipate(Eigen::MatrixXcd(f.cast<cplx>().asDiagonal()));
        const Eigen::MatrixXcd off = d - Eigen::MatrixXcd(d.diagonal().asDiagonal());
        CHECK(off.cwiseAbs().maxCoeff() <= 1e-12);
        CHECK((q.apply(f) + d.diagonal().real()).cwiseAbs().maxCoeff() <= 1e-10);
        CHECK((q.rate_matrix() * f - q.apply(f)).cwiseAbs().maxCoeff() <= 1e-12);
    }
}

TEST_CASE("occupation drift for two sites")
{
    const auto w = realization(2, 11, 1.3);
    const auto cat = enumerate_jumps(w);
    const ClassicalGenerator q(cat);
    // d/dt E[η_0] at a deterministic configuration η = (1, 0)
    const Eigen::Index eta = 0b01;
    Eigen::VectorXd n0(4);
    n0 << 0, 1, 0, 1;
    const double drift = q.apply(n0)[eta];
    const double hop = cat.jumps()[*cat.find(JumpKind::hop, q.sites()[0], q.sites()[1])].rate;
    CHECK(drift == doctest::Approx(-hop - rate_out(w, q.sites()[0])).epsilon(1e-13));
    // at η = (0, 0) only the entry contributes
    CHECK(q.apply(n0)[0] == doctest::Approx(rate_in(w, q.sites()[0])).epsilon(1e-13));
    CHECK(q.rate_out(0) == rate_out(w, q.sites()[0]));
    CHECK(q.rate_in(1) == rate_in(w, q.sites()[1]));
}

TEST_CASE("rate matrix structure")
{
    const auto w = realization(3, 2);
    const ClassicalGenerator q(enumerate_jumps(w));
    const Eigen::MatrixXd m = q.rate_matrix();
    CHECK(m.rowwise().sum().cwiseAbs().maxCoeff() <= 1e-12);
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        for (Eigen::Index j = 0; j < m.cols(); ++j) {
            if (i != j) CHECK(m(i, j) >= 0.0);
        }
        Configuration c;
        for (std::size_t k = 0; k < 3; ++k) c.eta.push_back(static_cast<std::uint8_t>(i >> k & 1));
        CHECK(total_rate(q, c) == doctest::Approx(-m(i, i)).epsilon(1e-13));
    }
    CHECK_THROWS_AS(ClassicalGenerator(enumerate_jumps(realization(13, 3))).rate_matrix(), SizeError);
}

TEST_CASE("detailed balance with the product Fermi-Dirac law")
{
    for (double beta : {0.1, 1.0, 10.0}) {
        const ClassicalGenerator q(enumerate_jumps(realization(4, 5, beta, 0.2)));
        CHECK(q.detailed_balance_deviation() <= 1e-12);
    }
}

TEST_CASE("stationary distribution")
{
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        const auto w = realization(3, 20 + seed, 0.5 + 0.7 * static_cast<double>(seed));
        const ClassicalGenerator q(enumerate_jumps(w));
        const StationaryResult r = brute_force_stationary(q);
        CHECK(r.null_dimension == 1);
        CHECK(r.max_deviation <= 1e-10);
        Eigen::VectorXd pi(8);
        for (Eigen::Index m = 0; m < 8; ++m) {
            double v = 1.0;
            for (std::size_t k = 0; k < 3; ++k) {
                const double p = 1.0 / (1.0 + std::exp(w.params().beta * (w.impurities()[k].energy - w.params().mu)));
                v *= (m >> k & 1) ? p : 1.0 - p;
            }
            pi[m] = v;
        }
        CHECK((r.distribution - pi).cwiseAbs().maxCoeff() <= 1e-10);
        CHECK((product_fermi_dirac(q) - pi).cwiseAbs().maxCoeff() <= 1e-14);
    }

    const auto w2 = realization(2, 30);
    const StationaryResult sectors = brute_force_stationary(ClassicalGenerator(enumerate_jumps(w2).hops_only()));
    CHECK(sectors.null_dimension >= 2);

    ModelParams hot = realization(3, 31).params();
    hot.beta = 1e-14;
    const auto wh = realization(3, 31).with_params(hot);
    const StationaryResult uniform = brute_force_stationary(ClassicalGenerator(enumerate_jumps(wh)));
    REQUIRE(uniform.null_dimension == 1);
    CHECK((uniform.distribution.array() - 0.125).abs().maxCoeff() <= 1e-10);
}

TEST_CASE("frozen uphill hops at low temperature")
{
    const auto w = realization(2, 40, 1e4);
    const auto& imps = w.impurities();
    const Point lo = imps[0].energy < imps[1].energy ? imps[0].position : imps[1].position;
    const Point hi = imps[0].energy < imps[1].energy ? imps[1].position : imps[0].position;
    CHECK(rate_hop(w, lo, hi) <= 1e-100);
    CHECK(rate_hop(w, hi, lo) > 0.0);
}

TEST_CASE("initial configurations")
{
    const ClassicalGenerator q(enumerate_jumps(realization(6, 4)));
    CHECK(initial_configuration(q, InitialState::empty, 1).particles() == 0);
    CHECK(initial_configuration(q, InitialState::full, 1).particles() == 6);
    CHECK(initial_configuration(q, InitialState::equilibrium, 9).eta == initial_configuration(q, InitialState::equilibrium, 9).eta);
}

TEST_CASE("two-state chain reaches the Fermi-Dirac occupation")
{
    const auto w = realization(1, 50, 1.5, -0.1);
    const ClassicalGenerator q(enumerate_jumps(w));
    const double p = q.fermi_dirac(0);
    CHECK(q.rate_in(0) / (q.rate_in(0) + q.rate_out(0)) == doctest::Approx(p).epsilon(1e-14));
    std::vector<KmcTrajectory> reps;
    for (std::uint64_t s = 0; s < 4; ++s) {
        KmcOptions o;
        o.seed = s;
        o.t_max = 5e4;
        o.time_batches = 10;
        reps.push_back(gillespie_run(q, initial_configuration(q, InitialState::empty, s), o));
    }
    const OccupationCheck oc = occupation_check(reps, q);
    REQUIRE(oc.sites == 1);
    CHECK(oc.batches == 40);
    CHECK(oc.target[0] == doctest::Approx(p));
    CHECK(std::abs(oc.mean[0] - p) <= 4.0 * oc.stderr_[0]);
    CHECK(std::abs(oc.mean[0] - p) <= 0.01);
    CHECK(reps[0].stats.hops == 0);
    const HopStatistics hs = hop_statistics(reps[0], q);
    CHECK(hs.empty);
    CHECK(hs.exit_rate > 0.0);
}

TEST_CASE("no transitions means no events")
{
    const auto cat = enumerate_jumps(realization(3, 60)).filtered([](const Jump&) { return false; });
    const ClassicalGenerator q(cat);
    KmcOptions o;
    o.t_max = 10.0;
    const auto t = gillespie_run(q, initial_configuration(q, InitialState::full, 0), o);
    CHECK(t.stats.events() == 0);
    CHECK(t.stalled);
    CHECK(t.final.particles() == 3);
}

TEST_CASE("trajectories are deterministic and well formed")
{
    const auto w = realization(8, 70, 2.0);
    const ClassicalGenerator q(enumerate_jumps(w));
    KmcOptions o;
    o.seed = 123;
    o.t_max = 50.0;
    o.record_events = true;
    const Configuration c0 = initial_configuration(q, InitialState::equilibrium, 5);
    const auto a = gillespie_run(q, c0, o);
    const auto b = gillespie_run(q, c0, o);
    REQUIRE(a.events.size() == b.events.size());
    REQUIRE(!a.events.empty());
    for (std::size_t i = 0; i < a.events.size(); ++i) {
        CHECK(a.events[i].time == b.events[i].time);
        CHECK(a.events[i].kind == b.events[i].kind);
        CHECK(a.events[i].x == b.events[i].x);
        CHECK(a.events[i].y == b.events[i].y);
        if (i > 0) CHECK(a.events[i].time > a.events[i - 1].time);
    }
    CHECK(a.final.eta == b.final.eta);
    CHECK(a.stats.events() == a.events.size());

    // replaying the event list reproduces the final configuration
    Configuration c = c0;
    for (const auto& e : a.events) {
        switch (e.kind) {
        case JumpKind::hop:
            REQUIRE(c.eta[e.x] == 1);
            REQUIRE(c.eta[e.y] == 0);
            c.eta[e.x] = 0;
            c.eta[e.y] = 1;
            break;
        case JumpKind::out:
            REQUIRE(c.eta[e.x] == 1);
            c.eta[e.x] = 0;
            break;
        case JumpKind::in:
            REQUIRE(c.eta[e.x] == 0);
            c.eta[e.x] = 1;
            break;
        }
    }
    CHECK(c.eta == a.final.eta);

    double batch_total = 0.0;
    for (double l : a.stats.batch_length) batch_total += l;
    CHECK(batch_total == doctest::Approx(o.t_max));

    KmcOptions capped = o;
    capped.max_events = 10;
    CHECK(gillespie_run(q, c0, capped).stats.events() == 10);
    KmcOptions bad = o;
    bad.t_max = 0.0;
    CHECK_THROWS_AS(gillespie_run(q, c0, bad), ConfigError);
}

TEST_CASE("low temperature runs hop downhill")
{
    const auto w = realization(8, 80, 200.0);
    const ClassicalGenerator q(enumerate_jumps(w));
    KmcOptions o;
    o.seed = 1;
    o.t_max = 200.0;
    o.record_events = true;
    const auto t = gillespie_run(q, initial_configuration(q, InitialState::full, 0), o);
    std::size_t uphill = 0;
    for (const auto& e : t.events) {
        if (e.kind == JumpKind::hop && q.energies()[e.y] > q.energies()[e.x] + 0.2) ++uphill;
    }
    CHECK(uphill == 0);
    const HopStatistics hs = hop_statistics(t, q);
    if (!hs.empty) CHECK(hs.mean_hop_distance >= 1.0);
}

TEST_CASE("ergodic occupation averages on a larger box")
{
    ModelParams p;
    p.dim = 2;
    p.box = {6, 6};
    p.impurity_density = 0.5;
    p.r_loc = 0.7;
    const auto w = sample_disorder(p, 3);
    const ClassicalGenerator q(enumerate_jumps(w));
    std::vector<KmcTrajectory> reps;
    for (std::uint64_t s = 0; s < 4; ++s) {
        KmcOptions o;
        o.seed = 100 + s;
        o.t_max = 2000.0;
        reps.push_back(gillespie_run(q, initial_configuration(q, InitialState::equilibrium, s), o));
    }
    const OccupationCheck oc = occupation_check(reps, q);
    CHECK(oc.sites == q.size());
    CHECK(oc.fraction >= 0.9);
    const HopStatistics hs = hop_statistics(reps[0], q);
    CHECK_FALSE(hs.empty);
    CHECK(hs.mean_hop_distance >= 1.0);
    CHECK(hs.hop_rate > 0.0);
    CHECK(hs.mean_abs_energy_exchange > 0.0);
}
