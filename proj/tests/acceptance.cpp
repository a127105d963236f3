// acceptance.cpp: One PASS/FAIL line per acceptance criterion

#include <algorithm>
#include <array>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <string>
#include <thread>
#include <vector>

#include "hopdyn/gns.hpp"
#include "hopdyn/kmc.hpp"
#include "hopdyn/lindblad.hpp"
#include "hopdyn/mott.hpp"
#include "hopdyn/spectra.hpp"

using namespace hopdyn;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0)
{
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Outcome {
    bool pass{false};
    std::string detail;
};

std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0, double d = 0.0)
{
    char buf[256];
    std::snprintf(buf, sizeof buf, f, a, b, c, d);
    return buf;
}

void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body)
{
    const std::size_t workers = std::max(1u, std::min<unsigned>(std::thread::hardware_concurrency(), 8u));
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < std::min(workers, count); ++w) {
        pool.emplace_back([&] {
            for (std::size_t i; (i = next++) < count;) body(i);
        });
    }
    for (auto& t : pool) t.join();
}

// n sites on a line with energies drawn uniformly from the band.
DisorderRealization line_realization(std::size_t n, std::uint64_t seed, double beta, double mu)
{
    ModelParams p;
    p.beta = beta;
    p.mu = mu;
    p.dim = 1;
    p.box = {static_cast<int>(n)};
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> e(p.delta.lo, p.delta.hi);
    std::vector<Impurity> imps;
    const Box box(p.box);
    for (std::size_t i = 0; i < n; ++i) imps.push_back({box.point(i), e(rng)});
    return DisorderRealization(p, imps, seed);
}

FockOperator unit_random(const FockSpacePtr& s, std::mt19937_64& rng, std::optional<Degree> d = std::nullopt)
{
    FockOperator a = random_operator(s, rng, d);
    return a * cplx(1.0 / a.frobenius_norm(), 0.0);
}

// 1: structural identities -------------------------------------------------

Outcome structural()
{
    const auto t0 = Clock::now();
    const double tol = 1e-10;
    double car = 0, axioms = 0, kms = 0, leibniz = 0, dirichlet = 0, invariance = 0;
    bool j5_finite = true;
    std::size_t kms_nonzero = 0, kms_pairs = 0;
    for (double beta : {0.1, 1.0, 10.0}) {
        for (std::uint64_t seed = 1; seed <= 20; ++seed) {
            ModelParams p;
            p.beta = beta;
            p.box = {2, 2};
            p.impurity_density = 1.0;
            const auto w = sample_disorder(p, seed);
            const auto space = FockSpace::from_realization(w);
            const auto cat = enumerate_jumps(w);
            car = std::max(car, car_defect(space));
            const AxiomReport ax = check_axioms(cat, space);
            axioms = std::max(axioms, ax.max_deviation());
            j5_finite = j5_finite && std::isfinite(ax.j5_norm);

            const Generator gen({cat, false, {}, true}, space);
            std::mt19937_64 rng(seed * 1000 + static_cast<std::uint64_t>(beta * 10));
            for (int k = 0; k < 100; ++k) {
                const FockOperator a = from_monomial(space, random_monomial(space->size(), rng));
                const FockOperator b = k % 2 ? a.adjoint() : from_monomial(space, random_monomial(space->size(), rng));
                kms = std::max(kms, kms_check(w, a, b));
                ++kms_pairs;
                if (std::abs(state_eval(w, a * b)) > 1e-6) ++kms_nonzero;
            }
            for (int k = 0; k < 6; ++k) {
                const Degree da = k % 2 ? Degree::odd : Degree::even;
                const Degree db = k % 3 ? Degree::odd : Degree::even;
                const FockOperator a = unit_random(space, rng, da);
                const FockOperator b = unit_random(space, rng, db);
                leibniz = std::max(leibniz, leibniz_defect(gen, a.matrix(), b.matrix()));
                dirichlet = std::max(dirichlet, dirichlet_identity(gen, a, b).deviation);
            }
            const auto basis = enumerate_basis(w);
            for (std::size_t i = 0; i < basis->size(); ++i) {
                const FockOperator d(space, gen.dissipate(basis->op(i).matrix()));
                invariance = std::max(invariance, std::abs(state_eval(w, d)));
            }
        }
    }
    const double worst = std::max({car, axioms, kms, leibniz, dirichlet, invariance});
    const double dt = seconds_since(t0);
    Outcome o;
    o.pass = worst <= tol && j5_finite && dt < 60.0;
    o.detail = fmt("car=%.1e axioms=%.1e kms=%.1e leibniz=%.1e", car, axioms, kms, leibniz)
               + fmt(" dirichlet=%.1e rho_D=%.1e nonzero_kms_pairs=%.0f/%.0f", dirichlet, invariance,
                     static_cast<double>(kms_nonzero), static_cast<double>(kms_pairs))
               + fmt(" tol=1e-10 time=%.1fs (<60)", dt);
    return o;
}

// 2: star diagonalization --------------------------------------------------

Outcome star_diagonal()
{
    const auto t0 = Clock::now();
    double off = 0, rel = 0;
    std::size_t dim = 0;
    const std::vector<std::pair<double, double>> points{{0.1, -0.5}, {1.0, 0.0}, {10.0, 0.3}};
    for (std::size_t k = 0; k < points.size(); ++k) {
        const auto w = line_realization(5, 100 + k, points[k].first, points[k].second);
        const auto b = enumerate_basis(w);
        const auto m = assemble(b, enumerate_jumps(w), {false, true});
        dim = b->size();
        for (Eigen::Index i = 0; i < m.matrix.rows(); ++i) {
            for (Eigen::Index j = 0; j < m.matrix.cols(); ++j) {
                if (i != j) off = std::max(off, std::abs(m.matrix(i, j)));
            }
            const double g = star_eigenvalue(*b, b->element(static_cast<std::size_t>(i)));
            const double d = m.matrix(i, i);
            rel = std::max(rel, g == 0.0 ? std::abs(d) : std::abs(d - g) / g);
        }
    }
    const double dt = seconds_since(t0);
    return {off <= 1e-12 && rel <= 1e-12 && dt < 10.0,
            fmt("dim=%.0f offdiag=%.1e (<=1e-12) diag_rel=%.1e (<=1e-12) time=%.1fs (<10)", static_cast<double>(dim),
                off, rel, dt)};
}

// 3: uniqueness and gap ----------------------------------------------------

Outcome uniqueness_gap()
{
    const auto t0 = Clock::now();
    struct Row {
        std::size_t kernel{0};
        double overlap{0}, gap_margin{0}, k_margin{0};
        std::size_t kin_kernel{0};
        bool ok{false};
    };
    std::vector<Row> rows(20);
    parallel_for(rows.size(), [&](std::size_t k) {
        const EnergyInterval band{};
        const double mu = band.lo + (static_cast<double>(k) + 0.5) / 20.0 * band.width();
        const double beta = std::array<double, 3>{0.1, 1.0, 10.0}[k % 3];
        const auto w = line_realization(5, 200 + k, beta, mu);
        const auto b = enumerate_basis(w);
        const auto cat = enumerate_jumps(w);
        const auto m = assemble(b, cat);
        const GapReport g = kernel_and_gap(m);
        const KRestriction kr = restrict_to_K(m);
        const double gs = w.params().gamma_star;
        Row r;
        r.kernel = g.kernel_dim;
        r.overlap = g.kernel_overlap;
        r.gap_margin = g.gap - (gs / 2 - 1e-10);
        r.k_margin = kr.min_eigenvalue - (gs - 1e-10);
        // cross-check skipped: it is covered by the full assembly above
        const auto kin = assemble(b, cat.hops_only(), {}, {false, 1e-10});
        r.kin_kernel = kernel_and_gap(kin).kernel_dim;
        r.ok = r.kernel == 1 && r.overlap >= 1 - 1e-8 && r.gap_margin >= 0 && r.k_margin >= 0 && r.kin_kernel > 1;
        rows[k] = r;
    });
    bool ok = true;
    double min_overlap = 1, min_gap = 1e300, min_k = 1e300;
    std::size_t max_kernel = 0, min_kin_kernel = SIZE_MAX;
    for (const Row& r : rows) {
        ok = ok && r.ok;
        min_overlap = std::min(min_overlap, r.overlap);
        min_gap = std::min(min_gap, r.gap_margin);
        min_k = std::min(min_k, r.k_margin);
        max_kernel = std::max(max_kernel, r.kernel);
        min_kin_kernel = std::min(min_kin_kernel, r.kin_kernel);
    }
    const double dt = seconds_since(t0);
    return {ok && dt < 120.0,
            fmt("max_kernel=%.0f min_overlap=1-%.1e gap_margin=%.2e K_margin=%.2e", static_cast<double>(max_kernel),
                1 - min_overlap, min_gap, min_k)
                + fmt(" kin_only_min_kernel=%.0f time=%.1fs (<120)", static_cast<double>(min_kin_kernel), dt)};
}

// 4: return to equilibrium -------------------------------------------------

Eigen::MatrixXcd random_density(std::size_t dim, std::mt19937_64& rng)
{
    std::normal_distribution<double> g;
    const auto n = static_cast<Eigen::Index>(dim);
    Eigen::MatrixXcd m(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < n; ++j) m(i, j) = cplx(g(rng), g(rng));
    }
    Eigen::MatrixXcd r = m * m.adjoint();
    return r / r.trace();
}

Outcome return_to_equilibrium_check()
{
    const auto t0 = Clock::now();
    const auto w = line_realization(3, 300, 1.0, 0.1);
    const auto b = enumerate_basis(w);
    const auto m = assemble(b, enumerate_jumps(w));
    const auto& s = b->space();
    const double gs = w.params().gamma_star;
    const auto dim = static_cast<Eigen::Index>(s->dim());

    std::vector<Eigen::MatrixXcd> states;
    Eigen::MatrixXcd vac = Eigen::MatrixXcd::Zero(dim, dim);
    vac(0, 0) = 1;
    states.push_back(vac);
    Eigen::MatrixXcd full = Eigen::MatrixXcd::Zero(dim, dim);
    full(dim - 1, dim - 1) = 1;
    states.push_back(full);
    states.push_back(Eigen::MatrixXcd::Identity(dim, dim) / static_cast<double>(dim));
    std::mt19937_64 rng(17);
    states.push_back(random_density(s->dim(), rng));
    states.push_back(random_density(s->dim(), rng));

    const std::vector<double> grid{0.5 / gs, 1 / gs, 2 / gs, 5 / gs, 10 / gs, 40 / gs};
    double worst_ratio = 0, worst_limit = 0;
    bool ok = true;
    for (int k = 0; k < 50; ++k) {
        const FockOperator a = random_operator(s, rng);
        for (const auto& rho : states) {
            const DecaySeries d = return_to_equilibrium(m, a, rho, grid);
            for (std::size_t i = 0; i + 1 < d.points.size(); ++i) {
                const auto& p = d.points[i];
                if (p.bound > 0) worst_ratio = std::max(worst_ratio, p.gns_norm / p.bound);
                ok = ok && p.gns_norm <= p.bound;
            }
            worst_limit = std::max(worst_limit, d.points.back().state_deviation);
        }
    }
    ok = ok && worst_limit <= 1e-8;
    return {ok, fmt("max norm/bound=%.4f (<=1, bound carries 1+1e-8) limit_dev=%.1e (<=1e-8) time=%.1fs", worst_ratio,
                    worst_limit, seconds_since(t0))};
}

// 5: classical reduction ---------------------------------------------------

Outcome classical_reduction()
{
    double stat = 0, red = 0;
    bool unique = true;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const double beta = std::array<double, 3>{0.1, 1.0, 10.0}[seed % 3];
        const auto w = line_realization(3, 400 + seed, beta, -0.3 + 0.03 * static_cast<double>(seed));
        const auto cat = enumerate_jumps(w);
        const ClassicalGenerator q(cat);
        const StationaryResult r = brute_force_stationary(q);
        unique = unique && r.null_dimension == 1;
        stat = std::max(stat, r.max_deviation);
        const Generator gen({cat, false, {}, true});
        for (Eigen::Index e = 0; e < 8; ++e) {
            Eigen::VectorXd f = Eigen::VectorXd::Zero(8);
            f[e] = 1.0;
            const Eigen::MatrixXcd d = gen.dissipate(Eigen::MatrixXcd(f.cast<cplx>().asDiagonal()));
            const Eigen::MatrixXcd off = d - Eigen::MatrixXcd(d.diagonal().asDiagonal());
            red = std::max(red, off.cwiseAbs().maxCoeff());
            red = std::max(red, (q.apply(f) + d.diagonal().real()).cwiseAbs().maxCoeff());
        }
    }
    return {unique && stat <= 1e-10 && red <= 1e-10,
            fmt("stationary_dev=%.1e (<=1e-10) reduction_dev=%.1e (<=1e-10)", stat, red)};
}

// 6: KMC equilibrium -------------------------------------------------------

Outcome kmc_equilibrium()
{
    const auto t0 = Clock::now();
    ModelParams p;
    p.dim = 3;
    p.box = {20, 20, 20};
    p.impurity_density = 0.1;
    p.r_loc = 0.5;
    const auto w = sample_disorder(p, 1);
    const ClassicalGenerator q(enumerate_jumps(w));
    const std::size_t events = 1000000;
    std::vector<KmcTrajectory> reps(8);
    parallel_for(reps.size(), [&](std::size_t i) {
        const auto seed = static_cast<std::uint64_t>(i + 1);
        const Configuration c0 = initial_configuration(q, InitialState::equilibrium, seed);
        KmcOptions o;
        o.seed = seed;
        o.t_max = 1.02 * static_cast<double>(events) / total_rate(q, c0);
        reps[i] = gillespie_run(q, c0, o);
    });
    std::size_t min_events = SIZE_MAX;
    for (const auto& r : reps) min_events = std::min(min_events, r.stats.events());
    const OccupationCheck oc = occupation_check(reps, q, 4.0);
    const double dt = seconds_since(t0);
    return {oc.fraction >= 0.99 && min_events >= events && dt < 300.0,
            fmt("sites=%.0f within_4se=%.4f (>=0.99) min_events=%.0f time=%.1fs (<300)", static_cast<double>(oc.sites),
                oc.fraction, static_cast<double>(min_events), dt)};
}

// 7: Mott numbers ----------------------------------------------------------

Outcome mott_numbers()
{
    const MottInputs si = silicon_preset();
    const double t0 = mott_T0(si);
    const double q = std::pow(t0 / 1.0, 0.25);
    double worst = 0;
    for (int d : {1, 2, 3}) {
        MottInputs in = si;
        in.d = d;
        const double td = mott_T0(in);
        for (int k = 0; k <= 60; ++k) {
            in.T = td * std::pow(10.0, -6.0 + 0.1 * k);
            const double num = optimize_hop(in).neg_log_p;
            const double cf = mott_closed_form(in).neg_log_p;
            worst = std::max(worst, std::abs(num - cf) / cf);
        }
    }
    const bool ok = std::abs(t0 - 1.1e5) / 1.1e5 <= 0.10 && std::abs(q - 18.0) <= 0.5 && worst <= 0.01;
    return {ok, fmt("T0=%.4gK (1.1e5 +-10%%) (T0/1K)^(1/4)=%.3f (18+-0.5) max_rel_dev=%.1e (<=0.01)", t0, q, worst)};
}

// 8: soft temperature sweep ------------------------------------------------

Outcome temperature_sweep()
{
    const auto t0 = Clock::now();
    ModelParams p;
    p.dim = 3;
    p.box = {20, 20, 20};
    p.impurity_density = 0.1;
    p.r_loc = 0.5;
    p.gamma_star = 1e-3;
    const auto base = sample_disorder(p, 1);
    const std::vector<double> T{1.0, 0.5, 0.25, 0.125, 0.0625, 0.03125};
    std::vector<double> dist(T.size()), rate(T.size());
    parallel_for(T.size(), [&](std::size_t i) {
        ModelParams pi = p;
        pi.beta = 1.0 / T[i];
        const auto w = base.with_params(pi);
        const ClassicalGenerator q(enumerate_jumps(w));
        const Configuration c0 = initial_configuration(q, InitialState::equilibrium, 5);
        KmcOptions o;
        o.seed = 5;
        o.t_max = 1.02 * 3e5 / total_rate(q, c0);
        const auto tr = gillespie_run(q, c0, o);
        const HopStatistics h = hop_statistics(tr, q);
        dist[i] = h.mean_hop_distance;
        rate[i] = h.hop_rate_per_site;
    });
    bool monotone = true;
    for (std::size_t i = 1; i < T.size(); ++i) monotone = monotone && dist[i] > dist[i - 1];
    const HoppingLawFit fit = compare_hopping_laws(T, rate, p.dim);
    std::string d = "[non-blocking] r(T)=";
    for (std::size_t i = 0; i < T.size(); ++i) d += fmt(i ? ",%.3f" : "%.3f", dist[i]);
    d += fmt(" monotone=%.0f R2_stretched=%.4f R2_arrhenius=%.4f time=%.1fs", monotone ? 1 : 0, fit.stretched.r2,
             fit.arrhenius.r2, seconds_since(t0));
    return {monotone && fit.stretched_better, d};
}

// 9: eigenvalue monotonicity under nesting ---------------------------------

Outcome nesting_monotonicity()
{
    double worst = 0;
    double lift = 0;
    for (std::uint64_t k = 0; k < 10; ++k) {
        const auto w = line_realization(4, 900 + k, 0.5 + 0.5 * static_cast<double>(k), -0.2);
        const auto b = enumerate_basis(w);
        const auto cat = enumerate_jumps(w);
        std::mt19937_64 rng(k);
        // random reversal-closed subsets: keep a pair in C′ with prob 0.7, in C with a further 0.5
        std::vector<int> level(cat.size(), 0);
        std::uniform_real_distribution<double> u;
        for (std::size_t i = 0; i < cat.size(); ++i) {
            const std::size_t r = cat.reverse_index(i);
            if (r < i) {
                level[i] = level[r];
                continue;
            }
            const double x = u(rng);
            level[i] = x < 0.35 ? 2 : (x < 0.7 ? 1 : 0);
        }
        auto pick = [&](int min_level) {
            std::vector<Jump> sel;
            for (std::size_t i = 0; i < cat.size(); ++i) {
                if (level[i] >= min_level) sel.push_back(cat.jumps()[i]);
            }
            return JumpCatalogue(w, sel, cat.hop_cutoff());
        };
        const Spectrum small = spectrum(assemble(b, pick(2)), false);
        const Spectrum large = spectrum(assemble(b, pick(1)), false);
        worst = std::max(worst, (small.values - large.values).maxCoeff());
        lift += (large.values - small.values).mean() / 10.0;
    }
    return {worst <= 1e-10,
            fmt("max(lambda_C - lambda_C')=%.1e (<=1e-10) mean_lift=%.3f over 10 nestings at n=4", worst, lift)};
}

} // namespace

int main()
{
    struct Criterion {
        int id;
        const char* name;
        Outcome (*run)();
        bool blocking;
    };
    const std::vector<Criterion> criteria{
        {1, "structural identities", structural, true},
        {2, "star dissipator diagonalization", star_diagonal, true},
        {3, "uniqueness and spectral gap", uniqueness_gap, true},
        {4, "return to equilibrium", return_to_equilibrium_check, true},
        {5, "classical reduction oracle", classical_reduction, true},
        {6, "KMC statistical equilibrium", kmc_equilibrium, true},
        {7, "Mott numbers", mott_numbers, true},
        {8, "temperature sweep", temperature_sweep, false},
        {9, "eigenvalue monotonicity", nesting_monotonicity, true},
    };
    int failures = 0;
    for (const auto& c : criteria) {
        Outcome o;
        try {
            o = c.run();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        std::printf("%s %d %s: %s\n", o.pass ? "PASS" : "FAIL", c.id, c.name, o.detail.c_str());
        std::fflush(stdout);
        if (!o.pass && c.blocking) ++failures;
    }
    return failures == 0 ? 0 : 1;
}
