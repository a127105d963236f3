// cli.cpp: Command dispatch, report assembly and manifest output

#include "hopdyn/cli.hpp"

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <limits>
#include <random>
#include <sstream>
#include <thread>

#include <CLI11.hpp>

#include "hopdyn/errors.hpp"
#include "hopdyn/gns.hpp"
#include "hopdyn/jumps.hpp"
#include "hopdyn/kmc.hpp"
#include "hopdyn/spectra.hpp"

namespace hopdyn {

namespace {

const std::vector<std::string> kCommands{"verify", "spectrum", "evolve", "kmc", "mott", "sample"};

// One numeric assertion row; every row carries its tolerance.
struct Check {
    std::string name;
    std::uint64_t seed{0};
    double value{0.0};
    double tolerance{0.0};
    bool pass{true};
};

json check_json(const Check& c)
{
    return {{"check", c.name}, {"seed", c.seed}, {"value", c.value}, {"tolerance", c.tolerance}, {"pass", c.pass}};
}

Check at_most(std::string name, std::uint64_t seed, double value, double tol)
{
    return {std::move(name), seed, value, tol, std::isfinite(value) && value <= tol};
}

Check at_least(std::string name, std::uint64_t seed, double value, double bound)
{
    return {std::move(name), seed, value, bound, std::isfinite(value) && value >= bound};
}

std::string fmt(double v)
{
    std::ostringstream os;
    os << std::setprecision(17) << v;
    return os.str();
}

void write_checks_csv(std::ostream& os, const std::vector<Check>& checks)
{
    os << "check,seed,value,tolerance,pass\n";
    for (const Check& c : checks) {
        os << c.name << ',' << c.seed << ',' << fmt(c.value) << ',' << fmt(c.tolerance) << ',' << (c.pass ? 1 : 0)
           << '\n';
    }
}

bool all_pass(const std::vector<Check>& checks)
{
    for (const Check& c : checks) {
        if (!c.pass) return false;
    }
    return true;
}

json checks_json(const std::vector<Check>& checks)
{
    json a = json::array();
    for (const Check& c : checks) a.push_back(check_json(c));
    return a;
}

template <class F>
void parallel_for(std::size_t count, int threads, F&& body)
{
    const std::size_t workers = std::min<std::size_t>(count, static_cast<std::size_t>(std::max(threads, 1)));
    if (workers <= 1) {
        for (std::size_t i = 0; i < count; ++i) body(i);
        return;
    }
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(workers);
    for (std::size_t w = 0; w < workers; ++w) {
        pool.emplace_back([&, w] {
            try {
                for (std::size_t i = w; i < count; i += workers) body(i);
            } catch (...) {
                errors[w] = std::current_exception();
            }
        });
    }
    for (auto& t : pool) t.join();
    for (auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }
}

FockOperator unit_random(const FockSpacePtr& space, std::mt19937_64& rng)
{
    FockOperator a = random_operator(space, rng);
    return a * cplx(1.0 / a.frobenius_norm(), 0.0);
}

// verify -------------------------------------------------------------------

std::vector<Check> verify_seed(const RunConfig& c, std::uint64_t seed)
{
    const double tol = c.tol.identity;
    std::vector<Check> out;
    const DisorderRealization omega = sample_disorder(c.params, seed);
    if (omega.occupied_count() > kMaxFockSites) throw SizeError("verify supports at most 10 occupied sites");
    const FockSpacePtr space = FockSpace::from_realization(omega);
    const JumpCatalogue cat = enumerate_jumps(omega);

    out.push_back(at_most("car", seed, car_defect(space), tol));
    const AxiomReport ax = check_axioms(cat, space);
    out.push_back(at_most("J1", seed, ax.j1, tol));
    out.push_back(at_most("J2_support", seed, ax.j2_support, 0.0));
    if (ax.j2_covariance_checked) out.push_back(at_most("J2_covariance", seed, ax.j2_covariance, tol));
    out.push_back(at_most("J3", seed, ax.j3, tol));
    out.push_back(at_most("J4", seed, ax.j4, tol));
    out.push_back(at_most("J4_ratio", seed, ax.j4_ratio, tol));
    out.push_back(at_most("J5_norm_finite", seed, std::isfinite(ax.j5_norm) ? 0.0 : INFINITY, 0.0));

    GeneratorSpec spec{cat, false, c.parts, true};
    const Generator gen(spec, space);
    std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ULL);
    double kms = 0.0;
    double leibniz = 0.0;
    double dirichlet = 0.0;
    double invariance = 0.0;
    const std::size_t n = space->size();
    for (std::size_t s = 0; s < c.verify_samples; ++s) {
        const FockOperator ma = from_monomial(space, random_monomial(n, rng));
        // every other pair uses B = A†, whose expectation is generically nonzero
        const FockOperator mb = s % 2 ? ma.adjoint() : from_monomial(space, random_monomial(n, rng));
        kms = std::max(kms, kms_check(omega, ma, mb));
        const FockOperator a = unit_random(space, rng);
        const FockOperator b = unit_random(space, rng);
        leibniz = std::max(leibniz, leibniz_defect(gen, a.matrix(), b.matrix()));
        dirichlet = std::max(dirichlet, dirichlet_identity(gen, a, b).deviation);
        invariance = std::max(invariance, std::abs(state_eval(omega, FockOperator(space, gen.dissipate(a.matrix())))));
    }
    out.push_back(at_most("kms", seed, kms, tol));
    out.push_back(at_most("leibniz", seed, leibniz, tol));
    out.push_back(at_most("dirichlet", seed, dirichlet, tol));
    out.push_back(at_most("state_invariance", seed, invariance, tol));
    if (c.parts.kin && c.parts.star) {
        const ClassicalGenerator cg(cat);
        out.push_back(at_most("detailed_balance", seed, cg.detailed_balance_deviation(), tol));
    }
    return out;
}

int run_verify(const RunConfig& c, std::ostream& os)
{
    std::vector<std::vector<Check>> per(c.seeds.size());
    parallel_for(c.seeds.size(), c.threads, [&](std::size_t i) { per[i] = verify_seed(c, c.seeds[i]); });
    std::vector<Check> all;
    double worst = 0.0;
    for (const auto& v : per) {
        for (const Check& ch : v) {
            all.push_back(ch);
            if (ch.tolerance > 0.0) worst = std::max(worst, ch.value);
        }
    }
    const bool ok = all_pass(all);
    if (c.format == "csv") {
        write_checks_csv(os, all);
    } else {
        json j{{"command", "verify"}, {"pass", ok}, {"max_deviation", worst}, {"checks", checks_json(all)}};
        os << j.dump(2) << '\n';
    }
    return ok ? kExitOk : kExitAssertion;
}

// spectrum -----------------------------------------------------------------

json spectrum_seed(const RunConfig& c, std::uint64_t seed, std::vector<Check>& checks, Eigen::VectorXd& values)
{
    const DisorderRealization omega = sample_disorder(c.params, seed);
    const auto basis = enumerate_basis(omega);
    const JumpCatalogue cat = enumerate_jumps(omega);
    const GnsGeneratorMatrix m = assemble(basis, cat, c.parts, {true, c.tol.identity});
    const Spectrum s = spectrum(m);
    values = s.values;
    json j;
    j["seed"] = seed;
    j["sites"] = omega.occupied_count();
    j["basis_size"] = basis->size();
    j["parts"] = to_string(c.parts);
    j["path_deviation"] = m.path_deviation;
    j["eigenvalues"] = std::vector<double>(s.values.data(), s.values.data() + s.values.size());
    const GapReport g = kernel_and_gap(m, s);
    if (!c.parts.star) {
        // without the cemetery the number operator is conserved
        j["kernel_dim"] = g.kernel_dim;
        checks.push_back({"kernel_degenerate", seed, static_cast<double>(g.kernel_dim), 2.0, g.kernel_dim >= 2});
        return j;
    }

    j["gap_report"] = gap_report_json(g, c.tol.gap);
    checks.push_back({"kernel_dim", seed, static_cast<double>(g.kernel_dim), 1.0, g.kernel_dim == 1});
    checks.push_back(at_least("kernel_overlap", seed, g.kernel_overlap, 1.0 - 1e-8));
    checks.push_back(at_least("gap_vs_half_gamma_star", seed, g.gap, g.bound - c.tol.gap));

    if (!c.params.rate_modulation) {
        try {
            const KRestriction k = restrict_to_K(m, c.tol.identity);
            j["k_restriction"] = {{"dim", k.indices.size()}, {"min_eigenvalue", k.min_eigenvalue},
                                  {"bound", c.params.gamma_star}, {"coupling", k.coupling}};
            if (!k.indices.empty()) {
                checks.push_back(at_least("k_min_vs_gamma_star", seed, k.min_eigenvalue,
                                          c.params.gamma_star - c.tol.gap));
            }
        } catch (const ConsistencyError& e) {
            checks.push_back({"k_invariance", seed, INFINITY, c.tol.identity, false});
        }
    }
    if (!c.parts.kin) {
        double off = 0.0;
        double diag = 0.0;
        for (Eigen::Index i = 0; i < m.matrix.rows(); ++i) {
            for (Eigen::Index k = 0; k < m.matrix.cols(); ++k) {
                if (i != k) off = std::max(off, std::abs(m.matrix(i, k)));
            }
            const double want = star_eigenvalue(*basis, basis->element(static_cast<std::size_t>(i)));
            const double got = m.matrix(i, i);
            diag = std::max(diag, want == 0.0 ? std::abs(got) : std::abs(got - want) / std::abs(want));
        }
        checks.push_back(at_most("star_offdiagonal", seed, off, 1e-12));
        checks.push_back(at_most("star_diagonal_relative", seed, diag, 1e-12));
    }
    return j;
}

int run_spectrum(const RunConfig& c, std::ostream& os)
{
    std::vector<json> reports(c.seeds.size());
    std::vector<std::vector<Check>> checks(c.seeds.size());
    std::vector<Eigen::VectorXd> values(c.seeds.size());
    parallel_for(c.seeds.size(), c.threads,
                 [&](std::size_t i) { reports[i] = spectrum_seed(c, c.seeds[i], checks[i], values[i]); });
    std::vector<Check> all;
    for (const auto& v : checks) all.insert(all.end(), v.begin(), v.end());
    const bool ok = all_pass(all);
    if (c.format == "csv") {
        for (std::size_t i = 0; i < values.size(); ++i) {
            if (c.seeds.size() > 1) os << "# seed " << c.seeds[i] << '\n';
            write_eigenvalues_csv(os, values[i], c.tol.gap);
        }
    } else {
        json j{{"command", "spectrum"}, {"pass", ok}, {"runs", reports}, {"checks", checks_json(all)}};
        os << j.dump(2) << '\n';
    }
    return ok ? kExitOk : kExitAssertion;
}

// evolve -------------------------------------------------------------------

json evolve_seed(const RunConfig& c, std::uint64_t seed, std::vector<Check>& checks, DecaySeries& series)
{
    const DisorderRealization omega = sample_disorder(c.params, seed);
    const auto basis = enumerate_basis(omega);
    const JumpCatalogue cat = enumerate_jumps(omega);
    const GnsGeneratorMatrix m = assemble(basis, cat, c.parts, {true, c.tol.identity});
    const FockSpacePtr& space = basis->space();

    std::mt19937_64 rng(c.evolve.observable_seed);
    const FockOperator a = unit_random(space, rng);
    const auto d = static_cast<Eigen::Index>(space->dim());
    Eigen::MatrixXcd rho = Eigen::MatrixXcd::Zero(d, d);
    rho(0, 0) = 1.0;

    std::vector<double> grid = c.evolve.times;
    if (grid.empty()) grid = {0.5, 1.0, 2.0, 5.0, 10.0, 40.0};
    const double scale = c.params.gamma_star > 0.0 ? 1.0 / c.params.gamma_star : 1.0;
    for (double& t : grid) t *= scale;
    series = return_to_equilibrium(m, a, rho, grid);

    checks.push_back({"decay_bound", seed, series.bound_holds ? 0.0 : 1.0, 0.0, series.bound_holds});
    json pts = json::array();
    for (const DecayPoint& p : series.points) {
        pts.push_back({{"t", p.t}, {"state_deviation", p.state_deviation}, {"gns_norm", p.gns_norm},
                       {"bound", p.bound}});
    }
    return {{"seed", seed},         {"gap", series.gap},          {"expectation", series.expectation},
            {"fitted_rate", series.fitted_rate}, {"bound_holds", series.bound_holds}, {"points", pts}};
}

int run_evolve(const RunConfig& c, std::ostream& os)
{
    std::vector<json> reports(c.seeds.size());
    std::vector<std::vector<Check>> checks(c.seeds.size());
    std::vector<DecaySeries> series(c.seeds.size());
    parallel_for(c.seeds.size(), c.threads,
                 [&](std::size_t i) { reports[i] = evolve_seed(c, c.seeds[i], checks[i], series[i]); });
    std::vector<Check> all;
    for (const auto& v : checks) all.insert(all.end(), v.begin(), v.end());
    const bool ok = all_pass(all);
    if (c.format == "csv") {
        os << "seed,t,state_deviation,gns_norm,bound\n";
        for (std::size_t i = 0; i < series.size(); ++i) {
            for (const DecayPoint& p : series[i].points) {
                os << c.seeds[i] << ',' << fmt(p.t) << ',' << fmt(p.state_deviation) << ',' << fmt(p.gns_norm) << ','
                   << fmt(p.bound) << '\n';
            }
        }
    } else {
        json j{{"command", "evolve"}, {"pass", ok}, {"runs", reports}, {"checks", checks_json(all)}};
        os << j.dump(2) << '\n';
    }
    return ok ? kExitOk : kExitAssertion;
}

// kmc ----------------------------------------------------------------------

InitialState initial_from_string(const std::string& s)
{
    if (s == "equilibrium") return InitialState::equilibrium;
    if (s == "empty") return InitialState::empty;
    if (s == "full") return InitialState::full;
    throw ConfigError("unknown initial state '" + s + "'");
}

int run_kmc(const RunConfig& c, std::ostream& os)
{
    if (c.seeds.empty()) throw ConfigError("kmc needs at least one seed");
    // One disorder realization (first seed); each seed drives one replica.
    const DisorderRealization omega = sample_disorder(c.params, c.seeds.front());
    const JumpCatalogue cat = enumerate_jumps(omega);
    const ClassicalGenerator gen(cat);
    const InitialState init = initial_from_string(c.kmc.initial);

    std::vector<KmcTrajectory> reps(c.seeds.size());
    parallel_for(c.seeds.size(), c.threads, [&](std::size_t i) {
        const std::uint64_t seed = c.seeds[i];
        const Configuration eta0 = initial_configuration(gen, init, seed);
        KmcOptions opts;
        opts.seed = seed;
        opts.time_batches = c.kmc.batches;
        opts.record_events = !c.kmc.events_csv.empty();
        opts.t_max = c.kmc.t_max;
        if (opts.t_max <= 0.0) {
            const double r0 = total_rate(gen, eta0);
            if (!(r0 > 0.0)) throw ConfigError("total rate vanishes; set kmc.t_max explicitly");
            opts.t_max = 1.02 * static_cast<double>(c.kmc.events) / r0;
        }
        reps[i] = gillespie_run(gen, eta0, opts);
    });

    std::vector<Check> checks;
    json summary{{"summary", true}, {"sites", gen.size()}, {"replicas", reps.size()}};
    std::size_t batches = 0;
    for (const auto& r : reps) {
        for (double b : r.stats.batch_length) batches += b > 0.0 ? 1 : 0;
    }
    if (batches >= 2 && gen.size() > 0) {
        const OccupationCheck oc = occupation_check(reps, gen, c.tol.kmc_sigmas);
        summary["within"] = oc.within;
        summary["fraction"] = oc.fraction;
        summary["batches"] = oc.batches;
        summary["sigmas"] = c.tol.kmc_sigmas;
        checks.push_back(at_least("occupation_fraction", c.seeds.front(), oc.fraction, c.tol.kmc_fraction));
    }
    const bool ok = all_pass(checks);
    summary["pass"] = ok;
    summary["checks"] = checks_json(checks);

    if (c.format == "csv") {
        os << "seed,events,hops,exits,entries,t_end,stalled,mean_hop_distance,mean_abs_energy_exchange\n";
        for (std::size_t i = 0; i < reps.size(); ++i) {
            const HopStatistics h = hop_statistics(reps[i], gen);
            os << c.seeds[i] << ',' << reps[i].stats.events() << ',' << reps[i].stats.hops << ','
               << reps[i].stats.exits << ',' << reps[i].stats.entries << ',' << fmt(reps[i].t_end) << ','
               << (reps[i].stalled ? 1 : 0) << ',' << fmt(h.mean_hop_distance) << ','
               << fmt(h.mean_abs_energy_exchange) << '\n';
        }
    } else {
        for (std::size_t i = 0; i < reps.size(); ++i) os << kmc_stats_json(reps[i], gen, c.seeds[i]).dump() << '\n';
        os << summary.dump() << '\n';
    }
    if (!c.kmc.events_csv.empty()) {
        for (std::size_t i = 0; i < reps.size(); ++i) {
            std::ofstream f(c.kmc.events_csv + "." + std::to_string(c.seeds[i]) + ".csv");
            if (!f) throw ConfigError("cannot write " + c.kmc.events_csv);
            write_events_csv(f, reps[i], gen);
        }
    }
    return ok ? kExitOk : kExitAssertion;
}

// mott ---------------------------------------------------------------------

int run_mott(const RunConfig& c, std::ostream& os)
{
    std::vector<MottRow> rows;
    std::vector<Check> checks;
    for (double t : c.mott.temperatures) {
        MottInputs in = c.mott.inputs;
        in.T = t;
        const MottRow r = mott_row(in);
        rows.push_back(r);
        checks.push_back(at_most("optimizer_vs_closed_form", 0, r.rel_deviation, c.tol.mott));
        const HopOptimum o = optimize_hop(in);
        checks.push_back(at_most("constraint_saturation", 0,
                                 std::abs(in.n_F * o.eps_opt * std::pow(o.r_opt, in.d) - 1.0), 1e-10));
    }
    const bool ok = all_pass(checks);
    if (c.format == "csv") {
        write_mott_csv(os, rows, c.tol.mott);
    } else {
        json r = json::array();
        for (const MottRow& m : rows) {
            r.push_back({{"T", m.T}, {"T0", m.T0}, {"r_opt_over_xi", m.r_over_xi}, {"eps_opt", m.eps_opt},
                         {"neg_log_p", m.neg_log_p}, {"closed_form", m.closed_form},
                         {"rel_deviation", m.rel_deviation}, {"tolerance", c.tol.mott}});
        }
        json j{{"command", "mott"}, {"pass", ok}, {"rows", r}, {"checks", checks_json(checks)}};
        os << j.dump(2) << '\n';
    }
    return ok ? kExitOk : kExitAssertion;
}

// sample -------------------------------------------------------------------

int run_sample(const RunConfig& c, std::ostream& os)
{
    if (c.format == "csv") {
        os << "seed,position,energy\n";
        for (std::uint64_t s : c.seeds) {
            const DisorderRealization omega = sample_disorder(c.params, s);
            for (const Impurity& imp : omega.impurities()) {
                os << s << ',' << point_string(imp.position) << ',' << fmt(imp.energy) << '\n';
            }
        }
        return kExitOk;
    }
    json a = json::array();
    for (std::uint64_t s : c.seeds) a.push_back(realization_to_json(sample_disorder(c.params, s)));
    os << a.dump(2) << '\n';
    return kExitOk;
}

std::string timestamp()
{
    const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    std::ostringstream os;
    os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
    return os.str();
}

int default_threads()
{
    if (const char* env = std::getenv(kThreadsEnv)) {
        try {
            const int t = std::stoi(env);
            if (t >= 1) return t;
        } catch (const std::exception&) {
        }
        throw ConfigError(std::string(kThreadsEnv) + " must be a positive integer");
    }
    return 1;
}

} // namespace

json config_to_json(const RunConfig& c)
{
    json j;
    j["schema"] = kRunSchema;
    j["command"] = c.command;
    j["preset"] = c.preset;
    j["params"] = params_to_json(c.params);
    j["seeds"] = c.seeds;
    j["format"] = c.format;
    j["threads"] = c.threads;
    j["parts"] = to_string(c.parts);
    j["verify"] = {{"samples", c.verify_samples}};
    j["tolerances"] = {{"identity", c.tol.identity},
                       {"gap", c.tol.gap},
                       {"mott", c.tol.mott},
                       {"kmc_sigmas", c.tol.kmc_sigmas},
                       {"kmc_fraction", c.tol.kmc_fraction}};
    j["kmc"] = {{"events", c.kmc.events},
                {"t_max", c.kmc.t_max},
                {"batches", c.kmc.batches},
                {"initial", c.kmc.initial},
                {"events_csv", c.kmc.events_csv}};
    j["evolve"] = {{"times", c.evolve.times}, {"observable_seed", c.evolve.observable_seed}};
    j["mott"] = {{"n_F", c.mott.inputs.n_F},
                 {"xi", c.mott.inputs.xi},
                 {"d", c.mott.inputs.d},
                 {"kB", c.mott.inputs.kB},
                 {"temperatures", c.mott.temperatures}};
    return j;
}

namespace {

void reject_unknown(const json& j, std::initializer_list<const char*> keys, const std::string& where)
{
    if (!j.is_object()) throw ConfigError(where + " must be a JSON object");
    for (const auto& [k, v] : j.items()) {
        (void)v;
        bool found = false;
        for (const char* key : keys) found = found || k == key;
        if (!found) throw ConfigError("unknown key '" + k + "' in " + where);
    }
}

template <class T>
void take(const json& j, const char* key, T& dst)
{
    if (!j.contains(key)) return;
    try {
        dst = j.at(key).get<T>();
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("bad value for '") + key + "': " + e.what());
    }
}

} // namespace

RunConfig config_from_json(const json& j, RunConfig c)
{
    reject_unknown(j,
                   {"schema", "command", "preset", "params", "seeds", "format", "threads", "parts", "verify",
                    "tolerances", "kmc", "evolve", "mott", "output_path"},
                   "config");
    if (j.contains("schema") && j["schema"] != kRunSchema) throw ConfigError("unsupported config schema");
    take(j, "command", c.command);
    if (j.contains("preset")) {
        take(j, "preset", c.preset);
        if (!c.preset.empty()) apply_preset(c, c.preset);
    }
    if (j.contains("params")) c.params = params_from_json(j["params"], c.params);
    take(j, "seeds", c.seeds);
    take(j, "format", c.format);
    take(j, "threads", c.threads);
    take(j, "output_path", c.output_path);
    if (j.contains("parts")) {
        std::string p;
        take(j, "parts", p);
        c.parts = parse_parts(p);
    }
    if (j.contains("verify")) {
        reject_unknown(j["verify"], {"samples"}, "verify");
        take(j["verify"], "samples", c.verify_samples);
    }
    if (j.contains("tolerances")) {
        const json& t = j["tolerances"];
        reject_unknown(t, {"identity", "gap", "mott", "kmc_sigmas", "kmc_fraction"}, "tolerances");
        take(t, "identity", c.tol.identity);
        take(t, "gap", c.tol.gap);
        take(t, "mott", c.tol.mott);
        take(t, "kmc_sigmas", c.tol.kmc_sigmas);
        take(t, "kmc_fraction", c.tol.kmc_fraction);
    }
    if (j.contains("kmc")) {
        const json& k = j["kmc"];
        reject_unknown(k, {"events", "t_max", "batches", "initial", "events_csv"}, "kmc");
        take(k, "events", c.kmc.events);
        take(k, "t_max", c.kmc.t_max);
        take(k, "batches", c.kmc.batches);
        take(k, "initial", c.kmc.initial);
        take(k, "events_csv", c.kmc.events_csv);
    }
    if (j.contains("evolve")) {
        const json& e = j["evolve"];
        reject_unknown(e, {"times", "observable_seed"}, "evolve");
        take(e, "times", c.evolve.times);
        take(e, "observable_seed", c.evolve.observable_seed);
    }
    if (j.contains("mott")) {
        const json& m = j["mott"];
        reject_unknown(m, {"n_F", "xi", "d", "kB", "temperatures"}, "mott");
        take(m, "n_F", c.mott.inputs.n_F);
        take(m, "xi", c.mott.inputs.xi);
        take(m, "d", c.mott.inputs.d);
        take(m, "kB", c.mott.inputs.kB);
        take(m, "temperatures", c.mott.temperatures);
    }
    return c;
}

void apply_preset(RunConfig& c, const std::string& name)
{
    c.preset = name;
    if (name == "silicon") {
        c.mott.inputs = silicon_preset();
        c.mott.temperatures = {1.0, 2.0, 5.0, 10.0, 30.0, 100.0};
    } else if (name == "desk-small") {
        ModelParams p;
        p.dim = 2;
        p.box = {2, 2};
        p.impurity_density = 1.0;
        c.params = p;
    } else if (name == "desk-kmc") {
        ModelParams p;
        p.dim = 3;
        p.box = {20, 20, 20};
        p.impurity_density = 0.1;
        p.r_loc = 0.5;
        c.params = p;
        c.seeds = {1, 2, 3, 4, 5, 6, 7, 8};
    } else {
        throw ConfigError("unknown preset '" + name + "' (silicon, desk-small, desk-kmc)");
    }
}

int run(const RunConfig& c, std::ostream& out)
{
    if (c.format != "json" && c.format != "csv") throw ConfigError("format must be json or csv");
    if (c.threads < 1) throw ConfigError("threads must be positive");
    if (c.command != "mott") c.params.validate();
    if (c.command == "verify") return run_verify(c, out);
    if (c.command == "spectrum") return run_spectrum(c, out);
    if (c.command == "evolve") return run_evolve(c, out);
    if (c.command == "kmc") return run_kmc(c, out);
    if (c.command == "mott") return run_mott(c, out);
    if (c.command == "sample") return run_sample(c, out);
    throw ConfigError("unknown command '" + c.command + "'");
}

int cli_main(int argc, char** argv)
{
    CLI::App app{"Dissipative electron hopping: exact finite-volume checks, KMC and Mott analytics"};
    app.require_subcommand(1, 1);

    std::string config_path;
    std::string preset;
    std::vector<std::uint64_t> seeds;
    std::string out_path;
    std::string format;
    int threads = 0;
    std::string parts;
    std::size_t events = 0;
    app.add_option("--config", config_path, "JSON run configuration")->check(CLI::ExistingFile);
    app.add_option("--preset", preset, "silicon | desk-small | desk-kmc");
    app.add_option("--seed", seeds, "Seed; repeat for several");
    app.add_option("--out", out_path, "Output file (default stdout); manifest goes to <out>.manifest.json");
    app.add_option("--format", format, "json | csv")->check(CLI::IsMember({"json", "csv"}));
    app.add_option("--threads", threads, std::string("Worker threads (default $") + kThreadsEnv + " or 1)");
    app.add_option("--parts", parts, "Dissipator parts: kin, star or kin,star");
    app.add_option("--events", events, "KMC events per replica");
    app.fallthrough();
    for (const std::string& cmd : kCommands) app.add_subcommand(cmd);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitConfig;
    }

    RunConfig cfg;
    int code = kExitOk;
    try {
        cfg.threads = default_threads();
        if (!preset.empty()) apply_preset(cfg, preset);
        if (!config_path.empty()) {
            std::ifstream f(config_path);
            json j;
            try {
                j = json::parse(f);
            } catch (const nlohmann::json::exception& e) {
                throw ConfigError(std::string("cannot parse config: ") + e.what());
            }
            cfg = config_from_json(j, cfg);
        }
        cfg.command = app.get_subcommands().front()->get_name();
        if (!preset.empty() && cfg.preset != preset) apply_preset(cfg, preset);
        if (!seeds.empty()) cfg.seeds = seeds;
        if (!out_path.empty()) cfg.output_path = out_path;
        if (!format.empty()) cfg.format = format;
        if (threads > 0) cfg.threads = threads;
        if (!parts.empty()) cfg.parts = parse_parts(parts);
        if (events > 0) cfg.kmc.events = events;

        if (cfg.output_path.empty()) {
            code = run(cfg, std::cout);
        } else {
            std::ofstream f(cfg.output_path);
            if (!f) throw ConfigError("cannot write " + cfg.output_path);
            code = run(cfg, f);
        }
    } catch (const std::invalid_argument& e) {
        std::cerr << "config error: " << e.what() << '\n';
        code = kExitConfig;
    } catch (const std::length_error& e) {
        std::cerr << "config error: " << e.what() << '\n';
        code = kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        code = kExitAssertion;
    }

    json manifest;
    manifest["schema"] = kManifestSchema;
    manifest["timestamp"] = timestamp();
    try {
        manifest["config"] = config_to_json(cfg);
    } catch (const std::exception&) {
        manifest["config"] = nullptr;
    }
    manifest["seeds"] = cfg.seeds;
    manifest["exit_code"] = code;
    if (cfg.output_path.empty()) {
        std::cerr << manifest.dump() << '\n';
    } else {
        std::ofstream m(cfg.output_path + ".manifest.json");
        m << manifest.dump(2) << '\n';
    }
    return code;
}

} // namespace hopdyn
