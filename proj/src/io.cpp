// io.cpp: Serialization of parameters, realizations, operators and run outputs

#include "hopdyn/io.hpp"

#include <iomanip>
#include <ostream>
#include <set>
#include <sstream>

#include "hopdyn/errors.hpp"

namespace hopdyn {

namespace {

std::string num(double v)
{
    std::ostringstream os;
    os << std::setprecision(17) << v;
    return os.str();
}

template <class T>
T get_as(const json& j, const char* key)
{
    try {
        return j.at(key).get<T>();
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("bad value for '") + key + "': " + e.what());
    }
}

} // namespace

json point_json(const Point& p)
{
    return json(p);
}

std::string point_string(const Point& p)
{
    std::string s;
    for (std::size_t i = 0; i < p.size(); ++i) {
        if (i) s += ':';
        s += std::to_string(p[i]);
    }
    return s;
}

json params_to_json(const ModelParams& p)
{
    json j;
    j["schema"] = kParamsSchema;
    j["beta"] = p.beta;
    j["mu"] = p.mu;
    j["gamma0"] = p.gamma0;
    j["gamma_star"] = p.gamma_star;
    j["r_loc"] = p.r_loc;
    j["delta"] = {p.delta.lo, p.delta.hi};
    j["dim"] = p.dim;
    j["box"] = p.box;
    j["impurity_density"] = p.impurity_density;
    j["metric"] = to_string(p.metric);
    j["z_mode"] = to_string(p.z_mode);
    if (!p.rate_modulation) {
        j["rate_modulation"] = nullptr;
    } else if (p.rate_modulation->profile) {
        const CosineProfile& c = *p.rate_modulation->profile;
        j["rate_modulation"] = {{"kind", "cosine"},
                                {"hop_amplitude", c.hop_amplitude},
                                {"bath_amplitude", c.bath_amplitude},
                                {"frequency", c.frequency}};
    } else {
        throw ConfigError("rate modulation without a closed-form profile cannot be serialized");
    }
    return j;
}

ModelParams params_from_json(const json& j, ModelParams base)
{
    if (!j.is_object()) throw ConfigError("params must be a JSON object");
    static const std::set<std::string> known{"schema", "beta", "mu", "gamma0", "gamma_star", "r_loc",
                                             "delta", "dim", "box", "impurity_density", "metric",
                                             "z_mode", "rate_modulation"};
    for (const auto& [key, value] : j.items()) {
        (void)value;
        if (!known.count(key)) throw ConfigError("unknown params key '" + key + "'");
    }
    if (j.contains("schema") && j["schema"] != kParamsSchema) {
        throw ConfigError("unsupported params schema " + j["schema"].dump());
    }
    ModelParams p = std::move(base);
    if (j.contains("beta")) p.beta = get_as<double>(j, "beta");
    if (j.contains("mu")) p.mu = get_as<double>(j, "mu");
    if (j.contains("gamma0")) p.gamma0 = get_as<double>(j, "gamma0");
    if (j.contains("gamma_star")) p.gamma_star = get_as<double>(j, "gamma_star");
    if (j.contains("r_loc")) p.r_loc = get_as<double>(j, "r_loc");
    if (j.contains("delta")) {
        const auto d = get_as<std::vector<double>>(j, "delta");
        if (d.size() != 2) throw ConfigError("delta must be [lo, hi]");
        p.delta = {d[0], d[1]};
    }
    if (j.contains("box")) {
        p.box = get_as<std::vector<int>>(j, "box");
        if (!j.contains("dim")) p.dim = static_cast<int>(p.box.size());
    }
    if (j.contains("dim")) p.dim = get_as<int>(j, "dim");
    if (j.contains("impurity_density")) p.impurity_density = get_as<double>(j, "impurity_density");
    if (j.contains("metric")) p.metric = metric_from_string(get_as<std::string>(j, "metric"));
    if (j.contains("z_mode")) p.z_mode = z_mode_from_string(get_as<std::string>(j, "z_mode"));
    if (j.contains("rate_modulation")) {
        const json& m = j["rate_modulation"];
        if (m.is_null()) {
            p.rate_modulation.reset();
        } else {
            if (!m.is_object() || m.value("kind", "") != "cosine") {
                throw ConfigError("rate_modulation must be null or {\"kind\": \"cosine\", ...}");
            }
            CosineProfile c;
            if (m.contains("hop_amplitude")) c.hop_amplitude = get_as<double>(m, "hop_amplitude");
            if (m.contains("bath_amplitude")) c.bath_amplitude = get_as<double>(m, "bath_amplitude");
            if (m.contains("frequency")) c.frequency = get_as<double>(m, "frequency");
            p.rate_modulation = make_cosine_modulation(p.gamma0, p.gamma_star, c);
        }
    }
    p.validate();
    return p;
}

json realization_to_json(const DisorderRealization& omega)
{
    json j;
    j["schema"] = kRealizationSchema;
    j["params"] = params_to_json(omega.params());
    if (omega.seed()) {
        j["seed"] = *omega.seed();
    } else {
        j["seed"] = nullptr;
    }
    j["translation"] = omega.translation();
    json imps = json::array();
    for (const Impurity& imp : omega.impurities()) imps.push_back({{"position", imp.position}, {"energy", imp.energy}});
    j["impurities"] = std::move(imps);
    return j;
}

DisorderRealization realization_from_json(const json& j)
{
    if (!j.is_object() || j.value("schema", "") != kRealizationSchema) {
        throw ConfigError(std::string("expected schema ") + kRealizationSchema);
    }
    const ModelParams p = params_from_json(j.at("params"));
    std::vector<Impurity> imps;
    for (const json& e : j.at("impurities")) {
        imps.push_back({get_as<Point>(e, "position"), get_as<double>(e, "energy")});
    }
    std::optional<std::uint64_t> seed;
    if (j.contains("seed") && !j["seed"].is_null()) seed = get_as<std::uint64_t>(j, "seed");
    Point tr;
    if (j.contains("translation")) tr = get_as<Point>(j, "translation");
    return DisorderRealization(p, std::move(imps), seed, tr);
}

json operator_dump(const FockOperator& a)
{
    json j;
    j["schema"] = kOperatorSchema;
    json sites = json::array();
    for (const Point& s : a.space()->sites()) sites.push_back(s);
    j["sites"] = std::move(sites);
    j["dim"] = a.dim();
    j["degree"] = to_string(a.degree());
    json trip = json::array();
    const Eigen::MatrixXcd& m = a.matrix();
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
        for (Eigen::Index r = 0; r < m.rows(); ++r) {
            if (m(r, c) != cplx(0.0, 0.0)) trip.push_back({r, c, m(r, c).real(), m(r, c).imag()});
        }
    }
    j["triplets"] = std::move(trip);
    return j;
}

void write_catalogue_jsonl(std::ostream& os, const JumpCatalogue& cat)
{
    for (const Jump& g : cat.jumps()) {
        json j;
        j["kind"] = to_string(g.kind);
        json sites = json::array();
        for (const Point& p : g.support()) sites.push_back(p);
        j["sites"] = std::move(sites);
        j["rate"] = g.rate;
        j["energy"] = g.energy;
        os << j.dump() << '\n';
    }
}

void write_eigenvalues_csv(std::ostream& os, const Eigen::VectorXd& values, double tol)
{
    os << "index,eigenvalue,kernel,tolerance\n";
    for (Eigen::Index i = 0; i < values.size(); ++i) {
        os << i << ',' << num(values[i]) << ',' << (values[i] <= kKernelThreshold ? 1 : 0) << ',' << num(tol) << '\n';
    }
}

json gap_report_json(const GapReport& g, double tol)
{
    return {{"kernel_dim", g.kernel_dim}, {"gap", g.gap},
            {"bound", g.bound},           {"margin", g.margin},
            {"kernel_overlap", g.kernel_overlap}, {"unique", g.unique},
            {"tolerance", tol}};
}

json gns_basis_json(const GnsBasis& basis)
{
    json j;
    j["schema"] = kGnsSchema;
    json sites = json::array();
    for (const Impurity& imp : basis.omega().impurities()) sites.push_back(imp.position);
    j["sites"] = std::move(sites);
    json el = json::array();
    for (const GnsBasisElement& e : basis.elements()) el.push_back({e.X, e.Y, e.Z});
    j["elements"] = std::move(el);
    return j;
}

json gns_vector_json(const GnsVector& v)
{
    json c = json::array();
    for (Eigen::Index i = 0; i < v.coeffs.size(); ++i) c.push_back({v.coeffs[i].real(), v.coeffs[i].imag()});
    return {{"schema", kGnsSchema}, {"size", v.coeffs.size()}, {"coeffs", std::move(c)}};
}

json kmc_stats_json(const KmcTrajectory& traj, const ClassicalGenerator& gen, std::uint64_t seed)
{
    const HopStatistics h = hop_statistics(traj, gen);
    const KmcStats& st = traj.stats;
    std::vector<double> occupation(gen.size(), 0.0);
    double span = 0.0;
    for (std::size_t b = 0; b < st.batch_length.size(); ++b) {
        span += st.batch_length[b];
        for (std::size_t x = 0; x < gen.size(); ++x) occupation[x] += st.occupied_time[b][x];
    }
    if (span > 0.0) {
        for (double& o : occupation) o /= span;
    }
    json j;
    j["seed"] = seed;
    j["t_end"] = traj.t_end;
    j["stalled"] = traj.stalled;
    j["events"] = st.events();
    j["hops"] = st.hops;
    j["exits"] = st.exits;
    j["entries"] = st.entries;
    j["empty_statistics"] = h.empty;
    j["mean_hop_distance"] = h.mean_hop_distance;
    j["mean_abs_energy_exchange"] = h.mean_abs_energy_exchange;
    j["event_rates"] = {{"hop", h.hop_rate}, {"out", h.exit_rate}, {"in", h.entry_rate}};
    j["hop_histogram"] = st.hop_histogram;
    j["energy_histogram"] = st.energy_histogram;
    j["occupation"] = occupation;
    return j;
}

void write_events_csv(std::ostream& os, const KmcTrajectory& traj, const ClassicalGenerator& gen)
{
    os << "time,kind,x,y\n";
    for (const KmcEvent& e : traj.events) {
        os << num(e.time) << ',' << to_string(e.kind) << ',' << point_string(gen.sites()[e.x]) << ',';
        if (e.kind == JumpKind::hop) os << point_string(gen.sites()[e.y]);
        os << '\n';
    }
}

void write_mott_csv(std::ostream& os, const std::vector<MottRow>& rows, double tol)
{
    os << "T,T0,r_opt_over_xi,eps_opt,neg_log_p,closed_form,rel_deviation,tolerance\n";
    for (const MottRow& r : rows) {
        os << num(r.T) << ',' << num(r.T0) << ',' << num(r.r_over_xi) << ',' << num(r.eps_opt) << ','
           << num(r.neg_log_p) << ',' << num(r.closed_form) << ',' << num(r.rel_deviation) << ',' << num(tol) << '\n';
    }
}

} // namespace hopdyn
