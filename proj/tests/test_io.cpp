#include <doctest.h>

#include <sstream>

#include "hopdyn/errors.hpp"
#include "hopdyn/io.hpp"

using namespace hopdyn;

namespace {

std::vector<std::string> lines(const std::string& s)
{
    std::vector<std::string> out;
    std::istringstream is(s);
    for (std::string l; std::getline(is, l);) out.push_back(l);
    return out;
}

} // namespace

TEST_CASE("params round trip")
{
    ModelParams p;
    p.beta = 2.5;
    p.mu = -0.125;
    p.box = {3, 4, 5};
    p.dim = 3;
    p.impurity_density = 0.3;
    p.metric = Metric::sup;
    p.z_mode = ZMode::realized_origin;
    p.rate_modulation = make_cosine_modulation(p.gamma0, p.gamma_star, {0.2, -0.3, 1.5});
    const json j = params_to_json(p);
    CHECK(j["schema"] == kParamsSchema);
    const ModelParams q = params_from_json(j);
    CHECK(params_to_json(q).dump() == j.dump());
    CHECK(q.hop_scale(0.1, 0.2) == doctest::Approx(p.hop_scale(0.1, 0.2)));
    CHECK(q.bath_scale(0.4) == doctest::Approx(p.bath_scale(0.4)));
}

TEST_CASE("params overlay and validation")
{
    ModelParams base;
    base.beta = 3.0;
    const ModelParams q = params_from_json(json{{"mu", 0.25}, {"box", {5, 5, 5}}}, base);
    CHECK(q.beta == 3.0);
    CHECK(q.mu == 0.25);
    CHECK(q.dim == 3);
    CHECK_THROWS_AS(params_from_json(json{{"bogus", 1}}), ConfigError);
    CHECK_THROWS_AS(params_from_json(json{{"beta", "hot"}}), ConfigError);
    CHECK_THROWS_AS(params_from_json(json{{"beta", -1.0}}), ConfigError);
    CHECK_THROWS_AS(params_from_json(json{{"schema", "hopdyn.params/9"}}), ConfigError);
    CHECK_THROWS_AS(params_from_json(json::array()), ConfigError);
    CHECK_THROWS_AS(params_from_json(json{{"rate_modulation", {{"kind", "table"}}}}), ConfigError);

    ModelParams custom;
    RateModulation m;
    m.hop = [](double, double, double) { return 1.0; };
    m.bath = [](double, double) { return 1.0; };
    m.hop_floor = m.bath_floor = 1.0;
    custom.rate_modulation = m;
    CHECK_THROWS_AS(params_to_json(custom), ConfigError);
}

TEST_CASE("realization round trip")
{
    ModelParams p;
    p.box = {4, 4};
    p.impurity_density = 0.5;
    const auto w = translate(sample_disorder(p, 99), {1, 2});
    const json j = realization_to_json(w);
    const auto v = realization_from_json(j);
    REQUIRE(v.occupied_count() == w.occupied_count());
    for (std::size_t i = 0; i < w.occupied_count(); ++i) {
        CHECK(v.impurities()[i].position == w.impurities()[i].position);
        CHECK(v.impurities()[i].energy == w.impurities()[i].energy);
    }
    CHECK(v.seed() == w.seed());
    CHECK(v.translation() == w.translation());
    CHECK(realization_to_json(v).dump() == j.dump());
    CHECK_THROWS_AS(realization_from_json(json{{"schema", "other"}}), ConfigError);
}

TEST_CASE("operator dump lists nonzero entries")
{
    const auto s = std::make_shared<const FockSpace>(std::vector<Point>{{0}, {1}});
    const FockOperator a = annihilator(s, {1});
    const json j = operator_dump(a);
    CHECK(j["dim"] == 4);
    CHECK(j["degree"] == "odd");
    REQUIRE(j["triplets"].size() == 2);
    Eigen::MatrixXcd back = Eigen::MatrixXcd::Zero(4, 4);
    for (const auto& t : j["triplets"]) {
        back(t[0].get<int>(), t[1].get<int>()) = cplx(t[2].get<double>(), t[3].get<double>());
    }
    CHECK((back - a.matrix()).norm() == 0.0);
}

TEST_CASE("catalogue and spectra exports")
{
    ModelParams p;
    p.box = {2, 2};
    const auto w = sample_disorder(p, 1);
    const auto cat = enumerate_jumps(w);
    std::ostringstream os;
    write_catalogue_jsonl(os, cat);
    const auto ls = lines(os.str());
    REQUIRE(ls.size() == cat.size());
    for (std::size_t i = 0; i < ls.size(); ++i) {
        const json j = json::parse(ls[i]);
        CHECK(j["kind"] == to_string(cat.jumps()[i].kind));
        CHECK(j["rate"].get<double>() == cat.jumps()[i].rate);
    }

    std::ostringstream csv;
    Eigen::VectorXd ev(3);
    ev << 0.0, 0.5, 1.25;
    write_eigenvalues_csv(csv, ev, 1e-10);
    const auto rows = lines(csv.str());
    REQUIRE(rows.size() == 4);
    CHECK(rows[0] == "index,eigenvalue,kernel,tolerance");
    CHECK(rows[1] == "0,0,1,1e-10");
    CHECK(rows[3] == "2,1.25,0,1e-10");

    GapReport g;
    g.kernel_dim = 1;
    g.gap = 0.6;
    g.bound = 0.5;
    const json gj = gap_report_json(g, 1e-10);
    CHECK(gj["kernel_dim"] == 1);
    CHECK(gj["tolerance"].get<double>() == 1e-10);
}

TEST_CASE("GNS exports")
{
    ModelParams p;
    p.box = {2, 1};
    p.dim = 2;
    const auto w = sample_disorder(p, 2);
    const auto b = enumerate_basis(w);
    const json bj = gns_basis_json(*b);
    CHECK(bj["elements"].size() == b->size());
    CHECK(bj["elements"][0] == json::array({0, 0, 0}));
    const GnsVector v = to_gns_coords(b, identity(b->space()));
    const json vj = gns_vector_json(v);
    CHECK(vj["coeffs"][0][0].get<double>() == doctest::Approx(1.0));
}

TEST_CASE("KMC and Mott exports")
{
    ModelParams p;
    p.box = {3, 3};
    const auto w = sample_disorder(p, 3);
    const ClassicalGenerator q(enumerate_jumps(w));
    KmcOptions o;
    o.t_max = 5.0;
    o.record_events = true;
    o.seed = 4;
    const auto t = gillespie_run(q, initial_configuration(q, InitialState::equilibrium, 1), o);
    const json s = kmc_stats_json(t, q, 4);
    CHECK(s["events"] == t.stats.events());
    CHECK(s["occupation"].size() == q.size());
    std::ostringstream ev;
    write_events_csv(ev, t, q);
    const auto rows = lines(ev.str());
    CHECK(rows.size() == t.events.size() + 1);
    CHECK(rows[0] == "time,kind,x,y");

    std::ostringstream mc;
    write_mott_csv(mc, {mott_row(silicon_preset())}, 0.01);
    const auto mrows = lines(mc.str());
    REQUIRE(mrows.size() == 2);
    CHECK(mrows[1].rfind("1,", 0) == 0);

    CHECK(point_string({-1, 0, 2}) == "-1:0:2");
    CHECK(point_json({3, 4}) == json::array({3, 4}));
}
