// mott.cpp: Mott variable-range hopping analytics

#include "hopdyn/mott.hpp"

#include <cmath>
#include <cstdint>
#include <limits>

#include <boost/math/tools/minima.hpp>

#include "hopdyn/errors.hpp"

namespace hopdyn {

void MottInputs::validate() const
{
    if (!(n_F > 0.0) || !std::isfinite(n_F)) throw ConfigError("n_F must be positive");
    if (!(xi > 0.0) || !std::isfinite(xi)) throw ConfigError("xi must be positive");
    if (d < 1) throw ConfigError("d must be at least 1");
    if (!(T > 0.0) || !std::isfinite(T)) throw ConfigError("T must be positive");
    if (!(kB > 0.0) || !std::isfinite(kB)) throw ConfigError("kB must be positive");
}

MottInputs silicon_preset()
{
    MottInputs m;
    m.xi = 100.0;
    m.n_F = 1e-3 / std::pow(m.xi, 3);
    m.d = 3;
    m.T = 1.0;
    return m;
}

double mott_T0(const MottInputs& inp)
{
    inp.validate();
    const double d = inp.d;
    const double prefactor = std::pow(d + 1.0, d + 1.0) / std::pow(d, d);
    return prefactor / (inp.n_F * std::pow(inp.xi, d)) / inp.kB;
}

double hop_probability(const MottInputs& inp, double epsilon, double r)
{
    inp.validate();
    if (epsilon < 0.0 || r < 0.0) throw DomainError("hop_probability needs epsilon, r >= 0");
    return std::exp(-(epsilon / (inp.kB * inp.T) + r / inp.xi));
}

HopOptimum mott_closed_form(const MottInputs& inp)
{
    inp.validate();
    const double d = inp.d;
    HopOptimum o;
    o.r_opt = std::pow(d * inp.xi / (inp.n_F * inp.kB * inp.T), 1.0 / (d + 1.0));
    o.eps_opt = 1.0 / (inp.n_F * std::pow(o.r_opt, d));
    o.neg_log_p = std::pow(mott_T0(inp) / inp.T, 1.0 / (d + 1.0));
    o.p_opt = std::exp(-o.neg_log_p);
    return o;
}

HopOptimum optimize_hop(const MottInputs& inp)
{
    inp.validate();
    const double d = inp.d;
    const double kt = inp.kB * inp.T;
    // −ln P(u) with r = e^u and ε = 1/(n_F r^d); convex in u.
    auto cost = [&](double u) { return std::exp(-d * u) / (inp.n_F * kt) + std::exp(u) / inp.xi; };
    auto slope = [&](double u) { return -d * std::exp(-d * u) / (inp.n_F * kt) + std::exp(u) / inp.xi; };

    const double u0 = std::log(inp.xi);
    double lo = u0 - 1.0;
    double hi = u0 + 1.0;
    int expansions = 0;
    while (slope(lo) >= 0.0 || slope(hi) <= 0.0) {
        if (++expansions > 200 || !std::isfinite(lo) || !std::isfinite(hi)) {
            throw ConvergenceError("optimize_hop could not bracket the optimum");
        }
        const double w = hi - lo;
        if (slope(lo) >= 0.0) lo -= w;
        if (slope(hi) <= 0.0) hi += w;
    }

    std::uintmax_t iters = 200;
    const auto [u, value] =
        boost::math::tools::brent_find_minima(cost, lo, hi, std::numeric_limits<double>::digits / 2 + 4, iters);
    if (iters >= 200) throw ConvergenceError("optimize_hop did not converge");

    HopOptimum o;
    o.r_opt = std::exp(u);
    o.eps_opt = 1.0 / (inp.n_F * std::pow(o.r_opt, d));
    o.neg_log_p = o.eps_opt / kt + o.r_opt / inp.xi;
    o.p_opt = std::exp(-o.neg_log_p);
    o.iterations = static_cast<int>(iters);
    (void)value;
    return o;
}

MottRow mott_row(const MottInputs& inp)
{
    const HopOptimum num = optimize_hop(inp);
    const HopOptimum cf = mott_closed_form(inp);
    MottRow row;
    row.T = inp.T;
    row.T0 = mott_T0(inp);
    row.r_over_xi = num.r_opt / inp.xi;
    row.eps_opt = num.eps_opt;
    row.neg_log_p = num.neg_log_p;
    row.closed_form = cf.neg_log_p;
    row.rel_deviation = std::abs(num.neg_log_p - cf.neg_log_p) / cf.neg_log_p;
    return row;
}

LinearFit fit_line(const std::vector<double>& x, const std::vector<double>& y)
{
    if (x.size() != y.size() || x.size() < 2) throw DomainError("fit_line needs two or more paired points");
    const double n = static_cast<double>(x.size());
    double mx = 0.0;
    double my = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= n;
    my /= n;
    double sxx = 0.0;
    double sxy = 0.0;
    double syy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
        syy += (y[i] - my) * (y[i] - my);
    }
    if (sxx <= 0.0) throw DomainError("fit_line needs distinct x values");
    LinearFit f;
    f.slope = sxy / sxx;
    f.intercept = my - f.slope * mx;
    f.r2 = syy > 0.0 ? (sxy * sxy) / (sxx * syy) : 1.0;
    return f;
}

HoppingLawFit compare_hopping_laws(const std::vector<double>& T, const std::vector<double>& rate, int d)
{
    if (T.size() != rate.size()) throw DomainError("temperature and rate series differ in length");
    if (d < 1) throw ConfigError("d must be at least 1");
    std::vector<double> xs;
    std::vector<double> xa;
    std::vector<double> y;
    for (std::size_t i = 0; i < T.size(); ++i) {
        if (!(T[i] > 0.0) || !(rate[i] > 0.0)) throw DomainError("hopping-law fit needs positive T and rate");
        xs.push_back(std::pow(T[i], -1.0 / (d + 1.0)));
        xa.push_back(1.0 / T[i]);
        y.push_back(std::log(rate[i]));
    }
    HoppingLawFit h;
    h.stretched = fit_line(xs, y);
    h.arrhenius = fit_line(xa, y);
    h.T0 = h.stretched.slope < 0.0 ? std::pow(-h.stretched.slope, d + 1.0) : 0.0;
    h.stretched_better = h.stretched.r2 > h.arrhenius.r2;
    return h;
}

} // namespace hopdyn
