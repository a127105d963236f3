// kmc.cpp: Gillespie simulation of the occupation chain

#include "hopdyn/kmc.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include <Eigen/LU>

#include "hopdyn/errors.hpp"
#include "hopdyn/fock.hpp"

namespace hopdyn {

std::size_t Configuration::particles() const
{
    return static_cast<std::size_t>(std::count(eta.begin(), eta.end(), std::uint8_t{1}));
}

std::uint64_t Configuration::mask() const
{
    if (eta.size() > 63) throw SizeError("configuration too large for a bitmask");
    std::uint64_t m = 0;
    for (std::size_t k = 0; k < eta.size(); ++k) {
        if (eta[k]) m |= std::uint64_t{1} << k;
    }
    return m;
}

ClassicalGenerator::ClassicalGenerator(const JumpCatalogue& catalogue) : omega_(catalogue.omega())
{
    const auto& imps = omega_.impurities();
    const std::size_t n = imps.size();
    sites_.reserve(n);
    for (const Impurity& imp : imps) {
        sites_.push_back(imp.position);
        energies_.push_back(imp.energy);
    }
    neighbors_.resize(n);
    out_.assign(n, 0.0);
    in_.assign(n, 0.0);
    for (const Jump& g : catalogue.jumps()) {
        const auto x = static_cast<std::uint32_t>(*omega_.rank(g.x));
        switch (g.kind) {
        case JumpKind::out: out_[x] = g.rate; break;
        case JumpKind::in: in_[x] = g.rate; break;
        case JumpKind::hop:
            neighbors_[x].push_back({static_cast<std::uint32_t>(*omega_.rank(g.y)), 0, g.rate});
            break;
        }
    }
    for (std::size_t x = 0; x < n; ++x) {
        std::sort(neighbors_[x].begin(), neighbors_[x].end(),
                  [](const Neighbor& a, const Neighbor& b) { return a.site < b.site; });
    }
    // Hops come in reversed pairs, so x appears in the list of each of its targets.
    for (std::size_t x = 0; x < n; ++x) {
        for (Neighbor& nb : neighbors_[x]) {
            const auto& back = neighbors_[nb.site];
            auto it = std::lower_bound(back.begin(), back.end(), static_cast<std::uint32_t>(x),
                                       [](const Neighbor& a, std::uint32_t s) { return a.site < s; });
            nb.reverse = static_cast<std::uint32_t>(it - back.begin());
        }
    }
}

double ClassicalGenerator::fermi_dirac(std::size_t x) const
{
    return hopdyn::fermi_dirac(omega_.params().beta, energies_[x] - omega_.params().mu);
}

Eigen::VectorXd ClassicalGenerator::apply(const Eigen::VectorXd& f) const
{
    const std::size_t n = size();
    const auto dim = static_cast<Eigen::Index>(std::size_t{1} << n);
    if (f.size() != dim) throw StructuralError("function size does not match the configuration space");
    Eigen::VectorXd out = Eigen::VectorXd::Zero(dim);
    for (Eigen::Index s = 0; s < dim; ++s) {
        const auto m = static_cast<std::uint64_t>(s);
        double acc = 0.0;
        for (std::size_t x = 0; x < n; ++x) {
            const std::uint64_t bx = std::uint64_t{1} << x;
            if (m & bx) {
                acc += out_[x] * (f[static_cast<Eigen::Index>(m ^ bx)] - f[s]);
                for (const Neighbor& nb : neighbors_[x]) {
                    const std::uint64_t by = std::uint64_t{1} << nb.site;
                    if (m & by) continue;
                    acc += nb.rate * (f[static_cast<Eigen::Index>(m ^ bx ^ by)] - f[s]);
                }
            } else {
                acc += in_[x] * (f[static_cast<Eigen::Index>(m ^ bx)] - f[s]);
            }
        }
        out[s] = acc;
    }
    return out;
}

Eigen::MatrixXd ClassicalGenerator::rate_matrix() const
{
    const std::size_t n = size();
    if (n > 12) throw SizeError("rate matrix is limited to 12 sites");
    const auto dim = static_cast<Eigen::Index>(std::size_t{1} << n);
    Eigen::MatrixXd q = Eigen::MatrixXd::Zero(dim, dim);
    for (Eigen::Index s = 0; s < dim; ++s) {
        const auto m = static_cast<std::uint64_t>(s);
        for (std::size_t x = 0; x < n; ++x) {
            const std::uint64_t bx = std::uint64_t{1} << x;
            if (m & bx) {
                q(s, static_cast<Eigen::Index>(m ^ bx)) += out_[x];
                for (const Neighbor& nb : neighbors_[x]) {
                    const std::uint64_t by = std::uint64_t{1} << nb.site;
                    if (!(m & by)) q(s, static_cast<Eigen::Index>(m ^ bx ^ by)) += nb.rate;
                }
            } else {
                q(s, static_cast<Eigen::Index>(m ^ bx)) += in_[x];
            }
        }
        q(s, s) = -q.row(s).sum();
    }
    return q;
}

namespace {

// |(a + log u) − (b + log v)|, with two vanishing rates balancing trivially.
double log_balance(double a, double u, double b, double v)
{
    if (u == 0.0 && v == 0.0) return 0.0;
    if (u == 0.0 || v == 0.0) return std::numeric_limits<double>::infinity();
    return std::abs((a + std::log(u)) - (b + std::log(v)));
}

} // namespace

double ClassicalGenerator::detailed_balance_deviation() const
{
    double dev = 0.0;
    std::vector<double> lp(size());
    std::vector<double> lq(size());
    const double beta = omega_.params().beta;
    const double mu = omega_.params().mu;
    for (std::size_t x = 0; x < size(); ++x) {
        lp[x] = std::log(fermi_dirac(x));
        lq[x] = std::log(hopdyn::fermi_dirac(beta, mu - energies_[x]));
        dev = std::max(dev, log_balance(lp[x], out_[x], lq[x], in_[x]));
    }
    for (std::size_t x = 0; x < size(); ++x) {
        for (const Neighbor& nb : neighbors_[x]) {
            const std::size_t y = nb.site;
            const double back = neighbors_[y][nb.reverse].rate;
            dev = std::max(dev, log_balance(lp[x] + lq[y], nb.rate, lp[y] + lq[x], back));
        }
    }
    return dev;
}

ClassicalGenerator classical_generator(const DisorderRealization& omega, const JumpCatalogue& catalogue)
{
    if (omega.impurities().size() != catalogue.omega().impurities().size()) {
        throw StructuralError("catalogue was built on a different realization");
    }
    return ClassicalGenerator(catalogue);
}

namespace {

double unit_uniform(std::mt19937_64& rng)
{
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

// Partial sums over nonnegative weights with prefix search.
class FenwickTree {
public:
    void assign(const std::vector<double>& w)
    {
        weight_ = w;
        tree_.assign(w.size() + 1, 0.0);
        for (std::size_t i = 0; i < w.size(); ++i) {
            tree_[i + 1] += w[i];
            const std::size_t parent = (i + 1) + ((i + 1) & (~(i + 1) + 1));
            if (parent <= w.size()) tree_[parent] += tree_[i + 1];
        }
        total_ = 0.0;
        for (double v : w) total_ += v;
        top_ = 1;
        while (top_ * 2 <= w.size()) top_ *= 2;
    }
    void set(std::size_t i, double w)
    {
        const double d = w - weight_[i];
        if (d == 0.0) return;
        weight_[i] = w;
        total_ += d;
        for (std::size_t k = i + 1; k < tree_.size(); k += k & (~k + 1)) tree_[k] += d;
    }
    double weight(std::size_t i) const { return weight_[i]; }
    double total() const { return total_; }
    std::size_t size() const { return weight_.size(); }
    /// Index whose cumulative range contains u ∈ [0, total); lands on a positive weight.
    std::size_t find(double u) const
    {
        std::size_t pos = 0;
        for (std::size_t step = top_; step > 0; step >>= 1) {
            const std::size_t next = pos + step;
            if (next < tree_.size() && tree_[next] <= u) {
                pos = next;
                u -= tree_[next];
            }
        }
        std::size_t i = std::min(pos, weight_.size() - 1);
        if (weight_[i] > 0.0) return i;
        // Round-off put u past the last positive weight.
        for (std::size_t k = weight_.size(); k-- > 0;) {
            if (weight_[k] > 0.0) return k;
        }
        return i;
    }

private:
    std::vector<double> weight_;
    std::vector<double> tree_;
    double total_{0.0};
    std::size_t top_{1};
};

class Engine {
public:
    Engine(const ClassicalGenerator& gen, const Configuration& eta0) : gen_(gen), eta_(eta0.eta)
    {
        if (eta_.size() != gen.size()) throw StructuralError("configuration size does not match the generator");
        nb_.resize(gen.size());
        hop_total_.assign(gen.size(), 0.0);
        rebuild();
    }

    void rebuild()
    {
        const std::size_t n = gen_.size();
        std::vector<double> site_w(n);
        for (std::size_t x = 0; x < n; ++x) {
            const auto& nbs = gen_.neighbors(x);
            std::vector<double> w(nbs.size());
            double h = 0.0;
            for (std::size_t k = 0; k < nbs.size(); ++k) {
                w[k] = eta_[nbs[k].site] ? 0.0 : nbs[k].rate;
                h += w[k];
            }
            nb_[x].assign(w);
            hop_total_[x] = h;
            site_w[x] = site_weight(x);
        }
        sites_.assign(site_w);
    }

    double total() const { return sites_.total(); }

    /// Draws and applies one event; returns it.
    KmcEvent step(std::mt19937_64& rng)
    {
        const double u = unit_uniform(rng) * sites_.total();
        const std::size_t x = sites_.find(u);
        KmcEvent ev;
        ev.x = static_cast<std::uint32_t>(x);
        if (!eta_[x]) {
            ev.kind = JumpKind::in;
            ev.y = ev.x;
            set_occupation(x, 1);
            return ev;
        }
        const double local = unit_uniform(rng) * (hop_total_[x] + gen_.rate_out(x));
        if (local < gen_.rate_out(x) || nb_[x].size() == 0 || hop_total_[x] <= 0.0) {
            ev.kind = JumpKind::out;
            ev.y = ev.x;
            set_occupation(x, 0);
            return ev;
        }
        const std::size_t k = nb_[x].find(std::min(local - gen_.rate_out(x), nb_[x].total()));
        if (!(nb_[x].weight(k) > 0.0)) {
            // Accumulated round-off left a positive total over vanished weights.
            rebuild();
            return step(rng);
        }
        const std::size_t y = gen_.neighbors(x)[k].site;
        ev.kind = JumpKind::hop;
        ev.y = static_cast<std::uint32_t>(y);
        set_occupation(x, 0);
        set_occupation(y, 1);
        return ev;
    }

    const std::vector<std::uint8_t>& eta() const { return eta_; }

private:
    double site_weight(std::size_t x) const
    {
        return eta_[x] ? hop_total_[x] + gen_.rate_out(x) : gen_.rate_in(x);
    }

    void set_occupation(std::size_t x, std::uint8_t v)
    {
        eta_[x] = v;
        // x as a hop target of each of its neighbors z.
        for (const auto& nb : gen_.neighbors(x)) {
            const std::size_t z = nb.site;
            const double rate = gen_.neighbors(z)[nb.reverse].rate;
            const double w = v ? 0.0 : rate;
            const double old = nb_[z].weight(nb.reverse);
            nb_[z].set(nb.reverse, w);
            hop_total_[z] += w - old;
            if (hop_total_[z] < 0.0) hop_total_[z] = 0.0;
            if (eta_[z]) sites_.set(z, site_weight(z));
        }
        sites_.set(x, site_weight(x));
    }

    const ClassicalGenerator& gen_;
    std::vector<std::uint8_t> eta_;
    std::vector<FenwickTree> nb_;
    std::vector<double> hop_total_;
    FenwickTree sites_;
};

void tally(std::vector<std::size_t>& hist, double scaled)
{
    const auto bin = static_cast<std::size_t>(scaled);
    if (hist.size() <= bin) hist.resize(bin + 1, 0);
    ++hist[bin];
}

} // namespace

Configuration initial_configuration(const ClassicalGenerator& gen, InitialState mode, std::uint64_t seed)
{
    Configuration c;
    c.eta.assign(gen.size(), mode == InitialState::full ? 1 : 0);
    if (mode == InitialState::equilibrium) {
        std::mt19937_64 rng(seed);
        for (std::size_t x = 0; x < gen.size(); ++x) c.eta[x] = unit_uniform(rng) < gen.fermi_dirac(x) ? 1 : 0;
    }
    return c;
}

double total_rate(const ClassicalGenerator& gen, const Configuration& eta)
{
    if (eta.size() != gen.size()) throw StructuralError("configuration size does not match the generator");
    double r = 0.0;
    for (std::size_t x = 0; x < gen.size(); ++x) {
        if (!eta.eta[x]) {
            r += gen.rate_in(x);
            continue;
        }
        r += gen.rate_out(x);
        for (const auto& nb : gen.neighbors(x)) {
            if (!eta.eta[nb.site]) r += nb.rate;
        }
    }
    return r;
}

KmcTrajectory gillespie_run(const ClassicalGenerator& gen, const Configuration& eta0, const KmcOptions& opts)
{
    if (!(opts.t_max > 0.0)) throw ConfigError("t_max must be positive");
    if (opts.time_batches < 1) throw ConfigError("time_batches must be positive");
    if (!(opts.histogram_bin > 0.0) || !(opts.energy_bin > 0.0)) throw ConfigError("histogram bins must be positive");
    const std::size_t n = gen.size();
    Engine engine(gen, eta0);
    std::mt19937_64 rng(opts.seed);

    KmcTrajectory traj;
    KmcStats& st = traj.stats;
    const auto nb = static_cast<std::size_t>(opts.time_batches);
    st.occupied_time.assign(nb, std::vector<double>(n, 0.0));
    st.batch_length.assign(nb, opts.t_max / static_cast<double>(nb));
    std::vector<double> since(n, 0.0);
    std::size_t batch = 0;
    double batch_end = st.batch_length[0];

    auto flush_to = [&](double t) {
        for (std::size_t x = 0; x < n; ++x) {
            if (engine.eta()[x]) st.occupied_time[batch][x] += t - since[x];
            since[x] = t;
        }
    };

    double t = 0.0;
    std::size_t since_rebuild = 0;
    while (true) {
        const double rate = engine.total();
        double t_next = opts.t_max;
        bool fire = false;
        if (rate > 0.0) {
            const double u = unit_uniform(rng);
            t_next = t - std::log1p(-u) / rate;
            fire = t_next < opts.t_max;
        } else {
            traj.stalled = true;
        }
        if (!fire) t_next = opts.t_max;
        while (batch + 1 < nb && batch_end <= t_next) {
            flush_to(batch_end);
            ++batch;
            batch_end = opts.t_max * static_cast<double>(batch + 1) / static_cast<double>(nb);
        }
        if (!fire) {
            flush_to(opts.t_max);
            t = opts.t_max;
            break;
        }
        t = t_next;
        KmcEvent ev = engine.step(rng);
        ev.time = t;
        // Sites emptied by the event were occupied until now.
        if (ev.kind != JumpKind::in) st.occupied_time[batch][ev.x] += t - since[ev.x];
        since[ev.x] = t;
        since[ev.y] = t;
        switch (ev.kind) {
        case JumpKind::hop: {
            ++st.hops;
            const double d = distance(gen.sites()[ev.x], gen.sites()[ev.y], gen.omega().params().metric);
            st.hop_distance_sum += d;
            const double de = std::abs(gen.energies()[ev.y] - gen.energies()[ev.x]);
            st.energy_exchange_sum += de;
            tally(st.hop_histogram, d / opts.histogram_bin);
            tally(st.energy_histogram, de / opts.energy_bin);
            break;
        }
        case JumpKind::out: ++st.exits; break;
        case JumpKind::in: ++st.entries; break;
        }
        if (opts.record_events) traj.events.push_back(ev);
        if (++since_rebuild >= opts.rebuild_interval) {
            engine.rebuild();
            since_rebuild = 0;
        }
        if (opts.max_events && st.events() >= opts.max_events) {
            flush_to(t);
            // Batches after the early stop carry no time.
            for (std::size_t b = 0; b < nb; ++b) {
                const double lo = opts.t_max * static_cast<double>(b) / static_cast<double>(nb);
                const double hi = opts.t_max * static_cast<double>(b + 1) / static_cast<double>(nb);
                st.batch_length[b] = std::clamp(t, lo, hi) - lo;
            }
            break;
        }
    }
    traj.t_end = t;
    traj.final.eta = engine.eta();
    return traj;
}

Eigen::VectorXd product_fermi_dirac(const ClassicalGenerator& gen)
{
    const std::size_t n = gen.size();
    const auto dim = static_cast<Eigen::Index>(std::size_t{1} << n);
    Eigen::VectorXd pi = Eigen::VectorXd::Ones(dim);
    for (std::size_t x = 0; x < n; ++x) {
        const double p = gen.fermi_dirac(x);
        for (Eigen::Index s = 0; s < dim; ++s) pi[s] *= (static_cast<std::uint64_t>(s) >> x & 1) ? p : 1.0 - p;
    }
    return pi;
}

StationaryResult brute_force_stationary(const ClassicalGenerator& gen)
{
    const Eigen::MatrixXd q = gen.rate_matrix();
    Eigen::FullPivLU<Eigen::MatrixXd> lu(q.transpose());
    lu.setThreshold(1e-10);
    StationaryResult r;
    const Eigen::MatrixXd ker = lu.kernel();
    r.null_dimension = lu.dimensionOfKernel();
    if (r.null_dimension != 1) return r;
    r.distribution = ker.col(0) / ker.col(0).sum();
    r.max_deviation = (r.distribution - product_fermi_dirac(gen)).cwiseAbs().maxCoeff();
    return r;
}

HopStatistics hop_statistics(const KmcTrajectory& traj, const ClassicalGenerator& gen)
{
    HopStatistics h;
    const KmcStats& st = traj.stats;
    double span = 0.0;
    for (double b : st.batch_length) span += b;
    if (span <= 0.0) span = traj.t_end;
    if (span > 0.0) {
        h.exit_rate = static_cast<double>(st.exits) / span;
        h.entry_rate = static_cast<double>(st.entries) / span;
        h.hop_rate = static_cast<double>(st.hops) / span;
        h.hop_rate_per_site = gen.size() ? h.hop_rate / static_cast<double>(gen.size()) : 0.0;
    }
    if (st.hops == 0) return h;
    h.empty = false;
    h.mean_hop_distance = st.hop_distance_sum / static_cast<double>(st.hops);
    h.mean_abs_energy_exchange = st.energy_exchange_sum / static_cast<double>(st.hops);
    return h;
}

OccupationCheck occupation_check(const std::vector<KmcTrajectory>& replicas, const ClassicalGenerator& gen,
                                 double sigmas)
{
    OccupationCheck c;
    const std::size_t n = gen.size();
    c.sites = n;
    c.mean.assign(n, 0.0);
    c.stderr_.assign(n, 0.0);
    c.target.resize(n);
    for (std::size_t x = 0; x < n; ++x) c.target[x] = gen.fermi_dirac(x);

    std::vector<std::vector<double>> means(n);
    for (const KmcTrajectory& tr : replicas) {
        for (std::size_t b = 0; b < tr.stats.batch_length.size(); ++b) {
            const double len = tr.stats.batch_length[b];
            if (len <= 0.0) continue;
            for (std::size_t x = 0; x < n; ++x) means[x].push_back(tr.stats.occupied_time[b][x] / len);
        }
    }
    c.batches = n ? means[0].size() : 0;
    if (c.batches < 2) throw DomainError("occupation check needs at least two batches");
    const double k = static_cast<double>(c.batches);
    for (std::size_t x = 0; x < n; ++x) {
        double s = 0.0;
        for (double v : means[x]) s += v;
        const double m = s / k;
        double ss = 0.0;
        for (double v : means[x]) ss += (v - m) * (v - m);
        c.mean[x] = m;
        c.stderr_[x] = std::sqrt(ss / (k - 1.0) / k);
        const double dev = std::abs(m - c.target[x]);
        if (dev <= sigmas * c.stderr_[x] || dev == 0.0) ++c.within;
    }
    c.fraction = n ? static_cast<double>(c.within) / static_cast<double>(n) : 1.0;
    return c;
}

} // namespace hopdyn
