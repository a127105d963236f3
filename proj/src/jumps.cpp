// jumps.cpp: Rates, jump operators, catalogue enumeration and the J1–J5 verifier

#include "hopdyn/jumps.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "hopdyn/errors.hpp"

namespace hopdyn {

namespace {

double positive_part(double v)
{
    return v > 0.0 ? v : 0.0;
}

double site_energy(const DisorderRealization& omega, const Point& x)
{
    const auto e = omega.energy(x);
    if (!e) throw SiteError("site is not occupied in the realization");
    return *e;
}

double hop_rate_with_distance(const DisorderRealization& omega, double ex, double ey, double dist, double z)
{
    const ModelParams& p = omega.params();
    const double log_rate = std::log(p.hop_scale(ex, ey)) - dist / p.r_loc - std::log(z)
                            - p.beta * positive_part(ey - ex);
    return std::exp(log_rate);
}

} // namespace

const char* to_string(JumpKind k)
{
    switch (k) {
    case JumpKind::hop: return "hop";
    case JumpKind::out: return "out";
    default: return "in";
    }
}

std::vector<Point> Jump::support() const
{
    if (kind == JumpKind::hop) {
        std::vector<Point> s{x, y};
        std::sort(s.begin(), s.end());
        return s;
    }
    return {x};
}

double rate_hop(const DisorderRealization& omega, const Point& x, const Point& y, double z)
{
    if (x == y) return 0.0;
    const auto ex = omega.energy(x);
    const auto ey = omega.energy(y);
    if (!ex || !ey) return 0.0;
    return hop_rate_with_distance(omega, *ex, *ey, distance(x, y, omega.params().metric), z);
}

double rate_hop(const DisorderRealization& omega, const Point& x, const Point& y)
{
    if (x == y || !omega.occupied(x) || !omega.occupied(y)) return 0.0;
    return rate_hop(omega, x, y, normalization_z(omega));
}

double rate_out(const DisorderRealization& omega, const Point& x)
{
    const ModelParams& p = omega.params();
    const double e = site_energy(omega, x);
    return std::exp(std::log(p.bath_scale(e)) - p.beta * positive_part(p.mu - e));
}

double rate_in(const DisorderRealization& omega, const Point& x)
{
    const ModelParams& p = omega.params();
    const double e = site_energy(omega, x);
    return std::exp(std::log(p.bath_scale(e)) - p.beta * positive_part(e - p.mu));
}

namespace {

Jump make_hop(const DisorderRealization& omega, const Point& x, const Point& y, double z)
{
    Jump g;
    g.kind = JumpKind::hop;
    g.x = x;
    g.y = y;
    g.rate = rate_hop(omega, x, y, z);
    g.energy = site_energy(omega, y) - site_energy(omega, x);
    return g;
}

Jump make_exchange(const DisorderRealization& omega, JumpKind kind, const Point& x)
{
    Jump g;
    g.kind = kind;
    g.x = x;
    const double e = site_energy(omega, x);
    const double mu = omega.params().mu;
    g.rate = kind == JumpKind::out ? rate_out(omega, x) : rate_in(omega, x);
    g.energy = kind == JumpKind::out ? mu - e : e - mu;
    return g;
}

} // namespace

Jump time_reverse(const Jump& g, const DisorderRealization& omega)
{
    switch (g.kind) {
    case JumpKind::hop: return make_hop(omega, g.y, g.x, normalization_z(omega));
    case JumpKind::out: return make_exchange(omega, JumpKind::in, g.x);
    default: return make_exchange(omega, JumpKind::out, g.x);
    }
}

MonomialMatrix jump_monomial(const FockSpace& space, const Jump& g)
{
    const std::size_t n = space.size();
    const double amp = std::sqrt(g.rate);
    switch (g.kind) {
    case JumpKind::hop:
        return compose(monomial_creator(n, space.rank_of(g.y)), monomial_annihilator(n, space.rank_of(g.x)))
            .scaled(amp);
    case JumpKind::out: return monomial_annihilator(n, space.rank_of(g.x)).scaled(amp);
    default: return monomial_creator(n, space.rank_of(g.x)).scaled(amp);
    }
}

FockOperator build_jump_operator(const DisorderRealization& omega, const FockSpacePtr& space, const Jump& g)
{
    for (const Point& s : g.support()) {
        if (!omega.occupied(s)) throw StructuralError("jump references a site that is not occupied");
        try {
            space->rank_of(s);
        } catch (const SiteError&) {
            throw StructuralError("jump references a site outside the Fock space");
        }
    }
    return from_monomial(space, jump_monomial(*space, g));
}

// ---------------------------------------------------------------------------
// JumpCatalogue

JumpCatalogue::JumpCatalogue(const DisorderRealization& omega, std::vector<Jump> jumps, double hop_cutoff)
    : omega_(omega), jumps_(std::move(jumps)), hop_cutoff_(hop_cutoff)
{
    std::sort(jumps_.begin(), jumps_.end(), [](const Jump& a, const Jump& b) { return a.key() < b.key(); });
    for (std::size_t i = 0; i < jumps_.size(); ++i) {
        if (!index_.emplace(jumps_[i].key(), i).second) {
            throw ConfigError("duplicate jump in catalogue");
        }
    }
    reverse_.resize(jumps_.size());
    for (std::size_t i = 0; i < jumps_.size(); ++i) {
        const Jump& g = jumps_[i];
        std::optional<std::size_t> r;
        switch (g.kind) {
        case JumpKind::hop: r = find(JumpKind::hop, g.y, g.x); break;
        case JumpKind::out: r = find(JumpKind::in, g.x); break;
        case JumpKind::in: r = find(JumpKind::out, g.x); break;
        }
        if (!r) throw ConfigError("jump catalogue is not closed under time reversal");
        reverse_[i] = *r;
    }

    const ModelParams& p = omega_.params();
    double scale = p.gamma0;
    if (p.rate_modulation && p.rate_modulation->hop) {
        for (const Jump& g : jumps_) {
            if (g.kind == JumpKind::hop) {
                scale = std::max(scale, p.hop_scale(*omega_.energy(g.x), *omega_.energy(g.y)));
            }
        }
    }
    if (omega_.occupied_count() >= 2 && hop_cutoff_ > 0.0) {
        dropped_tail_bound_ = scale * std::exp(-hop_cutoff_ / p.r_loc) * static_cast<double>(omega_.box().volume())
                              / normalization_z(omega_);
    }
}

std::optional<std::size_t> JumpCatalogue::find(JumpKind kind, const Point& x, const Point& y) const
{
    auto it = index_.find({kind, x, y});
    if (it == index_.end()) return std::nullopt;
    return it->second;
}

JumpCatalogue JumpCatalogue::hops_only() const
{
    return filtered([](const Jump& g) { return g.kind == JumpKind::hop; });
}

JumpCatalogue JumpCatalogue::cemetery_only() const
{
    return filtered([](const Jump& g) { return g.kind != JumpKind::hop; });
}

double default_hop_cutoff(const ModelParams& p)
{
    return 12.0 * p.r_loc;
}

JumpCatalogue enumerate_jumps(const DisorderRealization& omega, double hop_cutoff)
{
    if (!(hop_cutoff > 0.0)) throw ConfigError("hop cutoff must be positive");
    const auto& imps = omega.impurities();
    const Metric metric = omega.params().metric;
    std::vector<Jump> jumps;
    if (imps.size() >= 2) {
        const double z = normalization_z(omega);
        for (std::size_t i = 0; i < imps.size(); ++i) {
            for (std::size_t j = i + 1; j < imps.size(); ++j) {
                const double d = distance(imps[i].position, imps[j].position, metric);
                if (d > hop_cutoff) continue;
                jumps.push_back(make_hop(omega, imps[i].position, imps[j].position, z));
                jumps.push_back(make_hop(omega, imps[j].position, imps[i].position, z));
            }
        }
    }
    for (const Impurity& imp : imps) {
        jumps.push_back(make_exchange(omega, JumpKind::out, imp.position));
        jumps.push_back(make_exchange(omega, JumpKind::in, imp.position));
    }
    return JumpCatalogue(omega, std::move(jumps), hop_cutoff);
}

JumpCatalogue enumerate_jumps(const DisorderRealization& omega)
{
    return enumerate_jumps(omega, default_hop_cutoff(omega.params()));
}

// ---------------------------------------------------------------------------
// Axioms

double AxiomReport::max_deviation() const
{
    return std::max({j1, j2_support, j2_covariance_checked ? j2_covariance : 0.0, j3, j4, j4_ratio});
}

namespace {

double monomial_distance(const MonomialMatrix& a, const MonomialMatrix& b)
{
    double dev = 0.0;
    for (std::size_t c = 0; c < a.dim(); ++c) {
        const cplx va = a.row[c] >= 0 ? a.val[c] : cplx{};
        const cplx vb = b.row[c] >= 0 ? b.val[c] : cplx{};
        if (a.row[c] == b.row[c]) {
            dev = std::max(dev, std::abs(va - vb));
        } else {
            dev = std::max({dev, std::abs(va), std::abs(vb)});
        }
    }
    return dev;
}

double covariance_deviation(const JumpCatalogue& cat)
{
    const DisorderRealization& omega = cat.omega();
    if (omega.occupied_count() < 2) return 0.0;
    Point a(static_cast<std::size_t>(omega.box().dim()), 0);
    a[0] = 1;
    const DisorderRealization shifted = translate(omega, a);
    const double z0 = normalization_z(omega);
    const double z1 = normalization_z(shifted);
    const Box& box = omega.box();
    const Metric metric = omega.params().metric;
    double dev = 0.0;
    for (const Jump& g : cat.jumps()) {
        if (g.kind != JumpKind::hop) continue;
        Point xs = g.x;
        Point ys = g.y;
        for (std::size_t i = 0; i < a.size(); ++i) {
            xs[i] += a[i];
            ys[i] += a[i];
        }
        xs = box.wrap(xs);
        ys = box.wrap(ys);
        const double r0 = hop_rate_with_distance(omega, *omega.energy(g.x), *omega.energy(g.y),
                                                 periodic_distance(g.x, g.y, box, metric), z0);
        const double r1 = hop_rate_with_distance(shifted, *shifted.energy(xs), *shifted.energy(ys),
                                                 periodic_distance(xs, ys, box, metric), z1);
        dev = std::max(dev, std::abs(r1 - r0) / r0);
    }
    return dev;
}

} // namespace

AxiomReport check_axioms(const JumpCatalogue& cat, const FockSpacePtr& space)
{
    const DisorderRealization& omega = cat.omega();
    const double beta = omega.params().beta;
    AxiomReport rep;

    std::vector<MonomialMatrix> ops;
    ops.reserve(cat.size());
    for (const Jump& g : cat.jumps()) ops.push_back(jump_monomial(*space, g));

    for (std::size_t i = 0; i < cat.size(); ++i) {
        const Jump& g = cat.jumps()[i];
        const std::size_t r = cat.reverse_index(i);
        const Jump& gr = cat.jumps()[r];

        // J1
        const Jump twice = time_reverse(time_reverse(g, omega), omega);
        double d1 = (cat.reverse_index(r) == i && twice.key() == g.key()) ? 0.0 : 1.0;
        d1 = std::max(d1, std::abs(gr.energy + g.energy));
        d1 = std::max(d1, time_reverse(g, omega).key() == gr.key() ? 0.0 : 1.0);
        rep.j1 = std::max(rep.j1, d1);

        // J2 (support and degree)
        bool ok = g.rate > 0.0 && ops[i].degree() == g.degree();
        for (const Point& s : g.support()) ok = ok && omega.occupied(s);
        if (g.kind == JumpKind::hop) ok = ok && g.x != g.y;
        if (!ok) rep.j2_support += 1.0;

        // J4, both as an operator identity and as a rate ratio
        const MonomialMatrix lhs = ops[i].adjoint();
        const MonomialMatrix rhs = ops[r].scaled(std::exp(-0.5 * beta * g.energy));
        rep.j4 = std::max(rep.j4, monomial_distance(lhs, rhs));
        const double ratio = g.rate / gr.rate;
        rep.j4_ratio = std::max(rep.j4_ratio, std::abs(ratio * std::exp(beta * g.energy) - 1.0));
    }

    // J3 on dense matrices at a few sampled times
    if (space->size() <= 6) {
        const double times[] = {0.37, -1.3, 2.9};
        for (std::size_t i = 0; i < cat.size(); ++i) {
            const FockOperator l = from_monomial(space, ops[i]);
            for (double t : times) {
                const FockOperator ev = heisenberg_evolve(omega, l, t);
                const cplx phase = std::exp(cplx{0.0, t * cat.jumps()[i].energy});
                rep.j3 = std::max(rep.j3, (ev.matrix() - phase * l.matrix()).cwiseAbs().maxCoeff());
            }
        }
    }

    // J5: Σ_{γ∋x} L_γ†L_γ is diagonal, so its norm is the largest diagonal entry.
    for (std::size_t k = 0; k < space->size(); ++k) {
        const Point& x = space->sites()[k];
        Eigen::VectorXd acc = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(space->dim()));
        for (std::size_t i = 0; i < cat.size(); ++i) {
            const auto sup = cat.jumps()[i].support();
            if (std::find(sup.begin(), sup.end(), x) == sup.end()) continue;
            for (std::size_t c = 0; c < ops[i].dim(); ++c) {
                if (ops[i].row[c] >= 0) acc[static_cast<Eigen::Index>(c)] += std::norm(ops[i].val[c]);
            }
        }
        rep.j5_norm = std::max(rep.j5_norm, acc.size() ? acc.maxCoeff() : 0.0);
    }
    rep.j5_tail = cat.dropped_tail_bound();

    rep.j2_covariance_checked = omega.params().z_mode == ZMode::full_lattice;
    rep.j2_covariance = covariance_deviation(cat);
    return rep;
}

AxiomReport verify_axioms(const JumpCatalogue& cat, const FockSpacePtr& space, double tol)
{
    const AxiomReport rep = check_axioms(cat, space);
    auto fail = [](const char* axiom, double dev) {
        std::ostringstream os;
        os << "deviation " << dev << " above tolerance";
        throw AxiomFailure(axiom, os.str());
    };
    if (rep.j1 > tol) fail("J1", rep.j1);
    if (rep.j2_support > 0.0) fail("J2", rep.j2_support);
    if (rep.j2_covariance_checked && rep.j2_covariance > tol) fail("J2", rep.j2_covariance);
    if (rep.j3 > tol) fail("J3", rep.j3);
    if (rep.j4 > tol || rep.j4_ratio > tol) fail("J4", std::max(rep.j4, rep.j4_ratio));
    if (!std::isfinite(rep.j5_norm) || !std::isfinite(rep.j5_tail)) fail("J5", rep.j5_norm);
    return rep;
}

} // namespace hopdyn
