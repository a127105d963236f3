// lindblad.cpp: Graded Lindblad generator, semigroup and convergence constants

#include "hopdyn/lindblad.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <sstream>

#include <Eigen/Eigenvalues>
#include <unsupported/Eigen/MatrixFunctions>

#include "hopdyn/errors.hpp"

namespace hopdyn {

Parts parse_parts(const std::string& s)
{
    Parts p{false, false};
    std::stringstream ss(s);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        if (tok == "kin") {
            p.kin = true;
        } else if (tok == "star") {
            p.star = true;
        } else if (!tok.empty()) {
            throw ConfigError("unknown generator part '" + tok + "'");
        }
    }
    if (!p.kin && !p.star) throw ConfigError("generator parts must be nonempty");
    return p;
}

std::string to_string(const Parts& p)
{
    if (p.kin && p.star) return "kin,star";
    return p.kin ? "kin" : "star";
}

FockOperator dissipator_term(const FockOperator& l, const FockOperator& a)
{
    require_same_space(l, a);
    if (l.degree() == Degree::mixed) throw StructuralError("jump operator must have a definite degree");
    const Eigen::MatrixXcd& L = l.matrix();
    const Eigen::MatrixXcd ltl = L.adjoint() * L;
    auto term = [&](const Eigen::MatrixXcd& A, double sign) -> Eigen::MatrixXcd {
        return 0.5 * (ltl * A + A * ltl) - sign * (L.adjoint() * A * L);
    };
    if (l.degree() == Degree::even || a.degree() == Degree::even) {
        return FockOperator(l.space(), term(a.matrix(), 1.0));
    }
    if (a.degree() == Degree::odd) return FockOperator(l.space(), term(a.matrix(), -1.0));
    return FockOperator(l.space(), term(a.even_part().matrix(), 1.0) + term(a.odd_part().matrix(), -1.0));
}

// ---------------------------------------------------------------------------
// Generator

Generator::Generator(GeneratorSpec spec, FockSpacePtr space) : spec_(std::move(spec)), space_(std::move(space))
{
    if (!spec_.parts.kin && !spec_.parts.star) throw ConfigError("generator parts must be nonempty");
    if (!space_) space_ = FockSpace::from_realization(omega());
    for (const Jump& g : spec_.catalogue.jumps()) {
        if (!spec_.parts.includes(g.kind)) continue;
        jumps_.push_back(g);
        ops_.push_back(jump_monomial(*space_, g));
        Eigen::VectorXd d = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(space_->dim()));
        const MonomialMatrix& m = ops_.back();
        for (std::size_t c = 0; c < m.dim(); ++c) {
            if (m.row[c] >= 0) d[static_cast<Eigen::Index>(c)] = std::norm(m.val[c]);
        }
        ltl_.push_back(std::move(d));
    }
    f_ = free_energy_diagonal(omega(), *space_);
}

Eigen::MatrixXcd Generator::dissipate(const Eigen::MatrixXcd& a) const
{
    const Eigen::Index n = static_cast<Eigen::Index>(space_->dim());
    if (a.rows() != n || a.cols() != n) throw StructuralError("operator dimension mismatch");
    Eigen::VectorXd diag = Eigen::VectorXd::Zero(n);
    for (const auto& d : ltl_) diag += d;

    Eigen::MatrixXcd out(n, n);
    for (Eigen::Index k = 0; k < n; ++k) {
        for (Eigen::Index m = 0; m < n; ++m) out(m, k) = 0.5 * (diag[m] + diag[k]) * a(m, k);
    }
    // (L†AL)(i, j) = conj(v_i) A(r_i, r_j) v_j
    for (std::size_t g = 0; g < ops_.size(); ++g) {
        const MonomialMatrix& l = ops_[g];
        const bool odd = jumps_[g].degree() == Degree::odd;
        for (Eigen::Index j = 0; j < n; ++j) {
            const std::int32_t rj = l.row[j];
            if (rj < 0) continue;
            for (Eigen::Index i = 0; i < n; ++i) {
                const std::int32_t ri = l.row[i];
                if (ri < 0) continue;
                double sign = 1.0;
                if (odd) {
                    const bool odd_entry = bit_parity(static_cast<std::uint64_t>(ri ^ rj));
                    sign = (odd_entry && spec_.graded_signs) ? -1.0 : 1.0;
                }
                out(i, j) -= sign * std::conj(l.val[i]) * a(ri, rj) * l.val[j];
            }
        }
    }
    return out;
}

Eigen::MatrixXcd Generator::apply(const Eigen::MatrixXcd& a) const
{
    Eigen::MatrixXcd out = dissipate(a);
    if (spec_.include_hamiltonian) {
        const cplx i{0.0, 1.0};
        for (Eigen::Index k = 0; k < a.cols(); ++k) {
            for (Eigen::Index m = 0; m < a.rows(); ++m) out(m, k) += i * (f_[m] - f_[k]) * a(m, k);
        }
    }
    return out;
}

FockOperator Generator::apply(const FockOperator& a) const
{
    if (!(*a.space() == *space_)) throw StructuralError("operator lives on a different Fock space");
    return FockOperator(a.space(), apply(a.matrix()));
}

Eigen::SparseMatrix<cplx> Generator::superoperator() const
{
    const Eigen::Index n = static_cast<Eigen::Index>(space_->dim());
    const Eigen::Index nn = n * n;
    Eigen::VectorXd diag = Eigen::VectorXd::Zero(n);
    for (const auto& d : ltl_) diag += d;

    // Preimage of each row under every jump operator.
    std::vector<std::vector<std::int32_t>> pre(ops_.size(), std::vector<std::int32_t>(static_cast<std::size_t>(n), -1));
    for (std::size_t g = 0; g < ops_.size(); ++g) {
        for (Eigen::Index c = 0; c < n; ++c) {
            if (ops_[g].row[c] >= 0) pre[g][ops_[g].row[c]] = static_cast<std::int32_t>(c);
        }
    }

    std::vector<Eigen::Triplet<cplx>> trip;
    trip.reserve(static_cast<std::size_t>(nn) * (1 + ops_.size() / 2));
    const cplx i{0.0, 1.0};
    for (Eigen::Index k = 0; k < n; ++k) {
        for (Eigen::Index m = 0; m < n; ++m) {
            const Eigen::Index col = m + k * n;
            cplx d = 0.5 * (diag[m] + diag[k]);
            if (spec_.include_hamiltonian) d += i * (f_[m] - f_[k]);
            trip.emplace_back(col, col, d);
            const bool odd_entry = bit_parity(static_cast<std::uint64_t>(m ^ k));
            for (std::size_t g = 0; g < ops_.size(); ++g) {
                const std::int32_t pi = pre[g][m];
                const std::int32_t pj = pre[g][k];
                if (pi < 0 || pj < 0) continue;
                double sign = 1.0;
                if (jumps_[g].degree() == Degree::odd && odd_entry && spec_.graded_signs) sign = -1.0;
                const cplx v = -sign * std::conj(ops_[g].val[pi]) * ops_[g].val[pj];
                trip.emplace_back(pi + static_cast<Eigen::Index>(pj) * n, col, v);
            }
        }
    }
    Eigen::SparseMatrix<cplx> s(nn, nn);
    s.setFromTriplets(trip.begin(), trip.end());
    return s;
}

FockOperator apply_generator(const GeneratorSpec& spec, const FockOperator& a)
{
    return Generator(spec, a.space()).apply(a);
}

// ---------------------------------------------------------------------------
// Semigroup

namespace {

struct DisjointSets {
    std::vector<Eigen::Index> parent;
    explicit DisjointSets(Eigen::Index n) : parent(static_cast<std::size_t>(n))
    {
        std::iota(parent.begin(), parent.end(), Eigen::Index{0});
    }
    Eigen::Index find(Eigen::Index x)
    {
        while (parent[x] != x) {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        return x;
    }
    void unite(Eigen::Index a, Eigen::Index b) { parent[find(a)] = find(b); }
};

} // namespace

Semigroup::Semigroup(const Generator& gen) : space_(gen.space())
{
    GeneratorSpec dspec = gen.spec();
    dspec.include_hamiltonian = false;
    const Generator dis(dspec, gen.space());
    const Eigen::SparseMatrix<cplx> s = dis.superoperator();

    const Eigen::Index n = static_cast<Eigen::Index>(space_->dim());
    const Eigen::Index nn = n * n;
    const Eigen::VectorXd r = gibbs_weights(gen.omega(), *space_);
    const Eigen::VectorXd& f = gen.free_energy();
    sqrt_w_.resize(nn);
    ham_ = Eigen::VectorXd::Zero(nn);
    for (Eigen::Index k = 0; k < n; ++k) {
        for (Eigen::Index m = 0; m < n; ++m) {
            sqrt_w_[m + k * n] = std::sqrt(r[k]);
            if (gen.spec().include_hamiltonian) ham_[m + k * n] = f[m] - f[k];
        }
    }

    DisjointSets sets(nn);
    for (Eigen::Index c = 0; c < s.outerSize(); ++c) {
        for (Eigen::SparseMatrix<cplx>::InnerIterator it(s, c); it; ++it) {
            if (it.value() != cplx{0.0, 0.0}) sets.unite(it.row(), it.col());
        }
    }
    std::vector<std::vector<Eigen::Index>> groups(static_cast<std::size_t>(nn));
    for (Eigen::Index u = 0; u < nn; ++u) groups[sets.find(u)].push_back(u);

    std::vector<Eigen::Index> local(static_cast<std::size_t>(nn), -1);
    for (auto& units : groups) {
        if (units.empty()) continue;
        const auto sz = static_cast<Eigen::Index>(units.size());
        for (Eigen::Index a = 0; a < sz; ++a) local[units[a]] = a;
        Eigen::MatrixXcd blk = Eigen::MatrixXcd::Zero(sz, sz);
        for (Eigen::Index b = 0; b < sz; ++b) {
            const Eigen::Index col = units[b];
            for (Eigen::SparseMatrix<cplx>::InnerIterator it(s, col); it; ++it) {
                // W^{1/2} S W^{−1/2} is Hermitian because 𝔇 is self-adjoint for ⟨A|B⟩ = ρ(A†B).
                blk(local[it.row()], b) = sqrt_w_[it.row()] * it.value() / sqrt_w_[col];
            }
        }
        const Eigen::MatrixXcd herm = 0.5 * (blk + blk.adjoint());
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(herm);
        if (es.info() != Eigen::Success) throw ConvergenceError("block eigensolver failed");
        blocks_.push_back({std::move(units), es.eigenvalues(), es.eigenvectors()});
    }
}

std::size_t Semigroup::largest_block() const
{
    std::size_t m = 0;
    for (const Block& b : blocks_) m = std::max(m, b.units.size());
    return m;
}

Eigen::VectorXd Semigroup::eigenvalues() const
{
    std::vector<double> all;
    for (const Block& b : blocks_) {
        for (Eigen::Index i = 0; i < b.values.size(); ++i) all.push_back(b.values[i]);
    }
    std::sort(all.begin(), all.end());
    return Eigen::Map<Eigen::VectorXd>(all.data(), static_cast<Eigen::Index>(all.size()));
}

Eigen::MatrixXcd Semigroup::apply(const Eigen::MatrixXcd& a, double t) const
{
    if (t < 0.0) throw DomainError("semigroup time must be nonnegative");
    const Eigen::Index n = static_cast<Eigen::Index>(space_->dim());
    if (a.rows() != n || a.cols() != n) throw StructuralError("operator dimension mismatch");
    Eigen::MatrixXcd out(n, n);
    const cplx i{0.0, 1.0};
    for (const Block& b : blocks_) {
        const auto sz = static_cast<Eigen::Index>(b.units.size());
        Eigen::VectorXcd x(sz);
        for (Eigen::Index k = 0; k < sz; ++k) x[k] = sqrt_w_[b.units[k]] * a(b.units[k] % n, b.units[k] / n);
        Eigen::VectorXcd y = b.vectors.adjoint() * x;
        for (Eigen::Index k = 0; k < sz; ++k) y[k] *= std::exp(-t * b.values[k]);
        x = b.vectors * y;
        for (Eigen::Index k = 0; k < sz; ++k) {
            const Eigen::Index u = b.units[k];
            out(u % n, u / n) = x[k] / sqrt_w_[u] * std::exp(-i * t * ham_[u]);
        }
    }
    return out;
}

FockOperator Semigroup::apply(const FockOperator& a, double t) const
{
    return FockOperator(a.space(), apply(a.matrix(), t));
}

Eigen::MatrixXcd semigroup_pade(const Generator& gen, const Eigen::MatrixXcd& a, double t)
{
    if (t < 0.0) throw DomainError("semigroup time must be nonnegative");
    const Eigen::MatrixXcd s = Eigen::MatrixXcd(gen.superoperator());
    const Eigen::MatrixXcd e = (-t * s).exp();
    const Eigen::Index n = a.rows();
    const Eigen::VectorXcd v = e * Eigen::Map<const Eigen::VectorXcd>(a.data(), n * n);
    return Eigen::Map<const Eigen::MatrixXcd>(v.data(), n, n);
}

FockOperator semigroup_apply(const GeneratorSpec& spec, const FockOperator& a, double t, SemigroupMethod method)
{
    if (t < 0.0) throw DomainError("semigroup time must be nonnegative");
    const Generator gen(spec, a.space());
    if (method == SemigroupMethod::pade) return FockOperator(a.space(), semigroup_pade(gen, a.matrix(), t));
    return Semigroup(gen).apply(a, t);
}

// ---------------------------------------------------------------------------
// Leibniz

double leibniz_defect(const Generator& gen, const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& b)
{
    const Eigen::MatrixXcd ad = a.adjoint();
    Eigen::MatrixXcd d = gen.apply(Eigen::MatrixXcd(ad * b)) - ad * gen.apply(b) - gen.apply(ad) * b;
    for (std::size_t g = 0; g < gen.operators().size(); ++g) {
        const Degree dl = gen.jumps()[g].degree();
        d += graded_commutator(gen.operators()[g], dl, a).adjoint() * graded_commutator(gen.operators()[g], dl, b);
    }
    return d.norm();
}

double leibniz_defect(const GeneratorSpec& spec, const FockOperator& a, const FockOperator& b)
{
    require_same_space(a, b);
    return leibniz_defect(Generator(spec, a.space()), a.matrix(), b.matrix());
}

// ---------------------------------------------------------------------------
// Convergence bound

namespace {

int sup_diameter(const std::vector<Point>& pts)
{
    int d = 0;
    for (std::size_t i = 0; i < pts.size(); ++i) {
        for (std::size_t j = i + 1; j < pts.size(); ++j) {
            d = std::max(d, static_cast<int>(distance(pts[i], pts[j], Metric::sup)));
        }
    }
    return d;
}

// Σ_{m≥1} m^{k} e^{−pm}, summed past the peak until the terms are negligible.
double polylog_series(double k, double p)
{
    double sum = 0.0;
    const double peak = k / p;
    for (long m = 1; m < 100000000L; ++m) {
        const double term = std::exp(k * std::log(static_cast<double>(m)) - p * static_cast<double>(m));
        sum += term;
        if (!std::isfinite(sum)) return sum;
        if (static_cast<double>(m) > peak && term < 1e-17 * sum) break;
    }
    return sum;
}

} // namespace

ConvergenceBound convergence_bound(const std::vector<JumpCatalogue>& catalogues, int n, double p)
{
    if (n < 1) throw ConfigError("convergence bound needs N >= 1");
    if (!(p > 0.0)) throw ConfigError("convergence bound needs p > 0");
    if (catalogues.empty()) throw ConfigError("convergence bound needs at least one catalogue");
    const ModelParams& params = catalogues.front().omega().params();
    if (p >= 1.0 / params.r_loc) {
        std::ostringstream os;
        os << "weighted jump sum diverges for p = " << p << " >= 1/r_loc = " << 1.0 / params.r_loc;
        throw BoundDivergence(os.str());
    }

    ConvergenceBound out;
    out.n = n;
    out.p = p;
    const int d = params.dim;

    // sup over sites and realizations, per diameter
    std::vector<double> sup_by_m;
    bool any = false;
    for (const JumpCatalogue& cat : catalogues) {
        std::map<std::pair<Point, int>, double> acc;
        for (const Jump& g : cat.jumps()) {
            const auto sup = g.support();
            if (static_cast<int>(sup.size()) > n + 1) continue;
            const int m = sup_diameter(sup);
            for (const Point& x : sup) acc[{x, m}] += g.rate;
            any = true;
        }
        for (const auto& [key, v] : acc) {
            const auto m = static_cast<std::size_t>(key.second);
            if (sup_by_m.size() <= m) sup_by_m.resize(m + 1, 0.0);
            sup_by_m[m] = std::max(sup_by_m[m], v);
        }
    }
    for (std::size_t m = 0; m < sup_by_m.size(); ++m) out.c_l += std::exp(p * static_cast<double>(m)) * sup_by_m[m];
    const double series = polylog_series(static_cast<double>(d * n), p);
    out.c_1 = any ? 2.0 * n * out.c_l * series : 0.0;
    out.radius = out.c_1 > 0.0 ? 1.0 / out.c_1 : std::numeric_limits<double>::infinity();

    // Worst case over energies: out + in at m = 0, and both hop directions for every
    // lattice point of the sup-shell m, each bounded by Γ₀ e^{−m/r_loc}/Z.
    double bath = params.gamma_star;
    double hop = params.gamma0;
    if (params.rate_modulation) {
        for (int i = 0; i <= 64; ++i) {
            const double e = params.delta.lo + params.delta.width() * i / 64.0;
            if (params.rate_modulation->bath) bath = std::max(bath, params.bath_scale(e));
            for (int j = 0; j <= 64 && params.rate_modulation->hop; ++j) {
                hop = std::max(hop, params.hop_scale(e, params.delta.lo + params.delta.width() * j / 64.0));
            }
        }
        if (!params.rate_modulation->bath) bath = params.gamma_star;
        if (!params.rate_modulation->hop) hop = params.gamma0;
    }
    double z = 0.0;
    for (const JumpCatalogue& cat : catalogues) {
        try {
            const double zc = normalization_z(cat.omega());
            z = z == 0.0 ? zc : std::min(z, zc);
        } catch (const DegenerateNormalization&) {
        }
    }
    out.c_l_worst = 2.0 * bath;
    if (z > 0.0) {
        const double decay = 1.0 / params.r_loc - p;
        double shells = 0.0;
        for (long m = 1; m < 100000000L; ++m) {
            const double md = static_cast<double>(m);
            const double count = std::pow(2.0 * md + 1.0, d) - std::pow(2.0 * md - 1.0, d);
            const double term = count * std::exp(-decay * md);
            shells += term;
            if (md * decay > d && term < 1e-17 * shells) break;
        }
        out.c_l_worst += 2.0 * hop / z * shells;
    }
    out.c_1_worst = 2.0 * n * out.c_l_worst * series;
    out.radius_worst = 1.0 / out.c_1_worst;
    return out;
}

ConvergenceBound convergence_bound(const JumpCatalogue& catalogue, int n, double p)
{
    return convergence_bound(std::vector<JumpCatalogue>{catalogue}, n, p);
}

} // namespace hopdyn
