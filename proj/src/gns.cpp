// gns.cpp: Product KMS state, GNS basis and Dirichlet form

#include "hopdyn/gns.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "hopdyn/errors.hpp"

namespace hopdyn {

namespace {

double softplus(double x)
{
    return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
}

std::vector<double> site_deltas(const DisorderRealization& omega, const FockSpace& space)
{
    std::vector<double> d(space.size());
    for (std::size_t k = 0; k < space.size(); ++k) {
        const auto e = omega.energy(space.sites()[k]);
        if (!e) throw SiteError("Fock space site is not occupied in the realization");
        d[k] = *e - omega.params().mu;
    }
    return d;
}

MonomialMatrix b_monomial(std::size_t n, std::size_t k, double beta, double delta)
{
    return monomial_annihilator(n, k).scaled(std::exp(0.5 * softplus(beta * delta)));
}

MonomialMatrix b_dagger_monomial(std::size_t n, std::size_t k, double beta, double delta)
{
    return monomial_creator(n, k).scaled(std::exp(0.5 * softplus(-beta * delta)));
}

MonomialMatrix sigma_monomial(std::size_t n, std::size_t k, double beta, double delta)
{
    const std::size_t dim = std::size_t{1} << n;
    Eigen::VectorXcd d(static_cast<Eigen::Index>(dim));
    const double up = std::exp(0.5 * beta * delta);
    const double down = std::exp(-0.5 * beta * delta);
    for (std::size_t i = 0; i < dim; ++i) d[static_cast<Eigen::Index>(i)] = (i >> k & 1) ? up : -down;
    return MonomialMatrix::diagonal(d);
}

} // namespace

cplx state_eval_product(const DisorderRealization& omega, const FockOperator& a)
{
    const FockSpace& space = *a.space();
    const std::vector<double> delta = site_deltas(omega, space);
    const double beta = omega.params().beta;
    const std::size_t dim = space.dim();
    // Möbius inversion of the diagonal into coefficients of Π_{k∈S} n_k; off-diagonal
    // entries change the occupation of some site and have zero expectation.
    std::vector<cplx> c(dim);
    for (std::size_t i = 0; i < dim; ++i) c[i] = a.matrix()(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i));
    for (std::size_t k = 0; k < space.size(); ++k) {
        const std::size_t bit = std::size_t{1} << k;
        for (std::size_t m = 0; m < dim; ++m) {
            if (m & bit) c[m] -= c[m ^ bit];
        }
    }
    std::vector<double> prod(dim, 1.0);
    cplx total = c[0];
    for (std::size_t m = 1; m < dim; ++m) {
        const auto k = static_cast<std::size_t>(__builtin_ctzll(m));
        prod[m] = prod[m & (m - 1)] * fermi_dirac(beta, delta[k]);
        total += c[m] * prod[m];
    }
    return total;
}

cplx state_eval_trace(const DisorderRealization& omega, const FockOperator& a)
{
    const Eigen::VectorXd f = free_energy_diagonal(omega, *a.space());
    const double beta = omega.params().beta;
    const double fmin = f.minCoeff();
    Eigen::VectorXd w(f.size());
    for (Eigen::Index i = 0; i < f.size(); ++i) w[i] = std::exp(-beta * (f[i] - fmin));
    w /= w.sum();
    cplx total{0.0, 0.0};
    for (Eigen::Index i = 0; i < f.size(); ++i) total += w[i] * a.matrix()(i, i);
    return total;
}

cplx state_eval(const DisorderRealization& omega, const FockOperator& a, double tol)
{
    const cplx pa = state_eval_product(omega, a);
    const cplx pb = state_eval_trace(omega, a);
    const double scale = std::max(1.0, a.matrix().diagonal().cwiseAbs().maxCoeff());
    if (std::abs(pa - pb) > tol * scale) {
        std::ostringstream os;
        os << "product formula and trace formula disagree by " << std::abs(pa - pb);
        throw ConsistencyError(os.str());
    }
    return pb;
}

cplx weighted_inner(const Eigen::VectorXd& gibbs, const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& b)
{
    cplx total{0.0, 0.0};
    for (Eigen::Index k = 0; k < a.cols(); ++k) total += gibbs[k] * a.col(k).dot(b.col(k));
    return total;
}

cplx weighted_inner(const Eigen::VectorXd& gibbs, const MonomialMatrix& a, const Eigen::MatrixXcd& b)
{
    cplx total{0.0, 0.0};
    for (std::size_t k = 0; k < a.dim(); ++k) {
        const std::int32_t r = a.row[k];
        if (r < 0) continue;
        const auto kk = static_cast<Eigen::Index>(k);
        total += gibbs[kk] * std::conj(a.val[k]) * b(r, kk);
    }
    return total;
}

cplx inner_product(const DisorderRealization& omega, const FockOperator& a, const FockOperator& b)
{
    require_same_space(a, b);
    return weighted_inner(gibbs_weights(omega, *a.space()), a.matrix(), b.matrix());
}

FockOperator build_b(const DisorderRealization& omega, const FockSpacePtr& space, const Point& x)
{
    const std::size_t k = space->rank_of(x);
    return from_monomial(space, b_monomial(space->size(), k, omega.params().beta, site_deltas(omega, *space)[k]));
}

FockOperator build_b_dagger(const DisorderRealization& omega, const FockSpacePtr& space, const Point& x)
{
    const std::size_t k = space->rank_of(x);
    return from_monomial(space,
                         b_dagger_monomial(space->size(), k, omega.params().beta, site_deltas(omega, *space)[k]));
}

FockOperator build_sigma(const DisorderRealization& omega, const FockSpacePtr& space, const Point& x)
{
    const std::size_t k = space->rank_of(x);
    return from_monomial(space, sigma_monomial(space->size(), k, omega.params().beta, site_deltas(omega, *space)[k]));
}

// ---------------------------------------------------------------------------
// Basis

GnsBasisElement decode_basis_index(std::size_t index, std::size_t n)
{
    GnsBasisElement e;
    for (std::size_t k = 0; k < n; ++k) {
        const std::size_t digit = index & 3;
        index >>= 2;
        const std::uint32_t bit = std::uint32_t{1} << k;
        if (digit == 1) e.X |= bit;
        if (digit == 2) e.Y |= bit;
        if (digit == 3) e.Z |= bit;
    }
    return e;
}

std::size_t encode_basis_index(const GnsBasisElement& e, std::size_t n)
{
    std::size_t index = 0;
    for (std::size_t k = n; k-- > 0;) {
        const std::uint32_t bit = std::uint32_t{1} << k;
        std::size_t digit = 0;
        if (e.X & bit) digit = 1;
        if (e.Y & bit) digit = 2;
        if (e.Z & bit) digit = 3;
        index = index * 4 + digit;
    }
    return index;
}

GnsBasis::GnsBasis(const DisorderRealization& omega, FockSpacePtr space, std::size_t cap)
    : omega_(omega), space_(space ? std::move(space) : FockSpace::from_realization(omega))
{
    const std::size_t n = space_->size();
    if (n > cap) {
        std::ostringstream os;
        os << "GNS basis for " << n << " sites exceeds the cap of " << cap;
        throw SizeError(os.str());
    }
    const double beta = omega_.params().beta;
    delta_ = site_deltas(omega_, *space_);
    gibbs_ = gibbs_weights(omega_, *space_);

    std::vector<MonomialMatrix> b(n);
    std::vector<MonomialMatrix> bd(n);
    std::vector<MonomialMatrix> s(n);
    for (std::size_t k = 0; k < n; ++k) {
        b[k] = b_monomial(n, k, beta, delta_[k]);
        bd[k] = b_dagger_monomial(n, k, beta, delta_[k]);
        s[k] = sigma_monomial(n, k, beta, delta_[k]);
    }

    const std::size_t count = std::size_t{1} << (2 * n);
    elements_.reserve(count);
    monomials_.reserve(count);
    const MonomialMatrix id = MonomialMatrix::identity(space_->dim());
    for (std::size_t i = 0; i < count; ++i) {
        const GnsBasisElement e = decode_basis_index(i, n);
        MonomialMatrix m = id;
        for (std::size_t k = n; k-- > 0;) {
            if (e.X >> k & 1) m = compose(m, bd[k]);
        }
        for (std::size_t k = 0; k < n; ++k) {
            if (e.Y >> k & 1) m = compose(m, b[k]);
        }
        for (std::size_t k = 0; k < n; ++k) {
            if (e.Z >> k & 1) m = compose(m, s[k]);
        }
        elements_.push_back(e);
        monomials_.push_back(std::move(m));
    }
}

double GnsBasis::frequency(std::size_t i) const
{
    const GnsBasisElement& e = elements_[i];
    double w = 0.0;
    for (std::size_t k = 0; k < delta_.size(); ++k) {
        if (e.X >> k & 1) w += delta_[k];
        if (e.Y >> k & 1) w -= delta_[k];
    }
    return w;
}

std::vector<Point> GnsBasis::sites_of(std::uint32_t mask) const
{
    std::vector<Point> out;
    for (std::size_t k = 0; k < space_->size(); ++k) {
        if (mask >> k & 1) out.push_back(space_->sites()[k]);
    }
    return out;
}

std::shared_ptr<const GnsBasis> enumerate_basis(const DisorderRealization& omega, std::size_t cap)
{
    return std::make_shared<const GnsBasis>(omega, nullptr, cap);
}

Eigen::VectorXcd gns_coords(const GnsBasis& basis, const Eigen::MatrixXcd& a)
{
    Eigen::VectorXcd c(static_cast<Eigen::Index>(basis.size()));
    for (std::size_t i = 0; i < basis.size(); ++i) {
        c[static_cast<Eigen::Index>(i)] = weighted_inner(basis.gibbs(), basis.monomial(i), a);
    }
    return c;
}

GnsVector to_gns_coords(const std::shared_ptr<const GnsBasis>& basis, const FockOperator& a)
{
    if (!(*a.space() == *basis->space())) throw StructuralError("operator lives on a different Fock space");
    return {basis, gns_coords(*basis, a.matrix())};
}

Eigen::MatrixXcd gns_reconstruct(const GnsBasis& basis, const Eigen::VectorXcd& coeffs)
{
    const auto n = static_cast<Eigen::Index>(basis.space()->dim());
    Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(n, n);
    for (std::size_t i = 0; i < basis.size(); ++i) {
        const cplx c = coeffs[static_cast<Eigen::Index>(i)];
        if (c == cplx{0.0, 0.0}) continue;
        const MonomialMatrix& m = basis.monomial(i);
        for (Eigen::Index k = 0; k < n; ++k) {
            if (m.row[k] >= 0) out(m.row[k], k) += c * m.val[k];
        }
    }
    return out;
}

FockOperator from_gns_coords(const GnsVector& v)
{
    return FockOperator(v.basis->space(), gns_reconstruct(*v.basis, v.coeffs));
}

ModularResult modular_action(const DisorderRealization& omega, const FockSpacePtr& space,
                             const std::vector<MonomialFactor>& monomial, cplx power)
{
    const std::vector<double> delta = site_deltas(omega, *space);
    const std::size_t n = space->size();
    double exponent = 0.0;
    MonomialMatrix m = MonomialMatrix::identity(space->dim());
    for (const auto& [site, sharp] : monomial) {
        if (sharp != 1 && sharp != -1) throw ConfigError("monomial factor must be +1 (creator) or -1 (annihilator)");
        const std::size_t k = space->rank_of(site);
        exponent += sharp * delta[k];
        m = compose(m, sharp > 0 ? monomial_creator(n, k) : monomial_annihilator(n, k));
    }
    const cplx factor = std::exp(power * omega.params().beta * exponent);
    return {factor, from_monomial(space, m.scaled(factor))};
}

double kms_check(const DisorderRealization& omega, const FockOperator& a, const FockOperator& b)
{
    require_same_space(a, b);
    const double beta = omega.params().beta;
    const FockOperator shifted = heisenberg_evolve(omega, b, cplx{0.0, -beta});
    return std::abs(state_eval_trace(omega, a * b) - state_eval_trace(omega, shifted * a));
}

// ---------------------------------------------------------------------------
// Dirichlet form

cplx dirichlet_form(const Generator& gen, const FockOperator& a, const FockOperator& b)
{
    require_same_space(a, b);
    const Eigen::VectorXd r = gibbs_weights(gen.omega(), *a.space());
    cplx total{0.0, 0.0};
    for (std::size_t g = 0; g < gen.operators().size(); ++g) {
        const Degree dl = gen.jumps()[g].degree();
        total += weighted_inner(r, graded_commutator(gen.operators()[g], dl, a.matrix()),
                                graded_commutator(gen.operators()[g], dl, b.matrix()));
    }
    return 0.5 * total;
}

cplx dirichlet_form(const DisorderRealization& omega, const JumpCatalogue& catalogue, const FockOperator& a,
                    const FockOperator& b)
{
    if (omega.impurities().size() != catalogue.omega().impurities().size()) {
        throw StructuralError("catalogue was built on a different realization");
    }
    return dirichlet_form(Generator(GeneratorSpec{catalogue}, a.space()), a, b);
}

DirichletCheck dirichlet_identity(const Generator& gen, const FockOperator& a, const FockOperator& b)
{
    const Eigen::VectorXd r = gibbs_weights(gen.omega(), *a.space());
    DirichletCheck c;
    c.form = dirichlet_form(gen, a, b);
    c.left = weighted_inner(r, a.matrix(), gen.dissipate(b.matrix()));
    c.right = weighted_inner(r, gen.dissipate(a.matrix()), b.matrix());
    c.deviation = std::max({std::abs(c.form - c.left), std::abs(c.form - c.right), std::abs(c.left - c.right)});
    return c;
}

} // namespace hopdyn
