#include <doctest.h>

#include <cmath>
#include <random>

#include <unsupported/Eigen/KroneckerProduct>
#include <unsupported/Eigen/MatrixFunctions>

#include "hopdyn/errors.hpp"
#include "hopdyn/fock.hpp"

using namespace hopdyn;

namespace {

FockSpacePtr line_space(int n)
{
    std::vector<Point> sites;
    for (int i = 0; i < n; ++i) sites.push_back({i});
    return std::make_shared<const FockSpace>(sites);
}

// Kronecker-product Jordan–Wigner: site k is bit k, so it is the (k+1)-th factor from the right.
Eigen::MatrixXcd kron_annihilator(int n, int k)
{
    Eigen::MatrixXcd lower(2, 2);
    lower << 0, 1, 0, 0;  // |1⟩ → |0⟩
    Eigen::MatrixXcd z(2, 2);
    z << 1, 0, 0, -1;
    const Eigen::MatrixXcd id = Eigen::MatrixXcd::Identity(2, 2);
    Eigen::MatrixXcd m = Eigen::MatrixXcd::Identity(1, 1);
    for (int site = n - 1; site >= 0; --site) {
        const Eigen::MatrixXcd& f = site == k ? lower : (site < k ? z : id);
        const Eigen::MatrixXcd next = Eigen::kroneckerProduct(m, f);
        m = next;
    }
    return m;
}

DisorderRealization line_realization(const std::vector<double>& energies, double mu = 0.0)
{
    ModelParams p;
    p.dim = 1;
    p.box = {static_cast<int>(energies.size())};
    p.mu = mu;
    p.delta = {-5.0, 5.0};
    std::vector<Impurity> imps;
    const Box b(p.box);
    for (std::size_t i = 0; i < energies.size(); ++i) imps.push_back({b.point(i), energies[i]});
    return DisorderRealization(p, imps);
}

} // namespace

TEST_CASE("single-mode annihilator in the bitmask basis")
{
    const auto s = line_space(1);
    Eigen::MatrixXcd expect(2, 2);
    expect << 0, 1, 0, 0;
    CHECK((annihilator(s, {0}).matrix() - expect).norm() == 0.0);
    CHECK(annihilator(s, {0}).degree() == Degree::odd);
}

TEST_CASE("Jordan–Wigner matches an independent Kronecker construction")
{
    for (int n = 1; n <= 5; ++n) {
        const auto s = line_space(n);
        for (int k = 0; k < n; ++k) {
            CHECK((annihilator(s, {k}).matrix() - kron_annihilator(n, k)).norm() == 0.0);
        }
    }
}

TEST_CASE("CAR relations hold entrywise for n <= 6")
{
    for (int n = 1; n <= 6; ++n) {
        const auto s = line_space(n);
        CHECK(car_defect(s) <= 1e-14);
        for (int x = 0; x < n; ++x) {
            const FockOperator a = annihilator(s, {x});
            CHECK((a * a).frobenius_norm() == 0.0);
            CHECK((creator(s, {x}).matrix() - a.matrix().adjoint()).norm() == 0.0);
            CHECK((a.adjoint().adjoint().matrix() - a.matrix()).norm() == 0.0);
        }
    }
    const auto s2 = line_space(2);
    const auto a1 = annihilator(s2, {0});
    const auto a2 = annihilator(s2, {1});
    CHECK((a1 * a2 + a2 * a1).frobenius_norm() == 0.0);
}

TEST_CASE("number operators are projections with half-trace")
{
    const int n = 4;
    const auto s = line_space(n);
    for (int x = 0; x < n; ++x) {
        const FockOperator nx = number_op(s, {x});
        CHECK(((nx * nx) - nx).frobenius_norm() == 0.0);
        CHECK(nx.trace().real() == doctest::Approx(std::pow(2.0, n - 1)));
        CHECK(nx.degree() == Degree::even);
    }
}

TEST_CASE("site errors and space invariants")
{
    const auto s = line_space(3);
    CHECK_THROWS_AS(annihilator(s, {7}), SiteError);
    CHECK_THROWS_AS(FockSpace({{1}, {0}}), ConfigError);
    CHECK_THROWS_AS(FockSpace({{0}, {0}}), ConfigError);
    std::vector<Point> many;
    for (int i = 0; i <= static_cast<int>(kMaxFockSites); ++i) many.push_back({i});
    CHECK_THROWS_AS(FockSpace{many}, SizeError);
    CHECK(s->dim() == 8);
}

TEST_CASE("graded commutator examples")
{
    const auto s = line_space(3);
    const auto a0 = annihilator(s, {0});
    const auto a1 = annihilator(s, {1});
    CHECK(graded_commutator(a0, a1).frobenius_norm() == 0.0);
    std::mt19937_64 rng(5);
    const FockOperator r = random_operator(s, rng);
    CHECK(graded_commutator(r, identity(s)).frobenius_norm() <= 1e-14);
    const auto one = line_space(1);
    const auto a = annihilator(one, {0});
    CHECK((graded_commutator(number_op(one, {0}), a) + a).frobenius_norm() == 0.0);
}

TEST_CASE("graded commutator is bilinear over parity parts")
{
    const auto s = line_space(3);
    std::mt19937_64 rng(8);
    const FockOperator a = random_operator(s, rng);
    const FockOperator b = random_operator(s, rng);
    CHECK(a.degree() == Degree::mixed);
    const Eigen::MatrixXcd ae = a.even_part().matrix(), ao = a.odd_part().matrix();
    const Eigen::MatrixXcd be = b.even_part().matrix(), bo = b.odd_part().matrix();
    // Oracle: AB − BA on all pairs except odd·odd, which anticommutes.
    const Eigen::MatrixXcd expect = ae * be - be * ae + ae * bo - bo * ae + ao * be - be * ao + ao * bo + bo * ao;
    CHECK((graded_commutator(a, b).matrix() - expect).norm() <= 1e-12);
}

TEST_CASE("monomial graded commutator agrees with the dense one")
{
    const int n = 4;
    const auto s = line_space(n);
    std::mt19937_64 rng(21);
    for (int trial = 0; trial < 20; ++trial) {
        const MonomialMatrix l = random_monomial(n, rng);
        const FockOperator lop = from_monomial(s, l);
        const FockOperator a = random_operator(s, rng, trial % 2 ? Degree::odd : Degree::even);
        const Eigen::MatrixXcd fast = graded_commutator(l, l.degree(), a.matrix());
        CHECK((fast - graded_commutator(lop, a).matrix()).norm() <= 1e-12);
    }
}

TEST_CASE("monomials have the degree of their factor count")
{
    const int n = 4;
    std::mt19937_64 rng(3);
    std::uniform_int_distribution<int> site(0, n - 1);
    for (int trial = 0; trial < 40; ++trial) {
        MonomialMatrix m = MonomialMatrix::identity(std::size_t{1} << n);
        const int len = 1 + trial % 4;
        for (int i = 0; i < len; ++i) {
            m = compose(m, i % 2 ? monomial_creator(n, site(rng)) : monomial_annihilator(n, site(rng)));
        }
        const bool nonzero = std::any_of(m.row.begin(), m.row.end(), [](int r) { return r >= 0; });
        if (!nonzero) continue;
        CHECK(m.degree() == (len % 2 ? Degree::odd : Degree::even));
        // G A G = ±A
        const auto s = line_space(n);
        const Eigen::MatrixXcd g = parity_operator(s).matrix();
        const Eigen::MatrixXcd d = m.to_dense();
        CHECK((g * d * g - (len % 2 ? -1.0 : 1.0) * d).norm() == 0.0);
    }
}

TEST_CASE("compose agrees with dense multiplication")
{
    const int n = 3;
    std::mt19937_64 rng(4);
    for (int i = 0; i < 20; ++i) {
        const MonomialMatrix a = random_monomial(n, rng);
        const MonomialMatrix b = random_monomial(n, rng);
        CHECK((compose(a, b).to_dense() - a.to_dense() * b.to_dense()).norm() <= 1e-14);
        CHECK((a.adjoint().to_dense() - a.to_dense().adjoint()).norm() == 0.0);
    }
}

TEST_CASE("free energy")
{
    const auto flat = line_realization({0.3, 0.3}, 0.3);
    const auto sf = FockSpace::from_realization(flat);
    CHECK(free_energy(flat, sf).frobenius_norm() == 0.0);

    const auto one = line_realization({1.5}, 0.5);
    const auto s1 = FockSpace::from_realization(one);
    Eigen::MatrixXcd expect = Eigen::MatrixXcd::Zero(2, 2);
    expect(1, 1) = 1.0;
    CHECK((free_energy(one, s1).matrix() - expect).norm() <= 1e-15);

    const auto w = line_realization({0.1, -0.4, 0.7});
    const auto s = FockSpace::from_realization(w);
    const FockOperator f = free_energy(w, s);
    FockOperator nn = number_op(s, {-1}) + number_op(s, {0}) + number_op(s, {1});
    CHECK((f * nn - nn * f).frobenius_norm() == 0.0);
    CHECK(f.degree() == Degree::even);
}

TEST_CASE("Heisenberg evolution against the matrix exponential")
{
    const auto w = line_realization({0.1, -0.4, 0.7}, 0.05);
    const auto s = FockSpace::from_realization(w);
    const Eigen::MatrixXcd f = free_energy(w, s).matrix();
    std::mt19937_64 rng(12);
    const FockOperator a = random_operator(s, rng);
    for (double t : {0.3, -1.7, 4.2}) {
        const Eigen::MatrixXcd u = (cplx(0.0, t) * f).exp();
        const Eigen::MatrixXcd expect = u * a.matrix() * u.adjoint();
        const FockOperator got = heisenberg_evolve(w, a, t);
        CHECK((got.matrix() - expect).norm() <= 1e-12);
        CHECK(std::abs(got.frobenius_norm() - a.frobenius_norm()) <= 1e-12);
    }
    // α_t ∘ α_s = α_{t+s}
    const FockOperator ts = heisenberg_evolve(w, heisenberg_evolve(w, a, 0.4), 1.1);
    CHECK((ts.matrix() - heisenberg_evolve(w, a, 1.5).matrix()).norm() <= 1e-12);
}

TEST_CASE("Heisenberg evolution of generators")
{
    const auto w = line_realization({0.1, -0.4, 0.7}, 0.05);
    const auto s = FockSpace::from_realization(w);
    const double t = 2.3;
    for (const auto& imp : w.impurities()) {
        const FockOperator a = annihilator(s, imp.position);
        const cplx phase = std::exp(cplx(0.0, -t * (imp.energy - 0.05)));
        CHECK((heisenberg_evolve(w, a, t).matrix() - phase * a.matrix()).norm() <= 1e-14);
        const FockOperator nx = number_op(s, imp.position);
        CHECK((heisenberg_evolve(w, nx, t).matrix() - nx.matrix()).norm() == 0.0);
    }
}

TEST_CASE("Fermi–Dirac occupation is stable at extreme arguments")
{
    CHECK(fermi_dirac(1.0, 0.0) == 0.5);
    CHECK(fermi_dirac(2.0, 0.7) == doctest::Approx(1.0 / (1.0 + std::exp(1.4))).epsilon(1e-15));
    CHECK(fermi_dirac(100.0, 5.0) > 0.0);
    CHECK(fermi_dirac(100.0, 5.0) == doctest::Approx(std::exp(-500.0)).epsilon(1e-12));
    CHECK(fermi_dirac(1e3, 5.0) == 0.0);
    CHECK(fermi_dirac(1e3, -5.0) == 1.0);
    CHECK(std::isfinite(fermi_dirac(1e300, 1.0)));
}

TEST_CASE("Gibbs weights equal the normalized Boltzmann factor")
{
    auto w = line_realization({0.1, -0.4, 0.7, 0.2}, 0.05);
    ModelParams p = w.params();
    p.beta = 2.5;
    w = w.with_params(p);
    const auto s = FockSpace::from_realization(w);
    const Eigen::MatrixXcd f = free_energy(w, s).matrix();
    const Eigen::MatrixXcd boltz = (-p.beta * f).exp();
    const Eigen::VectorXd g = gibbs_weights(w, *s);
    const double z = boltz.trace().real();
    for (Eigen::Index i = 0; i < g.size(); ++i) CHECK(std::abs(g[i] - boltz(i, i).real() / z) <= 1e-15);
    CHECK(std::abs(g.sum() - 1.0) <= 1e-14);
}

TEST_CASE("operator arithmetic rejects mismatched spaces")
{
    const auto s2 = line_space(2);
    const auto s3 = line_space(3);
    CHECK_THROWS_AS(identity(s2) + identity(s3), StructuralError);
}
