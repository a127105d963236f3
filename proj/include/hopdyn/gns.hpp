// gns.hpp: Equilibrium state, GNS inner product and the basis ζ(b_X† b_Y σ_Z)

#pragma once

#include <cstdint>
#include <memory>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "hopdyn/fock.hpp"
#include "hopdyn/jumps.hpp"
#include "hopdyn/lindblad.hpp"

namespace hopdyn {

/// Default cap on the site count for GNS work (basis size 4^n).
inline constexpr std::size_t kDefaultGnsCap = 7;

/// ρ(A) by the product formula over {1, n_x} monomials of the diagonal.
cplx state_eval_product(const DisorderRealization& omega, const FockOperator& a);
/// ρ(A) = tr(e^{−βF}A)/tr(e^{−βF}).
cplx state_eval_trace(const DisorderRealization& omega, const FockOperator& a);
/// Trace formula, after checking the product formula agrees (ConsistencyError otherwise).
cplx state_eval(const DisorderRealization& omega, const FockOperator& a, double tol = 1e-12);

/// ⟨A|B⟩ = ρ(A†B).
cplx inner_product(const DisorderRealization& omega, const FockOperator& a, const FockOperator& b);
/// Same, with precomputed Gibbs weights: Σ_{m,k} R_k conj(A_mk) B_mk.
cplx weighted_inner(const Eigen::VectorXd& gibbs, const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& b);
cplx weighted_inner(const Eigen::VectorXd& gibbs, const MonomialMatrix& a, const Eigen::MatrixXcd& b);

/// b_x = (1 + e^{β(ε_x−μ)})^{1/2} a_x and b_x† = (1 + e^{−β(ε_x−μ)})^{1/2} a_x†, unit vectors
/// in the GNS norm. b_x† is normalized on its own and is not the adjoint of b_x.
FockOperator build_b(const DisorderRealization& omega, const FockSpacePtr& space, const Point& x);
FockOperator build_b_dagger(const DisorderRealization& omega, const FockSpacePtr& space, const Point& x);
/// σ_x = e^{β(ε_x−μ)/2} n_x − e^{−β(ε_x−μ)/2} (1 − n_x).
FockOperator build_sigma(const DisorderRealization& omega, const FockSpacePtr& space, const Point& x);

/// Disjoint site sets as bitmasks over Fock ranks.
struct GnsBasisElement {
    std::uint32_t X{0};
    std::uint32_t Y{0};
    std::uint32_t Z{0};

    bool operator==(const GnsBasisElement& o) const { return X == o.X && Y == o.Y && Z == o.Z; }
    Degree degree() const { return (__builtin_popcount(X) + __builtin_popcount(Y)) & 1 ? Degree::odd : Degree::even; }
};

/// Base-4 digits per site (site 0 least significant): 0 absent, 1 in X, 2 in Y, 3 in Z.
GnsBasisElement decode_basis_index(std::size_t index, std::size_t n);
std::size_t encode_basis_index(const GnsBasisElement& e, std::size_t n);

class GnsBasis {
public:
    GnsBasis(const DisorderRealization& omega, FockSpacePtr space = nullptr, std::size_t cap = kDefaultGnsCap);

    const DisorderRealization& omega() const { return omega_; }
    const FockSpacePtr& space() const { return space_; }
    std::size_t size() const { return elements_.size(); }
    const GnsBasisElement& element(std::size_t i) const { return elements_[i]; }
    const std::vector<GnsBasisElement>& elements() const { return elements_; }
    /// b_X† b_Y σ_Z with b_X† = b_{x_m}†···b_{x_1}† and b_Y = b_{y_1}···b_{y_m}.
    const MonomialMatrix& monomial(std::size_t i) const { return monomials_[i]; }
    FockOperator op(std::size_t i) const { return from_monomial(space_, monomials_[i]); }
    const Eigen::VectorXd& gibbs() const { return gibbs_; }
    /// i[F, e] = i·frequency(e)·e with frequency = Σ_X (ε−μ) − Σ_Y (ε−μ).
    double frequency(std::size_t i) const;

    std::vector<Point> sites_of(std::uint32_t mask) const;

private:
    DisorderRealization omega_;
    FockSpacePtr space_;
    std::vector<GnsBasisElement> elements_;
    std::vector<MonomialMatrix> monomials_;
    Eigen::VectorXd gibbs_;
    std::vector<double> delta_;
};

std::shared_ptr<const GnsBasis> enumerate_basis(const DisorderRealization& omega, std::size_t cap = kDefaultGnsCap);

struct GnsVector {
    std::shared_ptr<const GnsBasis> basis;
    Eigen::VectorXcd coeffs;

    double norm() const { return coeffs.norm(); }
};

/// coeffs[e] = ⟨e|ζ(A)⟩.
GnsVector to_gns_coords(const std::shared_ptr<const GnsBasis>& basis, const FockOperator& a);
Eigen::VectorXcd gns_coords(const GnsBasis& basis, const Eigen::MatrixXcd& a);
/// Σ_e coeffs[e]·e as an operator.
FockOperator from_gns_coords(const GnsVector& v);
Eigen::MatrixXcd gns_reconstruct(const GnsBasis& basis, const Eigen::VectorXcd& coeffs);

/// A creator (+1) or annihilator (−1) acting on a site.
using MonomialFactor = std::pair<Point, int>;

struct ModularResult {
    cplx factor;        // e^{power·β Σ ♯_x (ε_x − μ)}
    FockOperator op;    // factor times the ordered product
};

/// Δ^{power} ζ(Π a^♯) = e^{power·βΣ♯(ε−μ)} ζ(Π a^♯).
ModularResult modular_action(const DisorderRealization& omega, const FockSpacePtr& space,
                             const std::vector<MonomialFactor>& monomial, cplx power);

/// |ρ(AB) − ρ(α_{−iβ}(B)A)|.
double kms_check(const DisorderRealization& omega, const FockOperator& a, const FockOperator& b);

/// 𝒬(A,B) = ½ Σ_γ ρ([L_γ,A]_g† [L_γ,B]_g) over the generator's jumps.
cplx dirichlet_form(const Generator& gen, const FockOperator& a, const FockOperator& b);
cplx dirichlet_form(const DisorderRealization& omega, const JumpCatalogue& catalogue, const FockOperator& a,
                    const FockOperator& b);

struct DirichletCheck {
    cplx form;         // 𝒬(A,B)
    cplx left;         // ρ(A† 𝔇(B))
    cplx right;        // ρ(𝔇(A)† B)
    double deviation;  // max pairwise distance
};

DirichletCheck dirichlet_identity(const Generator& gen, const FockOperator& a, const FockOperator& b);

} // namespace hopdyn
