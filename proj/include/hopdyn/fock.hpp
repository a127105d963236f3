// fock.hpp: Jordan–Wigner representation of the CAR algebra on the occupied sites
//
// Basis states are occupation bitmasks: bit k is the occupancy of the k-th site in
// canonical (lexicographic) order. a_k carries the string Π_{j<k}(1 − 2n_j).

#pragma once

#include <complex>
#include <cstdint>
#include <memory>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "hopdyn/model.hpp"

namespace hopdyn {

using cplx = std::complex<double>;

/// Largest site count for which dense Fock matrices are built.
inline constexpr std::size_t kMaxFockSites = 10;

class FockSpace {
public:
    /// Sites must be strictly increasing in canonical order.
    explicit FockSpace(std::vector<Point> sites);
    static std::shared_ptr<const FockSpace> from_realization(const DisorderRealization& omega);

    std::size_t size() const { return sites_.size(); }
    std::size_t dim() const { return std::size_t{1} << sites_.size(); }
    const std::vector<Point>& sites() const { return sites_; }
    /// Throws SiteError when p is not one of the sites.
    std::size_t rank_of(const Point& p) const;

    bool operator==(const FockSpace& o) const { return sites_ == o.sites_; }

private:
    std::vector<Point> sites_;
};

using FockSpacePtr = std::shared_ptr<const FockSpace>;

enum class Degree { even, odd, mixed };

const char* to_string(Degree d);

inline int bit_parity(std::uint64_t m) { return __builtin_popcountll(m) & 1; }

/// Operator whose matrix has at most one nonzero per column (and per row).
/// Creators, annihilators, their products and diagonal operators are all of this form.
struct MonomialMatrix {
    std::vector<std::int32_t> row;  // row index of the nonzero in each column, -1 if none
    std::vector<cplx> val;

    std::size_t dim() const { return row.size(); }
    Eigen::MatrixXcd to_dense() const;
    MonomialMatrix adjoint() const;
    MonomialMatrix scaled(cplx s) const;
    /// Degree from the structural pattern; an all-zero matrix counts as even.
    Degree degree() const;

    static MonomialMatrix identity(std::size_t dim);
    static MonomialMatrix diagonal(const Eigen::VectorXcd& d);
};

/// A * B.
MonomialMatrix compose(const MonomialMatrix& a, const MonomialMatrix& b);

MonomialMatrix monomial_annihilator(std::size_t n, std::size_t k);
MonomialMatrix monomial_creator(std::size_t n, std::size_t k);

class FockOperator {
public:
    FockOperator(FockSpacePtr space, Eigen::MatrixXcd matrix);

    const FockSpacePtr& space() const { return space_; }
    const Eigen::MatrixXcd& matrix() const { return matrix_; }
    std::size_t dim() const { return static_cast<std::size_t>(matrix_.rows()); }
    /// From structural zeros: even entries connect equal-parity bitmasks.
    Degree degree() const { return degree_; }

    FockOperator adjoint() const;
    FockOperator even_part() const;
    FockOperator odd_part() const;
    double frobenius_norm() const { return matrix_.norm(); }
    cplx trace() const { return matrix_.trace(); }

    FockOperator operator+(const FockOperator& o) const;
    FockOperator operator-(const FockOperator& o) const;
    FockOperator operator*(const FockOperator& o) const;
    FockOperator operator*(cplx s) const;
    FockOperator operator-() const;

private:
    FockSpacePtr space_;
    Eigen::MatrixXcd matrix_;
    Degree degree_;
};

inline FockOperator operator*(cplx s, const FockOperator& a) { return a * s; }

/// Throws StructuralError unless both operators live on equal spaces.
void require_same_space(const FockOperator& a, const FockOperator& b);

Degree degree_of(const Eigen::MatrixXcd& m);

FockOperator annihilator(const FockSpacePtr& space, const Point& x);
FockOperator creator(const FockSpacePtr& space, const Point& x);
FockOperator number_op(const FockSpacePtr& space, const Point& x);
FockOperator identity(const FockSpacePtr& space);
/// G = Π_x (1 − 2n_x).
FockOperator parity_operator(const FockSpacePtr& space);
FockOperator from_monomial(const FockSpacePtr& space, const MonomialMatrix& m);

/// [A,B]_g = AB − (−1)^{d_A d_B} BA, extended bilinearly over parity parts.
FockOperator graded_commutator(const FockOperator& a, const FockOperator& b);
/// Graded commutator with the sign (−1)^{d_L d_A} applied entrywise; `l` must have
/// a definite degree.
Eigen::MatrixXcd graded_commutator(const MonomialMatrix& l, Degree dl, const Eigen::MatrixXcd& a);

/// Diagonal of F = Σ_x (ε_x − μ) n_x over the bitmask basis.
Eigen::VectorXd free_energy_diagonal(const DisorderRealization& omega, const FockSpace& space);
FockOperator free_energy(const DisorderRealization& omega, const FockSpacePtr& space);

/// p_x = 1/(1 + e^{β(ε_x − μ)}), evaluated without overflow.
double fermi_dirac(double beta, double delta);
/// Diagonal of e^{−βF}/tr e^{−βF} over the bitmask basis, built as a product of p_x, 1 − p_x.
Eigen::VectorXd gibbs_weights(const DisorderRealization& omega, const FockSpace& space);

/// α_t(A) = e^{itF} A e^{−itF}; t may be complex (t = −iβ for KMS checks).
FockOperator heisenberg_evolve(const DisorderRealization& omega, const FockOperator& a, cplx t);

/// max over x, y of ‖{a_x, a_y†} − δ_xy‖ and ‖{a_x, a_y}‖ (Frobenius).
double car_defect(const FockSpacePtr& space);

/// Complex Gaussian entries; `parity` keeps only the chosen degree when set.
FockOperator random_operator(const FockSpacePtr& space, std::mt19937_64& rng,
                             std::optional<Degree> parity = std::nullopt);
/// Product of 1..max_length random creators/annihilators, redrawn (up to a bound) when it vanishes.
MonomialMatrix random_monomial(std::size_t n, std::mt19937_64& rng, std::size_t max_length = 4);

} // namespace hopdyn
