// lindblad.hpp: Graded dissipators, the generator ℒ = i[F,·] + 𝔇 and its semigroup e^{−tℒ}

#pragma once

#include <vector>

#include <Eigen/Dense>
#include <Eigen/SparseCore>

#include "hopdyn/fock.hpp"
#include "hopdyn/jumps.hpp"

namespace hopdyn {

struct Parts {
    bool kin{true};   // hops
    bool star{true};  // exchanges with the cemetery

    bool includes(JumpKind k) const { return k == JumpKind::hop ? kin : star; }
};

Parts parse_parts(const std::string& s);  // "kin", "star", "kin,star"
std::string to_string(const Parts& p);

struct GeneratorSpec {
    JumpCatalogue catalogue;
    bool include_hamiltonian{false};
    Parts parts{};
    /// Test hook: when false, odd jumps use the ungraded sign −L†AL for every A.
    bool graded_signs{true};
};

/// ½(L†LA + AL†L) − (−1)^{d_L d_A} L†AL; mixed A is split into parity parts.
FockOperator dissipator_term(const FockOperator& l, const FockOperator& a);

/// Generator bound to a Fock space, with the selected jump operators precomputed.
class Generator {
public:
    explicit Generator(GeneratorSpec spec, FockSpacePtr space = nullptr);

    const GeneratorSpec& spec() const { return spec_; }
    const FockSpacePtr& space() const { return space_; }
    const DisorderRealization& omega() const { return spec_.catalogue.omega(); }
    /// Selected jumps and their operators, in catalogue order.
    const std::vector<Jump>& jumps() const { return jumps_; }
    const std::vector<MonomialMatrix>& operators() const { return ops_; }
    const Eigen::VectorXd& free_energy() const { return f_; }

    /// ℒ(A), or 𝔇(A) when the GeneratorSpec excludes the Hamiltonian.
    Eigen::MatrixXcd apply(const Eigen::MatrixXcd& a) const;
    FockOperator apply(const FockOperator& a) const;
    /// 𝔇(A) alone.
    Eigen::MatrixXcd dissipate(const Eigen::MatrixXcd& a) const;

    /// ℒ on vec(A) (column-major, index m + k·dim), built per matrix unit.
    Eigen::SparseMatrix<cplx> superoperator() const;

private:
    GeneratorSpec spec_;
    FockSpacePtr space_;
    std::vector<Jump> jumps_;
    std::vector<MonomialMatrix> ops_;
    std::vector<Eigen::VectorXd> ltl_;  // diagonal of L†L
    Eigen::VectorXd f_;
};

FockOperator apply_generator(const GeneratorSpec& spec, const FockOperator& a);

enum class SemigroupMethod { spectral, pade };

/// e^{−tℒ}. The dissipative part is symmetrized with the Gibbs weights and diagonalized
/// block by block; the Hamiltonian part is diagonal on matrix units and commutes with it.
class Semigroup {
public:
    explicit Semigroup(const Generator& gen);

    Eigen::MatrixXcd apply(const Eigen::MatrixXcd& a, double t) const;
    FockOperator apply(const FockOperator& a, double t) const;

    std::size_t block_count() const { return blocks_.size(); }
    std::size_t largest_block() const;
    /// Ascending eigenvalues of the dissipative part over all blocks.
    Eigen::VectorXd eigenvalues() const;

private:
    struct Block {
        std::vector<Eigen::Index> units;
        Eigen::VectorXd values;
        Eigen::MatrixXcd vectors;
    };
    FockSpacePtr space_;
    Eigen::VectorXd sqrt_w_;   // √R_k per matrix unit
    Eigen::VectorXd ham_;      // f_m − f_k per matrix unit, zero without Hamiltonian
    std::vector<Block> blocks_;
};

/// Throws DomainError for t < 0.
FockOperator semigroup_apply(const GeneratorSpec& spec, const FockOperator& a, double t,
                             SemigroupMethod method = SemigroupMethod::spectral);
Eigen::MatrixXcd semigroup_pade(const Generator& gen, const Eigen::MatrixXcd& a, double t);

/// ‖ℒ(A†B) − A†ℒ(B) − ℒ(A†)B + Σ_γ [L_γ,A]_g†[L_γ,B]_g‖_F.
double leibniz_defect(const GeneratorSpec& spec, const FockOperator& a, const FockOperator& b);
double leibniz_defect(const Generator& gen, const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& b);

struct ConvergenceBound {
    int n{1};
    double p{0.0};
    double c_l{0.0};             // max over the given realizations
    double c_1{0.0};
    double radius{0.0};          // 1 / C₁
    double c_l_worst{0.0};       // energy-independent lattice bound
    double c_1_worst{0.0};
    double radius_worst{0.0};
};

/// C_L = Σ_m e^{pm} sup Σ_{γ∋x, diam γ = m, |supp γ| ≤ N+1} Γ_γ (sup-metric diameters) and
/// C₁ = 2N·C_L·Σ_{m≥1} m^{dN} e^{−pm}. Throws BoundDivergence when p ≥ 1/r_loc.
ConvergenceBound convergence_bound(const std::vector<JumpCatalogue>& catalogues, int n, double p);
ConvergenceBound convergence_bound(const JumpCatalogue& catalogue, int n, double p);

} // namespace hopdyn
