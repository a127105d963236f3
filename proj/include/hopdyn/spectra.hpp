// spectra.hpp: The dissipator as a symmetric matrix on the GNS basis, its spectrum and gap

#pragma once

#include <memory>
#include <vector>

#include <Eigen/Dense>

#include "hopdyn/gns.hpp"
#include "hopdyn/lindblad.hpp"

namespace hopdyn {

/// Eigenvalues at or below this count as kernel.
inline constexpr double kKernelThreshold = 1e-10;

struct AssemblyOptions {
    bool cross_check{true};  // build by both routes and compare
    double tol{1e-10};
};

struct GnsGeneratorMatrix {
    std::shared_ptr<const GnsBasis> basis;
    Eigen::MatrixXd matrix;       // M[i][j] = ⟨e_i|𝔇 e_j⟩ = 𝒬(e_i, e_j)
    Parts parts{};
    double path_deviation{0.0};   // max entrywise distance between the two routes
    double imaginary_part{0.0};   // largest discarded imaginary entry
    double asymmetry{0.0};
};

/// Route A: ½ Σ_γ W_γ†W_γ with W_γ the Gibbs-weighted vectors of [L_γ, e_j]_g.
Eigen::MatrixXcd assemble_from_form(const GnsBasis& basis, const Generator& gen);
/// Route B: expansion of 𝔇(e_j) over the basis.
Eigen::MatrixXcd assemble_from_projection(const GnsBasis& basis, const Generator& gen);

/// Throws ConsistencyError when the routes disagree beyond options.tol.
GnsGeneratorMatrix assemble(const std::shared_ptr<const GnsBasis>& basis, const JumpCatalogue& catalogue,
                            Parts parts = {}, AssemblyOptions options = {});

/// γ_x = (Γ★(ε_x)/2)(1 + e^{−β|ε_x−μ|}).
double star_site_rate(const DisorderRealization& omega, const Point& x);
/// γ_{X,Y,Z} = Σ_{x∈X∪Y} γ_x + 2 Σ_{z∈Z} γ_z.
double star_eigenvalue(const GnsBasis& basis, const GnsBasisElement& e);

struct Spectrum {
    Eigen::VectorXd values;     // ascending
    Eigen::MatrixXd vectors;    // columns, empty unless requested
    double max_residual{0.0};   // max ‖Mv − λv‖
    std::size_t block_count{0};
    std::size_t largest_block{0};
};

/// Dense symmetric eigensolve, block by block over the connected components of the
/// matrix's sparsity pattern.
Spectrum spectrum(const Eigen::MatrixXd& m, bool with_vectors = true);
Spectrum spectrum(const GnsGeneratorMatrix& m, bool with_vectors = true);

struct GapReport {
    std::size_t kernel_dim{0};
    double gap{0.0};
    double bound{0.0};           // Γ★/2
    double margin{0.0};          // gap − bound
    double kernel_overlap{0.0};  // |⟨v₀|ζ(1)⟩| when the kernel is simple
    bool unique{false};
};

GapReport kernel_and_gap(const GnsGeneratorMatrix& m, const Spectrum& s);
GapReport kernel_and_gap(const GnsGeneratorMatrix& m);

struct KRestriction {
    std::vector<std::size_t> indices;  // basis indices of ζ(σ_Z), Z ≠ ∅
    Eigen::MatrixXd matrix;
    double coupling{0.0};              // largest entry linking 𝒦 to its complement
    double min_eigenvalue{0.0};
};

/// Throws ConsistencyError when 𝒦 is not invariant (coupling above `tol`).
KRestriction restrict_to_K(const GnsGeneratorMatrix& m, double tol = 1e-10);

struct DecayPoint {
    double t{0.0};
    double state_deviation{0.0};  // |ρ̃(e^{−t𝒟}A) − ρ(A)|
    double gns_norm{0.0};         // ‖e^{−t𝒟}A − ρ(A)1‖_ρ
    double bound{0.0};            // e^{−gap·t} ‖A − ρ(A)1‖_ρ (1 + 1e−8)
};

struct DecaySeries {
    std::vector<DecayPoint> points;
    double gap{0.0};
    double expectation{0.0};  // ρ(A), real part
    double fitted_rate{0.0};  // slope of −log ‖·‖_ρ against t
    bool bound_holds{true};
};

/// ρ̃ is a density matrix on the Fock space (Hermitian, trace one, PSD), else DomainError.
DecaySeries return_to_equilibrium(const GnsGeneratorMatrix& m, const FockOperator& a,
                                  const Eigen::MatrixXcd& rho_tilde, const std::vector<double>& t_grid);

} // namespace hopdyn
