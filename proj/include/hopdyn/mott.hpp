// mott.hpp: Variable-range hopping: Mott temperature, hop probability and its optimum

#pragma once

#include <vector>

namespace hopdyn {

/// Boltzmann constant in meV/K.
inline constexpr double kBoltzmannMeV = 0.08617;

/// Energies in meV, lengths in a common unit (Å for the silicon preset), T in kelvin.
struct MottInputs {
    double n_F{1.0};   // states per energy per length^d
    double xi{1.0};    // localization length
    int d{3};
    double T{1.0};
    double kB{kBoltzmannMeV};

    void validate() const;
};

/// ξ = 100 Å, n_F ξ³ = 1e−3 meV⁻¹ (impurity spacing 1000 Å, band width 1 meV), T = 1 K.
MottInputs silicon_preset();

/// k_B T₀ = ((d+1)^{d+1}/d^d) / (n_F ξ^d).
double mott_T0(const MottInputs& inp);

/// exp[−(ε/(k_B T) + r/ξ)].
double hop_probability(const MottInputs& inp, double epsilon, double r);

struct HopOptimum {
    double r_opt{0.0};
    double eps_opt{0.0};
    double p_opt{0.0};
    double neg_log_p{0.0};
    int iterations{0};
};

/// Minimizes −ln P under n_F ε r^d = 1 by a bracketed Brent search over ln r.
HopOptimum optimize_hop(const MottInputs& inp);

/// r^{d+1} = dξ/(n_F k_B T), ε = 1/(n_F r^d), −ln P = (T₀/T)^{1/(d+1)}.
HopOptimum mott_closed_form(const MottInputs& inp);

struct MottRow {
    double T{0.0};
    double T0{0.0};
    double r_over_xi{0.0};
    double eps_opt{0.0};
    double neg_log_p{0.0};
    double closed_form{0.0};
    double rel_deviation{0.0};
};

MottRow mott_row(const MottInputs& inp);

struct LinearFit {
    double slope{0.0};
    double intercept{0.0};
    double r2{0.0};
};

/// Ordinary least squares y = a + b x; needs two distinct x values.
LinearFit fit_line(const std::vector<double>& x, const std::vector<double>& y);

struct HoppingLawFit {
    LinearFit stretched;   // ln k against T^{−1/(d+1)}
    LinearFit arrhenius;   // ln k against 1/T
    double T0{0.0};        // from the stretched slope
    bool stretched_better{false};
};

HoppingLawFit compare_hopping_laws(const std::vector<double>& T, const std::vector<double>& rate, int d);

} // namespace hopdyn
