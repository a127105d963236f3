// jumps.hpp: Jump catalogue: hops between impurities and exchanges with the cemetery

#pragma once

#include <map>
#include <optional>
#include <string>
#include <tuple>
#include <vector>

#include "hopdyn/fock.hpp"
#include "hopdyn/model.hpp"

namespace hopdyn {

enum class JumpKind { hop, out, in };

const char* to_string(JumpKind k);

struct Jump {
    JumpKind kind{JumpKind::hop};
    Point x;       // source of a hop, or the exchanging site
    Point y;       // target of a hop; empty otherwise
    double rate{0.0};
    double energy{0.0};

    Degree degree() const { return kind == JumpKind::hop ? Degree::even : Degree::odd; }
    std::vector<Point> support() const;
    /// (kind, x, y) identifies a jump up to its rate.
    std::tuple<JumpKind, Point, Point> key() const { return {kind, x, y}; }
};

/// Γ₀ e^{−|x−y|/r_loc}/Z · e^{−β(ε_y−ε_x)⁺}; 0 when an endpoint is empty or x = y.
double rate_hop(const DisorderRealization& omega, const Point& x, const Point& y);
/// Same, with Z supplied by the caller.
double rate_hop(const DisorderRealization& omega, const Point& x, const Point& y, double z);
double rate_out(const DisorderRealization& omega, const Point& x);
double rate_in(const DisorderRealization& omega, const Point& x);

/// Reversed kind and sites, negated energy, rate recomputed from ω.
Jump time_reverse(const Jump& g, const DisorderRealization& omega);

/// Hops: √Γ a_y† a_x. Exits: √Γ a_x. Entries: √Γ a_x†.
FockOperator build_jump_operator(const DisorderRealization& omega, const FockSpacePtr& space, const Jump& g);
MonomialMatrix jump_monomial(const FockSpace& space, const Jump& g);

class JumpCatalogue {
public:
    /// Rejects duplicate entries and catalogues not closed under time reversal.
    JumpCatalogue(const DisorderRealization& omega, std::vector<Jump> jumps, double hop_cutoff);

    const DisorderRealization& omega() const { return omega_; }
    const std::vector<Jump>& jumps() const { return jumps_; }
    std::size_t size() const { return jumps_.size(); }
    double hop_cutoff() const { return hop_cutoff_; }
    /// Γ₀ e^{−R/r_loc} · volume / Z, an upper bound on the weight of dropped hops.
    double dropped_tail_bound() const { return dropped_tail_bound_; }
    /// Index of the time-reversed partner of jumps()[i].
    std::size_t reverse_index(std::size_t i) const { return reverse_[i]; }
    std::optional<std::size_t> find(JumpKind kind, const Point& x, const Point& y = {}) const;

    /// Sub-catalogue of the jumps selected by `keep`, which must stay reversal-closed.
    template <class Pred>
    JumpCatalogue filtered(Pred keep) const
    {
        std::vector<Jump> sel;
        for (const Jump& g : jumps_) {
            if (keep(g)) sel.push_back(g);
        }
        return JumpCatalogue(omega_, std::move(sel), hop_cutoff_);
    }
    JumpCatalogue hops_only() const;
    JumpCatalogue cemetery_only() const;

private:
    DisorderRealization omega_;
    std::vector<Jump> jumps_;
    std::vector<std::size_t> reverse_;
    std::map<std::tuple<JumpKind, Point, Point>, std::size_t> index_;
    double hop_cutoff_{0.0};
    double dropped_tail_bound_{0.0};
};

/// Default hop radius R = 12·r_loc.
double default_hop_cutoff(const ModelParams& p);

/// All hops with |x−y| ≤ R plus out/in for every occupied site, sorted canonically.
JumpCatalogue enumerate_jumps(const DisorderRealization& omega, double hop_cutoff);
JumpCatalogue enumerate_jumps(const DisorderRealization& omega);

struct AxiomReport {
    double j1{0.0};             // involution and catalogue closure
    double j2_support{0.0};     // degree/support mismatches (count)
    double j2_covariance{0.0};  // relative rate change under a periodic translation
    bool j2_covariance_checked{false};
    double j3{0.0};             // max |α_t(L) − e^{itε}L|
    double j4{0.0};             // max |L_γ† − e^{−βε/2} L_γ̄|
    double j4_ratio{0.0};       // max relative deviation of Γ_γ/Γ_γ̄ from e^{−βε_γ}
    double j5_norm{0.0};        // max over sites x of ‖Σ_{γ∋x} L_γ†L_γ‖
    double j5_tail{0.0};        // analytic bound on the hop weight beyond the cutoff

    double max_deviation() const;
};

/// Measures all axiom deviations without throwing.
AxiomReport check_axioms(const JumpCatalogue& catalogue, const FockSpacePtr& space);
/// Throws AxiomFailure naming the first axiom whose deviation exceeds `tol`.
AxiomReport verify_axioms(const JumpCatalogue& catalogue, const FockSpacePtr& space, double tol = 1e-12);

} // namespace hopdyn
