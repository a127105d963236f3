// kmc.hpp: Classical reduction: occupation Markov chain, Gillespie engine and master-equation oracle

#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "hopdyn/jumps.hpp"

namespace hopdyn {

/// Occupation η_x ∈ {0,1} per occupied impurity, in canonical site order.
struct Configuration {
    std::vector<std::uint8_t> eta;

    std::size_t size() const { return eta.size(); }
    std::size_t particles() const;
    /// Bit k = η_k, matching the Fock bitmask basis (n ≤ 63).
    std::uint64_t mask() const;
};

/// Continuous-time chain with hop x→y at Γ_{x→y}η_x(1−η_y), exit at Γ_{x→★}η_x and
/// entry at Γ_{★→x}(1−η_x).
class ClassicalGenerator {
public:
    struct Neighbor {
        std::uint32_t site;     // target y
        std::uint32_t reverse;  // position of x in y's neighbor list
        double rate;            // Γ_{x→y}
    };

    explicit ClassicalGenerator(const JumpCatalogue& catalogue);

    const DisorderRealization& omega() const { return omega_; }
    std::size_t size() const { return sites_.size(); }
    const std::vector<Point>& sites() const { return sites_; }
    const std::vector<double>& energies() const { return energies_; }
    const std::vector<Neighbor>& neighbors(std::size_t x) const { return neighbors_[x]; }
    double rate_out(std::size_t x) const { return out_[x]; }
    double rate_in(std::size_t x) const { return in_[x]; }
    /// p_x = 1/(1 + e^{β(ε_x−μ)}).
    double fermi_dirac(std::size_t x) const;

    /// (Qf)(η) = Σ_{η'} c(η→η')(f(η') − f(η)) over the 2^n configurations.
    Eigen::VectorXd apply(const Eigen::VectorXd& f) const;
    /// Dense Q[η][η'] = c(η→η'), diagonal = −total exit rate; n ≤ 12.
    Eigen::MatrixXd rate_matrix() const;
    /// Largest log-space violation of π(η)c(η→η') = π(η')c(η'→η) for the product state π.
    double detailed_balance_deviation() const;

private:
    DisorderRealization omega_;
    std::vector<Point> sites_;
    std::vector<double> energies_;
    std::vector<std::vector<Neighbor>> neighbors_;
    std::vector<double> out_;
    std::vector<double> in_;
};

ClassicalGenerator classical_generator(const DisorderRealization& omega, const JumpCatalogue& catalogue);

enum class InitialState { equilibrium, empty, full };

/// Independent Bernoulli(p_x) draws (equilibrium) or a constant configuration.
Configuration initial_configuration(const ClassicalGenerator& gen, InitialState mode, std::uint64_t seed);

/// Σ over enabled transitions of their rates in configuration η.
double total_rate(const ClassicalGenerator& gen, const Configuration& eta);

struct KmcOptions {
    double t_max{1.0};
    std::uint64_t seed{0};
    std::size_t max_events{0};        // 0 = unlimited
    bool record_events{false};
    int time_batches{10};             // equal slices of [0, t_max] for batch means
    std::size_t rebuild_interval{1u << 16};
    double histogram_bin{0.5};        // hop-distance histogram bin width
    double energy_bin{0.25};          // |ε_y − ε_x| histogram bin width
};

struct KmcEvent {
    double time{0.0};
    JumpKind kind{JumpKind::hop};
    std::uint32_t x{0};
    std::uint32_t y{0};
};

struct KmcStats {
    std::size_t hops{0};
    std::size_t exits{0};
    std::size_t entries{0};
    double hop_distance_sum{0.0};
    double energy_exchange_sum{0.0};   // Σ |ε_y − ε_x| over hops
    std::vector<std::size_t> hop_histogram;
    std::vector<std::size_t> energy_histogram;
    /// occupied_time[b][x]: time site x spent occupied during batch b.
    std::vector<std::vector<double>> occupied_time;
    std::vector<double> batch_length;

    std::size_t events() const { return hops + exits + entries; }
};

struct KmcTrajectory {
    std::vector<KmcEvent> events;   // only when record_events
    Configuration final;
    KmcStats stats;
    double t_end{0.0};
    bool stalled{false};            // total rate vanished before t_max
};

/// Exact CTMC simulation; event selection through a site-level partial-sum tree plus one
/// tree per site over its hop targets.
KmcTrajectory gillespie_run(const ClassicalGenerator& gen, const Configuration& eta0, const KmcOptions& opts);

struct StationaryResult {
    Eigen::VectorXd distribution;  // indexed by configuration mask; empty unless unique
    std::size_t null_dimension{0};
    double max_deviation{0.0};     // from the product Fermi–Dirac law
};

StationaryResult brute_force_stationary(const ClassicalGenerator& gen);
Eigen::VectorXd product_fermi_dirac(const ClassicalGenerator& gen);

struct HopStatistics {
    bool empty{true};
    double mean_hop_distance{0.0};
    double mean_abs_energy_exchange{0.0};
    double hop_rate{0.0};        // hops per unit time
    double exit_rate{0.0};
    double entry_rate{0.0};
    double hop_rate_per_site{0.0};
};

HopStatistics hop_statistics(const KmcTrajectory& traj, const ClassicalGenerator& gen);

struct OccupationCheck {
    std::size_t sites{0};
    std::size_t within{0};         // sites within `sigmas` batch-means standard errors
    double fraction{0.0};
    std::size_t batches{0};
    std::vector<double> mean;      // per-site empirical occupation
    std::vector<double> stderr_;   // batch-means standard error
    std::vector<double> target;    // p_x
};

/// Pools the batches of all replicas; each batch mean is the occupied-time fraction.
OccupationCheck occupation_check(const std::vector<KmcTrajectory>& replicas, const ClassicalGenerator& gen,
                                 double sigmas = 4.0);

} // namespace hopdyn
