// model.hpp: Disorder realizations ω = (s, ε) on a finite box and model parameters

#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace hopdyn {

/// Lattice point in Z^d; ordering is lexicographic, which fixes the canonical site order.
using Point = std::vector<int>;

enum class Metric { euclidean, sup };

/// How the tunneling normalization Z is computed.
///   full_lattice     sum over the nonzero points of the box (independent of s)
///   realized_origin  sum over realized impurity sites, anchored at the origin
enum class ZMode { full_lattice, realized_origin };

struct EnergyInterval {
    double lo{-1.0};
    double hi{1.0};
    double width() const { return hi - lo; }
    bool contains(double e) const { return e >= lo && e <= hi; }
};

/// Rate profile with a closed form, so that configs carrying it can round-trip through JSON.
///   Γ₀(ε_x, ε_y, β) = gamma0     · (1 + hop_amplitude  · cos(frequency · (ε_x + ε_y)))
///   Γ★(ε_x, β)      = gamma_star · (1 + bath_amplitude · cos(frequency · ε_x))
struct CosineProfile {
    double hop_amplitude{0.0};
    double bath_amplitude{0.0};
    double frequency{1.0};
};

/// Energy-dependent replacements for the constant rate scales Γ₀ and Γ★.
/// Either function may be empty, in which case the constant from ModelParams is used.
struct RateModulation {
    std::function<double(double, double, double)> hop;  // (ε_x, ε_y, β), symmetric in ε
    double hop_floor{0.0};                              // declared infimum, must be > 0
    std::function<double(double, double)> bath;         // (ε_x, β)
    double bath_floor{0.0};
    std::optional<CosineProfile> profile;               // set when built from a profile
};

RateModulation make_cosine_modulation(double gamma0, double gamma_star, const CosineProfile& profile);

struct ModelParams {
    double beta{1.0};          // inverse temperature (1/energy)
    double mu{0.0};            // chemical potential
    double gamma0{1.0};        // hop rate scale
    double gamma_star{1.0};    // bath exchange rate scale
    double r_loc{1.0};         // localization length (lattice units)
    EnergyInterval delta{};    // impurity band
    int dim{2};
    std::vector<int> box{2, 2};  // edge lengths, one per dimension
    double impurity_density{1.0};
    Metric metric{Metric::euclidean};
    ZMode z_mode{ZMode::full_lattice};
    std::optional<RateModulation> rate_modulation;

    /// Throws ConfigError on any violated invariant, including modulation floors.
    void validate() const;

    double hop_scale(double eps_x, double eps_y) const;
    double bath_scale(double eps_x) const;
};

/// Axis-aligned box of lattice sites with the origin at (or next to) its center:
/// axis i covers [lo_i, lo_i + L_i - 1] with lo_i = -floor((L_i - 1) / 2).
class Box {
public:
    Box() = default;
    explicit Box(std::vector<int> edges);

    int dim() const { return static_cast<int>(edges_.size()); }
    const std::vector<int>& edges() const { return edges_; }
    std::size_t volume() const { return volume_; }
    int lower(int axis) const { return lo_[static_cast<std::size_t>(axis)]; }

    bool contains(const Point& p) const;
    /// Row-major index with the last axis fastest; agrees with the lexicographic order.
    std::size_t index(const Point& p) const;
    Point point(std::size_t index) const;
    /// Periodic wrap into the box.
    Point wrap(const Point& p) const;

private:
    std::vector<int> edges_;
    std::vector<int> lo_;
    std::size_t volume_{0};
};

double distance(const Point& a, const Point& b, Metric metric);
/// Shortest distance on the torus obtained by wrapping `box` periodically.
double periodic_distance(const Point& a, const Point& b, const Box& box, Metric metric);

struct Impurity {
    Point position;
    double energy{0.0};
};

/// The random pair ω = (s, ε) restricted to a finite box. Immutable after construction.
class DisorderRealization {
public:
    /// Build from explicit impurities (positions must lie in the box, be distinct, and
    /// carry energies inside the band). Sorted into canonical order.
    DisorderRealization(ModelParams params, std::vector<Impurity> impurities,
                        std::optional<std::uint64_t> seed = std::nullopt,
                        Point translation = {});

    const ModelParams& params() const { return params_; }
    const Box& box() const { return box_; }
    std::optional<std::uint64_t> seed() const { return seed_; }
    /// Accumulated periodic translation applied after sampling (zero vector if none).
    const Point& translation() const { return translation_; }

    /// Impurities in canonical (lexicographic) order; index = Fock-space rank.
    const std::vector<Impurity>& impurities() const { return impurities_; }
    std::size_t occupied_count() const { return impurities_.size(); }

    bool occupied(const Point& p) const;
    std::optional<double> energy(const Point& p) const;
    /// Rank of an occupied site in the canonical order, or nullopt.
    std::optional<std::size_t> rank(const Point& p) const;

    /// Same disorder, different thermodynamic parameters (β, μ, rates).
    DisorderRealization with_params(const ModelParams& params) const;

private:
    ModelParams params_;
    Box box_;
    std::vector<Impurity> impurities_;
    std::vector<std::int32_t> rank_by_box_index_;  // -1 for empty sites
    std::optional<std::uint64_t> seed_;
    Point translation_;
};

/// s_x iid Bernoulli(c), ε_x iid Uniform(Δ) independent of s; deterministic in the seed.
DisorderRealization sample_disorder(const ModelParams& params, std::uint64_t seed);

/// Periodic translation: (τ^a s)_x = s_{x-a}, (τ^a ε)_x = ε_{x-a}.
DisorderRealization translate(const DisorderRealization& omega, const Point& a);

/// Tunneling normalization Z (see ZMode).
double normalization_z(const DisorderRealization& omega);

const char* to_string(Metric m);
const char* to_string(ZMode m);
Metric metric_from_string(const std::string& s);
ZMode z_mode_from_string(const std::string& s);

} // namespace hopdyn
