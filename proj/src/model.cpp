// model.cpp: Disorder sampling, box geometry and tunneling normalization

#include "hopdyn/model.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "hopdyn/errors.hpp"

namespace hopdyn {

namespace {

// mt19937_64 output is fixed by the standard; the conversion below is too, unlike
// std::uniform_real_distribution.
double unit_uniform(std::mt19937_64& rng)
{
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

void require(bool ok, const std::string& msg)
{
    if (!ok) throw ConfigError(msg);
}

} // namespace

RateModulation make_cosine_modulation(double gamma0, double gamma_star, const CosineProfile& profile)
{
    if (std::abs(profile.hop_amplitude) >= 1.0 || std::abs(profile.bath_amplitude) >= 1.0) {
        throw ConfigError("cosine rate profile amplitudes must lie in (-1, 1)");
    }
    RateModulation m;
    const double a = profile.hop_amplitude;
    const double b = profile.bath_amplitude;
    const double k = profile.frequency;
    m.hop = [gamma0, a, k](double ex, double ey, double) {
        return gamma0 * (1.0 + a * std::cos(k * (ex + ey)));
    };
    m.hop_floor = gamma0 * (1.0 - std::abs(a));
    m.bath = [gamma_star, b, k](double ex, double) {
        return gamma_star * (1.0 + b * std::cos(k * ex));
    };
    m.bath_floor = gamma_star * (1.0 - std::abs(b));
    m.profile = profile;
    return m;
}

void ModelParams::validate() const
{
    require(std::isfinite(beta) && beta > 0.0, "beta must be positive");
    require(std::isfinite(mu), "mu must be finite");
    require(std::isfinite(gamma0) && gamma0 > 0.0, "gamma0 must be positive");
    require(std::isfinite(gamma_star) && gamma_star > 0.0, "gamma_star must be positive");
    require(std::isfinite(r_loc) && r_loc > 0.0, "r_loc must be positive");
    require(std::isfinite(delta.lo) && std::isfinite(delta.hi) && delta.lo <= delta.hi,
            "delta must be a nonempty compact interval");
    require(dim >= 1, "dim must be at least 1");
    require(box.size() == static_cast<std::size_t>(dim), "box must have one edge per dimension");
    for (int e : box) require(e >= 1, "box edges must be positive (empty box)");
    require(impurity_density >= 0.0 && impurity_density <= 1.0, "impurity_density must lie in [0, 1]");

    if (!rate_modulation) return;
    const RateModulation& m = *rate_modulation;
    // Sampled check of the declared floors on Δ×Δ×(0,∞), β on a log grid.
    const int grid = 9;
    const double betas[] = {1e-3, 1e-2, 0.1, 1.0, 10.0, 100.0, 1e3};
    auto energy_at = [&](int i) { return delta.lo + delta.width() * i / (grid - 1); };
    if (m.hop) {
        require(m.hop_floor > 0.0, "declared hop-rate floor must be positive");
        for (double b : betas) {
            for (int i = 0; i < grid; ++i) {
                for (int j = 0; j < grid; ++j) {
                    const double ex = energy_at(i);
                    const double ey = energy_at(j);
                    const double v = m.hop(ex, ey, b);
                    require(std::isfinite(v) && v >= m.hop_floor * (1.0 - 1e-12),
                            "hop-rate modulation falls below its declared floor");
                    require(std::abs(v - m.hop(ey, ex, b)) <= 1e-12 * std::abs(v),
                            "hop-rate modulation must be symmetric in (eps_x, eps_y)");
                }
            }
        }
    }
    if (m.bath) {
        require(m.bath_floor > 0.0, "declared bath-rate floor must be positive");
        for (double b : betas) {
            for (int i = 0; i < grid; ++i) {
                const double v = m.bath(energy_at(i), b);
                require(std::isfinite(v) && v >= m.bath_floor * (1.0 - 1e-12),
                        "bath-rate modulation falls below its declared floor");
            }
        }
    }
}

double ModelParams::hop_scale(double eps_x, double eps_y) const
{
    if (rate_modulation && rate_modulation->hop) return rate_modulation->hop(eps_x, eps_y, beta);
    return gamma0;
}

double ModelParams::bath_scale(double eps_x) const
{
    if (rate_modulation && rate_modulation->bath) return rate_modulation->bath(eps_x, beta);
    return gamma_star;
}

Box::Box(std::vector<int> edges) : edges_(std::move(edges))
{
    volume_ = 1;
    lo_.reserve(edges_.size());
    for (int e : edges_) {
        if (e < 1) throw ConfigError("box edges must be positive");
        lo_.push_back(-((e - 1) / 2));
        volume_ *= static_cast<std::size_t>(e);
    }
}

bool Box::contains(const Point& p) const
{
    if (p.size() != edges_.size()) return false;
    for (std::size_t i = 0; i < p.size(); ++i) {
        if (p[i] < lo_[i] || p[i] >= lo_[i] + edges_[i]) return false;
    }
    return true;
}

std::size_t Box::index(const Point& p) const
{
    std::size_t idx = 0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        idx = idx * static_cast<std::size_t>(edges_[i]) + static_cast<std::size_t>(p[i] - lo_[i]);
    }
    return idx;
}

Point Box::point(std::size_t index) const
{
    Point p(edges_.size());
    for (std::size_t i = edges_.size(); i-- > 0;) {
        const auto e = static_cast<std::size_t>(edges_[i]);
        p[i] = static_cast<int>(index % e) + lo_[i];
        index /= e;
    }
    return p;
}

Point Box::wrap(const Point& p) const
{
    Point q(p.size());
    for (std::size_t i = 0; i < p.size(); ++i) {
        int off = (p[i] - lo_[i]) % edges_[i];
        if (off < 0) off += edges_[i];
        q[i] = off + lo_[i];
    }
    return q;
}

double distance(const Point& a, const Point& b, Metric metric)
{
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = std::abs(static_cast<double>(a[i] - b[i]));
        if (metric == Metric::sup) {
            acc = std::max(acc, d);
        } else {
            acc += d * d;
        }
    }
    return metric == Metric::sup ? acc : std::sqrt(acc);
}

double periodic_distance(const Point& a, const Point& b, const Box& box, Metric metric)
{
    Point delta(a.size(), 0);
    Point zero(a.size(), 0);
    for (std::size_t i = 0; i < a.size(); ++i) {
        const int L = box.edges()[i];
        int d = std::abs(a[i] - b[i]) % L;
        delta[i] = std::min(d, L - d);
    }
    return distance(delta, zero, metric);
}

DisorderRealization::DisorderRealization(ModelParams params, std::vector<Impurity> impurities,
                                         std::optional<std::uint64_t> seed, Point translation)
    : params_(std::move(params)), box_(params_.box), impurities_(std::move(impurities)),
      seed_(seed), translation_(std::move(translation))
{
    params_.validate();
    if (translation_.empty()) translation_.assign(static_cast<std::size_t>(params_.dim), 0);
    std::sort(impurities_.begin(), impurities_.end(),
              [](const Impurity& a, const Impurity& b) { return a.position < b.position; });
    rank_by_box_index_.assign(box_.volume(), -1);
    for (std::size_t k = 0; k < impurities_.size(); ++k) {
        const Impurity& imp = impurities_[k];
        if (!box_.contains(imp.position)) {
            std::ostringstream os;
            os << "impurity " << k << " lies outside the box";
            throw ConfigError(os.str());
        }
        if (!params_.delta.contains(imp.energy)) throw ConfigError("impurity energy outside the band");
        const std::size_t idx = box_.index(imp.position);
        if (rank_by_box_index_[idx] >= 0) throw ConfigError("duplicate impurity position");
        rank_by_box_index_[idx] = static_cast<std::int32_t>(k);
    }
}

bool DisorderRealization::occupied(const Point& p) const
{
    return rank(p).has_value();
}

std::optional<double> DisorderRealization::energy(const Point& p) const
{
    const auto r = rank(p);
    if (!r) return std::nullopt;
    return impurities_[*r].energy;
}

std::optional<std::size_t> DisorderRealization::rank(const Point& p) const
{
    if (!box_.contains(p)) return std::nullopt;
    const std::int32_t r = rank_by_box_index_[box_.index(p)];
    if (r < 0) return std::nullopt;
    return static_cast<std::size_t>(r);
}

DisorderRealization DisorderRealization::with_params(const ModelParams& params) const
{
    if (params.box != params_.box) throw ConfigError("with_params cannot change the box");
    return DisorderRealization(params, impurities_, seed_, translation_);
}

DisorderRealization sample_disorder(const ModelParams& params, std::uint64_t seed)
{
    params.validate();
    const Box box(params.box);
    std::mt19937_64 rng(seed);
    std::vector<Impurity> imps;
    for (std::size_t i = 0; i < box.volume(); ++i) {
        // Both draws happen for every site so that ε is independent of s.
        const double us = unit_uniform(rng);
        const double ue = unit_uniform(rng);
        if (us < params.impurity_density) {
            const double e = params.delta.lo + params.delta.width() * ue;
            imps.push_back({box.point(i), std::min(e, params.delta.hi)});
        }
    }
    return DisorderRealization(params, std::move(imps), seed);
}

DisorderRealization translate(const DisorderRealization& omega, const Point& a)
{
    const Box& box = omega.box();
    if (a.size() != static_cast<std::size_t>(box.dim())) {
        throw ConfigError("translation vector has wrong dimension");
    }
    std::vector<Impurity> imps;
    imps.reserve(omega.occupied_count());
    for (const Impurity& imp : omega.impurities()) {
        Point p = imp.position;
        for (std::size_t i = 0; i < p.size(); ++i) p[i] += a[i];
        imps.push_back({box.wrap(p), imp.energy});
    }
    Point shift = omega.translation();
    for (std::size_t i = 0; i < shift.size(); ++i) {
        const int L = box.edges()[i];
        shift[i] = ((shift[i] + a[i]) % L + L) % L;
    }
    return DisorderRealization(omega.params(), std::move(imps), omega.seed(), std::move(shift));
}

double normalization_z(const DisorderRealization& omega)
{
    const ModelParams& p = omega.params();
    const Point origin(static_cast<std::size_t>(p.dim), 0);
    double z = 0.0;
    if (p.z_mode == ZMode::realized_origin) {
        if (omega.occupied_count() == 0) {
            throw DegenerateNormalization("realized_origin normalization over an empty site set");
        }
        for (const Impurity& imp : omega.impurities()) {
            z += std::exp(-distance(imp.position, origin, p.metric) / p.r_loc);
        }
        return z;
    }
    for (std::size_t i = 0; i < omega.box().volume(); ++i) {
        const Point m = omega.box().point(i);
        if (m == origin) continue;
        z += std::exp(-distance(m, origin, p.metric) / p.r_loc);
    }
    if (z == 0.0) {
        throw DegenerateNormalization("full_lattice normalization over a single-site box");
    }
    return z;
}

const char* to_string(Metric m)
{
    return m == Metric::sup ? "sup" : "euclidean";
}

const char* to_string(ZMode m)
{
    return m == ZMode::realized_origin ? "realized_origin" : "full_lattice";
}

Metric metric_from_string(const std::string& s)
{
    if (s == "euclidean") return Metric::euclidean;
    if (s == "sup") return Metric::sup;
    throw ConfigError("unknown metric '" + s + "'");
}

ZMode z_mode_from_string(const std::string& s)
{
    if (s == "full_lattice") return ZMode::full_lattice;
    if (s == "realized_origin") return ZMode::realized_origin;
    throw ConfigError("unknown z_mode '" + s + "'");
}

} // namespace hopdyn
