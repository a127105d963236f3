// spectra.cpp: GNS generator matrix assembly and spectral analysis

#include "hopdyn/spectra.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include <Eigen/Eigenvalues>
#include <Eigen/SparseCore>

#include "hopdyn/errors.hpp"

namespace hopdyn {

Eigen::MatrixXcd assemble_from_form(const GnsBasis& basis, const Generator& gen)
{
    const auto n = static_cast<Eigen::Index>(basis.space()->dim());
    const auto size = static_cast<Eigen::Index>(basis.size());
    Eigen::VectorXd sqrt_r = basis.gibbs().cwiseSqrt();
    Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(size, size);
    std::vector<Eigen::Triplet<cplx>> trip;
    for (std::size_t g = 0; g < gen.operators().size(); ++g) {
        const MonomialMatrix& l = gen.operators()[g];
        const bool l_odd = gen.jumps()[g].degree() == Degree::odd;
        trip.clear();
        for (Eigen::Index j = 0; j < size; ++j) {
            const MonomialMatrix& e = basis.monomial(static_cast<std::size_t>(j));
            const double sign = (l_odd && basis.element(static_cast<std::size_t>(j)).degree() == Degree::odd) ? -1.0 : 1.0;
            for (Eigen::Index c = 0; c < n; ++c) {
                // (L e)(·, c)
                const std::int32_t mid = e.row[c];
                if (mid >= 0 && l.row[mid] >= 0) {
                    trip.emplace_back(l.row[mid] + c * n, j, sqrt_r[c] * l.val[mid] * e.val[c]);
                }
                // −sign (e L)(·, c)
                const std::int32_t mid2 = l.row[c];
                if (mid2 >= 0 && e.row[mid2] >= 0) {
                    trip.emplace_back(e.row[mid2] + c * n, j, -sign * sqrt_r[c] * e.val[mid2] * l.val[c]);
                }
            }
        }
        Eigen::SparseMatrix<cplx> w(n * n, size);
        w.setFromTriplets(trip.begin(), trip.end());
        const Eigen::SparseMatrix<cplx> wtw = Eigen::SparseMatrix<cplx>(w.adjoint()) * w;
        for (Eigen::Index c = 0; c < wtw.outerSize(); ++c) {
            for (Eigen::SparseMatrix<cplx>::InnerIterator it(wtw, c); it; ++it) m(it.row(), it.col()) += 0.5 * it.value();
        }
    }
    return m;
}

Eigen::MatrixXcd assemble_from_projection(const GnsBasis& basis, const Generator& gen)
{
    const auto size = static_cast<Eigen::Index>(basis.size());
    Eigen::MatrixXcd m(size, size);
    for (Eigen::Index j = 0; j < size; ++j) {
        const Eigen::MatrixXcd d = gen.dissipate(basis.monomial(static_cast<std::size_t>(j)).to_dense());
        for (Eigen::Index i = 0; i < size; ++i) {
            m(i, j) = weighted_inner(basis.gibbs(), basis.monomial(static_cast<std::size_t>(i)), d);
        }
    }
    return m;
}

GnsGeneratorMatrix assemble(const std::shared_ptr<const GnsBasis>& basis, const JumpCatalogue& catalogue, Parts parts,
                            AssemblyOptions options)
{
    GeneratorSpec spec{catalogue, false, parts};
    const Generator gen(spec, basis->space());
    const Eigen::MatrixXcd mb = assemble_from_projection(*basis, gen);

    GnsGeneratorMatrix out;
    out.basis = basis;
    out.parts = parts;
    if (options.cross_check) {
        const Eigen::MatrixXcd ma = assemble_from_form(*basis, gen);
        out.path_deviation = mb.size() ? (ma - mb).cwiseAbs().maxCoeff() : 0.0;
        if (out.path_deviation > options.tol) {
            std::ostringstream os;
            os << "GNS matrix assembly routes disagree by " << out.path_deviation;
            throw ConsistencyError(os.str());
        }
    }
    out.imaginary_part = mb.size() ? mb.imag().cwiseAbs().maxCoeff() : 0.0;
    const Eigen::MatrixXd re = mb.real();
    out.asymmetry = re.size() ? (re - re.transpose()).cwiseAbs().maxCoeff() : 0.0;
    out.matrix = 0.5 * (re + re.transpose());
    return out;
}

double star_site_rate(const DisorderRealization& omega, const Point& x)
{
    const ModelParams& p = omega.params();
    const auto e = omega.energy(x);
    if (!e) throw SiteError("site is not occupied in the realization");
    return 0.5 * p.bath_scale(*e) * (1.0 + std::exp(-p.beta * std::abs(*e - p.mu)));
}

double star_eigenvalue(const GnsBasis& basis, const GnsBasisElement& e)
{
    double total = 0.0;
    const auto& sites = basis.space()->sites();
    for (std::size_t k = 0; k < sites.size(); ++k) {
        const std::uint32_t bit = std::uint32_t{1} << k;
        if ((e.X | e.Y | e.Z) & bit) {
            const double g = star_site_rate(basis.omega(), sites[k]);
            total += (e.Z & bit) ? 2.0 * g : g;
        }
    }
    return total;
}

// ---------------------------------------------------------------------------
// Spectrum

Spectrum spectrum(const Eigen::MatrixXd& m, bool with_vectors)
{
    const Eigen::Index size = m.rows();
    std::vector<Eigen::Index> parent(static_cast<std::size_t>(size));
    std::iota(parent.begin(), parent.end(), Eigen::Index{0});
    auto find = [&](Eigen::Index x) {
        while (parent[x] != x) {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        return x;
    };
    for (Eigen::Index j = 0; j < size; ++j) {
        for (Eigen::Index i = 0; i < j; ++i) {
            if (m(i, j) != 0.0 || m(j, i) != 0.0) parent[find(i)] = find(j);
        }
    }
    std::vector<std::vector<Eigen::Index>> groups(static_cast<std::size_t>(size));
    for (Eigen::Index i = 0; i < size; ++i) groups[find(i)].push_back(i);

    Spectrum s;
    std::vector<std::pair<double, Eigen::Index>> order;  // (value, column in `vecs`)
    Eigen::MatrixXd vecs;
    if (with_vectors) vecs = Eigen::MatrixXd::Zero(size, size);
    Eigen::Index next = 0;
    for (const auto& g : groups) {
        if (g.empty()) continue;
        const auto bs = static_cast<Eigen::Index>(g.size());
        Eigen::MatrixXd blk(bs, bs);
        for (Eigen::Index a = 0; a < bs; ++a) {
            for (Eigen::Index b = 0; b < bs; ++b) blk(a, b) = m(g[a], g[b]);
        }
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(blk, with_vectors ? Eigen::ComputeEigenvectors
                                                                             : Eigen::EigenvaluesOnly);
        if (es.info() != Eigen::Success) throw ConvergenceError("symmetric eigensolver did not converge");
        if (with_vectors) {
            const Eigen::MatrixXd res = blk * es.eigenvectors() - es.eigenvectors() * es.eigenvalues().asDiagonal();
            for (Eigen::Index c = 0; c < bs; ++c) s.max_residual = std::max(s.max_residual, res.col(c).norm());
        }
        for (Eigen::Index c = 0; c < bs; ++c) {
            order.emplace_back(es.eigenvalues()[c], next);
            if (with_vectors) {
                for (Eigen::Index a = 0; a < bs; ++a) vecs(g[a], next) = es.eigenvectors()(a, c);
            }
            ++next;
        }
        ++s.block_count;
        s.largest_block = std::max(s.largest_block, g.size());
    }
    std::sort(order.begin(), order.end());
    s.values.resize(size);
    if (with_vectors) s.vectors.resize(size, size);
    for (Eigen::Index k = 0; k < size; ++k) {
        s.values[k] = order[static_cast<std::size_t>(k)].first;
        if (with_vectors) s.vectors.col(k) = vecs.col(order[static_cast<std::size_t>(k)].second);
    }
    return s;
}

Spectrum spectrum(const GnsGeneratorMatrix& m, bool with_vectors)
{
    return spectrum(m.matrix, with_vectors);
}

GapReport kernel_and_gap(const GnsGeneratorMatrix& m, const Spectrum& s)
{
    GapReport r;
    r.bound = 0.5 * m.basis->omega().params().gamma_star;
    if (m.basis->omega().params().rate_modulation && m.basis->omega().params().rate_modulation->bath) {
        r.bound = 0.5 * m.basis->omega().params().rate_modulation->bath_floor;
    }
    r.gap = std::numeric_limits<double>::infinity();
    for (Eigen::Index k = 0; k < s.values.size(); ++k) {
        if (s.values[k] <= kKernelThreshold) {
            ++r.kernel_dim;
        } else {
            r.gap = std::min(r.gap, s.values[k]);
        }
    }
    r.margin = r.gap - r.bound;
    r.unique = r.kernel_dim == 1;
    if (r.unique && s.vectors.size()) r.kernel_overlap = std::abs(s.vectors(0, 0));
    return r;
}

GapReport kernel_and_gap(const GnsGeneratorMatrix& m)
{
    return kernel_and_gap(m, spectrum(m, true));
}

KRestriction restrict_to_K(const GnsGeneratorMatrix& m, double tol)
{
    KRestriction r;
    const GnsBasis& basis = *m.basis;
    std::vector<bool> in_k(basis.size(), false);
    for (std::size_t i = 0; i < basis.size(); ++i) {
        const GnsBasisElement& e = basis.element(i);
        if (e.X == 0 && e.Y == 0 && e.Z != 0) {
            r.indices.push_back(i);
            in_k[i] = true;
        }
    }
    const auto k = static_cast<Eigen::Index>(r.indices.size());
    r.matrix.resize(k, k);
    for (Eigen::Index a = 0; a < k; ++a) {
        for (Eigen::Index b = 0; b < k; ++b) r.matrix(a, b) = m.matrix(r.indices[a], r.indices[b]);
    }
    for (std::size_t i : r.indices) {
        for (std::size_t j = 0; j < basis.size(); ++j) {
            if (in_k[j]) continue;
            const auto ii = static_cast<Eigen::Index>(i);
            const auto jj = static_cast<Eigen::Index>(j);
            r.coupling = std::max({r.coupling, std::abs(m.matrix(ii, jj)), std::abs(m.matrix(jj, ii))});
        }
    }
    if (r.coupling > tol) {
        std::ostringstream os;
        os << "subspace of sigma monomials is not invariant, coupling " << r.coupling;
        throw ConsistencyError(os.str());
    }
    r.min_eigenvalue = k ? spectrum(r.matrix, false).values[0] : std::numeric_limits<double>::infinity();
    return r;
}

// ---------------------------------------------------------------------------
// Return to equilibrium

DecaySeries return_to_equilibrium(const GnsGeneratorMatrix& m, const FockOperator& a,
                                  const Eigen::MatrixXcd& rho_tilde, const std::vector<double>& t_grid)
{
    const GnsBasis& basis = *m.basis;
    const auto n = static_cast<Eigen::Index>(basis.space()->dim());
    if (rho_tilde.rows() != n || rho_tilde.cols() != n) throw DomainError("initial state has the wrong dimension");
    if ((rho_tilde - rho_tilde.adjoint()).cwiseAbs().maxCoeff() > 1e-12) throw DomainError("initial state is not Hermitian");
    if (std::abs(rho_tilde.trace() - cplx{1.0, 0.0}) > 1e-12) throw DomainError("initial state does not have unit trace");
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(rho_tilde, Eigen::EigenvaluesOnly);
    if (es.eigenvalues().minCoeff() < -1e-12) throw DomainError("initial state is not positive");
    for (std::size_t i = 0; i < t_grid.size(); ++i) {
        if (t_grid[i] < 0.0 || (i > 0 && t_grid[i] < t_grid[i - 1])) {
            throw DomainError("time grid must be ascending and nonnegative");
        }
    }

    const Spectrum s = spectrum(m, true);
    const GapReport gr = kernel_and_gap(m, s);
    const Eigen::VectorXcd c0 = gns_coords(basis, a.matrix());
    const Eigen::VectorXcd y0 = s.vectors.transpose().cast<cplx>() * c0;
    const cplx rho_a = c0[0];
    const double norm0 = c0.tail(c0.size() - 1).norm();

    DecaySeries out;
    out.gap = gr.gap;
    out.expectation = rho_a.real();
    std::vector<std::pair<double, double>> fit;
    for (double t : t_grid) {
        Eigen::VectorXcd y = y0;
        for (Eigen::Index k = 0; k < y.size(); ++k) y[k] *= std::exp(-t * s.values[k]);
        const Eigen::VectorXcd ct = s.vectors.cast<cplx>() * y;
        DecayPoint p;
        p.t = t;
        p.gns_norm = ct.tail(ct.size() - 1).norm();
        p.bound = std::exp(-gr.gap * t) * norm0 * (1.0 + 1e-8);
        const Eigen::MatrixXcd evolved = gns_reconstruct(basis, ct);
        p.state_deviation = std::abs((rho_tilde * evolved).trace() - rho_a);
        if (p.gns_norm > p.bound) out.bound_holds = false;
        if (p.gns_norm > 1e-12 * std::max(norm0, 1e-300)) fit.emplace_back(t, std::log(p.gns_norm));
        out.points.push_back(p);
    }
    if (fit.size() >= 2) {
        double st = 0.0, sl = 0.0, stt = 0.0, stl = 0.0;
        for (const auto& [t, l] : fit) {
            st += t;
            sl += l;
            stt += t * t;
            stl += t * l;
        }
        const double k = static_cast<double>(fit.size());
        const double den = k * stt - st * st;
        if (den > 0.0) out.fitted_rate = -(k * stl - st * sl) / den;
    }
    return out;
}

} // namespace hopdyn
