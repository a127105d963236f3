// fock.cpp: CAR generators, grading and coherent evolution

#include "hopdyn/fock.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "hopdyn/errors.hpp"

namespace hopdyn {

FockSpace::FockSpace(std::vector<Point> sites) : sites_(std::move(sites))
{
    for (std::size_t i = 1; i < sites_.size(); ++i) {
        if (!(sites_[i - 1] < sites_[i])) {
            throw ConfigError("Fock space sites must be strictly increasing in canonical order");
        }
    }
    if (sites_.size() > kMaxFockSites) {
        std::ostringstream os;
        os << "Fock space with " << sites_.size() << " sites exceeds the cap of " << kMaxFockSites;
        throw SizeError(os.str());
    }
}

std::shared_ptr<const FockSpace> FockSpace::from_realization(const DisorderRealization& omega)
{
    std::vector<Point> sites;
    sites.reserve(omega.occupied_count());
    for (const Impurity& imp : omega.impurities()) sites.push_back(imp.position);
    return std::make_shared<const FockSpace>(std::move(sites));
}

std::size_t FockSpace::rank_of(const Point& p) const
{
    auto it = std::lower_bound(sites_.begin(), sites_.end(), p);
    if (it == sites_.end() || *it != p) throw SiteError("site is not part of the Fock space");
    return static_cast<std::size_t>(it - sites_.begin());
}

const char* to_string(Degree d)
{
    switch (d) {
    case Degree::even: return "even";
    case Degree::odd: return "odd";
    default: return "mixed";
    }
}

// ---------------------------------------------------------------------------
// MonomialMatrix

Eigen::MatrixXcd MonomialMatrix::to_dense() const
{
    const auto n = static_cast<Eigen::Index>(dim());
    Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(n, n);
    for (Eigen::Index c = 0; c < n; ++c) {
        if (row[c] >= 0) m(row[c], c) = val[c];
    }
    return m;
}

MonomialMatrix MonomialMatrix::adjoint() const
{
    MonomialMatrix out;
    out.row.assign(dim(), -1);
    out.val.assign(dim(), cplx{0.0, 0.0});
    for (std::size_t c = 0; c < dim(); ++c) {
        if (row[c] < 0) continue;
        out.row[row[c]] = static_cast<std::int32_t>(c);
        out.val[row[c]] = std::conj(val[c]);
    }
    return out;
}

MonomialMatrix MonomialMatrix::scaled(cplx s) const
{
    MonomialMatrix out = *this;
    for (auto& v : out.val) v *= s;
    return out;
}

Degree MonomialMatrix::degree() const
{
    bool even = false;
    bool odd = false;
    for (std::size_t c = 0; c < dim(); ++c) {
        if (row[c] < 0 || val[c] == cplx{0.0, 0.0}) continue;
        (bit_parity(c) == bit_parity(static_cast<std::uint64_t>(row[c])) ? even : odd) = true;
    }
    if (even && odd) return Degree::mixed;
    return odd ? Degree::odd : Degree::even;
}

MonomialMatrix MonomialMatrix::identity(std::size_t dim)
{
    MonomialMatrix m;
    m.row.resize(dim);
    for (std::size_t c = 0; c < dim; ++c) m.row[c] = static_cast<std::int32_t>(c);
    m.val.assign(dim, cplx{1.0, 0.0});
    return m;
}

MonomialMatrix MonomialMatrix::diagonal(const Eigen::VectorXcd& d)
{
    MonomialMatrix m = identity(static_cast<std::size_t>(d.size()));
    for (Eigen::Index c = 0; c < d.size(); ++c) m.val[c] = d[c];
    return m;
}

MonomialMatrix compose(const MonomialMatrix& a, const MonomialMatrix& b)
{
    if (a.dim() != b.dim()) throw StructuralError("monomial dimension mismatch");
    MonomialMatrix out;
    out.row.assign(b.dim(), -1);
    out.val.assign(b.dim(), cplx{0.0, 0.0});
    for (std::size_t c = 0; c < b.dim(); ++c) {
        const std::int32_t mid = b.row[c];
        if (mid < 0 || a.row[mid] < 0) continue;
        out.row[c] = a.row[mid];
        out.val[c] = a.val[mid] * b.val[c];
    }
    return out;
}

MonomialMatrix monomial_annihilator(std::size_t n, std::size_t k)
{
    const std::size_t dim = std::size_t{1} << n;
    const std::uint64_t bit = std::uint64_t{1} << k;
    MonomialMatrix m;
    m.row.assign(dim, -1);
    m.val.assign(dim, cplx{0.0, 0.0});
    for (std::uint64_t c = 0; c < dim; ++c) {
        if (!(c & bit)) continue;
        const int sign = bit_parity(c & (bit - 1)) ? -1 : 1;
        m.row[c] = static_cast<std::int32_t>(c ^ bit);
        m.val[c] = sign;
    }
    return m;
}

MonomialMatrix monomial_creator(std::size_t n, std::size_t k)
{
    return monomial_annihilator(n, k).adjoint();
}

// ---------------------------------------------------------------------------
// FockOperator

Degree degree_of(const Eigen::MatrixXcd& m)
{
    bool even = false;
    bool odd = false;
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
        for (Eigen::Index r = 0; r < m.rows(); ++r) {
            if (m(r, c) == cplx{0.0, 0.0}) continue;
            (bit_parity(static_cast<std::uint64_t>(r ^ c)) ? odd : even) = true;
            if (even && odd) return Degree::mixed;
        }
    }
    return odd ? Degree::odd : Degree::even;
}

FockOperator::FockOperator(FockSpacePtr space, Eigen::MatrixXcd matrix)
    : space_(std::move(space)), matrix_(std::move(matrix))
{
    if (!space_) throw StructuralError("FockOperator needs a space");
    const auto d = static_cast<Eigen::Index>(space_->dim());
    if (matrix_.rows() != d || matrix_.cols() != d) {
        throw StructuralError("matrix shape does not match the Fock space dimension");
    }
    degree_ = degree_of(matrix_);
}

void require_same_space(const FockOperator& a, const FockOperator& b)
{
    if (a.space() != b.space() && !(*a.space() == *b.space())) {
        throw StructuralError("operators live on different Fock spaces");
    }
}

FockOperator FockOperator::adjoint() const
{
    return FockOperator(space_, matrix_.adjoint());
}

namespace {

Eigen::MatrixXcd parity_part(const Eigen::MatrixXcd& m, int parity)
{
    Eigen::MatrixXcd out = m;
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
        for (Eigen::Index r = 0; r < m.rows(); ++r) {
            if (bit_parity(static_cast<std::uint64_t>(r ^ c)) != parity) out(r, c) = 0.0;
        }
    }
    return out;
}

} // namespace

FockOperator FockOperator::even_part() const
{
    return FockOperator(space_, parity_part(matrix_, 0));
}

FockOperator FockOperator::odd_part() const
{
    return FockOperator(space_, parity_part(matrix_, 1));
}

FockOperator FockOperator::operator+(const FockOperator& o) const
{
    require_same_space(*this, o);
    return FockOperator(space_, matrix_ + o.matrix_);
}

FockOperator FockOperator::operator-(const FockOperator& o) const
{
    require_same_space(*this, o);
    return FockOperator(space_, matrix_ - o.matrix_);
}

FockOperator FockOperator::operator*(const FockOperator& o) const
{
    require_same_space(*this, o);
    return FockOperator(space_, matrix_ * o.matrix_);
}

FockOperator FockOperator::operator*(cplx s) const
{
    return FockOperator(space_, matrix_ * s);
}

FockOperator FockOperator::operator-() const
{
    return FockOperator(space_, -matrix_);
}

FockOperator from_monomial(const FockSpacePtr& space, const MonomialMatrix& m)
{
    return FockOperator(space, m.to_dense());
}

FockOperator annihilator(const FockSpacePtr& space, const Point& x)
{
    return from_monomial(space, monomial_annihilator(space->size(), space->rank_of(x)));
}

FockOperator creator(const FockSpacePtr& space, const Point& x)
{
    return annihilator(space, x).adjoint();
}

FockOperator number_op(const FockSpacePtr& space, const Point& x)
{
    const std::uint64_t bit = std::uint64_t{1} << space->rank_of(x);
    Eigen::VectorXcd d(static_cast<Eigen::Index>(space->dim()));
    for (Eigen::Index i = 0; i < d.size(); ++i) d[i] = (static_cast<std::uint64_t>(i) & bit) ? 1.0 : 0.0;
    return FockOperator(space, d.asDiagonal().toDenseMatrix());
}

FockOperator identity(const FockSpacePtr& space)
{
    const auto d = static_cast<Eigen::Index>(space->dim());
    return FockOperator(space, Eigen::MatrixXcd::Identity(d, d));
}

FockOperator parity_operator(const FockSpacePtr& space)
{
    Eigen::VectorXcd d(static_cast<Eigen::Index>(space->dim()));
    for (Eigen::Index i = 0; i < d.size(); ++i) d[i] = bit_parity(static_cast<std::uint64_t>(i)) ? -1.0 : 1.0;
    return FockOperator(space, d.asDiagonal().toDenseMatrix());
}

FockOperator graded_commutator(const FockOperator& a, const FockOperator& b)
{
    require_same_space(a, b);
    const Eigen::MatrixXcd& A = a.matrix();
    const Eigen::MatrixXcd& B = b.matrix();
    if (a.degree() != Degree::mixed && b.degree() != Degree::mixed) {
        const bool both_odd = a.degree() == Degree::odd && b.degree() == Degree::odd;
        return FockOperator(a.space(), both_odd ? Eigen::MatrixXcd(A * B + B * A) : Eigen::MatrixXcd(A * B - B * A));
    }
    const Eigen::MatrixXcd Ao = parity_part(A, 1);
    const Eigen::MatrixXcd Bo = parity_part(B, 1);
    // AB − BA, then correct the odd-odd piece from −BoAo to +BoAo.
    return FockOperator(a.space(), A * B - B * A + 2.0 * (Bo * Ao));
}

Eigen::MatrixXcd graded_commutator(const MonomialMatrix& l, Degree dl, const Eigen::MatrixXcd& a)
{
    if (dl == Degree::mixed) throw StructuralError("graded commutator needs L of definite degree");
    const auto n = a.rows();
    Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(n, n);
    // (LA)(r_c, c') = l.val[c]·A(c, c'); (AL)(r, c) = A(r, l.row[c])·l.val[c]
    for (Eigen::Index c = 0; c < n; ++c) {
        const std::int32_t r = l.row[c];
        if (r < 0) continue;
        out.row(r) += l.val[c] * a.row(c);
    }
    for (Eigen::Index c = 0; c < n; ++c) {
        const std::int32_t r = l.row[c];
        if (r < 0) continue;
        if (dl == Degree::odd) {
            for (Eigen::Index i = 0; i < n; ++i) {
                // Entry (i, r) of A has the parity of the result entry (i, c) flipped.
                const bool odd_a = bit_parity(static_cast<std::uint64_t>(i ^ r));
                out(i, c) += (odd_a ? 1.0 : -1.0) * a(i, r) * l.val[c];
            }
        } else {
            out.col(c) -= a.col(r) * l.val[c];
        }
    }
    return out;
}

Eigen::VectorXd free_energy_diagonal(const DisorderRealization& omega, const FockSpace& space)
{
    const double mu = omega.params().mu;
    std::vector<double> delta(space.size());
    for (std::size_t k = 0; k < space.size(); ++k) {
        const auto e = omega.energy(space.sites()[k]);
        if (!e) throw SiteError("Fock space site is not occupied in the realization");
        delta[k] = *e - mu;
    }
    Eigen::VectorXd f = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(space.dim()));
    for (Eigen::Index i = 0; i < f.size(); ++i) {
        for (std::size_t k = 0; k < space.size(); ++k) {
            if (static_cast<std::uint64_t>(i) >> k & 1) f[i] += delta[k];
        }
    }
    return f;
}

FockOperator free_energy(const DisorderRealization& omega, const FockSpacePtr& space)
{
    const Eigen::VectorXd f = free_energy_diagonal(omega, *space);
    return FockOperator(space, f.cast<cplx>().asDiagonal().toDenseMatrix());
}

double fermi_dirac(double beta, double delta)
{
    const double x = beta * delta;
    if (x > 0.0) {
        const double e = std::exp(-x);
        return e / (1.0 + e);
    }
    return 1.0 / (1.0 + std::exp(x));
}

Eigen::VectorXd gibbs_weights(const DisorderRealization& omega, const FockSpace& space)
{
    const ModelParams& p = omega.params();
    Eigen::VectorXd w = Eigen::VectorXd::Ones(static_cast<Eigen::Index>(space.dim()));
    for (std::size_t k = 0; k < space.size(); ++k) {
        const auto e = omega.energy(space.sites()[k]);
        if (!e) throw SiteError("Fock space site is not occupied in the realization");
        const double occ = fermi_dirac(p.beta, *e - p.mu);
        const double emp = fermi_dirac(p.beta, p.mu - *e);
        for (Eigen::Index i = 0; i < w.size(); ++i) w[i] *= (static_cast<std::uint64_t>(i) >> k & 1) ? occ : emp;
    }
    return w;
}

FockOperator heisenberg_evolve(const DisorderRealization& omega, const FockOperator& a, cplx t)
{
    const Eigen::VectorXd f = free_energy_diagonal(omega, *a.space());
    const cplx it = cplx{0.0, 1.0} * t;
    Eigen::MatrixXcd m = a.matrix();
    for (Eigen::Index k = 0; k < m.cols(); ++k) {
        for (Eigen::Index j = 0; j < m.rows(); ++j) {
            if (m(j, k) != cplx{0.0, 0.0}) m(j, k) *= std::exp(it * (f[j] - f[k]));
        }
    }
    return FockOperator(a.space(), std::move(m));
}

double car_defect(const FockSpacePtr& space)
{
    const std::size_t n = space->size();
    const auto d = static_cast<Eigen::Index>(space->dim());
    std::vector<Eigen::MatrixXcd> a(n);
    for (std::size_t k = 0; k < n; ++k) a[k] = monomial_annihilator(n, k).to_dense();
    double dev = 0.0;
    for (std::size_t x = 0; x < n; ++x) {
        for (std::size_t y = 0; y < n; ++y) {
            const Eigen::MatrixXcd ay_dag = a[y].adjoint();
            Eigen::MatrixXcd mixed = a[x] * ay_dag + ay_dag * a[x];
            if (x == y) mixed -= Eigen::MatrixXcd::Identity(d, d);
            dev = std::max(dev, mixed.norm());
            dev = std::max(dev, (a[x] * a[y] + a[y] * a[x]).norm());
        }
    }
    return dev;
}

FockOperator random_operator(const FockSpacePtr& space, std::mt19937_64& rng, std::optional<Degree> parity)
{
    std::normal_distribution<double> g(0.0, 1.0);
    const auto d = static_cast<Eigen::Index>(space->dim());
    Eigen::MatrixXcd m(d, d);
    for (Eigen::Index c = 0; c < d; ++c) {
        for (Eigen::Index r = 0; r < d; ++r) {
            const double re = g(rng);
            const double im = g(rng);
            m(r, c) = cplx(re, im);
        }
    }
    if (parity) {
        const int keep = *parity == Degree::odd ? 1 : 0;
        for (Eigen::Index c = 0; c < d; ++c) {
            for (Eigen::Index r = 0; r < d; ++r) {
                if (bit_parity(static_cast<std::uint64_t>(r ^ c)) != keep) m(r, c) = 0.0;
            }
        }
    }
    return FockOperator(space, std::move(m));
}

MonomialMatrix random_monomial(std::size_t n, std::mt19937_64& rng, std::size_t max_length)
{
    if (n == 0) return MonomialMatrix::identity(1);
    std::uniform_int_distribution<std::size_t> len(1, std::max<std::size_t>(max_length, 1));
    std::uniform_int_distribution<std::size_t> site(0, n - 1);
    std::uniform_int_distribution<int> coin(0, 1);
    MonomialMatrix m = MonomialMatrix::identity(std::size_t{1} << n);
    for (int attempt = 0; attempt < 64; ++attempt) {
        m = MonomialMatrix::identity(std::size_t{1} << n);
        const std::size_t l = len(rng);
        for (std::size_t i = 0; i < l; ++i) {
            const std::size_t k = site(rng);
            m = compose(m, coin(rng) ? monomial_creator(n, k) : monomial_annihilator(n, k));
        }
        if (std::any_of(m.row.begin(), m.row.end(), [](std::int32_t r) { return r >= 0; })) break;
    }
    return m;
}

} // namespace hopdyn
