#pragma once

#include <cmath>
#include <optional>
#include <string>
#include <utility>

#include <Eigen/Dense>

#include "gradpoly/errors.hpp"
#include "gradpoly/indexset.hpp"

namespace gradpoly {

enum class PolyKind { chebyshev, hermite, monomial };

/// Univariate family selector. `normalized` only affects Hermite and
/// divides He_n by sqrt(n!), making the family orthonormal under the
/// standard normal weight.
struct BasisFamily {
    PolyKind kind = PolyKind::monomial;
    bool normalized = false;

    static BasisFamily chebyshev() { return {PolyKind::chebyshev, false}; }
    static BasisFamily hermite(bool normalized = true) { return {PolyKind::hermite, normalized}; }
    static BasisFamily monomial() { return {PolyKind::monomial, false}; }
};

inline std::string to_string(const BasisFamily& f) {
    switch (f.kind) {
        case PolyKind::chebyshev: return "chebyshev";
        case PolyKind::hermite: return f.normalized ? "hermite-normalized" : "hermite";
        case PolyKind::monomial: return "monomial";
    }
    return "?";
}

inline BasisFamily family_from_string(const std::string& s) {
    if (s == "chebyshev") return BasisFamily::chebyshev();
    if (s == "hermite-normalized") return BasisFamily::hermite(true);
    if (s == "hermite") return BasisFamily::hermite(false);
    if (s == "monomial") return BasisFamily::monomial();
    throw parameter_error("unknown basis family '" + s + "'");
}

namespace detail {

inline double sqrt_factorial(int n) {
    double f = 1.0;
    for (int i = 2; i <= n; ++i) f *= static_cast<double>(i);
    return std::sqrt(f);
}

inline double chebyshev_t(int n, double t) {
    if (n == 0) return 1.0;
    double prev = 1.0, cur = t;
    for (int k = 1; k < n; ++k) {
        const double next = 2.0 * t * cur - prev;
        prev = cur;
        cur = next;
    }
    return cur;
}

// Second-kind recurrence, used for dT_n/dt = n*U_{n-1}.
inline double chebyshev_u(int n, double t) {
    if (n == 0) return 1.0;
    double prev = 1.0, cur = 2.0 * t;
    for (int k = 1; k < n; ++k) {
        const double next = 2.0 * t * cur - prev;
        prev = cur;
        cur = next;
    }
    return cur;
}

inline double hermite_he(int n, double t) {
    if (n == 0) return 1.0;
    double prev = 1.0, cur = t;
    for (int k = 1; k < n; ++k) {
        const double next = t * cur - static_cast<double>(k) * prev;
        prev = cur;
        cur = next;
    }
    return cur;
}

inline double int_pow(double t, int n) {
    double r = 1.0;
    for (int k = 0; k < n; ++k) r *= t;
    return r;
}

} // namespace detail

/// Value of the degree-n univariate basis polynomial at t (native coordinates).
inline double eval_1d(const BasisFamily& fam, int n, double t) {
    if (n < 0) throw parameter_error("eval_1d: degree must be >= 0");
    switch (fam.kind) {
        case PolyKind::chebyshev: return detail::chebyshev_t(n, t);
        case PolyKind::hermite: {
            const double v = detail::hermite_he(n, t);
            return fam.normalized ? v / detail::sqrt_factorial(n) : v;
        }
        case PolyKind::monomial: return detail::int_pow(t, n);
    }
    throw parameter_error("eval_1d: bad family");
}

/// Exact first derivative of the degree-n basis polynomial at t.
inline double deriv_1d(const BasisFamily& fam, int n, double t) {
    if (n < 0) throw parameter_error("deriv_1d: degree must be >= 0");
    if (n == 0) return 0.0;
    switch (fam.kind) {
        case PolyKind::chebyshev: return static_cast<double>(n) * detail::chebyshev_u(n - 1, t);
        case PolyKind::hermite: {
            const double v = static_cast<double>(n) * detail::hermite_he(n - 1, t);
            return fam.normalized ? v / detail::sqrt_factorial(n) : v;
        }
        case PolyKind::monomial: return static_cast<double>(n) * detail::int_pow(t, n - 1);
    }
    throw parameter_error("deriv_1d: bad family");
}

/// Axis-aligned rectangular domain.
struct DomainBox {
    Eigen::VectorXd lower, upper;

    DomainBox() = default;
    DomainBox(Eigen::VectorXd lo, Eigen::VectorXd hi) : lower(std::move(lo)), upper(std::move(hi)) {
        if (lower.size() != upper.size() || lower.size() == 0)
            throw parameter_error("DomainBox: lower/upper size mismatch");
        for (Eigen::Index i = 0; i < lower.size(); ++i)
            if (!(lower[i] < upper[i])) throw parameter_error("DomainBox: lower must be < upper");
    }

    /// The cube [lo, hi]^l.
    static DomainBox cube(int l, double lo, double hi) {
        return DomainBox(Eigen::VectorXd::Constant(l, lo), Eigen::VectorXd::Constant(l, hi));
    }

    int dim() const { return static_cast<int>(lower.size()); }

    bool contains(const Eigen::VectorXd& x) const {
        if (x.size() != lower.size()) return false;
        for (Eigen::Index i = 0; i < x.size(); ++i)
            if (x[i] < lower[i] || x[i] > upper[i]) return false;
        return true;
    }
};

/// Tensor-product multivariate basis over a truncated index set.
///
/// Evaluation maps each physical coordinate through an affine change of
/// variables before the univariate recurrences: a DomainBox maps onto
/// [-1,1] per dimension (Chebyshev/Monomial), a normal standardization
/// maps onto standard-normal coordinates (Hermite). The gradient picks
/// up the corresponding chain-rule factor.
class TensorBasis {
public:
    TensorBasis(BasisFamily family, MultiIndexSet iset)
        : family_(family), iset_(std::move(iset)) {
        scale_ = Eigen::VectorXd::Ones(iset_.dim());
        shift_ = Eigen::VectorXd::Zero(iset_.dim());
    }

    TensorBasis(BasisFamily family, MultiIndexSet iset, DomainBox box)
        : family_(family), iset_(std::move(iset)), box_(std::move(box)) {
        if (family_.kind == PolyKind::hermite)
            throw parameter_error("TensorBasis: Hermite uses native coordinates, not a box");
        if (box_->dim() != iset_.dim())
            throw parameter_error("TensorBasis: box dimension does not match index set");
        scale_ = (2.0 / (box_->upper - box_->lower).array()).matrix();
        shift_ = 0.5 * (box_->lower + box_->upper);
    }

    /// Normalized Hermite in physical coordinates of independent
    /// normal(mu_k, sd_k) inputs; evaluation standardizes internally.
    static TensorBasis hermite_standardized(MultiIndexSet iset, Eigen::VectorXd means,
                                            Eigen::VectorXd sds) {
        TensorBasis b(BasisFamily::hermite(true), std::move(iset));
        if (means.size() != b.dim() || sds.size() != b.dim())
            throw parameter_error("hermite_standardized: mean/sd dimension mismatch");
        for (Eigen::Index i = 0; i < sds.size(); ++i)
            if (!(sds[i] > 0.0)) throw parameter_error("hermite_standardized: sd must be > 0");
        b.scale_ = sds.cwiseInverse();
        b.shift_ = std::move(means);
        b.standardized_ = true;
        return b;
    }

    const BasisFamily& family() const { return family_; }
    const MultiIndexSet& index_set() const { return iset_; }
    const std::optional<DomainBox>& box() const { return box_; }
    bool standardized() const { return standardized_; }
    const Eigen::VectorXd& map_scale() const { return scale_; }
    const Eigen::VectorXd& map_shift() const { return shift_; }
    int dim() const { return iset_.dim(); }
    std::size_t size() const { return iset_.size(); }

    /// Whether PCE moment extraction is valid for this basis.
    bool orthonormal() const { return family_.kind == PolyKind::hermite && family_.normalized; }

    /// Basis with the same family/coordinate map but only the first
    /// `count` indices.
    TensorBasis prefix(std::size_t count) const {
        TensorBasis b(*this);
        b.iset_ = iset_.prefix(count);
        return b;
    }

    double eval(const MultiIndex& idx, const Eigen::VectorXd& x) const {
        check_point(idx, x);
        double v = 1.0;
        for (int k = 0; k < dim(); ++k) v *= eval_1d(family_, idx[k], mapped(x, k));
        return v;
    }

    Eigen::VectorXd grad(const MultiIndex& idx, const Eigen::VectorXd& x) const {
        check_point(idx, x);
        const int l = dim();
        Eigen::VectorXd vals(l), ders(l);
        for (int k = 0; k < l; ++k) {
            const double t = mapped(x, k);
            vals[k] = eval_1d(family_, idx[k], t);
            ders[k] = deriv_1d(family_, idx[k], t);
        }
        Eigen::VectorXd g(l);
        for (int k = 0; k < l; ++k) {
            double v = ders[k] * scale_[k];
            for (int j = 0; j < l; ++j)
                if (j != k) v *= vals[j];
            g[k] = v;
        }
        return g;
    }

    /// Row of all basis values at x, in index-set order.
    Eigen::RowVectorXd design_row(const Eigen::VectorXd& x) const {
        if (x.size() != dim()) throw parameter_error("design_row: point dimension mismatch");
        const auto& idxs = iset_.indices();
        Eigen::RowVectorXd row(static_cast<Eigen::Index>(idxs.size()));
        // share the univariate tables across the row: degrees <= max per dim
        const int l = dim();
        Eigen::MatrixXd table = univariate_table(x, false);
        for (std::size_t j = 0; j < idxs.size(); ++j) {
            double v = 1.0;
            for (int k = 0; k < l; ++k) v *= table(idxs[j][k], k);
            row[static_cast<Eigen::Index>(j)] = v;
        }
        return row;
    }

    /// l x M matrix: row k holds d/dx_k of every basis polynomial at x.
    Eigen::MatrixXd design_grad_rows(const Eigen::VectorXd& x) const {
        if (x.size() != dim()) throw parameter_error("design_grad_rows: point dimension mismatch");
        const auto& idxs = iset_.indices();
        const int l = dim();
        Eigen::MatrixXd vals = univariate_table(x, false);
        Eigen::MatrixXd ders = univariate_table(x, true);
        Eigen::MatrixXd rows(l, static_cast<Eigen::Index>(idxs.size()));
        for (std::size_t j = 0; j < idxs.size(); ++j) {
            for (int k = 0; k < l; ++k) {
                double v = ders(idxs[j][k], k) * scale_[k];
                for (int i = 0; i < l; ++i)
                    if (i != k) v *= vals(idxs[j][i], i);
                rows(k, static_cast<Eigen::Index>(j)) = v;
            }
        }
        return rows;
    }

    /// n x M design matrix for n points stored as rows.
    Eigen::MatrixXd design_matrix(const Eigen::MatrixXd& points) const {
        Eigen::MatrixXd A(points.rows(), static_cast<Eigen::Index>(size()));
        for (Eigen::Index i = 0; i < points.rows(); ++i)
            A.row(i) = design_row(points.row(i).transpose());
        return A;
    }

private:
    void check_point(const MultiIndex& idx, const Eigen::VectorXd& x) const {
        if (idx.dim() != dim()) throw parameter_error("TensorBasis: index dimension mismatch");
        if (x.size() != dim()) throw parameter_error("TensorBasis: point dimension mismatch");
    }

    double mapped(const Eigen::VectorXd& x, int k) const {
        return (x[k] - shift_[k]) * scale_[k];
    }

    Eigen::MatrixXd univariate_table(const Eigen::VectorXd& x, bool derivative) const {
        int maxdeg = 0;
        for (const auto& idx : iset_.indices())
            for (int k = 0; k < idx.dim(); ++k) maxdeg = std::max(maxdeg, idx[k]);
        const int l = dim();
        Eigen::MatrixXd table(maxdeg + 1, l);
        for (int k = 0; k < l; ++k) {
            const double t = mapped(x, k);
            for (int n = 0; n <= maxdeg; ++n)
                table(n, k) = derivative ? deriv_1d(family_, n, t) : eval_1d(family_, n, t);
        }
        return table;
    }

    BasisFamily family_;
    MultiIndexSet iset_;
    std::optional<DomainBox> box_;
    bool standardized_ = false;
    Eigen::VectorXd scale_, shift_;
};

} // namespace gradpoly
