#pragma once

#include <cstdio>
#include <fstream>
#include <functional>
#include <istream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/SVD>

#include "gradpoly/basis.hpp"
#include "gradpoly/errors.hpp"
#include "gradpoly/sampling.hpp"

namespace gradpoly {

/// Function values (and optionally gradients) at a point set.
struct GradSamples {
    PointSet points;
    Eigen::VectorXd values;    // m
    Eigen::MatrixXd gradients; // m x l, rows match points
    bool with_derivatives = false;

    int m() const { return points.n(); }
    int dim() const { return points.dim(); }

    void validate() const {
        if (values.size() != m()) throw parameter_error("GradSamples: value count mismatch");
        if (with_derivatives &&
            (gradients.rows() != m() || gradients.cols() != dim()))
            throw parameter_error("GradSamples: gradient shape mismatch");
    }
};

/// Stacked least-squares system. Row layout: the m function rows first,
/// then one block of m rows per partial derivative d/dx_1 ... d/dx_l,
/// block k row i referring to point i.
struct GradSystem {
    Eigen::MatrixXd matrix;
    Eigen::VectorXd rhs;
    int m = 0; // number of physical points
    int l = 0; // 0 when assembled without derivative rows

    bool with_derivatives() const { return l > 0; }
};

struct FitReport {
    double residual_norm = 0.0;
    int rank = 0;
    double sigma_max = 0.0;
    double sigma_min = 0.0;
};

struct LsqSolution {
    Eigen::VectorXd coeffs;
    FitReport report;
};

inline GradSystem assemble(const TensorBasis& basis, const GradSamples& samples,
                           double deriv_weight = 1.0) {
    samples.validate();
    if (samples.dim() != basis.dim())
        throw parameter_error("assemble: sample dimension does not match basis");
    const int m = samples.m();
    const int l = basis.dim();
    const auto M = static_cast<Eigen::Index>(basis.size());
    const bool wd = samples.with_derivatives;

    GradSystem sys;
    sys.m = m;
    sys.l = wd ? l : 0;
    sys.matrix.resize(wd ? static_cast<Eigen::Index>(m) * (l + 1) : m, M);
    sys.rhs.resize(sys.matrix.rows());

    for (int i = 0; i < m; ++i) {
        const Eigen::VectorXd x = samples.points.point(i);
        sys.matrix.row(i) = basis.design_row(x);
        sys.rhs[i] = samples.values[i];
        if (wd) {
            const Eigen::MatrixXd g = basis.design_grad_rows(x);
            for (int k = 0; k < l; ++k) {
                const Eigen::Index row = static_cast<Eigen::Index>(m) * (k + 1) + i;
                sys.matrix.row(row) = deriv_weight * g.row(k);
                sys.rhs[row] = deriv_weight * samples.gradients(i, k);
            }
        }
    }
    return sys;
}

/// Minimum-norm least-squares solution with singular values below
/// rank_tol * sigma_max truncated.
inline LsqSolution solve_lsq(const GradSystem& sys, double rank_tol = 1e-10) {
    if (sys.matrix.size() == 0) throw parameter_error("solve_lsq: empty system");
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(sys.matrix,
                                          Eigen::ComputeThinU | Eigen::ComputeThinV);
    const Eigen::VectorXd& sv = svd.singularValues();
    const double smax = sv.size() ? sv[0] : 0.0;
    if (smax == 0.0) throw degeneracy_error("solve_lsq: zero system matrix");

    const double cut = rank_tol * smax;
    int rank = 0;
    while (rank < sv.size() && sv[rank] > cut) ++rank;

    const Eigen::VectorXd beta = svd.matrixU().transpose() * sys.rhs;
    Eigen::VectorXd coeffs = Eigen::VectorXd::Zero(sys.matrix.cols());
    for (int i = 0; i < rank; ++i) coeffs += svd.matrixV().col(i) * (beta[i] / sv[i]);

    LsqSolution sol;
    sol.coeffs = std::move(coeffs);
    sol.report.rank = rank;
    sol.report.sigma_max = smax;
    sol.report.sigma_min = sv[sv.size() - 1];
    sol.report.residual_norm = (sys.matrix * sol.coeffs - sys.rhs).norm();
    return sol;
}

/// Count of singular values above rank_tol * sigma_max.
inline int numeric_rank(const GradSystem& sys, double rank_tol = 1e-10) {
    if (sys.matrix.size() == 0) throw parameter_error("numeric_rank: empty system");
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(sys.matrix);
    const Eigen::VectorXd& sv = svd.singularValues();
    if (sv.size() == 0 || sv[0] == 0.0) return 0;
    const double cut = rank_tol * sv[0];
    int rank = 0;
    while (rank < sv.size() && sv[rank] > cut) ++rank;
    return rank;
}

/// Fitted polynomial surrogate: basis, coefficients, and the report of
/// the least-squares solve that produced them.
class Surrogate {
public:
    Surrogate(TensorBasis basis, Eigen::VectorXd coeffs, FitReport report = {})
        : basis_(std::move(basis)), coeffs_(std::move(coeffs)), report_(report) {
        if (coeffs_.size() != static_cast<Eigen::Index>(basis_.size()))
            throw parameter_error("Surrogate: coefficient count does not match basis size");
    }

    const TensorBasis& basis() const { return basis_; }
    const Eigen::VectorXd& coefficients() const { return coeffs_; }
    const FitReport& report() const { return report_; }
    int dim() const { return basis_.dim(); }

    double eval(const Eigen::VectorXd& x) const { return basis_.design_row(x) * coeffs_; }

    Eigen::VectorXd grad(const Eigen::VectorXd& x) const {
        return basis_.design_grad_rows(x) * coeffs_;
    }

    void save(std::ostream& os) const;
    void save(const std::string& path) const {
        std::ofstream os(path);
        if (!os) throw io_error("cannot open " + path + " for writing");
        save(os);
    }
    static Surrogate load(std::istream& is);
    static Surrogate load_file(const std::string& path) {
        std::ifstream is(path);
        if (!is) throw io_error("cannot open " + path);
        return load(is);
    }

private:
    TensorBasis basis_;
    Eigen::VectorXd coeffs_;
    FitReport report_;
};

enum class SamplerKind { uniform, lhs };

struct FitOptions {
    int m = 0;                // points actually evaluated
    int N = 0;                // candidate pool; maxvol reduces N -> m when N > m
    SamplerKind sampler = SamplerKind::uniform;
    std::uint64_t seed = 0;
    double rank_tol = 1e-10;
    double deriv_weight = 1.0;
    double maxvol_delta = 0.01;
};

using ScalarFn = std::function<double(const Eigen::VectorXd&)>;
using GradientFn = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;

namespace detail {

inline std::string point_to_string(const Eigen::VectorXd& x) {
    std::ostringstream os;
    os << '(';
    for (Eigen::Index k = 0; k < x.size(); ++k) os << (k ? ", " : "") << x[k];
    os << ')';
    return os.str();
}

} // namespace detail

/// Evaluate f (and g when given) on the selected points and build GradSamples.
inline GradSamples evaluate_samples(const ScalarFn& f, const GradientFn& g,
                                    const PointSet& points) {
    GradSamples s;
    s.points = points;
    s.with_derivatives = static_cast<bool>(g);
    const int m = points.n();
    s.values.resize(m);
    if (s.with_derivatives) s.gradients.resize(m, points.dim());
    for (int i = 0; i < m; ++i) {
        const Eigen::VectorXd x = points.point(i);
        try {
            s.values[i] = f(x);
            if (s.with_derivatives) {
                Eigen::VectorXd gi = g(x);
                if (gi.size() != points.dim())
                    throw parameter_error("gradient evaluator returned wrong dimension");
                s.gradients.row(i) = gi.transpose();
            }
        } catch (const std::exception& e) {
            throw numeric_error(std::string("evaluator failed at point ") +
                                detail::point_to_string(x) + ": " + e.what());
        }
    }
    return s;
}

/// Full pipeline: draw N candidates, maxvol-reduce to m (when N > m),
/// evaluate, assemble, solve.
inline Surrogate fit(const ScalarFn& f, const GradientFn& g, const DomainBox& box,
                     const TensorBasis& basis, const FitOptions& opt) {
    if (opt.m < 1) throw parameter_error("fit: m must be >= 1");
    if (opt.m > opt.N) throw parameter_error("fit: m must not exceed N");
    if (box.dim() != basis.dim()) throw parameter_error("fit: box dimension mismatch");

    PointSet candidates = opt.sampler == SamplerKind::lhs ? lhs(box, opt.N, opt.seed)
                                                          : uniform_random(box, opt.N, opt.seed);
    PointSet selected = candidates;
    if (opt.N > opt.m) {
        const Eigen::MatrixXd design = basis.design_matrix(candidates.points);
        selected = subset(candidates, maxvol_select(design, opt.m, opt.maxvol_delta));
    }

    const GradSamples samples = evaluate_samples(f, g, selected);
    const GradSystem sys = assemble(basis, samples, opt.deriv_weight);
    LsqSolution sol = solve_lsq(sys, opt.rank_tol);
    if (sol.report.rank < 1) throw degeneracy_error("fit: numeric rank collapsed to zero");
    return Surrogate(basis, std::move(sol.coeffs), sol.report);
}

/// Discrete relative L2 error of the surrogate against f over test points.
inline double rel_l2_error(const Surrogate& s, const ScalarFn& f,
                           const Eigen::MatrixXd& test_points) {
    if (test_points.rows() < 1) throw parameter_error("rel_l2_error: need test points");
    double num = 0.0, den = 0.0;
    for (Eigen::Index i = 0; i < test_points.rows(); ++i) {
        const Eigen::VectorXd x = test_points.row(i).transpose();
        const double fx = f(x);
        const double d = fx - s.eval(x);
        num += d * d;
        den += fx * fx;
    }
    if (den == 0.0) throw degeneracy_error("rel_l2_error: reference norm is zero");
    return std::sqrt(num / den);
}

// ---------------------------------------------------------------------------
// Serialization
// ---------------------------------------------------------------------------

namespace detail {

inline void write_full(std::ostream& os, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    os << buf;
}

inline bool next_content_line(std::istream& is, std::string& line) {
    while (std::getline(is, line)) {
        const auto pos = line.find_first_not_of(" \t\r");
        if (pos == std::string::npos) continue;
        if (line[pos] == '#') continue;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        return true;
    }
    return false;
}

} // namespace detail

inline void Surrogate::save(std::ostream& os) const {
    const TensorBasis& b = basis_;
    os << "gradpoly-surrogate 1\n";
    os << "family " << to_string(b.family()) << '\n';
    os << "dim " << b.dim() << '\n';
    if (b.box()) {
        os << "map box";
        for (int k = 0; k < b.dim(); ++k) {
            os << ' ';
            detail::write_full(os, b.box()->lower[k]);
        }
        for (int k = 0; k < b.dim(); ++k) {
            os << ' ';
            detail::write_full(os, b.box()->upper[k]);
        }
        os << '\n';
    } else if (b.standardized()) {
        os << "map standardize";
        for (int k = 0; k < b.dim(); ++k) {
            os << ' ';
            detail::write_full(os, b.map_shift()[k]);
        }
        for (int k = 0; k < b.dim(); ++k) {
            os << ' ';
            detail::write_full(os, 1.0 / b.map_scale()[k]);
        }
        os << '\n';
    } else {
        os << "map none\n";
    }
    const MultiIndexSet& iset = b.index_set();
    os << "indexset " << iset.dim() << ' ' << iset.q() << ' ' << iset.p() << ' ' << iset.size()
       << '\n';
    for (const auto& idx : iset.indices()) {
        for (int k = 0; k < iset.dim(); ++k) os << (k ? " " : "") << idx[k];
        os << '\n';
    }
    os << "coeffs " << coeffs_.size() << '\n';
    for (Eigen::Index i = 0; i < coeffs_.size(); ++i) {
        detail::write_full(os, coeffs_[i]);
        os << '\n';
    }
    os << "fit ";
    detail::write_full(os, report_.residual_norm);
    os << ' ' << report_.rank << ' ';
    detail::write_full(os, report_.sigma_max);
    os << ' ';
    detail::write_full(os, report_.sigma_min);
    os << '\n';
}

inline Surrogate Surrogate::load(std::istream& is) {
    std::string line, word;

    auto expect = [&](const char* what) {
        if (!detail::next_content_line(is, line)) throw io_error(std::string("surrogate: missing ") + what);
        return std::istringstream(line);
    };

    {
        auto ls = expect("magic line");
        int version = 0;
        ls >> word >> version;
        if (word != "gradpoly-surrogate" || version != 1)
            throw io_error("surrogate: unrecognized format header");
    }

    BasisFamily family;
    {
        auto ls = expect("family line");
        std::string name;
        ls >> word >> name;
        if (word != "family") throw io_error("surrogate: expected 'family'");
        family = family_from_string(name);
    }

    int dim = 0;
    {
        auto ls = expect("dim line");
        ls >> word >> dim;
        if (word != "dim" || dim < 1) throw io_error("surrogate: bad 'dim'");
    }

    std::string map_kind;
    Eigen::VectorXd map_a(dim), map_b(dim);
    {
        auto ls = expect("map line");
        ls >> word >> map_kind;
        if (word != "map") throw io_error("surrogate: expected 'map'");
        if (map_kind == "box" || map_kind == "standardize") {
            for (int k = 0; k < dim; ++k)
                if (!(ls >> map_a[k])) throw io_error("surrogate: short map line");
            for (int k = 0; k < dim; ++k)
                if (!(ls >> map_b[k])) throw io_error("surrogate: short map line");
        } else if (map_kind != "none") {
            throw io_error("surrogate: unknown map kind '" + map_kind + "'");
        }
    }

    MultiIndexSet iset;
    {
        auto ls = expect("indexset line");
        int l = 0;
        double q = 0.0, p = 1.0;
        std::size_t count = 0;
        ls >> word >> l >> q >> p >> count;
        if (word != "indexset" || l != dim || count < 1)
            throw io_error("surrogate: bad 'indexset'");
        std::vector<MultiIndex> indices;
        indices.reserve(count);
        for (std::size_t j = 0; j < count; ++j) {
            auto il = expect("index line");
            MultiIndex idx;
            int d;
            while (il >> d) idx.degrees.push_back(d);
            indices.push_back(std::move(idx));
        }
        iset = MultiIndexSet::from_indices(l, q, p, std::move(indices));
    }

    Eigen::VectorXd coeffs;
    {
        auto ls = expect("coeffs line");
        Eigen::Index count = 0;
        ls >> word >> count;
        if (word != "coeffs" || count != static_cast<Eigen::Index>(iset.size()))
            throw io_error("surrogate: bad 'coeffs'");
        coeffs.resize(count);
        for (Eigen::Index i = 0; i < count; ++i) {
            auto cl = expect("coefficient");
            if (!(cl >> coeffs[i])) throw io_error("surrogate: bad coefficient");
        }
    }

    FitReport report;
    if (detail::next_content_line(is, line)) {
        std::istringstream ls(line);
        ls >> word >> report.residual_norm >> report.rank >> report.sigma_max >> report.sigma_min;
        if (word != "fit") throw io_error("surrogate: trailing junk");
    }

    if (map_kind == "box")
        return Surrogate(TensorBasis(family, std::move(iset), DomainBox(map_a, map_b)),
                         std::move(coeffs), report);
    if (map_kind == "standardize")
        return Surrogate(TensorBasis::hermite_standardized(std::move(iset), map_a, map_b),
                         std::move(coeffs), report);
    return Surrogate(TensorBasis(family, std::move(iset)), std::move(coeffs), report);
}

/// Samples CSV import: columns x_1..x_l, f [, df_1..df_l]; '#' comments
/// and an optional non-numeric header line are skipped.
inline GradSamples load_samples_csv(std::istream& is, int l, const DomainBox& box) {
    if (l < 1) throw parameter_error("load_samples_csv: dimension must be >= 1");
    std::vector<std::vector<double>> rows;
    std::string line;
    bool first_content = true;
    while (detail::next_content_line(is, line)) {
        for (char& c : line)
            if (c == ',' || c == ';' || c == '\t') c = ' ';
        std::istringstream ls(line);
        std::vector<double> row;
        double v;
        while (ls >> v) row.push_back(v);
        if (row.empty()) {
            if (first_content) { // header line of column names
                first_content = false;
                continue;
            }
            throw io_error("samples csv: malformed line '" + line + "'");
        }
        first_content = false;
        rows.push_back(std::move(row));
    }
    if (rows.empty()) throw io_error("samples csv: no data rows");
    const std::size_t cols = rows.front().size();
    const bool wd = cols == static_cast<std::size_t>(2 * l + 1);
    if (!wd && cols != static_cast<std::size_t>(l + 1))
        throw io_error("samples csv: expected l+1 or 2l+1 columns");
    for (const auto& r : rows)
        if (r.size() != cols) throw io_error("samples csv: ragged rows");

    GradSamples s;
    const int m = static_cast<int>(rows.size());
    s.points.points.resize(m, l);
    s.points.box = box;
    s.points.provenance = Provenance::uniform;
    s.values.resize(m);
    s.with_derivatives = wd;
    if (wd) s.gradients.resize(m, l);
    for (int i = 0; i < m; ++i) {
        for (int k = 0; k < l; ++k) s.points.points(i, k) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(k)];
        s.values[i] = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(l)];
        if (wd)
            for (int k = 0; k < l; ++k)
                s.gradients(i, k) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(l + 1 + k)];
    }
    return s;
}

} // namespace gradpoly
