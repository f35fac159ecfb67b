#pragma once

#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <istream>
#include <memory>
#include <ostream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include "gradpoly/errors.hpp"

namespace gradpoly {

/// Sparse matrices are kept in compressed row storage.
using SpMat = Eigen::SparseMatrix<double, Eigen::RowMajor>;

/// Affine-parametric descriptor system
///   E(xi) dx/dt + A(xi) x = B u(t),
/// with E(xi) = E0 + sum_i xi_i Ei and A(xi) = A0 + sum_i xi_i Ai.
/// E may be singular; A(xi) must be invertible at evaluation points.
struct ParamLinearSystem {
    int n = 0; // states
    int l = 0; // parameters
    int d = 1; // inputs
    SpMat E0, A0;
    std::vector<SpMat> Ei, Ai;
    Eigen::MatrixXd B;
    std::vector<Eigen::MatrixXd> Bi; // optional, empty means B does not depend on xi

    void validate() const {
        if (n < 1) throw parameter_error("ParamLinearSystem: empty system");
        if (E0.rows() != n || E0.cols() != n || A0.rows() != n || A0.cols() != n)
            throw parameter_error("ParamLinearSystem: E0/A0 must be n x n");
        if (static_cast<int>(Ei.size()) != l || static_cast<int>(Ai.size()) != l)
            throw parameter_error("ParamLinearSystem: need one Ei and Ai per parameter");
        for (const auto& M : Ei)
            if (M.rows() != n || M.cols() != n) throw parameter_error("ParamLinearSystem: bad Ei shape");
        for (const auto& M : Ai)
            if (M.rows() != n || M.cols() != n) throw parameter_error("ParamLinearSystem: bad Ai shape");
        if (B.rows() != n || B.cols() != d) throw parameter_error("ParamLinearSystem: B must be n x d");
        if (!Bi.empty() && static_cast<int>(Bi.size()) != l)
            throw parameter_error("ParamLinearSystem: Bi must be empty or one per parameter");
    }

    SpMat E_at(const Eigen::VectorXd& xi) const { return affine(E0, Ei, xi); }
    SpMat A_at(const Eigen::VectorXd& xi) const { return affine(A0, Ai, xi); }

    Eigen::MatrixXd B_deriv(int i) const {
        return Bi.empty() ? Eigen::MatrixXd::Zero(n, d) : Bi[static_cast<std::size_t>(i)];
    }

private:
    SpMat affine(const SpMat& M0, const std::vector<SpMat>& Mi, const Eigen::VectorXd& xi) const {
        if (xi.size() != l) throw parameter_error("ParamLinearSystem: xi has wrong length");
        SpMat M = M0;
        for (int i = 0; i < l; ++i)
            if (xi[i] != 0.0) M = M + (xi[i] * Mi[static_cast<std::size_t>(i)]).eval();
        return M;
    }
};

struct SensitivitySolution {
    Eigen::VectorXd x;    // n
    Eigen::MatrixXd sens; // l x n, row i = dx/dxi_i
};

namespace detail {

class SparseFactor {
public:
    explicit SparseFactor(const SpMat& M, const char* what) {
        Eigen::SparseMatrix<double> col = M; // solver wants column storage
        lu_.compute(col);
        if (lu_.info() != Eigen::Success)
            throw factorization_error(std::string(what) + ": singular matrix");
    }

    Eigen::VectorXd solve(const Eigen::VectorXd& rhs) const { return lu_.solve(rhs); }

private:
    Eigen::SparseLU<Eigen::SparseMatrix<double>> lu_;
};

} // namespace detail

/// Static solve with sensitivities: factor A(xi) once, then one
/// triangular solve for x and one per parameter.
inline SensitivitySolution solve_dc_with_sens(const ParamLinearSystem& sys,
                                              const Eigen::VectorXd& xi,
                                              const Eigen::VectorXd& u) {
    sys.validate();
    if (u.size() != sys.d) throw parameter_error("solve_dc_with_sens: u has wrong length");
    const detail::SparseFactor lu(sys.A_at(xi), "solve_dc_with_sens");

    SensitivitySolution sol;
    sol.x = lu.solve(sys.B * u);
    sol.sens.resize(sys.l, sys.n);
    for (int i = 0; i < sys.l; ++i) {
        Eigen::VectorXd rhs = -(sys.Ai[static_cast<std::size_t>(i)] * sol.x);
        if (!sys.Bi.empty()) rhs += sys.B_deriv(i) * u;
        sol.sens.row(i) = lu.solve(rhs).transpose();
    }
    return sol;
}

/// Explicit (l+1)n x (l+1)n block system whose solution stacks
/// {x; x_1; ...; x_l}. Verification path for solve_dc_with_sens and the
/// blockwise DAE stepping.
struct ExtendedSystem {
    SpMat E, A;
    Eigen::MatrixXd B;
};

inline ExtendedSystem build_extended(const ParamLinearSystem& sys, const Eigen::VectorXd& xi) {
    sys.validate();
    const int n = sys.n;
    const int l = sys.l;
    const SpMat A = sys.A_at(xi);
    const SpMat E = sys.E_at(xi);

    std::vector<Eigen::Triplet<double>> ta, te;
    auto emit = [&](std::vector<Eigen::Triplet<double>>& out, const SpMat& M, int broff, int bcoff) {
        for (int r = 0; r < M.outerSize(); ++r)
            for (SpMat::InnerIterator it(M, r); it; ++it)
                out.emplace_back(broff + static_cast<int>(it.row()),
                                 bcoff + static_cast<int>(it.col()), it.value());
    };
    for (int k = 0; k <= l; ++k) {
        emit(ta, A, k * n, k * n);
        emit(te, E, k * n, k * n);
    }
    for (int i = 1; i <= l; ++i) {
        emit(ta, sys.Ai[static_cast<std::size_t>(i - 1)], i * n, 0);
        emit(te, sys.Ei[static_cast<std::size_t>(i - 1)], i * n, 0);
    }

    ExtendedSystem ext;
    ext.A.resize((l + 1) * n, (l + 1) * n);
    ext.A.setFromTriplets(ta.begin(), ta.end());
    ext.E.resize((l + 1) * n, (l + 1) * n);
    ext.E.setFromTriplets(te.begin(), te.end());
    ext.B = Eigen::MatrixXd::Zero((l + 1) * n, sys.d);
    ext.B.topRows(n) = sys.B;
    for (int i = 1; i <= l; ++i)
        if (!sys.Bi.empty()) ext.B.middleRows(i * n, n) = sys.Bi[static_cast<std::size_t>(i - 1)];
    return ext;
}

struct DaeTrajectory {
    Eigen::VectorXd t;               // grid, including t0
    Eigen::MatrixXd x;               // steps x n
    std::vector<Eigen::MatrixXd> sens; // per parameter, steps x n
};

using InputSignal = std::function<Eigen::VectorXd(double)>;

/// Backward-Euler time stepping of the DAE together with its parameter
/// sensitivities. Each step factors (E/h + A) once and reuses it for
/// the l sensitivity solves; with a uniform grid the factorization is
/// also reused across steps.
inline DaeTrajectory integrate_dae_with_sens(const ParamLinearSystem& sys,
                                             const Eigen::VectorXd& xi, const InputSignal& u,
                                             const Eigen::VectorXd& t_grid,
                                             const Eigen::VectorXd& x0 = Eigen::VectorXd()) {
    sys.validate();
    const int steps = static_cast<int>(t_grid.size());
    if (steps < 2) throw parameter_error("integrate_dae_with_sens: need at least two grid points");
    for (int k = 1; k < steps; ++k)
        if (!(t_grid[k] > t_grid[k - 1]))
            throw parameter_error("integrate_dae_with_sens: grid must be increasing");

    const SpMat E = sys.E_at(xi);
    const SpMat A = sys.A_at(xi);

    DaeTrajectory tr;
    tr.t = t_grid;
    tr.x.setZero(steps, sys.n);
    tr.sens.assign(static_cast<std::size_t>(sys.l), Eigen::MatrixXd::Zero(steps, sys.n));

    Eigen::VectorXd x = x0.size() ? x0 : Eigen::VectorXd::Zero(sys.n);
    if (x.size() != sys.n) throw parameter_error("integrate_dae_with_sens: x0 has wrong length");
    Eigen::MatrixXd s = Eigen::MatrixXd::Zero(sys.l, sys.n);
    tr.x.row(0) = x.transpose();

    std::unique_ptr<detail::SparseFactor> lu;
    double h_cached = -1.0;
    for (int k = 1; k < steps; ++k) {
        const double h = t_grid[k] - t_grid[k - 1];
        if (!lu || std::abs(h - h_cached) > 1e-14 * std::abs(h)) {
            SpMat M = (E / h).eval();
            M = M + A;
            try {
                lu = std::make_unique<detail::SparseFactor>(M, "integrate_dae_with_sens");
            } catch (const factorization_error&) {
                throw factorization_error("integrate_dae_with_sens: singular step matrix at step " +
                                          std::to_string(k));
            }
            h_cached = h;
        }
        const Eigen::VectorXd uk = u(t_grid[k]);
        if (uk.size() != sys.d) throw parameter_error("integrate_dae_with_sens: u(t) has wrong length");

        const Eigen::VectorXd xprev = x;
        x = lu->solve(sys.B * uk + E * (xprev / h));
        const Eigen::VectorXd dxdt = (x - xprev) / h;

        for (int i = 0; i < sys.l; ++i) {
            Eigen::VectorXd rhs = E * (s.row(i).transpose() / h) -
                                  sys.Ei[static_cast<std::size_t>(i)] * dxdt -
                                  sys.Ai[static_cast<std::size_t>(i)] * x;
            if (!sys.Bi.empty()) rhs += sys.B_deriv(i) * uk;
            s.row(i) = lu->solve(rhs).transpose();
        }

        tr.x.row(k) = x.transpose();
        for (int i = 0; i < sys.l; ++i) tr.sens[static_cast<std::size_t>(i)].row(k) = s.row(i);
    }
    return tr;
}

// ---------------------------------------------------------------------------
// Fixtures
// ---------------------------------------------------------------------------

/// Nodal system of a rows x cols grid of unit resistors. States are the
/// grid nodes (row-major) minus the grounded one, in ascending node
/// order. Each parametrized edge contributes its +-1 conductance
/// stencil as one Ai, so conductance(edge i) = 1 + xi_i.
inline ParamLinearSystem resistor_grid(int rows, int cols,
                                       const std::vector<std::pair<int, double>>& injections,
                                       const std::vector<std::pair<int, int>>& param_edges,
                                       int ground_node = -1) {
    if (rows < 2 || cols < 2) throw parameter_error("resistor_grid: grid must be at least 2x2");
    const int nodes = rows * cols;
    if (ground_node < 0) ground_node = nodes - 1;
    if (ground_node >= nodes) throw parameter_error("resistor_grid: ground node out of range");

    auto is_edge = [&](int a, int b) {
        if (a < 0 || b < 0 || a >= nodes || b >= nodes || a == b) return false;
        const int ar = a / cols, ac = a % cols, br = b / cols, bc = b % cols;
        return std::abs(ar - br) + std::abs(ac - bc) == 1;
    };
    auto reduced = [&](int node) { return node < ground_node ? node : node - 1; };

    ParamLinearSystem sys;
    sys.n = nodes - 1;
    sys.l = static_cast<int>(param_edges.size());
    sys.d = 1;

    std::vector<Eigen::Triplet<double>> ta;
    auto stamp = [&](std::vector<Eigen::Triplet<double>>& out, int a, int b, double g) {
        if (a != ground_node) out.emplace_back(reduced(a), reduced(a), g);
        if (b != ground_node) out.emplace_back(reduced(b), reduced(b), g);
        if (a != ground_node && b != ground_node) {
            out.emplace_back(reduced(a), reduced(b), -g);
            out.emplace_back(reduced(b), reduced(a), -g);
        }
    };

    for (int r = 0; r < rows; ++r)
        for (int c = 0; c < cols; ++c) {
            const int a = r * cols + c;
            if (c + 1 < cols) stamp(ta, a, a + 1, 1.0);
            if (r + 1 < rows) stamp(ta, a, a + cols, 1.0);
        }
    sys.A0.resize(sys.n, sys.n);
    sys.A0.setFromTriplets(ta.begin(), ta.end());
    sys.E0.resize(sys.n, sys.n);
    sys.E0.setZero();

    for (const auto& [a, b] : param_edges) {
        if (!is_edge(a, b)) throw parameter_error("resistor_grid: not a grid edge");
        std::vector<Eigen::Triplet<double>> ti;
        stamp(ti, a, b, 1.0);
        SpMat Ai(sys.n, sys.n);
        Ai.setFromTriplets(ti.begin(), ti.end());
        sys.Ai.push_back(std::move(Ai));
        SpMat Ei(sys.n, sys.n);
        Ei.setZero();
        sys.Ei.push_back(std::move(Ei));
    }

    sys.B = Eigen::MatrixXd::Zero(sys.n, 1);
    for (const auto& [node, amps] : injections) {
        if (node < 0 || node >= nodes) throw parameter_error("resistor_grid: injection node out of range");
        if (node == ground_node)
            throw parameter_error("resistor_grid: injection into the grounded node");
        sys.B(reduced(node), 0) += amps;
    }
    return sys;
}

/// Netlist-lite reader. Lines:
///   R a b value [param_index]   resistor, conductance 1/value
///   C a b value [param_index]   capacitor (contributes to E)
///   I node value                current injection (scaled by the input u)
///   GROUND node
/// A param_index k >= 1 adds the element's unit stencil to A_k (or E_k),
/// i.e. the parameter perturbs the conductance/capacitance additively.
inline ParamLinearSystem load_netlist(std::istream& is) {
    struct Element {
        char kind;
        int a, b;
        double value;
        int param;
    };
    std::vector<Element> elems;
    std::vector<std::pair<int, double>> injections;
    int ground = -1;
    int max_node = -1;
    int max_param = 0;

    std::string line;
    int lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        const auto pos = line.find_first_not_of(" \t\r");
        if (pos == std::string::npos || line[pos] == '#') continue;
        std::istringstream ls(line);
        std::string kind;
        ls >> kind;
        auto bad = [&](const char* why) {
            throw io_error("netlist line " + std::to_string(lineno) + ": " + why);
        };
        if (kind == "R" || kind == "C") {
            Element e{kind[0], -1, -1, 0.0, 0};
            if (!(ls >> e.a >> e.b >> e.value)) bad("expected 'a b value'");
            ls >> e.param;
            if (e.a < 0 || e.b < 0 || e.a == e.b) bad("bad node pair");
            if (!(e.value > 0.0)) bad("value must be positive");
            if (e.param < 0) bad("param index must be >= 1");
            elems.push_back(e);
            max_node = std::max({max_node, e.a, e.b});
            max_param = std::max(max_param, e.param);
        } else if (kind == "I") {
            int node = -1;
            double amps = 0.0;
            if (!(ls >> node >> amps)) bad("expected 'node value'");
            if (node < 0) bad("bad node");
            injections.emplace_back(node, amps);
            max_node = std::max(max_node, node);
        } else if (kind == "GROUND") {
            if (!(ls >> ground) || ground < 0) bad("expected node id");
            max_node = std::max(max_node, ground);
        } else {
            bad("unknown directive");
        }
    }
    if (elems.empty()) throw io_error("netlist: no elements");
    if (ground < 0) throw io_error("netlist: GROUND line required");

    const int nodes = max_node + 1;
    ParamLinearSystem sys;
    sys.n = nodes - 1;
    sys.l = max_param;
    sys.d = 1;
    if (sys.n < 1) throw io_error("netlist: needs at least two nodes");

    auto reduced = [&](int node) { return node < ground ? node : node - 1; };
    std::vector<Eigen::Triplet<double>> ta, te;
    std::vector<std::vector<Eigen::Triplet<double>>> tai(static_cast<std::size_t>(max_param)),
        tei(static_cast<std::size_t>(max_param));
    auto stamp = [&](std::vector<Eigen::Triplet<double>>& out, int a, int b, double g) {
        if (a != ground) out.emplace_back(reduced(a), reduced(a), g);
        if (b != ground) out.emplace_back(reduced(b), reduced(b), g);
        if (a != ground && b != ground) {
            out.emplace_back(reduced(a), reduced(b), -g);
            out.emplace_back(reduced(b), reduced(a), -g);
        }
    };
    for (const auto& e : elems) {
        const double g = e.kind == 'R' ? 1.0 / e.value : e.value;
        stamp(e.kind == 'R' ? ta : te, e.a, e.b, g);
        if (e.param >= 1)
            stamp(e.kind == 'R' ? tai[static_cast<std::size_t>(e.param - 1)]
                                : tei[static_cast<std::size_t>(e.param - 1)],
                  e.a, e.b, 1.0);
    }

    sys.A0.resize(sys.n, sys.n);
    sys.A0.setFromTriplets(ta.begin(), ta.end());
    sys.E0.resize(sys.n, sys.n);
    sys.E0.setFromTriplets(te.begin(), te.end());
    for (int i = 0; i < max_param; ++i) {
        SpMat Ai(sys.n, sys.n), Ei(sys.n, sys.n);
        Ai.setFromTriplets(tai[static_cast<std::size_t>(i)].begin(), tai[static_cast<std::size_t>(i)].end());
        Ei.setFromTriplets(tei[static_cast<std::size_t>(i)].begin(), tei[static_cast<std::size_t>(i)].end());
        sys.Ai.push_back(std::move(Ai));
        sys.Ei.push_back(std::move(Ei));
    }

    sys.B = Eigen::MatrixXd::Zero(sys.n, 1);
    for (const auto& [node, amps] : injections) {
        if (node == ground) throw io_error("netlist: injection into the grounded node");
        sys.B(reduced(node), 0) += amps;
    }
    return sys;
}

inline ParamLinearSystem load_netlist_file(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw io_error("cannot open " + path);
    return load_netlist(is);
}

inline void save_trajectory_csv(std::ostream& os, const DaeTrajectory& tr) {
    char buf[64];
    auto put = [&](double v) {
        std::snprintf(buf, sizeof buf, "%.17g", v);
        os << buf;
    };
    os << "# t";
    for (int j = 0; j < tr.x.cols(); ++j) os << ",x" << j;
    for (std::size_t i = 0; i < tr.sens.size(); ++i)
        for (int j = 0; j < tr.x.cols(); ++j) os << ",dx" << j << "_dxi" << (i + 1);
    os << '\n';
    for (int k = 0; k < tr.t.size(); ++k) {
        put(tr.t[k]);
        for (int j = 0; j < tr.x.cols(); ++j) {
            os << ',';
            put(tr.x(k, j));
        }
        for (const auto& s : tr.sens)
            for (int j = 0; j < tr.x.cols(); ++j) {
                os << ',';
                put(s(k, j));
            }
        os << '\n';
    }
}

} // namespace gradpoly
