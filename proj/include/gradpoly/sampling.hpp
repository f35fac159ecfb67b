#pragma once

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <ostream>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "gradpoly/basis.hpp"
#include "gradpoly/errors.hpp"

namespace gradpoly {

enum class Provenance { uniform, lhs, maxvol_reduced };

inline std::string to_string(Provenance p) {
    switch (p) {
        case Provenance::uniform: return "uniform";
        case Provenance::lhs: return "lhs";
        case Provenance::maxvol_reduced: return "maxvol-reduced";
    }
    return "?";
}

/// Evaluation points inside a box, one point per row, with the RNG seed
/// that produced them.
struct PointSet {
    Eigen::MatrixXd points;
    DomainBox box;
    Provenance provenance = Provenance::uniform;
    std::uint64_t seed = 0;

    int n() const { return static_cast<int>(points.rows()); }
    int dim() const { return static_cast<int>(points.cols()); }
    Eigen::VectorXd point(int i) const { return points.row(i).transpose(); }
};

inline PointSet uniform_random(const DomainBox& box, int n, std::uint64_t seed) {
    if (n < 1) throw parameter_error("uniform_random: need at least one point");
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const int l = box.dim();
    Eigen::MatrixXd pts(n, l);
    for (int i = 0; i < n; ++i)
        for (int k = 0; k < l; ++k)
            pts(i, k) = box.lower[k] + (box.upper[k] - box.lower[k]) * unit(rng);
    return PointSet{std::move(pts), box, Provenance::uniform, seed};
}

/// Latin hypercube: per dimension exactly one point in each of the n
/// equal-width strata, strata permuted independently per dimension.
inline PointSet lhs(const DomainBox& box, int n, std::uint64_t seed) {
    if (n < 1) throw parameter_error("lhs: need at least one point");
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const int l = box.dim();
    Eigen::MatrixXd pts(n, l);
    std::vector<int> perm(static_cast<std::size_t>(n));
    for (int k = 0; k < l; ++k) {
        std::iota(perm.begin(), perm.end(), 0);
        std::shuffle(perm.begin(), perm.end(), rng);
        for (int i = 0; i < n; ++i) {
            const double u = (static_cast<double>(perm[static_cast<std::size_t>(i)]) + unit(rng)) /
                             static_cast<double>(n);
            pts(i, k) = box.lower[k] + (box.upper[k] - box.lower[k]) * u;
        }
    }
    return PointSet{std::move(pts), box, Provenance::lhs, seed};
}

inline PointSet subset(const PointSet& ps, const std::vector<int>& rows) {
    Eigen::MatrixXd pts(static_cast<Eigen::Index>(rows.size()), ps.points.cols());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (rows[i] < 0 || rows[i] >= ps.n()) throw parameter_error("subset: row out of range");
        pts.row(static_cast<Eigen::Index>(i)) = ps.points.row(rows[i]);
    }
    return PointSet{std::move(pts), ps.box, Provenance::maxvol_reduced, ps.seed};
}

/// Select m rows of an n x r candidate matrix (n >= m >= r): square
/// maxvol row swaps on the first r until the dominance condition
/// |C Chat^-1|_max <= 1+delta holds, then greedy rows that maximize the
/// determinant of the growing Gram matrix. Deterministic for fixed input.
inline std::vector<int> maxvol_select(const Eigen::MatrixXd& C, int m, double delta = 0.01,
                                      int max_swaps = 200) {
    const int n = static_cast<int>(C.rows());
    const int r = static_cast<int>(C.cols());
    if (r < 1 || n < r) throw parameter_error("maxvol_select: need n >= r >= 1");
    if (m < r || m > n) throw parameter_error("maxvol_select: need r <= m <= n");

    // Initial rows from row-pivoted elimination; also certifies column rank.
    std::vector<int> sel;
    sel.reserve(static_cast<std::size_t>(m));
    {
        Eigen::MatrixXd W = C;
        std::vector<char> used(static_cast<std::size_t>(n), 0);
        const double scale = C.cwiseAbs().maxCoeff();
        if (scale == 0.0) throw degeneracy_error("maxvol_select: zero candidate matrix");
        for (int j = 0; j < r; ++j) {
            int piv = -1;
            double best = 0.0;
            for (int i = 0; i < n; ++i) {
                if (used[static_cast<std::size_t>(i)]) continue;
                const double v = std::abs(W(i, j));
                if (v > best) {
                    best = v;
                    piv = i;
                }
            }
            if (piv < 0 || best <= 1e-12 * scale)
                throw degeneracy_error("maxvol_select: candidate matrix is rank deficient");
            used[static_cast<std::size_t>(piv)] = 1;
            sel.push_back(piv);
            const Eigen::RowVectorXd pivot_row = W.row(piv) / W(piv, j);
            for (int i = 0; i < n; ++i)
                if (!used[static_cast<std::size_t>(i)] && W(i, j) != 0.0)
                    W.row(i) -= W(i, j) * pivot_row;
        }
    }

    // Square maxvol: swap candidate rows into the selection while some
    // coefficient exceeds 1+delta; each swap grows |det| by that factor.
    Eigen::MatrixXd Chat(r, r);
    for (int j = 0; j < r; ++j) Chat.row(j) = C.row(sel[static_cast<std::size_t>(j)]);
    Eigen::MatrixXd Z = Chat.transpose().partialPivLu().solve(C.transpose()).transpose();
    int swaps = 0;
    for (;; ++swaps) {
        int bi = -1, bj = -1;
        double best = 0.0;
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < r; ++j) {
                const double v = std::abs(Z(i, j));
                if (v > best) {
                    best = v;
                    bi = i;
                    bj = j;
                }
            }
        if (best <= 1.0 + delta) break;
        if (swaps >= max_swaps)
            throw convergence_error("maxvol_select: dominance not reached within swap cap");
        // rank-1 update of Z = C Chat^-1 after replacing selected row bj by row bi
        Eigen::VectorXd col = Z.col(bj);
        col(bi) -= 1.0;
        Eigen::RowVectorXd row = Z.row(bi);
        row(bj) -= 1.0;
        Z -= col * row / Z(bi, bj);
        sel[static_cast<std::size_t>(bj)] = bi;
    }

    if (m == r) return sel;

    // Rectangular stage: append the row maximizing 1 + c^T G^-1 c, the
    // factor by which det(G) grows when the row joins the selection.
    Eigen::MatrixXd G = Eigen::MatrixXd::Zero(r, r);
    for (int j : sel) G += C.row(j).transpose() * C.row(j);
    Eigen::MatrixXd Ginv = G.partialPivLu().inverse();
    std::vector<char> chosen(static_cast<std::size_t>(n), 0);
    for (int j : sel) chosen[static_cast<std::size_t>(j)] = 1;
    Eigen::VectorXd score(n);
    for (int i = 0; i < n; ++i) score[i] = 1.0 + C.row(i) * Ginv * C.row(i).transpose();

    while (static_cast<int>(sel.size()) < m) {
        int pick = -1;
        double best = -1.0;
        for (int i = 0; i < n; ++i) {
            if (chosen[static_cast<std::size_t>(i)]) continue;
            if (score[i] > best) {
                best = score[i];
                pick = i;
            }
        }
        sel.push_back(pick);
        chosen[static_cast<std::size_t>(pick)] = 1;
        const Eigen::VectorXd v = Ginv * C.row(pick).transpose();
        const double denom = 1.0 + C.row(pick) * v;
        const Eigen::VectorXd w = C * v;
        score -= w.cwiseProduct(w) / denom;
        Ginv -= (v * v.transpose()) / denom;
    }
    return sel;
}

inline void save_points_csv(std::ostream& os, const PointSet& ps) {
    os << "# seed=" << ps.seed << " provenance=" << to_string(ps.provenance) << '\n';
    char buf[64];
    for (int i = 0; i < ps.n(); ++i) {
        for (int k = 0; k < ps.dim(); ++k) {
            std::snprintf(buf, sizeof buf, "%.17g", ps.points(i, k));
            os << (k ? "," : "") << buf;
        }
        os << '\n';
    }
}

inline void save_points_csv(const std::string& path, const PointSet& ps) {
    std::ofstream os(path);
    if (!os) throw io_error("cannot open " + path + " for writing");
    save_points_csv(os, ps);
}

} // namespace gradpoly
