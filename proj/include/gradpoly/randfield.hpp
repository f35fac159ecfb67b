#pragma once

#include <cmath>
#include <utility>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include "gradpoly/basis.hpp"
#include "gradpoly/errors.hpp"

namespace gradpoly {

/// Lognormal transform k = exp(a + b g) of a standard Gaussian field g.
struct LognormalParams {
    double a = 0.0;
    double b = 0.0;

    LognormalParams() = default;
    LognormalParams(double a_, double b_) : a(a_), b(b_) {
        if (b < 0.0) throw parameter_error("LognormalParams: b must be >= 0");
    }

    double mean() const { return std::exp(a + 0.5 * b * b); }
    double stddev() const {
        return std::sqrt((std::exp(b * b) - 1.0) * std::exp(2.0 * a + b * b));
    }
};

/// Expansion optimal linear estimation of a stationary Gaussian field
/// with squared-exponential correlation exp(-|x-y|^2/sigma^2): the field
/// is reconstructed from the top-N eigenpairs of the node correlation
/// matrix.
class EoleModel {
public:
    static EoleModel build(const Eigen::MatrixXd& nodes, double sigma, int N) {
        const int nn = static_cast<int>(nodes.rows());
        if (nn < 1) throw parameter_error("EoleModel: need at least one node");
        if (!(sigma > 0.0)) throw parameter_error("EoleModel: sigma must be > 0");
        if (N < 1 || N > nn) throw parameter_error("EoleModel: N must be in [1, node count]");

        EoleModel m;
        m.nodes_ = nodes;
        m.sigma_ = sigma;
        m.N_ = N;

        Eigen::MatrixXd C(nn, nn);
        for (int i = 0; i < nn; ++i) {
            C(i, i) = 1.0;
            for (int j = i + 1; j < nn; ++j) {
                const double v = m.rho(nodes.row(i), nodes.row(j));
                C(i, j) = v;
                C(j, i) = v;
            }
        }

        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(C);
        if (eig.info() != Eigen::Success) throw numeric_error("EoleModel: eigensolve failed");

        // solver returns ascending order; keep the top N, descending
        m.eigvals_.resize(N);
        m.eigvecs_.resize(nn, N);
        for (int i = 0; i < N; ++i) {
            m.eigvals_[i] = eig.eigenvalues()[nn - 1 - i];
            m.eigvecs_.col(i) = eig.eigenvectors().col(nn - 1 - i);
        }
        if (!(m.eigvals_[N - 1] > 1e-12))
            throw degeneracy_error("EoleModel: truncation order too large for this grid "
                                   "(eigenvalue below 1e-12)");

        // do not trust the solver blindly: normalize and verify
        for (int i = 0; i < N; ++i) m.eigvecs_.col(i).normalize();
        const Eigen::MatrixXd gram = m.eigvecs_.transpose() * m.eigvecs_;
        const double defect = (gram - Eigen::MatrixXd::Identity(N, N)).cwiseAbs().maxCoeff();
        if (defect > 1e-8) throw numeric_error("EoleModel: eigenvectors not orthonormal");
        return m;
    }

    const Eigen::MatrixXd& nodes() const { return nodes_; }
    double sigma() const { return sigma_; }
    int truncation() const { return N_; }
    const Eigen::VectorXd& eigenvalues() const { return eigvals_; }
    const Eigen::MatrixXd& eigenvectors() const { return eigvecs_; }

    double rho(const Eigen::RowVectorXd& x, const Eigen::RowVectorXd& y) const {
        return std::exp(-(x - y).squaredNorm() / (sigma_ * sigma_));
    }

    /// Correlation vector between a query point and the model nodes.
    Eigen::VectorXd corr_with_nodes(const Eigen::RowVectorXd& x) const {
        Eigen::VectorXd c(nodes_.rows());
        for (int j = 0; j < nodes_.rows(); ++j) c[j] = rho(x, nodes_.row(j));
        return c;
    }

    /// g(x) = sum_i xi_i / sqrt(l_i) * (phi_i, C_x_eta) at each query point.
    Eigen::VectorXd sample_gaussian(const Eigen::VectorXd& xi, const Eigen::MatrixXd& queries) const {
        if (xi.size() != N_) throw parameter_error("EoleModel: xi must have N entries");
        if (queries.cols() != nodes_.cols())
            throw parameter_error("EoleModel: query dimension mismatch");
        const Eigen::VectorXd weights = xi.cwiseQuotient(eigvals_.cwiseSqrt());
        Eigen::VectorXd g(queries.rows());
        for (int q = 0; q < queries.rows(); ++q) {
            const Eigen::VectorXd c = corr_with_nodes(queries.row(q));
            g[q] = weights.dot(eigvecs_.transpose() * c);
        }
        return g;
    }

    Eigen::VectorXd sample_lognormal(const LognormalParams& p, const Eigen::VectorXd& xi,
                                     const Eigen::MatrixXd& queries) const {
        Eigen::VectorXd g = sample_gaussian(xi, queries);
        for (int q = 0; q < g.size(); ++q) g[q] = std::exp(p.a + p.b * g[q]);
        return g;
    }

private:
    EoleModel() = default;

    Eigen::MatrixXd nodes_;
    double sigma_ = 1.0;
    int N_ = 0;
    Eigen::VectorXd eigvals_;
    Eigen::MatrixXd eigvecs_;
};

/// Regular nx x ny grid of nodes covering a 2-D box.
inline Eigen::MatrixXd grid_nodes_2d(int nx, int ny, const DomainBox& box) {
    if (box.dim() != 2) throw parameter_error("grid_nodes_2d: box must be two-dimensional");
    if (nx < 1 || ny < 1) throw parameter_error("grid_nodes_2d: grid must be at least 1x1");
    Eigen::MatrixXd nodes(nx * ny, 2);
    for (int iy = 0; iy < ny; ++iy)
        for (int ix = 0; ix < nx; ++ix) {
            const double fx = nx == 1 ? 0.5 : static_cast<double>(ix) / (nx - 1);
            const double fy = ny == 1 ? 0.5 : static_cast<double>(iy) / (ny - 1);
            nodes(iy * nx + ix, 0) = box.lower[0] + fx * (box.upper[0] - box.lower[0]);
            nodes(iy * nx + ix, 1) = box.lower[1] + fy * (box.upper[1] - box.lower[1]);
        }
    return nodes;
}

} // namespace gradpoly
