#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <random>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "gradpoly/errors.hpp"
#include "gradpoly/gels.hpp"

namespace gradpoly {

struct NormalMarginal {
    double mu = 0.0;
    double sigma = 1.0;
};

struct UniformMarginal {
    double a = 0.0;
    double b = 1.0;
};

using Marginal = std::variant<NormalMarginal, UniformMarginal>;

/// Independent per-parameter input distribution.
class InputDistribution {
public:
    InputDistribution() = default;
    explicit InputDistribution(std::vector<Marginal> marginals) : m_(std::move(marginals)) {
        for (const auto& mg : m_) {
            if (const auto* n = std::get_if<NormalMarginal>(&mg)) {
                if (!(n->sigma > 0.0)) throw parameter_error("InputDistribution: sigma must be > 0");
            } else {
                const auto& u = std::get<UniformMarginal>(mg);
                if (!(u.a < u.b)) throw parameter_error("InputDistribution: need a < b");
            }
        }
    }

    static InputDistribution standard_normal(int l) {
        return InputDistribution(std::vector<Marginal>(static_cast<std::size_t>(l), NormalMarginal{}));
    }

    int dim() const { return static_cast<int>(m_.size()); }
    const std::vector<Marginal>& marginals() const { return m_; }

    Eigen::VectorXd sample(std::mt19937_64& rng) const {
        Eigen::VectorXd x(dim());
        for (int k = 0; k < dim(); ++k) {
            if (const auto* n = std::get_if<NormalMarginal>(&m_[static_cast<std::size_t>(k)])) {
                std::normal_distribution<double> d(n->mu, n->sigma);
                x[k] = d(rng);
            } else {
                const auto& u = std::get<UniformMarginal>(m_[static_cast<std::size_t>(k)]);
                std::uniform_real_distribution<double> d(u.a, u.b);
                x[k] = d(rng);
            }
        }
        return x;
    }

    /// Text form used by the CLI: "normal,0,1;uniform,-2,2".
    static InputDistribution parse(const std::string& text) {
        std::vector<Marginal> ms;
        std::size_t pos = 0;
        while (pos <= text.size()) {
            std::size_t end = text.find(';', pos);
            if (end == std::string::npos) end = text.size();
            std::string part = text.substr(pos, end - pos);
            for (char& c : part)
                if (c == ',') c = ' ';
            std::istringstream ps(part);
            std::string kind;
            double a = 0.0, b = 0.0;
            if (!(ps >> kind >> a >> b)) throw parameter_error("InputDistribution: malformed marginal '" + part + "'");
            if (kind == "normal")
                ms.push_back(NormalMarginal{a, b});
            else if (kind == "uniform")
                ms.push_back(UniformMarginal{a, b});
            else
                throw parameter_error("InputDistribution: unknown marginal kind '" + kind + "'");
            pos = end + 1;
            if (end == text.size()) break;
        }
        return InputDistribution(std::move(ms));
    }

private:
    std::vector<Marginal> m_;
};

/// Right-continuous empirical distribution function.
class EmpiricalCdf {
public:
    EmpiricalCdf() = default;
    explicit EmpiricalCdf(std::vector<double> samples) : v_(std::move(samples)) {
        if (v_.empty()) throw parameter_error("EmpiricalCdf: empty sample");
        std::sort(v_.begin(), v_.end());
    }

    std::size_t count() const { return v_.size(); }
    const std::vector<double>& sorted_values() const { return v_; }

    double operator()(double x) const {
        const auto it = std::upper_bound(v_.begin(), v_.end(), x);
        return static_cast<double>(it - v_.begin()) / static_cast<double>(v_.size());
    }

    void save_csv(std::ostream& os) const {
        char buf[64];
        for (std::size_t i = 0; i < v_.size(); ++i) {
            std::snprintf(buf, sizeof buf, "%.17g", v_[i]);
            os << buf << ',' << (static_cast<double>(i + 1) / static_cast<double>(v_.size()))
               << '\n';
        }
    }

    void save_csv(const std::string& path) const {
        std::ofstream os(path);
        if (!os) throw io_error("cannot open " + path + " for writing");
        save_csv(os);
    }

private:
    std::vector<double> v_;
};

/// First PCE moment: the coefficient of the constant polynomial. Valid
/// only when the basis is orthonormal for the fitted input measure.
inline double pce_mean(const Surrogate& s) {
    if (!s.basis().orthonormal())
        throw contract_error("pce_mean: basis is not orthonormal (use normalized Hermite)");
    return s.coefficients()[0];
}

/// PCE standard deviation: sqrt of the sum of squared non-constant
/// coefficients.
inline double pce_std(const Surrogate& s) {
    if (!s.basis().orthonormal())
        throw contract_error("pce_std: basis is not orthonormal (use normalized Hermite)");
    const auto& a = s.coefficients();
    double ss = 0.0;
    for (Eigen::Index i = 1; i < a.size(); ++i) ss += a[i] * a[i];
    return std::sqrt(ss);
}

struct McResult {
    double mean = 0.0;
    double stddev = 0.0;
    EmpiricalCdf cdf;
};

/// Plain Monte Carlo reference: sample statistics with unbiased variance.
inline McResult monte_carlo(const ScalarFn& f, const InputDistribution& dist, int n,
                            std::uint64_t seed) {
    if (n < 2) throw parameter_error("monte_carlo: need n >= 2");
    std::mt19937_64 rng(seed);
    std::vector<double> vals(static_cast<std::size_t>(n));
    double sum = 0.0;
    for (int i = 0; i < n; ++i) {
        const double v = f(dist.sample(rng));
        vals[static_cast<std::size_t>(i)] = v;
        sum += v;
    }
    const double mean = sum / n;
    double ss = 0.0;
    for (double v : vals) ss += (v - mean) * (v - mean);
    McResult r;
    r.mean = mean;
    r.stddev = std::sqrt(ss / (n - 1));
    r.cdf = EmpiricalCdf(std::move(vals));
    return r;
}

inline EmpiricalCdf surrogate_cdf(const Surrogate& s, const InputDistribution& dist, int n,
                                  std::uint64_t seed) {
    if (n < 1) throw parameter_error("surrogate_cdf: need n >= 1");
    if (dist.dim() != s.dim()) throw parameter_error("surrogate_cdf: distribution dimension mismatch");
    std::mt19937_64 rng(seed);
    std::vector<double> vals(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) vals[static_cast<std::size_t>(i)] = s.eval(dist.sample(rng));
    return EmpiricalCdf(std::move(vals));
}

} // namespace gradpoly
