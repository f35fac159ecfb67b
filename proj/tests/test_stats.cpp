#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <sstream>

#include "gradpoly/stats.hpp"

using namespace gradpoly;

namespace {

TensorBasis hermite2(double q) {
    return TensorBasis(BasisFamily::hermite(true), MultiIndexSet::hyperbolic(2, q, 1.0));
}

Surrogate fit_normal_inputs(const ScalarFn& f, const GradientFn& g, const TensorBasis& basis,
                            std::uint64_t seed) {
    // sample fitting points from a box in standardized coordinates
    FitOptions opt;
    opt.m = 60;
    opt.N = 600;
    opt.seed = seed;
    return fit(f, g, DomainBox::cube(basis.dim(), -3.0, 3.0), basis, opt);
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

} // namespace

TEST_CASE("pce moments of explicit coefficient vectors", "[stats]") {
    const auto basis = hermite2(2.0);
    Eigen::VectorXd alpha = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(basis.size()));
    alpha[0] = 4.2;
    const Surrogate constant(basis, alpha);
    CHECK(pce_mean(constant) == 4.2);
    CHECK(pce_std(constant) == 0.0);

    // non-orthonormal bases are refused
    TensorBasis cheb(BasisFamily::chebyshev(), MultiIndexSet::hyperbolic(2, 2.0, 1.0),
                     DomainBox::cube(2, -1.0, 1.0));
    const Surrogate bad(cheb, Eigen::VectorXd::Zero(static_cast<Eigen::Index>(cheb.size())));
    CHECK_THROWS_AS(pce_mean(bad), contract_error);
    CHECK_THROWS_AS(pce_std(bad), contract_error);
}

TEST_CASE("pce moments of fitted surrogates", "[stats]") {
    SECTION("odd linear function has zero mean") {
        const auto f = [](const Eigen::VectorXd& x) { return x[0]; };
        const auto g = [](const Eigen::VectorXd& x) {
            Eigen::VectorXd v(2);
            v << 1.0, 0.0;
            (void)x;
            return v;
        };
        const Surrogate s = fit_normal_inputs(f, g, hermite2(2.0), 31);
        CHECK(pce_mean(s) == Catch::Approx(0.0).margin(1e-8));
        CHECK(pce_std(s) == Catch::Approx(1.0).epsilon(1e-8));
    }
    SECTION("xi^2 has mean one") {
        const auto f = [](const Eigen::VectorXd& x) { return x[0] * x[0]; };
        const auto g = [](const Eigen::VectorXd& x) {
            Eigen::VectorXd v(2);
            v << 2.0 * x[0], 0.0;
            return v;
        };
        const Surrogate s = fit_normal_inputs(f, g, hermite2(2.0), 32);
        CHECK(pce_mean(s) == Catch::Approx(1.0).margin(1e-6));
        // cross-check against Monte Carlo of the surrogate itself
        const auto mc = monte_carlo([&](const Eigen::VectorXd& x) { return s.eval(x); },
                                    InputDistribution::standard_normal(2), 1000000, 7);
        CHECK(mc.mean == Catch::Approx(pce_mean(s)).margin(3.0 * std::sqrt(2.0) / 1000.0));
    }
    SECTION("a + b xi recovers |b| as std") {
        const auto f = [](const Eigen::VectorXd& x) { return 5.0 - 3.0 * x[0]; };
        const Surrogate s = fit_normal_inputs(f, nullptr, hermite2(1.0), 33);
        CHECK(pce_mean(s) == Catch::Approx(5.0).margin(1e-8));
        CHECK(pce_std(s) == Catch::Approx(3.0).margin(1e-8));
    }
    SECTION("product of independent normals") {
        const auto f = [](const Eigen::VectorXd& x) { return x[0] * x[1]; };
        const auto g = [](const Eigen::VectorXd& x) {
            Eigen::VectorXd v(2);
            v << x[1], x[0];
            return v;
        };
        const Surrogate s = fit_normal_inputs(f, g, hermite2(2.0), 34);
        CHECK(pce_std(s) == Catch::Approx(1.0).margin(1e-6));
        const auto mc = monte_carlo(f, InputDistribution::standard_normal(2), 200000, 12);
        CHECK(pce_std(s) == Catch::Approx(mc.stddev).margin(1e-2));
    }
}

TEST_CASE("parseval consistency", "[stats]") {
    // second moment of the surrogate equals the coefficient sum of squares
    const auto f = [](const Eigen::VectorXd& x) {
        return 1.0 + x[0] + 0.5 * x[1] * x[1] + 0.25 * x[0] * x[1];
    };
    const Surrogate s = fit_normal_inputs(f, nullptr, hermite2(2.0), 35);
    const double alpha_ss = s.coefficients().squaredNorm();
    const auto mc = monte_carlo([&](const Eigen::VectorXd& x) { double v = s.eval(x); return v * v; },
                                InputDistribution::standard_normal(2), 1000000, 40);
    CHECK(mc.mean == Catch::Approx(alpha_ss).epsilon(0.01));
}

TEST_CASE("monte carlo basics", "[stats]") {
    SECTION("constant function") {
        const auto mc = monte_carlo([](const Eigen::VectorXd&) { return 2.5; },
                                    InputDistribution::standard_normal(1), 100, 1);
        CHECK(mc.mean == Catch::Approx(2.5));
        CHECK(mc.stddev == 0.0);
    }
    SECTION("standard normal moments at n=10^6") {
        const auto mc = monte_carlo([](const Eigen::VectorXd& x) { return x[0]; },
                                    InputDistribution::standard_normal(1), 1000000, 2);
        CHECK(mc.mean == Catch::Approx(0.0).margin(0.005));
        CHECK(mc.stddev == Catch::Approx(1.0).margin(0.005));
        // median of a symmetric distribution
        CHECK(mc.cdf(0.0) == Catch::Approx(0.5).margin(0.01));
    }
    SECTION("argument validation") {
        CHECK_THROWS_AS(monte_carlo([](const Eigen::VectorXd&) { return 0.0; },
                                    InputDistribution::standard_normal(1), 1, 1),
                        parameter_error);
    }
}

TEST_CASE("empirical cdf", "[stats]") {
    EmpiricalCdf cdf(std::vector<double>{3.0, 1.0, 2.0});
    CHECK(cdf(0.5) == 0.0);
    CHECK(cdf(1.0) == Catch::Approx(1.0 / 3.0)); // right-continuous
    CHECK(cdf(2.9) == Catch::Approx(2.0 / 3.0));
    CHECK(cdf(3.0) == 1.0);
    CHECK_THROWS_AS(EmpiricalCdf(std::vector<double>{}), parameter_error);

    std::ostringstream os;
    cdf.save_csv(os);
    CHECK(os.str().find("1,") == 0);
}

TEST_CASE("surrogate cdf", "[stats]") {
    SECTION("constant surrogate steps at its value") {
        const auto basis = hermite2(1.0);
        Eigen::VectorXd alpha = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(basis.size()));
        alpha[0] = 1.5;
        const Surrogate s(basis, alpha);
        const auto cdf = surrogate_cdf(s, InputDistribution::standard_normal(2), 1000, 3);
        CHECK(cdf(1.4999) == 0.0);
        CHECK(cdf(1.5) == 1.0);
    }
    SECTION("linear surrogate of gaussian input matches the analytic normal cdf") {
        // f = mu + b xi -> N(mu, b)
        const auto f = [](const Eigen::VectorXd& x) { return 2.0 + 0.5 * x[0]; };
        const Surrogate s = fit_normal_inputs(f, nullptr, hermite2(1.0), 36);
        const int n = 100000;
        const auto cdf = surrogate_cdf(s, InputDistribution::standard_normal(2), n, 4);
        double ks = 0.0;
        for (double v = 0.0; v <= 4.0; v += 0.01)
            ks = std::max(ks, std::abs(cdf(v) - normal_cdf((v - 2.0) / 0.5)));
        CHECK(ks <= 0.01);
    }
    SECTION("identical seeds give identical cdfs") {
        const auto f = [](const Eigen::VectorXd& x) { return x[0] + x[1]; };
        const Surrogate s = fit_normal_inputs(f, nullptr, hermite2(1.0), 37);
        const auto a = surrogate_cdf(s, InputDistribution::standard_normal(2), 5000, 8);
        const auto b = surrogate_cdf(s, InputDistribution::standard_normal(2), 5000, 8);
        CHECK(a.sorted_values() == b.sorted_values());
    }
}

TEST_CASE("input distribution parsing and validation", "[stats]") {
    const auto d = InputDistribution::parse("normal,10000,1000;uniform,-2,2");
    REQUIRE(d.dim() == 2);
    CHECK(std::holds_alternative<NormalMarginal>(d.marginals()[0]));
    CHECK(std::holds_alternative<UniformMarginal>(d.marginals()[1]));
    CHECK_THROWS_AS(InputDistribution::parse("normal,0,-1"), parameter_error);
    CHECK_THROWS_AS(InputDistribution::parse("uniform,2,2"), parameter_error);
    CHECK_THROWS_AS(InputDistribution::parse("beta,1,1"), parameter_error);

    std::mt19937_64 rng(1);
    const auto x = d.sample(rng);
    CHECK(x.size() == 2);
    CHECK(x[1] >= -2.0);
    CHECK(x[1] <= 2.0);
}
