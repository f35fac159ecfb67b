#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "gradpoly/basis.hpp"
#include "test_helpers.hpp"

using namespace gradpoly;
using test_helpers::fd_gradient;

namespace {

// Oracle for Hermite values: the bare three-term recurrence, written
// independently of the library path.
double hermite_oracle(int n, double t) {
    if (n == 0) return 1.0;
    if (n == 1) return t;
    double a = 1.0, b = t;
    for (int k = 2; k <= n; ++k) {
        const double c = t * b - (k - 1) * a;
        a = b;
        b = c;
    }
    return b;
}

} // namespace

TEST_CASE("univariate values", "[basis]") {
    CHECK(eval_1d(BasisFamily::chebyshev(), 2, 0.5) == Catch::Approx(-0.5));
    CHECK(eval_1d(BasisFamily::hermite(false), 3, 2.0) == Catch::Approx(2.0)); // t^3 - 3t
    CHECK(eval_1d(BasisFamily::hermite(false), 3, 2.0) == Catch::Approx(hermite_oracle(3, 2.0)));
    CHECK(eval_1d(BasisFamily::monomial(), 5, 2.0) == Catch::Approx(32.0));
    for (auto fam : {BasisFamily::chebyshev(), BasisFamily::hermite(true), BasisFamily::monomial()})
        CHECK(eval_1d(fam, 0, 0.37) == 1.0);
    CHECK_THROWS_AS(eval_1d(BasisFamily::chebyshev(), -1, 0.0), parameter_error);
}

TEST_CASE("univariate derivatives", "[basis]") {
    CHECK(deriv_1d(BasisFamily::chebyshev(), 2, 0.5) == Catch::Approx(2.0)); // 4t
    CHECK(deriv_1d(BasisFamily::hermite(false), 2, 1.0) == Catch::Approx(2.0)); // 2t
    CHECK(deriv_1d(BasisFamily::monomial(), 3, 2.0) == Catch::Approx(12.0));
    for (auto fam : {BasisFamily::chebyshev(), BasisFamily::hermite(true), BasisFamily::monomial()})
        CHECK(deriv_1d(fam, 0, 0.37) == 0.0);

    // against the raw recurrence: He'_n = n He_{n-1}
    for (int n = 1; n <= 8; ++n)
        for (double t : {-1.7, 0.3, 2.4})
            CHECK(deriv_1d(BasisFamily::hermite(false), n, t) ==
                  Catch::Approx(n * hermite_oracle(n - 1, t)));
}

TEST_CASE("chebyshev bounded on [-1,1]", "[basis]") {
    for (int n = 0; n <= 20; ++n)
        for (int i = 0; i <= 400; ++i) {
            const double t = -1.0 + 2.0 * i / 400.0;
            CHECK(std::abs(eval_1d(BasisFamily::chebyshev(), n, t)) <= 1.0 + 1e-12);
        }
}

TEST_CASE("hermite orthonormality by monte carlo", "[basis]") {
    std::mt19937_64 rng(123);
    std::normal_distribution<double> normal(0.0, 1.0);
    const int nmax = 5;
    const int samples = 1000000;
    Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(nmax + 1, nmax + 1);
    Eigen::VectorXd vals(nmax + 1);
    for (int s = 0; s < samples; ++s) {
        const double t = normal(rng);
        for (int n = 0; n <= nmax; ++n) vals[n] = eval_1d(BasisFamily::hermite(true), n, t);
        acc += vals * vals.transpose();
    }
    acc /= samples;
    for (int m = 0; m <= nmax; ++m)
        for (int n = 0; n <= nmax; ++n)
            CHECK(acc(m, n) == Catch::Approx(m == n ? 1.0 : 0.0).margin(1e-2));
}

TEST_CASE("tensor products", "[basis]") {
    SECTION("monomial, no box") {
        TensorBasis basis(BasisFamily::monomial(), MultiIndexSet::hyperbolic(2, 3.0, 1.0));
        Eigen::VectorXd x(2);
        x << 2.0, 3.0;
        CHECK(basis.eval(MultiIndex{{1, 2}}, x) == Catch::Approx(18.0));
    }
    SECTION("constant index") {
        TensorBasis basis(BasisFamily::chebyshev(), MultiIndexSet::hyperbolic(2, 2.0, 1.0),
                          DomainBox::cube(2, -2.0, 2.0));
        Eigen::VectorXd x(2);
        x << 1.3, -0.4;
        CHECK(basis.eval(MultiIndex{{0, 0}}, x) == 1.0);
        CHECK(basis.grad(MultiIndex{{0, 0}}, x).norm() == 0.0);
    }
    SECTION("chebyshev with box map") {
        TensorBasis basis(BasisFamily::chebyshev(), MultiIndexSet::hyperbolic(2, 2.0, 1.0),
                          DomainBox::cube(2, -2.0, 2.0));
        Eigen::VectorXd x(2);
        x << 1.0, 0.0; // maps to t = (0.5, 0)
        CHECK(basis.eval(MultiIndex{{2, 0}}, x) == Catch::Approx(-0.5));
        const Eigen::VectorXd g = basis.grad(MultiIndex{{2, 0}}, x);
        CHECK(g[0] == Catch::Approx(1.0)); // 4t * (2/4)
        CHECK(g[1] == Catch::Approx(0.0).margin(1e-15));
    }
    SECTION("monomial product rule") {
        TensorBasis basis(BasisFamily::monomial(), MultiIndexSet::hyperbolic(2, 2.0, 1.0));
        Eigen::VectorXd x(2);
        x << 1.7, -2.3;
        const Eigen::VectorXd g = basis.grad(MultiIndex{{1, 1}}, x);
        CHECK(g[0] == Catch::Approx(-2.3));
        CHECK(g[1] == Catch::Approx(1.7));
    }
    SECTION("dimension mismatch") {
        TensorBasis basis(BasisFamily::monomial(), MultiIndexSet::hyperbolic(2, 2.0, 1.0));
        Eigen::VectorXd x(3);
        x.setZero();
        CHECK_THROWS_AS(basis.eval(MultiIndex{{1, 0}}, x), parameter_error);
        CHECK_THROWS_AS(basis.eval(MultiIndex{{1, 0, 0}}, Eigen::VectorXd::Zero(2)), parameter_error);
    }
    SECTION("hermite rejects a box") {
        CHECK_THROWS_AS(TensorBasis(BasisFamily::hermite(true), MultiIndexSet::hyperbolic(2, 2.0, 1.0),
                                    DomainBox::cube(2, -1.0, 1.0)),
                        parameter_error);
    }
}

TEST_CASE("design rows", "[basis]") {
    SECTION("monomial rows") {
        // index set {(0,0),(0,1),(1,0)} in graded-lex order
        TensorBasis basis(BasisFamily::monomial(), MultiIndexSet::hyperbolic(2, 1.0, 1.0));
        Eigen::VectorXd x(2);
        x << 2.0, 3.0;
        const Eigen::RowVectorXd row = basis.design_row(x);
        REQUIRE(row.size() == 3);
        CHECK(row[0] == 1.0);
        CHECK(row[1] == 3.0); // (0,1) -> y
        CHECK(row[2] == 2.0); // (1,0) -> x
        const Eigen::MatrixXd g = basis.design_grad_rows(x);
        REQUIRE(g.rows() == 2);
        CHECK(g(0, 0) == 0.0);
        CHECK(g(0, 1) == 0.0);
        CHECK(g(0, 2) == 1.0);
        CHECK(g(1, 0) == 0.0);
        CHECK(g(1, 1) == 1.0);
        CHECK(g(1, 2) == 0.0);
    }
    SECTION("chebyshev 1d") {
        TensorBasis basis(BasisFamily::chebyshev(), MultiIndexSet::hyperbolic(1, 2.0, 1.0),
                          DomainBox::cube(1, -1.0, 1.0));
        Eigen::VectorXd x(1);
        x << 0.5;
        const Eigen::RowVectorXd row = basis.design_row(x);
        CHECK(row[0] == Catch::Approx(1.0));
        CHECK(row[1] == Catch::Approx(0.5));
        CHECK(row[2] == Catch::Approx(-0.5));
    }
}

TEST_CASE("gradients match finite differences", "[basis]") {
    std::mt19937_64 rng(99);
    std::uniform_int_distribution<int> deg(0, 4);

    auto check_family = [&](const TensorBasis& basis, double lo, double hi) {
        for (int rep = 0; rep < 100; ++rep) {
            MultiIndex idx{{deg(rng), deg(rng)}};
            const Eigen::VectorXd x = test_helpers::random_point(rng, 2, lo, hi);
            const Eigen::VectorXd g = basis.grad(idx, x);
            const Eigen::VectorXd fd =
                fd_gradient([&](const Eigen::VectorXd& y) { return basis.eval(idx, y); }, x);
            for (int k = 0; k < 2; ++k)
                CHECK(std::abs(g[k] - fd[k]) <= 1e-6 * std::max(1.0, std::abs(g[k])));
        }
    };

    check_family(TensorBasis(BasisFamily::chebyshev(), MultiIndexSet::hyperbolic(2, 4.0, 1.0),
                             DomainBox::cube(2, -2.0, 2.0)),
                 -1.8, 1.8);
    check_family(TensorBasis(BasisFamily::hermite(true), MultiIndexSet::hyperbolic(2, 4.0, 1.0)),
                 -2.0, 2.0);
    check_family(TensorBasis(BasisFamily::monomial(), MultiIndexSet::hyperbolic(2, 4.0, 1.0),
                             DomainBox::cube(2, -3.0, 3.0)),
                 -2.5, 2.5);
}

TEST_CASE("standardized hermite", "[basis]") {
    Eigen::VectorXd mu(2), sd(2);
    mu << 10000.0, 300.0;
    sd << 1000.0, 150.0;
    const auto basis = TensorBasis::hermite_standardized(MultiIndexSet::hyperbolic(2, 2.0, 1.0), mu, sd);
    CHECK(basis.orthonormal());

    // value at physical x equals the native evaluation at (x-mu)/sd
    Eigen::VectorXd x(2);
    x << 11000.0, 150.0; // standardizes to (1, -1)
    const TensorBasis native(BasisFamily::hermite(true), MultiIndexSet::hyperbolic(2, 2.0, 1.0));
    Eigen::VectorXd z(2);
    z << 1.0, -1.0;
    CHECK(basis.eval(MultiIndex{{2, 1}}, x) == Catch::Approx(native.eval(MultiIndex{{2, 1}}, z)));

    // chain rule: d/dx = (1/sd) d/dz
    const Eigen::VectorXd g = basis.grad(MultiIndex{{2, 1}}, x);
    const Eigen::VectorXd gz = native.grad(MultiIndex{{2, 1}}, z);
    CHECK(g[0] == Catch::Approx(gz[0] / 1000.0));
    CHECK(g[1] == Catch::Approx(gz[1] / 150.0));
}
