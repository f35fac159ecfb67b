#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <functional>
#include <random>
#include <sstream>
#include <vector>

#include "gradpoly/sampling.hpp"

using namespace gradpoly;

namespace {

// Oracle: exhaustive max-|det| over all r-subsets of the candidate rows.
double brute_force_best_det(const Eigen::MatrixXd& C) {
    const int n = static_cast<int>(C.rows());
    const int r = static_cast<int>(C.cols());
    std::vector<int> pick(static_cast<std::size_t>(r));
    double best = 0.0;
    std::function<void(int, int)> rec = [&](int start, int k) {
        if (k == r) {
            Eigen::MatrixXd S(r, r);
            for (int j = 0; j < r; ++j) S.row(j) = C.row(pick[static_cast<std::size_t>(j)]);
            best = std::max(best, std::abs(S.determinant()));
            return;
        }
        for (int i = start; i < n; ++i) {
            pick[static_cast<std::size_t>(k)] = i;
            rec(i + 1, k + 1);
        }
    };
    rec(0, 0);
    return best;
}

} // namespace

TEST_CASE("uniform sampling is deterministic and in range", "[sampling]") {
    const auto box = DomainBox::cube(2, -2.0, 2.0);
    const auto a = uniform_random(box, 10000, 42);
    const auto b = uniform_random(box, 10000, 42);
    CHECK((a.points.array() == b.points.array()).all());
    CHECK(a.points.minCoeff() >= -2.0);
    CHECK(a.points.maxCoeff() <= 2.0);
    CHECK(!(uniform_random(box, 5, 7).points.array() == uniform_random(box, 5, 8).points.array())
               .all());
    CHECK_THROWS_AS(uniform_random(box, 0, 1), parameter_error);
}

TEST_CASE("uniform sampling mean", "[sampling]") {
    const auto ps = uniform_random(DomainBox::cube(1, 0.0, 1.0), 100000, 11);
    CHECK(ps.points.col(0).mean() == Catch::Approx(0.5).margin(0.01));
}

TEST_CASE("lhs stratification", "[sampling]") {
    SECTION("n=4 in 1d") {
        const auto ps = lhs(DomainBox::cube(1, 0.0, 1.0), 4, 3);
        std::vector<double> xs(ps.points.col(0).data(), ps.points.col(0).data() + 4);
        std::sort(xs.begin(), xs.end());
        for (int i = 0; i < 4; ++i) {
            CHECK(xs[static_cast<std::size_t>(i)] >= i * 0.25);
            CHECK(xs[static_cast<std::size_t>(i)] < (i + 1) * 0.25);
        }
    }
    SECTION("marginals exactly flat at stratum resolution, n=100 l=5") {
        const int n = 100;
        const auto ps = lhs(DomainBox::cube(5, -1.0, 3.0), n, 17);
        for (int k = 0; k < 5; ++k) {
            std::vector<int> count(static_cast<std::size_t>(n), 0);
            for (int i = 0; i < n; ++i) {
                const double u = (ps.points(i, k) + 1.0) / 4.0;
                const int stratum = std::min(n - 1, static_cast<int>(u * n));
                ++count[static_cast<std::size_t>(stratum)];
            }
            CHECK(std::all_of(count.begin(), count.end(), [](int c) { return c == 1; }));
        }
    }
    SECTION("determinism") {
        const auto a = lhs(DomainBox::cube(3, 0.0, 1.0), 16, 5);
        const auto b = lhs(DomainBox::cube(3, 0.0, 1.0), 16, 5);
        CHECK((a.points.array() == b.points.array()).all());
    }
}

TEST_CASE("maxvol picks the dominant rows", "[sampling]") {
    Eigen::MatrixXd C(4, 2);
    C << 1, 0, 0, 1, 10, 0, 0, 10;
    auto sel = maxvol_select(C, 2);
    std::sort(sel.begin(), sel.end());
    CHECK(sel == std::vector<int>{2, 3});

    // brute-force cross-check on the same matrix
    Eigen::MatrixXd S(2, 2);
    S << 10, 0, 0, 10;
    CHECK(std::abs(S.determinant()) == Catch::Approx(brute_force_best_det(C)));
}

TEST_CASE("maxvol on the identity keeps everything", "[sampling]") {
    const Eigen::MatrixXd C = Eigen::MatrixXd::Identity(6, 6);
    auto sel = maxvol_select(C, 6);
    std::sort(sel.begin(), sel.end());
    CHECK(sel == std::vector<int>{0, 1, 2, 3, 4, 5});
}

TEST_CASE("maxvol dominance postcondition", "[sampling]") {
    std::mt19937_64 rng(2024);
    std::normal_distribution<double> normal;
    const double delta = 0.01;
    for (int rep = 0; rep < 20; ++rep) {
        Eigen::MatrixXd C(30, 4);
        for (int i = 0; i < C.size(); ++i) C.data()[i] = normal(rng);
        const auto sel = maxvol_select(C, 10, delta);
        REQUIRE(sel.size() == 10);
        // no duplicates
        auto sorted = sel;
        std::sort(sorted.begin(), sorted.end());
        CHECK(std::adjacent_find(sorted.begin(), sorted.end()) == sorted.end());
        // dominance of the square stage
        Eigen::MatrixXd Chat(4, 4);
        for (int j = 0; j < 4; ++j) Chat.row(j) = C.row(sel[static_cast<std::size_t>(j)]);
        const Eigen::MatrixXd Z = Chat.transpose().partialPivLu().solve(C.transpose()).transpose();
        CHECK(Z.cwiseAbs().maxCoeff() <= 1.0 + delta + 1e-9);
    }
}

TEST_CASE("maxvol determinant within (1+delta)^r of exhaustive best", "[sampling]") {
    std::mt19937_64 rng(7);
    std::normal_distribution<double> normal;
    for (int rep = 0; rep < 100; ++rep) {
        Eigen::MatrixXd C(8, 3);
        for (int i = 0; i < C.size(); ++i) C.data()[i] = normal(rng);
        const auto sel = maxvol_select(C, 3, 0.01);
        Eigen::MatrixXd S(3, 3);
        for (int j = 0; j < 3; ++j) S.row(j) = C.row(sel[static_cast<std::size_t>(j)]);
        const double got = std::abs(S.determinant());
        const double best = brute_force_best_det(C);
        CHECK(got >= best / std::pow(1.01, 3) - 1e-12);
    }
}

TEST_CASE("maxvol error conditions", "[sampling]") {
    Eigen::MatrixXd C(4, 2);
    C << 1, 2, 2, 4, 3, 6, 4, 8; // rank 1
    CHECK_THROWS_AS(maxvol_select(C, 2), degeneracy_error);

    Eigen::MatrixXd ok(4, 2);
    ok << 1, 0, 0, 1, 1, 1, 2, 1;
    CHECK_THROWS_AS(maxvol_select(ok, 5), parameter_error);
    CHECK_THROWS_AS(maxvol_select(ok, 1), parameter_error);
}

TEST_CASE("maxvol is deterministic", "[sampling]") {
    std::mt19937_64 rng(31);
    std::normal_distribution<double> normal;
    Eigen::MatrixXd C(50, 5);
    for (int i = 0; i < C.size(); ++i) C.data()[i] = normal(rng);
    CHECK(maxvol_select(C, 12) == maxvol_select(C, 12));
}

TEST_CASE("point csv carries seed and provenance", "[sampling]") {
    const auto ps = uniform_random(DomainBox::cube(2, 0.0, 1.0), 3, 99);
    std::ostringstream os;
    save_points_csv(os, ps);
    const std::string text = os.str();
    CHECK(text.find("# seed=99 provenance=uniform") == 0);
    CHECK(std::count(text.begin(), text.end(), '\n') == 4);
}
