#include "doctest.h"

#include <random>

#include "firenet/core.hpp"
#include "firenet/types.hpp"
#include "oracles.hpp"

using namespace firenet;

namespace {

HoldingsMatrix make(const Matrix& m) { return HoldingsMatrix(m); }

Matrix mat2(double a, double b, double c, double d) {
    Matrix m(2, 2);
    m << a, b, c, d;
    return m;
}

}  // namespace

TEST_CASE("marginals of a 2x2 example") {
    auto s = marginals(make(mat2(1, 2, 3, 4)));
    CHECK(s.bank_sizes[0] == 3.0);
    CHECK(s.bank_sizes[1] == 7.0);
    CHECK(s.asset_caps[0] == 4.0);
    CHECK(s.asset_caps[1] == 6.0);
    CHECK(s.total == 10.0);
}

TEST_CASE("marginals of an all-zero matrix are rejected by StrengthSequences") {
    CHECK_THROWS_AS(marginals(make(Matrix::Zero(2, 2))), ValidationError);
}

TEST_CASE("marginals match the summation oracle on random integer matrices") {
    std::mt19937_64 rng(7);
    for (int rep = 0; rep < 20; ++rep) {
        Matrix x = oracle::random_matrix(rng, 5, 3);
        auto s = marginals(make(x));
        Vector a = oracle::row_sums(x), c = oracle::col_sums(x);
        for (Eigen::Index n = 0; n < 5; ++n)
            CHECK(s.bank_sizes[n] == doctest::Approx(a[n]).epsilon(1e-14));
        for (Eigen::Index k = 0; k < 3; ++k)
            CHECK(s.asset_caps[k] == doctest::Approx(c[k]).epsilon(1e-14));
    }
}

TEST_CASE("marginals are linear") {
    std::mt19937_64 rng(13);
    Matrix x = oracle::random_matrix(rng, 6, 4);
    Matrix y = oracle::random_matrix(rng, 6, 4);
    auto sx = marginals(make(x)), sy = marginals(make(y)), sxy = marginals(make(x + y));
    for (Eigen::Index n = 0; n < 6; ++n)
        CHECK(sxy.bank_sizes[n] ==
              doctest::Approx(sx.bank_sizes[n] + sy.bank_sizes[n]).epsilon(1e-14));
    for (Eigen::Index k = 0; k < 4; ++k)
        CHECK(sxy.asset_caps[k] ==
              doctest::Approx(sx.asset_caps[k] + sy.asset_caps[k]).epsilon(1e-14));
}

TEST_CASE("degrees on examples") {
    auto d = degrees(make(mat2(1, 0, 0, 2)));
    CHECK(d.bank_degrees[0] == 1);
    CHECK(d.bank_degrees[1] == 1);
    CHECK(d.asset_degrees[0] == 1);
    CHECK(d.asset_degrees[1] == 1);

    Matrix full = Matrix::Constant(3, 4, 2.0);
    auto df = degrees(make(full));
    for (int n = 0; n < 3; ++n) CHECK(df.bank_degrees[n] == 4);
    for (int k = 0; k < 4; ++k) CHECK(df.asset_degrees[k] == 3);
}

TEST_CASE("degrees match the counting oracle on sparse matrices") {
    std::mt19937_64 rng(99);
    for (int rep = 0; rep < 10; ++rep) {
        Matrix x = oracle::random_matrix(rng, 10, 5, 50.0, 0.6);
        x(0, 0) = std::max(x(0, 0), 1.0);  // keep the total positive
        auto d = degrees(make(x));
        Eigen::VectorXi dr = oracle::row_degrees(x), dc = oracle::col_degrees(x);
        CHECK((d.bank_degrees - dr).cwiseAbs().maxCoeff() == 0);
        CHECK((d.asset_degrees - dc).cwiseAbs().maxCoeff() == 0);
    }
}

TEST_CASE("degree threshold is strict and configurable") {
    Matrix m(2, 2);
    m << 0.5, 1.5, 2.0, 0.0;
    auto d = degrees(make(m), 1.5);
    CHECK(d.bank_degrees[0] == 0);  // 1.5 is not > 1.5
    CHECK(d.bank_degrees[1] == 1);
}

TEST_CASE("zero bank degree exactly when bank size is zero") {
    std::mt19937_64 rng(5);
    Matrix x = oracle::random_matrix(rng, 8, 4, 20.0, 0.5);
    x.row(3).setZero();
    x(0, 0) = std::max(x(0, 0), 1.0);
    auto d = degrees(make(x));
    Vector a = oracle::row_sums(x);
    for (Eigen::Index n = 0; n < 8; ++n) CHECK((d.bank_degrees[n] == 0) == (a[n] == 0.0));
}

TEST_CASE("weights on examples") {
    Matrix one_row(1, 2);
    one_row << 2, 2;
    Matrix w = weights(make(one_row));
    CHECK(w(0, 0) == 0.5);
    CHECK(w(0, 1) == 0.5);

    Matrix wd = weights(make(mat2(1, 0, 0, 1)));
    CHECK(wd(0, 0) == 1.0);
    CHECK(wd(1, 1) == 1.0);
    CHECK(wd(0, 1) == 0.0);

    Matrix r(1, 3);
    r << 3, 1, 0;
    Matrix wr = weights(make(r));
    CHECK(wr(0, 0) == 0.75);
    CHECK(wr(0, 1) == 0.25);
    CHECK(wr(0, 2) == 0.0);
}

TEST_CASE("weights rejects zero rows and names the banks") {
    try {
        weights(make(mat2(0, 0, 1, 2)));
        FAIL("expected ZeroRowError");
    } catch (const ZeroRowError& e) {
        REQUIRE(e.banks().size() == 1);
        CHECK(e.banks()[0] == 0);
    }
}

TEST_CASE("weights are row-stochastic") {
    std::mt19937_64 rng(21);
    for (int rep = 0; rep < 10; ++rep) {
        Matrix x = oracle::random_matrix(rng, 12, 7, 1000.0, 0.3);
        for (Eigen::Index n = 0; n < x.rows(); ++n)
            if (oracle::row_sums(x)[n] == 0.0) x(n, 0) = 1.0;
        Matrix w = weights(make(x));
        for (Eigen::Index n = 0; n < w.rows(); ++n) {
            double sum = 0.0;
            for (Eigen::Index k = 0; k < w.cols(); ++k) {
                sum += w(n, k);
                CHECK(w(n, k) >= 0.0);
                CHECK(w(n, k) <= 1.0);
            }
            CHECK(std::abs(sum - 1.0) < 1e-12);
        }
    }
}

TEST_CASE("type invariants") {
    SUBCASE("holdings needs matching unique ids") {
        CHECK_THROWS_AS(HoldingsMatrix(mat2(1, 2, 3, 4), {"a"}, {"x", "y"}), ValidationError);
        CHECK_THROWS_AS(HoldingsMatrix(mat2(1, 2, 3, 4), {"a", "a"}, {"x", "y"}), ValidationError);
    }
    SUBCASE("holdings entries must be non-negative and finite") {
        CHECK_THROWS_AS(make(mat2(1, -2, 3, 4)), ValidationError);
        CHECK_THROWS_AS(make(mat2(1, std::nan(""), 3, 4)), ValidationError);
    }
    SUBCASE("strength balance condition") {
        Vector a(2), c(2);
        a << 3, 7;
        c << 4, 6.1;
        CHECK_THROWS_AS(StrengthSequences(a, c), ValidationError);
    }
    SUBCASE("bank sheet requires positive equity, leverage is derived exactly") {
        Vector sizes(2), eq(2);
        sizes << 100, 50;
        eq << 10, 5;
        BankSheet sheet(sizes, eq);
        CHECK(sheet.leverages[0] == (100.0 - 10.0) / 10.0);
        CHECK(sheet.leverages[1] == (50.0 - 5.0) / 5.0);
        eq[1] = 0.0;
        CHECK_THROWS_AS(BankSheet(sizes, eq), ValidationError);
    }
    SUBCASE("degree sequences must agree on the edge count") {
        IntVector dr(2), dc(2);
        dr << 1, 1;
        dc << 2, 1;
        CHECK_THROWS_AS(DegreeSequences(dr, dc), ValidationError);
    }
    SUBCASE("market params defaults zero out the cash column") {
        MarketParams mkt = MarketParams::defaults({"cash", "bonds"});
        CHECK(mkt.illiquidity[0] == 0.0);
        CHECK(mkt.illiquidity[1] == 1e-10);
        CHECK(mkt.shock[0] == 0.01);
    }
}
