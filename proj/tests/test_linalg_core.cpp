#include "flagdyn/errors.hpp"
#include "flagdyn/linalg_core.hpp"

#include <doctest.h>

#include <cmath>
#include <cstring>
#include <random>

using namespace flagdyn;

namespace {

Matrix m2(double a, double b, double c, double d) {
    Matrix m(2, 2);
    m << a, b, c, d;
    return m;
}

Matrix diag(std::initializer_list<double> v) {
    Vector d(static_cast<Eigen::Index>(v.size()));
    Eigen::Index i = 0;
    for (double x : v) {
        d(i++) = x;
    }
    return d.asDiagonal();
}

// random det-1 matrix, entries N(0,1) before scaling
Matrix random_sl(std::mt19937_64& rng, int n) {
    std::normal_distribution<double> nd;
    Matrix m(n, n);
    for (;;) {
        for (int i = 0; i < n; ++i) {
            for (int j = 0; j < n; ++j) {
                m(i, j) = nd(rng);
            }
        }
        double det = m.determinant();
        if (std::abs(det) < 1e-3) {
            continue;
        }
        if (det < 0) {
            m.row(0) *= -1.0;
            det = -det;
        }
        return m / std::pow(det, 1.0 / n);
    }
}

struct WarningCapture {
    std::vector<std::string> seen;
    WarningCapture() {
        set_warning_handler([this](const std::string& s) { seen.push_back(s); });
    }
    ~WarningCapture() { set_warning_handler(nullptr); }
};

}  // namespace

TEST_CASE("iwasawa of the identity") {
    const auto t = iwasawa_decompose(GroupElement::identity(3));
    CHECK((t.k - Matrix::Identity(3, 3)).norm() < 1e-15);
    CHECK((t.a - Vector::Ones(3)).norm() < 1e-15);
    CHECK((t.nfac - Matrix::Identity(3, 3)).norm() < 1e-15);
}

TEST_CASE("iwasawa of a diagonal element") {
    const auto t = iwasawa_decompose(GroupElement(diag({2.0, 0.5})));
    CHECK((t.k - Matrix::Identity(2, 2)).norm() < 1e-15);
    CHECK(t.a(0) == doctest::Approx(2.0));
    CHECK(t.a(1) == doctest::Approx(0.5));
    CHECK((t.nfac - Matrix::Identity(2, 2)).norm() < 1e-15);
    CHECK((iwasawa_project(GroupElement(diag({4.0, 1.0, 0.25}))) - Matrix::Identity(3, 3)).norm() < 1e-15);
}

TEST_CASE("iwasawa of [[2,1],[1,1]] against hand Gram-Schmidt") {
    const Matrix g = m2(2, 1, 1, 1);
    // Gram-Schmidt on the columns, written out
    const Eigen::Vector2d c1(2, 1);
    const Eigen::Vector2d c2(1, 1);
    const double r11 = c1.norm();
    const Eigen::Vector2d q1 = c1 / r11;
    const double r12 = q1.dot(c2);
    const Eigen::Vector2d w = c2 - r12 * q1;
    const double r22 = w.norm();
    const Eigen::Vector2d q2 = w / r22;
    CHECK(r11 == doctest::Approx(std::sqrt(5.0)));
    CHECK(r22 == doctest::Approx(1.0 / std::sqrt(5.0)));
    CHECK(r12 / r11 == doctest::Approx(0.6));

    const auto t = iwasawa_decompose(GroupElement(g));
    CHECK((t.k.col(0) - q1).norm() < 1e-14);
    CHECK((t.k.col(1) - q2).norm() < 1e-14);
    CHECK((t.k - m2(2, -1, 1, 2) / std::sqrt(5.0)).norm() < 1e-14);
    CHECK(t.a(0) == doctest::Approx(r11).epsilon(1e-14));
    CHECK(t.a(1) == doctest::Approx(r22).epsilon(1e-14));
    CHECK(t.nfac(0, 1) == doctest::Approx(0.6).epsilon(1e-14));
    CHECK((t.reconstruct() - g).norm() < 1e-14);
    CHECK((iwasawa_project(GroupElement(g)) - t.k).norm() == 0.0);
}

TEST_CASE("iwasawa rejects a numerically singular A factor") {
    CHECK_THROWS_AS(iwasawa_decompose(GroupElement(diag({1e-15, 1e15}))), NumericalRankError);
}

TEST_CASE("iwasawa reconstruction and triple invariants on 1000 random elements") {
    std::mt19937_64 rng(20240611);
    double worst = 0.0;
    for (int s = 0; s < 1000; ++s) {
        const int n = 2 + s % 3;
        const GroupElement g(random_sl(rng, n));
        const auto t = iwasawa_decompose(g);
        worst = std::max(worst, (t.reconstruct() - g.matrix()).norm() / g.matrix().norm());
        CHECK((t.k.transpose() * t.k - Matrix::Identity(n, n)).norm() <= 1e-12);
        CHECK(t.k.determinant() > 0.0);
        CHECK(t.a.minCoeff() > 0.0);
        for (int i = 0; i < n; ++i) {
            CHECK(t.nfac(i, i) == 1.0);
            for (int j = 0; j < i; ++j) {
                CHECK(t.nfac(i, j) == 0.0);
            }
        }
    }
    CHECK(worst <= 1e-10);
}

TEST_CASE("iwasawa is bytewise deterministic") {
    std::mt19937_64 rng(5);
    const GroupElement g(random_sl(rng, 4));
    const auto a = iwasawa_decompose(g);
    const auto b = iwasawa_decompose(g);
    CHECK(std::memcmp(a.k.data(), b.k.data(), sizeof(double) * 16) == 0);
    CHECK(std::memcmp(a.a.data(), b.a.data(), sizeof(double) * 4) == 0);
    CHECK(std::memcmp(a.nfac.data(), b.nfac.data(), sizeof(double) * 16) == 0);
}

TEST_CASE("regular split of diagonal elements") {
    const auto s2 = regular_split_decompose(GroupElement(diag({std::exp(1.0), std::exp(-1.0)})));
    CHECK((s2.conjugator.matrix() - Matrix::Identity(2, 2)).norm() < 1e-12);
    CHECK(s2.logs(0) == doctest::Approx(1.0));
    CHECK(s2.logs(1) == doctest::Approx(-1.0));

    const auto s3 = regular_split_decompose(GroupElement(diag({4.0, 1.0, 0.25})));
    CHECK((s3.conjugator.matrix() - Matrix::Identity(3, 3)).norm() < 1e-12);
    CHECK(s3.logs(0) == doctest::Approx(std::log(4.0)));
    CHECK(std::abs(s3.logs(1)) < 1e-12);
    CHECK(s3.logs(2) == doctest::Approx(-std::log(4.0)));
}

TEST_CASE("regular split of a conjugated diagonal element") {
    const Matrix g = m2(2, 1, 1, 1);
    const Matrix h = g * diag({std::exp(1.0), std::exp(-1.0)}) * g.inverse();
    const auto s = regular_split_decompose(GroupElement(h));
    const Matrix c = s.conjugator.matrix();
    // columns parallel to (2,1) and (1,1), largest entry positive
    CHECK(std::abs(c(0, 0) * 1 - c(1, 0) * 2) < 1e-10);
    CHECK(std::abs(c(0, 1) - c(1, 1)) < 1e-10);
    CHECK(c(0, 0) > 0.0);
    CHECK(c(0, 1) > 0.0);
    CHECK(c.determinant() == doctest::Approx(1.0));
    CHECK(s.logs(0) == doctest::Approx(1.0));
    CHECK(s.logs(1) == doctest::Approx(-1.0));
    CHECK((s.reconstruct() - h).norm() / h.norm() < 1e-8);
}

TEST_CASE("regular split round trip on random regular elements") {
    std::mt19937_64 rng(77);
    std::uniform_real_distribution<double> gap(0.2, 1.5);
    for (int s = 0; s < 300; ++s) {
        const int n = 2 + s % 3;
        const Matrix g = random_sl(rng, n);
        Vector logs(n);
        logs(0) = 0.0;
        for (int i = 1; i < n; ++i) {
            logs(i) = logs(i - 1) - gap(rng);
        }
        logs.array() -= logs.mean();
        const Matrix h = g * Matrix(logs.array().exp().matrix().asDiagonal()) * g.inverse();
        const auto split = regular_split_decompose(GroupElement(h));
        CHECK((split.reconstruct() - h).norm() / h.norm() <= 1e-8);
        CHECK((split.logs - logs).norm() < 1e-8);
        CHECK(split.conjugator.matrix().determinant() == doctest::Approx(1.0));
        // largest entry positive, except a last column negated to make det positive
        const Matrix& c = split.conjugator.matrix();
        for (int j = 0; j < n; ++j) {
            Eigen::Index at = 0;
            c.col(j).cwiseAbs().maxCoeff(&at);
            if (j < n - 1) {
                CHECK(c(at, j) > 0.0);
            } else if (c(at, j) < 0.0) {
                Matrix flipped = c;
                flipped.col(j) *= -1.0;
                CHECK(flipped.determinant() < 0.0);
            }
        }
    }
}

TEST_CASE("regularity guard") {
    CHECK_FALSE(is_regular_positive(GroupElement::identity(2)));
    CHECK(is_regular_positive(GroupElement(diag({2.0, 0.5}))));
    CHECK_FALSE(is_regular_positive(GroupElement(m2(0, -1, 1, 0))));
    CHECK_THROWS_AS(regular_split_decompose(GroupElement::identity(3)), NotRegularError);
    CHECK_THROWS_AS(regular_split_decompose(GroupElement(m2(0, -1, 1, 0))), ComplexSpectrumError);
    // negative spectrum is not positive
    CHECK_FALSE(is_regular_positive(GroupElement(diag({-2.0, -0.5}))));
}

TEST_CASE("group element determinant window") {
    WarningCapture w;
    CHECK_NOTHROW(GroupElement(diag({2.0, 0.5 * (1 + 1e-12)})));
    CHECK(w.seen.empty());

    const GroupElement rescaled(diag({2.0, 0.5 * (1 + 1e-6)}));
    CHECK(rescaled.matrix().determinant() == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(w.seen.size() == 1);

    CHECK_THROWS_AS(GroupElement(diag({2.0, 0.5 * (1 + 1e-3)})), InvalidGroupElementError);
    CHECK_THROWS_AS(GroupElement(m2(1, 1, 1, 1)), InvalidGroupElementError);
    CHECK_THROWS_AS(GroupElement(Matrix::Identity(1, 1)), InvalidGroupElementError);
    CHECK_THROWS_AS(GroupElement(Matrix::Identity(2, 3)), InvalidGroupElementError);
}

TEST_CASE("products and inverses stay in the group") {
    std::mt19937_64 rng(9);
    const GroupElement a(random_sl(rng, 3));
    const GroupElement b(random_sl(rng, 3));
    CHECK(((a * b).matrix() - a.matrix() * b.matrix()).norm() < 1e-12);
    CHECK(((a * a.inverse()).matrix() - Matrix::Identity(3, 3)).norm() < 1e-12);
}

TEST_CASE("sign canonicalization") {
    Vector v(3);
    v << 0.2, -0.9, 0.4;
    canonicalize_sign(v);
    CHECK(v(1) == 0.9);
    CHECK(v(0) == -0.2);
    Vector t(2);
    t << -1.0, 1.0;
    canonicalize_sign(t);
    CHECK(t(0) == 1.0);
}
