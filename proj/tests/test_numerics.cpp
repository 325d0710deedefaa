#include "sppca/numerics.hpp"

#include "oracles.hpp"

#include <doctest.h>

using namespace sppca;

namespace {

ModelParams simple_model(double w0, double w1, double sigma2) {
    ModelParams p;
    p.latent_dim = 1;
    p.mu = Vector::Zero(2);
    p.w.resize(2, 1);
    p.w << w0, w1;
    p.sigma2 = sigma2;
    return p;
}

}  // namespace

TEST_CASE("latent gram matches direct substitution") {
    const ModelParams p = simple_model(1.0, 0.0, 0.5);
    const LatentGram gram = compute_latent_gram(p);
    CHECK(gram.m_matrix(0, 0) == doctest::Approx(1.5).epsilon(1e-15));
}

TEST_CASE("zero loading gives identity gram") {
    ModelParams p;
    p.latent_dim = 2;
    p.mu = Vector::Zero(4);
    p.w = Matrix::Zero(4, 2);
    p.sigma2 = 1.0;
    const LatentGram gram = compute_latent_gram(p);
    CHECK(gram.m_matrix.isApprox(Matrix::Identity(2, 2), 1e-14));
}

TEST_CASE("latent gram equals dense evaluation on random models") {
    Rng rng(101);
    const ModelParams p = oracles::random_model(5, 2, rng);
    const LatentGram gram = compute_latent_gram(p);
    const Matrix expected = p.w.transpose() * p.w + p.sigma2 * Matrix::Identity(2, 2);
    CHECK((gram.m_matrix - expected).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("c_inverse_apply with zero loading is a scalar divide") {
    ModelParams p;
    p.latent_dim = 1;
    p.mu = Vector::Zero(2);
    p.w = Matrix::Zero(2, 1);
    p.sigma2 = 2.0;
    const LatentGram gram = compute_latent_gram(p);
    Vector y(2);
    y << 4.0, 6.0;
    const Vector r = c_inverse_apply(p, gram, y);
    CHECK(r(0) == doctest::Approx(2.0));
    CHECK(r(1) == doctest::Approx(3.0));

    CHECK(c_inverse_apply(p, gram, Vector::Zero(2)).isZero());
}

TEST_CASE("c_inverse_apply matches the dense inverse") {
    Rng rng(55);
    for (int rep = 0; rep < 20; ++rep) {
        const ModelParams p = oracles::random_model(6, 2, rng);
        const LatentGram gram = compute_latent_gram(p);
        Vector y(6);
        for (Eigen::Index i = 0; i < 6; ++i) y(i) = rng.normal();
        const Vector got = c_inverse_apply(p, gram, y);
        const Vector expected = oracles::dense_c_inverse_apply(p, y);
        CHECK((got - expected).norm() <= 1e-10 * expected.norm());
    }
}

TEST_CASE("log_det_c closed forms") {
    ModelParams p;
    p.latent_dim = 1;
    p.mu = Vector::Zero(3);
    p.w = Matrix::Zero(3, 1);
    p.sigma2 = 1.0;
    CHECK(log_det_c(p, compute_latent_gram(p)) == doctest::Approx(0.0).epsilon(1e-14));

    const ModelParams q = simple_model(1.0, 0.0, 1.0);  // C = diag(2, 1)
    CHECK(log_det_c(q, compute_latent_gram(q)) == doctest::Approx(std::log(2.0)).epsilon(1e-14));
}

TEST_CASE("log_det_c matches the dense determinant") {
    Rng rng(77);
    for (int rep = 0; rep < 20; ++rep) {
        const ModelParams p = oracles::random_model(6, 2, rng);
        const double got = log_det_c(p, compute_latent_gram(p));
        CHECK(got == doctest::Approx(oracles::dense_log_det_c(p)).epsilon(1e-10));
    }
}

TEST_CASE("gaussian_log_density standard normal values") {
    ModelParams p;
    p.latent_dim = 1;
    p.mu = Vector::Zero(2);
    p.w = Matrix::Zero(2, 1);
    p.sigma2 = 1.0;
    const LatentGram gram = compute_latent_gram(p);
    CHECK(gaussian_log_density(p, gram, Vector::Zero(2)) ==
          doctest::Approx(-std::log(2.0 * std::numbers::pi)).epsilon(1e-12));
    Vector x(2);
    x << 1.0, 0.0;
    CHECK(gaussian_log_density(p, gram, x) ==
          doctest::Approx(-std::log(2.0 * std::numbers::pi) - 0.5).epsilon(1e-12));
}

TEST_CASE("gaussian_log_density matches dense oracle over 1000 random triples") {
    Rng rng(2024);
    for (int rep = 0; rep < 1000; ++rep) {
        const auto d = static_cast<Eigen::Index>(2 + rng.below(7));  // D <= 8
        const auto m = static_cast<Eigen::Index>(1 + rng.below(std::min<std::uint64_t>(3, static_cast<std::uint64_t>(d - 1))));
        const ModelParams p = oracles::random_model(d, m, rng);
        Vector x(d);
        for (Eigen::Index i = 0; i < d; ++i) x(i) = rng.normal();
        const double got = gaussian_log_density(p, compute_latent_gram(p), x);
        const double expected = oracles::dense_log_density(p, x);
        CHECK(std::abs(got - expected) <= 1e-10 * std::abs(expected));
    }
}

TEST_CASE("symmetric_eigh on a diagonal matrix") {
    Matrix a(2, 2);
    a << 3.0, 0.0, 0.0, 1.0;
    auto [vals, vecs] = symmetric_eigh(a);
    CHECK(vals(0) == doctest::Approx(3.0));
    CHECK(vals(1) == doctest::Approx(1.0));
    CHECK(std::abs(vecs(0, 0)) == doctest::Approx(1.0));
    CHECK(std::abs(vecs(1, 1)) == doctest::Approx(1.0));
    // sign convention: first nonzero component positive
    CHECK(vecs(0, 0) > 0.0);
    CHECK(vecs(1, 1) > 0.0);
}

TEST_CASE("symmetric_eigh handles degenerate spectra") {
    auto [vals, vecs] = symmetric_eigh(Matrix::Identity(3, 3));
    for (int i = 0; i < 3; ++i) CHECK(vals(i) == doctest::Approx(1.0));
    CHECK((vecs.transpose() * vecs).isApprox(Matrix::Identity(3, 3), 1e-10));
}

TEST_CASE("symmetric_eigh reconstructs random symmetric matrices") {
    Rng rng(31);
    for (int rep = 0; rep < 10; ++rep) {
        Matrix a(6, 6);
        for (Eigen::Index i = 0; i < 6; ++i)
            for (Eigen::Index j = 0; j <= i; ++j) a(i, j) = a(j, i) = rng.normal();
        auto [vals, vecs] = symmetric_eigh(a);
        const Matrix rebuilt = vecs * vals.asDiagonal() * vecs.transpose();
        CHECK((rebuilt - a).cwiseAbs().maxCoeff() < 1e-8 * a.norm());
        CHECK((vecs.transpose() * vecs - Matrix::Identity(6, 6)).cwiseAbs().maxCoeff() < 1e-10);
        for (Eigen::Index i = 1; i < 6; ++i) CHECK(vals(i) <= vals(i - 1));
    }
}

TEST_CASE("symmetric_eigh rejects non-symmetric input") {
    Matrix a(2, 2);
    a << 1.0, 2.0, 0.0, 1.0;
    CHECK_THROWS_AS(symmetric_eigh(a), DataError);
}
