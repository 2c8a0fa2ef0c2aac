#include <cmath>
#include <random>

#include <Eigen/Eigenvalues>
#include <gtest/gtest.h>

#include "attracta/certifier.hpp"
#include "attracta/errors.hpp"
#include "attracta/model_zoo.hpp"

using namespace attracta;

namespace {

const Matrix kRemarkL{{0.5, 2.0}, {0.0625, 0.5}};

Nonlinearity linear(const Matrix& L) {
    return Nonlinearity(static_cast<std::size_t>(L.rows()), [L](std::size_t i, std::span<const double> x) {
        double v = 0.0;
        for (std::size_t j = 0; j < x.size(); ++j) v += L(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) * x[j];
        return v;
    });
}

LipschitzData linear_lip(const Matrix& L) {
    const auto s = static_cast<std::size_t>(L.rows());
    return {L, Vector(s, 0.0), Box::unbounded(s), {}};
}

double eigen_radius(const Matrix& L) { return L.eigenvalues().cwiseAbs().maxCoeff(); }

Matrix random_nonnegative(std::mt19937_64& rng, std::size_t s) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    Matrix L(s, s);
    const double scale = 0.4 + 1.6 * u(rng);
    for (Eigen::Index i = 0; i < L.rows(); ++i)
        for (Eigen::Index j = 0; j < L.cols(); ++j) L(i, j) = u(rng) < 0.3 ? 0.0 : scale * u(rng) / static_cast<double>(s);
    return L;
}

}  // namespace

TEST(IsMMatrix, RemarkMatrix) {
    const Matrix A = Matrix::Identity(2, 2) - kRemarkL;
    const MMatrixResult r = is_m_matrix(A);
    ASSERT_TRUE(r.is_m_matrix);
    EXPECT_NEAR(r.xi[0], 20.0, 1e-12);
    EXPECT_NEAR(r.xi[1], 4.5, 1e-12);
    ASSERT_TRUE(r.inverse);
    EXPECT_NEAR((*r.inverse)(0, 0), 4.0, 1e-12);
    EXPECT_NEAR((*r.inverse)(0, 1), 16.0, 1e-12);
    EXPECT_NEAR((*r.inverse)(1, 0), 0.5, 1e-12);
    EXPECT_NEAR((*r.inverse)(1, 1), 4.0, 1e-12);
    EXPECT_NEAR(r.spectral_radius, 0.5 + std::sqrt(2.0 * 0.0625), 1e-9);
}

TEST(IsMMatrix, IdentityAndSingular) {
    const MMatrixResult id = is_m_matrix(Matrix::Identity(3, 3));
    ASSERT_TRUE(id.is_m_matrix);
    EXPECT_EQ(id.xi, (Vector{1.0, 1.0, 1.0}));

    const MMatrixResult sing = is_m_matrix(Matrix::Identity(2, 2) - Matrix{{1.0, 0.0}, {0.0, 0.5}});
    EXPECT_FALSE(sing.is_m_matrix);
    EXPECT_TRUE(sing.borderline);
    EXPECT_FALSE(sing.note.empty());
}

TEST(IsMMatrix, PositiveOffDiagonalIsImmediatelyFalse) {
    const MMatrixResult r = is_m_matrix(Matrix{{1.0, 0.1}, {0.0, 1.0}});
    EXPECT_FALSE(r.is_m_matrix);
    EXPECT_FALSE(r.borderline);
}

TEST(IsMMatrix, RadiusAboveOne) {
    const MMatrixResult r = is_m_matrix(Matrix::Identity(2, 2) - Matrix::Constant(2, 2, 0.6));
    EXPECT_FALSE(r.is_m_matrix);
    EXPECT_FALSE(r.borderline);
    EXPECT_NEAR(r.spectral_radius, 1.2, 1e-9);
}

TEST(SpectralRadius, PowerIterationMatchesEigen) {
    std::mt19937_64 rng(5);
    for (int k = 0; k < 50; ++k) {
        const Matrix L = random_nonnegative(rng, 1 + k % 5);
        EXPECT_NEAR(spectral_radius_nonnegative(L), eigen_radius(L), 1e-8);
    }
    // Reducible and periodic cases.
    EXPECT_NEAR(spectral_radius_nonnegative(Matrix{{0.0, 1.0}, {1.0, 0.0}}), 1.0, 1e-10);
    EXPECT_NEAR(spectral_radius_nonnegative(Matrix{{0.3, 0.0}, {5.0, 0.7}}), 0.7, 1e-10);
}

TEST(ContractionRate, Examples) {
    const double xi[] = {20.0, 4.5};
    EXPECT_NEAR(contraction_rate(kRemarkL, xi), 0.95, 1e-15);
    const double ones[] = {1.0, 1.0};
    EXPECT_EQ(contraction_rate(Matrix::Zero(2, 2), ones), 0.0);
    EXPECT_NEAR(contraction_rate(Matrix{{0.3, 0.0}, {0.0, 0.7}}, ones), 0.7, 1e-15);
}

TEST(BoxSequence, Examples) {
    const double z[] = {0.0, 0.0}, ones[] = {1.0, 1.0};
    const Box b = box_sequence(z, 1.0, ones, 0.5, 3);
    EXPECT_EQ(b[0], (Interval{-0.25, 0.25}));
    EXPECT_EQ(b[1], (Interval{-0.25, 0.25}));

    const double zz[] = {1.0, 2.0}, xi[] = {20.0, 4.5};
    const Box first = box_sequence(zz, 0.1, xi, 0.95, 1);
    EXPECT_NEAR(first[0].lo, 1.0 - 2.0, 1e-15);
    EXPECT_NEAR(first[1].hi, 2.0 + 0.45, 1e-15);
    for (int n = 1; n < 10; ++n) {
        const Box a = box_sequence(zz, 0.1, xi, 0.95, n);
        const Box c = box_sequence(zz, 0.1, xi, 0.95, n + 1);
        for (std::size_t i = 0; i < 2; ++i) EXPECT_NEAR(c[i].width() / a[i].width(), 0.95, 1e-12);
        EXPECT_TRUE(a.strictly_contains(c));
    }
}

TEST(BoxSequence, BoundaryRule) {
    const double z[] = {1.0}, xi[] = {1.0};
    const Box orthant = Box::positive_orthant(1);
    EXPECT_DOUBLE_EQ(max_admissible_c(z, xi, orthant), 1.0);
    EXPECT_NO_THROW(box_sequence(z, 0.9, xi, 0.5, 1, orthant));
    EXPECT_THROW(box_sequence(z, 1.5, xi, 0.5, 1, orthant), InvalidParameter);
    EXPECT_TRUE(std::isinf(max_admissible_c(z, xi, Box::unbounded(1))));
}

TEST(VerifyBoxMapping, Examples) {
    const Box inner({{-1.0, 1.0}});
    const Box outer({{-0.5, 0.5}});
    const VectorMap half = [](std::span<const double> x) { return Vector{x[0] / 2}; };
    const VectorMap id = [](std::span<const double> x) { return Vector{x[0]}; };
    EXPECT_TRUE(verify_box_mapping(half, inner, outer, 100).ok);
    const BoxCheck bad = verify_box_mapping(id, inner, outer, 100);
    EXPECT_FALSE(bad.ok);
    EXPECT_NEAR(bad.worst_margin, -0.5, 1e-15);
    EXPECT_NEAR(std::abs(bad.worst_point[0]), 1.0, 1e-15);  // a corner

    const VectorMap bam = [](std::span<const double> x) {
        const double v = std::sqrt(0.5 * x[0] + 0.5 * x[1]);
        return Vector{v, v};
    };
    const BoxCheck ok = verify_box_mapping(bam, Box({{0.5, 1.5}, {0.5, 1.5}}), Box({{0.7, 1.3}, {0.7, 1.3}}), 1000);
    EXPECT_TRUE(ok.ok);
    EXPECT_EQ(ok.evaluated, 1004u);
    EXPECT_NEAR(ok.worst_margin, std::sqrt(0.5) - 0.7, 1e-12);
}

TEST(VerifyBoxMapping, SeededAndDeterministic) {
    const VectorMap f = [](std::span<const double> x) { return Vector{std::sin(x[0]) * 0.5, x[1] * x[0] * 0.1}; };
    const Box in({{-1.0, 1.0}, {-1.0, 1.0}}), out({{-0.45, 0.45}, {-0.2, 0.2}});
    const BoxCheck a = verify_box_mapping(f, in, out, 500, 7);
    const BoxCheck b = verify_box_mapping(f, in, out, 500, 7);
    EXPECT_EQ(a.worst_margin, b.worst_margin);
    EXPECT_EQ(a.worst_point, b.worst_point);
}

TEST(FindEquilibrium, Examples) {
    const double g2[] = {0.3, 2.0};
    const Vector sq = find_equilibrium(
        [](std::span<const double> x) { return Vector{std::sqrt(x[1]), std::sqrt(x[0])}; }, Box::positive_orthant(2),
        g2);
    EXPECT_NEAR(sq[0], 1.0, 1e-12);
    EXPECT_NEAR(sq[1], 1.0, 1e-12);

    const double g1[] = {1.0};
    const Vector nich = find_equilibrium([](std::span<const double> x) { return Vector{4 * x[0] * std::exp(-x[0])}; },
                                         Box::positive_orthant(1), g1);
    EXPECT_NEAR(nich[0], std::log(4.0), 1e-12);

    const double g3[] = {1.0, 1.0};
    const Vector half = find_equilibrium([](std::span<const double> x) { return Vector{x[0] / 2, x[1] / 2}; },
                                         Box::unbounded(2), g3);
    EXPECT_NEAR(half[0], 0.0, 1e-12);
    EXPECT_NEAR(half[1], 0.0, 1e-12);
}

TEST(FindEquilibrium, Failures) {
    const double g[] = {1.0};
    EXPECT_THROW(find_equilibrium([](std::span<const double> x) { return Vector{x[0] + 1.0}; }, Box::unbounded(1), g),
                 NotFound);
    // Fixed point at -1 lies outside the positive half-line.
    EXPECT_THROW(
        find_equilibrium([](std::span<const double> x) { return Vector{0.5 * x[0] - 0.5}; }, Box::positive_orthant(1), g),
        DomainExit);
}

TEST(ColumnSumTest, Examples) {
    EXPECT_FALSE(column_sum_test(kRemarkL));
    EXPECT_TRUE(column_sum_test(Matrix::Zero(2, 2)));
    EXPECT_TRUE(column_sum_test(Matrix{{0.4, 0.1}, {0.3, 0.5}}));
}

TEST(CertifyMMatrix, RemarkLinearSystem) {
    const Certificate c = certify_m_matrix(linear(kRemarkL), linear_lip(kRemarkL));
    EXPECT_EQ(c.verdict, Verdict::Certified);
    EXPECT_EQ(c.method, Method::MMatrix);
    ASSERT_TRUE(c.alpha);
    EXPECT_NEAR(*c.alpha, 0.95, 1e-12);
    EXPECT_EQ(c.comparison_flower, false);
    EXPECT_EQ(c.boxes.size(), 9u);
    ASSERT_TRUE(c.sampling);
    EXPECT_TRUE(c.sampling->passed);
    EXPECT_EQ(c.sampling->seed, kDefaultSeed);
}

TEST(CertifyMMatrix, NotCertifiedAboveOne) {
    const Matrix L = Matrix::Constant(2, 2, 0.6);
    const Certificate c = certify_m_matrix(linear(L), linear_lip(L));
    EXPECT_EQ(c.verdict, Verdict::NotCertified);
}

TEST(CertifyMMatrix, RejectsBadLipschitzData) {
    Matrix neg = kRemarkL;
    neg(0, 1) = -0.1;
    EXPECT_THROW(certify_m_matrix(linear(kRemarkL), linear_lip(neg)), InvalidParameter);

    LipschitzData off = linear_lip(kRemarkL);
    off.equilibrium = {1.0, 0.0};
    EXPECT_THROW(certify_m_matrix(linear(kRemarkL), off), InvalidParameter);

    // Declared bounds smaller than the map's true slopes are caught by the spot check.
    EXPECT_THROW(certify_m_matrix(linear(kRemarkL), linear_lip(kRemarkL * 0.5)), InvalidParameter);
}

TEST(CertifyMMatrix, BamExample) {
    const auto unit = DelayDistribution::point_mass(Lag::constant(1.0));
    const auto b = build_bam_root(Matrix::Constant(2, 2, 0.5), {1, 1}, uniform_grid(2, unit));
    const Certificate c = certify_model(b);
    EXPECT_EQ(c.verdict, Verdict::Certified);
    EXPECT_NEAR(c.equilibrium[0], 1.0, 1e-12);
    EXPECT_NEAR(c.equilibrium[1], 1.0, 1e-12);
    ASSERT_TRUE(c.alpha);
    EXPECT_GT(*c.alpha, 0.0);
    EXPECT_LT(*c.alpha, 1.0);
}

// ---- properties ----

TEST(CertifierProperty, ConsistencyTriangleAndWitness) {
    std::mt19937_64 rng(99);
    int certified = 0;
    for (int k = 0; k < 200; ++k) {
        const std::size_t s = 1 + k % 5;
        const Matrix L = random_nonnegative(rng, s);
        const MMatrixResult r = is_m_matrix(Matrix::Identity(L.rows(), L.cols()) - L);
        const double rho = eigen_radius(L);
        if (std::abs(rho - 1.0) <= 1e-6) continue;
        EXPECT_EQ(r.is_m_matrix, rho < 1.0) << "rho = " << rho;
        // Power iteration converges only algebraically on defective spectra
        // (nilpotent L), so the Collatz-Wielandt bound can sit a little above rho.
        EXPECT_NEAR(r.spectral_radius, rho, 1e-5);
        if (!r.is_m_matrix) continue;
        ++certified;
        double norm = 0.0;
        for (double v : r.xi) norm = std::max(norm, v);
        for (Eigen::Index i = 0; i < L.rows(); ++i) {
            double off = 0.0;
            for (Eigen::Index j = 0; j < L.cols(); ++j)
                if (j != i) off += r.xi[static_cast<std::size_t>(j)] * L(i, j);
            EXPECT_GT(r.xi[static_cast<std::size_t>(i)] * (1.0 - L(i, i)) - off, 1e-10 * norm);
        }
        EXPECT_TRUE((r.inverse->array() >= -1e-12).all());
    }
    EXPECT_GT(certified, 40);
}

TEST(CertifierProperty, ScaleCovarianceOfAlpha) {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(0.1, 3.0);
    for (int k = 0; k < 100; ++k) {
        const Matrix L = random_nonnegative(rng, 3);
        Vector xi{u(rng), u(rng), u(rng)};
        const double a = contraction_rate(L, xi);
        const double c = u(rng);
        for (double& v : xi) v *= c;
        EXPECT_NEAR(contraction_rate(L, xi), a, 1e-12 * std::max(1.0, a));
    }
}

TEST(CertifierProperty, ContractionRealizedOnFirstBox) {
    const auto b = build_hopfield({1.0, 1.0}, kRemarkL, {Activation::tanh(), Activation::tanh()},
                                  uniform_grid(2, DelayDistribution::point_mass(Lag::constant(1.0))));
    const Certificate c = certify_model(b);
    ASSERT_EQ(c.verdict, Verdict::Certified);
    const Box& I1 = c.boxes.front();
    const Nonlinearity& F = b.system.nonlinearity();
    std::mt19937_64 rng(17);
    auto draw = [&] {
        Vector x(2);
        for (std::size_t i = 0; i < 2; ++i) x[i] = std::uniform_real_distribution<double>(I1[i].lo, I1[i].hi)(rng);
        return x;
    };
    for (int k = 0; k < 1000; ++k) {
        const Vector u = draw(), v = draw();
        const Vector fu = F(u), fv = F(v);
        double lhs = 0.0, rhs = 0.0;
        for (std::size_t i = 0; i < 2; ++i) {
            lhs = std::max(lhs, std::abs(fu[i] - fv[i]) / c.xi[i]);
            rhs = std::max(rhs, std::abs(u[i] - v[i]) / c.xi[i]);
        }
        EXPECT_LE(lhs, (*c.alpha + 1e-9) * rhs);
    }
}

TEST(CertifierProperty, NestedBoxesAndMappingEvidence) {
    const auto b = build_hopfield({1.0, 2.0}, Matrix{{0.3, -0.9}, {0.4, 0.2}},
                                  {Activation::tanh(), Activation::tanh()},
                                  uniform_grid(2, DelayDistribution::uniform(1.0)));
    const Certificate c = certify_model(b);
    ASSERT_EQ(c.verdict, Verdict::Certified);
    for (std::size_t n = 0; n + 1 < c.boxes.size(); ++n) {
        EXPECT_TRUE(c.boxes[n].strictly_contains(c.boxes[n + 1]));
        const VectorMap F = [&](std::span<const double> x) { return b.system.nonlinearity()(x); };
        EXPECT_TRUE(verify_box_mapping(F, c.boxes[n], c.boxes[n + 1], 1000).ok);
    }
}

TEST(CertifierProperty, DeterministicCertificates) {
    const auto unit = DelayDistribution::point_mass(Lag::constant(1.0));
    const auto b = build_bam_root(Matrix{{0.3, 0.7}, {0.6, 0.4}}, {1, 2}, uniform_grid(2, unit));
    EXPECT_EQ(to_json(certify_model(b)).dump(), to_json(certify_model(b)).dump());
    CertifyOptions other;
    other.seed = 42;
    const Certificate c = certify_model(b, "auto", other);
    EXPECT_EQ(c.sampling->seed, 42u);
}

TEST(CertificateJson, CanonicalKeys) {
    const Certificate c = certify_m_matrix(linear(kRemarkL), linear_lip(kRemarkL));
    const auto j = to_json(c);
    EXPECT_EQ(j["verdict"], "certified");
    EXPECT_EQ(j["method"], "mmatrix");
    EXPECT_EQ(j["comparison_flower"], "fail");
    EXPECT_EQ(j["xi"][0], 20.0);
    EXPECT_EQ(j["boxes"].size(), 8u);
    EXPECT_TRUE(j["sampling"].contains("worst_margin"));
    std::string prev;
    for (const auto& [key, value] : j.items()) {
        EXPECT_LT(prev, key);
        prev = key;
    }
}
