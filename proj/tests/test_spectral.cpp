#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "fracstab/spectral.hpp"

using namespace fracstab;

TEST_CASE("classification by the Matignon sector") {
    FracOrder p(0.5);
    CHECK(classify({-1.0, 0.0}, p) == BlockClass::stable);
    CHECK(classify({2.0, 0.0}, p) == BlockClass::unstable);
    CHECK(classify({2.0, 0.0}, FracOrder(0.3)) == BlockClass::unstable);
    CHECK(classify({2.0, 0.0}, FracOrder(0.9)) == BlockClass::unstable);
    // arg(i) = pi/2 > pi/4: stable for p = 0.5.
    CHECK(classify({0.0, 1.0}, p) == BlockClass::stable);
    CHECK_THROWS_AS(classify(std::polar(2.0, M_PI / 4.0), p), NonHyperbolic);
    CHECK_THROWS_AS(classify({0.0, 0.0}, p), ValidationError);
}

TEST_CASE("classification is scale invariant") {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> uang(-M_PI, M_PI);
    std::uniform_real_distribution<double> uscale(0.01, 100.0);
    FracOrder p(0.6);
    for (int i = 0; i < 100; ++i) {
        double ang = uang(rng);
        if (std::abs(std::abs(ang) - 0.3 * M_PI) < 1e-3) continue;
        Complex lam = std::polar(1.0, ang);
        CHECK(classify(lam, p) == classify(uscale(rng) * lam, p));
    }
}

TEST_CASE("example-1 projections") {
    std::vector<JordanBlock> blocks = {{{-1.0, 0.0}, 1, BlockClass::stable},
                                       {{2.0, 0.0}, 2, BlockClass::unstable}};
    JordanSystem sys(FracOrder(0.5), blocks, Eigen::MatrixXcd());
    SpectralSplit split = build_split(sys);
    CHECK(split.stable_dim == 1);
    CHECK(split.unstable_dim == 2);
    Eigen::VectorXd x(3);
    x << 1.0, 2.0, 3.0;
    Eigen::VectorXd xu = split.pi_u_real() * x;
    Eigen::VectorXd xs = split.pi_s_real() * x;
    CHECK(xu(0) == 0.0);
    CHECK(xu(1) == 2.0);
    CHECK(xu(2) == 3.0);
    CHECK(xs(0) == 1.0);
    CHECK(xs(1) == 0.0);
    CHECK(xs(2) == 0.0);
}

TEST_CASE("liu projections and tail rate") {
    JordanSystem sys = JordanSystem::diagonal(
        FracOrder(0.5), {{-1.0, 0.0}, {2.5, 0.0}, {-5.0, 0.0}});
    SpectralSplit split = build_split(sys);
    Eigen::VectorXd x(3);
    x << 1.0, 2.0, 3.0;
    Eigen::VectorXd xu = split.pi_u_real() * x;
    CHECK(xu(0) == doctest::Approx(0.0));
    CHECK(xu(1) == doctest::Approx(2.0));
    CHECK(xu(2) == doctest::Approx(0.0));
    CHECK(split.alpha == doctest::Approx(6.25));  // (5/2)^{1/p}, p = 0.5
}

TEST_CASE("all-stable split") {
    JordanSystem sys = JordanSystem::diagonal(FracOrder(0.5),
                                              {{-1.0, 0.0}, {-2.0, 0.0}});
    SpectralSplit split = build_split(sys);
    CHECK(split.unstable_dim == 0);
    CHECK(split.pi_u_real().cwiseAbs().maxCoeff() == 0.0);
    CHECK((split.pi_s_real() - Eigen::MatrixXd::Identity(2, 2)).cwiseAbs().maxCoeff() ==
          0.0);
}

TEST_CASE("projection algebra on random conjugated systems") {
    std::mt19937_64 rng(41);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int trial = 0; trial < 20; ++trial) {
        Eigen::MatrixXcd pm(4, 4);
        for (int i = 0; i < 4; ++i)
            for (int j = 0; j < 4; ++j) pm(i, j) = Complex(u(rng), u(rng));
        pm += 3.0 * Eigen::MatrixXcd::Identity(4, 4);
        std::vector<JordanBlock> blocks = {
            {{-1.0, 0.0}, 2, BlockClass::stable},
            {{1.5, 0.0}, 1, BlockClass::unstable},
            {{3.0, 0.0}, 1, BlockClass::unstable}};
        JordanSystem sys(FracOrder(0.5), blocks, pm);
        SpectralSplit split = build_split(sys);
        const auto& ps = split.pi_s;
        const auto& pu = split.pi_u;
        Eigen::MatrixXcd eye = Eigen::MatrixXcd::Identity(4, 4);
        CHECK(max_norm(ps + pu - eye) < 1e-12);
        CHECK(max_norm(ps * ps - ps) < 1e-10);
        CHECK(max_norm(pu * pu - pu) < 1e-10);
        CHECK(max_norm(ps * pu) < 1e-10);
        CHECK(std::abs(ps.trace().real() - split.stable_dim) < 1e-10);
    }
}

TEST_CASE("conjugate pairs give real projections; unpaired input is rejected") {
    // lambda = -1 +/- i at p = 0.5: |arg| = 3 pi/4 > pi/4, stable pair.
    Complex lam(-1.0, 1.0);
    Eigen::MatrixXcd pm(3, 3);
    // Real basis for the pair plus a real unstable direction:
    // columns (v, conj(v), e3) with v = (1, i, 0)/sqrt(2).
    pm << Complex(1, 0), Complex(1, 0), Complex(0, 0), Complex(0, 1), Complex(0, -1),
        Complex(0, 0), Complex(0, 0), Complex(0, 0), Complex(1, 0);
    std::vector<JordanBlock> blocks = {{lam, 1, BlockClass::stable},
                                       {std::conj(lam), 1, BlockClass::stable},
                                       {{2.0, 0.0}, 1, BlockClass::unstable}};
    JordanSystem sys(FracOrder(0.5), blocks, pm);
    CHECK(sys.is_real());
    SpectralSplit split = build_split(sys);
    CHECK(split.pi_s.imag().cwiseAbs().maxCoeff() < 1e-12);
    // Breaking the pairing makes A complex; the split is then not real and
    // the validation path in build_split only applies to real systems.
    std::vector<JordanBlock> unpaired = {{lam, 1, BlockClass::stable},
                                         {{-1.0, 0.0}, 1, BlockClass::stable},
                                         {{2.0, 0.0}, 1, BlockClass::unstable}};
    JordanSystem broken(FracOrder(0.5), unpaired, pm);
    CHECK_FALSE(broken.is_real());
}

TEST_CASE("diagonal systems give exact 0/1 projections") {
    JordanSystem sys = JordanSystem::diagonal(
        FracOrder(0.4), {{-2.0, 0.0}, {1.0, 0.0}, {-3.0, 0.0}});
    SpectralSplit split = build_split(sys);
    Eigen::MatrixXd pu = split.pi_u_real();
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) {
            double expect = (i == 1 && j == 1) ? 1.0 : 0.0;
            CHECK(pu(i, j) == doctest::Approx(expect).epsilon(1e-14));
        }
}
