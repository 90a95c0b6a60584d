#include <gtest/gtest.h>

#include <eotr/frobenius.hpp>

using namespace eotr;

namespace
{

CanonicalData airy()
{
    CanonicalData d;
    d.N = 1;
    d.u = {Rat(0)};
    d.eta = Mat{{Rat(1)}};
    d.psi = Mat{{Rat(1)}};
    d.unit = {Rat(1)};
    d.theta = std::vector<Rat>{Rat(0)};
    return d;
}

// Isometric rational datum whose theta is not skew for eta; de_2 can be solved
// at order one but the result is not symplectic.
CanonicalData skewless_n2()
{
    CanonicalData d;
    d.N = 2;
    d.u = {Rat(1), Rat(3)};
    d.eta = Mat{{Rat(1, 2), Rat(0)}, {Rat(0), Rat(1, 2)}};
    d.psi = Mat{{Rat(1), Rat(1)}, {Rat(1), Rat(-1)}};
    d.unit = {Rat(1), Rat(0)};
    d.theta = std::vector<Rat>{Rat(1, 6), Rat(-1, 6)};
    return d;
}

} // namespace

TEST(Frobenius, ValidateAiry)
{
    const auto diag = validate_canonical(airy());
    EXPECT_TRUE(diag.ok()) << diag.summary();
}

TEST(Frobenius, ValidateRejectsNonIsometry)
{
    auto d = airy();
    d.psi = Mat{{Rat(2)}};
    const auto diag = validate_canonical(d);
    ASSERT_FALSE(diag.ok());
    EXPECT_EQ(diag.first_failure()->check, "psi^T eta psi = I");
    EXPECT_NE(diag.first_failure()->detail.find("4/1"), std::string::npos);
}

TEST(Frobenius, ValidateRejectsCoincidentU)
{
    auto d = skewless_n2();
    d.u = {Rat(0), Rat(0)};
    const auto diag = validate_canonical(d);
    ASSERT_FALSE(diag.ok());
    EXPECT_EQ(diag.first_failure()->check, "distinct critical values");
}

TEST(Frobenius, ValidateReportsEverything)
{
    auto d = skewless_n2();
    d.eta(0, 1) = Rat(1);
    const auto diag = validate_canonical(d);
    EXPECT_FALSE(diag.ok());
    EXPECT_EQ(diag.items.size(), 5u);
    EXPECT_NO_THROW(validate_canonical(CanonicalData{}));
    EXPECT_FALSE(validate_canonical(CanonicalData{}).ok());
}

TEST(Frobenius, SymplecticIdentity)
{
    for (int L = 0; L < 5; ++L) {
        EXPECT_TRUE(check_symplectic(RMatrix::identity(3, L)).ok());
    }
}

TEST(Frobenius, SymplecticOrderOneSign)
{
    // Order one of the literal sum is R_1 R_0^T - R_0 R_1^T = R_1 - R_1^T.
    auto R = RMatrix::identity(2, 1);
    R[1] = Mat{{Rat(1), Rat(2)}, {Rat(2), Rat(-3)}};
    EXPECT_TRUE(check_symplectic(R).ok());
    R[1] = Mat{{Rat(0), Rat(2)}, {Rat(-2), Rat(0)}};
    const auto diag = check_symplectic(R);
    ASSERT_FALSE(diag.ok());
    EXPECT_EQ(diag.first_failure()->check, "symplectic order 1");
}

TEST(Frobenius, RandomSymplectic)
{
    EXPECT_EQ(random_symplectic_r(3, 0, 1), RMatrix::identity(3, 0));
    for (std::uint64_t seed = 1; seed <= 6; ++seed) {
        const auto R = random_symplectic_r(static_cast<int>(1 + seed % 3), 6, seed);
        EXPECT_TRUE(check_symplectic(R).ok()) << check_symplectic(R).summary();
    }
    EXPECT_EQ(random_symplectic_r(2, 5, 42), random_symplectic_r(2, 5, 42));
    EXPECT_FALSE(random_symplectic_r(2, 5, 42) == random_symplectic_r(2, 5, 43));
}

TEST(Frobenius, RandomSymplecticUnitarity)
{
    // R(z) R^T(-z) = I through order L, computed without the library's check.
    const auto R = random_symplectic_r(3, 5, 9);
    for (int m = 1; m <= 5; ++m) {
        Mat s(3, 3);
        for (int a = 0; a <= m; ++a) {
            s += R[a] * R[m - a].transpose() * Rat((m - a) % 2 ? -1 : 1);
        }
        EXPECT_TRUE(s.is_zero()) << "order " << m;
    }
}

TEST(Frobenius, CompleteRAiry)
{
    const auto R = complete_r(airy(), 6);
    EXPECT_EQ(R, RMatrix::identity(1, 6));
    // A nonzero free diagonal contradicts (Theta - 1) R_1 having zero diagonal.
    EXPECT_THROW(complete_r(airy(), 3, {{Rat(1)}}), consistency_error);
}

TEST(Frobenius, CompleteROffDiagonal)
{
    const auto d = skewless_n2();
    ASSERT_TRUE(validate_canonical(d).ok());
    const auto R = solve_r_recursion(d, 1);
    // Theta = psi^{-1} theta psi = [[0, 1/6], [1/6, 0]]
    EXPECT_EQ(R[1](0, 1), Rat(1, 6) / (Rat(1) - Rat(3)));
    EXPECT_EQ(R[1](1, 0), Rat(1, 6) / (Rat(3) - Rat(1)));
    EXPECT_EQ(R[1](0, 0), Rat(0));
    // The off-diagonal part is antisymmetric, so order one fails.
    EXPECT_THROW(complete_r(d, 1), consistency_error);
    EXPECT_THROW(complete_r(d, 2), consistency_error);
}

TEST(Frobenius, CompleteRCommutatorRelation)
{
    const auto d = skewless_n2();
    const auto R = solve_r_recursion(d, 1);
    const Mat U{{d.u[0], Rat(0)}, {Rat(0), d.u[1]}};
    const Mat Theta{{Rat(0), Rat(1, 6)}, {Rat(1, 6), Rat(0)}};
    EXPECT_EQ(U * R[1] - R[1] * U, Theta * R[0]);
}

TEST(Frobenius, CompleteRNeedsTheta)
{
    auto d = airy();
    d.theta.reset();
    EXPECT_THROW(complete_r(d, 2), validation_error);
}

TEST(Frobenius, VklIdentity)
{
    const auto V = compute_vkl(RMatrix::identity(2, 5), 4);
    for (int k = 0; k <= 4; ++k) {
        for (int l = 0; k + l <= 4; ++l) {
            EXPECT_TRUE(V.at(k, l).is_zero());
        }
    }
}

TEST(Frobenius, VklFirstOrder)
{
    // (1 - (1 - R_1^T w)(1 - R_1 z)) / (z + w) = R_1 + O(2) for symmetric R_1.
    auto R = RMatrix::identity(2, 1);
    R[1] = Mat{{Rat(1, 2), Rat(3)}, {Rat(3), Rat(-1)}};
    const auto V = compute_vkl(R, 0);
    EXPECT_EQ(V.at(0, 0), R[1]);
    EXPECT_THROW(compute_vkl(R, 1), window_error);
}

TEST(Frobenius, VklTimesDenominator)
{
    const int L = 6, K = 5;
    const auto R = random_symplectic_r(3, L, 11);
    const auto V = compute_vkl(R, K);
    auto vv = [&](int k, int l) { return (k < 0 || l < 0) ? Mat(3, 3) : V.at(k, l); };
    for (int a = 0; a <= K + 1; ++a) {
        for (int b = 0; a + b <= K + 1; ++b) {
            // Coefficient of w^a z^b in 1 - R^T(-w) R(-z).
            Mat num = R[a].transpose() * R[b] * Rat((a + b) % 2 ? 1 : -1);
            if (a == 0 && b == 0) {
                num += Mat::identity(3);
            }
            EXPECT_EQ(vv(a - 1, b) + vv(a, b - 1), num) << a << "," << b;
        }
    }
}

TEST(Frobenius, VklSymmetry)
{
    const auto R = random_symplectic_r(3, 7, 5);
    const auto V = compute_vkl(R, 6);
    for (int k = 0; k <= 6; ++k) {
        for (int l = 0; k + l <= 6; ++l) {
            EXPECT_EQ(V.at(k, l), V.at(l, k).transpose());
        }
    }
}

TEST(Frobenius, VklRejectsNonSymplectic)
{
    auto R = RMatrix::identity(2, 2);
    R[1] = Mat{{Rat(0), Rat(1)}, {Rat(-1), Rat(0)}};
    EXPECT_THROW(compute_vkl(R, 1), consistency_error);
}
