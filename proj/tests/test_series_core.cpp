#include <random>

#include <gtest/gtest.h>

#include <eotr/multiform.hpp>

using namespace eotr;

namespace
{

const Var s{"s", 1};
const Var r{"r", 1};

MultiForm one_var(const Var &v, int deg, Window w, std::initializer_list<std::pair<int, Rat>> terms)
{
    MultiForm f({v}, {deg}, {w});
    for (const auto &[e, c] : terms) {
        f.add_term({e}, c);
    }
    return f;
}

// Exact polynomial r - s.
MultiForm r_minus_s()
{
    MultiForm f({r, s}, {0, 0}, {Window{0, kUnboundedHi}, Window{0, kUnboundedHi}});
    f.add_term({1, 0}, Rat(1));
    f.add_term({0, 1}, Rat(-1));
    return f;
}

MultiForm random_form(std::mt19937_64 &gen, Window wr, Window ws)
{
    MultiForm f({r, s}, {0, 0}, {wr, ws});
    for (int k = 0; k < 12; ++k) {
        const int er = wr.lo + static_cast<int>(gen() % static_cast<unsigned>(wr.hi - wr.lo + 1));
        const int es = ws.lo + static_cast<int>(gen() % static_cast<unsigned>(ws.hi - ws.lo + 1));
        f.add_term({er, es}, Rat(static_cast<long>(gen() % 11) - 5, static_cast<long>(gen() % 4) + 1));
    }
    return f;
}

} // namespace

TEST(Rat, CanonicalForm)
{
    EXPECT_EQ(Rat(6, -4).str(), "-3/2");
    EXPECT_EQ(Rat(0, 7).str(), "0/1");
    EXPECT_EQ(Rat::parse("10/-4"), Rat(-5, 2));
    EXPECT_EQ(Rat::parse("12").str(), "12/1");
    EXPECT_THROW(Rat::parse("1/0"), std::domain_error);
    EXPECT_THROW(Rat::parse("1.5"), std::invalid_argument);
    EXPECT_EQ(Rat(1, 3) + Rat(1, 6), Rat(1, 2));
}

TEST(Rat, NoOverflow)
{
    Rat x(1);
    for (int i = 0; i < 200; ++i) {
        x *= Rat(1000003, 7);
    }
    for (int i = 0; i < 200; ++i) {
        x /= Rat(1000003, 7);
    }
    EXPECT_EQ(x, Rat(1));
}

TEST(SeriesCore, AddIntersectsWindows)
{
    const auto a = one_var(s, 0, {-3, 3}, {{-1, Rat(2)}});
    const auto b = one_var(s, 0, {-1, 5}, {{-1, Rat(-2)}});
    const auto c = mf_add(a, b);
    EXPECT_TRUE(c.is_zero());
    EXPECT_EQ(c.window("s"), (Window{-1, 3}));

    const auto z = MultiForm({s}, {0}, {Window{-2, 10}});
    const auto az = mf_add(a, z);
    EXPECT_EQ(az.coeff({-1}), Rat(2));
    EXPECT_EQ(az.window("s"), (Window{-2, 3}));

    // The intersected floor may not cut off a surviving term.
    EXPECT_THROW(mf_add(a, MultiForm({s}, {0}, {Window{0, 10}})), window_error);
}

TEST(SeriesCore, AddCoefficients)
{
    MultiForm a({r, s}, {0, 0}, {Window{-6, 0}, Window{0, 4}});
    a.add_term({-2, 0}, Rat(4));
    a.add_term({-4, 2}, Rat(12));
    MultiForm b({s, r}, {0, 0}, {Window{0, 4}, Window{-6, 0}});
    b.add_term({2, -4}, Rat(4));
    const auto c = mf_add(a, b);
    EXPECT_EQ(c.coeff({-2, 0}), Rat(4));
    EXPECT_EQ(c.coeff({-4, 2}), Rat(16));
    EXPECT_EQ(c.size(), 2u);
}

TEST(SeriesCore, AddRejectsMismatch)
{
    const auto a = one_var(s, 1, {0, 3}, {});
    const auto b = one_var(s, 0, {0, 3}, {});
    EXPECT_THROW(mf_add(a, b), std::invalid_argument);
    EXPECT_THROW(mf_add(a, one_var(r, 1, {0, 3}, {})), std::invalid_argument);
}

TEST(SeriesCore, MulDegrees)
{
    const auto a = one_var(s, 0, {-1, 4}, {{-1, Rat(2)}});
    const auto sq = mf_mul(a, a);
    EXPECT_EQ(sq.coeff({-2}), Rat(4));
    EXPECT_EQ(sq.size(), 1u);

    const auto sds = one_var(s, 1, {1, kUnboundedHi}, {{1, Rat(1)}});
    const auto p = mf_mul(sds, sds);
    EXPECT_EQ(p.deg("s"), 2);
    EXPECT_EQ(p.coeff({2}), Rat(1));
    EXPECT_THROW(mf_mul(p, sds), std::invalid_argument);
}

TEST(SeriesCore, GeometricTimesDenominatorIsOne)
{
    for (int m = 1; m <= 3; ++m) {
        auto g = geometric_expand(m, r, s, 8, Window{-20, 0});
        for (int k = 0; k < m; ++k) {
            g = mf_mul(g, r_minus_s());
        }
        MultiForm one({r, s}, {0, 0}, g.windows());
        one.add_term({0, 0}, Rat(1));
        EXPECT_EQ(first_mismatch(g, one), std::nullopt) << "m = " << m;
        EXPECT_EQ(g.window("s").hi, 8);
    }
}

TEST(SeriesCore, GeometricCoefficients)
{
    const auto g2 = geometric_expand(2, r, s, 4, Window{-10, 0});
    EXPECT_EQ(g2.coeff({-2, 0}), Rat(1));
    EXPECT_EQ(g2.coeff({-3, 1}), Rat(2));
    EXPECT_EQ(g2.coeff({-4, 2}), Rat(3));
    const auto g1 = geometric_expand(1, r, s, 4, Window{-10, 0});
    EXPECT_EQ(g1.coeff({-1, 0}), Rat(1));
    EXPECT_EQ(g1.coeff({-3, 2}), Rat(1));

    const auto sym = mf_add(g2, reflect(g2, "s"));
    EXPECT_EQ(sym.coeff({-2, 0}), Rat(2));
    EXPECT_EQ(sym.coeff({-3, 1}), Rat(0));
    EXPECT_EQ(sym.coeff({-4, 2}), Rat(6));
}

TEST(SeriesCore, Reflect)
{
    const auto sds = one_var(s, 1, {0, 5}, {{1, Rat(1)}});
    EXPECT_EQ(reflect(sds, "s"), sds);
    const auto pole = one_var(s, 1, {-1, 5}, {{-1, Rat(4)}});
    EXPECT_EQ(reflect(pole, "s"), pole);
    const auto odd = one_var(s, 0, {0, 5}, {{1, Rat(2)}});
    EXPECT_EQ(reflect(odd, "s").coeff({1}), Rat(-2));
}

TEST(SeriesCore, BranchResidue)
{
    const auto f = one_var(s, 1, {-1, 5}, {{-1, Rat(4)}, {1, Rat(7)}});
    EXPECT_EQ(branch_residue(f, "s").coeff({}), Rat(2));
    const auto reg = one_var(s, 1, {-1, 5}, {{0, Rat(3)}});
    EXPECT_THROW(branch_residue(reg, "s"), consistency_error);
    const auto even = one_var(s, 1, {-1, 5}, {{1, Rat(3)}});
    EXPECT_TRUE(branch_residue(even, "s").is_zero());
    // A floor above -1 certifies a zero residue; a top below -1 certifies nothing.
    const auto regular = one_var(s, 1, {1, 5}, {{1, Rat(3)}});
    EXPECT_TRUE(branch_residue(regular, "s").is_zero());
    const auto uncertified = one_var(s, 1, {-5, -3}, {{-3, Rat(1)}});
    EXPECT_THROW(branch_residue(uncertified, "s"), window_error);
    const auto fn = one_var(s, 0, {-1, 5}, {});
    EXPECT_THROW(branch_residue(fn, "s"), std::invalid_argument);
}

TEST(SeriesCore, BranchResidueMultiVariable)
{
    const Var s0{"s0", 1}, s1{"s1", 1}, s2{"s2", 1}, x{"x", 1};
    const Window w{-2, 4};
    MultiForm f({x, s0, s1, s2}, {1, 1, 1, 1}, {Window{-1, 4}, w, w, w});
    f.add_term({-1, -2, -2, -2}, Rat(16));
    f.add_term({1, -2, -2, -2}, Rat(5));
    f.add_term({1, 0, -2, 2}, Rat(-3));
    const auto res = branch_residue(f, "x");
    ASSERT_EQ(res.nvars(), 3u);
    EXPECT_EQ(res.size(), 1u);
    EXPECT_EQ(res.coeff({-2, -2, -2}), Rat(8));
}

TEST(SeriesCore, RingAxiomsOnWindows)
{
    std::mt19937_64 gen(17);
    for (int trial = 0; trial < 20; ++trial) {
        const auto a = random_form(gen, {-4, 3}, {0, 6});
        const auto b = random_form(gen, {-4, 5}, {0, 4});
        const auto c = random_form(gen, {-4, 2}, {0, 5});
        EXPECT_EQ(first_mismatch(mf_add(mf_add(a, b), c), mf_add(a, mf_add(b, c))), std::nullopt);
        EXPECT_EQ(first_mismatch(mf_mul(a, mf_add(b, c)), mf_add(mf_mul(a, b), mf_mul(a, c))), std::nullopt);
        EXPECT_EQ(reflect(reflect(a, "s"), "r"), reflect(reflect(a, "r"), "s"));
        EXPECT_EQ(reflect(reflect(a, "s"), "s"), a);
    }
}

TEST(SeriesCore, MulWindowIsHonest)
{
    // Truncate exact series, multiply, and compare with the exact product on the
    // window the product claims to certify.
    std::mt19937_64 gen(3);
    for (int trial = 0; trial < 20; ++trial) {
        MultiForm a({s}, {0}, {Window{-3, 12}}), b({s}, {0}, {Window{-2, 12}});
        for (int e = -3; e <= 12; ++e) {
            a.add_term({e}, Rat(static_cast<long>(gen() % 7) - 3));
        }
        for (int e = -2; e <= 12; ++e) {
            b.add_term({e}, Rat(static_cast<long>(gen() % 7) - 3));
        }
        const auto exact = mf_mul(a, b);
        const auto ta = a.restricted({Window{-3, 5}});
        const auto tb = b.restricted({Window{-2, 7}});
        const auto approx = mf_mul(ta, tb);
        EXPECT_EQ(first_mismatch(approx, exact), std::nullopt);
        EXPECT_EQ(approx.window("s"), (Window{-5, 3}));
    }
}

TEST(SeriesCore, ResidueCommutesWithReflection)
{
    const auto f = one_var(s, 1, {-3, 5}, {{-3, Rat(2)}, {-1, Rat(5)}, {3, Rat(1, 3)}});
    ASSERT_TRUE(is_reflection_invariant(f, "s"));
    EXPECT_EQ(branch_residue(f, "s"), branch_residue(reflect(f, "s"), "s"));
}

TEST(SeriesCore, SeriesInverse)
{
    // (2 s^2 + s^4) * inverse = 1
    const auto f = one_var(s, 1, {2, 10}, {{2, Rat(2)}, {4, Rat(1)}});
    const auto inv = series_inverse(f);
    EXPECT_EQ(inv.deg("s"), -1);
    EXPECT_EQ(inv.window("s"), (Window{-2, 6}));
    const auto p = mf_mul(f, inv);
    MultiForm one({s}, {0}, p.windows());
    one.add_term({0}, Rat(1));
    EXPECT_EQ(first_mismatch(p, one), std::nullopt);
}

TEST(SeriesCore, MergeDiagonal)
{
    // Exact r^-2 s^-2 + r^-2 s^0 + r^0 s^-2, truncated in s.
    MultiForm f({r, s}, {1, 1}, {Window{-2, 6}, Window{-2, 1}});
    f.add_term({-2, -2}, Rat(1));
    f.add_term({-2, 0}, Rat(1));
    f.add_term({0, -2}, Rat(1));
    const auto d = merge_diagonal(f, "r", "s", Var{"t", 1});
    EXPECT_EQ(d.nvars(), 1u);
    EXPECT_EQ(d.deg("t"), 2);
    EXPECT_EQ(d.window("t"), (Window{-4, -1}));
    EXPECT_EQ(d.coeff({-4}), Rat(1));
    EXPECT_EQ(d.coeff({-2}), Rat(2));

    // An infinite geometric tail cannot be summed on the diagonal.
    const auto g = geometric_expand(1, r, s, 3, Window{-6, 0});
    EXPECT_LT(merge_diagonal(g, "r", "s", Var{"t", 1}).window("t").hi, -1);
}

TEST(SeriesCore, Deterministic)
{
    auto run = [] {
        auto g = geometric_expand(3, r, s, 6, Window{-12, 0});
        return mf_mul(g, reflect(g, "s"));
    };
    EXPECT_EQ(run(), run());
}

TEST(SeriesCore, ResidueOfProductMatchesComposition)
{
    const Var x{"x", 1}, y{"y", 1};
    MultiForm k({x, s}, {1, -1}, {Window{-6, 2}, Window{-1, 7}});
    MultiForm t({s, y}, {2, 1}, {Window{-4, 6}, Window{-4, 2}});
    std::mt19937_64 gen(5);
    for (int n = 0; n < 30; ++n) {
        const int ex = -6 + 2 * static_cast<int>(gen() % 5);
        const int es = -1 + 2 * static_cast<int>(gen() % 5);
        k.add_term({ex, es}, Rat(static_cast<long>(gen() % 9) - 4));
        const int ts = -4 + 2 * static_cast<int>(gen() % 6);
        const int ty = -4 + 2 * static_cast<int>(gen() % 4);
        t.add_term({ts, ty}, Rat(static_cast<long>(gen() % 9) - 4, 3));
    }
    const auto fused = residue_of_product(k, t, "s");
    const auto composed = branch_residue(mf_mul(k, t), "s");
    EXPECT_EQ(fused, composed);
    EXPECT_FALSE(fused.is_zero());

    MultiForm odd({s, y}, {2, 1}, {Window{-4, 6}, Window{-4, 2}});
    odd.add_term({-3, 0}, Rat(1));
    EXPECT_THROW(residue_of_product(k, odd, "s"), consistency_error);
}

TEST(SeriesCore, Rewindow)
{
    const auto f = one_var(s, 1, {-4, 6}, {{-2, Rat(1)}, {4, Rat(3)}});
    const auto g = rewindow(f, {Window{-8, 2}});
    EXPECT_EQ(g.window("s"), (Window{-8, 2}));
    EXPECT_EQ(g.size(), 1u);
    EXPECT_EQ(g.coeff({-6}), Rat(0));
    EXPECT_THROW(rewindow(f, {Window{-1, 6}}), window_error);
    EXPECT_THROW(rewindow(f, {Window{-4, 7}}), window_error);
}
