// Exact layer: integer utilities, Laurent q-series ring, classical
// q-expansions, and coefficient operators.

#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "maassq/arith.hpp"
#include "maassq/modular_forms.hpp"
#include "maassq/operators.hpp"
#include "maassq/qseries.hpp"

using namespace maassq;

namespace {

LaurentQSeries random_series(std::mt19937& rng, long lo, long hi) {
    LaurentQSeries s(lo, hi);
    std::uniform_int_distribution<long> num(-9, 9);
    std::uniform_int_distribution<long> den(1, 4);
    for (long n = lo; n < hi; ++n) s.set_coeff(n, mpq_class(num(rng), den(rng)));
    return s;
}

void check_equal_on(const LaurentQSeries& a, const LaurentQSeries& b, long lo, long hi) {
    for (long n = lo; n < hi; ++n) {
        INFO("exponent " << n);
        REQUIRE(a.coeff(n) == b.coeff(n));
    }
}

}  // namespace

TEST_CASE("divisor sums, Moebius, totient, inverses, Kronecker") {
    CHECK(sigma_power(1, 6) == 12);
    CHECK(sigma_power(3, 4) == 1 + 8 + 64);
    CHECK(sigma_power(0, 12) == 6);
    CHECK(mobius(1) == 1);
    CHECK(mobius(30) == -1);
    CHECK(mobius(12) == 0);
    CHECK(euler_phi(9) == 6);
    CHECK(euler_phi(1) == 1);
    CHECK(mod_inverse(3, 7) == 5);
    CHECK(mod_inverse(1, 1) == 0);
    CHECK(is_prime(2));
    CHECK(is_prime(97));
    CHECK_FALSE(is_prime(1));
    CHECK_FALSE(is_prime(91));
    CHECK(kronecker_symbol(-3, 2) == -1);
    CHECK(kronecker_symbol(-3, 7) == 1);
    CHECK(kronecker_symbol(-3, 3) == 0);
    CHECK(kronecker_symbol(-4, 5) == 1);
    CHECK(kronecker_symbol(-4, 7) == -1);
    auto d12 = divisors(12);
    CHECK(d12 == std::vector<unsigned long>{1, 2, 3, 4, 6, 12});
}

TEST_CASE("geometric series inversion and integer powers") {
    LaurentQSeries one_minus_q(0, 10);
    one_minus_q.set_coeff(0, 1);
    one_minus_q.set_coeff(1, -1);
    auto geo = one_minus_q.inverse();
    for (long n = 0; n < 10; ++n) CHECK(geo.coeff(n) == 1);

    auto sq = one_minus_q.pow(2);
    CHECK(sq.coeff(0) == 1);
    CHECK(sq.coeff(1) == -2);
    CHECK(sq.coeff(2) == 1);

    // (1-q)^(-3) has coefficients binomial(n+2, 2)
    auto negpow = one_minus_q.pow(-3);
    CHECK(negpow.coeff(3) == 10);
    CHECK(negpow.coeff(5) == 21);
}

TEST_CASE("Laurent windows track products and shifts") {
    auto a = LaurentQSeries::monomial(2, -2, 5);
    auto b = LaurentQSeries::monomial(3, 3, 8);
    auto p = a * b;
    CHECK(p.coeff(1) == 6);
    CHECK(p.min_exp() == 1);

    auto sh = a.shifted(4);
    CHECK(sh.min_exp() == 2);
    CHECK(sh.coeff(2) == 2);

    auto pc = a.plus_constant(7);
    CHECK(pc.coeff(0) == 7);
    CHECK(pc.coeff(-2) == 2);
}

TEST_CASE("series ring laws on pseudorandom elements") {
    std::mt19937 rng(12345);
    for (int rep = 0; rep < 10; ++rep) {
        auto a = random_series(rng, -3, 9);
        auto b = random_series(rng, -2, 8);
        auto c = random_series(rng, 0, 7);
        auto left = (a + b) * c;
        auto right = a * c + b * c;
        long lo = std::max(left.min_exp(), right.min_exp());
        long hi = std::min(left.trunc_order(), right.trunc_order());
        check_equal_on(left, right, lo, hi);

        auto ab = a * b;
        auto ba = b * a;
        check_equal_on(ab, ba, ab.min_exp(), ab.trunc_order());

        auto assoc1 = (a * b) * c;
        auto assoc2 = a * (b * c);
        long lo2 = std::max(assoc1.min_exp(), assoc2.min_exp());
        long hi2 = std::min(assoc1.trunc_order(), assoc2.trunc_order());
        check_equal_on(assoc1, assoc2, lo2, hi2);
    }
}

TEST_CASE("division undoes multiplication") {
    std::mt19937 rng(777);
    for (int rep = 0; rep < 8; ++rep) {
        auto a = random_series(rng, -2, 10);
        auto b = random_series(rng, -1, 9);
        if (b.coeff(b.min_exp()) == 0) b.set_coeff(b.min_exp(), 1);
        auto q = (a * b).div(b);
        long lo = std::max(a.min_exp(), q.min_exp());
        long hi = std::min(a.trunc_order(), q.trunc_order());
        check_equal_on(q, a, lo, hi);
    }
}

TEST_CASE("serialization round trip and corrupt input diagnostics") {
    std::mt19937 rng(99);
    auto s = random_series(rng, -4, 12);
    auto back = LaurentQSeries::deserialize_str(s.serialize_str());
    CHECK(s == back);

    // error paths carry 1-based line numbers
    try {
        LaurentQSeries::deserialize_str("qseries min_exp=0 trunc=4\n0 1/1\nnonsense\n");
        FAIL("expected parse error");
    } catch (const std::runtime_error& ex) {
        CHECK(std::string(ex.what()).find("line 3") != std::string::npos);
    }
    CHECK_THROWS_AS(LaurentQSeries::deserialize_str("bogus header\n"), std::runtime_error);
}

TEST_CASE("eta quotients match brute-force Euler products") {
    const long T = 36;
    // direct product (1 - q^{d n})^r by repeated polynomial multiplication
    auto brute = [&](const std::vector<std::pair<unsigned long, long>>& factors) {
        LaurentQSeries acc = LaurentQSeries::constant(1, T);
        long pref = 0;
        for (auto [d, r] : factors) {
            pref += static_cast<long>(d) * r;
            LaurentQSeries base(0, T);
            for (long n = 1; static_cast<long>(d) * n < T; ++n) {
                LaurentQSeries f(0, T);
                f.set_coeff(0, 1);
                f.set_coeff(static_cast<long>(d) * n, -1);
                base = (n == 1) ? f : base * f;
            }
            if (static_cast<long>(d) >= T) base = LaurentQSeries::constant(1, T);
            acc = (r >= 0) ? acc * base.pow(r) : acc.div(base.pow(-r));
        }
        REQUIRE(pref % 24 == 0);
        return acc.shifted(pref / 24);
    };

    auto ref1 = brute({{1, 3}, {9, -3}});
    auto got1 = eta_quotient(EtaQuotientSpec{{{1, 3}, {9, -3}}}, T);
    check_equal_on(got1, ref1, got1.min_exp(), std::min(got1.trunc_order(), ref1.trunc_order()));

    auto ref2 = brute({{1, 24}});
    auto got2 = delta_series(T);
    check_equal_on(got2, ref2, got2.min_exp(), std::min(got2.trunc_order(), ref2.trunc_order()));

    auto ref3 = brute({{2, 12}});
    auto got3 = eta_quotient(EtaQuotientSpec{{{2, 12}}}, T);
    check_equal_on(got3, ref3, got3.min_exp(), std::min(got3.trunc_order(), ref3.trunc_order()));
}

TEST_CASE("discriminant coefficients take their known values") {
    auto d = delta_series(8);
    long tau[] = {0, 1, -24, 252, -1472, 4830, -6048, -16744};
    for (long n = 1; n <= 7; ++n) CHECK(d.coeff(n) == tau[n]);
}

TEST_CASE("Eisenstein series of weight 4 and 6") {
    auto e4 = eisenstein(4, 5);
    CHECK(e4.coeff(0) == 1);
    CHECK(e4.coeff(1) == 240);
    CHECK(e4.coeff(2) == 2160);
    CHECK(e4.coeff(3) == 6720);
    auto e6 = eisenstein(6, 4);
    CHECK(e6.coeff(0) == 1);
    CHECK(e6.coeff(1) == -504);
    CHECK(e6.coeff(2) == -16632);
    CHECK_THROWS_AS(eisenstein(5, 4), std::invalid_argument);
}

TEST_CASE("modular invariant and its principal-part companions") {
    auto j = j_series(6);
    CHECK(j.coeff(-1) == 1);
    CHECK(j.coeff(0) == 744);
    CHECK(j.coeff(1) == 196884);
    CHECK(j.coeff(2) == 21493760);
    CHECK(j.coeff(3) == mpq_class("864299970"));

    auto j2 = faber_jm(2, 6);
    CHECK(j2.coeff(-2) == 1);
    CHECK(j2.coeff(-1) == 0);
    CHECK(j2.coeff(0) == 0);
    CHECK(j2.coeff(1) == 42987520);
    CHECK(j2.coeff(2) == mpq_class("40491909396"));
}

TEST_CASE("principal-part companions agree with degenerate Hecke action") {
    // p * (j - 744)|T_p reproduces the unique q^{-p} + O(q) polynomial in j.
    auto chi = DirichletCharacterSpec::trivial(1);
    for (long p : {2L, 3L}) {
        long T = 10;
        auto j = j_series(p * T + 2);
        auto base = j.plus_constant(-744);
        auto viaHecke = hecke_tp(base, static_cast<unsigned long>(p), 0, chi) * mpq_class(p);
        auto direct = faber_jm(p, T + 2);
        long lo = std::max(viaHecke.min_exp(), direct.min_exp());
        long hi = std::min(viaHecke.trunc_order(), direct.trunc_order());
        REQUIRE(hi - lo > 5);
        check_equal_on(viaHecke, direct, lo, hi);
    }
}

TEST_CASE("cubed eta at the level-nine divisor is lacunary with integer coefficients") {
    auto g = g_series(20);
    CHECK(g.coeff(1) == 1);
    CHECK(g.coeff(4) == -8);
    CHECK(g.coeff(7) == 20);
    CHECK(g.coeff(13) == -70);
    CHECK(g.coeff(16) == 64);
    CHECK(g.coeff(19) == 56);
    CHECK(g.coeff(2) == 0);
    CHECK(g.coeff(3) == 0);
}

TEST_CASE("rearranged lacunary series and its defining product formula") {
    auto m = m_series(40);
    CHECK(m.coeff(-1) == 1);
    CHECK(m.coeff(2) == 2);
    CHECK(m.coeff(5) == -49);
    CHECK(m.coeff(8) == 48);
    CHECK(m.coeff(11) == 771);
    CHECK(m.coeff(14) == -2744);
    CHECK(m.coeff(38) == 329232);

    // (eta(z)^3/eta(9z)^3 + 3)^2 * (eta(3z))^8-side product, expanded directly
    auto a3 = eta_quotient(EtaQuotientSpec{{{1, 3}, {9, -3}}}, 40);
    auto direct = a3.plus_constant(3);
    direct = direct * direct * g_series(41);
    for (long n = -1; n < 30; ++n) {
        INFO("exponent " << n);
        CHECK(direct.coeff(n) == m.coeff(n));
    }
}

TEST_CASE("prime-relation principal parts divide out exactly") {
    auto [a2, b2] = lehmer_ab(2, -24, 8);
    CHECK(a2.coeff(-1) == -264);
    auto ab = a2 + b2;
    CHECK(ab.coeff(-2) == 1);
    CHECK(ab.coeff(-1) == -240);
    CHECK(ab.coeff(0) == -338328);
    CHECK(ab.coeff(1) == mpq_class("-4264640"));

    auto e10 = eisenstein(4, 10) * eisenstein(6, 10);
    auto rhs = ab.div(e10);
    CHECK(rhs.coeff(-2) == 1);
    CHECK(rhs.coeff(-1) == 24);
    CHECK(rhs.coeff(0) == -196560);
    CHECK(rhs.coeff(1) == mpq_class("-47709536"));
    CHECK(rhs.coeff(2) == mpq_class("-3688365156"));
    CHECK(rhs.coeff(3) == mpq_class("-157770831888"));
    CHECK(rhs.coeff(4) == mpq_class("-4592324039296"));
}

TEST_CASE("Hecke operators fix eigenforms and annihilate the orthogonal piece") {
    auto chi1 = DirichletCharacterSpec::trivial(1);
    auto d = delta_series(60);
    for (unsigned long p : {2ul, 3ul, 5ul}) {
        auto td = hecke_tp(d, p, 12, chi1);
        mpq_class tau_p = d.coeff(static_cast<long>(p));
        for (long n = td.min_exp(); n < td.trunc_order(); ++n) {
            INFO("p=" << p << " n=" << n);
            CHECK(td.coeff(n) == tau_p * d.coeff(n));
        }
    }
    auto g = g_series(60);
    auto tg = hecke_tp(g, 2, 4, chi1);
    CHECK(tg.is_zero());
}

TEST_CASE("U after V is the identity and twists sum to a sieve") {
    auto m = m_series(50);
    auto uv = u_op(v_op(m, 3), 3);
    CHECK(uv == m);

    auto g = g_series(60);
    auto t1 = twist(g, DirichletCharacterSpec::trivial(3));
    auto t2 = twist(g, DirichletCharacterSpec::kronecker(-3));
    auto s = t1 + t2;
    auto g2 = g * mpq_class(2);
    CHECK(s == g2);
}

TEST_CASE("coefficients vanish on inert indices of the imaginary quadratic field") {
    auto g = g_series(200);
    for (long n = 1; n < g.trunc_order(); ++n) {
        if (kronecker_symbol(-3, n) == -1) {
            INFO("n=" << n);
            CHECK(g.coeff(n) == 0);
        }
    }
}

TEST_CASE("two-power coefficients follow the trace recursion") {
    auto g = g_series(70);
    mpq_class expected[7] = {1, 0, -8, 0, 64, 0, -512};
    for (int e = 1; e <= 6; ++e) {
        long n = 1L << e;
        if (n < g.trunc_order()) {
            INFO("2^" << e);
            CHECK(g.coeff(n) == expected[e]);
        }
    }
}

TEST_CASE("degenerate-weight Hecke action on constants") {
    auto chi1 = DirichletCharacterSpec::trivial(1);
    auto one = LaurentQSeries::constant(1, 10);
    CHECK(hecke_tp(one, 2, 1, chi1).coeff(0) == 2);
    CHECK(hecke_tp(one, 2, 0, chi1).coeff(0) == mpq_class(3, 2));
}

TEST_CASE("valuation densities count exactly and reject bad windows") {
    auto zero = LaurentQSeries::zero(200);
    CHECK(padic_valuation_stats(zero, 3, 1, 100) == 0);

    LaurentQSeries ones(0, 200);
    for (long n = 0; n < 200; ++n) ones.set_coeff(n, 1);
    CHECK(padic_valuation_stats(ones, 3, 1, 100) == 1);

    auto m2 = m_series(350);
    auto mu3 = u_op(m2, 3);
    CHECK(padic_valuation_stats(mu3, 3, 1, 100) == 0);

    CHECK_THROWS_AS(padic_valuation_stats(ones, 3, 1, 300), std::invalid_argument);
    LaurentQSeries half(0, 10);
    half.set_coeff(1, mpq_class(1, 2));
    CHECK_THROWS_AS(padic_valuation_stats(half, 3, 1, 5), std::domain_error);
    CHECK(padic_valuation_stats(half, 3, 1, 5, 2) == mpq_class(1, 5));
}

TEST_CASE("image under U at three vanishes through ten thousand") {
    auto m = m_series(10003);
    CHECK(m.coeff(29) == 71939);
    CHECK(m.coeff(35) == 48020);
    CHECK(m.coeff(38) == 329232);
    long nonzero = 0;
    for (long n = 1; 3 * n < m.trunc_order(); ++n)
        if (m.coeff(3 * n) != 0) ++nonzero;
    CHECK(nonzero == 0);
}
