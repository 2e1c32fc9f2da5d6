// Coefficient engine: certified truncation bounds, the four coefficient
// families, assembled expansions, differential operators on coefficients,
// evaluation/modularity, and the pairing helper.

#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "maassq/poincare.hpp"

using namespace maassq;

namespace {

void mid_near(const BallReal& b, double want, double tol) {
    INFO("mid " << b.mid_double() << " want " << want << " rad " << b.rad_double());
    CHECK(std::fabs(b.mid_double() - want) <= tol);
}

const double kTwoPow64 = 5.421010862427522e-20;

}  // namespace

TEST_CASE("certified tails shrink with the truncation point") {
    PoincareParams p{1, 4, 9};
    double t1350 = detail::coefficient_tail_upper(p, PoincareKind::weak, 2, 1350);
    CHECK(t1350 > 1e-5);
    CHECK(t1350 < 2e-4);
    TailBoundResult a = tail_bound(p, 2, 900);
    TailBoundResult b = tail_bound(p, 2, 1800);
    CHECK(b.bound.upper_double() <= a.bound.upper_double());
    CHECK(a.certified);
    CHECK(b.certified);
}

TEST_CASE("parameter validation rejects malformed input") {
    CHECK_THROWS_AS(PoincareParams({0, 4, 9}).validate(), std::invalid_argument);
    CHECK_THROWS_AS(PoincareParams({1, 5, 9}).validate(), std::invalid_argument);
    CHECK_THROWS_AS(PoincareParams({1, 4, 0}).validate(), std::invalid_argument);
    CHECK_THROWS_AS(to_string(static_cast<PoincareKind>(99)), std::logic_error);
    CHECK(poincare_kind_from_string("maass-holo") == PoincareKind::maass_holo);
    CHECK_THROWS_AS(poincare_kind_from_string("nope"), std::invalid_argument);
}

TEST_CASE("weakly holomorphic coefficients hit the exact integer column") {
    KloostermanCache cache;
    PrecisionConfig pc;
    PoincareParams p{1, 4, 9};
    TruncationPolicy fixed1350 = TruncationPolicy::fixed(1350, pc);

    const long ns[4] = {2, 5, 8, 11};
    const double as[4] = {2.0, -49.0, 48.0, 771.0};
    for (int i = 0; i < 4; ++i) {
        CertifiedBall cb = weakly_holo_poincare_coeff(p, ns[i], fixed1350, cache);
        CHECK(cb.certified);
        mid_near(cb.value, as[i], 1e-3);
        CHECK(cb.value.contains_rational(mpq_class(as[i])));
    }
    for (long n : {1L, 4L, 7L, 10L}) {
        CertifiedBall cb = weakly_holo_poincare_coeff(p, n, fixed1350, cache);
        mid_near(cb.value, 0.0, 1e-3);
    }
}

TEST_CASE("dual holomorphic-part coefficients recognize as rationals") {
    KloostermanCache cache;
    PrecisionConfig pc;
    PoincareParams p{1, 4, 9};
    const long ns[4] = {2, 5, 8, 11};
    const long want_p[4] = {-2, 49, -48, -771};
    for (int i = 0; i < 4; ++i) {
        long n = ns[i];
        TruncationPolicy tp = TruncationPolicy::automatic(
            std::min(1e-4, 1.0 / (4.0 * std::pow(static_cast<double>(n), 3.0))), pc);
        CertifiedBall cb = maass_poincare_holo_coeff(p, n, tp, cache);
        mpz_class D(n);
        D = D * n * n;
        auto rec = cb.value.recognize_rational(D);
        REQUIRE(rec.has_value());
        CHECK(rec->first == want_p[i]);
        CHECK(rec->second == D);
    }
}

TEST_CASE("constant term at level nine vanishes identically") {
    KloostermanCache cache;
    PrecisionConfig pc;
    PoincareParams p{1, 4, 9};
    CertifiedBall cb =
        maass_poincare_holo_coeff(p, 0, TruncationPolicy::automatic(1e-4, pc), cache);
    CHECK(cb.value.mid_rational() == 0);
}

TEST_CASE("derivative identity couples the two holomorphic families termwise") {
    KloostermanCache cache;
    PrecisionConfig pc;
    PoincareParams p{1, 4, 9};
    TruncationPolicy fixed1350 = TruncationPolicy::fixed(1350, pc);
    for (long n : {2L, 5L, 8L}) {
        CertifiedBall b = maass_poincare_holo_coeff(p, n, fixed1350, cache);
        CertifiedBall a = weakly_holo_poincare_coeff(p, n, fixed1350, cache);
        BallReal lhs = b.value.mul(BallReal::exact_long(n * n * n, 128)).add(a.value);
        INFO("n=" << n);
        CHECK(lhs.contains_zero());
    }
}

TEST_CASE("shadow duality couples the nonholomorphic family to the cusp family") {
    KloostermanCache cache;
    PrecisionConfig pc;
    PoincareParams p{1, 4, 9};
    TruncationPolicy fixed1350 = TruncationPolicy::fixed(1350, pc);
    for (long n : {1L, 4L, 7L}) {
        CertifiedBall bn = maass_poincare_nonholo_coeff(p, -n, fixed1350, cache);
        CertifiedBall ac = cusp_poincare_coeff(p, n, fixed1350, cache);
        // -(k-2)! n^{k-1} b(-n) = a_cusp(n); the (k-2)! = 2 and the marker sign
        // fold into one factor of -2 here.
        BallReal lhs = bn.value.mul(BallReal::exact_long(-2 * n * n * n, 128));
        INFO("n=" << n);
        CHECK(lhs.sub(ac.value).contains_zero());
    }
}

TEST_CASE("cusp coefficients are proportional to the exact cusp form") {
    KloostermanCache cache;
    PrecisionConfig pc;
    PoincareParams p{1, 4, 9};
    TruncationPolicy fixed1350 = TruncationPolicy::fixed(1350, pc);
    CertifiedBall a1 = cusp_poincare_coeff(p, 1, fixed1350, cache);
    double a1full = a1.value.mid_double() + 1.0;  // add the q^m seed term
    const long gn[3] = {4, 7, 13};
    const double gv[3] = {-8.0, 20.0, -70.0};
    for (int i = 0; i < 3; ++i) {
        CertifiedBall an = cusp_poincare_coeff(p, gn[i], fixed1350, cache);
        double r = an.value.mid_double() / a1full;
        INFO("n=" << gn[i] << " ratio " << r);
        CHECK(std::fabs(r - gv[i]) <= 1e-3);
    }
}

TEST_CASE("weight-twelve coefficients at level one match frozen references") {
    KloostermanCache cache;
    PrecisionConfig pc;
    PoincareParams pl{1, 12, 1};
    long C = resolve_c_max(pl, PoincareKind::maass_holo, 3, kTwoPow64);
    CHECK(C >= 100);
    CHECK(C <= 2000);

    TruncationPolicy tauto = TruncationPolicy::automatic(kTwoPow64, pc);
    mid_near(maass_poincare_holo_coeff(pl, 0, tauto, cache).value, -94.8191027496382, 1e-9);
    mid_near(maass_poincare_holo_coeff(pl, 1, tauto, cache).value, -1842.89472692409, 1e-6);
    mid_near(maass_poincare_holo_coeff(pl, 2, tauto, cache).value, -23274.0754524189, 1e-5);
    mid_near(maass_poincare_holo_coeff(pl, 3, tauto, cache).value, -225028.758779269, 1e-4);
}

TEST_CASE("doubling a fixed truncation point keeps balls consistent") {
    KloostermanCache cache;
    PrecisionConfig pc;
    PoincareParams p{1, 4, 9};
    for (long n : {2L, 5L}) {
        CertifiedBall lo = weakly_holo_poincare_coeff(p, n, TruncationPolicy::fixed(900, pc), cache);
        CertifiedBall hi =
            weakly_holo_poincare_coeff(p, n, TruncationPolicy::fixed(1800, pc), cache);
        INFO("n=" << n);
        CHECK(std::fabs(lo.value.mid_double() - hi.value.mid_double()) <=
              lo.value.rad_double() + hi.value.rad_double());
    }
}

TEST_CASE("assembled expansion carries the principal part, marker, and images") {
    KloostermanCache cache;
    PrecisionConfig pc;
    PoincareParams p{1, 4, 9};
    TruncationPolicy t4 = TruncationPolicy::automatic(1e-4, pc);
    HarmonicExpansion f = assemble_maass_poincare(p, 11, t4, cache);
    CHECK(f.weight == -2);
    REQUIRE(f.principal.size() == 1);
    CHECK(f.principal.at(-1) == 1);
    CHECK(f.holo.size() == 12);
    CHECK(f.nonholo.size() == 11);
    CHECK(f.certified);
    CHECK(std::fabs(f.nonholo.at(-1).mid_double() + 0.5) < 0.2);

    auto bol = bol_operator(f, 4);
    REQUIRE(bol.count(-1) == 1);
    CHECK(bol.at(-1).contains_rational(mpq_class(-1)));
    CHECK(bol.at(0).is_exact_zero());
    mid_near(bol.at(2), -2.0, 2e-3);

    auto xi = xi_operator(f, 4);
    REQUIRE(xi.count(1) == 1);
    double want = std::pow(4.0 * 3.14159265358979324, 3.0) / 2.0 * (1.0 + 0.0468391207);
    mid_near(xi.at(1), want, 0.5);
}

TEST_CASE("truncated expansion transforms like a weight minus-two form") {
    KloostermanCache cache;
    PrecisionConfig pc;
    PoincareParams p{1, 4, 9};
    HarmonicExpansion f30 =
        assemble_maass_poincare(p, 30, TruncationPolicy::automatic(1e-4, pc), cache);
    const mpfr_prec_t bits = 128;
    // At z = -1/9 + i/9 the lower-row action with c = 9, d = 1 maps z to
    // 1/9 + i/9, and cz + d = i, so the weight minus-two automorphy factor
    // (cz + d)^{-2} equals -1: the identity reads f(gz) + f(z) = 0.
    BallReal x0 = BallReal::exact_rational(mpq_class(-1, 9), bits);
    BallReal y0 = BallReal::exact_rational(mpq_class(1, 9), bits);
    auto [fre, fim] = eval_expansion(f30, 4, x0, y0);
    BallReal gx = BallReal::exact_rational(mpq_class(1, 9), bits);
    BallReal gy = BallReal::exact_rational(mpq_class(1, 9), bits);
    auto [gre, gim] = eval_expansion(f30, 4, gx, gy);
    double rre = gre.mid_double() + fre.mid_double();
    double rim = gim.mid_double() + fim.mid_double();
    double resid = std::sqrt(rre * rre + rim * rim);
    INFO("residual " << resid);
    CHECK(resid < 1e-4);
}

TEST_CASE("pairing helper combines width-weighted constant terms") {
    CuspConstantData d;
    d.index = 6;
    d.entries.push_back(
        {2, BallReal::exact_long(1, 128), BallReal::exact_rational(mpq_class(1, 2), 128)});
    d.entries.push_back(
        {3, BallReal::exact_long(2, 128), BallReal::exact_rational(mpq_class(1, 4), 128)});
    BallReal r = regularized_pairing_rhs(d, 4);
    CHECK(r.contains_rational(mpq_class(5, 12)));
}

TEST_CASE("unreachable targets stop at the modulus cap") {
    CHECK_THROWS_AS(resolve_c_max(PoincareParams{1, 4, 9}, PoincareKind::weak, 2, kTwoPow64),
                    TruncationCapError);
}

TEST_CASE("weight-two truncation tails are heuristic and flagged") {
    KloostermanCache cache;
    PrecisionConfig pc;
    PoincareParams p2{1, 2, 4};
    CertifiedBall cb = cusp_poincare_coeff(p2, 1, TruncationPolicy::fixed(200, pc), cache);
    CHECK_FALSE(cb.certified);
    CHECK(cb.value.rad_double() > 0);
    CHECK_THROWS_AS(resolve_c_max(p2, PoincareKind::cusp, 1, 1e-4), std::invalid_argument);
}
