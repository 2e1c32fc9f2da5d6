// Certified ball arithmetic and the rigorous special-function kernels
// (modified/ordinary Bessel series, integer-parameter incomplete Gamma).

#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "maassq/ball.hpp"
#include "maassq/special_functions.hpp"

using namespace maassq;

namespace {

// |midpoint - reference literal| <= band, with the literal parsed at high
// precision so the comparison itself is not the weak link.
void mid_near_check(const BallReal& b, const char* literal, double band) {
    mpfr_t ref, mid;
    mpfr_init2(ref, 256);
    mpfr_init2(mid, 256);
    mpfr_set_str(ref, literal, 10, MPFR_RNDN);
    std::string s = b.to_string();
    mpfr_set_str(mid, s.substr(0, s.find(" +-")).c_str(), 10, MPFR_RNDN);
    mpfr_sub(ref, ref, mid, MPFR_RNDN);
    double diff = std::fabs(mpfr_get_d(ref, MPFR_RNDN));
    INFO("literal " << literal << " diff " << diff << " band " << band);
    CHECK(diff <= band);
    mpfr_clear(ref);
    mpfr_clear(mid);
}
#define MID_NEAR(b, lit, band) mid_near_check(b, lit, band)

}  // namespace

TEST_CASE("pi ball brackets the constant tightly") {
    auto pi = BallReal::pi_ball(128);
    mpq_class lo("31415926535897932384626433832795028/10000000000000000000000000000000000");
    mpq_class hi("31415926535897932384626433832795029/10000000000000000000000000000000000");
    CHECK(pi.mid_rational() > lo);
    CHECK(pi.mid_rational() < hi);
    CHECK(pi.rad_double() < 1e-36);
    CHECK(pi.rad_double() > 0);
    CHECK(pi.cos().contains_rational(mpq_class(-1)));
}

TEST_CASE("elementary operations preserve containment") {
    auto e0 = BallReal::exact_long(0, 128).exp();
    CHECK(e0.contains_rational(1));
    CHECK(e0.rad_double() <= std::pow(2.0, -126));

    auto s2 = BallReal::exact_long(2, 128).sqrt();
    CHECK(s2.mul(s2).contains_rational(2));

    auto third = BallReal::exact_long(1, 128).div(BallReal::exact_long(3, 128));
    CHECK(third.contains_rational(mpq_class(1, 3)));

    auto p = BallReal::exact_rational(mpq_class(3, 2), 128).pow_int(4);
    CHECK(p.contains_rational(mpq_class(81, 16)));
    auto pn = BallReal::exact_rational(mpq_class(3, 2), 128).pow_int(-2);
    CHECK(pn.contains_rational(mpq_class(4, 9)));
}

TEST_CASE("square root radii stay near working precision") {
    // The radius of sqrt(exact) must reflect the working precision, not the
    // low-precision radius bookkeeping.
    auto s2 = BallReal::exact_long(2, 128).sqrt();
    CHECK(s2.rad_double() < 1e-36);
    auto s3 = BallReal::exact_rational(mpq_class(32, 7), 128).sqrt();
    CHECK(s3.rad_double() < 1e-36);
}

TEST_CASE("rational recognition accepts narrow balls and rejects wide ones") {
    auto b = BallReal::exact_rational(mpq_class(49, 125), 128).widened_by_double(1e-6);
    auto rec = b.recognize_rational(125);
    REQUIRE(rec.has_value());
    CHECK(rec->first == 49);
    CHECK(rec->second == 125);

    auto wide = BallReal::exact_rational(mpq_class(49, 125), 128).widened_by_double(0.01);
    CHECK_FALSE(wide.recognize_rational(125).has_value());

    auto ib = BallReal::exact_long(2, 64).widened_by_double(1e-3);
    auto rec3 = ib.recognize_rational(1);
    REQUIRE(rec3.has_value());
    CHECK(rec3->first == 2);
}

TEST_CASE("ball serialization round-trips containment") {
    auto third = BallReal::exact_long(1, 128).div(BallReal::exact_long(3, 128));
    auto back = BallReal::parse(third.to_string(), 128);
    CHECK(back.contains_rational(mpq_class(1, 3)));

    auto pi = BallReal::pi_ball(96);
    auto pb = BallReal::parse(pi.to_string(), 96);
    CHECK(pb.rad_double() <= 4 * pi.rad_double() + 1e-25);
}

TEST_CASE("domain violations throw instead of widening silently") {
    auto zeroish = BallReal::exact_long(0, 64).widened_by_double(1e-9);
    CHECK_THROWS_AS(BallReal::pi_ball(64).div(zeroish), std::domain_error);
    CHECK_THROWS_AS(zeroish.sqrt(), std::domain_error);
}

TEST_CASE("modified and ordinary Bessel values match frozen references") {
    auto x1 = BallReal::exact_long(1, 128);
    auto x2 = BallReal::exact_long(2, 128);
    MID_NEAR(bessel_i_ball(3, x1), "0.022168424924331902476285747629899616", 1e-30);
    MID_NEAR(bessel_j_ball(3, x1), "0.019563353982668405918905321621751508", 1e-30);
    MID_NEAR(bessel_i_ball(3, x2), "0.21273995923985265527235439337593204", 1e-30);
    MID_NEAR(bessel_j_ball(3, x2), "0.12894324947440205109879333296923984", 1e-30);
    MID_NEAR(bessel_i_ball(11, x1), "1.2489783084924912613560054671093838e-11", 1e-40);
    MID_NEAR(bessel_j_ball(11, x1), "1.1980067463031370964940706769623834e-11", 1e-40);

    auto x30 = BallReal::exact_long(30, 128);
    MID_NEAR(bessel_i_ball(3, x30), "671140461797.43961863859202154559134", 1e-18);
    MID_NEAR(bessel_j_ball(3, x30), "0.12921122875972498304040494122436819", 1e-28);
    MID_NEAR(bessel_i_ball(11, x30), "102913541636.66852872219124983261093", 1e-18);
    MID_NEAR(bessel_j_ball(11, x30), "0.025058805137824543668188878125004735", 1e-28);

    auto xh = BallReal::exact_rational(mpq_class(1, 2), 128);
    MID_NEAR(bessel_i_ball(11, xh), "6.0040717690106008540801689205184316e-15", 1e-44);
    MID_NEAR(bessel_j_ball(11, xh), "5.9418539622324614066664450950664531e-15", 1e-44);

    auto x725 = BallReal::exact_rational(mpq_class(29, 4), 128);
    MID_NEAR(bessel_i_ball(1, x725), "197.30156586563830611077355830604719", 1e-27);
    MID_NEAR(bessel_j_ball(1, x725), "0.068581700653131744530574896978269406", 1e-30);

    auto xs = BallReal::exact_rational(mpq_class(1, 10), 128);
    MID_NEAR(bessel_i_ball(1, xs), "0.050062526047092692113809064312231502", 1e-30);
    MID_NEAR(bessel_j_ball(1, xs), "0.049937526036241997556336552437806484", 1e-30);

    CHECK(bessel_i_ball(3, BallReal(128)).is_exact_zero());
    CHECK(bessel_j_ball(3, BallReal(128)).is_exact_zero());
    CHECK(bessel_j_ball(11, x30).rad_double() < 1e-30);
}

TEST_CASE("incomplete Gamma at integer parameters") {
    auto x1 = BallReal::exact_long(1, 128);
    auto x2 = BallReal::exact_long(2, 128);
    MID_NEAR(incomplete_gamma_int(3, x1), "1.8393972058572116079776188508073043", 1e-30);
    MID_NEAR(incomplete_gamma_int(11, x2), "3628769.8511154116444891169546042992", 1e-23);
    CHECK(incomplete_gamma_int(3, BallReal(128)).contains_rational(2));
    CHECK_FALSE(incomplete_gamma_int(1, x1).contains_rational(0));

    auto tiny = BallReal::exact_rational(mpq_class(1, mpz_class("100000000000000000000")), 128);
    auto g5 = incomplete_gamma_int(5, tiny);
    CHECK(std::fabs(g5.mid_double() - 24.0) < 1e-18);
}

TEST_CASE("higher-precision recomputation lands inside lower-precision balls") {
    std::mt19937 rng(424242);
    std::uniform_int_distribution<long> nu_dist(1, 12);
    std::uniform_int_distribution<long> num_dist(1, 4000);
    const mpfr_prec_t lo_bits = 64, hi_bits = 128;
    for (int trial = 0; trial < 300; ++trial) {
        long nu = nu_dist(rng);
        mpq_class x(num_dist(rng), 100);  // x in (0, 40]
        auto lo_arg = BallReal::exact_rational(x, lo_bits);
        auto hi_arg = BallReal::exact_rational(x, hi_bits);
        {
            auto lo = bessel_i_ball(nu, lo_arg);
            auto hi = bessel_i_ball(nu, hi_arg);
            INFO("I_" << nu << "(" << x << ")");
            CHECK(lo.contains_rational(hi.mid_rational()));
        }
        {
            auto lo = bessel_j_ball(nu, lo_arg);
            auto hi = bessel_j_ball(nu, hi_arg);
            INFO("J_" << nu << "(" << x << ")");
            CHECK(lo.contains_rational(hi.mid_rational()));
        }
        {
            auto lo = incomplete_gamma_int(nu + 1, lo_arg);
            auto hi = incomplete_gamma_int(nu + 1, hi_arg);
            INFO("Gamma(" << nu + 1 << ", " << x << ")");
            CHECK(lo.contains_rational(hi.mid_rational()));
        }
    }
}
