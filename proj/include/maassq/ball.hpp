#pragma once

#include <gmpxx.h>
#include <mpfr.h>

#include <algorithm>
#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>

namespace maassq {

/// Working precision and accuracy target shared across the numeric stack.
struct PrecisionConfig {
    mpfr_prec_t working_bits = 128;
    double target_abs_error = 5.421010862427522e-20;  // 2^-64

    void validate() const {
        if (working_bits < 53)
            throw std::invalid_argument("PrecisionConfig: working_bits must be >= 53");
        if (!(target_abs_error > 0))
            throw std::invalid_argument("PrecisionConfig: target_abs_error must be positive");
    }
};

/**
 * Real ball: arbitrary-precision midpoint plus a low-precision upper bound
 * on the absolute error.  The module contract is containment — the true
 * value lies in [midpoint - radius, midpoint + radius] after every
 * operation.  Radii are computed at a small fixed precision and always
 * rounded upward, so a radius can only overstate the error, never hide it.
 */
class BallReal {
public:
    static constexpr mpfr_prec_t kRadiusPrec = 32;

    explicit BallReal(mpfr_prec_t prec = 128) {
        mpfr_init2(mid_, prec);
        mpfr_set_zero(mid_, 1);
        mpfr_init2(rad_, kRadiusPrec);
        mpfr_set_zero(rad_, 1);
    }

    BallReal(const BallReal& o) {
        mpfr_init2(mid_, mpfr_get_prec(o.mid_));
        mpfr_set(mid_, o.mid_, MPFR_RNDN);
        mpfr_init2(rad_, kRadiusPrec);
        mpfr_set(rad_, o.rad_, MPFR_RNDU);
    }

    BallReal(BallReal&& o) noexcept {
        mpfr_init2(mid_, mpfr_get_prec(o.mid_));
        mpfr_init2(rad_, kRadiusPrec);
        mpfr_swap(mid_, o.mid_);
        mpfr_swap(rad_, o.rad_);
    }

    BallReal& operator=(const BallReal& o) {
        if (this != &o) {
            mpfr_set_prec(mid_, mpfr_get_prec(o.mid_));
            mpfr_set(mid_, o.mid_, MPFR_RNDN);
            mpfr_set(rad_, o.rad_, MPFR_RNDU);
        }
        return *this;
    }

    BallReal& operator=(BallReal&& o) noexcept {
        if (this != &o) {
            mpfr_swap(mid_, o.mid_);
            mpfr_swap(rad_, o.rad_);
        }
        return *this;
    }

    ~BallReal() {
        mpfr_clear(mid_);
        mpfr_clear(rad_);
    }

    // ---- construction ------------------------------------------------

    static BallReal exact_long(long v, mpfr_prec_t prec) {
        BallReal r(prec);
        int t = mpfr_set_si(r.mid_, v, MPFR_RNDN);
        r.bump_ulp(t);
        return r;
    }

    static BallReal exact_rational(const mpq_class& q, mpfr_prec_t prec) {
        BallReal r(prec);
        int t = mpfr_set_q(r.mid_, q.get_mpq_t(), MPFR_RNDN);
        r.bump_ulp(t);
        return r;
    }

    /// Doubles are binary rationals, so this is exact for prec >= 53.
    static BallReal exact_double(double v, mpfr_prec_t prec) {
        BallReal r(prec);
        int t = mpfr_set_d(r.mid_, v, MPFR_RNDN);
        r.bump_ulp(t);
        return r;
    }

    static BallReal pi_ball(mpfr_prec_t prec) {
        BallReal r(prec);
        int t = mpfr_const_pi(r.mid_, MPFR_RNDN);
        r.bump_ulp(t);
        return r;
    }

    // ---- queries -----------------------------------------------------

    mpfr_prec_t prec() const { return mpfr_get_prec(mid_); }

    double mid_double() const { return mpfr_get_d(mid_, MPFR_RNDN); }
    double rad_double() const { return mpfr_get_d(rad_, MPFR_RNDU); }

    /// Upper bound for the ball (value <= this), as a double rounded up.
    double upper_double() const {
        mpfr_t t;
        mpfr_init2(t, 64);
        mpfr_add(t, mid_, rad_, MPFR_RNDU);
        double d = mpfr_get_d(t, MPFR_RNDU);
        mpfr_clear(t);
        return d;
    }

    double lower_double() const {
        mpfr_t t;
        mpfr_init2(t, 64);
        mpfr_sub(t, mid_, rad_, MPFR_RNDD);
        double d = mpfr_get_d(t, MPFR_RNDD);
        mpfr_clear(t);
        return d;
    }

    /// Upper bound for |value|, rounded up.
    double abs_upper_double() const {
        mpfr_t t;
        mpfr_init2(t, 64);
        mpfr_abs(t, mid_, MPFR_RNDU);
        mpfr_add(t, t, rad_, MPFR_RNDU);
        double d = mpfr_get_d(t, MPFR_RNDU);
        mpfr_clear(t);
        return d;
    }

    /// Exact midpoint as a rational (binary floats are rational).
    mpq_class mid_rational() const {
        if (mpfr_zero_p(mid_)) return mpq_class(0);
        mpq_class q;
        mpfr_get_q(q.get_mpq_t(), mid_);
        return q;
    }

    mpq_class rad_rational() const {
        if (mpfr_zero_p(rad_)) return mpq_class(0);
        mpq_class q;
        mpfr_get_q(q.get_mpq_t(), rad_);
        return q;
    }

    bool is_exact_zero() const { return mpfr_zero_p(mid_) && mpfr_zero_p(rad_); }

    bool contains_zero() const {
        mpq_class m = mid_rational();
        if (m < 0) m = -m;
        return m <= rad_rational();
    }

    /// Exact containment test for a rational value.
    bool contains_rational(const mpq_class& v) const {
        mpq_class d = mid_rational() - v;
        if (d < 0) d = -d;
        return d <= rad_rational();
    }

    /// Whole ball is >= 0.
    bool is_nonnegative() const { return mid_rational() >= rad_rational(); }

    // ---- arithmetic ---------------------------------------------------

    BallReal add(const BallReal& o) const {
        BallReal r(std::max(prec(), o.prec()));
        int t = mpfr_add(r.mid_, mid_, o.mid_, MPFR_RNDN);
        mpfr_add(r.rad_, rad_, o.rad_, MPFR_RNDU);
        r.bump_ulp(t);
        return r;
    }

    BallReal sub(const BallReal& o) const {
        BallReal r(std::max(prec(), o.prec()));
        int t = mpfr_sub(r.mid_, mid_, o.mid_, MPFR_RNDN);
        mpfr_add(r.rad_, rad_, o.rad_, MPFR_RNDU);
        r.bump_ulp(t);
        return r;
    }

    BallReal neg() const {
        BallReal r(*this);
        mpfr_neg(r.mid_, r.mid_, MPFR_RNDN);
        return r;
    }

    BallReal abs_value() const {
        BallReal r(*this);
        mpfr_abs(r.mid_, r.mid_, MPFR_RNDN);
        return r;
    }

    BallReal mul(const BallReal& o) const {
        BallReal r(std::max(prec(), o.prec()));
        int t = mpfr_mul(r.mid_, mid_, o.mid_, MPFR_RNDN);
        // rad = |a| rb + |b| ra + ra rb, everything rounded up.
        mpfr_t am, bm, acc, tmp;
        mpfr_inits2(kRadiusPrec, am, bm, acc, tmp, static_cast<mpfr_ptr>(nullptr));
        mpfr_abs(am, mid_, MPFR_RNDU);
        mpfr_abs(bm, o.mid_, MPFR_RNDU);
        mpfr_mul(acc, am, o.rad_, MPFR_RNDU);
        mpfr_mul(tmp, bm, rad_, MPFR_RNDU);
        mpfr_add(acc, acc, tmp, MPFR_RNDU);
        mpfr_mul(tmp, rad_, o.rad_, MPFR_RNDU);
        mpfr_add(r.rad_, acc, tmp, MPFR_RNDU);
        mpfr_clears(am, bm, acc, tmp, static_cast<mpfr_ptr>(nullptr));
        r.bump_ulp(t);
        return r;
    }

    BallReal div(const BallReal& o) const {
        // The divisor ball must stay away from zero.
        mpfr_t lo;
        mpfr_init2(lo, kRadiusPrec);
        mpfr_abs(lo, o.mid_, MPFR_RNDD);
        mpfr_sub(lo, lo, o.rad_, MPFR_RNDD);
        if (mpfr_sgn(lo) <= 0) {
            mpfr_clear(lo);
            throw std::domain_error("BallReal::div: divisor ball contains zero");
        }
        BallReal r(std::max(prec(), o.prec()));
        int t = mpfr_div(r.mid_, mid_, o.mid_, MPFR_RNDN);
        // |a/b - am/bm| <= (ra + |am/bm| rb) / (|bm| - rb); |am/bm| is
        // overestimated by the rounded quotient plus one coarse ulp.
        mpfr_t qa, num, tmp;
        mpfr_inits2(kRadiusPrec, qa, num, tmp, static_cast<mpfr_ptr>(nullptr));
        mpfr_abs(qa, r.mid_, MPFR_RNDU);
        mpfr_nextabove(qa);
        mpfr_mul(num, qa, o.rad_, MPFR_RNDU);
        mpfr_add(num, num, rad_, MPFR_RNDU);
        mpfr_div(tmp, num, lo, MPFR_RNDU);
        mpfr_set(r.rad_, tmp, MPFR_RNDU);
        mpfr_clears(qa, num, tmp, static_cast<mpfr_ptr>(nullptr));
        mpfr_clear(lo);
        r.bump_ulp(t);
        return r;
    }

    BallReal sqrt() const {
        if (!is_nonnegative())
            throw std::domain_error("BallReal::sqrt: ball extends below zero");
        BallReal r(prec());
        int t = mpfr_sqrt(r.mid_, mid_, MPFR_RNDN);
        // Endpoint images bound the radius (sqrt is monotone). The endpoints
        // must be formed at full precision: rounding mid +- rad coarsely would
        // charge the midpoint's own bits to the radius.
        mpfr_t hi_arg, lo_arg, hi, lo;
        mpfr_inits2(prec(), hi_arg, lo_arg, hi, lo, static_cast<mpfr_ptr>(nullptr));
        mpfr_t d1, d2;
        mpfr_inits2(kRadiusPrec, d1, d2, static_cast<mpfr_ptr>(nullptr));
        mpfr_add(hi_arg, mid_, rad_, MPFR_RNDU);
        mpfr_sub(lo_arg, mid_, rad_, MPFR_RNDD);
        if (mpfr_sgn(lo_arg) < 0) mpfr_set_zero(lo_arg, 1);
        mpfr_sqrt(hi, hi_arg, MPFR_RNDU);
        mpfr_sqrt(lo, lo_arg, MPFR_RNDD);
        mpfr_sub(d1, hi, r.mid_, MPFR_RNDU);
        mpfr_sub(d2, r.mid_, lo, MPFR_RNDU);
        if (mpfr_cmp(d1, d2) >= 0)
            mpfr_set(r.rad_, d1, MPFR_RNDU);
        else
            mpfr_set(r.rad_, d2, MPFR_RNDU);
        mpfr_clears(hi_arg, lo_arg, hi, lo, static_cast<mpfr_ptr>(nullptr));
        mpfr_clears(d1, d2, static_cast<mpfr_ptr>(nullptr));
        r.bump_ulp(t);
        return r;
    }

    BallReal exp() const {
        BallReal r(prec());
        int t = mpfr_exp(r.mid_, mid_, MPFR_RNDN);
        // |exp(x) - exp(m)| <= exp(m + r) * r on the ball.
        mpfr_t arg, eh;
        mpfr_inits2(kRadiusPrec, arg, eh, static_cast<mpfr_ptr>(nullptr));
        mpfr_add(arg, mid_, rad_, MPFR_RNDU);
        mpfr_exp(eh, arg, MPFR_RNDU);
        mpfr_mul(r.rad_, eh, rad_, MPFR_RNDU);
        mpfr_clears(arg, eh, static_cast<mpfr_ptr>(nullptr));
        r.bump_ulp(t);
        return r;
    }

    BallReal cos() const {
        BallReal r(prec());
        int t = mpfr_cos(r.mid_, mid_, MPFR_RNDN);
        mpfr_set(r.rad_, rad_, MPFR_RNDU);  // |cos'| <= 1
        r.bump_ulp(t);
        return r;
    }

    BallReal sin() const {
        BallReal r(prec());
        int t = mpfr_sin(r.mid_, mid_, MPFR_RNDN);
        mpfr_set(r.rad_, rad_, MPFR_RNDU);  // |sin'| <= 1
        r.bump_ulp(t);
        return r;
    }

    BallReal pow_int(long e) const {
        if (e == 0) return exact_long(1, prec());
        if (e < 0) return exact_long(1, prec()).div(pow_int(-e));
        BallReal r(prec());
        int t = mpfr_pow_si(r.mid_, mid_, e, MPFR_RNDN);
        // |x^e - m^e| <= e (|m| + r)^{e-1} r by the mean value theorem.
        mpfr_t b, p, d;
        mpfr_inits2(kRadiusPrec, b, p, d, static_cast<mpfr_ptr>(nullptr));
        mpfr_abs(b, mid_, MPFR_RNDU);
        mpfr_add(b, b, rad_, MPFR_RNDU);
        mpfr_pow_ui(p, b, static_cast<unsigned long>(e - 1), MPFR_RNDU);
        mpfr_mul(d, p, rad_, MPFR_RNDU);
        mpfr_mul_si(d, d, e, MPFR_RNDU);
        mpfr_set(r.rad_, d, MPFR_RNDU);
        mpfr_clears(b, p, d, static_cast<mpfr_ptr>(nullptr));
        r.bump_ulp(t);
        return r;
    }

    /// Widen the radius by an explicit nonnegative amount (used to absorb
    /// truncation-tail bounds into a result).
    BallReal widened(const BallReal& extra) const {
        BallReal r(*this);
        mpfr_t e;
        mpfr_init2(e, kRadiusPrec);
        mpfr_abs(e, extra.mid_, MPFR_RNDU);
        mpfr_add(e, e, extra.rad_, MPFR_RNDU);
        mpfr_add(r.rad_, r.rad_, e, MPFR_RNDU);
        mpfr_clear(e);
        return r;
    }

    BallReal widened_by_double(double extra) const {
        if (!(extra >= 0)) throw std::invalid_argument("widened_by_double: negative widening");
        BallReal r(*this);
        mpfr_t e;
        mpfr_init2(e, kRadiusPrec);
        mpfr_set_d(e, extra, MPFR_RNDU);
        mpfr_add(r.rad_, r.rad_, e, MPFR_RNDU);
        mpfr_clear(e);
        return r;
    }

    // ---- rational recognition -----------------------------------------

    /**
     * If the ball isolates a unique multiple of 1/denominator and contains
     * it, return that value as an (unreduced) pair (p, denominator).
     * Isolation requires radius * denominator < 1/2.
     */
    std::optional<std::pair<mpz_class, mpz_class>> recognize_rational(
        const mpz_class& denominator) const {
        if (denominator <= 0)
            throw std::invalid_argument("recognize_rational: denominator must be positive");
        mpq_class scaled_rad = rad_rational() * denominator;
        if (scaled_rad * 2 >= 1) return std::nullopt;
        mpq_class t = mid_rational() * denominator;
        // Nearest integer: floor(t + 1/2).
        mpq_class shifted = t + mpq_class(1, 2);
        mpz_class p;
        mpz_fdiv_q(p.get_mpz_t(), shifted.get_num().get_mpz_t(), shifted.get_den().get_mpz_t());
        mpq_class err = t - p;
        if (err < 0) err = -err;
        if (err > scaled_rad) return std::nullopt;
        return std::make_pair(p, denominator);
    }

    // ---- serialization ------------------------------------------------

    /// `<midpoint> +- <radius>` with enough digits to round-trip.
    std::string to_string() const {
        long digits = static_cast<long>(std::ceil(0.301029995663981 * static_cast<double>(prec()))) + 2;
        char* ms = nullptr;
        char* rs = nullptr;
        mpfr_asprintf(&ms, "%.*Re", static_cast<int>(digits), mid_);
        mpfr_asprintf(&rs, "%.12Re", rad_);
        std::string out = std::string(ms) + " +- " + std::string(rs);
        mpfr_free_str(ms);
        mpfr_free_str(rs);
        return out;
    }

    static BallReal parse(const std::string& s, mpfr_prec_t prec) {
        auto sep = s.find(" +- ");
        if (sep == std::string::npos)
            throw std::runtime_error("BallReal::parse: missing ' +- ' separator");
        std::string mid_str = s.substr(0, sep);
        std::string rad_str = s.substr(sep + 4);
        BallReal r(prec);
        char* end = nullptr;
        mpfr_strtofr(r.mid_, mid_str.c_str(), &end, 10, MPFR_RNDN);
        if (end == mid_str.c_str() || *end != '\0')
            throw std::runtime_error("BallReal::parse: bad midpoint");
        mpfr_strtofr(r.rad_, rad_str.c_str(), &end, 10, MPFR_RNDU);
        if (end == rad_str.c_str() || *end != '\0' || mpfr_sgn(r.rad_) < 0)
            throw std::runtime_error("BallReal::parse: bad radius");
        // Cover decimal rounding of both fields.
        if (!mpfr_zero_p(r.rad_)) mpfr_nextabove(r.rad_);
        r.bump_ulp(1);
        return r;
    }

    // ---- operator sugar ----------------------------------------------

    BallReal operator+(const BallReal& o) const { return add(o); }
    BallReal operator-(const BallReal& o) const { return sub(o); }
    BallReal operator*(const BallReal& o) const { return mul(o); }
    BallReal operator/(const BallReal& o) const { return div(o); }
    BallReal operator-() const { return neg(); }

private:
    void bump_ulp(int ternary) {
        if (ternary == 0) return;
        mpfr_exp_t e;
        if (mpfr_zero_p(mid_))
            e = mpfr_get_emin();
        else
            e = mpfr_get_exp(mid_) - mpfr_get_prec(mid_);
        mpfr_t u;
        mpfr_init2(u, kRadiusPrec);
        mpfr_set_ui_2exp(u, 1, e, MPFR_RNDU);
        mpfr_add(rad_, rad_, u, MPFR_RNDU);
        mpfr_clear(u);
    }

    mpfr_t mid_;
    mpfr_t rad_;
};

}  // namespace maassq
