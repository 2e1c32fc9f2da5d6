#pragma once

#include <gmpxx.h>

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "maassq/ball.hpp"

namespace maassq {

namespace detail {

/// Upper bound for the geometric-tail estimate computed in doubles.  All
/// inputs are upper bounds already; the slack factor and the absolute pad
/// cover double rounding (including subnormals), keeping the result a true
/// upper bound.
inline double padded_tail(double term_hi, double ratio_hi) {
    double raw = term_hi * ratio_hi / (1.0 - ratio_hi);
    return raw * 1.02 + 1e-320;
}

inline long bessel_internal_prec(mpfr_prec_t base, double x_hi) {
    // The alternating J-series cancels ~x*log2(e) bits; I shares the code
    // path for uniformity.  The constant absorbs loop-length rounding.
    double bump = 1.4426950408889634 * (x_hi > 0 ? x_hi : 0.0);
    return static_cast<long>(base) + static_cast<long>(std::ceil(bump)) + 32;
}

}  // namespace detail

/**
 * Modified Bessel function I_nu (integer nu >= 1) on a nonnegative ball,
 * by the ascending series sum_j (x/2)^{nu+2j} / (j! (nu+j)!).  Terms are
 * summed in ball arithmetic until the geometric tail estimate drops below
 * the working-precision scale; the tail bound is absorbed into the radius,
 * so containment is preserved.
 */
inline BallReal bessel_i_ball(long nu, const BallReal& x) {
    if (nu < 1) throw std::invalid_argument("bessel_i_ball: order must be >= 1");
    if (!x.is_nonnegative()) throw std::domain_error("bessel_i_ball: negative argument ball");
    if (x.is_exact_zero()) return BallReal(x.prec());

    double x_hi = x.upper_double();
    long iprec = detail::bessel_internal_prec(x.prec(), x_hi);
    BallReal half = BallReal::exact_rational(mpq_class(1, 2), iprec);
    BallReal h = x.mul(half);
    BallReal h2 = h.mul(h);
    double h2_hi = h2.upper_double();

    mpz_class nu_fac;
    mpz_fac_ui(nu_fac.get_mpz_t(), static_cast<unsigned long>(nu));
    BallReal term = h.pow_int(nu).mul(BallReal::exact_rational(mpq_class(1, nu_fac), iprec));
    BallReal sum = term;
    int target_exp = static_cast<int>(std::min<long>(iprec, 1000));
    for (long j = 1;; ++j) {
        term = term.mul(h2).mul(
            BallReal::exact_rational(mpq_class(1, mpz_class(j) * (nu + j)), iprec));
        sum = sum.add(term);
        double ratio = h2_hi / (static_cast<double>(j + 1) * static_cast<double>(nu + j + 1));
        if (ratio < 0.5) {
            double target = std::ldexp(std::max(1.0, sum.abs_upper_double()), -target_exp);
            double tail = detail::padded_tail(term.abs_upper_double(), ratio * 1.01);
            if (tail <= target) return sum.widened_by_double(tail);
        }
    }
}

/**
 * Bessel function J_nu (integer nu >= 1) on a nonnegative ball, by the
 * alternating ascending series.  Once terms decrease in magnitude the
 * remainder is bounded by the first omitted term.  Cancellation grows like
 * e^x, so the summation runs at a precision raised by ~x*log2(e) bits.
 */
inline BallReal bessel_j_ball(long nu, const BallReal& x) {
    if (nu < 1) throw std::invalid_argument("bessel_j_ball: order must be >= 1");
    if (!x.is_nonnegative()) throw std::domain_error("bessel_j_ball: negative argument ball");
    if (x.is_exact_zero()) return BallReal(x.prec());

    double x_hi = x.upper_double();
    long iprec = detail::bessel_internal_prec(x.prec(), x_hi);
    BallReal half = BallReal::exact_rational(mpq_class(1, 2), iprec);
    BallReal h = x.mul(half);
    BallReal h2_pos = h.mul(h);
    BallReal h2 = h2_pos.neg();
    double h2_hi = h2_pos.upper_double();

    mpz_class nu_fac;
    mpz_fac_ui(nu_fac.get_mpz_t(), static_cast<unsigned long>(nu));
    BallReal term = h.pow_int(nu).mul(BallReal::exact_rational(mpq_class(1, nu_fac), iprec));
    BallReal sum = term;
    int target_exp = static_cast<int>(std::min<long>(iprec, 1000));
    for (long j = 1;; ++j) {
        term = term.mul(h2).mul(
            BallReal::exact_rational(mpq_class(1, mpz_class(j) * (nu + j)), iprec));
        sum = sum.add(term);
        double ratio = h2_hi / (static_cast<double>(j + 1) * static_cast<double>(nu + j + 1));
        if (ratio < 1.0) {
            // First omitted term bounds the alternating remainder.
            double target = std::ldexp(std::max(1.0, sum.abs_upper_double()), -target_exp);
            double omitted = term.abs_upper_double() * ratio * 1.02 + 1e-320;
            if (omitted <= target) return sum.widened_by_double(omitted);
        }
    }
}

/**
 * Incomplete Gamma with integer first argument a >= 1 on a nonnegative
 * ball: Gamma(a, x) = (a-1)! e^{-x} sum_{j<a} x^j / j!, evaluated via
 * Horner with exact integer coefficients (a-1)!/j!.
 */
inline BallReal incomplete_gamma_int(long a, const BallReal& x) {
    if (a < 1) throw std::invalid_argument("incomplete_gamma_int: a must be >= 1");
    if (!x.is_nonnegative())
        throw std::domain_error("incomplete_gamma_int: negative argument ball");
    mpfr_prec_t prec = x.prec();
    // c_j = (a-1)!/j!, built downward from c_{a-1} = 1.
    std::vector<mpz_class> coeff(static_cast<size_t>(a));
    coeff[static_cast<size_t>(a - 1)] = 1;
    for (long j = a - 2; j >= 0; --j)
        coeff[static_cast<size_t>(j)] = coeff[static_cast<size_t>(j + 1)] * (j + 1);
    BallReal poly = BallReal::exact_rational(mpq_class(coeff[static_cast<size_t>(a - 1)]), prec);
    for (long j = a - 2; j >= 0; --j)
        poly = poly.mul(x).add(
            BallReal::exact_rational(mpq_class(coeff[static_cast<size_t>(j)]), prec));
    return poly.mul(x.neg().exp());
}

}  // namespace maassq
