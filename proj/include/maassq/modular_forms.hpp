#pragma once

#include <gmpxx.h>

#include <stdexcept>
#include <utility>
#include <vector>

#include "maassq/arith.hpp"
#include "maassq/qseries.hpp"

namespace maassq {

/// Eta quotient prod_d eta(d z)^{r_d}, given as (divisor, exponent) pairs.
struct EtaQuotientSpec {
    std::vector<std::pair<unsigned long, long>> factors;
};

/// Euler product prod_{n>=1} (1 - q^{d n}) expanded by the pentagonal
/// number theorem: sum_{j in Z} (-1)^j q^{d j(3j-1)/2}.  O(sqrt(T/d))
/// nonzero terms.
inline LaurentQSeries pentagonal_series(unsigned long d, long trunc) {
    LaurentQSeries out(0, trunc);
    if (trunc > 0) out.set_coeff(0, 1);
    for (long j = 1;; ++j) {
        long g1 = j * (3 * j - 1) / 2;
        long g2 = j * (3 * j + 1) / 2;
        long e1 = static_cast<long>(d) * g1;
        long e2 = static_cast<long>(d) * g2;
        if (e1 >= trunc && e2 >= trunc) break;
        mpq_class s = (j % 2 == 1) ? mpq_class(-1) : mpq_class(1);
        if (e1 < trunc) out.set_coeff(e1, s);
        if (e2 < trunc) out.set_coeff(e2, s);
    }
    return out;
}

/// Cube of the Euler product: prod (1 - q^{d n})^3 =
/// sum_{j>=0} (-1)^j (2j+1) q^{d j(j+1)/2}.  One pass covers three
/// pentagonal passes.
inline LaurentQSeries cube_product_series(unsigned long d, long trunc) {
    LaurentQSeries out(0, trunc);
    for (long j = 0;; ++j) {
        long e = static_cast<long>(d) * (j * (j + 1) / 2);
        if (e >= trunc) break;
        mpq_class v(2 * j + 1);
        if (j % 2 == 1) v = -v;
        out.set_coeff(e, v);
    }
    return out;
}

/**
 * Exact q-expansion of an eta quotient with `terms` coefficients starting
 * at min_exp = sum d*r_d / 24.  That exponent must be an integer.
 *
 * Each factor is applied as a chain of multiplications/divisions by the
 * lacunary series above (cube passes first, then single passes), so the
 * cost stays O(terms^{3/2}) per exponent unit rather than quadratic.
 */
inline LaurentQSeries eta_quotient(const EtaQuotientSpec& spec, long terms) {
    if (terms <= 0) throw std::invalid_argument("eta_quotient: terms must be positive");
    long weight24 = 0;
    for (size_t i = 0; i < spec.factors.size(); ++i) {
        auto [d, r] = spec.factors[i];
        if (d == 0) throw std::invalid_argument("eta_quotient: zero divisor");
        for (size_t j = 0; j < i; ++j)
            if (spec.factors[j].first == d)
                throw std::invalid_argument("eta_quotient: repeated divisor");
        weight24 += static_cast<long>(d) * r;
    }
    if (weight24 % 24 != 0)
        throw std::domain_error("eta_quotient: leading exponent sum(d*r)/24 is not an integer");
    long shift = weight24 / 24;

    long work = terms + 1;
    LaurentQSeries acc = LaurentQSeries::constant(1, work);
    for (auto [d, r] : spec.factors) {
        long t = r >= 0 ? r : -r;
        bool mul = r >= 0;
        LaurentQSeries cube = cube_product_series(d, work);
        LaurentQSeries single = pentagonal_series(d, work);
        for (long pass = 0; pass < t / 3; ++pass) acc = mul ? acc * cube : acc.div(cube);
        for (long pass = 0; pass < t % 3; ++pass) acc = mul ? acc * single : acc.div(single);
    }
    return acc.shifted(shift).truncated(shift + terms);
}

/// Normalized Eisenstein series: E4 = 1 + 240 sum sigma_3(n) q^n,
/// E6 = 1 - 504 sum sigma_5(n) q^n.
inline LaurentQSeries eisenstein(unsigned weight, long terms) {
    if (terms < 1) throw std::invalid_argument("eisenstein: terms must be >= 1");
    long c;
    unsigned k;
    if (weight == 4) {
        c = 240;
        k = 3;
    } else if (weight == 6) {
        c = -504;
        k = 5;
    } else {
        throw std::invalid_argument("eisenstein: unsupported weight (only 4 and 6)");
    }
    LaurentQSeries out(0, terms);
    out.set_coeff(0, 1);
    for (long n = 1; n < terms; ++n)
        out.set_coeff(n, mpq_class(c) * sigma_power(k, static_cast<unsigned long>(n)));
    return out;
}

/// Discriminant cusp form Delta = eta(z)^24 = q prod (1-q^n)^24.
inline LaurentQSeries delta_series(long terms) {
    return eta_quotient(EtaQuotientSpec{{{1, 24}}}, terms);
}

/// Modular j-invariant j = E4^3 / Delta = q^{-1} + 744 + 196884 q + ...
inline LaurentQSeries j_series(long terms) {
    long work = terms + 2;
    LaurentQSeries e4 = eisenstein(4, work);
    LaurentQSeries num = e4 * e4 * e4;
    LaurentQSeries j = num.div(delta_series(work));
    return j.truncated(-1 + terms);
}

/**
 * Faber basis element j_m: the unique polynomial in j with expansion
 * q^{-m} + O(q) and constant term 0 (m >= 1); j_0 = 1.
 *
 * Built by the subtraction recurrence: start from j^m (monic principal
 * part q^{-m}) and strip the lower principal coefficients with multiples
 * of j^i, then remove the constant term.  The generating-function
 * extraction of the same polynomials is kept test-side as an oracle.
 */
inline LaurentQSeries faber_jm(long m, long terms) {
    if (m < 0) throw std::invalid_argument("faber_jm: m must be nonnegative");
    if (terms <= 0) throw std::invalid_argument("faber_jm: terms must be positive");
    if (m == 0) return LaurentQSeries::constant(1, terms);
    // Powers of j lose one exponent of validity per multiplication; give
    // the base expansion enough headroom that j^m still covers the target.
    long work = terms + m + 2;
    LaurentQSeries j = j_series(work);
    std::vector<LaurentQSeries> jpow;
    jpow.push_back(LaurentQSeries::constant(1, work - 1));
    jpow.push_back(j);
    for (long i = 2; i <= m; ++i) jpow.push_back(jpow.back() * j);

    LaurentQSeries s = jpow[static_cast<size_t>(m)];
    for (long i = m - 1; i >= 1; --i) {
        const mpq_class& c = s.coeff(-i);
        if (c != 0) s = s - jpow[static_cast<size_t>(i)] * c;
    }
    s = s.plus_constant(-s.coeff(0));
    return s.truncated(-m + terms);
}

/// 12th Bernoulli number, the only one the library needs.
inline const mpq_class& bernoulli_12() {
    static const mpq_class b12(-691, 2730);
    return b12;
}

/**
 * The weight-zero pair used in the Lehmer-type recursion:
 *   A_p = (24/B12)(1 + p^11) + j_p - 264 * sum_{m=1}^{p} sigma_9(m) j_{p-m}
 *   B_p = -tau_p * (-264 + 24/B12 + j_1)
 * tau_p (the p-th coefficient of Delta) is supplied by the caller.
 */
inline std::pair<LaurentQSeries, LaurentQSeries> lehmer_ab(unsigned long p, const mpq_class& tau_p,
                                                           long terms) {
    if (!is_prime(p)) throw std::invalid_argument("lehmer_ab: p must be prime");
    if (terms < static_cast<long>(p) + 1)
        throw std::invalid_argument("lehmer_ab: terms must be >= p + 1");
    mpq_class inv_b12_24 = 24 / bernoulli_12();

    std::vector<LaurentQSeries> jm;
    for (unsigned long i = 0; i <= p; ++i)
        jm.push_back(faber_jm(static_cast<long>(i), terms));

    mpz_class p11;
    mpz_ui_pow_ui(p11.get_mpz_t(), p, 11);
    LaurentQSeries a = jm[p].plus_constant(inv_b12_24 * (1 + mpq_class(p11)));
    for (unsigned long m = 1; m <= p; ++m) {
        mpq_class w = mpq_class(-264) * sigma_power(9, m);
        a = a + jm[p - m] * w;
    }

    LaurentQSeries b = jm[1].plus_constant(inv_b12_24 - 264) * (-tau_p);
    return {a, b};
}

/// Weight-4 cusp form on level 9: eta(3z)^8 = q - 8q^4 + 20q^7 - ...
inline LaurentQSeries g_series(long terms) {
    return eta_quotient(EtaQuotientSpec{{{3, 8}}}, terms);
}

/**
 * The weight-4 mock-modular counterpart's holomorphic-coefficient series
 *   m = (eta(z)^3/eta(9z)^3 + 3)^2 * eta(3z)^8
 *     = q^{-1} + 2q^2 - 49q^5 + 48q^8 + 771q^{11} - ...
 *
 * Expanded here without ever squaring a dense series: with n = prod(1-q^n)^3,
 * d = prod(1-q^{9n})^3, e = prod(1-q^{3n}), the quotient rearranges to
 *   m = q^{-1} * (n + 3 q d)^2 * e^8 / d^2,
 * where (n + 3qd) is lacunary, e is lacunary, and both divisions by d are
 * back-substitutions against a lacunary divisor.  Each step is
 * O(terms^{3/2}), which keeps tens of thousands of exact coefficients
 * tractable.  A test checks the small-order expansion against the direct
 * eta-quotient formula.
 */
inline LaurentQSeries m_series(long terms) {
    if (terms <= 0) throw std::invalid_argument("m_series: terms must be positive");
    long work = terms + 2;
    LaurentQSeries n3 = cube_product_series(1, work);
    LaurentQSeries d3 = cube_product_series(9, work);
    LaurentQSeries e1 = pentagonal_series(3, work);

    LaurentQSeries s = n3 + d3.shifted(1) * mpq_class(3);  // lacunary
    LaurentQSeries acc = s * s;
    for (int pass = 0; pass < 8; ++pass) acc = acc * e1;
    acc = acc.div(d3).div(d3);
    return acc.shifted(-1).truncated(-1 + terms);
}

}  // namespace maassq
