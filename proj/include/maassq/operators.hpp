#pragma once

#include <gmpxx.h>

#include <stdexcept>

#include "maassq/arith.hpp"
#include "maassq/qseries.hpp"

namespace maassq {

/// Dirichlet character, restricted to the two families the library uses:
/// the trivial character to a modulus and real characters given by a
/// Kronecker symbol.
struct DirichletCharacterSpec {
    enum class Kind { trivial, kronecker };
    Kind kind;
    long param;  // modulus (trivial) or discriminant (kronecker)

    static DirichletCharacterSpec trivial(unsigned long modulus) {
        if (modulus == 0) throw std::invalid_argument("trivial character: modulus must be positive");
        return {Kind::trivial, static_cast<long>(modulus)};
    }

    static DirichletCharacterSpec kronecker(long d) {
        if (!(d == 1 || d == -1 || is_fundamental_discriminant(d)))
            throw std::invalid_argument(
                "kronecker character: discriminant must be fundamental or +-1");
        return {Kind::kronecker, d};
    }

    static bool is_fundamental_discriminant(long d) {
        if (d == 0) return false;
        auto squarefree = [](long v) {
            if (v < 0) v = -v;
            for (long f = 2; f * f <= v; ++f)
                if (v % (f * f) == 0) return false;
            return true;
        };
        long r4 = ((d % 4) + 4) % 4;
        if (r4 == 1) return squarefree(d);
        if (r4 == 0) {
            long m = d / 4;
            long m4 = ((m % 4) + 4) % 4;
            return (m4 == 2 || m4 == 3) && squarefree(m);
        }
        return false;
    }
};

/// chi(n) for any integer n (exponents of Laurent series may be negative).
inline int character_value(const DirichletCharacterSpec& chi, long n) {
    if (chi.kind == DirichletCharacterSpec::Kind::trivial) {
        unsigned long m = static_cast<unsigned long>(chi.param);
        if (m == 1) return 1;
        unsigned long a = static_cast<unsigned long>(n < 0 ? -n : n);
        return gcd_ul(a, m) == 1 ? 1 : 0;
    }
    return kronecker_symbol(chi.param, n);
}

/// p^e as an exact rational (negative e gives 1/p^{-e}).
inline mpq_class rational_prime_power(unsigned long p, long e) {
    mpz_class z;
    mpz_ui_pow_ui(z.get_mpz_t(), p, static_cast<unsigned long>(e < 0 ? -e : e));
    return e >= 0 ? mpq_class(z) : mpq_class(1, z);
}

inline long floor_div(long a, long b) {
    long q = a / b;
    if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
    return q;
}

inline long ceil_div(long a, long b) { return -floor_div(-a, b); }

/**
 * Hecke operator T_p in weight k with character chi:
 *   c'(n) = c(pn) + chi(p) p^{k-1} c(n/p),   c(n/p) = 0 unless p | n.
 * The c(pn) term consumes p exponents of input per output exponent, so
 * the truncation order contracts to floor(trunc/p).
 */
inline LaurentQSeries hecke_tp(const LaurentQSeries& f, unsigned long p, long k,
                               const DirichletCharacterSpec& chi) {
    if (!is_prime(p)) throw std::invalid_argument("hecke_tp: p must be prime");
    long pl = static_cast<long>(p);
    long lo = std::min(ceil_div(f.min_exp(), pl), f.min_exp() * pl);
    long hi = floor_div(f.trunc_order(), pl);
    if (hi <= lo)
        throw std::invalid_argument("hecke_tp: insufficient truncation order");
    mpq_class vp = rational_prime_power(p, k - 1) * character_value(chi, pl);
    LaurentQSeries out(lo, hi);
    for (long n = lo; n < hi; ++n) {
        mpq_class v = 0;
        if (pl * n < f.trunc_order()) v = f.coeff(pl * n);
        if (n % pl == 0) v += vp * f.coeff(n / pl);
        out.set_coeff(n, v);
    }
    return out;
}

/// U(p): a(n) <- a(np).
inline LaurentQSeries u_op(const LaurentQSeries& f, unsigned long p) {
    if (p == 0) throw std::invalid_argument("u_op: p must be positive");
    long pl = static_cast<long>(p);
    long lo = ceil_div(f.min_exp(), pl);
    long hi = ceil_div(f.trunc_order(), pl);
    if (hi < lo) hi = lo;
    LaurentQSeries out(lo, hi);
    for (long n = lo; n < hi; ++n) out.set_coeff(n, f.coeff(n * pl));
    return out;
}

/// V(p): a(n) <- a(n/p), zero when p does not divide n.
inline LaurentQSeries v_op(const LaurentQSeries& f, unsigned long p) {
    if (p == 0) throw std::invalid_argument("v_op: p must be positive");
    long pl = static_cast<long>(p);
    long lo = f.min_exp() * pl;
    long hi = (f.trunc_order() - 1) * pl + 1;
    if (hi < lo) hi = lo;
    LaurentQSeries out(lo, hi);
    for (long n = f.min_exp(); n < f.trunc_order(); ++n) out.set_coeff(n * pl, f.coeff(n));
    return out;
}

/// Character twist: c(n) <- chi(n) c(n).
inline LaurentQSeries twist(const LaurentQSeries& f, const DirichletCharacterSpec& chi) {
    LaurentQSeries out(f.min_exp(), f.trunc_order());
    for (long n = f.min_exp(); n < f.trunc_order(); ++n) {
        int c = character_value(chi, n);
        if (c != 0) out.set_coeff(n, f.coeff(n) * c);
    }
    return out;
}

/**
 * Proportion of 1 <= n <= X whose coefficient survives reduction mod p^b:
 * returns #{n : coefficient(n) != 0 mod p^b} / X as an exact rational.
 *
 * Coefficients must be integers once multiplied by `declared_denominator`;
 * a coefficient that still has a denominator is an error, not a silent
 * rounding.
 */
inline mpq_class padic_valuation_stats(const LaurentQSeries& f, unsigned long p, unsigned long b,
                                       long big_x, const mpz_class& declared_denominator = 1) {
    if (!is_prime(p)) throw std::invalid_argument("padic_valuation_stats: p must be prime");
    if (b == 0) throw std::invalid_argument("padic_valuation_stats: b must be positive");
    if (big_x <= 0) throw std::invalid_argument("padic_valuation_stats: X must be positive");
    if (f.trunc_order() <= big_x)
        throw std::invalid_argument("padic_valuation_stats: truncation order must exceed X");
    mpz_class pb;
    mpz_ui_pow_ui(pb.get_mpz_t(), p, b);
    long count = 0;
    for (long n = 1; n <= big_x; ++n) {
        mpq_class v = f.coeff(n) * declared_denominator;
        v.canonicalize();
        if (v.get_den() != 1)
            throw std::domain_error(
                "padic_valuation_stats: non-integral coefficient without declared denominator");
        if (v.get_num() % pb != 0) ++count;
    }
    mpq_class density(count, big_x);
    density.canonicalize();
    return density;
}

}  // namespace maassq
