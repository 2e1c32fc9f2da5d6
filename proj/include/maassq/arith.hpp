#pragma once

#include <gmpxx.h>

#include <cstdint>
#include <stdexcept>
#include <vector>

namespace maassq {

/// Sum of k-th powers of the positive divisors of n.
inline mpz_class sigma_power(unsigned k, unsigned long n) {
    if (n == 0) throw std::invalid_argument("sigma_power: n must be positive");
    mpz_class total = 0;
    for (unsigned long d = 1; d * d <= n; ++d) {
        if (n % d != 0) continue;
        mpz_class dd(static_cast<unsigned long>(d));
        mpz_class t;
        mpz_pow_ui(t.get_mpz_t(), dd.get_mpz_t(), k);
        total += t;
        unsigned long e = n / d;
        if (e != d) {
            mpz_class ee(e);
            mpz_pow_ui(t.get_mpz_t(), ee.get_mpz_t(), k);
            total += t;
        }
    }
    return total;
}

/// Moebius function; 0 on non-squarefree input.
inline int mobius(unsigned long n) {
    if (n == 0) throw std::invalid_argument("mobius: n must be positive");
    int res = 1;
    for (unsigned long p = 2; p * p <= n; ++p) {
        if (n % p == 0) {
            n /= p;
            if (n % p == 0) return 0;
            res = -res;
        }
    }
    if (n > 1) res = -res;
    return res;
}

inline unsigned long euler_phi(unsigned long n) {
    if (n == 0) throw std::invalid_argument("euler_phi: n must be positive");
    unsigned long result = n;
    for (unsigned long p = 2; p * p <= n; ++p) {
        if (n % p == 0) {
            while (n % p == 0) n /= p;
            result -= result / p;
        }
    }
    if (n > 1) result -= result / n;
    return result;
}

/// Inverse of v modulo c (extended Euclid); throws when gcd(v, c) != 1.
inline unsigned long mod_inverse(unsigned long v, unsigned long c) {
    if (c == 0) throw std::invalid_argument("mod_inverse: zero modulus");
    long long t = 0, new_t = 1;
    long long r = static_cast<long long>(c), new_r = static_cast<long long>(v % c);
    while (new_r != 0) {
        long long q = r / new_r;
        long long tmp = t - q * new_t;
        t = new_t;
        new_t = tmp;
        tmp = r - q * new_r;
        r = new_r;
        new_r = tmp;
    }
    if (r != 1) throw std::domain_error("mod_inverse: arguments are not coprime");
    if (t < 0) t += static_cast<long long>(c);
    return static_cast<unsigned long>(t);
}

inline bool is_prime(unsigned long n) {
    if (n < 2) return false;
    for (unsigned long p = 2; p * p <= n; ++p)
        if (n % p == 0) return false;
    return true;
}

/// Kronecker symbol (D | n), completely multiplicative in n.
inline int kronecker_symbol(long D, long n) {
    mpz_class d(D), m(n);
    return mpz_kronecker(d.get_mpz_t(), m.get_mpz_t());
}

inline unsigned long gcd_ul(unsigned long a, unsigned long b) {
    while (b != 0) {
        unsigned long t = a % b;
        a = b;
        b = t;
    }
    return a;
}

/// Divisors of n in ascending order.
inline std::vector<unsigned long> divisors(unsigned long n) {
    std::vector<unsigned long> small, large;
    for (unsigned long d = 1; d * d <= n; ++d) {
        if (n % d == 0) {
            small.push_back(d);
            if (d != n / d) large.push_back(n / d);
        }
    }
    for (auto it = large.rbegin(); it != large.rend(); ++it) small.push_back(*it);
    return small;
}

}  // namespace maassq
