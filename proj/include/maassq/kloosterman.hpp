#pragma once

#include <gmpxx.h>

#include <array>
#include <map>
#include <mutex>
#include <stdexcept>
#include <tuple>
#include <vector>

#include "maassq/arith.hpp"
#include "maassq/ball.hpp"

namespace maassq {

struct KloostermanKey {
    long m;
    long n;
    unsigned long c;
};

/// Ramanujan sum c_c(m) = sum_{d | gcd(|m|, c)} d * mu(c/d), exact.
/// Equals K(m, 0, c) = K(0, m, c); for m = 0 it reduces to phi(c).
inline mpz_class ramanujan_sum(long m, unsigned long c) {
    if (c == 0) throw std::invalid_argument("ramanujan_sum: c must be positive");
    unsigned long am = static_cast<unsigned long>(m < 0 ? -m : m);
    unsigned long g = (am == 0) ? c : gcd_ul(am, c);
    mpz_class acc = 0;
    for (unsigned long d : divisors(g)) {
        int mu = mobius(c / d);
        if (mu != 0) acc += mpz_class(mu) * mpz_class(d);
    }
    return acc;
}

/**
 * Kloosterman sum K(m, n, c) = sum over v in (Z/c)^* of
 * cos(2 pi (m vbar + n v) / c), where v vbar = 1 (mod c).  The sum is real
 * because v and -v contribute conjugate exponentials; pairing v with c - v
 * halves the work.  Returned as a ball whose radius covers the phi(c)
 * cosine evaluations.
 */
inline BallReal kloosterman(const KloostermanKey& key, mpfr_prec_t bits) {
    unsigned long c = key.c;
    if (c == 0) throw std::invalid_argument("kloosterman: c must be positive");
    long mr = ((key.m % static_cast<long>(c)) + static_cast<long>(c)) % static_cast<long>(c);
    long nr = ((key.n % static_cast<long>(c)) + static_cast<long>(c)) % static_cast<long>(c);
    if (c == 1) return BallReal::exact_long(1, bits);
    if (c == 2) return BallReal::exact_long((mr + nr) % 2 == 0 ? 1 : -1, bits);

    BallReal two_pi = BallReal::pi_ball(bits).mul(BallReal::exact_long(2, bits));
    BallReal sum(bits);
    for (unsigned long v = 1; 2 * v < c; ++v) {
        if (gcd_ul(v, c) != 1) continue;
        unsigned long vbar = mod_inverse(v, c);
        unsigned long long t =
            (static_cast<unsigned long long>(mr) * vbar + static_cast<unsigned long long>(nr) * v) %
            c;
        BallReal angle = two_pi.mul(
            BallReal::exact_rational(mpq_class(static_cast<unsigned long>(t), c), bits));
        sum = sum.add(angle.cos());
    }
    return sum.mul(BallReal::exact_long(2, bits));
}

/**
 * Memo cache for Kloosterman balls.  Keys are reduced mod c and sorted —
 * K depends on m, n only through their residues and is symmetric in
 * (m, n), both exact identities of the defining sum.  Safe for concurrent
 * use; duplicated computation is possible but values are consistent.
 */
class KloostermanCache {
public:
    explicit KloostermanCache(unsigned long max_cached_c = 1000000)
        : max_cached_c_(max_cached_c) {}

    BallReal get(long m, long n, unsigned long c, mpfr_prec_t bits) {
        if (c == 0) throw std::invalid_argument("KloostermanCache::get: c must be positive");
        long cl = static_cast<long>(c);
        unsigned long mr = static_cast<unsigned long>(((m % cl) + cl) % cl);
        unsigned long nr = static_cast<unsigned long>(((n % cl) + cl) % cl);
        if (mr > nr) std::swap(mr, nr);
        Key key{mr, nr, c, static_cast<unsigned long>(bits)};
        if (c <= max_cached_c_) {
            std::lock_guard<std::mutex> lock(mu_);
            auto it = map_.find(key);
            if (it != map_.end()) return it->second;
        }
        BallReal v = kloosterman({static_cast<long>(mr), static_cast<long>(nr), c}, bits);
        if (c <= max_cached_c_) {
            std::lock_guard<std::mutex> lock(mu_);
            map_.emplace(key, v);
        }
        return v;
    }

    size_t size() const {
        std::lock_guard<std::mutex> lock(mu_);
        return map_.size();
    }

    /// Cache contents as (m, n, c, value) rows, for diagnostics dumps.
    std::vector<std::tuple<unsigned long, unsigned long, unsigned long, BallReal>> snapshot()
        const {
        std::lock_guard<std::mutex> lock(mu_);
        std::vector<std::tuple<unsigned long, unsigned long, unsigned long, BallReal>> out;
        out.reserve(map_.size());
        for (const auto& [k, v] : map_) out.emplace_back(k[0], k[1], k[2], v);
        return out;
    }

private:
    using Key = std::array<unsigned long, 4>;
    unsigned long max_cached_c_;
    mutable std::mutex mu_;
    std::map<Key, BallReal> map_;
};

}  // namespace maassq
