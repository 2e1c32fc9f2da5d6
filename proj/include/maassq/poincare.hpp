#pragma once

// Fourier coefficients of Poincare series (cuspidal, weakly holomorphic, and
// Maass-Poincare) via truncated Kloosterman/Bessel expansions with certified
// truncation-tail bounds, plus assembly of harmonic expansions and the
// differential operators acting on them.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <fcntl.h>
#include <sys/file.h>
#include <unistd.h>

#include "maassq/arith.hpp"
#include "maassq/ball.hpp"
#include "maassq/kloosterman.hpp"
#include "maassq/special_functions.hpp"

namespace maassq {

struct PoincareParams {
    long m = 1;      ///< index of the series (principal exponent is -m)
    long k = 4;      ///< even weight of the dual cusp-form side, k >= 2
    long level = 1;  ///< moduli in the sum run over positive multiples of level

    void validate() const {
        if (m < 1) throw std::invalid_argument("poincare: index m must be >= 1");
        if (k < 2 || k % 2 != 0)
            throw std::invalid_argument("poincare: weight k must be even and >= 2");
        if (level < 1) throw std::invalid_argument("poincare: level must be >= 1");
    }
};

enum class PoincareKind { cusp, weak, maass_holo, maass_nonholo };

inline std::string to_string(PoincareKind kind) {
    switch (kind) {
        case PoincareKind::cusp: return "cusp";
        case PoincareKind::weak: return "weak";
        case PoincareKind::maass_holo: return "maass-holo";
        case PoincareKind::maass_nonholo: return "maass-nonholo";
    }
    throw std::logic_error("unknown PoincareKind");
}

inline PoincareKind poincare_kind_from_string(const std::string& s) {
    if (s == "cusp") return PoincareKind::cusp;
    if (s == "weak") return PoincareKind::weak;
    if (s == "maass-holo") return PoincareKind::maass_holo;
    if (s == "maass-nonholo") return PoincareKind::maass_nonholo;
    throw std::invalid_argument("unknown series kind: " + s);
}

/// How the infinite modulus sum is truncated.
struct TruncationPolicy {
    enum class Mode { fixed_c, auto_target };

    Mode mode = Mode::auto_target;
    long c_max = 0;             ///< used when mode == fixed_c
    double target_tail = 1e-4;  ///< used when mode == auto_target
    PrecisionConfig prec{};

    static TruncationPolicy fixed(long c, PrecisionConfig pc = PrecisionConfig{}) {
        TruncationPolicy t;
        t.mode = Mode::fixed_c;
        t.c_max = c;
        t.prec = pc;
        t.prec.validate();
        if (c < 0) throw std::invalid_argument("truncation: c_max must be >= 0");
        return t;
    }

    static TruncationPolicy automatic(double target, PrecisionConfig pc = PrecisionConfig{}) {
        TruncationPolicy t;
        t.mode = Mode::auto_target;
        t.target_tail = target;
        t.prec = pc;
        t.prec.validate();
        if (!(target > 0.0)) throw std::invalid_argument("truncation: tail target must be > 0");
        return t;
    }

    std::string policy_string() const {
        char buf[64];
        if (mode == Mode::fixed_c) {
            std::snprintf(buf, sizeof(buf), "cmax:%ld", c_max);
        } else {
            std::snprintf(buf, sizeof(buf), "auto:%.17g", target_tail);
        }
        return buf;
    }
};

/// A coefficient value together with whether its radius accounts for the
/// discarded tail by a proven bound (true) or only a heuristic allowance
/// (false, weight-2 case).
struct CertifiedBall {
    BallReal value;
    bool certified = true;
};

struct TailBoundResult {
    BallReal bound;
    bool certified = true;
};

/// Raised when the automatic truncation search exceeds the modulus cap.
class TruncationCapError : public std::runtime_error {
public:
    explicit TruncationCapError(const std::string& what) : std::runtime_error(what) {}
};

namespace detail {

constexpr long kModulusCap = 1000000;  ///< hard cap on the truncation point

inline double factorial_double(long n) {
    double r = 1.0;
    for (long i = 2; i <= n; ++i) r *= static_cast<double>(i);
    return r;  // exact in double for n <= 20
}

inline mpz_class factorial_mpz(unsigned long n) {
    mpz_class r;
    mpz_fac_ui(r.get_mpz_t(), n);
    return r;
}

/// (-1)^(k/2) for even k.
inline int parity_sign(long k) { return ((k / 2) % 2 == 0) ? 1 : -1; }

/// ratio^(e/2) for an exact positive rational ratio and odd positive e,
/// computed as sqrt(ratio^e) so the fractional power stays certified.
inline BallReal half_odd_power(const mpq_class& ratio, long e, mpfr_prec_t bits) {
    if (ratio <= 0) throw std::domain_error("half_odd_power: ratio must be positive");
    return BallReal::exact_rational(ratio, bits).pow_int(e).sqrt();
}

/// Upper bound (plain double, rounded generously upward) on the magnitude of
/// the outer prefactor multiplying the modulus sum for the given series kind
/// and coefficient index. n may be 0 only for maass_holo.
inline double prefactor_magnitude(const PoincareParams& p, PoincareKind kind, long n) {
    const double two_pi_hi = 6.2831853071795872;  // > 2*pi
    const double md = static_cast<double>(p.m);
    if (n == 0) {
        if (kind != PoincareKind::maass_holo)
            throw std::invalid_argument("prefactor: n == 0 only arises for maass-holo");
        return std::pow(two_pi_hi, static_cast<double>(p.k)) *
               std::pow(md, static_cast<double>(p.k - 1)) /
               factorial_double(p.k - 1) * 1.000001;
    }
    const double nd = static_cast<double>(std::labs(n));
    double ratio;
    double extra = 1.0;
    switch (kind) {
        case PoincareKind::cusp:
        case PoincareKind::weak:
            ratio = nd / md;
            break;
        case PoincareKind::maass_holo:
            ratio = md / nd;
            break;
        case PoincareKind::maass_nonholo:
            ratio = md / nd;
            extra = 1.0 / factorial_double(p.k - 2);
            break;
        default:
            throw std::logic_error("unknown PoincareKind");
    }
    return two_pi_hi * std::pow(ratio, static_cast<double>(p.k - 1) / 2.0) * extra * 1.000001;
}

}  // namespace detail

/// Proven upper bound on |sum over c > C, c = 0 mod level of K(*,*;c)/c * B_{k-1}(4*pi*sqrt(m|n|)/c)|
/// where B is either Bessel function (the power-series majorant covers both).
/// The outer prefactor of any coefficient formula is NOT included. For k == 2
/// the comparison integral diverges and no proven bound exists: the result is
/// a zero ball flagged certified == false.
inline TailBoundResult tail_bound(const PoincareParams& p, long n, long C) {
    p.validate();
    if (n == 0) throw std::invalid_argument("tail_bound: n must be nonzero (constant term is exact)");
    if (C < 0) throw std::invalid_argument("tail_bound: C must be >= 0");
    if (p.k == 2) {
        return TailBoundResult{BallReal::exact_long(0, 64), false};
    }
    const long k = p.k;
    const long N = p.level;
    // A = 2*pi*sqrt(m*|n|), rounded up.
    const double A = 6.2831853071795872 *
                     std::sqrt(static_cast<double>(p.m) * static_cast<double>(std::labs(n))) *
                     1.0000001;
    const long J = (C >= N) ? (C / N) : 0;
    // Terms with c > C have c >= N*(J+1) > C; bound exp((A/c)^2) by its value
    // at the smallest excluded modulus when the sum is empty, else at C.
    const double efac = (J >= 1) ? std::exp((A / static_cast<double>(C)) * (A / static_cast<double>(C)))
                                 : std::exp((A / static_cast<double>(N)) * (A / static_cast<double>(N)));
    const double Npow = std::pow(static_cast<double>(N), static_cast<double>(1 - k));
    const double csum = (J >= 1)
                            ? Npow * std::pow(static_cast<double>(J), static_cast<double>(2 - k)) /
                                  static_cast<double>(k - 2)
                            : Npow * (1.0 + 1.0 / static_cast<double>(k - 2));
    const double bconst = std::pow(A, static_cast<double>(k - 1)) / detail::factorial_double(k - 1);
    const double bound = bconst * efac * csum * 1.02;  // slack for double rounding
    return TailBoundResult{BallReal::exact_double(bound, 64), true};
}

namespace detail {

/// Tail of the exact constant-term sum: |sum over c > C of ramanujan(-m;c)/c^k|
/// is at most sigma_1(m) * sum c^{-k}; outer prefactor excluded.
inline double tail_bound_constant_term(const PoincareParams& p, long C) {
    const long k = p.k;
    const long N = p.level;
    const double sig = sigma_power(1, p.m).get_d() * 1.0000001;
    const long J = (C >= N) ? (C / N) : 0;
    const double Npow = std::pow(static_cast<double>(N), static_cast<double>(-k));
    const double csum = (J >= 1)
                            ? Npow * std::pow(static_cast<double>(J), static_cast<double>(1 - k)) /
                                  static_cast<double>(k - 1)
                            : Npow * (1.0 + 1.0 / static_cast<double>(k - 1));
    return sig * csum * 1.02;
}

/// Upper bound on the whole discarded coefficient tail (prefactor included).
inline double coefficient_tail_upper(const PoincareParams& p, PoincareKind kind, long n, long C) {
    const double pref = prefactor_magnitude(p, kind, n);
    if (n == 0) return pref * tail_bound_constant_term(p, C);
    TailBoundResult t = tail_bound(p, n, C);
    if (!t.certified) throw std::logic_error("coefficient_tail_upper: no certified bound at k == 2");
    return pref * t.bound.upper_double() * 1.0000001;
}

}  // namespace detail

/// Smallest truncation point C (a positive multiple of level) whose proven
/// coefficient tail bound is strictly below target. Throws TruncationCapError
/// when no admissible C <= 10^6 achieves the target, and invalid_argument for
/// k == 2 where no proven bound exists.
inline long resolve_c_max(const PoincareParams& p, PoincareKind kind, long n, double target) {
    p.validate();
    if (!(target > 0.0)) throw std::invalid_argument("resolve_c_max: target must be > 0");
    if (p.k == 2)
        throw std::invalid_argument(
            "resolve_c_max: weight 2 has no proven tail bound; use a fixed c_max");
    const long capJ = detail::kModulusCap / p.level;
    if (capJ < 1)
        throw TruncationCapError("resolve_c_max: level exceeds the modulus cap 10^6");
    auto ok = [&](long J) {
        return detail::coefficient_tail_upper(p, kind, n, J * p.level) < target;
    };
    long J = 1;
    while (!ok(J)) {
        if (J >= capJ)
            throw TruncationCapError(
                "resolve_c_max: tail target unreachable within modulus cap 10^6 "
                "(slowly decaying tail)");
        J = std::min(2 * J, capJ);
    }
    // Smallest good J in (J/2, J]; J == 1 is already minimal.
    long lo = J / 2, hi = J;  // ok(hi), !ok(lo) unless hi == 1
    while (hi - lo > 1) {
        long mid = lo + (hi - lo) / 2;
        if (ok(mid)) hi = mid; else lo = mid;
    }
    return hi * p.level;
}

namespace detail {

struct ModulusSumResult {
    BallReal sum;
    double last_terms_magnitude = 0.0;  ///< sum of |last three included terms|
};

/// sum over c = level, 2*level, ..., <= C of K(km, kn; c)/c * B_{k-1}(4*pi*sqrt(xprod)/c)
/// with B = J when use_j, else I. Deterministic ascending-c accumulation.
inline ModulusSumResult kloosterman_bessel_sum(long km, long kn, long xprod,
                                               const PoincareParams& p, long C, bool use_j,
                                               mpfr_prec_t bits, KloostermanCache& cache) {
    ModulusSumResult out{BallReal::exact_long(0, bits), 0.0};
    if (xprod <= 0) throw std::invalid_argument("kloosterman_bessel_sum: argument product must be > 0");
    const BallReal base = BallReal::pi_ball(bits)
                              .mul(BallReal::exact_long(4, bits))
                              .mul(BallReal::exact_long(xprod, bits).sqrt());
    double l1 = 0.0, l2 = 0.0, l3 = 0.0;
    for (long c = p.level; c <= C; c += p.level) {
        const BallReal K = cache.get(km, kn, static_cast<unsigned long>(c), bits);
        const BallReal x = base.mul(BallReal::exact_rational(mpq_class(1, c), bits));
        const BallReal bes = use_j ? bessel_j_ball(p.k - 1, x) : bessel_i_ball(p.k - 1, x);
        const BallReal term = K.mul(bes).mul(BallReal::exact_rational(mpq_class(1, c), bits));
        out.sum = out.sum.add(term);
        l1 = l2; l2 = l3; l3 = term.abs_upper_double();
    }
    out.last_terms_magnitude = l1 + l2 + l3;
    return out;
}

/// Shared assembly: outer prefactor times modulus sum, radius widened by the
/// proven tail (k >= 4) or a heuristic three-term allowance (k == 2).
inline CertifiedBall assemble_coefficient(const PoincareParams& p, PoincareKind kind, long n,
                                          const BallReal& prefactor, long km, long kn, bool use_j,
                                          const TruncationPolicy& t, KloostermanCache& cache) {
    const mpfr_prec_t bits = t.prec.working_bits;
    long C;
    if (t.mode == TruncationPolicy::Mode::fixed_c) {
        C = t.c_max;
    } else {
        C = resolve_c_max(p, kind, n, t.target_tail);
    }
    ModulusSumResult s = kloosterman_bessel_sum(km, kn, p.m * std::labs(n), p, C, use_j, bits, cache);
    BallReal value = prefactor.mul(s.sum);
    CertifiedBall out{value, true};
    if (p.k >= 4) {
        const double tail = detail::coefficient_tail_upper(p, kind, n, C);
        out.value = out.value.widened_by_double(tail);
        out.certified = true;
    } else {
        const double pref_hi = prefactor.abs_upper_double();
        out.value = out.value.widened_by_double(pref_hi * s.last_terms_magnitude);
        out.certified = false;
    }
    return out;
}

}  // namespace detail

/// n-th coefficient (n >= 1) of the weight-k cuspidal Poincare series of
/// index m: 2*pi*(-1)^(k/2)*(n/m)^((k-1)/2) * sum K(m,n;c)/c * J_{k-1}(4*pi*sqrt(mn)/c).
/// The q^m seed of the series itself is NOT included: this is the pure sum term.
inline CertifiedBall cusp_poincare_coeff(const PoincareParams& p, long n,
                                         const TruncationPolicy& t, KloostermanCache& cache) {
    p.validate();
    if (n < 1) throw std::invalid_argument("cusp_poincare_coeff: n must be >= 1");
    const mpfr_prec_t bits = t.prec.working_bits;
    BallReal pref = BallReal::pi_ball(bits)
                        .mul(BallReal::exact_long(2 * detail::parity_sign(p.k), bits))
                        .mul(detail::half_odd_power(mpq_class(n, p.m), p.k - 1, bits));
    return detail::assemble_coefficient(p, PoincareKind::cusp, n, pref, p.m, n, /*use_j=*/true, t, cache);
}

/// n-th coefficient (n >= 1) of the weakly holomorphic Poincare series with
/// principal part q^{-m}: same shape as the cusp case but with K(-m,n;c) and
/// the exponentially growing Bessel I.
inline CertifiedBall weakly_holo_poincare_coeff(const PoincareParams& p, long n,
                                                const TruncationPolicy& t, KloostermanCache& cache) {
    p.validate();
    if (n < 1) throw std::invalid_argument("weakly_holo_poincare_coeff: n must be >= 1");
    const mpfr_prec_t bits = t.prec.working_bits;
    BallReal pref = BallReal::pi_ball(bits)
                        .mul(BallReal::exact_long(2 * detail::parity_sign(p.k), bits))
                        .mul(detail::half_odd_power(mpq_class(n, p.m), p.k - 1, bits));
    return detail::assemble_coefficient(p, PoincareKind::weak, n, pref, -p.m, n, /*use_j=*/false, t, cache);
}

/// Holomorphic-part coefficient b(n), n >= 0, of the weight 2-k Maass-Poincare
/// series of index -m. For n >= 1:
///   -2*pi*(-1)^(k/2)*(m/n)^((k-1)/2) * sum K(-m,n;c)/c * I_{k-1}(4*pi*sqrt(mn)/c).
/// For n == 0 the modulus sum collapses to exact Ramanujan sums:
///   -(-1)^(k/2)*(2*pi)^k*m^(k-1)/(k-1)! * sum_{c = 0 mod level} ramanujan(-m;c)/c^k,
/// whose inner sum is accumulated as an exact rational.
inline CertifiedBall maass_poincare_holo_coeff(const PoincareParams& p, long n,
                                               const TruncationPolicy& t, KloostermanCache& cache) {
    p.validate();
    if (n < 0) throw std::invalid_argument("maass_poincare_holo_coeff: n must be >= 0");
    const mpfr_prec_t bits = t.prec.working_bits;
    if (n == 0) {
        long C;
        if (t.mode == TruncationPolicy::Mode::fixed_c) {
            C = t.c_max;
        } else {
            if (p.k == 2)
                throw std::invalid_argument(
                    "maass_poincare_holo_coeff: weight 2 has no proven tail bound; use fixed c_max");
            // Reuse the doubling/bisection search with the constant-term bound.
            const long capJ = detail::kModulusCap / p.level;
            if (capJ < 1) throw TruncationCapError("constant term: level exceeds modulus cap");
            auto ok = [&](long J) {
                return detail::coefficient_tail_upper(p, PoincareKind::maass_holo, 0, J * p.level) <
                       t.target_tail;
            };
            long J = 1;
            while (!ok(J)) {
                if (J >= capJ)
                    throw TruncationCapError("constant term: tail target unreachable within cap");
                J = std::min(2 * J, capJ);
            }
            long lo = J / 2, hi = J;
            while (hi - lo > 1) {
                long mid = lo + (hi - lo) / 2;
                if (ok(mid)) hi = mid; else lo = mid;
            }
            C = hi * p.level;
        }
        mpq_class inner = 0;
        for (long c = p.level; c <= C; c += p.level) {
            mpz_class ck;
            mpz_ui_pow_ui(ck.get_mpz_t(), static_cast<unsigned long>(c),
                          static_cast<unsigned long>(p.k));
            inner += mpq_class(ramanujan_sum(-p.m, static_cast<unsigned long>(c))) / mpq_class(ck);
        }
        // prefactor: -(-1)^(k/2) * 2^k * m^(k-1) / (k-1)! * pi^k
        mpz_class mpow;
        mpz_ui_pow_ui(mpow.get_mpz_t(), static_cast<unsigned long>(p.m),
                      static_cast<unsigned long>(p.k - 1));
        mpq_class prefq = mpq_class(mpz_class(1) << p.k) * mpq_class(mpow) /
                          mpq_class(detail::factorial_mpz(p.k - 1));
        prefq *= -detail::parity_sign(p.k);
        prefq.canonicalize();
        BallReal pref = BallReal::pi_ball(bits).pow_int(p.k).mul(BallReal::exact_rational(prefq, bits));
        BallReal value = pref.mul(BallReal::exact_rational(inner, bits));
        CertifiedBall out{value, true};
        if (p.k >= 4) {
            out.value = out.value.widened_by_double(
                detail::coefficient_tail_upper(p, PoincareKind::maass_holo, 0, C));
        } else {
            // Heuristic: three smallest included exact terms of the inner sum,
            // scaled by the prefactor magnitude.
            double allowance = 0.0;
            long counted = 0;
            for (long c = C - (C % p.level); c >= p.level && counted < 3; c -= p.level) {
                if (c > C) continue;
                double ckd = std::pow(static_cast<double>(c), static_cast<double>(p.k));
                allowance += std::fabs(ramanujan_sum(-p.m, static_cast<unsigned long>(c)).get_d()) / ckd;
                ++counted;
            }
            out.value = out.value.widened_by_double(pref.abs_upper_double() * allowance);
            out.certified = false;
        }
        return out;
    }
    BallReal pref = BallReal::pi_ball(bits)
                        .mul(BallReal::exact_long(-2 * detail::parity_sign(p.k), bits))
                        .mul(detail::half_odd_power(mpq_class(p.m, n), p.k - 1, bits));
    return detail::assemble_coefficient(p, PoincareKind::maass_holo, n, pref, -p.m, n,
                                        /*use_j=*/false, t, cache);
}

/// Non-holomorphic-part coefficient b(n) for n < 0 of the same Maass-Poincare
/// series (the coefficient multiplying the incomplete-Gamma factor):
///   -2*pi*(-1)^(k/2)/(k-2)! * (m/|n|)^((k-1)/2) * sum K(-m,n;c)/c * J_{k-1}(4*pi*sqrt(m|n|)/c).
/// The exact -1/(k-2)! marker at n == -m belongs to series assembly, not here.
inline CertifiedBall maass_poincare_nonholo_coeff(const PoincareParams& p, long n,
                                                  const TruncationPolicy& t,
                                                  KloostermanCache& cache) {
    p.validate();
    if (n >= 0) throw std::invalid_argument("maass_poincare_nonholo_coeff: n must be < 0");
    const mpfr_prec_t bits = t.prec.working_bits;
    mpq_class scale(-2 * detail::parity_sign(p.k), 1);
    scale /= mpq_class(detail::factorial_mpz(p.k - 2));
    scale.canonicalize();
    BallReal pref = BallReal::pi_ball(bits)
                        .mul(BallReal::exact_rational(scale, bits))
                        .mul(detail::half_odd_power(mpq_class(p.m, -n), p.k - 1, bits));
    return detail::assemble_coefficient(p, PoincareKind::maass_nonholo, n, pref, -p.m, n,
                                        /*use_j=*/true, t, cache);
}

/// A truncated harmonic expansion: exact principal part plus ball-valued
/// holomorphic (q^n, n >= 0) and non-holomorphic (incomplete-Gamma, exponent
/// n < 0) coefficient maps. `certified` is the AND over all stored balls.
struct HarmonicExpansion {
    long weight = 0;
    std::map<long, mpq_class> principal;
    std::map<long, BallReal> holo;
    std::map<long, BallReal> nonholo;
    bool certified = true;
};

/// Assemble the index -m, weight 2-k Maass-Poincare series through q^{n_max}:
/// exact principal coefficient 1 at q^{-m}, holomorphic coefficients for
/// 0 <= n <= n_max, non-holomorphic coefficients for -n_max <= n <= -1, and
/// the exact -1/(k-2)! marker folded into the non-holomorphic exponent -m.
inline HarmonicExpansion assemble_maass_poincare(const PoincareParams& p, long n_max,
                                                 const TruncationPolicy& t,
                                                 KloostermanCache& cache) {
    p.validate();
    if (n_max < 0) throw std::invalid_argument("assemble_maass_poincare: n_max must be >= 0");
    const mpfr_prec_t bits = t.prec.working_bits;
    HarmonicExpansion f;
    f.weight = 2 - p.k;
    f.principal[-p.m] = 1;
    for (long n = 0; n <= n_max; ++n) {
        CertifiedBall cb = maass_poincare_holo_coeff(p, n, t, cache);
        f.holo[n] = cb.value;
        f.certified = f.certified && cb.certified;
    }
    for (long n = 1; n <= n_max; ++n) {
        CertifiedBall cb = maass_poincare_nonholo_coeff(p, -n, t, cache);
        f.nonholo[-n] = cb.value;
        f.certified = f.certified && cb.certified;
    }
    mpq_class marker(-1, 1);
    marker /= mpq_class(detail::factorial_mpz(p.k - 2));
    marker.canonicalize();
    auto it = f.nonholo.find(-p.m);
    if (it != f.nonholo.end()) {
        it->second = it->second.add(BallReal::exact_rational(marker, bits));
    } else {
        f.nonholo[-p.m] = BallReal::exact_rational(marker, bits);
    }
    return f;
}

namespace detail {

inline mpz_class power_long(long base, unsigned long e) {
    mpz_class b(base), r;
    mpz_pow_ui(r.get_mpz_t(), b.get_mpz_t(), e);
    return r;
}

inline mpfr_prec_t expansion_bits(const HarmonicExpansion& f) {
    if (!f.holo.empty()) return f.holo.begin()->second.prec();
    if (!f.nonholo.empty()) return f.nonholo.begin()->second.prec();
    return 128;
}

}  // namespace detail

/// Apply the (k-1)-fold derivative (d/(2*pi*i) dz)^(k-1) to a weight 2-k
/// expansion: every q^n coefficient is multiplied by n^(k-1) (constant term
/// dies, exponent arithmetic exact) and the non-holomorphic part is
/// annihilated. Output maps exponent -> coefficient of the image q-expansion.
inline std::map<long, BallReal> bol_operator(const HarmonicExpansion& f, long k) {
    if (k < 2 || k % 2 != 0) throw std::invalid_argument("bol_operator: k must be even and >= 2");
    if (f.weight != 2 - k)
        throw std::invalid_argument("bol_operator: expansion weight must equal 2-k");
    const mpfr_prec_t bits = detail::expansion_bits(f);
    std::map<long, BallReal> out;
    for (const auto& [e, pe] : f.principal) {
        if (pe == 0) continue;
        mpq_class v = pe;
        if (e < 0) {
            mpq_class ep = mpq_class(detail::power_long(-e, static_cast<unsigned long>(k - 1)));
            if ((k - 1) % 2 != 0) ep = -ep;  // (-|e|)^(k-1)
            v *= ep;
        } else if (e == 0) {
            continue;
        } else {
            v *= mpq_class(detail::power_long(e, static_cast<unsigned long>(k - 1)));
        }
        v.canonicalize();
        auto it = out.find(e);
        if (it != out.end()) it->second = it->second.add(BallReal::exact_rational(v, bits));
        else out.emplace(e, BallReal::exact_rational(v, bits));
    }
    for (const auto& [n, c] : f.holo) {
        if (n == 0) {
            out.emplace(0, BallReal::exact_long(0, bits));
            continue;
        }
        BallReal v = c.mul(BallReal::exact_rational(
            mpq_class(detail::power_long(n, static_cast<unsigned long>(k - 1))), bits));
        auto it = out.find(n);
        if (it != out.end()) it->second = it->second.add(v);
        else out.emplace(n, v);
    }
    return out;
}

/// Apply the weight 2-k xi-operator at the level of coefficients: the image is
/// a weight-k cusp-form expansion with n-th coefficient
///   -(4*pi)^(k-1) * conj(c_f^-(-n)) * n^(k-1),
/// and all stored coefficients are real, so conjugation is the identity.
inline std::map<long, BallReal> xi_operator(const HarmonicExpansion& f, long k) {
    if (k < 2 || k % 2 != 0) throw std::invalid_argument("xi_operator: k must be even and >= 2");
    if (f.weight != 2 - k)
        throw std::invalid_argument("xi_operator: expansion weight must equal 2-k");
    const mpfr_prec_t bits = detail::expansion_bits(f);
    const BallReal four_pi_pow =
        BallReal::pi_ball(bits).mul(BallReal::exact_long(4, bits)).pow_int(k - 1);
    std::map<long, BallReal> out;
    for (const auto& [e, c] : f.nonholo) {
        if (e >= 0) throw std::invalid_argument("xi_operator: non-holomorphic exponents must be < 0");
        const long n = -e;
        BallReal v = four_pi_pow
                         .mul(c)
                         .mul(BallReal::exact_rational(
                             mpq_class(detail::power_long(n, static_cast<unsigned long>(k - 1))), bits))
                         .neg();
        out.emplace(n, v);
    }
    return out;
}

/// Numerically evaluate the truncated expansion at z = x + i*y (y > 0
/// required, checked exactly against the ball's lower bound). Returns
/// (real part, imag part). Radii carry full interval propagation for the
/// included terms plus a declared heuristic allowance of four times the
/// largest of the last three stored terms in each series part, standing in
/// for the discarded tail of the q-expansion.
inline std::pair<BallReal, BallReal> eval_expansion(const HarmonicExpansion& f, long k,
                                                    const BallReal& x, const BallReal& y) {
    if (k < 2 || k % 2 != 0) throw std::invalid_argument("eval_expansion: k must be even and >= 2");
    if (f.weight != 2 - k)
        throw std::invalid_argument("eval_expansion: expansion weight must equal 2-k");
    {
        mpq_class ylo = y.mid_rational() - y.rad_rational();
        if (ylo <= 0) throw std::domain_error("eval_expansion: y must be strictly positive");
    }
    const mpfr_prec_t bits = std::max(x.prec(), y.prec());
    const BallReal two_pi = BallReal::pi_ball(bits).mul(BallReal::exact_long(2, bits));
    BallReal re = BallReal::exact_long(0, bits);
    BallReal im = BallReal::exact_long(0, bits);

    auto add_term = [&](long e, const BallReal& coeff) {
        // coeff * e^{2*pi*i*e*x} * e^{-2*pi*e*y}
        const BallReal ee = BallReal::exact_long(e, bits);
        const BallReal decay = two_pi.mul(ee).mul(y).neg().exp();
        const BallReal arg = two_pi.mul(ee).mul(x);
        const BallReal w = coeff.mul(decay);
        re = re.add(w.mul(arg.cos()));
        im = im.add(w.mul(arg.sin()));
        return w.abs_upper_double();
    };

    for (const auto& [e, pe] : f.principal) {
        if (pe == 0) continue;
        add_term(e, BallReal::exact_rational(pe, bits));
    }

    std::vector<double> holo_mags;
    for (const auto& [n, c] : f.holo) holo_mags.push_back(add_term(n, c));

    std::vector<double> nonholo_mags;
    for (const auto& [e, c] : f.nonholo) {
        if (e >= 0) throw std::invalid_argument("eval_expansion: non-holomorphic exponents must be < 0");
        // coeff * Gamma(k-1, 4*pi*|e|*y) * q^e with q^e = e^{2*pi*i*e*x} e^{-2*pi*e*y}
        const BallReal gam = incomplete_gamma_int(
            k - 1, BallReal::pi_ball(bits).mul(BallReal::exact_long(4 * (-e), bits)).mul(y));
        nonholo_mags.push_back(add_term(e, c.mul(gam)));
    }

    auto tail_allow = [](const std::vector<double>& mags) {
        double mx = 0.0;
        const std::size_t n = mags.size();
        for (std::size_t i = (n > 3 ? n - 3 : 0); i < n; ++i) mx = std::max(mx, mags[i]);
        return 4.0 * mx;
    };
    const double allowance = tail_allow(holo_mags) + tail_allow(nonholo_mags);
    re = re.widened_by_double(allowance);
    im = im.widened_by_double(allowance);
    return {re, im};
}

/// One cusp's contribution data for the constant-term pairing formula.
struct CuspConstantEntry {
    long width = 1;
    BallReal c_g0;  ///< constant term of the weight-k input at this cusp
    BallReal c_f0;  ///< constant term of the weight 2-k input at this cusp
};

struct CuspConstantData {
    std::vector<CuspConstantEntry> entries;
    long index = 1;  ///< index of the congruence subgroup
};

/// Geometric side of the regularized pairing:
///   (-1)^k / index * sum over cusps of width * c_g0 * c_f0.
inline BallReal regularized_pairing_rhs(const CuspConstantData& d, long k) {
    if (d.index < 1) throw std::invalid_argument("regularized_pairing_rhs: index must be >= 1");
    mpfr_prec_t bits = 128;
    for (const auto& e : d.entries) bits = std::max({bits, e.c_g0.prec(), e.c_f0.prec()});
    BallReal sum = BallReal::exact_long(0, bits);
    for (const auto& e : d.entries) {
        if (e.width < 1)
            throw std::invalid_argument("regularized_pairing_rhs: cusp widths must be >= 1");
        sum = sum.add(BallReal::exact_long(e.width, bits).mul(e.c_g0).mul(e.c_f0));
    }
    const long sgn = (k % 2 == 0) ? 1 : -1;
    return sum.mul(BallReal::exact_rational(mpq_class(sgn, d.index), bits));
}

// ---------------------------------------------------------------------------
// On-disk coefficient cache
// ---------------------------------------------------------------------------

/// Parsed contents of one coefficient cache file. Rows keep the serialized
/// ball text so precision is preserved byte-for-byte on merge/rewrite.
struct PoincareCacheData {
    PoincareParams params;
    PoincareKind kind = PoincareKind::maass_holo;
    long prec_bits = 128;
    std::string policy;
    std::map<long, std::string> rows;  ///< n -> serialized ball

    BallReal ball_at(long n) const {
        auto it = rows.find(n);
        if (it == rows.end()) throw std::out_of_range("cache: no row for requested n");
        return BallReal::parse(it->second, static_cast<mpfr_prec_t>(prec_bits));
    }
};

inline std::string poincare_cache_filename(const PoincareCacheData& d) {
    std::ostringstream os;
    os << "poincare-" << to_string(d.kind) << "-m" << d.params.m << "-k" << d.params.k << "-N"
       << d.params.level << ".cache";
    return os.str();
}

inline void write_poincare_cache(std::ostream& os, const PoincareCacheData& d) {
    os << "poincare m=" << d.params.m << " k=" << d.params.k << " N=" << d.params.level
       << " kind=" << to_string(d.kind) << " prec=" << d.prec_bits << " policy=" << d.policy
       << "\n";
    for (const auto& [n, s] : d.rows) os << n << " " << s << "\n";
}

inline PoincareCacheData read_poincare_cache(std::istream& is) {
    PoincareCacheData d;
    std::string line;
    long lineno = 0;
    if (!std::getline(is, line))
        throw std::runtime_error("cache parse error at line 1: empty file");
    ++lineno;
    {
        char kindbuf[64];
        char policybuf[128];
        long m, k, N, prec;
        int got = std::sscanf(line.c_str(), "poincare m=%ld k=%ld N=%ld kind=%63s prec=%ld policy=%127s",
                              &m, &k, &N, kindbuf, &prec, policybuf);
        if (got != 6)
            throw std::runtime_error("cache parse error at line 1: bad header `" + line + "`");
        d.params.m = m;
        d.params.k = k;
        d.params.level = N;
        d.kind = poincare_kind_from_string(kindbuf);
        d.prec_bits = prec;
        d.policy = policybuf;
        d.params.validate();
        if (prec < 53) throw std::runtime_error("cache parse error at line 1: precision below 53 bits");
    }
    while (std::getline(is, line)) {
        ++lineno;
        if (line.empty()) continue;
        std::istringstream ls(line);
        long n;
        if (!(ls >> n))
            throw std::runtime_error("cache parse error at line " + std::to_string(lineno) +
                                     ": expected `n <ball>`");
        std::string rest;
        std::getline(ls, rest);
        std::size_t pos = rest.find_first_not_of(' ');
        if (pos == std::string::npos)
            throw std::runtime_error("cache parse error at line " + std::to_string(lineno) +
                                     ": missing ball value");
        rest = rest.substr(pos);
        try {
            (void)BallReal::parse(rest, static_cast<mpfr_prec_t>(d.prec_bits));
        } catch (const std::exception& ex) {
            throw std::runtime_error("cache parse error at line " + std::to_string(lineno) + ": " +
                                     ex.what());
        }
        d.rows[n] = rest;
    }
    return d;
}

enum class CacheUpdateStatus {
    created,                  ///< no usable file existed; wrote fresh contents
    appended,                 ///< same precision: union of rows written
    replaced_higher_precision,///< incoming precision higher: file rewritten
    refused_lower_precision   ///< incoming precision lower: file left untouched
};

namespace detail {

inline std::string read_all_fd(int fd) {
    std::string out;
    char buf[65536];
    if (::lseek(fd, 0, SEEK_SET) < 0) throw std::runtime_error("cache: lseek failed");
    for (;;) {
        ssize_t r = ::read(fd, buf, sizeof(buf));
        if (r < 0) {
            if (errno == EINTR) continue;
            throw std::runtime_error("cache: read failed");
        }
        if (r == 0) break;
        out.append(buf, static_cast<std::size_t>(r));
    }
    return out;
}

inline void write_all_fd(int fd, const std::string& s) {
    if (::lseek(fd, 0, SEEK_SET) < 0) throw std::runtime_error("cache: lseek failed");
    if (::ftruncate(fd, 0) < 0) throw std::runtime_error("cache: ftruncate failed");
    std::size_t off = 0;
    while (off < s.size()) {
        ssize_t w = ::write(fd, s.data() + off, s.size() - off);
        if (w < 0) {
            if (errno == EINTR) continue;
            throw std::runtime_error("cache: write failed");
        }
        off += static_cast<std::size_t>(w);
    }
}

}  // namespace detail

/// Merge `incoming` into the cache file at `path` under an exclusive advisory
/// lock. Rules: absent/empty file -> write; mismatched series parameters or
/// kind -> error; equal precision -> union of rows (existing rows win, which
/// is an append of new n); higher incoming precision -> full rewrite; lower
/// incoming precision -> refuse, leaving the file untouched.
inline CacheUpdateStatus update_poincare_cache_file(const std::string& path,
                                                    const PoincareCacheData& incoming) {
    int fd = ::open(path.c_str(), O_RDWR | O_CREAT, 0644);
    if (fd < 0) throw std::runtime_error("cache: cannot open " + path);
    if (::flock(fd, LOCK_EX) != 0) {
        ::close(fd);
        throw std::runtime_error("cache: cannot lock " + path);
    }
    CacheUpdateStatus status;
    try {
        const std::string existing_text = detail::read_all_fd(fd);
        if (existing_text.empty()) {
            std::ostringstream os;
            write_poincare_cache(os, incoming);
            detail::write_all_fd(fd, os.str());
            status = CacheUpdateStatus::created;
        } else {
            std::istringstream is(existing_text);
            PoincareCacheData existing = read_poincare_cache(is);
            if (existing.params.m != incoming.params.m || existing.params.k != incoming.params.k ||
                existing.params.level != incoming.params.level || existing.kind != incoming.kind) {
                throw std::runtime_error("cache: file " + path +
                                         " holds a different series; refusing to mix");
            }
            if (incoming.prec_bits < existing.prec_bits) {
                status = CacheUpdateStatus::refused_lower_precision;
            } else if (incoming.prec_bits > existing.prec_bits) {
                std::ostringstream os;
                write_poincare_cache(os, incoming);
                detail::write_all_fd(fd, os.str());
                status = CacheUpdateStatus::replaced_higher_precision;
            } else {
                PoincareCacheData merged = existing;
                for (const auto& [n, s] : incoming.rows) merged.rows.emplace(n, s);
                std::ostringstream os;
                write_poincare_cache(os, merged);
                detail::write_all_fd(fd, os.str());
                status = CacheUpdateStatus::appended;
            }
        }
    } catch (...) {
        ::flock(fd, LOCK_UN);
        ::close(fd);
        throw;
    }
    ::flock(fd, LOCK_UN);
    ::close(fd);
    return status;
}

/// Load a cache file if present; std::nullopt when the file does not exist.
/// Parse failures on an existing file throw.
inline std::optional<PoincareCacheData> load_poincare_cache_file(const std::string& path) {
    int fd = ::open(path.c_str(), O_RDONLY);
    if (fd < 0) return std::nullopt;
    if (::flock(fd, LOCK_SH) != 0) {
        ::close(fd);
        throw std::runtime_error("cache: cannot lock " + path);
    }
    std::string text;
    try {
        text = detail::read_all_fd(fd);
    } catch (...) {
        ::flock(fd, LOCK_UN);
        ::close(fd);
        throw;
    }
    ::flock(fd, LOCK_UN);
    ::close(fd);
    if (text.empty()) return std::nullopt;
    std::istringstream is(text);
    return read_poincare_cache(is);
}

}  // namespace maassq
