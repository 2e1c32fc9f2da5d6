#pragma once

#include <gmpxx.h>

#include <algorithm>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace maassq {

/**
 * Truncated Laurent series in q with exact rational coefficients.
 *
 * Coefficients are known exactly for exponents n with min_exp() <= n <
 * trunc_order(); below min_exp() the series is identically zero by
 * construction.  Every binary operation derives the tightest provable
 * truncation order from its inputs rather than assuming they share one —
 * silent truncation bugs are the dominant failure mode of q-series code,
 * so validity windows are tracked explicitly everywhere.
 */
class LaurentQSeries {
public:
    LaurentQSeries() : min_exp_(0), trunc_(0) {}

    LaurentQSeries(long min_exp, long trunc)
        : min_exp_(min_exp), trunc_(trunc) {
        if (trunc < min_exp) throw std::invalid_argument("LaurentQSeries: trunc below min_exp");
        coeffs_.assign(static_cast<size_t>(trunc - min_exp), mpq_class(0));
    }

    static LaurentQSeries zero(long trunc) { return LaurentQSeries(0, trunc); }

    static LaurentQSeries constant(const mpq_class& v, long trunc) {
        LaurentQSeries s(0, trunc);
        if (trunc > 0) s.set_coeff(0, v);
        return s;
    }

    static LaurentQSeries monomial(const mpq_class& v, long e, long trunc) {
        LaurentQSeries s(std::min(e, trunc), trunc);
        if (e < trunc) s.set_coeff(e, v);
        return s;
    }

    long min_exp() const { return min_exp_; }
    long trunc_order() const { return trunc_; }

    /// Exact coefficient of q^n.  Zero below min_exp(); beyond the
    /// truncation order the value is unknown and asking for it throws.
    const mpq_class& coeff(long n) const {
        static const mpq_class zero_q(0);
        if (n >= trunc_)
            throw std::out_of_range("LaurentQSeries::coeff: exponent beyond truncation order");
        if (n < min_exp_) return zero_q;
        return coeffs_[static_cast<size_t>(n - min_exp_)];
    }

    void set_coeff(long n, const mpq_class& v) {
        if (n < min_exp_ || n >= trunc_)
            throw std::out_of_range("LaurentQSeries::set_coeff: exponent outside window");
        mpq_class c(v);
        c.canonicalize();
        coeffs_[static_cast<size_t>(n - min_exp_)] = c;
    }

    bool is_zero() const {
        for (const auto& c : coeffs_)
            if (c != 0) return false;
        return true;
    }

    /// Exponent of the first nonzero coefficient; trunc_order() when none.
    long valuation() const {
        for (long n = min_exp_; n < trunc_; ++n)
            if (coeff(n) != 0) return n;
        return trunc_;
    }

    /// Drop leading zero coefficients so min_exp() points at the first
    /// (possibly) nonzero term.  No-op on the zero series.
    LaurentQSeries normalized() const {
        long v = valuation();
        if (v == min_exp_ || v == trunc_) return *this;
        LaurentQSeries out(v, trunc_);
        for (long n = v; n < trunc_; ++n) out.set_coeff(n, coeff(n));
        return out;
    }

    /// Restrict the validity window (cheap way to align operands).
    LaurentQSeries truncated(long new_trunc) const {
        if (new_trunc >= trunc_) return *this;
        long lo = std::min(min_exp_, new_trunc);
        LaurentQSeries out(lo, new_trunc);
        for (long n = min_exp_; n < new_trunc; ++n) out.set_coeff(n, coeff(n));
        return out;
    }

    LaurentQSeries operator+(const LaurentQSeries& o) const {
        long lo = std::min(min_exp_, o.min_exp_);
        long hi = std::min(trunc_, o.trunc_);
        if (hi < lo) hi = lo;
        LaurentQSeries out(lo, hi);
        for (long n = lo; n < hi; ++n) {
            mpq_class v = (n >= min_exp_ ? coeff(n) : mpq_class(0));
            if (n >= o.min_exp_) v += o.coeff(n);
            out.set_coeff(n, v);
        }
        return out;
    }

    LaurentQSeries operator-() const {
        LaurentQSeries out(min_exp_, trunc_);
        for (long n = min_exp_; n < trunc_; ++n) out.set_coeff(n, -coeff(n));
        return out;
    }

    LaurentQSeries operator-(const LaurentQSeries& o) const { return *this + (-o); }

    /// Exact multiplication by q^e (window shifts with the data).
    LaurentQSeries shifted(long e) const {
        LaurentQSeries out(*this);
        out.min_exp_ += e;
        out.trunc_ += e;
        return out;
    }

    LaurentQSeries operator*(const mpq_class& s) const {
        LaurentQSeries out(min_exp_, trunc_);
        if (s != 0)
            for (long n = min_exp_; n < trunc_; ++n) out.set_coeff(n, s * coeff(n));
        return out;
    }

    /// Add a constant, widening the window down to exponent 0 if needed
    /// (coefficients below min_exp() are zero by construction, so the
    /// widening loses nothing).
    LaurentQSeries plus_constant(const mpq_class& v) const {
        long lo = std::min(min_exp_, 0L);
        if (trunc_ <= 0) throw std::out_of_range("plus_constant: window ends before exponent 0");
        LaurentQSeries out(lo, trunc_);
        for (long n = min_exp_; n < trunc_; ++n) out.set_coeff(n, coeff(n));
        out.set_coeff(0, out.coeff(0) + v);
        return out;
    }

    long count_nonzero() const {
        long k = 0;
        for (const auto& c : coeffs_)
            if (c != 0) ++k;
        return k;
    }

    /**
     * Product.  With a valid on [a0, aT) and b on [b0, bT), the coefficient
     * at e is provable exactly when e < min(aT + b0, bT + a0): a term a_i b_{e-i}
     * with i >= aT would otherwise contribute unknowns.
     */
    LaurentQSeries operator*(const LaurentQSeries& o) const {
        // Loop with the sparser operand outermost: zero terms are skipped,
        // so products against lacunary series (eta-type expansions) cost
        // O(support * length) instead of O(length^2).
        const LaurentQSeries& a = (count_nonzero() <= o.count_nonzero()) ? *this : o;
        const LaurentQSeries& b = (&a == this) ? o : *this;
        long lo = a.min_exp_ + b.min_exp_;
        long hi = std::min(a.trunc_ + b.min_exp_, b.trunc_ + a.min_exp_);
        if (hi < lo) hi = lo;
        LaurentQSeries out(lo, hi);
        for (long i = a.min_exp_; i < a.trunc_; ++i) {
            const mpq_class& ai = a.coeff(i);
            if (ai == 0) continue;
            long jmax = std::min(b.trunc_, hi - i);
            for (long j = b.min_exp_; j < jmax; ++j) {
                const mpq_class& bj = b.coeff(j);
                if (bj == 0) continue;
                out.coeffs_[static_cast<size_t>(i + j - lo)] += ai * bj;
            }
        }
        return out;
    }

    /**
     * Quotient by back-substitution.  Requires the divisor's first nonzero
     * coefficient; costs O(support(divisor) * length), so dividing by a
     * lacunary series is cheap.  Window matches (*this) * o.inverse().
     */
    LaurentQSeries div(const LaurentQSeries& o) const {
        LaurentQSeries b = o.normalized();
        if (b.min_exp_ >= b.trunc_ || b.coeff(b.min_exp_) == 0)
            throw std::domain_error("LaurentQSeries::div: zero leading coefficient in divisor");
        const long b0 = b.min_exp_;
        const long len = std::min(trunc_ - min_exp_, b.trunc_ - b0);
        LaurentQSeries out(min_exp_ - b0, min_exp_ - b0 + len);
        if (len <= 0) return out;
        const mpq_class lead = b.coeff(b0);
        std::vector<long> support;
        for (long i = 1; i < b.trunc_ - b0; ++i)
            if (b.coeff(b0 + i) != 0) support.push_back(i);
        for (long k = 0; k < len; ++k) {
            mpq_class acc = coeff(min_exp_ + k);
            for (long i : support) {
                if (i > k) break;
                const mpq_class& x = out.coeffs_[static_cast<size_t>(k - i)];
                if (x != 0) acc -= b.coeff(b0 + i) * x;
            }
            out.coeffs_[static_cast<size_t>(k)] = acc / lead;
        }
        return out;
    }

    /// Multiplicative inverse; requires a nonzero coefficient at min_exp().
    LaurentQSeries inverse() const {
        if (min_exp_ >= trunc_ || coeff(min_exp_) == 0)
            throw std::domain_error("LaurentQSeries::inverse: zero leading coefficient");
        long len = trunc_ - min_exp_;
        LaurentQSeries out(-min_exp_, -min_exp_ + len);
        const mpq_class& lead = coeff(min_exp_);
        mpq_class inv_lead = 1 / lead;
        out.coeffs_[0] = inv_lead;
        // Solve sum_{i} a_{min+i} * x_{k-i} = 0 for k >= 1.
        for (long k = 1; k < len; ++k) {
            mpq_class acc(0);
            for (long i = 1; i <= k; ++i) {
                const mpq_class& a = coeffs_[static_cast<size_t>(i)];
                if (a != 0) acc += a * out.coeffs_[static_cast<size_t>(k - i)];
            }
            out.coeffs_[static_cast<size_t>(k)] = -acc * inv_lead;
        }
        return out;
    }

    /// Integer power via binary exponentiation; negative e goes through inverse().
    LaurentQSeries pow(long e) const {
        if (e < 0) return inverse().pow(-e);
        long window = trunc_ - min_exp_;
        LaurentQSeries result = constant(1, window);
        LaurentQSeries base = *this;
        // Guard the degenerate empty-window case.
        if (window <= 0) return LaurentQSeries(min_exp_ * e, min_exp_ * e);
        unsigned long ue = static_cast<unsigned long>(e);
        while (ue != 0) {
            if (ue & 1UL) result = result * base;
            ue >>= 1;
            if (ue != 0) base = base * base;
        }
        return result;
    }

    /// Equality of tracked data: identical truncation order and identical
    /// coefficients (entries below a min_exp count as zero).
    bool operator==(const LaurentQSeries& o) const {
        if (trunc_ != o.trunc_) return false;
        long lo = std::min(min_exp_, o.min_exp_);
        for (long n = lo; n < trunc_; ++n) {
            const mpq_class& a = (n >= min_exp_) ? coeff(n) : coeff(min_exp_ - 1);
            const mpq_class& b = (n >= o.min_exp_) ? o.coeff(n) : o.coeff(o.min_exp_ - 1);
            if (a != b) return false;
        }
        return true;
    }

    bool operator!=(const LaurentQSeries& o) const { return !(*this == o); }

    /// Textual serialization: a header line followed by one line per
    /// nonzero coefficient, `n numerator/denominator` in ascending n.
    void serialize(std::ostream& os) const {
        os << "qseries min_exp=" << min_exp_ << " trunc=" << trunc_ << "\n";
        for (long n = min_exp_; n < trunc_; ++n) {
            const mpq_class& c = coeff(n);
            if (c == 0) continue;
            os << n << ' ' << c.get_num().get_str() << '/' << c.get_den().get_str() << "\n";
        }
    }

    std::string serialize_str() const {
        std::ostringstream os;
        serialize(os);
        return os.str();
    }

    static LaurentQSeries deserialize(std::istream& is) {
        std::string line;
        long lineno = 0;
        if (!std::getline(is, line))
            throw std::runtime_error("qseries parse error at line 1: empty input");
        ++lineno;
        long mn = 0, tr = 0;
        if (std::sscanf(line.c_str(), "qseries min_exp=%ld trunc=%ld", &mn, &tr) != 2)
            throw std::runtime_error("qseries parse error at line 1: bad header");
        LaurentQSeries out(mn, tr);
        while (std::getline(is, line)) {
            ++lineno;
            if (line.empty()) continue;
            std::istringstream ls(line);
            long n;
            std::string frac;
            if (!(ls >> n >> frac) || frac.find('/') == std::string::npos)
                throw std::runtime_error("qseries parse error at line " + std::to_string(lineno) +
                                         ": expected `n num/den`");
            mpq_class v;
            if (v.set_str(frac, 10) != 0)
                throw std::runtime_error("qseries parse error at line " + std::to_string(lineno) +
                                         ": bad rational");
            v.canonicalize();
            if (n < mn || n >= tr)
                throw std::runtime_error("qseries parse error at line " + std::to_string(lineno) +
                                         ": exponent outside declared window");
            out.set_coeff(n, v);
        }
        return out;
    }

    static LaurentQSeries deserialize_str(const std::string& s) {
        std::istringstream is(s);
        return deserialize(is);
    }

private:
    long min_exp_;
    long trunc_;
    std::vector<mpq_class> coeffs_;
};

}  // namespace maassq
