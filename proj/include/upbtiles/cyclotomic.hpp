#pragma once

#include <gmpxx.h>

#include <cmath>
#include <complex>
#include <map>
#include <memory>
#include <mutex>
#include <numeric>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "upbtiles/errors.hpp"
#include "upbtiles/rational.hpp"

namespace upbtiles {

inline long euler_phi(long n) {
    long result = n;
    for (long p = 2; p * p <= n; ++p) {
        if (n % p == 0) {
            while (n % p == 0) n /= p;
            result -= result / p;
        }
    }
    if (n > 1) result -= result / n;
    return result;
}

namespace detail {

// Dense integer polynomial; c[i] is the coefficient of x^i.
struct IntPoly {
    std::vector<Int> c;

    long degree() const { return static_cast<long>(c.size()) - 1; }

    void trim() {
        while (!c.empty() && c.back() == 0) c.pop_back();
    }
};

// Exact division by a monic divisor; the remainder must vanish.
inline IntPoly poly_divide_exact(IntPoly num, const IntPoly& den) {
    IntPoly q;
    long dd = den.degree();
    if (dd < 0 || den.c.back() != 1) throw std::logic_error("divisor must be monic");
    if (num.degree() < dd) throw std::logic_error("inexact polynomial division");
    q.c.assign(num.degree() - dd + 1, Int(0));
    for (long k = num.degree() - dd; k >= 0; --k) {
        Int coef = num.c[k + dd];
        if (coef == 0) continue;
        q.c[k] = coef;
        for (long i = 0; i <= dd; ++i) num.c[k + i] -= coef * den.c[i];
    }
    num.trim();
    if (!num.c.empty()) throw std::logic_error("inexact polynomial division");
    return q;
}

inline IntPoly cyclotomic_polynomial(long L) {
    // Phi_L = (x^L - 1) / prod of Phi_d over proper divisors d of L.
    IntPoly num;
    num.c.assign(L + 1, Int(0));
    num.c[0] = -1;
    num.c[L] = 1;
    for (long d = 1; d < L; ++d) {
        if (L % d != 0) continue;
        num = poly_divide_exact(std::move(num), cyclotomic_polynomial(d));
    }
    return num;
}

}  // namespace detail

// The field Q(zeta_L) presented as Q[x]/Phi_L(x).  Instances are cached
// globally; references returned by get() stay valid for the process lifetime.
class CycField {
  public:
    static const CycField& get(long order) {
        if (order < 1) throw invalid_order_error("field order must be >= 1");
        static std::mutex mu;
        static std::map<long, std::unique_ptr<CycField>> cache;
        std::lock_guard<std::mutex> lock(mu);
        auto it = cache.find(order);
        if (it == cache.end())
            it = cache.emplace(order, std::unique_ptr<CycField>(new CycField(order))).first;
        return *it->second;
    }

    long order() const { return L_; }
    long degree() const { return m_; }

    // Coefficients of x^e reduced modulo Phi_L; e in [0, max(L, 2*degree-1)).
    const std::vector<Int>& power_basis(long e) const { return pow_[e]; }

    // Coefficient j of Phi_L; j ranges over [0, degree] and the top one is 1.
    const Int& phi_coeff(long j) const { return phi_.c[j]; }

    std::complex<double> unit_root(long j) const {
        j %= L_;
        if (j < 0) j += L_;
        return roots_[j];
    }

    CycField(const CycField&) = delete;
    CycField& operator=(const CycField&) = delete;

  private:
    explicit CycField(long L) : L_(L), m_(euler_phi(L)) {
        phi_ = detail::cyclotomic_polynomial(L);
        long table = std::max(L_, 2 * m_ - 1);
        pow_.resize(table);
        pow_[0].assign(m_, Int(0));
        pow_[0][0] = 1;
        for (long e = 1; e < table; ++e) {
            // Multiply the previous row by x and fold x^m back using
            // x^m = -(phi_0 + phi_1 x + ... + phi_{m-1} x^{m-1}).
            const auto& prev = pow_[e - 1];
            auto& cur = pow_[e];
            cur.assign(m_, Int(0));
            for (long j = 0; j + 1 < m_; ++j) cur[j + 1] = prev[j];
            const Int& lead = prev[m_ - 1];
            if (lead != 0)
                for (long j = 0; j < m_; ++j) cur[j] -= lead * phi_.c[j];
        }
        roots_.resize(L_);
        const double tau = 6.283185307179586476925286766559;
        for (long j = 0; j < L_; ++j)
            roots_[j] = std::polar(1.0, tau * static_cast<double>(j) / static_cast<double>(L_));
    }

    long L_, m_;
    detail::IntPoly phi_;
    std::vector<std::vector<Int>> pow_;
    std::vector<std::complex<double>> roots_;
};

// An element of Q(zeta_L), stored as phi(L) rational coordinates in the
// power basis 1, x, ..., x^{phi(L)-1}.  The representation is canonical,
// so equality and zero tests are coefficient comparisons.
class Cyc {
  public:
    Cyc() : F_(&CycField::get(1)), c_(1, Rat(0)) {}

    static Cyc zero(const CycField& F) { return Cyc(F); }

    static Cyc one(const CycField& F) {
        Cyc r(F);
        r.c_[0] = 1;
        return r;
    }

    static Cyc from_rat(const CycField& F, const Rat& v) {
        Cyc r(F);
        r.c_[0] = v;
        r.c_[0].canonicalize();
        return r;
    }

    static Cyc from_long(const CycField& F, long v) { return from_rat(F, Rat(v)); }

    // zeta_L^j for any integer j.
    static Cyc root_power(const CycField& F, long j) {
        long L = F.order();
        j %= L;
        if (j < 0) j += L;
        Cyc r(F);
        const auto& row = F.power_basis(j);
        for (long i = 0; i < F.degree(); ++i) r.c_[i] = Rat(row[i]);
        return r;
    }

    const CycField& field() const { return *F_; }
    long order() const { return F_->order(); }
    const std::vector<Rat>& coeffs() const { return c_; }

    bool is_zero() const {
        for (const auto& v : c_)
            if (v != 0) return false;
        return true;
    }

    // True when the element lies in Q; the value is written to *out if given.
    bool is_rational(Rat* out = nullptr) const {
        for (std::size_t i = 1; i < c_.size(); ++i)
            if (c_[i] != 0) return false;
        if (out) *out = c_[0];
        return true;
    }

    friend bool operator==(const Cyc& a, const Cyc& b) {
        return a.order() == b.order() && a.c_ == b.c_;
    }
    friend bool operator!=(const Cyc& a, const Cyc& b) { return !(a == b); }

    Cyc operator-() const {
        Cyc r(*F_);
        for (std::size_t i = 0; i < c_.size(); ++i) r.c_[i] = -c_[i];
        return r;
    }

    friend Cyc operator+(const Cyc& a, const Cyc& b) {
        a.require_same_field(b);
        Cyc r(*a.F_);
        for (std::size_t i = 0; i < a.c_.size(); ++i) r.c_[i] = a.c_[i] + b.c_[i];
        return r;
    }

    friend Cyc operator-(const Cyc& a, const Cyc& b) {
        a.require_same_field(b);
        Cyc r(*a.F_);
        for (std::size_t i = 0; i < a.c_.size(); ++i) r.c_[i] = a.c_[i] - b.c_[i];
        return r;
    }

    friend Cyc operator*(const Cyc& a, const Cyc& b) {
        a.require_same_field(b);
        long m = a.F_->degree();
        std::vector<Rat> conv(2 * m - 1, Rat(0));
        for (long i = 0; i < m; ++i) {
            if (a.c_[i] == 0) continue;
            for (long j = 0; j < m; ++j) {
                if (b.c_[j] == 0) continue;
                conv[i + j] += a.c_[i] * b.c_[j];
            }
        }
        Cyc r(*a.F_);
        for (long e = 0; e < m; ++e) r.c_[e] = conv[e];
        for (long e = m; e < 2 * m - 1; ++e) {
            if (conv[e] == 0) continue;
            const auto& row = a.F_->power_basis(e);
            for (long j = 0; j < m; ++j)
                if (row[j] != 0) r.c_[j] += conv[e] * row[j];
        }
        return r;
    }

    friend Cyc operator*(const Rat& s, const Cyc& a) {
        Cyc r(*a.F_);
        for (std::size_t i = 0; i < a.c_.size(); ++i) r.c_[i] = s * a.c_[i];
        return r;
    }
    friend Cyc operator*(const Cyc& a, const Rat& s) { return s * a; }

    Cyc& operator+=(const Cyc& b) { return *this = *this + b; }
    Cyc& operator-=(const Cyc& b) { return *this = *this - b; }
    Cyc& operator*=(const Cyc& b) { return *this = *this * b; }

    // Complex conjugation, the field automorphism zeta -> zeta^{-1}.
    Cyc conj() const {
        long L = F_->order(), m = F_->degree();
        Cyc r(*F_);
        for (long j = 0; j < m; ++j) {
            if (c_[j] == 0) continue;
            const auto& row = F_->power_basis((L - j) % L);
            for (long i = 0; i < m; ++i)
                if (row[i] != 0) r.c_[i] += c_[j] * Rat(row[i]);
        }
        return r;
    }

    Cyc inverse() const {
        if (is_zero()) throw degenerate_input_error("inverse of zero");
        long m = F_->degree();
        // Extended Euclid in Q[x] against Phi_L: find u with u*this = gcd.
        std::vector<Rat> r0(m + 1, Rat(0)), r1(c_.begin(), c_.end());
        for (long j = 0; j < m; ++j) r0[j] = Rat(F_->phi_coeff(j));
        r0[m] = 1;
        ptrim(r1);
        std::vector<Rat> u0{Rat(0)}, u1{Rat(1)};
        while (!r1.empty() && static_cast<long>(r1.size()) > 1) {
            auto [q, rem] = pdivmod(r0, r1);
            r0 = std::move(r1);
            r1 = std::move(rem);
            auto nu = psub(u0, pmul(q, u1));
            u0 = std::move(u1);
            u1 = std::move(nu);
        }
        if (r1.empty()) throw std::logic_error("noninvertible cyclotomic element");
        Rat g = r1[0];
        Cyc out(*F_);
        for (std::size_t i = 0; i < u1.size() && i < static_cast<std::size_t>(m); ++i)
            out.c_[i] = u1[i] / g;
        return out;
    }

    friend Cyc operator/(const Cyc& a, const Cyc& b) { return a * b.inverse(); }

    Cyc pow(long e) const {
        if (e < 0) return inverse().pow(-e);
        Cyc base = *this, acc = Cyc::one(*F_);
        while (e > 0) {
            if (e & 1) acc *= base;
            base *= base;
            e >>= 1;
        }
        return acc;
    }

    // Image under Q(zeta_L) -> Q(zeta_M) for L | M.
    Cyc promote(const CycField& target) const {
        long L = F_->order(), M = target.order();
        if (M % L != 0)
            throw invalid_order_error("cannot promote order " + std::to_string(L) +
                                      " into order " + std::to_string(M));
        if (M == L) return *this;
        long k = M / L;
        Cyc r(target);
        for (long j = 0; j < F_->degree(); ++j) {
            if (c_[j] == 0) continue;
            const auto& row = target.power_basis(j * k);
            for (long i = 0; i < target.degree(); ++i)
                if (row[i] != 0) r.c_[i] += c_[j] * Rat(row[i]);
        }
        return r;
    }

    std::complex<double> to_complex() const {
        std::complex<double> acc(0.0, 0.0);
        for (long j = 0; j < F_->degree(); ++j) {
            if (c_[j] == 0) continue;
            acc += c_[j].get_d() * F_->unit_root(j);
        }
        return acc;
    }

    std::string to_string() const {
        std::ostringstream os;
        os << "[";
        for (std::size_t i = 0; i < c_.size(); ++i) {
            if (i) os << ",";
            os << rat_to_string(c_[i]);
        }
        os << "]@" << F_->order();
        return os.str();
    }

  private:
    explicit Cyc(const CycField& F) : F_(&F), c_(F.degree(), Rat(0)) {}

    void require_same_field(const Cyc& b) const {
        if (F_ != b.F_)
            throw dimension_mismatch_error("cyclotomic operands from different orders: " +
                                           std::to_string(order()) + " vs " +
                                           std::to_string(b.order()));
    }

    static void ptrim(std::vector<Rat>& p) {
        while (!p.empty() && p.back() == 0) p.pop_back();
    }

    static std::vector<Rat> pmul(const std::vector<Rat>& a, const std::vector<Rat>& b) {
        if (a.empty() || b.empty()) return {};
        std::vector<Rat> r(a.size() + b.size() - 1, Rat(0));
        for (std::size_t i = 0; i < a.size(); ++i) {
            if (a[i] == 0) continue;
            for (std::size_t j = 0; j < b.size(); ++j) r[i + j] += a[i] * b[j];
        }
        ptrim(r);
        return r;
    }

    static std::vector<Rat> psub(const std::vector<Rat>& a, const std::vector<Rat>& b) {
        std::vector<Rat> r = a;
        if (b.size() > r.size()) r.resize(b.size(), Rat(0));
        for (std::size_t i = 0; i < b.size(); ++i) r[i] -= b[i];
        ptrim(r);
        return r;
    }

    static std::pair<std::vector<Rat>, std::vector<Rat>> pdivmod(std::vector<Rat> num,
                                                                 const std::vector<Rat>& den) {
        std::vector<Rat> q;
        if (den.empty()) throw std::logic_error("polynomial division by zero");
        if (num.size() < den.size()) return {q, std::move(num)};
        q.assign(num.size() - den.size() + 1, Rat(0));
        const Rat& lead = den.back();
        for (long k = static_cast<long>(q.size()) - 1; k >= 0; --k) {
            Rat coef = num[k + den.size() - 1] / lead;
            if (coef == 0) continue;
            q[k] = coef;
            for (std::size_t i = 0; i < den.size(); ++i) num[k + i] -= coef * den[i];
        }
        ptrim(num);
        return {std::move(q), std::move(num)};
    }

    const CycField* F_;
    std::vector<Rat> c_;

    friend class CycField;
};

// zeta_n^k viewed inside F; requires n | order(F).
inline Cyc embed_root(long n, long k, const CycField& F) {
    if (n < 1) throw invalid_order_error("root order must be >= 1");
    if (F.order() % n != 0)
        throw invalid_order_error("order " + std::to_string(n) + " does not divide field order " +
                                  std::to_string(F.order()));
    long j = k % n;
    if (j < 0) j += n;
    return Cyc::root_power(F, j * (F.order() / n));
}

}  // namespace upbtiles
