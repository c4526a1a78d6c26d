#pragma once

#include "sle/scalar.hpp"

#include <cstdint>
#include <map>
#include <ostream>
#include <string>
#include <vector>

namespace sle {

// Exponent vector over a fixed, numbered set of variables.
using PolyMono = std::vector<std::uint8_t>;

// Multivariate polynomial with Gaussian-rational coefficients. Variables are
// plain indices; naming and weights live in the caller (see SymVars).
class Poly {
public:
    Poly() = default;
    Poly(int c) { if (c != 0) t_[{}] = GaussQ(c); }
    Poly(const GaussQ& c) { if (!c.is_zero()) t_[{}] = c; }

    static Poly var(int i)
    {
        PolyMono m(static_cast<std::size_t>(i) + 1, 0);
        m[static_cast<std::size_t>(i)] = 1;
        Poly p;
        p.t_[m] = GaussQ(1);
        return p;
    }

    const std::map<PolyMono, GaussQ>& terms() const { return t_; }
    bool is_zero() const { return t_.empty(); }
    bool is_constant() const { return t_.empty() || (t_.size() == 1 && t_.begin()->first.empty()); }
    GaussQ constant() const
    {
        auto it = t_.find({});
        return it == t_.end() ? GaussQ(0) : it->second;
    }

    Poly& operator+=(const Poly& o)
    {
        for (const auto& [m, c] : o.t_) add(m, c);
        return *this;
    }
    Poly& operator-=(const Poly& o)
    {
        for (const auto& [m, c] : o.t_) add(m, -c);
        return *this;
    }
    Poly& operator*=(const GaussQ& s)
    {
        if (s.is_zero()) {
            t_.clear();
            return *this;
        }
        for (auto& [m, c] : t_) c *= s;
        return *this;
    }
    friend Poly operator+(Poly a, const Poly& b) { return a += b; }
    friend Poly operator-(Poly a, const Poly& b) { return a -= b; }
    friend Poly operator-(Poly a)
    {
        for (auto& [m, c] : a.t_) c = -c;
        return a;
    }
    friend Poly operator*(const Poly& a, const Poly& b)
    {
        Poly r;
        if (a.is_zero() || b.is_zero()) return r;
        if (a.is_constant()) return r = b, r *= a.constant(), r;
        if (b.is_constant()) return r = a, r *= b.constant(), r;
        for (const auto& [ma, ca] : a.t_)
            for (const auto& [mb, cb] : b.t_) r.add(mul_mono(ma, mb), ca * cb);
        return r;
    }
    Poly& operator*=(const Poly& o) { return *this = *this * o; }
    // only by nonzero constants
    friend Poly operator/(Poly a, const Poly& b)
    {
        if (!b.is_constant() || b.is_zero()) throw std::domain_error("Poly: division by a non-constant");
        a *= GaussQ(1) / b.constant();
        return a;
    }
    friend bool operator==(const Poly& a, const Poly& b) { return a.t_ == b.t_; }
    friend bool operator!=(const Poly& a, const Poly& b) { return !(a == b); }

    Poly derivative(int i) const
    {
        Poly r;
        auto k = static_cast<std::size_t>(i);
        for (const auto& [m, c] : t_) {
            if (k >= m.size() || m[k] == 0) continue;
            PolyMono n = m;
            GaussQ f = c * GaussQ(static_cast<int>(n[k]));
            --n[k];
            trim(n);
            r.add(n, f);
        }
        return r;
    }

    int max_var() const
    {
        int v = -1;
        for (const auto& [m, c] : t_) v = std::max(v, static_cast<int>(m.size()) - 1);
        return v;
    }

    // sum of exponents weighted by w[i]
    template <class W>
    int max_weight(const W& w) const
    {
        int best = -1;
        for (const auto& [m, c] : t_) {
            int s = 0;
            for (std::size_t i = 0; i < m.size(); ++i) s += m[i] * w(static_cast<int>(i));
            best = std::max(best, s);
        }
        return best;
    }

    template <class F>
    Complex evaluate(const F& value_of) const
    {
        Complex acc(0.0);
        for (const auto& [m, c] : t_) {
            Complex term = c.to_complex();
            for (std::size_t i = 0; i < m.size(); ++i)
                for (int e = 0; e < m[i]; ++e) term *= value_of(static_cast<int>(i));
            acc += term;
        }
        return acc;
    }

    void add(const PolyMono& m, const GaussQ& c)
    {
        if (c.is_zero()) return;
        auto [it, fresh] = t_.try_emplace(m, c);
        if (!fresh) {
            it->second += c;
            if (it->second.is_zero()) t_.erase(it);
        }
    }

private:
    static void trim(PolyMono& m)
    {
        while (!m.empty() && m.back() == 0) m.pop_back();
    }
    static PolyMono mul_mono(const PolyMono& a, const PolyMono& b)
    {
        PolyMono r(std::max(a.size(), b.size()), 0);
        for (std::size_t i = 0; i < a.size(); ++i) r[i] = a[i];
        for (std::size_t i = 0; i < b.size(); ++i) {
            if (int(r[i]) + b[i] > 255) throw std::overflow_error("Poly: exponent overflow");
            r[i] = static_cast<std::uint8_t>(r[i] + b[i]);
        }
        return r;
    }

    std::map<PolyMono, GaussQ> t_;
};

inline std::ostream& operator<<(std::ostream& os, const Poly& p)
{
    if (p.is_zero()) return os << "0";
    bool first = true;
    for (const auto& [m, c] : p.terms()) {
        if (!first) os << " + ";
        first = false;
        os << c;
        for (std::size_t i = 0; i < m.size(); ++i)
            if (m[i]) os << "*v" << i << (m[i] > 1 ? "^" + std::to_string(m[i]) : "");
    }
    return os;
}

template <>
struct Ring<Poly> {
    static Poly zero() { return Poly(); }
    static Poly one() { return Poly(1); }
    static Poly from_int(long long n) { return Poly(GaussQ(n)); }
    static bool is_zero(const Poly& p) { return p.is_zero(); }
    static Poly inverse(const Poly& p)
    {
        if (!p.is_constant() || p.is_zero()) throw std::domain_error("Poly: inverse of a non-constant");
        return Poly(GaussQ(1) / p.constant());
    }
    static Poly div_int(const Poly& p, long long n) { return p / Poly(GaussQ(n)); }
};

} // namespace sle
