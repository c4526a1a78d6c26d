#pragma once

#include "sle/scalar.hpp"

#include <algorithm>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace sle {

struct TruncationInsufficient : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct SingularSeries : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct DomainError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class Var : char { z, zeta, w, x };

inline const char* var_name(Var v)
{
    switch (v) {
    case Var::z: return "z";
    case Var::zeta: return "zeta";
    case Var::w: return "w";
    case Var::x: return "x";
    }
    return "?";
}

// descending: Laurent series at infinity, exact for exponents >= lo, zero above hi.
// ascending: power series at zero, exact for exponents <= hi, zero below lo.
enum class Order : char { descending, ascending };

// Sentinel for "exact on every exponent" (finite Laurent polynomials).
inline constexpr int kExact = 1 << 26;

template <class S>
class Series {
public:
    using Scalar = S;

    Series() : Series(Var::z, -kExact) {}

    // Zero series, exact for exponents >= prec (descending) or <= prec
    // (ascending).
    explicit Series(Var v, int prec, Order o = Order::descending) : var_(v), ord_(o), prec_(prec), lo_(0), hi_(-1) {}

    static Series zero(Var v, int prec, Order o = Order::descending) { return Series(v, prec, o); }

    static Series monomial(Var v, const S& c, int n, int prec, Order o = Order::descending)
    {
        Series s(v, prec, o);
        if (s.known(n)) s.set(n, c);
        return s;
    }

    static Series identity(Var v, int prec, Order o = Order::descending)
    {
        return monomial(v, Ring<S>::one(), 1, prec, o);
    }

    static Series constant(Var v, const S& c, int prec, Order o = Order::descending)
    {
        return monomial(v, c, 0, prec, o);
    }

    // Exact Laurent polynomial (no truncation) in the given direction.
    static Series polynomial(Var v, const std::map<int, S>& terms, Order o = Order::descending)
    {
        Series s(v, o == Order::descending ? -kExact : kExact, o);
        for (const auto& [n, c] : terms) s.set(n, c);
        return s;
    }

    Var var() const { return var_; }
    Order order() const { return ord_; }
    bool descending() const { return ord_ == Order::descending; }
    // stored range; everything outside it but inside the exact window is zero
    int lo() const { return lo_; }
    int hi() const { return hi_; }
    bool empty() const { return hi_ < lo_; }
    int prec() const { return prec_; }

    bool known(int n) const { return descending() ? n >= prec_ : n <= prec_; }

    S coeff(int n) const
    {
        if (!known(n)) {
            std::ostringstream os;
            os << "coefficient of " << var_name(var_) << "^" << n << " lies outside the exact window ("
               << (descending() ? ">= " : "<= ") << prec_ << ")";
            throw TruncationInsufficient(os.str());
        }
        if (n < lo_ || n > hi_) return Ring<S>::zero();
        return c_[static_cast<std::size_t>(n - lo_)];
    }

    S operator[](int n) const { return coeff(n); }

    void set(int n, const S& v)
    {
        if (!known(n)) throw TruncationInsufficient("set: exponent outside exact window");
        if (empty()) {
            lo_ = hi_ = n;
            c_.assign(1, v);
            return;
        }
        if (n > hi_) {
            c_.resize(static_cast<std::size_t>(n - lo_ + 1), Ring<S>::zero());
            hi_ = n;
        } else if (n < lo_) {
            c_.insert(c_.begin(), static_cast<std::size_t>(lo_ - n), Ring<S>::zero());
            lo_ = n;
        }
        c_[static_cast<std::size_t>(n - lo_)] = v;
    }

    void add_to(int n, const S& v)
    {
        if (!known(n)) return;
        if (n >= lo_ && n <= hi_)
            c_[static_cast<std::size_t>(n - lo_)] += v;
        else
            set(n, v);
    }

    // Drops zero coefficients at both ends of the stored range.
    Series& trim()
    {
        while (!empty() && Ring<S>::is_zero(c_.back())) {
            c_.pop_back();
            --hi_;
        }
        std::size_t k = 0;
        while (k < c_.size() && Ring<S>::is_zero(c_[k])) ++k;
        if (k == c_.size()) {
            c_.clear();
            lo_ = 0;
            hi_ = -1;
        } else if (k > 0) {
            c_.erase(c_.begin(), c_.begin() + static_cast<std::ptrdiff_t>(k));
            lo_ += static_cast<int>(k);
        }
        return *this;
    }

    bool is_zero() const
    {
        return std::all_of(c_.begin(), c_.end(), [](const S& s) { return Ring<S>::is_zero(s); });
    }

    // Highest (descending) / lowest (ascending) exponent with a nonzero
    // coefficient; throws on the zero series.
    int lead_exponent() const
    {
        Series t = *this;
        t.trim();
        if (t.empty()) throw SingularSeries("series has no nonzero retained coefficient");
        return t.descending() ? t.hi_ : t.lo_;
    }

    // Coarsens the exact window. Refining is impossible and throws.
    Series truncated(int new_prec) const
    {
        if (descending() ? new_prec < prec_ : new_prec > prec_)
            throw TruncationInsufficient("truncated: cannot extend exact window");
        Series r(var_, new_prec, ord_);
        for (int n = lo_; n <= hi_; ++n)
            if (r.known(n)) {
                const S& c = c_[static_cast<std::size_t>(n - lo_)];
                if (!Ring<S>::is_zero(c)) r.set(n, c);
            }
        return r;
    }

    // Same coefficients in another variable (z -> zeta when rho drives the
    // internal processes).
    Series relabeled(Var v) const
    {
        Series r = *this;
        r.var_ = v;
        return r;
    }

    Series mirrored() const
    {
        Series r(var_, -prec_, descending() ? Order::ascending : Order::descending);
        r.lo_ = -hi_;
        r.hi_ = -lo_;
        r.c_.assign(c_.rbegin(), c_.rend());
        if (empty()) {
            r.lo_ = 0;
            r.hi_ = -1;
        }
        return r;
    }

    Series& operator*=(const S& s)
    {
        for (auto& c : c_) c *= s;
        return *this;
    }

    Series operator-() const
    {
        Series r = *this;
        for (auto& c : r.c_) c = Ring<S>::zero() - c;
        return r;
    }

    friend Series operator*(Series a, const S& s) { return a *= s; }
    friend Series operator*(const S& s, Series a) { return a *= s; }

    friend Series operator+(const Series& a, const Series& b) { return combine(a, b, false); }
    friend Series operator-(const Series& a, const Series& b) { return combine(a, b, true); }
    Series& operator+=(const Series& b) { return *this = *this + b; }
    Series& operator-=(const Series& b) { return *this = *this - b; }

    friend Series operator*(const Series& a, const Series& b) { return multiply(a, b); }
    Series& operator*=(const Series& b) { return *this = multiply(*this, b); }

    const std::vector<S>& data() const { return c_; }

private:
    static void check_compatible(const Series& a, const Series& b)
    {
        if (a.var_ != b.var_) throw std::invalid_argument("series in different variables");
        if (a.ord_ != b.ord_) throw std::invalid_argument("series with different expansion directions");
    }

    static Series combine(const Series& a, const Series& b, bool subtract)
    {
        check_compatible(a, b);
        int prec = a.descending() ? std::max(a.prec_, b.prec_) : std::min(a.prec_, b.prec_);
        Series r(a.var_, prec, a.ord_);
        if (a.empty() && b.empty()) return r;
        int lo = a.empty() ? b.lo_ : b.empty() ? a.lo_ : std::min(a.lo_, b.lo_);
        int hi = a.empty() ? b.hi_ : b.empty() ? a.hi_ : std::max(a.hi_, b.hi_);
        if (a.descending())
            lo = std::max(lo, prec);
        else
            hi = std::min(hi, prec);
        if (hi < lo) return r;
        r.lo_ = lo;
        r.hi_ = hi;
        r.c_.assign(static_cast<std::size_t>(hi - lo + 1), Ring<S>::zero());
        for (int n = lo; n <= hi; ++n) {
            S& v = r.c_[static_cast<std::size_t>(n - lo)];
            if (n >= a.lo_ && n <= a.hi_) v = a.c_[static_cast<std::size_t>(n - a.lo_)];
            if (n >= b.lo_ && n <= b.hi_) {
                if (subtract)
                    v -= b.c_[static_cast<std::size_t>(n - b.lo_)];
                else
                    v += b.c_[static_cast<std::size_t>(n - b.lo_)];
            }
        }
        return r;
    }

    static Series multiply(const Series& a0, const Series& b0)
    {
        check_compatible(a0, b0);
        if (!a0.descending()) return multiply(a0.mirrored(), b0.mirrored()).mirrored();
        Series a = a0, b = b0;
        a.trim();
        b.trim();
        // top of a zero series counts as prec - 1: its unknown part starts there
        long ta = a.empty() ? long(a.prec_) - 1 : a.hi_;
        long tb = b.empty() ? long(b.prec_) - 1 : b.hi_;
        long p = std::max(ta + b.prec_, tb + a.prec_);
        int prec = static_cast<int>(std::clamp(p, long(-kExact), long(kExact)));
        Series r(a.var_, prec, a.ord_);
        if (a.empty() || b.empty()) return r;
        int top = a.hi_ + b.hi_;
        int bot = std::max(a.lo_ + b.lo_, prec);
        if (top < bot) return r;
        r.lo_ = bot;
        r.hi_ = top;
        r.c_.assign(static_cast<std::size_t>(top - bot + 1), Ring<S>::zero());
        for (int i = a.lo_; i <= a.hi_; ++i) {
            const S& ai = a.c_[static_cast<std::size_t>(i - a.lo_)];
            if (Ring<S>::is_zero(ai)) continue;
            int jlo = std::max(b.lo_, bot - i);
            for (int j = jlo; j <= b.hi_; ++j) {
                const S& bj = b.c_[static_cast<std::size_t>(j - b.lo_)];
                if (Ring<S>::is_zero(bj)) continue;
                r.c_[static_cast<std::size_t>(i + j - bot)] += ai * bj;
            }
        }
        return r;
    }

    Var var_;
    Order ord_;
    int prec_;
    int lo_, hi_;
    std::vector<S> c_;
};

template <class S>
Series<S> mul_inverse(const Series<S>& f0)
{
    if (!f0.descending()) return mul_inverse(f0.mirrored()).mirrored();
    Series<S> f = f0;
    f.trim();
    if (f.empty()) throw SingularSeries("mul_inverse: zero series");
    int t = f.hi();
    S inv_a = Ring<S>::inverse(f.coeff(t));
    // f = a z^t (1 + u) with u exact down to prec - t
    long p = long(f.prec()) - 2L * t;
    int prec = static_cast<int>(std::max(p, long(-kExact)));
    Series<S> r(f.var(), prec, f.order());
    r.set(-t, inv_a);
    if (prec == -kExact) {
        if (f.lo() == t) return r; // exact monomial
        throw TruncationInsufficient("mul_inverse of an exact non-monomial needs a finite window");
    }
    int depth = t - f.prec();
    for (int m = 1; m <= depth; ++m) {
        S acc = Ring<S>::zero();
        for (int j = 1; j <= m && t - j >= f.lo(); ++j) acc += f.coeff(t - j) * r.coeff(-t - m + j);
        if (!Ring<S>::is_zero(acc)) r.set(-t - m, Ring<S>::zero() - acc * inv_a);
    }
    return r;
}

// Caps the exact window of a polynomial-like series so iterative algorithms
// terminate; no-op if already finite.
template <class S>
Series<S> with_window(const Series<S>& f, int prec)
{
    if (f.descending() ? prec <= f.prec() : prec >= f.prec()) return f;
    return f.truncated(prec);
}

template <class S>
Series<S> derivative(const Series<S>& f)
{
    int prec = std::abs(f.prec()) >= kExact ? f.prec() : f.prec() - 1;
    Series<S> r(f.var(), prec, f.order());
    for (int n = f.lo(); n <= f.hi(); ++n)
        if (n != 0) {
            S c = f.coeff(n);
            if (!Ring<S>::is_zero(c)) r.set(n - 1, c * Ring<S>::from_int(n));
        }
    return r;
}

// exp of a series with only strictly negative (descending) or strictly
// positive (ascending) exponents.
template <class S>
Series<S> exp_series(const Series<S>& f0)
{
    if (!f0.descending()) return exp_series(f0.mirrored()).mirrored();
    Series<S> f = f0;
    f.trim();
    if (!f.empty() && f.hi() >= 0) throw DomainError("exp_series: nonnegative exponent present");
    if (f.prec() <= -kExact && !f.empty()) throw TruncationInsufficient("exp_series needs a finite window");
    Series<S> r(f.var(), f.prec(), f.order());
    r.set(0, Ring<S>::one());
    if (f.empty()) return r;
    int depth = -f.prec();
    for (int n = 1; n <= depth; ++n) {
        S acc = Ring<S>::zero();
        for (int m = 1; m <= n; ++m) {
            if (-m < f.lo() || -m > f.hi()) continue;
            S a = f.coeff(-m);
            if (Ring<S>::is_zero(a)) continue;
            acc += a * Ring<S>::from_int(m) * r.coeff(-(n - m));
        }
        if (!Ring<S>::is_zero(acc)) r.set(-n, Ring<S>::div_int(acc, n));
    }
    return r;
}

// log of a series 1 + (strictly negative exponents).
template <class S>
Series<S> log_series(const Series<S>& f0)
{
    if (!f0.descending()) return log_series(f0.mirrored()).mirrored();
    Series<S> f = f0;
    f.trim();
    if (f.empty() || f.hi() != 0 || f.coeff(0) != Ring<S>::one())
        throw DomainError("log_series: series must be 1 + lower terms");
    if (f.prec() <= -kExact && f.lo() < 0) throw TruncationInsufficient("log_series needs a finite window");
    Series<S> r(f.var(), f.prec(), f.order());
    int depth = -f.prec();
    if (f.prec() <= -kExact) return r;
    for (int n = 1; n <= depth; ++n) {
        S acc = Ring<S>::zero();
        for (int m = 1; m < n; ++m) acc += Ring<S>::from_int(m) * r.coeff(-m) * f.coeff(-(n - m));
        S v = f.coeff(-n) - Ring<S>::div_int(acc, n);
        if (!Ring<S>::is_zero(v)) r.set(-n, v);
    }
    return r;
}

template <class S>
Series<S> pow_int(const Series<S>& f, int n)
{
    if (n < 0) return pow_int(mul_inverse(f), -n);
    Series<S> r = Series<S>::constant(f.var(), Ring<S>::one(), f.descending() ? -kExact : kExact, f.order());
    for (int k = 0; k < n; ++k) r = r * f;
    return r;
}

namespace detail {
template <class S>
void require_aut(const Series<S>& g)
{
    Series<S> t = g;
    t.trim();
    if (t.empty()) throw DomainError("expected an automorphism, got the zero series");
    if (g.descending()) {
        if (t.hi() != 1 || t.coeff(1) != Ring<S>::one())
            throw DomainError("expected z + b0 + b_{-1} z^-1 + ... with unit leading coefficient");
    } else {
        if (t.lo() != 1) throw DomainError("expected v0 w + ... with v0 != 0");
    }
}
} // namespace detail

// f(g(z)). Descending: g = z + b0 + ...; ascending: g = v0 w + ....
template <class S>
Series<S> compose(const Series<S>& f0, const Series<S>& g)
{
    if (f0.order() != g.order()) throw std::invalid_argument("compose: mixed expansion directions");
    detail::require_aut(g);
    Series<S> f = f0;
    f.trim();
    bool desc = g.descending();
    Series<S> acc(g.var(), desc ? -kExact : kExact, g.order());
    if (!f.empty()) {
        int npos = std::max(f.hi(), 0), nneg = std::min(f.lo(), 0);
        Series<S> p = Series<S>::constant(g.var(), Ring<S>::one(), desc ? -kExact : kExact, g.order());
        for (int n = 0; n <= npos; ++n) {
            if (n >= f.lo() && n <= f.hi() && !Ring<S>::is_zero(f.coeff(n))) acc = acc + p * f.coeff(n);
            if (n < npos) p = p * g;
        }
        if (nneg < 0) {
            Series<S> ginv = mul_inverse(g);
            Series<S> q = ginv;
            for (int n = -1; n >= nneg; --n) {
                if (n >= f.lo() && n <= f.hi() && !Ring<S>::is_zero(f.coeff(n))) acc = acc + q * f.coeff(n);
                if (n > nneg) q = q * ginv;
            }
        }
    }
    // unknown coefficients of f land in the same exponent range they came from
    int prec = desc ? std::max(acc.prec(), f.prec()) : std::min(acc.prec(), f.prec());
    if (desc ? prec > std::max(f.hi(), f.prec()) : prec < std::min(f.lo(), f.prec()))
        throw TruncationInsufficient("compose: result would need coefficients beyond the window of f");
    return acc.truncated(prec);
}

// h with f(h) = id to the window of f.
template <class S>
Series<S> comp_inverse(const Series<S>& f)
{
    detail::require_aut(f);
    S lead = f.coeff(1);
    S inv_lead = Ring<S>::inverse(lead);
    Series<S> id = Series<S>::identity(f.var(), f.prec(), f.order());
    Series<S> rest = f - id * lead;
    Series<S> h = id * inv_lead;
    if (rest.is_zero()) return h;
    if (std::abs(f.prec()) >= kExact) throw TruncationInsufficient("comp_inverse needs a finite window");
    int iters = std::abs(f.prec() - 1) + 2;
    for (int k = 0; k < iters; ++k) {
        Series<S> next = (id - compose(rest, h)) * inv_lead;
        h = next.truncated(f.prec());
    }
    return h;
}

template <class S>
Series<S> schwarzian(const Series<S>& f)
{
    Series<S> d1 = derivative(f), d2 = derivative(d1), d3 = derivative(d2);
    Series<S> inv = mul_inverse(d1);
    Series<S> r = d2 * inv;
    return d3 * inv - r * r * Ring<S>::div_int(Ring<S>::from_int(3), 2);
}

template <class S>
S residue(const Series<S>& f)
{
    return f.coeff(-1);
}

template <class S>
Complex evaluate(const Series<S>& f, Complex z)
{
    Complex acc = 0.0;
    for (int n = f.hi(); n >= f.lo(); --n) acc += ScalarTraits<S>::to_complex(f.coeff(n)) * std::pow(z, n);
    return acc;
}

// Coefficients v_k of rho = exp(sum_k v_k x^{k+1} d/dx) v0^{x d/dx} x.
// Ascending (rho at 0): k = 1, 2, ...; descending (rho at infinity): k = -1, -2, ....
template <class S>
struct VCoeffs {
    S v0;
    std::map<int, S> v;
};

namespace detail {
// exp(V) x for the vector field V = vf(x) d/dx, to the given window.
template <class S>
Series<S> flow_of(const Series<S>& vf, int prec)
{
    Series<S> id = Series<S>::identity(vf.var(), prec, vf.order());
    Series<S> total = id, term = id;
    for (int m = 1; m < 4096; ++m) {
        term = (vf * derivative(term)).truncated(prec) * Ring<S>::div_int(Ring<S>::one(), m);
        term.trim();
        if (term.empty()) break;
        total = total + term;
    }
    return total.truncated(prec);
}
} // namespace detail

template <class S>
VCoeffs<S> v_extract(const Series<S>& rho)
{
    if (std::abs(rho.prec()) >= kExact) throw TruncationInsufficient("v_extract needs a finite window");
    VCoeffs<S> out;
    bool desc = rho.descending();
    out.v0 = rho.coeff(1);
    if (Ring<S>::is_zero(out.v0)) throw SingularSeries("v_extract: rho'(0) = 0");
    if (desc && rho.lead_exponent() != 1) throw DomainError("v_extract: expected z + lower order terms");
    if (!desc && rho.lead_exponent() != 1) throw DomainError("v_extract: expected v0 w + higher order terms");
    Series<S> sigma = rho * Ring<S>::inverse(out.v0);
    int prec = rho.prec();
    Series<S> vf(rho.var(), prec, rho.order());
    int step = desc ? -1 : 1;
    for (int k = step; desc ? k + 1 >= prec : k + 1 <= prec; k += step) {
        Series<S> cur = detail::flow_of(vf, prec);
        S delta = sigma.coeff(k + 1) - cur.coeff(k + 1);
        out.v[k] = delta;
        if (!Ring<S>::is_zero(delta)) vf.set(k + 1, delta);
    }
    return out;
}

template <class S>
Series<S> v_reconstruct(const VCoeffs<S>& vc, Var var, int prec, Order ord)
{
    Series<S> vf(var, prec, ord);
    for (const auto& [k, val] : vc.v)
        if (vf.known(k + 1) && !Ring<S>::is_zero(val)) vf.set(k + 1, val);
    return detail::flow_of(vf, prec) * vc.v0;
}

enum class Region : char { w_outer, z_outer }; // |w| > |z|  or  |z| > |w|

inline const char* region_name(Region r) { return r == Region::w_outer ? "|w|>|z|" : "|z|>|w|"; }

// Two-variable series sum c_{a,b} w^a z^b, exact on the box
// [a_lo, a_hi] x [b_lo, b_hi], produced by one specific geometric expansion.
template <class S>
class BiSeries {
public:
    BiSeries(Region r, int a_lo, int a_hi, int b_lo, int b_hi)
        : region_(r), a_lo_(a_lo), a_hi_(a_hi), b_lo_(b_lo), b_hi_(b_hi),
          c_(static_cast<std::size_t>((a_hi - a_lo + 1) * (b_hi - b_lo + 1)), Ring<S>::zero())
    {
    }

    Region region() const { return region_; }
    int a_lo() const { return a_lo_; }
    int a_hi() const { return a_hi_; }
    int b_lo() const { return b_lo_; }
    int b_hi() const { return b_hi_; }
    bool in_box(int a, int b) const { return a >= a_lo_ && a <= a_hi_ && b >= b_lo_ && b <= b_hi_; }

    const S& coeff(int a, int b) const
    {
        if (!in_box(a, b)) throw TruncationInsufficient("BiSeries: coefficient outside exact box");
        return c_[idx(a, b)];
    }
    S& ref(int a, int b)
    {
        if (!in_box(a, b)) throw TruncationInsufficient("BiSeries: coefficient outside exact box");
        return c_[idx(a, b)];
    }

    friend BiSeries operator-(const BiSeries& x, const BiSeries& y)
    {
        // Subtracting expansions from different regions is the formal delta;
        // the result carries no single region, so it is returned as a plain
        // coefficient grid tagged with the left operand's region.
        if (x.a_lo_ != y.a_lo_ || x.a_hi_ != y.a_hi_ || x.b_lo_ != y.b_lo_ || x.b_hi_ != y.b_hi_)
            throw std::invalid_argument("BiSeries: box mismatch");
        BiSeries r = x;
        for (std::size_t i = 0; i < r.c_.size(); ++i) r.c_[i] -= y.c_[i];
        return r;
    }

    friend BiSeries operator+(const BiSeries& x, const BiSeries& y)
    {
        if (x.region_ != y.region_) throw std::invalid_argument("BiSeries: mixing expansion regions");
        if (x.a_lo_ != y.a_lo_ || x.a_hi_ != y.a_hi_ || x.b_lo_ != y.b_lo_ || x.b_hi_ != y.b_hi_)
            throw std::invalid_argument("BiSeries: box mismatch");
        BiSeries r = x;
        for (std::size_t i = 0; i < r.c_.size(); ++i) r.c_[i] += y.c_[i];
        return r;
    }

private:
    std::size_t idx(int a, int b) const
    {
        return static_cast<std::size_t>((a - a_lo_) * (b_hi_ - b_lo_ + 1) + (b - b_lo_));
    }

    Region region_;
    int a_lo_, a_hi_, b_lo_, b_hi_;
    std::vector<S> c_;
};

enum class KernelKind : char { g_minus_g, g_minus_z };

// K(w, z) = (w - z)/(g(w) - g(z)), a series in w^-1 and z^-1 that does not
// depend on the expansion region. Exact for total degree -i-j <= D.
template <class S>
struct KernelGrid {
    int D = 0;
    std::vector<S> c;
    std::size_t idx(int i, int j) const { return static_cast<std::size_t>((-i) * (D + 1) + (-j)); }
    S at(int i, int j) const
    {
        if (i > 0 || j > 0) return Ring<S>::zero();
        if (-i - j > D) throw TruncationInsufficient("kernel factor: depth exceeded");
        return c[idx(i, j)];
    }
};

template <class S>
KernelGrid<S> kernel_factor(const Series<S>& g, int D)
{
    detail::require_aut(g);
    // K = 1/(1 + Delta), Delta = -sum_{s>=1} g_{-s} sum_{i=0}^{s-1} w^{i-s} z^{-1-i}
    KernelGrid<S> out;
    out.D = D;
    auto at = [D](int i, int j) { return static_cast<std::size_t>((-i) * (D + 1) + (-j)); };
    std::vector<S> delta(static_cast<std::size_t>((D + 1) * (D + 1)), Ring<S>::zero());
    for (int s = 1; s <= D; ++s) {
        if (!g.known(-s)) throw TruncationInsufficient("kernel_expand: g window too small for box");
        S gs = g.coeff(-s);
        if (Ring<S>::is_zero(gs)) continue;
        for (int i = 0; i < s; ++i) {
            int wi = i - s, zj = -1 - i;
            if (-wi - zj <= D) delta[at(wi, zj)] -= gs;
        }
    }
    std::vector<S> K(delta.size(), Ring<S>::zero()), term(delta.size(), Ring<S>::zero());
    K[at(0, 0)] = Ring<S>::one();
    term[at(0, 0)] = Ring<S>::one();
    for (int k = 1; k <= D; ++k) {
        std::vector<S> next(delta.size(), Ring<S>::zero());
        bool nz = false;
        for (int i1 = 0; i1 >= -D; --i1)
            for (int j1 = 0; -i1 - j1 <= D; --j1) {
                const S& t = term[at(i1, j1)];
                if (Ring<S>::is_zero(t)) continue;
                for (int i2 = -1; i2 >= -D; --i2)
                    for (int j2 = -1; -i2 - j2 <= D - (-i1 - j1) && j2 >= -D; --j2) {
                        const S& d = delta[at(i2, j2)];
                        if (Ring<S>::is_zero(d)) continue;
                        next[at(i1 + i2, j1 + j2)] -= t * d;
                        nz = true;
                    }
            }
        if (!nz) break;
        term = next;
        for (std::size_t q = 0; q < K.size(); ++q) K[q] += term[q];
    }
    out.c = std::move(K);
    return out;
}

// 1/(g(w) - g(z)) or 1/(g(w) - z) on the requested box, in the tagged region.
// g is z + b0 + ... (descending); the part beyond (w - z)^{-1} is the
// region-independent factor 1/(1 + (phi(w) - phi(z))/(w - z)), phi = g - id.
template <class S>
BiSeries<S> kernel_expand(const Series<S>& g, Region region, KernelKind kind, int a_lo, int a_hi, int b_lo, int b_hi)
{
    detail::require_aut(g);
    BiSeries<S> out(region, a_lo, a_hi, b_lo, b_hi);
    if (kind == KernelKind::g_minus_z) {
        // |w|>|z|: sum_m z^m g(w)^{-m-1};  |z|>|w|: -sum_m g(w)^m z^{-m-1}
        if (region == Region::w_outer) {
            if (b_hi < 0) return out;
            Series<S> ginv = mul_inverse(g);
            Series<S> p = ginv;
            for (int m = 0; m <= b_hi; ++m) {
                if (m >= b_lo)
                    for (int a = a_lo; a <= a_hi; ++a) out.ref(a, m) = p.coeff(a);
                p = p * ginv;
            }
        } else {
            Series<S> p = Series<S>::constant(g.var(), Ring<S>::one(), -kExact);
            for (int m = 0; -m - 1 >= b_lo; ++m) {
                int b = -m - 1;
                if (b <= b_hi)
                    for (int a = a_lo; a <= a_hi; ++a) out.ref(a, b) = Ring<S>::zero() - p.coeff(a);
                p = p * g;
            }
        }
        return out;
    }
    int depth = std::max(0, -(a_lo + b_lo) + 2);
    KernelGrid<S> K = kernel_factor(g, depth);
    auto Kc = [&](int i, int j) -> S { return K.at(i, j); };
    for (int a = a_lo; a <= a_hi; ++a)
        for (int b = b_lo; b <= b_hi; ++b) {
            S acc = Ring<S>::zero();
            if (region == Region::w_outer) {
                // (w - z)^{-1} = sum_{m>=0} z^m w^{-m-1}; need i = a + m + 1 <= 0, j = b - m <= 0
                for (int m = std::max(0, b); a + m + 1 <= 0; ++m) acc += Kc(a + m + 1, b - m);
            } else {
                // (w - z)^{-1} = -sum_{m>=0} w^m z^{-m-1}; i = a - m <= 0, j = b + m + 1 <= 0
                for (int m = std::max(0, a); b + m + 1 <= 0; ++m) acc -= Kc(a - m, b + m + 1);
            }
            out.ref(a, b) = acc;
        }
    return out;
}

template <class S>
std::string to_string(const Series<S>& f)
{
    std::ostringstream os;
    bool first = true;
    for (int n = f.hi(); n >= f.lo(); --n) {
        S c = f.coeff(n);
        if (Ring<S>::is_zero(c)) continue;
        if (!first) os << " + ";
        os << c << " " << var_name(f.var()) << "^" << n;
        first = false;
    }
    if (first) os << "0";
    os << (f.descending() ? " + O(" : " + O(") << var_name(f.var()) << "^" << (f.descending() ? f.prec() - 1 : f.prec() + 1) << ")";
    return os.str();
}

} // namespace sle
