#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <complex>
#include <cstdint>
#include <ostream>
#include <stdexcept>
#include <string>
#include <type_traits>

namespace sle {

using Rational = boost::multiprecision::cpp_rational;
using Complex = std::complex<double>;

// Gaussian rational a + b i. Exact; the symbolic suites run on this.
class GaussQ {
public:
    GaussQ() = default;
    GaussQ(int v) : re_(v) {}
    GaussQ(long v) : re_(v) {}
    GaussQ(long long v) : re_(v) {}
    GaussQ(Rational re) : re_(std::move(re)) {}
    GaussQ(Rational re, Rational im) : re_(std::move(re)), im_(std::move(im)) {}

    const Rational& re() const { return re_; }
    const Rational& im() const { return im_; }

    bool is_zero() const { return re_.is_zero() && im_.is_zero(); }

    GaussQ conj() const { return {re_, -im_}; }

    GaussQ& operator+=(const GaussQ& o) { re_ += o.re_; im_ += o.im_; return *this; }
    GaussQ& operator-=(const GaussQ& o) { re_ -= o.re_; im_ -= o.im_; return *this; }
    GaussQ& operator*=(const GaussQ& o)
    {
        if (o.im_.is_zero()) {
            re_ *= o.re_;
            im_ *= o.re_;
            return *this;
        }
        Rational r = re_ * o.re_ - im_ * o.im_;
        im_ = re_ * o.im_ + im_ * o.re_;
        re_ = std::move(r);
        return *this;
    }
    GaussQ& operator/=(const GaussQ& o)
    {
        if (o.is_zero()) throw std::domain_error("GaussQ: division by zero");
        if (o.im_.is_zero()) {
            re_ /= o.re_;
            im_ /= o.re_;
            return *this;
        }
        Rational n = o.re_ * o.re_ + o.im_ * o.im_;
        *this *= o.conj();
        re_ /= n;
        im_ /= n;
        return *this;
    }

    friend GaussQ operator+(GaussQ a, const GaussQ& b) { return a += b; }
    friend GaussQ operator-(GaussQ a, const GaussQ& b) { return a -= b; }
    friend GaussQ operator*(GaussQ a, const GaussQ& b) { return a *= b; }
    friend GaussQ operator/(GaussQ a, const GaussQ& b) { return a /= b; }
    friend GaussQ operator-(const GaussQ& a) { return {-a.re_, -a.im_}; }
    friend bool operator==(const GaussQ& a, const GaussQ& b) { return a.re_ == b.re_ && a.im_ == b.im_; }
    friend bool operator!=(const GaussQ& a, const GaussQ& b) { return !(a == b); }

    Complex to_complex() const
    {
        return {static_cast<double>(re_), static_cast<double>(im_)};
    }

    friend std::ostream& operator<<(std::ostream& os, const GaussQ& q)
    {
        if (q.im_.is_zero()) return os << q.re_;
        if (q.re_.is_zero()) return os << q.im_ << "i";
        return os << "(" << q.re_ << (q.im_ < 0 ? "" : "+") << q.im_ << "i)";
    }

private:
    Rational re_{0};
    Rational im_{0};
};

inline const GaussQ I_unit{Rational(0), Rational(1)};

inline Rational rat(long long p, long long q = 1) { return Rational(p) / Rational(q); }
inline GaussQ gq(long long p, long long q = 1) { return GaussQ(rat(p, q)); }

template <class S>
struct ScalarTraits;

template <>
struct ScalarTraits<GaussQ> {
    static constexpr bool exact = true;
    static GaussQ from_rational(const Rational& r) { return GaussQ(r); }
    static bool is_zero(const GaussQ& s) { return s.is_zero(); }
    static double magnitude(const GaussQ& s) { return std::abs(s.to_complex()); }
    static Complex to_complex(const GaussQ& s) { return s.to_complex(); }
    static const char* name() { return "exact"; }
};

template <>
struct ScalarTraits<Complex> {
    static constexpr bool exact = false;
    static Complex from_rational(const Rational& r) { return {static_cast<double>(r), 0.0}; }
    static bool is_zero(const Complex& s) { return s == Complex(0.0); }
    static double magnitude(const Complex& s) { return std::abs(s); }
    static Complex to_complex(const Complex& s) { return s; }
    static const char* name() { return "complex"; }
};

template <class S>
inline constexpr bool is_exact_v = ScalarTraits<S>::exact;

template <class S>
S from_int(long long n) { return ScalarTraits<S>::from_rational(Rational(n)); }

template <class S>
S from_frac(long long p, long long q) { return ScalarTraits<S>::from_rational(rat(p, q)); }

template <class S>
bool is_zero(const S& s) { return ScalarTraits<S>::is_zero(s); }

} // namespace sle

namespace sle {

// Minimal ring interface used by the generic series code. Coefficient rings
// other than the two scalar modes (polynomials in the symmetry module) plug in
// by specializing this.
template <class S>
struct Ring {
    static S zero() { return sle::from_int<S>(0); }
    static S one() { return sle::from_int<S>(1); }
    static S from_int(long long n) { return sle::from_int<S>(n); }
    static bool is_zero(const S& s) { return sle::is_zero(s); }
    static S inverse(const S& s)
    {
        if (is_zero(s)) throw std::domain_error("inverse of zero");
        return one() / s;
    }
    static S div_int(const S& s, long long n) { return s / from_int(n); }
};

} // namespace sle
