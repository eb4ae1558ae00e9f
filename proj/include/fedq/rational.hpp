#pragma once

#include <gmpxx.h>

#include <string>
#include <utility>

#include "fedq/error.hpp"

namespace fedq {

// Exact complex scalar with arbitrary-precision rational real and imaginary
// parts.  GMP keeps every mpq_class in lowest terms with a positive
// denominator, so equality is plain component equality.
class GaussianRational {
public:
    GaussianRational() : re_(0), im_(0) {}
    GaussianRational(long v) : re_(v), im_(0) {} // NOLINT(google-explicit-constructor)
    GaussianRational(long num, unsigned long den) : re_(num, den), im_(0) {
        re_.canonicalize();
    }
    explicit GaussianRational(mpq_class re, mpq_class im = mpq_class(0))
        : re_(std::move(re)), im_(std::move(im)) {}

    static GaussianRational i(long num = 1, unsigned long den = 1) {
        mpq_class v(num, den);
        v.canonicalize();
        return GaussianRational(mpq_class(0), v);
    }

    static GaussianRational from_strings(const std::string& re, const std::string& im) {
        mpq_class r(re), i(im);
        r.canonicalize();
        i.canonicalize();
        return GaussianRational(r, i);
    }

    const mpq_class& re() const { return re_; }
    const mpq_class& im() const { return im_; }

    bool is_zero() const { return re_ == 0 && im_ == 0; }
    bool is_real() const { return im_ == 0; }

    GaussianRational operator-() const { return GaussianRational(-re_, -im_); }

    GaussianRational& operator+=(const GaussianRational& o) {
        re_ += o.re_;
        im_ += o.im_;
        return *this;
    }
    GaussianRational& operator-=(const GaussianRational& o) {
        re_ -= o.re_;
        im_ -= o.im_;
        return *this;
    }
    GaussianRational& operator*=(const GaussianRational& o) {
        mpq_class re = re_ * o.re_ - im_ * o.im_;
        mpq_class im = re_ * o.im_ + im_ * o.re_;
        re_ = std::move(re);
        im_ = std::move(im);
        return *this;
    }

    friend GaussianRational operator+(GaussianRational a, const GaussianRational& b) {
        return a += b;
    }
    friend GaussianRational operator-(GaussianRational a, const GaussianRational& b) {
        return a -= b;
    }
    friend GaussianRational operator*(GaussianRational a, const GaussianRational& b) {
        return a *= b;
    }
    friend GaussianRational operator/(const GaussianRational& a, const GaussianRational& b) {
        if (b.is_zero()) throw EvalError("division by zero");
        mpq_class norm = b.re_ * b.re_ + b.im_ * b.im_;
        GaussianRational num = a * b.conj();
        return GaussianRational(num.re_ / norm, num.im_ / norm);
    }

    GaussianRational conj() const { return GaussianRational(re_, -im_); }

    // Multiplication by the imaginary unit.
    GaussianRational times_i() const { return GaussianRational(-im_, re_); }

    GaussianRational pow(long e) const {
        if (e < 0) return GaussianRational(1) / pow(-e);
        GaussianRational acc(1), base(*this);
        for (; e > 0; e >>= 1) {
            if (e & 1) acc *= base;
            base *= base;
        }
        return acc;
    }

    bool operator==(const GaussianRational& o) const { return re_ == o.re_ && im_ == o.im_; }
    bool operator!=(const GaussianRational& o) const { return !(*this == o); }

    // Total order used only for canonical term layout, not for magnitude.
    bool operator<(const GaussianRational& o) const {
        if (int c = cmp(re_, o.re_); c != 0) return c < 0;
        return cmp(im_, o.im_) < 0;
    }

    static std::string rat_str(const mpq_class& v) {
        if (v.get_den() == 1) return v.get_num().get_str();
        return v.get_num().get_str() + "/" + v.get_den().get_str();
    }

    // "a/b" for real values, "a/b+c/d*i" otherwise.
    std::string str() const {
        if (im_ == 0) return rat_str(re_);
        std::string s;
        if (re_ != 0) s = rat_str(re_);
        if (im_ > 0 && re_ != 0) s += "+";
        if (im_ == -1)
            s += "-";
        else if (im_ != 1)
            s += rat_str(im_) + "*";
        s += "i";
        return s;
    }

private:
    mpq_class re_, im_;
};

inline GaussianRational factorial(unsigned long k) {
    mpz_class f;
    mpz_fac_ui(f.get_mpz_t(), k);
    return GaussianRational(mpq_class(f));
}

inline GaussianRational binomial(unsigned long n, unsigned long k) {
    if (k > n) return GaussianRational(0);
    mpz_class b;
    mpz_bin_uiui(b.get_mpz_t(), n, k);
    return GaussianRational(mpq_class(b));
}

// Exact power of (s*i/2) for the fiberwise product expansion.
inline GaussianRational i_half_pow(unsigned t, int sign) {
    GaussianRational base = GaussianRational::i(sign, 2);
    return base.pow(t);
}

} // namespace fedq
