#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <utility>
#include <vector>

#include "fedq/ring.hpp"

namespace fedq {

// Fiberwise product kernel: the antisymmetric matrix with +1 on the
// (alpha, alpha+n) slots.  Calibrated so that the flat Moyal bracket of a
// canonical pair comes out as {q,p} = -i*hbar; see the weyl tests.
inline constexpr int kKernelSign = +1;

// The printed closed form of the one-pair product carries the opposite
// imaginary prefactor relative to the t-expansion under the calibrated
// kernel; this constant records that choice in one place.
inline constexpr int kClosedFormISign = -1;

// Wedge factor dx^{s1} ^ ... ^ dx^{sm}, strictly increasing, m <= 3.
struct FormFactor {
    uint8_t m = 0;
    std::array<uint8_t, 3> idx{0, 0, 0}; // phase-space indices, 1-based

    static FormFactor scalar() { return {}; }
    static FormFactor dx(uint8_t k) { return FormFactor{1, {k, 0, 0}}; }

    friend bool operator==(const FormFactor& a, const FormFactor& b) {
        return a.m == b.m && a.idx == b.idx;
    }
    friend bool operator<(const FormFactor& a, const FormFactor& b) {
        if (a.m != b.m) return a.m < b.m;
        return a.idx < b.idx;
    }

    bool contains(uint8_t k) const {
        for (uint8_t i = 0; i < m; ++i)
            if (idx[i] == k) return true;
        return false;
    }

    // Wedge product; nullopt when an index repeats, sign from sorting.
    static std::optional<std::pair<int, FormFactor>> wedge(const FormFactor& a,
                                                           const FormFactor& b) {
        if (a.m + b.m > 3) return std::nullopt; // form degree cap
        std::array<uint8_t, 6> merged{};
        uint8_t total = 0;
        for (uint8_t i = 0; i < a.m; ++i) merged[total++] = a.idx[i];
        for (uint8_t i = 0; i < b.m; ++i) merged[total++] = b.idx[i];
        int sign = 1;
        for (uint8_t i = 0; i < total; ++i)
            for (uint8_t j = i + 1; j < total; ++j) {
                if (merged[i] == merged[j]) return std::nullopt;
                if (merged[i] > merged[j]) {
                    std::swap(merged[i], merged[j]);
                    sign = -sign;
                }
            }
        FormFactor r;
        r.m = total;
        for (uint8_t i = 0; i < total; ++i) r.idx[i] = merged[i];
        return std::make_pair(sign, r);
    }
};

struct WeylKey {
    uint32_t k = 0;               // hbar exponent
    std::vector<uint32_t> y;      // length 2n
    FormFactor form;

    uint32_t y_degree() const { return std::accumulate(y.begin(), y.end(), 0u); }
    uint32_t degree() const { return 2 * k + y_degree(); }

    friend bool operator==(const WeylKey& a, const WeylKey& b) {
        return a.k == b.k && a.y == b.y && a.form == b.form;
    }
    friend bool operator<(const WeylKey& a, const WeylKey& b) {
        if (a.k != b.k) return a.k < b.k;
        if (a.y != b.y) return a.y < b.y;
        return a.form < b.form;
    }
};

// Graded sum of terms hbar^k y^j (form) * RingElement, truncated at a total
// degree cap (degree = 2k + |j|).  Canonical: no zero coefficients.
class WeylSeries {
public:
    WeylSeries() = default;
    WeylSeries(RingPtr ring, uint32_t cap) : ring_(std::move(ring)), cap_(cap) {}

    static WeylSeries zero(RingPtr ring, uint32_t cap) { return WeylSeries(std::move(ring), cap); }
    static WeylSeries scalar(const RingElement& c, uint32_t cap) {
        WeylSeries s(c.ring(), cap);
        s.add(WeylKey{0, std::vector<uint32_t>(2 * c.n(), 0), FormFactor::scalar()}, c);
        return s;
    }
    static WeylSeries one(RingPtr ring, uint32_t cap) {
        return scalar(RingElement::one(ring), cap);
    }
    // Single fiber variable y^j, j in 1..2n.
    static WeylSeries y(RingPtr ring, uint32_t j, uint32_t cap) {
        WeylSeries s(ring, cap);
        std::vector<uint32_t> e(2 * ring->n(), 0);
        e.at(j - 1) = 1;
        s.add(WeylKey{0, std::move(e), FormFactor::scalar()}, RingElement::one(ring));
        return s;
    }
    static WeylSeries monomial(RingPtr ring, uint32_t k, std::vector<uint32_t> y, FormFactor f,
                               const RingElement& coeff, uint32_t cap) {
        WeylSeries s(ring, cap);
        s.add(WeylKey{k, std::move(y), f}, coeff);
        return s;
    }

    const RingPtr& ring() const { return ring_; }
    uint32_t n() const { return ring_ ? ring_->n() : 0; }
    uint32_t cap() const { return cap_; }
    const std::map<WeylKey, RingElement>& terms() const { return terms_; }
    bool is_zero() const { return terms_.empty(); }
    size_t term_count() const { return terms_.size(); }

    void add(const WeylKey& key, const RingElement& coeff) {
        if (coeff.is_zero() || key.degree() > cap_) return;
        auto [it, fresh] = terms_.emplace(key, coeff);
        if (!fresh) {
            it->second += coeff;
            if (it->second.is_zero()) terms_.erase(it);
        }
    }

    WeylSeries with_cap(uint32_t cap) const {
        WeylSeries r(ring_, cap);
        for (const auto& [key, c] : terms_)
            if (key.degree() <= cap) r.terms_.emplace(key, c);
        return r;
    }

    int max_form_degree() const {
        int m = 0;
        for (const auto& [key, c] : terms_) m = std::max<int>(m, key.form.m);
        return m;
    }
    bool form_homogeneous(uint8_t m) const {
        for (const auto& [key, c] : terms_)
            if (key.form.m != m) return false;
        return true;
    }
    uint32_t max_degree() const {
        uint32_t d = 0;
        for (const auto& [key, c] : terms_) d = std::max(d, key.degree());
        return d;
    }
    uint32_t min_degree() const {
        uint32_t d = UINT32_MAX;
        for (const auto& [key, c] : terms_) d = std::min(d, key.degree());
        return terms_.empty() ? 0 : d;
    }

    // Component of homogeneous total degree z.
    WeylSeries component(uint32_t z) const {
        WeylSeries r(ring_, cap_);
        for (const auto& [key, c] : terms_)
            if (key.degree() == z) r.terms_.emplace(key, c);
        return r;
    }
    // Component of homogeneous form degree m.
    WeylSeries form_component(uint8_t m) const {
        WeylSeries r(ring_, cap_);
        for (const auto& [key, c] : terms_)
            if (key.form.m == m) r.terms_.emplace(key, c);
        return r;
    }

    bool operator==(const WeylSeries& o) const { return terms_ == o.terms_; }
    bool operator!=(const WeylSeries& o) const { return !(*this == o); }

    WeylSeries operator-() const {
        WeylSeries r(ring_, cap_);
        for (const auto& [key, c] : terms_) r.terms_.emplace(key, -c);
        return r;
    }
    WeylSeries& operator+=(const WeylSeries& o) {
        for (const auto& [key, c] : o.terms_) add(key, c);
        return *this;
    }
    WeylSeries& operator-=(const WeylSeries& o) {
        for (const auto& [key, c] : o.terms_) add(key, -c);
        return *this;
    }
    friend WeylSeries operator+(WeylSeries a, const WeylSeries& b) { return a += b; }
    friend WeylSeries operator-(WeylSeries a, const WeylSeries& b) { return a -= b; }

    WeylSeries scaled(const GaussianRational& c) const {
        WeylSeries r(ring_, cap_);
        for (const auto& [key, v] : terms_) r.add(key, v.scaled(c));
        return r;
    }
    WeylSeries scaled_ring(const RingElement& c) const {
        WeylSeries r(ring_, cap_);
        for (const auto& [key, v] : terms_) r.add(key, v * c);
        return r;
    }

private:
    RingPtr ring_;
    uint32_t cap_ = 0;
    std::map<WeylKey, RingElement> terms_;
};

namespace detail {

inline GaussianRational falling(uint32_t e, uint32_t k) {
    GaussianRational r(1);
    for (uint32_t i = 0; i < k; ++i) r *= GaussianRational(static_cast<long>(e - i));
    return r;
}

// Enumerate multi-indices u <= bound (pointwise).
template <typename F>
void for_each_below(const std::vector<uint32_t>& bound, F&& f) {
    std::vector<uint32_t> u(bound.size(), 0);
    for (;;) {
        f(u);
        size_t i = 0;
        while (i < u.size()) {
            if (u[i] < bound[i]) {
                ++u[i];
                break;
            }
            u[i] = 0;
            ++i;
        }
        if (i == u.size()) return;
    }
}

} // namespace detail

// Fiberwise noncommutative product.  The t-th term carries (-i*hbar/2)^t and
// one kernel contraction per t; hbar exponents add as k_a + k_b + t.  The
// kernel parameter exists for the antisymmetric-parity property test only.
// tmin skips the low contraction orders; commutator-type callers use tmin = 1
// because their t = 0 parts cancel identically.
inline WeylSeries circ(const WeylSeries& a, const WeylSeries& b, int kernel = kKernelSign,
                       uint32_t tmin = 0) {
    if (a.ring() && b.ring() && a.n() != b.n())
        throw StructureError("fiberwise product requires equal dimensions");
    uint32_t cap = std::min(a.cap(), b.cap());
    uint32_t n = a.n() ? a.n() : b.n();
    WeylSeries out(a.ring() ? a.ring() : b.ring(), cap);
    for (const auto& [ka, ca] : a.terms()) {
        for (const auto& [kb, cb] : b.terms()) {
            auto wedge = FormFactor::wedge(ka.form, kb.form);
            if (!wedge) continue;
            if (2 * (ka.k + kb.k) + 0 > cap) continue;
            auto [fsign, form] = *wedge;
            // u_alpha counts contractions pairing d/dy^a on the left with
            // d/dy^{a+n} on the right; v_alpha the reverse direction.
            std::vector<uint32_t> ubound(n), vbound(n);
            uint32_t tmax = 0;
            for (uint32_t al = 0; al < n; ++al) {
                ubound[al] = std::min(ka.y[al], kb.y[al + n]);
                vbound[al] = std::min(ka.y[al + n], kb.y[al]);
                tmax += ubound[al] + vbound[al];
            }
            if (tmax < tmin) continue;
            RingElement cc = ca * cb;
            detail::for_each_below(ubound, [&](const std::vector<uint32_t>& u) {
                uint32_t usum = std::accumulate(u.begin(), u.end(), 0u);
                detail::for_each_below(vbound, [&](const std::vector<uint32_t>& v) {
                    uint32_t vsum = std::accumulate(v.begin(), v.end(), 0u);
                    uint32_t t = usum + vsum;
                    if (t < tmin) return;
                    WeylKey key;
                    key.k = ka.k + kb.k + t;
                    key.form = form;
                    key.y.assign(2 * n, 0);
                    for (uint32_t al = 0; al < n; ++al) {
                        key.y[al] = ka.y[al] - u[al] + kb.y[al] - v[al];
                        key.y[al + n] = ka.y[al + n] - v[al] + kb.y[al + n] - u[al];
                    }
                    if (key.degree() > cap) return;
                    GaussianRational factor = i_half_pow(t, -1);
                    if (kernel < 0 && (t % 2)) factor = -factor;
                    if (vsum % 2) factor = -factor;
                    if (fsign < 0) factor = -factor;
                    for (uint32_t al = 0; al < n; ++al) {
                        factor *= detail::falling(ka.y[al], u[al]);
                        factor *= detail::falling(ka.y[al + n], v[al]);
                        factor *= detail::falling(kb.y[al], v[al]);
                        factor *= detail::falling(kb.y[al + n], u[al]);
                        factor = factor / (factorial(u[al]) * factorial(v[al]));
                    }
                    out.add(key, cc.scaled(factor));
                });
            });
        }
    }
    return out;
}

// Closed form of (y^i)^r (y^{i+n})^j o (y^i)^s (y^{i+n})^k evaluated as the
// printed double sum, with the module-wide sign choice for the (i*hbar/2)^t
// prefactor.
inline WeylSeries circ_closed_form(RingPtr ring, uint32_t r, uint32_t j, uint32_t s, uint32_t k,
                                   uint32_t i, uint32_t cap) {
    uint32_t n = ring->n();
    if (i == 0 || i > n) throw StructureError("fiber index out of range");
    WeylSeries out(ring, cap);
    GaussianRational pre = factorial(r) * factorial(j) * factorial(s) * factorial(k);
    uint32_t tmax = std::min(r, k) + std::min(j, s);
    for (uint32_t t = 0; t <= tmax; ++t) {
        long alo = std::max({static_cast<long>(t) - static_cast<long>(r),
                             static_cast<long>(t) - static_cast<long>(k), 0L});
        long ahi = std::min({static_cast<long>(j), static_cast<long>(s), static_cast<long>(t)});
        GaussianRational inner(0);
        const long lr = r, lj = j, ls = s, lk = k, lt = t;
        for (long a = alo; a <= ahi; ++a) {
            GaussianRational term =
                GaussianRational(1) /
                (factorial(a) * factorial(lt - a) * factorial(lr - lt + a) * factorial(lj - a) *
                 factorial(ls - a) * factorial(lk - lt + a));
            if (a % 2) term = -term;
            inner += term;
        }
        WeylKey key;
        key.k = t;
        key.y.assign(2 * n, 0);
        key.y[i - 1] = r + s - t;
        key.y[i - 1 + n] = k + j - t;
        key.form = FormFactor::scalar();
        out.add(key, RingElement::constant(ring, pre * i_half_pow(t, kClosedFormISign) * inner));
    }
    return out;
}

// Graded commutator [a,b] = a o b - (-1)^{m1 m2} b o a, computed per pair of
// homogeneous form degrees.  The t = 0 parts always cancel (coefficients
// commute), so the products start at t = 1.
inline WeylSeries graded_commutator(const WeylSeries& a, const WeylSeries& b) {
    uint32_t cap = std::min(a.cap(), b.cap());
    WeylSeries out(a.ring() ? a.ring() : b.ring(), cap);
    for (uint8_t m1 = 0; m1 <= 3; ++m1) {
        WeylSeries am = a.form_component(m1);
        if (am.is_zero()) continue;
        for (uint8_t m2 = 0; m2 + m1 <= 3; ++m2) {
            WeylSeries bm = b.form_component(m2);
            if (bm.is_zero()) continue;
            WeylSeries ab = circ(am, bm, kKernelSign, 1);
            WeylSeries ba = circ(bm, am, kKernelSign, 1);
            out += ab;
            if ((m1 * m2) % 2)
                out += ba;
            else
                out -= ba;
        }
    }
    return out;
}

// Fiber antiderivation: delta a = dx^k ^ da/dy^k.  Lowers total degree by 1.
inline WeylSeries delta(const WeylSeries& a) {
    WeylSeries out(a.ring(), a.cap());
    uint32_t n2 = 2 * a.n();
    for (const auto& [key, c] : a.terms()) {
        for (uint32_t k = 1; k <= n2; ++k) {
            if (key.y[k - 1] == 0) continue;
            auto wedge = FormFactor::wedge(FormFactor::dx(static_cast<uint8_t>(k)), key.form);
            if (!wedge) continue;
            WeylKey nk = key;
            nk.y[k - 1] -= 1;
            nk.form = wedge->second;
            GaussianRational factor(static_cast<long>(key.y[k - 1]));
            if (wedge->first < 0) factor = -factor;
            out.add(nk, c.scaled(factor));
        }
    }
    return out;
}

// Normalized contraction partner of delta: per homogeneous (l = y-degree,
// m = form degree) component, y^k (d/dx^k -| a) / (l + m); the l+m = 0 part
// maps to zero.
inline WeylSeries delta_inv(const WeylSeries& a) {
    WeylSeries out(a.ring(), a.cap());
    for (const auto& [key, c] : a.terms()) {
        uint32_t l = key.y_degree();
        uint32_t m = key.form.m;
        if (l + m == 0) continue;
        GaussianRational norm = GaussianRational(1) / GaussianRational(static_cast<long>(l + m));
        for (uint8_t pos = 0; pos < key.form.m; ++pos) {
            WeylKey nk = key;
            nk.y[key.form.idx[pos] - 1] += 1;
            FormFactor f;
            f.m = key.form.m - 1;
            uint8_t w = 0;
            for (uint8_t i = 0; i < key.form.m; ++i)
                if (i != pos) f.idx[w++] = key.form.idx[i];
            nk.form = f;
            GaussianRational factor = norm;
            if (pos % 2) factor = -factor;
            out.add(nk, c.scaled(factor));
        }
    }
    return out;
}

// Exterior derivative acting on the coefficient functions.
inline WeylSeries exterior_d(const WeylSeries& a) {
    WeylSeries out(a.ring(), a.cap());
    uint32_t n2 = 2 * a.n();
    for (const auto& [key, c] : a.terms()) {
        for (uint32_t k = 1; k <= n2; ++k) {
            RingElement dc = c.derive(k);
            if (dc.is_zero()) continue;
            auto wedge = FormFactor::wedge(FormFactor::dx(static_cast<uint8_t>(k)), key.form);
            if (!wedge) continue;
            WeylKey nk = key;
            nk.form = wedge->second;
            out.add(nk, wedge->first < 0 ? -dc : dc);
        }
    }
    return out;
}

// Division by hbar together with multiplication by i.  Every surviving term
// must already carry hbar; a bare hbar^0 term signals a malformed input.
inline WeylSeries i_over_hbar(const WeylSeries& a) {
    WeylSeries out(a.ring(), a.cap());
    for (const auto& [key, c] : a.terms()) {
        if (key.k == 0)
            throw InternalError("i/hbar applied to a term without an hbar factor");
        WeylKey nk = key;
        nk.k -= 1;
        out.add(nk, c.scaled(GaussianRational::i()));
    }
    return out;
}

// (i/hbar)[g, a] with the two extra cap units the intermediate product needs
// before the division lowers degrees again.
inline WeylSeries commutator_over_hbar(const WeylSeries& g, const WeylSeries& a) {
    uint32_t cap = std::min(g.cap(), a.cap());
    return i_over_hbar(graded_commutator(g.with_cap(cap + 2), a.with_cap(cap + 2)))
        .with_cap(cap);
}

// Exterior covariant derivative determined by a connection one-form:
// da + (i/hbar)[gamma, a].
inline WeylSeries covariant_d(const WeylSeries& a, const WeylSeries& gamma_form) {
    if (!gamma_form.is_zero()) {
        if (!gamma_form.form_homogeneous(1))
            throw StructureError("connection form must have form degree 1");
        for (const auto& [key, c] : gamma_form.terms())
            if (key.k != 0 || key.y_degree() != 2)
                throw StructureError("connection form must be y-quadratic at hbar^0");
    }
    WeylSeries out = exterior_d(a);
    if (!gamma_form.is_zero()) out += commutator_over_hbar(gamma_form, a);
    return out;
}

// Partition of a series by (hbar exponent, y-degree); lossless.
inline std::vector<std::tuple<uint32_t, uint32_t, WeylSeries>> degree_decompose(
    const WeylSeries& a) {
    std::map<std::pair<uint32_t, uint32_t>, WeylSeries> parts;
    for (const auto& [key, c] : a.terms()) {
        auto idx = std::make_pair(key.k, key.y_degree());
        auto it = parts.find(idx);
        if (it == parts.end())
            it = parts.emplace(idx, WeylSeries(a.ring(), a.cap())).first;
        it->second.add(key, c);
    }
    std::vector<std::tuple<uint32_t, uint32_t, WeylSeries>> out;
    out.reserve(parts.size());
    for (auto& [idx, s] : parts) out.emplace_back(idx.first, idx.second, std::move(s));
    return out;
}

} // namespace fedq
