#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "fedq/report.hpp"
#include "fedq/ring.hpp"

namespace fedq {

// Entries of the inverse symplectic form used to contract lowered connection
// coefficients.  Numerically the same block matrix as omega itself:
// omega^{a, a+n} = +1, omega^{a+n, a} = -1.  This is the sign under which the
// metric-pipeline identities of the induced construction close exactly; see
// the geometry tests.
inline int omega_upper(uint32_t s, uint32_t t, uint32_t n, int kernel = +1) {
    if (t == s + n) return kernel;
    if (s == t + n) return -kernel;
    return 0;
}

inline int omega_lower(uint32_t i, uint32_t l, uint32_t n) { return omega_upper(i, l, n); }

// Base-space linear symmetric connection: coefficients G^eps_{ab} as q-only
// ring elements, stored for a <= b.
class LinearConnection {
public:
    explicit LinearConnection(RingPtr ring) : ring_(std::move(ring)) {}

    static LinearConnection zero(RingPtr ring) { return LinearConnection(std::move(ring)); }

    // Abstract mode: every coefficient is its own jet symbol.
    static LinearConnection jets(RingPtr ring) {
        LinearConnection c(ring);
        uint32_t n = ring->n();
        for (uint32_t e = 1; e <= n; ++e)
            for (uint32_t a = 1; a <= n; ++a)
                for (uint32_t b = a; b <= n; ++b)
                    c.set(e, a, b, RingElement::jet_sym(ring, e, a, b));
        return c;
    }

    const RingPtr& ring() const { return ring_; }
    uint32_t n() const { return ring_->n(); }

    void set(uint32_t eps, uint32_t a, uint32_t b, const RingElement& v) {
        check(eps, a, b);
        if (v.depends_on_p())
            throw StructureError("base connection coefficients depend on q only");
        std::array<uint32_t, 3> key{eps, std::min(a, b), std::max(a, b)};
        if (v.is_zero())
            t_.erase(key);
        else
            t_[key] = v;
    }
    RingElement get(uint32_t eps, uint32_t a, uint32_t b) const {
        check(eps, a, b);
        auto it = t_.find({eps, std::min(a, b), std::max(a, b)});
        return it == t_.end() ? RingElement::zero(ring_) : it->second;
    }
    bool is_zero() const { return t_.empty(); }

private:
    void check(uint32_t eps, uint32_t a, uint32_t b) const {
        uint32_t n = ring_->n();
        if (eps == 0 || eps > n || a == 0 || a > n || b == 0 || b > n)
            throw StructureError("connection index out of range");
    }
    RingPtr ring_;
    std::map<std::array<uint32_t, 3>, RingElement> t_;
};

// Symmetric base metric with an exact inverse.
class BaseMetric {
public:
    explicit BaseMetric(RingPtr ring) : ring_(std::move(ring)) {}

    void set(uint32_t a, uint32_t b, const RingElement& v) {
        g_[key(a, b)] = v;
    }
    void set_inverse(uint32_t a, uint32_t b, const RingElement& v) { gi_[key(a, b)] = v; }

    RingElement get(uint32_t a, uint32_t b) const { return fetch(g_, a, b); }
    RingElement inv(uint32_t a, uint32_t b) const { return fetch(gi_, a, b); }

    const RingPtr& ring() const { return ring_; }
    uint32_t n() const { return ring_->n(); }

    // g * g^-1 = identity, exactly, as ring elements.
    bool inverse_consistent() const {
        uint32_t n = ring_->n();
        for (uint32_t a = 1; a <= n; ++a)
            for (uint32_t b = 1; b <= n; ++b) {
                RingElement sum = RingElement::zero(ring_);
                for (uint32_t l = 1; l <= n; ++l) sum += get(a, l) * inv(l, b);
                RingElement want = a == b ? RingElement::one(ring_) : RingElement::zero(ring_);
                if (sum != want) return false;
            }
        return true;
    }

    // Inverts diagonal metrics whose entries are single invertible terms.
    void invert_diagonal() {
        uint32_t n = ring_->n();
        for (uint32_t a = 1; a <= n; ++a)
            for (uint32_t b = a + 1; b <= n; ++b)
                if (!get(a, b).is_zero())
                    throw StructureError("automatic inversion requires a diagonal metric");
        for (uint32_t a = 1; a <= n; ++a) {
            RingElement d = get(a, a);
            if (d.term_count() != 1)
                throw StructureError("metric entry is not a single invertible term");
            const auto& [mono, coeff] = *d.terms().begin();
            if (!mono.jet.empty())
                throw StructureError("cannot invert jet-symbol metric entries");
            Mono inv = mono;
            for (auto& e : inv.q) {
                if (e != 0) throw StructureError("cannot invert polynomial metric entries");
            }
            for (auto& [id, pow] : inv.fn) pow = -pow;
            TermMap tm;
            tm[inv] = GaussianRational(1) / coeff;
            set_inverse(a, a, RingElement::from_terms(ring_, std::move(tm)));
        }
        if (!inverse_consistent()) throw StructureError("inverse construction failed");
    }

private:
    static std::array<uint32_t, 2> key(uint32_t a, uint32_t b) {
        return {std::min(a, b), std::max(a, b)};
    }
    RingElement fetch(const std::map<std::array<uint32_t, 2>, RingElement>& m, uint32_t a,
                      uint32_t b) const {
        auto it = m.find(key(a, b));
        return it == m.end() ? RingElement::zero(ring_) : it->second;
    }
    RingPtr ring_;
    std::map<std::array<uint32_t, 2>, RingElement> g_, gi_;
};

enum class ConnectionShape { generic_induced, riemannian, special_atlas };

// Totally symmetric lowered coefficients gamma_{ijk} on phase space, stored
// once per sorted index triple.  Builders only ever produce the induced
// shape: gamma_{IJK} = gamma_{IJa} = 0, gamma_{Iab} = -G^{I-n}_{ab},
// gamma_{abd} linear homogeneous in the momenta.
class SymplecticConnection {
public:
    SymplecticConnection(RingPtr ring, ConnectionShape shape)
        : ring_(std::move(ring)), shape_(shape) {}

    const RingPtr& ring() const { return ring_; }
    uint32_t n() const { return ring_->n(); }
    uint32_t dim() const { return 2 * ring_->n(); }
    ConnectionShape shape() const { return shape_; }

    void set(uint32_t i, uint32_t j, uint32_t k, const RingElement& v) {
        auto key = sorted(i, j, k);
        if (v.is_zero())
            t_.erase(key);
        else
            t_[key] = v;
    }
    RingElement get(uint32_t i, uint32_t j, uint32_t k) const {
        auto it = t_.find(sorted(i, j, k));
        return it == t_.end() ? RingElement::zero(ring_) : it->second;
    }
    const std::map<std::array<uint32_t, 3>, RingElement>& table() const { return t_; }
    bool is_zero() const { return t_.empty(); }

    size_t nonzero_count() const { return t_.size(); }

    // Structural scan of the induced shape.
    CheckReport validate_induced_shape() const {
        CheckReport rep;
        uint32_t n = this->n();
        bool momentum_pair_zero = true, mixed_p_free = true, spatial_linear = true,
             spatial_vanishes_on_base = true;
        for (const auto& [key, v] : t_) {
            uint32_t mom = 0;
            for (uint32_t x : key)
                if (x > n) ++mom;
            if (mom >= 2) momentum_pair_zero = false;
            if (mom == 1 && v.depends_on_p()) mixed_p_free = false;
            if (mom == 0) {
                for (const auto& [m, c] : v.terms())
                    if (m.p_degree() != 1) {
                        spatial_linear = false;
                        if (m.p_degree() == 0) spatial_vanishes_on_base = false;
                    }
            }
        }
        rep.add("two-or-three momentum-index coefficients vanish", momentum_pair_zero);
        rep.add("one-momentum-index coefficients are q-only", mixed_p_free);
        rep.add("spatial coefficients are linear homogeneous in p", spatial_linear);
        rep.add("spatial coefficients vanish on the base section", spatial_vanishes_on_base);
        return rep;
    }

    // Slot-count bound for the induced shape: at most n(n+1)(2n+1)/3 nonzero
    // coefficients.
    bool induced_count_ok() const {
        uint32_t n = this->n();
        return nonzero_count() <= static_cast<size_t>(n * (n + 1) * (2 * n + 1)) / 3;
    }

private:
    static std::array<uint32_t, 3> sorted(uint32_t i, uint32_t j, uint32_t k) {
        std::array<uint32_t, 3> a{i, j, k};
        std::sort(a.begin(), a.end());
        return a;
    }
    RingPtr ring_;
    ConnectionShape shape_;
    std::map<std::array<uint32_t, 3>, RingElement> t_;
};

// Totally symmetric cubic tensor f^eps_{abd} (q-only), the free parameter of
// the generic induced construction.
class SymmetricCubic {
public:
    explicit SymmetricCubic(RingPtr ring) : ring_(std::move(ring)) {}
    static SymmetricCubic zero(RingPtr ring) { return SymmetricCubic(std::move(ring)); }

    void set(uint32_t eps, uint32_t a, uint32_t b, uint32_t d, const RingElement& v) {
        if (v.depends_on_p()) throw StructureError("f coefficients depend on q only");
        std::array<uint32_t, 4> key{eps, a, b, d};
        std::sort(key.begin() + 1, key.end());
        if (v.is_zero())
            t_.erase(key);
        else
            t_[key] = v;
    }
    RingElement get(uint32_t eps, uint32_t a, uint32_t b, uint32_t d) const {
        std::array<uint32_t, 4> key{eps, a, b, d};
        std::sort(key.begin() + 1, key.end());
        auto it = t_.find(key);
        return it == t_.end() ? RingElement::zero(ring_) : it->second;
    }
    bool is_zero() const { return t_.empty(); }
    const RingPtr& ring() const { return ring_; }

private:
    RingPtr ring_;
    std::map<std::array<uint32_t, 4>, RingElement> t_;
};

// gamma_{I a b} = -G^{I-n}_{ab};  gamma_{a b d} = sum_eps p_eps f^eps_{abd}.
inline SymplecticConnection build_induced(const LinearConnection& G, const SymmetricCubic& f,
                                          ConnectionShape shape = ConnectionShape::generic_induced) {
    const RingPtr& ring = G.ring();
    uint32_t n = ring->n();
    SymplecticConnection conn(ring, shape);
    for (uint32_t e = 1; e <= n; ++e)
        for (uint32_t a = 1; a <= n; ++a)
            for (uint32_t b = a; b <= n; ++b) conn.set(e + n, a, b, -G.get(e, a, b));
    for (uint32_t a = 1; a <= n; ++a)
        for (uint32_t b = a; b <= n; ++b)
            for (uint32_t d = b; d <= n; ++d) {
                RingElement v = RingElement::zero(ring);
                for (uint32_t e = 1; e <= n; ++e)
                    v += RingElement::p_var(ring, e) * f.get(e, a, b, d);
                conn.set(a, b, d, v);
            }
    return conn;
}

inline SymplecticConnection build_special_atlas(const LinearConnection& G) {
    return build_induced(G, SymmetricCubic::zero(G.ring()), ConnectionShape::special_atlas);
}

// The f tensor of the metric-induced connection, read off the closed formula
// for gamma_{abd}.
inline SymmetricCubic riemannian_f(const LinearConnection& G) {
    const RingPtr& ring = G.ring();
    uint32_t n = ring->n();
    SymmetricCubic f(ring);
    GaussianRational third(1, 3);
    for (uint32_t e = 1; e <= n; ++e)
        for (uint32_t a = 1; a <= n; ++a)
            for (uint32_t b = a; b <= n; ++b)
                for (uint32_t d = b; d <= n; ++d) {
                    RingElement v = G.get(e, b, d).derive(a) + G.get(e, a, b).derive(d) +
                                    G.get(e, a, d).derive(b);
                    for (uint32_t u = 1; u <= n; ++u) {
                        RingElement quad = G.get(e, u, a) * G.get(u, b, d) +
                                           G.get(e, u, d) * G.get(u, a, b) +
                                           G.get(e, u, b) * G.get(u, a, d);
                        v -= quad.scaled(GaussianRational(2));
                    }
                    f.set(e, a, b, d, v.scaled(-third));
                }
    return f;
}

inline SymplecticConnection build_riemannian_induced(const LinearConnection& G) {
    return build_induced(G, riemannian_f(G), ConnectionShape::riemannian);
}

// Base-space Christoffel symbols of a metric with an exact inverse.
inline LinearConnection levi_civita(const BaseMetric& g) {
    if (!g.inverse_consistent())
        throw StructureError("metric inverse is missing or inexact");
    const RingPtr& ring = g.ring();
    uint32_t n = g.n();
    LinearConnection G(ring);
    GaussianRational half(1, 2);
    for (uint32_t i = 1; i <= n; ++i)
        for (uint32_t j = 1; j <= n; ++j)
            for (uint32_t k = j; k <= n; ++k) {
                RingElement sum = RingElement::zero(ring);
                for (uint32_t l = 1; l <= n; ++l)
                    sum += g.inv(i, l) *
                           (g.get(l, k).derive(j) + g.get(l, j).derive(k) - g.get(j, k).derive(l));
                G.set(i, j, k, sum.scaled(half));
            }
    return G;
}

// Lowered affine-connection coefficients on phase space: any table symmetric
// in the last two indices.  Used by the metric pipeline before
// symmetrization.
class LoweredAffine {
public:
    explicit LoweredAffine(RingPtr ring) : ring_(std::move(ring)) {}
    void set(uint32_t i, uint32_t j, uint32_t k, const RingElement& v) {
        std::array<uint32_t, 3> key{i, std::min(j, k), std::max(j, k)};
        if (v.is_zero())
            t_.erase(key);
        else
            t_[key] = v;
    }
    RingElement get(uint32_t i, uint32_t j, uint32_t k) const {
        auto it = t_.find({i, std::min(j, k), std::max(j, k)});
        return it == t_.end() ? RingElement::zero(ring_) : it->second;
    }
    const RingPtr& ring() const { return ring_; }
    uint32_t n() const { return ring_->n(); }

private:
    RingPtr ring_;
    std::map<std::array<uint32_t, 3>, RingElement> t_;
};

// Levi-Civita connection of the phase-space metric with the base connection
// in the spatial block and identity off-diagonal blocks, lowered with omega.
inline LoweredAffine phase_space_levi_civita_lowered(const LinearConnection& G) {
    const RingPtr& ring = G.ring();
    uint32_t n = ring->n();
    uint32_t d = 2 * n;
    // metric entries
    auto metric = [&](uint32_t j, uint32_t k) -> RingElement {
        if (j <= n && k <= n) {
            RingElement v = RingElement::zero(ring);
            for (uint32_t e = 1; e <= n; ++e)
                v += RingElement::p_var(ring, e) * G.get(e, j, k);
            return v.scaled(GaussianRational(-2));
        }
        if (j <= n && k > n) return j == k - n ? RingElement::one(ring) : RingElement::zero(ring);
        if (j > n && k <= n) return k == j - n ? RingElement::one(ring) : RingElement::zero(ring);
        return RingElement::zero(ring);
    };
    auto metric_inv = [&](uint32_t j, uint32_t k) -> RingElement {
        if (j <= n && k <= n) return RingElement::zero(ring);
        if (j > n && k > n) {
            RingElement v = RingElement::zero(ring);
            for (uint32_t e = 1; e <= n; ++e)
                v += RingElement::p_var(ring, e) * G.get(e, j - n, k - n);
            return v.scaled(GaussianRational(2));
        }
        uint32_t a = std::min(j, k), b = std::max(j, k);
        return b == a + n ? RingElement::one(ring) : RingElement::zero(ring);
    };
    GaussianRational half(1, 2);
    LoweredAffine out(ring);
    for (uint32_t i = 1; i <= d; ++i)
        for (uint32_t j = 1; j <= d; ++j)
            for (uint32_t k = j; k <= d; ++k) {
                RingElement raised = RingElement::zero(ring);
                // christoffel with the phase-space metric, then lower with omega
                for (uint32_t up = 1; up <= d; ++up) {
                    int w = omega_lower(i, up, n);
                    if (w == 0) continue;
                    RingElement sum = RingElement::zero(ring);
                    for (uint32_t l = 1; l <= d; ++l) {
                        RingElement gil = metric_inv(up, l);
                        if (gil.is_zero()) continue;
                        sum += gil * (metric(l, k).derive(j) + metric(l, j).derive(k) -
                                      metric(j, k).derive(l));
                    }
                    sum = sum.scaled(half);
                    raised += w > 0 ? sum : -sum;
                }
                out.set(i, j, k, raised);
            }
    return out;
}

// gamma_{ijk} = (Gt_{ijk} + Gt_{jik} + Gt_{kij}) / 3.  The output must come
// out totally symmetric, which requires the input to be symmetric in its
// last two indices.
inline SymplecticConnection symmetrize_connection(const LoweredAffine& Gt,
                                                  ConnectionShape shape) {
    const RingPtr& ring = Gt.ring();
    uint32_t d = 2 * Gt.n();
    SymplecticConnection out(ring, shape);
    GaussianRational third(1, 3);
    for (uint32_t i = 1; i <= d; ++i)
        for (uint32_t j = i; j <= d; ++j)
            for (uint32_t k = j; k <= d; ++k) {
                RingElement v = Gt.get(i, j, k) + Gt.get(j, i, k) + Gt.get(k, i, j);
                out.set(i, j, k, v.scaled(third));
            }
    // total symmetry of the sorted store is by construction; verify the
    // cyclic average really symmetrized the input
    for (uint32_t i = 1; i <= d; ++i)
        for (uint32_t j = i; j <= d; ++j)
            for (uint32_t k = j; k <= d; ++k) {
                RingElement v = Gt.get(i, j, k) + Gt.get(j, i, k) + Gt.get(k, i, j);
                RingElement w = Gt.get(j, i, k) + Gt.get(i, j, k) + Gt.get(k, j, i);
                if (v != w)
                    throw StructureError("symmetrization input lacks last-index symmetry");
            }
    return out;
}

// Full four-index curvature table; zero entries omitted.
using CurvatureTable = std::map<std::array<uint32_t, 4>, RingElement>;

// Lowered symplectic curvature with the storage-safe symmetries
// K_{ijkl} = K_{jikl} = -K_{ijlk} normalized into the key.
class CurvatureTensor {
public:
    CurvatureTensor(RingPtr ring, uint32_t n) : ring_(std::move(ring)), n_(n) {}

    const RingPtr& ring() const { return ring_; }
    uint32_t n() const { return n_; }

    void set_canonical(uint32_t i, uint32_t j, uint32_t k, uint32_t l, const RingElement& v) {
        if (!(i <= j && k < l)) throw InternalError("non-canonical curvature key");
        if (v.is_zero())
            t_.erase({i, j, k, l});
        else
            t_[{i, j, k, l}] = v;
    }

    RingElement get(uint32_t i, uint32_t j, uint32_t k, uint32_t l) const {
        if (k == l) return RingElement::zero(ring_);
        bool neg = k > l;
        if (neg) std::swap(k, l);
        if (i > j) std::swap(i, j);
        auto it = t_.find({i, j, k, l});
        if (it == t_.end()) return RingElement::zero(ring_);
        return neg ? -it->second : it->second;
    }

    const std::map<std::array<uint32_t, 4>, RingElement>& canonical_table() const { return t_; }

    // Expansion to a raw table over all index positions (validators operate
    // on raw tables so corrupted data is representable).
    CurvatureTable full() const {
        CurvatureTable out;
        uint32_t d = 2 * n_;
        for (uint32_t i = 1; i <= d; ++i)
            for (uint32_t j = 1; j <= d; ++j)
                for (uint32_t k = 1; k <= d; ++k)
                    for (uint32_t l = 1; l <= d; ++l) {
                        RingElement v = get(i, j, k, l);
                        if (!v.is_zero()) out[{i, j, k, l}] = v;
                    }
        return out;
    }

private:
    RingPtr ring_;
    uint32_t n_;
    std::map<std::array<uint32_t, 4>, RingElement> t_;
};

// K_{ijkl} = d_k gamma_{ijl} - d_l gamma_{ijk}
//          + omega^{st} gamma_{tik} gamma_{sjl} - omega^{st} gamma_{til} gamma_{sjk}.
// The kernel parameter flips the omega contraction; the default is the
// convention under which the metric-pipeline identities hold.
inline CurvatureTensor curvature(const SymplecticConnection& gamma, int kernel = +1) {
    const RingPtr& ring = gamma.ring();
    uint32_t n = gamma.n(), d = 2 * n;
    CurvatureTensor K(ring, n);
    for (uint32_t i = 1; i <= d; ++i)
        for (uint32_t j = i; j <= d; ++j)
            for (uint32_t k = 1; k <= d; ++k)
                for (uint32_t l = k + 1; l <= d; ++l) {
                    RingElement v = gamma.get(i, j, l).derive(k) - gamma.get(i, j, k).derive(l);
                    for (uint32_t s = 1; s <= n; ++s) {
                        // omega^{s, s+n} = kernel, omega^{s+n, s} = -kernel
                        RingElement quad =
                            gamma.get(s + n, i, k) * gamma.get(s, j, l) -
                            gamma.get(s + n, i, l) * gamma.get(s, j, k) -
                            gamma.get(s, i, k) * gamma.get(s + n, j, l) +
                            gamma.get(s, i, l) * gamma.get(s + n, j, k);
                        v += kernel > 0 ? quad : -quad;
                    }
                    K.set_canonical(i, j, k, l, v);
                }
    return K;
}

namespace detail {

inline RingElement table_get(const CurvatureTable& t, const RingPtr& ring,
                             std::array<uint32_t, 4> key) {
    auto it = t.find(key);
    return it == t.end() ? RingElement::zero(ring) : it->second;
}

// Raised coefficients gamma^s_{im} = omega^{ts} gamma_{tim}.
inline RingElement raised_gamma(const SymplecticConnection& g, uint32_t s, uint32_t i,
                                uint32_t m) {
    uint32_t n = g.n();
    if (s <= n) return -g.get(s + n, i, m);
    return g.get(s - n, i, m);
}

// Covariant derivative of a (0,4) tensor with respect to the symplectic
// connection.
inline RingElement covariant_derivative4(const CurvatureTable& K, const SymplecticConnection& g,
                                         std::array<uint32_t, 4> idx, uint32_t m) {
    const RingPtr& ring = g.ring();
    uint32_t d = 2 * g.n();
    RingElement v = table_get(K, ring, idx).derive(m);
    for (uint32_t slot = 0; slot < 4; ++slot)
        for (uint32_t s = 1; s <= d; ++s) {
            auto sub = idx;
            sub[slot] = s;
            RingElement ks = table_get(K, ring, sub);
            if (ks.is_zero()) continue;
            v -= raised_gamma(g, s, idx[slot], m) * ks;
        }
    return v;
}

inline std::string tuple_str(std::array<uint32_t, 4> t) {
    return "(" + std::to_string(t[0]) + "," + std::to_string(t[1]) + "," + std::to_string(t[2]) +
           "," + std::to_string(t[3]) + ")";
}

} // namespace detail

// Symmetry, cyclic, four-cycle and covariant Bianchi checks on a raw table.
inline CheckReport validate_curvature(const CurvatureTable& K, const SymplecticConnection& g) {
    const RingPtr& ring = g.ring();
    uint32_t d = 2 * g.n();
    CheckReport rep;
    auto get = [&](uint32_t i, uint32_t j, uint32_t k, uint32_t l) {
        return detail::table_get(K, ring, {i, j, k, l});
    };

    bool ok = true;
    std::string off;
    for (uint32_t i = 1; i <= d && ok; ++i)
        for (uint32_t j = 1; j <= d && ok; ++j)
            for (uint32_t k = 1; k <= d && ok; ++k)
                for (uint32_t l = 1; l <= d && ok; ++l)
                    if (!(get(i, j, k, l) + get(i, j, l, k)).is_zero()) {
                        ok = false;
                        off = detail::tuple_str({i, j, k, l});
                    }
    rep.add("antisymmetry in the last index pair", ok, off);

    ok = true;
    off.clear();
    for (uint32_t i = 1; i <= d && ok; ++i)
        for (uint32_t j = i; j <= d && ok; ++j)
            for (uint32_t k = 1; k <= d && ok; ++k)
                for (uint32_t l = 1; l <= d && ok; ++l)
                    if (get(i, j, k, l) != get(j, i, k, l)) {
                        ok = false;
                        off = detail::tuple_str({i, j, k, l});
                    }
    rep.add("symmetry in the first index pair", ok, off);

    ok = true;
    off.clear();
    for (uint32_t i = 1; i <= d && ok; ++i)
        for (uint32_t j = 1; j <= d && ok; ++j)
            for (uint32_t k = 1; k <= d && ok; ++k)
                for (uint32_t l = 1; l <= d && ok; ++l)
                    if (!(get(i, j, k, l) + get(i, l, j, k) + get(i, k, l, j)).is_zero()) {
                        ok = false;
                        off = detail::tuple_str({i, j, k, l});
                    }
    rep.add("cyclic identity", ok, off);

    ok = true;
    off.clear();
    for (uint32_t i = 1; i <= d && ok; ++i)
        for (uint32_t j = 1; j <= d && ok; ++j)
            for (uint32_t k = 1; k <= d && ok; ++k)
                for (uint32_t l = 1; l <= d && ok; ++l)
                    if (!(get(i, j, k, l) + get(l, i, j, k) + get(k, l, i, j) + get(j, k, l, i))
                             .is_zero()) {
                        ok = false;
                        off = detail::tuple_str({i, j, k, l});
                    }
    rep.add("four-term cycle identity", ok, off);

    ok = true;
    off.clear();
    for (uint32_t i = 1; i <= d && ok; ++i)
        for (uint32_t j = i; j <= d && ok; ++j)
            for (uint32_t k = 1; k <= d && ok; ++k)
                for (uint32_t l = k + 1; l <= d && ok; ++l)
                    for (uint32_t m = 1; m <= d && ok; ++m) {
                        RingElement s = detail::covariant_derivative4(K, g, {i, j, k, l}, m) +
                                        detail::covariant_derivative4(K, g, {i, j, m, k}, l) +
                                        detail::covariant_derivative4(K, g, {i, j, l, m}, k);
                        if (!s.is_zero()) {
                            ok = false;
                            off = detail::tuple_str({i, j, k, l}) + ";m=" + std::to_string(m);
                        }
                    }
    rep.add("covariant Bianchi identity", ok, off);
    return rep;
}

// Symplectic Ricci tensor K_{ij} = omega^{ls} K_{lisj}.
struct RicciResult {
    std::map<std::array<uint32_t, 2>, RingElement> table; // zero entries omitted
    bool flat;
};

inline RicciResult ricci(const CurvatureTensor& K) {
    uint32_t n = K.n(), d = 2 * n;
    RicciResult out{{}, true};
    for (uint32_t i = 1; i <= d; ++i)
        for (uint32_t j = 1; j <= d; ++j) {
            RingElement v = RingElement::zero(K.ring());
            for (uint32_t a = 1; a <= n; ++a)
                v += K.get(a, i, a + n, j) - K.get(a + n, i, a, j);
            if (!v.is_zero()) {
                out.table[{i, j}] = v;
                out.flat = false;
            }
        }
    return out;
}

// Homogeneity of the connection with respect to the canonical vector field,
// checked through the two displayed coordinate conditions with fresh symbols
// for the vector components.
inline CheckReport check_homogeneity(const SymplecticConnection& gamma) {
    uint32_t n = gamma.n(), d = 2 * n;
    auto ext = Ring::make(n);
    const RingPtr& src = gamma.ring();
    for (uint32_t id = 0; id < src->function_count(); ++id)
        ext->declare_function(src->function_name(id));
    std::vector<RingElement> X, Y;
    for (uint32_t j = 1; j <= d; ++j)
        X.push_back(RingElement::fn_sym(ext, ext->declare_function("X" + std::to_string(j))));
    for (uint32_t j = 1; j <= d; ++j)
        Y.push_back(RingElement::fn_sym(ext, ext->declare_function("Y" + std::to_string(j))));

    auto raised = [&](uint32_t up, uint32_t j, uint32_t k) {
        return detail::raised_gamma(gamma, up, j, k).migrate(ext);
    };
    auto euler = [&](const RingElement& e) {
        RingElement v = RingElement::zero(ext);
        for (uint32_t a = 1; a <= n; ++a)
            v += RingElement::p_var(ext, a) * e.derive(n + a);
        return v;
    };

    CheckReport rep;
    bool ok = true;
    std::string off;
    for (uint32_t al = 1; al <= n && ok; ++al) {
        RingElement cond = RingElement::zero(ext);
        for (uint32_t j = 1; j <= d; ++j)
            for (uint32_t k = 1; k <= d; ++k) {
                RingElement g = raised(al, j, k);
                uint32_t mom = (j > n ? 1u : 0u) + (k > n ? 1u : 0u);
                RingElement coef = euler(g) + g.scaled(GaussianRational(static_cast<long>(mom)));
                cond += coef * X[j - 1] * Y[k - 1];
            }
        if (!cond.is_zero()) {
            ok = false;
            off = "spatial condition, upper index " + std::to_string(al);
        }
    }
    for (uint32_t I = n + 1; I <= d && ok; ++I) {
        RingElement cond = RingElement::zero(ext);
        for (uint32_t j = 1; j <= d; ++j)
            for (uint32_t k = 1; k <= d; ++k) {
                RingElement g = raised(I, j, k);
                long w = 0;
                if (j <= n && k <= n) w = -1;
                if (j > n && k > n) w = 1;
                RingElement coef = euler(g) + g.scaled(GaussianRational(w));
                cond += coef * X[j - 1] * Y[k - 1];
            }
        if (!cond.is_zero()) {
            ok = false;
            off = "momentum condition, upper index " + std::to_string(I);
        }
    }
    rep.add("homogeneity under the canonical vector field", ok, off);
    return rep;
}

// Invertible linear point transformation Q = A q, P = A^{-T} p.
class PointTransform {
public:
    PointTransform(uint32_t n, std::vector<std::vector<GaussianRational>> a)
        : n_(n), a_(std::move(a)) {
        if (a_.size() != n_) throw StructureError("transform matrix has wrong size");
        for (auto& row : a_)
            if (row.size() != n_) throw StructureError("transform matrix has wrong size");
        inv_ = invert(a_);
    }
    static PointTransform identity(uint32_t n) {
        std::vector<std::vector<GaussianRational>> a(n, std::vector<GaussianRational>(n, 0));
        for (uint32_t i = 0; i < n; ++i) a[i][i] = 1;
        return PointTransform(n, std::move(a));
    }
    uint32_t n() const { return n_; }
    const GaussianRational& a(uint32_t i, uint32_t j) const { return a_[i - 1][j - 1]; }
    const GaussianRational& ainv(uint32_t i, uint32_t j) const { return inv_[i - 1][j - 1]; }

private:
    static std::vector<std::vector<GaussianRational>> invert(
        std::vector<std::vector<GaussianRational>> m) {
        size_t n = m.size();
        std::vector<std::vector<GaussianRational>> inv(n, std::vector<GaussianRational>(n, 0));
        for (size_t i = 0; i < n; ++i) inv[i][i] = 1;
        for (size_t col = 0; col < n; ++col) {
            size_t piv = col;
            while (piv < n && m[piv][col].is_zero()) ++piv;
            if (piv == n) throw StructureError("transform matrix is singular");
            std::swap(m[piv], m[col]);
            std::swap(inv[piv], inv[col]);
            GaussianRational s = GaussianRational(1) / m[col][col];
            for (size_t j = 0; j < n; ++j) {
                m[col][j] *= s;
                inv[col][j] *= s;
            }
            for (size_t row = 0; row < n; ++row) {
                if (row == col || m[row][col].is_zero()) continue;
                GaussianRational f = m[row][col];
                for (size_t j = 0; j < n; ++j) {
                    m[row][j] -= f * m[col][j];
                    inv[row][j] -= f * inv[col][j];
                }
            }
        }
        return inv;
    }
    uint32_t n_;
    std::vector<std::vector<GaussianRational>> a_, inv_;
};

// Tensorial transform of the lowered coefficients under a linear point
// transformation; the inhomogeneous second-derivative terms vanish.
inline SymplecticConnection transform_linear(const SymplecticConnection& gamma,
                                             const PointTransform& A) {
    const RingPtr& ring = gamma.ring();
    uint32_t n = gamma.n(), d = 2 * n;
    if (A.n() != n) throw StructureError("transform dimension mismatch");
    // substitution q_old = A^-1 q_new, p_old = A^T p_new
    std::vector<RingElement> qs, ps;
    for (uint32_t a = 1; a <= n; ++a) {
        RingElement q = RingElement::zero(ring), p = RingElement::zero(ring);
        for (uint32_t b = 1; b <= n; ++b) {
            q += RingElement::q_var(ring, b).scaled(A.ainv(a, b));
            p += RingElement::p_var(ring, b).scaled(A.a(b, a));
        }
        qs.push_back(q);
        ps.push_back(p);
    }
    // jacobian dx_old[l] / dX_new[i]
    auto jac = [&](uint32_t l, uint32_t i) -> GaussianRational {
        if (l <= n && i <= n) return A.ainv(l, i);
        if (l > n && i > n) return A.a(i - n, l - n);
        return GaussianRational(0);
    };
    SymplecticConnection out(ring, gamma.shape());
    for (uint32_t i = 1; i <= d; ++i)
        for (uint32_t j = i; j <= d; ++j)
            for (uint32_t k = j; k <= d; ++k) {
                RingElement v = RingElement::zero(ring);
                for (const auto& [key, g] : gamma.table()) {
                    // sum over distinct permutations of the stored sorted triple
                    std::array<uint32_t, 3> p = key;
                    GaussianRational w(0);
                    std::sort(p.begin(), p.end());
                    do {
                        w += jac(p[0], i) * jac(p[1], j) * jac(p[2], k);
                    } while (std::next_permutation(p.begin(), p.end()));
                    if (!w.is_zero()) v += g.substitute_linear(qs, ps).scaled(w);
                }
                out.set(i, j, k, v);
            }
    return out;
}

// Tensorial transform of a curvature table (for the commuting-diagram test).
inline CurvatureTable transform_curvature(const CurvatureTensor& K, const PointTransform& A) {
    const RingPtr& ring = K.ring();
    uint32_t n = K.n(), d = 2 * n;
    std::vector<RingElement> qs, ps;
    for (uint32_t a = 1; a <= n; ++a) {
        RingElement q = RingElement::zero(ring), p = RingElement::zero(ring);
        for (uint32_t b = 1; b <= n; ++b) {
            q += RingElement::q_var(ring, b).scaled(A.ainv(a, b));
            p += RingElement::p_var(ring, b).scaled(A.a(b, a));
        }
        qs.push_back(q);
        ps.push_back(p);
    }
    auto jac = [&](uint32_t l, uint32_t i) -> GaussianRational {
        if (l <= n && i <= n) return A.ainv(l, i);
        if (l > n && i > n) return A.a(i - n, l - n);
        return GaussianRational(0);
    };
    CurvatureTable out;
    for (uint32_t i = 1; i <= d; ++i)
        for (uint32_t j = 1; j <= d; ++j)
            for (uint32_t k = 1; k <= d; ++k)
                for (uint32_t l = 1; l <= d; ++l) {
                    RingElement v = RingElement::zero(ring);
                    for (const auto& [key, g] : K.canonical_table()) {
                        // expand the canonical entry over its symmetry orbit
                        struct Variant {
                            std::array<uint32_t, 4> idx;
                            int sgn;
                        };
                        const Variant orbit[4] = {
                            {{key[0], key[1], key[2], key[3]}, +1},
                            {{key[1], key[0], key[2], key[3]}, +1},
                            {{key[0], key[1], key[3], key[2]}, -1},
                            {{key[1], key[0], key[3], key[2]}, -1},
                        };
                        std::map<std::array<uint32_t, 4>, int> seen;
                        for (const auto& o : orbit) {
                            if (!seen.emplace(o.idx, o.sgn).second) continue;
                            GaussianRational w = jac(o.idx[0], i) * jac(o.idx[1], j) *
                                                 jac(o.idx[2], k) * jac(o.idx[3], l);
                            if (o.sgn < 0) w = -w;
                            if (!w.is_zero()) v += g.substitute_linear(qs, ps).scaled(w);
                        }
                    }
                    if (!v.is_zero()) out[{i, j, k, l}] = v;
                }
    return out;
}

// Recompute the spatial coefficients and the dependent curvature classes of a
// metric-induced connection from its reduced data, and check the cyclic
// identity that characterizes it.
inline CheckReport reconstruct_from_base(const SymplecticConnection& gamma,
                                         const CurvatureTensor& K) {
    CheckReport rep;
    if (gamma.shape() != ConnectionShape::riemannian) {
        rep.add("reduced-data reconstruction", false,
                "input connection does not have the metric-induced shape");
        return rep;
    }
    const RingPtr& ring = gamma.ring();
    uint32_t n = gamma.n();
    GaussianRational third(1, 3);

    // gamma_{abd} from the mixed class and its first derivatives
    bool ok = true;
    std::string off;
    for (uint32_t a = 1; a <= n && ok; ++a)
        for (uint32_t b = a; b <= n && ok; ++b)
            for (uint32_t dd = b; dd <= n && ok; ++dd) {
                RingElement v = RingElement::zero(ring);
                for (uint32_t e = 1; e <= n; ++e) {
                    RingElement s = gamma.get(e + n, b, dd).derive(a) +
                                    gamma.get(e + n, a, b).derive(dd) +
                                    gamma.get(e + n, a, dd).derive(b);
                    for (uint32_t u = 1; u <= n; ++u)
                        s += (gamma.get(e + n, u, a) * gamma.get(u + n, b, dd) +
                              gamma.get(e + n, u, dd) * gamma.get(u + n, a, b) +
                              gamma.get(e + n, u, b) * gamma.get(u + n, a, dd))
                                 .scaled(GaussianRational(2));
                    v += RingElement::p_var(ring, e) * s;
                }
                if (v.scaled(third) != gamma.get(a, b, dd)) {
                    ok = false;
                    off = "gamma(" + std::to_string(a) + "," + std::to_string(b) + "," +
                          std::to_string(dd) + ")";
                }
            }
    rep.add("spatial coefficients from the mixed class", ok, off);

    // K_{abg,d+n} = -(K_{d+n,abg} + K_{d+n,bag}) / 3
    ok = true;
    off.clear();
    for (uint32_t a = 1; a <= n && ok; ++a)
        for (uint32_t b = 1; b <= n && ok; ++b)
            for (uint32_t g = 1; g <= n && ok; ++g)
                for (uint32_t dd = 1; dd <= n && ok; ++dd) {
                    RingElement want =
                        -(K.get(dd + n, a, b, g) + K.get(dd + n, b, a, g)).scaled(third);
                    if (K.get(a, b, g, dd + n) != want) {
                        ok = false;
                        off = detail::tuple_str({a, b, g, dd + n});
                    }
                }
    rep.add("mixed curvature class from the momentum class", ok, off);

    // The all-spatial class from reduced data: momentum slope (covariant
    // Bianchi consequence) with every mixed-class entry replaced by its
    // momentum-class reduction, so only q-only classes and the inducing
    // coefficients enter.
    auto mixed = [&](uint32_t a, uint32_t b, uint32_t g, uint32_t dd) {
        return -(K.get(dd + n, a, b, g) + K.get(dd + n, b, a, g)).scaled(third);
    };
    ok = true;
    off.clear();
    for (uint32_t a = 1; a <= n && ok; ++a)
        for (uint32_t b = 1; b <= n && ok; ++b)
            for (uint32_t g = 1; g <= n && ok; ++g)
                for (uint32_t dd = 1; dd <= n && ok; ++dd) {
                    RingElement acc = RingElement::zero(ring);
                    for (uint32_t e = 1; e <= n; ++e) {
                        RingElement s = mixed(a, b, g, e).derive(dd) - mixed(a, b, dd, e).derive(g);
                        for (uint32_t u = 1; u <= n; ++u) {
                            s += gamma.get(e + n, u, a) * (mixed(b, dd, g, u) - mixed(b, g, dd, u));
                            s += gamma.get(e + n, u, b) * (mixed(a, dd, g, u) - mixed(a, g, dd, u));
                            s += gamma.get(u + n, a, dd) * mixed(u, b, g, e) +
                                 gamma.get(u + n, b, dd) * mixed(u, a, g, e);
                            s -= gamma.get(u + n, a, g) * mixed(u, b, dd, e) +
                                 gamma.get(u + n, b, g) * mixed(u, a, dd, e);
                        }
                        acc += RingElement::p_var(ring, e) * s;
                    }
                    if (acc != K.get(a, b, g, dd)) {
                        ok = false;
                        off = detail::tuple_str({a, b, g, dd});
                    }
                }
    rep.add("spatial curvature class from reduced data", ok, off);

    // cyclic identity special to the metric-induced connection
    ok = true;
    off.clear();
    for (uint32_t a = 1; a <= n && ok; ++a)
        for (uint32_t b = 1; b <= n && ok; ++b)
            for (uint32_t g = 1; g <= n && ok; ++g)
                for (uint32_t dd = 1; dd <= n && ok; ++dd) {
                    RingElement s = K.get(a, b, g, dd + n) + K.get(g, a, b, dd + n) +
                                    K.get(b, g, a, dd + n);
                    if (!s.is_zero()) {
                        ok = false;
                        off = detail::tuple_str({a, b, g, dd + n});
                    }
                }
    rep.add("cyclic identity on the mixed class", ok, off);

    ok = true;
    off.clear();
    for (uint32_t a = 1; a <= n && ok; ++a)
        for (uint32_t b = 1; b <= n && ok; ++b)
            if (!K.get(a, a, a, b + n).is_zero()) {
                ok = false;
                off = detail::tuple_str({a, a, a, b + n});
            }
    rep.add("repeated-index corollary", ok, off);
    return rep;
}

// Momentum slope of the all-spatial class recovered from the covariant
// Bianchi identity; holds for every induced connection.
inline CheckReport reconstruct_p_slope(const SymplecticConnection& gamma,
                                       const CurvatureTensor& K) {
    const RingPtr& ring = gamma.ring();
    uint32_t n = gamma.n();
    CheckReport rep;
    bool ok = true;
    std::string off;
    for (uint32_t a = 1; a <= n && ok; ++a)
        for (uint32_t b = 1; b <= n && ok; ++b)
            for (uint32_t g = 1; g <= n && ok; ++g)
                for (uint32_t dd = 1; dd <= n && ok; ++dd)
                    for (uint32_t e = 1; e <= n && ok; ++e) {
                        RingElement rhs = K.get(a, b, g, e + n).derive(dd) -
                                          K.get(a, b, dd, e + n).derive(g);
                        for (uint32_t u = 1; u <= n; ++u) {
                            rhs += gamma.get(e + n, u, a) *
                                   (K.get(b, dd, g, u + n) - K.get(b, g, dd, u + n));
                            rhs += gamma.get(e + n, u, b) *
                                   (K.get(a, dd, g, u + n) - K.get(a, g, dd, u + n));
                            rhs += gamma.get(u + n, a, dd) * K.get(u, b, g, e + n) +
                                   gamma.get(u + n, b, dd) * K.get(u, a, g, e + n);
                            rhs -= gamma.get(u + n, a, g) * K.get(u, b, dd, e + n) +
                                   gamma.get(u + n, b, g) * K.get(u, a, dd, e + n);
                        }
                        if (K.get(a, b, g, dd).derive(n + e) != rhs) {
                            ok = false;
                            off = detail::tuple_str({a, b, g, dd}) + ";e=" + std::to_string(e);
                        }
                    }
    rep.add("momentum slope of the spatial class from Bianchi", ok, off);
    return rep;
}

} // namespace fedq
