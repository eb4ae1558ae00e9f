#pragma once

#include <cstdint>
#include <map>
#include <random>
#include <set>
#include <string>
#include <tuple>
#include <vector>

#include "fedq/geometry.hpp"
#include "fedq/report.hpp"
#include "fedq/weyl.hpp"

namespace fedq {

using Multi = std::vector<uint32_t>; // spatial y multi-index, length n

namespace detail {

inline uint32_t multi_total(const Multi& m) { return std::accumulate(m.begin(), m.end(), 0u); }

inline uint32_t max_support(const Multi& m) {
    for (uint32_t c = static_cast<uint32_t>(m.size()); c > 0; --c)
        if (m[c - 1] > 0) return c;
    return 0;
}

inline void compositions_rec(uint32_t slots, uint32_t total, Multi& cur,
                             std::vector<Multi>& out) {
    if (slots == 1) {
        cur.push_back(total);
        out.push_back(cur);
        cur.pop_back();
        return;
    }
    for (uint32_t v = 0; v <= total; ++v) {
        cur.push_back(v);
        compositions_rec(slots - 1, total - v, cur, out);
        cur.pop_back();
    }
}

// Every multi-index of the given total.
inline std::vector<Multi> compositions(uint32_t n, uint32_t total) {
    std::vector<Multi> out;
    Multi cur;
    compositions_rec(n, total, cur, out);
    return out;
}

// Every g <= bound (pointwise) with total in [lo, hi].
template <typename F>
void for_each_sub_multi(const Multi& bound, uint32_t lo, uint32_t hi, F&& f) {
    Multi g(bound.size(), 0);
    for (;;) {
        uint32_t t = multi_total(g);
        if (t >= lo && t <= hi) f(g);
        size_t i = 0;
        while (i < g.size()) {
            if (g[i] < bound[i]) {
                ++g[i];
                break;
            }
            g[i] = 0;
            ++i;
        }
        if (i == g.size()) return;
    }
}

inline Multi plus_e(Multi m, uint32_t c) {
    m[c - 1] += 1;
    return m;
}
inline Multi minus_e(Multi m, uint32_t c) {
    if (m[c - 1] == 0) throw InternalError("multi-index underflow");
    m[c - 1] -= 1;
    return m;
}

} // namespace detail

// Classified coefficient tables of the two-form R_{gamma+r}[z]:
//   kind 1: R[0|i|0|a, b+n]          (y^i dq^a ^ dp_b),      |i| = z
//   kind 2: R[0|i|tau|a, b], a < b   (y^i y^{tau+n} dq^a^dq^b), |i| = z-1
//   kind 3: R[ups|i|0|a, b], a < b   (p_ups y^i dq^a^dq^b),  |i| = z
// Third-kind entries are stored only for the independent combinations,
// max_support(i) <= b; the rest follow from the dependency relation.
struct RTables {
    std::map<std::tuple<Multi, uint32_t, uint32_t>, RingElement> k1;            // (i, a, b)
    std::map<std::tuple<Multi, uint32_t, uint32_t, uint32_t>, RingElement> k2;  // (i, tau, a, b)
    std::map<std::tuple<uint32_t, Multi, uint32_t, uint32_t>, RingElement> k3;  // (ups, i, a, b)
};

// Classified coefficient tables of the one-form r[z]:
//   kind 1: r[0|i|0|a+n]   (y^i dp_a),            |i| = z
//   kind 2: r[0|i|tau|a]   (y^i y^{tau+n} dq^a),  |i| = z-1
//   kind 3: r[ups|i|0|a]   (p_ups y^i dq^a),      |i| = z
struct rTables {
    std::map<std::tuple<Multi, uint32_t>, RingElement> k1;                      // (i, a)
    std::map<std::tuple<Multi, uint32_t, uint32_t>, RingElement> k2;            // (i, tau, a)
    std::map<std::tuple<uint32_t, Multi, uint32_t>, RingElement> k3;            // (ups, i, a)
};

namespace detail {

template <typename M, typename K>
RingElement tget(const M& m, const RingPtr& ring, const K& key) {
    auto it = m.find(key);
    return it == m.end() ? RingElement::zero(ring) : it->second;
}

template <typename M, typename K>
void tput(M& m, const K& key, const RingElement& v) {
    if (!v.is_zero()) m[key] = v;
}

} // namespace detail

// Classified brackets of the connection one-form gamma = gamma_{ijk} y^i y^j dx^k / 2.
// Values carry the monomial multiplicities of the three-kind listing.
struct GammaBrackets {
    const SymplecticConnection* conn;

    // gamma[0|j|0|b+n]: coefficient of y^j dp_b, |j| = 2.
    RingElement dp(const Multi& j, uint32_t b) const {
        uint32_t n = conn->n();
        uint32_t a1 = 0, a2 = 0;
        for (uint32_t c = 1; c <= n; ++c)
            for (uint32_t k = 0; k < j[c - 1]; ++k) (a1 == 0 ? a1 : a2) = c;
        RingElement g = conn->get(b + n, a1, a2);
        return a1 == a2 ? g.scaled(GaussianRational(1, 2)) : g;
    }
    // gamma[0|e_c|tau|a]: coefficient of y^c y^{tau+n} dq^a.
    RingElement mixed(uint32_t c, uint32_t tau, uint32_t a) const {
        return conn->get(tau + conn->n(), c, a);
    }
    // gamma[ups|j|0|e]: coefficient of p_ups y^j dq^e, |j| = 2.
    RingElement momentum(uint32_t ups, const Multi& j, uint32_t e) const {
        uint32_t n = conn->n();
        uint32_t a1 = 0, a2 = 0;
        for (uint32_t c = 1; c <= n; ++c)
            for (uint32_t k = 0; k < j[c - 1]; ++k) (a1 == 0 ? a1 : a2) = c;
        RingElement g = conn->get(a1, a2, e).derive(n + ups);
        return a1 == a2 ? g.scaled(GaussianRational(1, 2)) : g;
    }
};

enum class AbelianMode { generic, induced_fast };

struct AbelianState {
    RingPtr ring;
    uint32_t n = 0;
    uint32_t Z = 0;
    AbelianMode mode = AbelianMode::generic;
    SymplecticConnection conn;
    WeylSeries gamma_form;              // degree-2 connection one-form
    std::map<uint32_t, WeylSeries> r;   // degree -> one-form, 3..Z
    std::map<uint32_t, WeylSeries> R;   // degree -> two-form, 2..Z
    std::map<uint32_t, rTables> rt;
    std::map<uint32_t, RTables> Rt;

    explicit AbelianState(SymplecticConnection c)
        : ring(c.ring()), n(c.n()), conn(std::move(c)), gamma_form(ring, 0) {}

    GammaBrackets gamma_brackets() const { return GammaBrackets{&conn}; }

    WeylSeries r_total() const {
        WeylSeries out(ring, Z);
        for (const auto& [z, s] : r) out += s;
        return out;
    }
    WeylSeries R_total() const {
        WeylSeries out(ring, Z);
        for (const auto& [z, s] : R) out += s;
        return out;
    }
};

// The one-form gamma_{ijk} y^i y^j dx^k / 2 of a symplectic connection.
inline WeylSeries gamma_one_form(const SymplecticConnection& conn, uint32_t cap) {
    const RingPtr& ring = conn.ring();
    uint32_t d = conn.dim();
    WeylSeries out(ring, cap);
    GaussianRational half(1, 2);
    for (uint32_t i = 1; i <= d; ++i)
        for (uint32_t j = 1; j <= d; ++j)
            for (uint32_t k = 1; k <= d; ++k) {
                RingElement g = conn.get(i, j, k);
                if (g.is_zero()) continue;
                WeylKey key;
                key.k = 0;
                key.y.assign(d, 0);
                key.y[i - 1] += 1;
                key.y[j - 1] += 1;
                key.form = FormFactor::dx(static_cast<uint8_t>(k));
                out.add(key, g.scaled(half));
            }
    return out;
}

// R_gamma = d gamma + (i/hbar) gamma o gamma; homogeneous of degree 2.  The
// t = 0 part of the square is a vanishing wedge, so the product starts at
// t = 1.
inline WeylSeries curvature_two_form_series(const WeylSeries& gamma_form) {
    uint32_t cap = gamma_form.cap();
    WeylSeries prod =
        circ(gamma_form.with_cap(cap + 4), gamma_form.with_cap(cap + 4), kKernelSign, 1);
    WeylSeries out = exterior_d(gamma_form) + i_over_hbar(prod).with_cap(cap);
    return out;
}

// ---- classification -------------------------------------------------------

// Split a coefficient into its p-free part and its p_ups-linear slices.
inline void split_momentum_linear(const RingElement& c, RingElement& pfree,
                                  std::vector<RingElement>& slices) {
    const RingPtr& ring = c.ring();
    uint32_t n = ring->n();
    pfree = RingElement::zero(ring);
    slices.assign(n, RingElement::zero(ring));
    for (const auto& [m, v] : c.terms()) {
        if (m.p_degree() == 0) {
            TermMap tm;
            tm[m] = v;
            pfree += RingElement::from_terms(ring, std::move(tm));
        } else if (m.p_degree() == 1) {
            uint32_t ups = 0;
            for (uint32_t a = 1; a <= n; ++a)
                if (m.p[a - 1] == 1) ups = a;
            Mono stripped = m;
            stripped.p[ups - 1] = 0;
            stripped.refresh_pdeg();
            TermMap tm;
            tm[stripped] = v;
            slices[ups - 1] += RingElement::from_terms(ring, std::move(tm));
        } else {
            throw StructureError("coefficient is not linear in the momenta");
        }
    }
}

// Classify a homogeneous one-form of degree z into the three r-kinds.
inline rTables classify_one_form(const WeylSeries& s, uint32_t z) {
    rTables out;
    const RingPtr& ring = s.ring();
    uint32_t n = s.n();
    for (const auto& [key, c] : s.terms()) {
        if (key.k != 0) throw StructureError("induced-mode series must be hbar-free");
        if (key.form.m != 1) throw StructureError("one-form expected");
        if (key.degree() != z) throw StructureError("degree-homogeneous component expected");
        Multi i(key.y.begin(), key.y.begin() + n);
        uint32_t mom_deg = 0, tau = 0;
        for (uint32_t a = 1; a <= n; ++a) {
            mom_deg += key.y[n + a - 1];
            if (key.y[n + a - 1] > 0) tau = a;
        }
        uint32_t j = key.form.idx[0];
        if (mom_deg > 1) throw StructureError("more than one momentum fiber factor");
        if (mom_deg == 1) {
            if (j > n || c.depends_on_p())
                throw StructureError("second-kind term with unexpected structure");
            out.k2[{i, tau, j}] = c;
        } else if (j > n) {
            if (c.depends_on_p()) throw StructureError("first-kind term with momentum coefficient");
            out.k1[{i, j - n}] = c;
        } else {
            RingElement pfree;
            std::vector<RingElement> slices;
            split_momentum_linear(c, pfree, slices);
            if (!pfree.is_zero())
                throw StructureError("spatial one-form term without a momentum factor");
            for (uint32_t ups = 1; ups <= n; ++ups)
                detail::tput(out.k3, std::make_tuple(ups, i, j), slices[ups - 1]);
        }
    }
    return out;
}

// Classify a homogeneous two-form of degree z into the three R-kinds.
inline RTables classify_two_form(const WeylSeries& s, uint32_t z) {
    RTables out;
    uint32_t n = s.n();
    for (const auto& [key, c] : s.terms()) {
        if (key.k != 0) throw StructureError("induced-mode series must be hbar-free");
        if (key.form.m != 2) throw StructureError("two-form expected");
        if (key.degree() != z) throw StructureError("degree-homogeneous component expected");
        Multi i(key.y.begin(), key.y.begin() + n);
        uint32_t mom_deg = 0, tau = 0;
        for (uint32_t a = 1; a <= n; ++a) {
            mom_deg += key.y[n + a - 1];
            if (key.y[n + a - 1] > 0) tau = a;
        }
        uint32_t f1 = key.form.idx[0], f2 = key.form.idx[1];
        if (mom_deg > 1) throw StructureError("more than one momentum fiber factor");
        if (f1 <= n && f2 > n) {
            if (mom_deg != 0 || c.depends_on_p())
                throw StructureError("first-kind term with unexpected structure");
            out.k1[{i, f1, f2 - n}] = c;
        } else if (f2 <= n) {
            if (mom_deg == 1) {
                if (c.depends_on_p())
                    throw StructureError("second-kind term with momentum coefficient");
                out.k2[{i, tau, f1, f2}] = c;
            } else {
                RingElement pfree;
                std::vector<RingElement> slices;
                split_momentum_linear(c, pfree, slices);
                if (!pfree.is_zero())
                    throw StructureError("spatial two-form term without a momentum factor");
                for (uint32_t ups = 1; ups <= n; ++ups)
                    detail::tput(out.k3, std::make_tuple(ups, i, f1, f2), slices[ups - 1]);
            }
        } else {
            throw StructureError("dp^dp term cannot appear for an induced connection");
        }
    }
    return out;
}

// ---- third-kind dependency relation ---------------------------------------

// Full third-kind lookup: stored independents plus the block relation for the
// dependent combinations.
inline RingElement third_kind_get(const RTables& t, const RingPtr& ring, uint32_t ups,
                                  const Multi& i, uint32_t a, uint32_t b) {
    if (a > b) std::swap(a, b);
    if (detail::max_support(i) <= b) return detail::tget(t.k3, ring, std::make_tuple(ups, i, a, b));
    Multi m = detail::plus_e(detail::plus_e(i, a), b);
    uint32_t smax = detail::max_support(m);
    GaussianRational denom(static_cast<long>(m[smax - 1]));
    RingElement lhs =
        third_kind_get(t, ring, ups, detail::minus_e(detail::minus_e(m, a), smax), a, smax)
            .scaled(GaussianRational(static_cast<long>(m[b - 1])) / denom);
    RingElement rhs =
        third_kind_get(t, ring, ups, detail::minus_e(detail::minus_e(m, b), smax), b, smax)
            .scaled(GaussianRational(static_cast<long>(m[a - 1])) / denom);
    return lhs - rhs;
}

// Reduce a fully-populated third-kind table to its independent entries,
// verifying the discarded ones against the dependency relation.
inline RTables reduce_third_kind(const RTables& full, const RingPtr& ring) {
    RTables out = full;
    out.k3.clear();
    for (const auto& [key, v] : full.k3) {
        const auto& [ups, i, a, b] = key;
        if (detail::max_support(i) <= b) out.k3[key] = v;
    }
    for (const auto& [key, v] : full.k3) {
        const auto& [ups, i, a, b] = key;
        if (detail::max_support(i) <= b) continue;
        if (third_kind_get(out, ring, ups, i, a, b) != v)
            throw InternalError("dependent third-kind entry violates the block relation");
    }
    return out;
}

// ---- series reconstruction from classified tables -------------------------

inline WeylSeries one_form_from_tables(const rTables& t, const RingPtr& ring, uint32_t cap) {
    uint32_t n = ring->n();
    WeylSeries out(ring, cap);
    for (const auto& [key, c] : t.k1) {
        const auto& [i, a] = key;
        WeylKey wk;
        wk.k = 0;
        wk.y.assign(2 * n, 0);
        std::copy(i.begin(), i.end(), wk.y.begin());
        wk.form = FormFactor::dx(static_cast<uint8_t>(a + n));
        out.add(wk, c);
    }
    for (const auto& [key, c] : t.k2) {
        const auto& [i, tau, a] = key;
        WeylKey wk;
        wk.k = 0;
        wk.y.assign(2 * n, 0);
        std::copy(i.begin(), i.end(), wk.y.begin());
        wk.y[n + tau - 1] += 1;
        wk.form = FormFactor::dx(static_cast<uint8_t>(a));
        out.add(wk, c);
    }
    for (const auto& [key, c] : t.k3) {
        const auto& [ups, i, a] = key;
        WeylKey wk;
        wk.k = 0;
        wk.y.assign(2 * n, 0);
        std::copy(i.begin(), i.end(), wk.y.begin());
        wk.form = FormFactor::dx(static_cast<uint8_t>(a));
        out.add(wk, RingElement::p_var(ring, ups) * c);
    }
    return out;
}

inline WeylSeries two_form_from_tables(const RTables& t, const RingPtr& ring, uint32_t cap) {
    uint32_t n = ring->n();
    WeylSeries out(ring, cap);
    auto form2 = [](uint32_t x, uint32_t y) {
        FormFactor f;
        f.m = 2;
        f.idx = {static_cast<uint8_t>(x), static_cast<uint8_t>(y), 0};
        return f;
    };
    for (const auto& [key, c] : t.k1) {
        const auto& [i, a, b] = key;
        WeylKey wk;
        wk.k = 0;
        wk.y.assign(2 * n, 0);
        std::copy(i.begin(), i.end(), wk.y.begin());
        wk.form = form2(a, b + n);
        out.add(wk, c);
    }
    for (const auto& [key, c] : t.k2) {
        const auto& [i, tau, a, b] = key;
        WeylKey wk;
        wk.k = 0;
        wk.y.assign(2 * n, 0);
        std::copy(i.begin(), i.end(), wk.y.begin());
        wk.y[n + tau - 1] += 1;
        wk.form = form2(a, b);
        out.add(wk, c);
    }
    // expand the dependent third-kind combinations
    std::set<std::pair<uint32_t, Multi>> blocks;
    for (const auto& [key, c] : t.k3) {
        const auto& [ups, i, a, b] = key;
        blocks.insert({ups, detail::plus_e(detail::plus_e(i, a), b)});
    }
    for (const auto& [ups, m] : blocks) {
        for (uint32_t a = 1; a <= n; ++a) {
            if (m[a - 1] == 0) continue;
            for (uint32_t b = a + 1; b <= n; ++b) {
                if (m[b - 1] == 0) continue;
                Multi i = detail::minus_e(detail::minus_e(m, a), b);
                RingElement c = third_kind_get(t, ring, ups, i, a, b);
                if (c.is_zero()) continue;
                WeylKey wk;
                wk.k = 0;
                wk.y.assign(2 * n, 0);
                std::copy(i.begin(), i.end(), wk.y.begin());
                wk.form = form2(a, b);
                out.add(wk, RingElement::p_var(ring, ups) * c);
            }
        }
    }
    return out;
}

// ---- the generic recursion -------------------------------------------------

inline AbelianState abelian_generic(const SymplecticConnection& conn, uint32_t Z) {
    if (Z < 3) throw StructureError("recursion degree must be at least 3");
    AbelianState st(conn);
    st.Z = Z;
    st.mode = AbelianMode::generic;
    st.gamma_form = gamma_one_form(conn, Z);
    WeylSeries Rg = curvature_two_form_series(st.gamma_form);
    for (const auto& [key, c] : Rg.terms())
        if (key.degree() != 2) throw InternalError("connection curvature is not degree-2");
    st.R.emplace(2, Rg);

    for (uint32_t z = 2; z < Z; ++z) {
        WeylSeries rz = delta_inv(st.R.at(z));
        if (!delta_inv(rz).is_zero())
            throw InternalError("normalization condition failed for the new correction");
        for (const auto& [key, c] : rz.terms())
            if (key.degree() != z + 1) throw InternalError("degree bookkeeping violation");
        st.r.emplace(z + 1, rz);
        // R_{gamma+r}[z+1] = (d_gamma r)[z+1] + ((i/hbar) r o r)[z+1]; the
        // hbar^0 cross terms cancel only across transposed pairs, so the
        // convolution is accumulated before the division
        WeylSeries next = covariant_d(st.r.at(z + 1), st.gamma_form);
        WeylSeries conv(st.ring, Z + 2);
        for (uint32_t w = 3; w + 2 <= z + 2; ++w) {
            uint32_t w2 = z + 3 - w;
            if (w2 < 3 || !st.r.count(w2)) continue;
            conv += circ(st.r.at(w).with_cap(Z + 2), st.r.at(w2).with_cap(Z + 2), kKernelSign, 1);
        }
        next += i_over_hbar(conv).with_cap(Z);
        st.R.emplace(z + 1, next.component(z + 1));
        // terms of other degrees must not appear
        if (next != st.R.at(z + 1)) throw InternalError("degree bookkeeping violation");
    }

    // classified views (always available for induced inputs)
    st.Rt.emplace(2, reduce_third_kind(classify_two_form(st.R.at(2), 2), st.ring));
    for (uint32_t z = 3; z <= Z; ++z) {
        if (st.r.count(z)) st.rt.emplace(z, classify_one_form(st.r.at(z), z));
        if (st.R.count(z))
            st.Rt.emplace(z, reduce_third_kind(classify_two_form(st.R.at(z), z), st.ring));
    }
    return st;
}

// ---- the specialized loop ---------------------------------------------------

// r[0|i|0|a+n] of degree w from the first-kind curvature components one
// degree below.
inline rTables build_r_first_kind(const AbelianState& st, uint32_t w) {
    rTables out;
    const RingPtr& ring = st.ring;
    uint32_t n = st.n;
    const RTables& Rprev = st.Rt.at(w - 1);
    GaussianRational norm(1, static_cast<unsigned long>(w + 1));
    for (const Multi& i : detail::compositions(n, w))
        for (uint32_t a = 1; a <= n; ++a) {
            RingElement v = RingElement::zero(ring);
            for (uint32_t c = 1; c <= n; ++c) {
                if (i[c - 1] == 0) continue;
                v += detail::tget(Rprev.k1, ring, std::make_tuple(detail::minus_e(i, c), c, a));
            }
            detail::tput(out.k1, std::make_tuple(i, a), v.scaled(norm));
        }
    return out;
}

// r[0|i|tau|a] of degree w via the combined first-kind relation.
inline void build_r_second_kind(const AbelianState& st, uint32_t w, rTables& cur) {
    const RingPtr& ring = st.ring;
    uint32_t n = st.n;
    const RTables& Rprev = st.Rt.at(w - 1);
    for (const Multi& i : detail::compositions(n, w - 1))
        for (uint32_t tau = 1; tau <= n; ++tau)
            for (uint32_t a = 1; a <= n; ++a) {
                GaussianRational mult(static_cast<long>(i[a - 1] + 1));
                RingElement v =
                    detail::tget(cur.k1, ring, std::make_tuple(detail::plus_e(i, a), tau))
                        .scaled(mult) -
                    detail::tget(Rprev.k1, ring, std::make_tuple(i, a, tau));
                detail::tput(cur.k2, std::make_tuple(i, tau, a), v);
            }
}

// r[ups|i|0|a] of degree w from the third-kind curvature components one
// degree below, by the three case formulas.
inline void build_r_third_kind(const AbelianState& st, uint32_t w, rTables& cur) {
    const RingPtr& ring = st.ring;
    uint32_t n = st.n;
    const RTables& Rprev = st.Rt.at(w - 1);
    GaussianRational norm(1, static_cast<unsigned long>(w + 1));
    auto R3 = [&](uint32_t ups, const Multi& i, uint32_t a, uint32_t b) {
        return third_kind_get(Rprev, ring, ups, i, a, b);
    };
    // direct cases first: largest active index at or below the form index
    for (const Multi& i : detail::compositions(n, w)) {
        uint32_t su = detail::max_support(i);
        for (uint32_t ups = 1; ups <= n; ++ups)
            for (uint32_t a = 1; a <= n; ++a) {
                if (su > a) continue;
                RingElement v = RingElement::zero(ring);
                for (uint32_t c = 1; c <= n; ++c) {
                    if (i[c - 1] == 0 || c == a) continue;
                    v += R3(ups, detail::minus_e(i, c), c, a);
                }
                detail::tput(cur.k3, std::make_tuple(ups, i, a), v.scaled(norm));
            }
    }
    // remaining case: reduce to a direct entry plus one curvature component
    for (const Multi& i : detail::compositions(n, w)) {
        uint32_t su = detail::max_support(i);
        for (uint32_t ups = 1; ups <= n; ++ups)
            for (uint32_t a = 1; a <= n; ++a) {
                if (su <= a) continue;
                GaussianRational isu(static_cast<long>(i[su - 1]));
                RingElement v =
                    detail::tget(cur.k3, ring,
                                 std::make_tuple(ups, detail::plus_e(detail::minus_e(i, su), a),
                                                 su))
                        .scaled(GaussianRational(static_cast<long>(i[a - 1] + 1)) / isu) -
                    R3(ups, detail::minus_e(i, su), a, su).scaled(GaussianRational(1) / isu);
                detail::tput(cur.k3, std::make_tuple(ups, i, a), v);
            }
    }
}

// The fast-path convolution sums were printed for the opposite contraction
// kernel; under the calibration that fixes the canonical commutation sign
// they enter with a global minus.  Verified against the generic recursion by
// an exact coefficient fit; see the project notes.
inline constexpr int kConvolutionParity = -1;

// First-kind curvature components of degree w from the freshly completed
// correction tables and the lower-degree data (the long iterative display).
inline RTables first_kind_iterate(const AbelianState& st, uint32_t w) {
    RTables out;
    const RingPtr& ring = st.ring;
    uint32_t n = st.n;
    if (w == 2) {
        out.k1 = st.Rt.at(2).k1;
        return out;
    }
    const rTables& rw = st.rt.at(w);
    GammaBrackets gb = st.gamma_brackets();
    GaussianRational parity(kConvolutionParity);
    for (const Multi& i : detail::compositions(n, w))
        for (uint32_t a = 1; a <= n; ++a)
            for (uint32_t b = 1; b <= n; ++b) {
                RingElement v =
                    detail::tget(rw.k1, ring, std::make_tuple(i, b)).derive(a) -
                    detail::tget(rw.k3, ring, std::make_tuple(b, i, a));
                RingElement conv = RingElement::zero(ring);
                for (uint32_t m = 1; m <= n; ++m) {
                    for (uint32_t c = 1; c <= n; ++c) {
                        if (i[c - 1] == 0) continue;
                        // gamma-dp bracket against the second kind of r[w]
                        conv += gb.dp(detail::plus_e(detail::plus_e(Multi(n, 0), c), m), b)
                                    .scaled(GaussianRational(1 + (c == m ? 1 : 0))) *
                                detail::tget(rw.k2, ring,
                                             std::make_tuple(detail::minus_e(i, c), m, a));
                        // first kind of r[w] against the gamma mixed bracket
                        GaussianRational mult(
                            static_cast<long>(i[m - 1] + 1 - (c == m ? 1 : 0)));
                        conv += detail::tget(rw.k1, ring,
                                             std::make_tuple(
                                                 detail::plus_e(detail::minus_e(i, c), m), b))
                                    .scaled(mult) *
                                gb.mixed(c, m, a);
                    }
                    // lower-degree convolution r o r
                    detail::for_each_sub_multi(i, 2, w - 2, [&](const Multi& g) {
                        uint32_t gt = detail::multi_total(g);
                        const rTables& rlow = st.rt.at(gt + 1);
                        const rTables& rhigh = st.rt.at(w - gt + 1);
                        RingElement left =
                            detail::tget(rlow.k1, ring, std::make_tuple(detail::plus_e(g, m), b));
                        if (left.is_zero()) return;
                        Multi ig(i);
                        for (uint32_t c = 0; c < n; ++c) ig[c] -= g[c];
                        RingElement right = detail::tget(rhigh.k2, ring, std::make_tuple(ig, m, a));
                        if (right.is_zero()) return;
                        conv +=
                            left.scaled(GaussianRational(static_cast<long>(g[m - 1] + 1))) * right;
                    });
                }
                v += conv.scaled(parity);
                detail::tput(out.k1, std::make_tuple(i, a, b), v);
            }
    return out;
}

// Second-kind curvature components from the first kind (the delta-closure
// relation).
inline void second_kind_from_first(const RingPtr& ring, uint32_t n, uint32_t w, RTables& t) {
    for (const Multi& i : detail::compositions(n, w - 1))
        for (uint32_t tau = 1; tau <= n; ++tau)
            for (uint32_t a = 1; a <= n; ++a)
                for (uint32_t b = a + 1; b <= n; ++b) {
                    RingElement v =
                        detail::tget(t.k1, ring, std::make_tuple(detail::plus_e(i, b), a, tau))
                            .scaled(GaussianRational(static_cast<long>(i[b - 1] + 1))) -
                        detail::tget(t.k1, ring, std::make_tuple(detail::plus_e(i, a), b, tau))
                            .scaled(GaussianRational(static_cast<long>(i[a - 1] + 1)));
                    detail::tput(t.k2, std::make_tuple(i, tau, a, b), v);
                }
}

// Third-kind curvature components of degree w > 2 for the independent
// combinations, from the Bianchi identity of the curvature two-form: the
// first-kind derivative terms plus six convolution sums of first- and
// second-kind components against the connection brackets and the correction.
// The six sums carry the kernel parity; the derivative terms do not.  The six
// partial sums are returned separately when requested so their total can be
// audited.
inline RTables third_kind_from_bianchi(const AbelianState& st, uint32_t w,
                                       std::vector<RingElement>* audit_sums = nullptr,
                                       const RTables* cur_in = nullptr) {
    if (w <= 2)
        throw StructureError("degree-2 third-kind components come from the connection curvature");
    const RingPtr& ring = st.ring;
    uint32_t n = st.n;
    const RTables& cur = cur_in ? *cur_in : st.Rt.at(w);
    GammaBrackets gb = st.gamma_brackets();
    GaussianRational parity(kConvolutionParity);
    RTables out;
    auto R1at = [&](uint32_t deg, const Multi& i, uint32_t a, uint32_t b) {
        const RTables& t = (deg == w) ? cur : st.Rt.at(deg);
        return detail::tget(t.k1, ring, std::make_tuple(i, a, b));
    };
    auto R2at = [&](uint32_t deg, const Multi& i, uint32_t tau, uint32_t a, uint32_t b) {
        const RTables& t = (deg == w) ? cur : st.Rt.at(deg);
        return detail::tget(t.k2, ring, std::make_tuple(i, tau, a, b));
    };
    for (const Multi& i : detail::compositions(n, w))
        for (uint32_t ups = 1; ups <= n; ++ups)
            for (uint32_t a = 1; a <= n; ++a)
                for (uint32_t b = a + 1; b <= n; ++b) {
                    if (detail::max_support(i) > b) continue; // dependent combination
                    std::vector<RingElement> S(6, RingElement::zero(ring));
                    for (uint32_t l = 1; l <= n; ++l) {
                        // sums over s with |s| = w-1: s = i - e_c
                        for (uint32_t c = 1; c <= n; ++c) {
                            if (i[c - 1] == 0) continue;
                            Multi s = detail::minus_e(i, c);
                            S[0] += R1at(w, detail::plus_e(s, l), a, ups)
                                        .scaled(GaussianRational(
                                            static_cast<long>(s[l - 1] + 1))) *
                                    gb.mixed(c, l, b);
                            S[2] -= R1at(w, detail::plus_e(s, l), b, ups)
                                        .scaled(GaussianRational(
                                            static_cast<long>(s[l - 1] + 1))) *
                                    gb.mixed(c, l, a);
                            // second kind against the gamma-dp bracket
                            GaussianRational mult(
                                static_cast<long>((l == c ? 1 : 0) + 1));
                            S[4] += R2at(w, s, l, a, b).scaled(mult) *
                                    gb.dp(detail::plus_e(detail::plus_e(Multi(n, 0), c), l), ups);
                        }
                        // sums over s with 1 <= |s| <= w-2
                        detail::for_each_sub_multi(i, 1, w - 2, [&](const Multi& s) {
                            uint32_t stot = detail::multi_total(s);
                            Multi is(i);
                            for (uint32_t c = 0; c < n; ++c) is[c] -= s[c];
                            GaussianRational sl1(static_cast<long>(s[l - 1] + 1));
                            const rTables& rhigh = st.rt.at(w - stot + 1);
                            S[1] += R1at(stot + 1, detail::plus_e(s, l), a, ups).scaled(sl1) *
                                    detail::tget(rhigh.k2, ring, std::make_tuple(is, l, b));
                            S[3] -= R1at(stot + 1, detail::plus_e(s, l), b, ups).scaled(sl1) *
                                    detail::tget(rhigh.k2, ring, std::make_tuple(is, l, a));
                            GaussianRational il1(
                                static_cast<long>(i[l - 1] - s[l - 1] + 1));
                            S[5] += R2at(stot + 1, s, l, a, b).scaled(il1) *
                                    detail::tget(rhigh.k1, ring,
                                                 std::make_tuple(detail::plus_e(is, l), ups));
                        });
                    }
                    RingElement total = R1at(w, i, a, ups).derive(b) -
                                        R1at(w, i, b, ups).derive(a);
                    for (const auto& part : S) total += part.scaled(parity);
                    if (audit_sums)
                        for (const auto& part : S) audit_sums->push_back(part.scaled(parity));
                    detail::tput(out.k3, std::make_tuple(ups, i, a, b), total);
                }
    return out;
}

// The specialized recursion for induced connections: identical results to
// abelian_generic, produced degree by degree from the classified tables.
inline AbelianState abelian_induced_fast(const SymplecticConnection& conn, uint32_t Z) {
    if (Z < 3) throw StructureError("recursion degree must be at least 3");
    AbelianState st(conn);
    CheckReport shape = st.conn.validate_induced_shape();
    if (!shape.all_pass())
        throw StructureError("fast path requires an induced-shape connection");
    st.Z = Z;
    st.mode = AbelianMode::induced_fast;
    st.gamma_form = gamma_one_form(conn, Z);
    WeylSeries Rg = curvature_two_form_series(st.gamma_form);
    st.R.emplace(2, Rg);
    st.Rt.emplace(2, reduce_third_kind(classify_two_form(Rg, 2), st.ring));

    for (uint32_t z = 2; z < Z; ++z) {
        rTables rz = build_r_first_kind(st, z + 1);
        build_r_second_kind(st, z + 1, rz);
        build_r_third_kind(st, z + 1, rz);
        st.rt.emplace(z + 1, std::move(rz));
        st.r.emplace(z + 1, one_form_from_tables(st.rt.at(z + 1), st.ring, Z));
        RTables Rz = first_kind_iterate(st, z + 1);
        second_kind_from_first(st.ring, st.n, z + 1, Rz);
        RTables k3 = third_kind_from_bianchi(st, z + 1, nullptr, &Rz);
        Rz.k3 = std::move(k3.k3);
        st.Rt.emplace(z + 1, std::move(Rz));
        st.R.emplace(z + 1, two_form_from_tables(st.Rt.at(z + 1), st.ring, Z));
    }
    return st;
}

// ---- counting and dependency validators ------------------------------------

struct ClassCounts {
    struct PerKind {
        size_t slots = 0, nonzero = 0;
        GaussianRational formula;
    };
    PerKind R1, R2, R3, R3_independent;
    bool slots_match = false;
};

inline ClassCounts class_counts(uint32_t n, uint32_t z, const RTables& t) {
    ClassCounts cc;
    auto C = [](unsigned long a, unsigned long b) { return binomial(a, b); };
    cc.R1.formula = GaussianRational(static_cast<long>(n * n)) * C(z + n - 1, z);
    cc.R2.formula = GaussianRational(static_cast<long>(n)) * C(z - 1 + n - 1, z - 1) * C(n, 2);
    cc.R3.formula = GaussianRational(static_cast<long>(n)) * C(z + n - 1, z) * C(n, 2);
    cc.R3_independent.formula =
        GaussianRational(static_cast<long>(n * (z + 1))) * C(n + z, z + 2);

    size_t multis_z = detail::compositions(n, z).size();
    size_t multis_z1 = detail::compositions(n, z - 1).size();
    cc.R1.slots = multis_z * n * n;
    cc.R2.slots = multis_z1 * n * (n * (n - 1) / 2);
    cc.R3.slots = multis_z * n * (n * (n - 1) / 2);
    size_t indep = 0;
    for (const Multi& i : detail::compositions(n, z))
        for (uint32_t a = 1; a <= n; ++a)
            for (uint32_t b = a + 1; b <= n; ++b)
                if (detail::max_support(i) <= b) ++indep;
    cc.R3_independent.slots = indep * n;

    for (const auto& [k, v] : t.k1)
        if (!v.is_zero()) ++cc.R1.nonzero;
    for (const auto& [k, v] : t.k2)
        if (!v.is_zero()) ++cc.R2.nonzero;
    for (const auto& [k, v] : t.k3)
        if (!v.is_zero()) ++cc.R3_independent.nonzero;
    // dependent entries derive from the stored ones
    if (n >= 1) {
        RingPtr probe;
        for (const auto& [k, v] : t.k3) {
            probe = v.ring();
            break;
        }
        if (probe) {
            for (const Multi& i : detail::compositions(n, z))
                for (uint32_t ups = 1; ups <= n; ++ups)
                    for (uint32_t a = 1; a <= n; ++a)
                        for (uint32_t b = a + 1; b <= n; ++b)
                            if (!third_kind_get(t, probe, ups, i, a, b).is_zero()) ++cc.R3.nonzero;
        }
    }

    auto eq = [](size_t s, const GaussianRational& f) {
        return f == GaussianRational(static_cast<long>(s));
    };
    cc.slots_match = eq(cc.R1.slots, cc.R1.formula) && eq(cc.R2.slots, cc.R2.formula) &&
                     eq(cc.R3.slots, cc.R3.formula) &&
                     eq(cc.R3_independent.slots, cc.R3_independent.formula);
    return cc;
}

// Block decomposition of the third kind, the independent-set selection, the
// dependency relation, and the per-block rank claim.
inline CheckReport third_kind_dependencies(const AbelianState& st, uint32_t z) {
    CheckReport rep;
    const RingPtr& ring = st.ring;
    uint32_t n = st.n;
    const RTables& t = st.Rt.at(z);

    // blocks keyed by (ups, monomial m = i + e_a + e_b)
    std::map<std::pair<uint32_t, Multi>, std::vector<std::pair<uint32_t, uint32_t>>> blocks;
    for (const Multi& i : detail::compositions(n, z))
        for (uint32_t ups = 1; ups <= n; ++ups)
            for (uint32_t a = 1; a <= n; ++a)
                for (uint32_t b = a + 1; b <= n; ++b)
                    blocks[{ups, detail::plus_e(detail::plus_e(i, a), b)}].push_back({a, b});

    bool element_counts_ok = true, indep_counts_ok = true, relation_ok = true, rank_ok = true;
    std::string off;
    for (auto& [key, pairs] : blocks) {
        const auto& [ups, m] = key;
        std::sort(pairs.begin(), pairs.end());
        pairs.erase(std::unique(pairs.begin(), pairs.end()), pairs.end());
        std::vector<uint32_t> support;
        for (uint32_t c = 1; c <= n; ++c)
            if (m[c - 1] > 0) support.push_back(c);
        uint32_t u = static_cast<uint32_t>(support.size());
        if (u < 2) continue;
        uint32_t f = u - 2;
        // element count C(u,2) and independent count f+1
        if (pairs.size() != static_cast<size_t>(u) * (u - 1) / 2) element_counts_ok = false;
        uint32_t smax = support.back();
        size_t indep = 0;
        for (auto [a, b] : pairs)
            if (b == smax) ++indep;
        if (indep != f + 1) indep_counts_ok = false;

        // every block equation m_a R[(b,c)] - m_b R[(a,c)] + m_c R[(a,b)] = 0
        for (size_t x = 0; x < support.size(); ++x)
            for (size_t y = x + 1; y < support.size(); ++y)
                for (size_t w = y + 1; w < support.size(); ++w) {
                    uint32_t a = support[x], b = support[y], c = support[w];
                    auto entry = [&](uint32_t p, uint32_t q) {
                        return third_kind_get(t, ring, ups,
                                              detail::minus_e(detail::minus_e(m, p), q), p, q);
                    };
                    RingElement resid =
                        entry(b, c).scaled(GaussianRational(static_cast<long>(m[a - 1]))) -
                        entry(a, c).scaled(GaussianRational(static_cast<long>(m[b - 1]))) +
                        entry(a, b).scaled(GaussianRational(static_cast<long>(m[c - 1])));
                    if (!resid.is_zero()) {
                        relation_ok = false;
                        off = "block p" + std::to_string(ups);
                    }
                }

        // rank of the block system equals C(f+1,2)
        if (f >= 1) {
            std::vector<std::vector<GaussianRational>> M;
            std::map<std::pair<uint32_t, uint32_t>, size_t> col;
            for (auto pr : pairs) col[pr] = col.size();
            for (size_t x = 0; x < support.size(); ++x)
                for (size_t y = x + 1; y < support.size(); ++y)
                    for (size_t w = y + 1; w < support.size(); ++w) {
                        uint32_t a = support[x], b = support[y], c = support[w];
                        std::vector<GaussianRational> row(col.size(), GaussianRational(0));
                        row[col.at({b, c})] += GaussianRational(static_cast<long>(m[a - 1]));
                        row[col.at({a, c})] -= GaussianRational(static_cast<long>(m[b - 1]));
                        row[col.at({a, b})] += GaussianRational(static_cast<long>(m[c - 1]));
                        M.push_back(std::move(row));
                    }
            size_t rank = 0;
            for (size_t c2 = 0; c2 < col.size() && rank < M.size(); ++c2) {
                size_t piv = rank;
                while (piv < M.size() && M[piv][c2].is_zero()) ++piv;
                if (piv == M.size()) continue;
                std::swap(M[piv], M[rank]);
                for (size_t r2 = 0; r2 < M.size(); ++r2) {
                    if (r2 == rank || M[r2][c2].is_zero()) continue;
                    GaussianRational fct = M[r2][c2] / M[rank][c2];
                    for (size_t j = 0; j < col.size(); ++j) M[r2][j] -= fct * M[rank][j];
                }
                ++rank;
            }
            if (rank != static_cast<size_t>(f + 1) * f / 2) rank_ok = false;
        }
    }
    rep.add("block element counts", element_counts_ok);
    rep.add("independent-set selection size", indep_counts_ok);
    rep.add("dependency relation residuals", relation_ok, off);
    rep.add("block system rank", rank_ok);

    ClassCounts cc = class_counts(n, z, t);
    rep.add("class slot counts match the formulas", cc.slots_match);
    return rep;
}

// ---- full validator battery --------------------------------------------------

inline CheckReport validate_abelian(const AbelianState& st, uint64_t seed = 20260809) {
    CheckReport rep;
    const RingPtr& ring = st.ring;
    uint32_t n = st.n, Z = st.Z;

    // normalization and degree bookkeeping
    bool ok = true;
    std::string off;
    for (const auto& [z, rz] : st.r) {
        if (!delta_inv(rz).is_zero()) {
            ok = false;
            off = "degree " + std::to_string(z);
        }
        for (const auto& [key, c] : rz.terms())
            if (key.degree() != z) ok = false;
    }
    rep.add("normalization and homogeneity of the correction", ok, off);

    // defining equation residual, degree by degree
    ok = true;
    off.clear();
    WeylSeries rtot = st.r_total();
    WeylSeries rhs = curvature_two_form_series(st.gamma_form) + covariant_d(rtot, st.gamma_form);
    {
        WeylSeries prod = circ(rtot.with_cap(Z + 2), rtot.with_cap(Z + 2), kKernelSign, 1);
        rhs += i_over_hbar(prod).with_cap(Z);
    }
    WeylSeries lhs = delta(rtot);
    for (uint32_t z = 2; z + 1 <= Z; ++z) {
        if (lhs.component(z) != rhs.component(z)) {
            ok = false;
            off = "degree " + std::to_string(z);
        }
    }
    rep.add("defining equation residual", ok, off);

    // curvature components match the recursion and are delta-closed
    ok = true;
    off.clear();
    for (const auto& [z, Rz] : st.R) {
        if (rhs.component(z) != Rz || !delta(Rz).is_zero()) {
            ok = false;
            off = "degree " + std::to_string(z);
        }
    }
    rep.add("delta-closure of the curvature components", ok, off);

    // Bianchi identity for the full curvature
    ok = true;
    off.clear();
    {
        WeylSeries Rtot = st.R_total();
        WeylSeries gpr = (st.gamma_form + rtot).with_cap(Z + 2);
        WeylSeries resid = exterior_d(Rtot) +
                           i_over_hbar(graded_commutator(gpr, Rtot.with_cap(Z + 2))).with_cap(Z);
        for (uint32_t z = 2; z <= Z; ++z)
            if (!resid.component(z).is_zero()) {
                ok = false;
                off = "degree " + std::to_string(z);
            }
    }
    rep.add("Bianchi identity residual", ok, off);

    // flat-connection square: the covariant derivative built from the state
    // annihilates itself on random sections through the reliable degrees
    ok = true;
    {
        std::mt19937_64 rng(seed);
        std::uniform_int_distribution<long> cd(-3, 3);
        for (int trial = 0; trial < 3; ++trial) {
            WeylSeries a(ring, Z);
            for (uint32_t j1 = 1; j1 <= 2 * n; ++j1) {
                WeylKey key;
                key.k = 0;
                key.y.assign(2 * n, 0);
                key.y[j1 - 1] = 2;
                key.form = FormFactor::scalar();
                a.add(key, RingElement::constant(ring, GaussianRational(cd(rng))));
            }
            auto D = [&](const WeylSeries& x) {
                return covariant_d(x, st.gamma_form) - delta(x) +
                       commutator_over_hbar(rtot, x);
            };
            WeylSeries dd = D(D(a));
            for (uint32_t z = 0; z + 3 <= Z + 2; ++z)
                if (!dd.component(z).is_zero()) ok = false;
        }
    }
    rep.add("squared covariant derivative annihilates sections", ok);

    // gamma-bracket symmetry relations
    ok = true;
    {
        GammaBrackets gb = st.gamma_brackets();
        auto e2 = [&](uint32_t c, uint32_t m) {
            return detail::plus_e(detail::plus_e(Multi(n, 0), c), m);
        };
        for (uint32_t al = 1; al <= n && ok; ++al)
            for (uint32_t be = 1; be <= n && ok; ++be)
                for (uint32_t tau = 1; tau <= n && ok; ++tau) {
                    if (gb.mixed(al, tau, be) != gb.mixed(be, tau, al)) ok = false;
                    // one-y bracket vs dp bracket: multiplicity (i_alpha + 1)
                    RingElement lhsb = gb.mixed(al, tau, be);
                    RingElement rhsb =
                        gb.dp(e2(al, be), tau).scaled(GaussianRational(al == be ? 2 : 1));
                    if (lhsb != rhsb) ok = false;
                }
        for (uint32_t ups = 1; ups <= n && ok; ++ups)
            for (uint32_t al = 1; al <= n && ok; ++al)
                for (uint32_t be = al + 1; be <= n && ok; ++be)
                    for (uint32_t g = 1; g <= n && ok; ++g) {
                        // gamma[ups|i|0|al] relation across the momentum kind
                        Multi i = e2(g, be);
                        if (i[be - 1] == 0) continue;
                        RingElement lhsb = gb.momentum(ups, i, al);
                        Multi shift = detail::plus_e(detail::minus_e(i, be), al);
                        RingElement rhsb =
                            gb.momentum(ups, shift, be)
                                .scaled(GaussianRational(static_cast<long>(i[al - 1] + 1)) /
                                        GaussianRational(static_cast<long>(i[be - 1])));
                        if (lhsb != rhsb) ok = false;
                    }
    }
    rep.add("connection-bracket symmetry relations", ok);

    // structure theorems in induced mode: tables are hbar-free and q-only
    ok = true;
    for (const auto& [z, s] : st.r)
        for (const auto& [key, c] : s.terms())
            if (key.k != 0) ok = false;
    for (const auto& [z, t] : st.rt) {
        for (const auto& [k, v] : t.k1)
            if (v.depends_on_p()) ok = false;
        for (const auto& [k, v] : t.k2)
            if (v.depends_on_p()) ok = false;
        for (const auto& [k, v] : t.k3)
            if (v.depends_on_p()) ok = false;
    }
    for (const auto& [z, t] : st.Rt) {
        for (const auto& [k, v] : t.k1)
            if (v.depends_on_p()) ok = false;
        for (const auto& [k, v] : t.k2)
            if (v.depends_on_p()) ok = false;
        for (const auto& [k, v] : t.k3)
            if (v.depends_on_p()) ok = false;
    }
    rep.add("coefficients free of hbar and the momenta", ok);

    return rep;
}

// The vanishing statements made about the correction tables.  The pure-power
// third-kind family and the combined first/second-kind contraction identity
// follow from the normalization delta^-1 r = 0 alone and hold under any
// product convention; the three single-table statements additionally require
// the opposite contraction kernel and fail under the calibration that fixes
// the canonical commutation sign.  Both groups are reported separately.
inline CheckReport check_vanishing_families(const AbelianState& st) {
    CheckReport rep;
    const RingPtr& ring = st.ring;
    uint32_t n = st.n, Z = st.Z;

    bool third_ok = true, combined_ok = true;
    bool first_ok = true, second_ok = true, pure_R_ok = true;
    for (uint32_t z = 3; z <= Z; ++z) {
        if (!st.rt.count(z)) continue;
        const rTables& t = st.rt.at(z);
        for (uint32_t al = 1; al <= n; ++al) {
            for (uint32_t tau = 1; tau <= n; ++tau) {
                Multi i3(n, 0);
                i3[al - 1] = z;
                if (!detail::tget(t.k3, ring, std::make_tuple(tau, i3, al)).is_zero())
                    third_ok = false;
                Multi i2(n, 0);
                i2[al - 1] = z - 1;
                if (!detail::tget(t.k2, ring, std::make_tuple(i2, tau, al)).is_zero())
                    second_ok = false;
            }
            for (uint32_t be = 1; be <= n; ++be) {
                Multi i1(n, 0);
                i1[be - 1] = z;
                if (!detail::tget(t.k1, ring, std::make_tuple(i1, al)).is_zero()) first_ok = false;
            }
        }
        // delta^-1 r = 0 contracts the first kind against the second:
        // r[0|i|0|a+n] + sum_c r[0|i-e_c|a|c] = 0 for every i.
        for (const Multi& i : detail::compositions(n, z))
            for (uint32_t a = 1; a <= n; ++a) {
                RingElement sum = detail::tget(t.k1, ring, std::make_tuple(i, a));
                for (uint32_t c = 1; c <= n; ++c) {
                    if (i[c - 1] == 0) continue;
                    sum += detail::tget(t.k2, ring,
                                        std::make_tuple(detail::minus_e(i, c), a, c));
                }
                if (!sum.is_zero()) combined_ok = false;
            }
    }
    for (uint32_t z = 2; z <= Z; ++z) {
        if (!st.Rt.count(z)) continue;
        for (uint32_t al = 1; al <= n; ++al)
            for (uint32_t tau = 1; tau <= n; ++tau) {
                Multi i(n, 0);
                i[al - 1] = z;
                if (!detail::tget(st.Rt.at(z).k1, ring, std::make_tuple(i, al, tau)).is_zero())
                    pure_R_ok = false;
            }
    }
    rep.add("third-kind pure-power correction family", third_ok);
    rep.add("normalization contraction identity", combined_ok);
    rep.add("first-kind pure-power correction family (as printed)", first_ok);
    rep.add("second-kind pure-power correction family (as printed)", second_ok);
    rep.add("pure-power first-kind curvature family (as printed)", pure_R_ok);
    return rep;
}

// Riemannian-induced simplification: first-kind corrections vanish and the
// second kind reduces to first-kind curvature components.
inline CheckReport validate_riemannian_family(const AbelianState& st) {
    CheckReport rep;
    bool k1_zero = true, k2_matches = true;
    const RingPtr& ring = st.ring;
    for (const auto& [z, t] : st.rt) {
        for (const auto& [k, v] : t.k1)
            if (!v.is_zero()) k1_zero = false;
        for (const auto& [key, v] : t.k2) {
            const auto& [i, tau, a] = key;
            RingElement want =
                -detail::tget(st.Rt.at(z - 1).k1, ring, std::make_tuple(i, a, tau));
            if (v != want) k2_matches = false;
        }
    }
    rep.add("first-kind corrections vanish", k1_zero);
    rep.add("second-kind corrections equal minus the first-kind curvature", k2_matches);
    return rep;
}

// Term-by-term comparison of two states (the fast-vs-generic oracle).
inline bool states_equal(const AbelianState& a, const AbelianState& b) {
    if (a.Z != b.Z || a.n != b.n) return false;
    for (uint32_t z = 3; z <= a.Z; ++z) {
        const WeylSeries* ra = a.r.count(z) ? &a.r.at(z) : nullptr;
        const WeylSeries* rb = b.r.count(z) ? &b.r.at(z) : nullptr;
        if (!ra != !rb) return false;
        if (ra && *ra != *rb) return false;
    }
    for (uint32_t z = 2; z <= a.Z; ++z) {
        const WeylSeries* Ra = a.R.count(z) ? &a.R.at(z) : nullptr;
        const WeylSeries* Rb = b.R.count(z) ? &b.R.at(z) : nullptr;
        if (!Ra != !Rb) return false;
        if (Ra && *Ra != *Rb) return false;
    }
    return true;
}

} // namespace fedq
