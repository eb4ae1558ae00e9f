#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <vector>

#include "fedq/fedosov.hpp"

namespace fedq {

// Flat section of the Weyl bundle over a base function: the graded parts of
// the unique section projecting to a0.
struct FlatSection {
    RingElement a0;
    WeylSeries series; // form degree 0, total degrees 0..Z
    uint32_t Z = 0;
};

// a[0] = a0;  a[z] = delta^-1( d_gamma a[z-1] + (i/hbar) sum_l [r[z+1-l], a[l]] ).
inline FlatSection lift(const RingElement& a0, const AbelianState& st, uint32_t Z) {
    if (Z > st.Z) throw StructureError("lift degree exceeds the computed recursion degree");
    const RingPtr& ring = st.ring;
    FlatSection out{a0, WeylSeries(ring, Z), Z};
    std::map<uint32_t, WeylSeries> parts;
    parts.emplace(0, WeylSeries::scalar(a0, Z));
    for (uint32_t z = 1; z <= Z; ++z) {
        WeylSeries acc = covariant_d(parts.at(z - 1), st.gamma_form);
        for (uint32_t l = 1; l + 2 <= z; ++l) {
            uint32_t w = z + 1 - l;
            if (w < 3 || !st.r.count(w)) continue;
            acc += commutator_over_hbar(st.r.at(w), parts.at(l));
        }
        WeylSeries az = delta_inv(acc);
        for (const auto& [key, c] : az.terms())
            if (key.degree() != z || key.form.m != 0)
                throw InternalError("flat-section degree bookkeeping violation");
        parts.emplace(z, az);
    }
    for (const auto& [z, s] : parts) out.series += s;
    return out;
}

// Flatness residual of the section under the full connection; exact through
// degree Z-1 when the state is computed through Z.
inline WeylSeries flat_residual(const FlatSection& sec, const AbelianState& st) {
    WeylSeries D = covariant_d(sec.series, st.gamma_form) - delta(sec.series) +
                   commutator_over_hbar(st.r_total(), sec.series);
    WeylSeries out(st.ring, sec.Z >= 1 ? sec.Z - 1 : 0);
    for (uint32_t z = 0; z + 1 <= sec.Z; ++z) out += D.component(z);
    return out;
}

// y = 0 projection; the deformation parameter stays formal, so the result is
// the list of hbar coefficients.
inline std::map<uint32_t, RingElement> project(const WeylSeries& s) {
    if (!s.form_homogeneous(0)) throw StructureError("projection expects a zero-form");
    std::map<uint32_t, RingElement> out;
    for (const auto& [key, c] : s.terms()) {
        if (key.y_degree() != 0) continue;
        auto [it, fresh] = out.emplace(key.k, c);
        if (!fresh) it->second += c;
    }
    return out;
}
inline std::map<uint32_t, RingElement> project(const FlatSection& sec) {
    return project(sec.series);
}

// One fully contracted product term of the star expansion, kept for the
// structural audits.
struct StarContribution {
    uint32_t order;            // hbar order i of the result
    uint32_t za, zb;           // graded degrees consumed
    uint32_t ka, kb;           // hbar exponents of the consumed terms
    uint32_t a_mom_y, b_spat_y;// fiber profile of the consumed terms
    uint32_t p_degree;         // momentum degree of the contribution
};

struct StarExpansion {
    uint32_t N = 0;
    std::map<uint32_t, RingElement> components;                 // i -> B_i
    std::map<uint32_t, std::set<std::pair<uint32_t, uint32_t>>> provenance; // i -> {(za, zb)}
    std::vector<StarContribution> audit;

    RingElement component(uint32_t i, const RingPtr& ring) const {
        auto it = components.find(i);
        return it == components.end() ? RingElement::zero(ring) : it->second;
    }
};

namespace detail {

// sigma(A o B) for single terms: the full contraction exists for exactly one
// (u, v) pair and kills every fiber variable.
inline void star_contract(const WeylKey& ka, const RingElement& ca, const WeylKey& kb,
                          const RingElement& cb, uint32_t n, uint32_t N, uint32_t za, uint32_t zb,
                          StarExpansion& out) {
    for (uint32_t al = 0; al < n; ++al) {
        if (ka.y[al] != kb.y[al + n] || ka.y[al + n] != kb.y[al]) return;
    }
    uint32_t t = ka.y_degree();
    uint32_t order = ka.k + kb.k + t;
    if (order > N) return;
    GaussianRational factor = i_half_pow(t, -1);
    uint32_t vsum = 0;
    for (uint32_t al = 0; al < n; ++al) {
        uint32_t u = ka.y[al], v = ka.y[al + n];
        vsum += v;
        factor *= factorial(u) * factorial(v); // falling factorials of full contractions
    }
    if (vsum % 2) factor = -factor;
    RingElement val = (ca * cb).scaled(factor);
    if (val.is_zero()) return;
    auto [it, fresh] = out.components.emplace(order, val);
    if (!fresh) {
        it->second += val;
        if (it->second.is_zero()) out.components.erase(it);
    }
    out.provenance[order].insert({za, zb});
    uint32_t amom = 0, bspat = 0;
    for (uint32_t al = 0; al < n; ++al) {
        amom += ka.y[al + n];
        bspat += kb.y[al];
    }
    out.audit.push_back({order, za, zb, ka.k, kb.k, amom, bspat, val.p_degree()});
}

} // namespace detail

// Truncated star product a0 * b0 = sigma(sigma^-1(a0) o sigma^-1(b0)),
// collected as bidifferential components B_0..B_N.
inline StarExpansion star(const RingElement& a0, const RingElement& b0, const AbelianState& st,
                          uint32_t N) {
    if (st.Z < 2 * N)
        throw StructureError(
            "star product at hbar order N requires recursion degree Z >= 2N (degree "
            "sufficiency)");
    uint32_t lift_deg = N == 0 ? 0 : 2 * N - 1;
    FlatSection A = lift(a0, st, lift_deg);
    FlatSection B = lift(b0, st, lift_deg);
    StarExpansion out;
    out.N = N;
    // split lifts into graded parts once
    std::map<uint32_t, std::vector<std::pair<WeylKey, RingElement>>> pa, pb;
    for (const auto& [key, c] : A.series.terms()) pa[key.degree()].push_back({key, c});
    for (const auto& [key, c] : B.series.terms()) pb[key.degree()].push_back({key, c});
    for (const auto& [za, ta] : pa)
        for (const auto& [zb, tb] : pb)
            for (const auto& [ka, ca] : ta)
                for (const auto& [kb, cb] : tb)
                    detail::star_contract(ka, ca, kb, cb, st.n, N, za, zb, out);
    // drop empty provenance rows left by exact cancellations
    for (auto it = out.provenance.begin(); it != out.provenance.end();)
        it = out.components.count(it->first) ? std::next(it) : out.provenance.erase(it);
    return out;
}

inline StarExpansion moyal_bracket(const RingElement& a0, const RingElement& b0,
                                   const AbelianState& st, uint32_t N) {
    StarExpansion ab = star(a0, b0, st, N);
    StarExpansion ba = star(b0, a0, st, N);
    StarExpansion out;
    out.N = N;
    out.components = ab.components;
    for (const auto& [i, c] : ba.components) {
        auto [it, fresh] = out.components.emplace(i, -c);
        if (!fresh) {
            it->second -= c;
            if (it->second.is_zero()) out.components.erase(it);
        }
    }
    for (const auto& [i, s] : ab.provenance)
        if (out.components.count(i)) out.provenance[i].insert(s.begin(), s.end());
    for (const auto& [i, s] : ba.provenance)
        if (out.components.count(i)) out.provenance[i].insert(s.begin(), s.end());
    return out;
}

// hbar-linear extension: (sum_i hbar^i E_i) * c0 collected through order N.
inline StarExpansion star_left(const StarExpansion& e, const RingElement& c0,
                               const AbelianState& st, uint32_t N) {
    StarExpansion out;
    out.N = N;
    for (const auto& [i, Ei] : e.components) {
        if (i > N) continue;
        StarExpansion part = star(Ei, c0, st, N - i);
        for (const auto& [j, c] : part.components) {
            auto [it, fresh] = out.components.emplace(i + j, c);
            if (!fresh) {
                it->second += c;
                if (it->second.is_zero()) out.components.erase(it);
            }
        }
    }
    return out;
}

inline StarExpansion star_right(const RingElement& c0, const StarExpansion& e,
                                const AbelianState& st, uint32_t N) {
    StarExpansion out;
    out.N = N;
    for (const auto& [i, Ei] : e.components) {
        if (i > N) continue;
        StarExpansion part = star(c0, Ei, st, N - i);
        for (const auto& [j, c] : part.components) {
            auto [it, fresh] = out.components.emplace(i + j, c);
            if (!fresh) {
                it->second += c;
                if (it->second.is_zero()) out.components.erase(it);
            }
        }
    }
    return out;
}

// ---- structural audits -------------------------------------------------------

// Is a0 a single momentum monomial times a spatial-coordinate function?
inline bool momentum_monomial_shape(const RingElement& a0, std::vector<uint32_t>& powers) {
    powers.assign(a0.n(), 0);
    bool first = true;
    for (const auto& [m, c] : a0.terms()) {
        if (first) {
            powers.assign(m.p.begin(), m.p.end());
            first = false;
        } else if (!std::equal(m.p.begin(), m.p.end(), powers.begin())) {
            return false;
        }
    }
    return !first;
}

// Term-by-term scan of the printed structural constraints on flat sections.
inline CheckReport structural_audit(const FlatSection& sec) {
    CheckReport rep;
    uint32_t n = sec.a0.n();

    bool even_hbar = true, form_ok = true;
    for (const auto& [key, c] : sec.series.terms()) {
        if (key.k % 2) even_hbar = false;
        if (key.form.m != 0) form_ok = false;
    }
    rep.add("hbar enters through even exponents", even_hbar);
    rep.add("zero-form shape", form_ok);

    bool spatial_a0 = !sec.a0.depends_on_p();
    if (spatial_a0) {
        bool no_hbar = true, no_mom_y = true, no_p = true, top_degree = true;
        for (const auto& [key, c] : sec.series.terms()) {
            if (key.k != 0) no_hbar = false;
            for (uint32_t al = 0; al < n; ++al)
                if (key.y[n + al] != 0) no_mom_y = false;
            if (c.depends_on_p()) no_p = false;
            if (key.y_degree() != key.degree()) top_degree = false;
        }
        rep.add("spatial input: no deformation parameter", no_hbar);
        rep.add("spatial input: no momentum fiber variables", no_mom_y);
        rep.add("spatial input: no momenta in the coefficients", no_p);
        rep.add("spatial input: graded part z is a fiber polynomial of degree z", top_degree);
    }

    std::vector<uint32_t> powers;
    if (momentum_monomial_shape(sec.a0, powers)) {
        uint32_t P = std::accumulate(powers.begin(), powers.end(), 0u);
        bool balanced = true;
        for (const auto& [key, c] : sec.series.terms()) {
            uint32_t mom_y = 0;
            for (uint32_t al = 0; al < n; ++al) mom_y += key.y[n + al];
            for (const auto& [m, v] : c.terms())
                if (key.k + m.p_degree() + mom_y != P) balanced = false;
        }
        rep.add("momentum-monomial input: balanced weight identity", balanced);
    }
    return rep;
}

// Scan of the printed constraints on the bidifferential components and the
// recorded contraction provenance.
inline CheckReport star_structure_audit(const StarExpansion& e, const RingElement& a0,
                                        const RingElement& b0) {
    CheckReport rep;
    bool prov_ok = true;
    for (const auto& ct : e.audit) {
        uint32_t i = ct.order;
        if (i == 0) {
            if (ct.za != 0 || ct.zb != 0) prov_ok = false;
            continue;
        }
        if (ct.za + ct.zb != 2 * i) prov_ok = false;
        if (ct.za < 1 || ct.za > 2 * i - 1 || ct.zb < 1 || ct.zb > 2 * i - 1) prov_ok = false;
        if (ct.ka + ct.kb + 1 > i) prov_ok = false; // d_a + d_b <= (i-1)/2
        if (static_cast<int>(ct.zb) - static_cast<int>(ct.za) !=
            2 * (static_cast<int>(ct.kb) - static_cast<int>(ct.ka)))
            prov_ok = false;
        if (ct.za > i + 2 * ct.ka || ct.zb > i + 2 * ct.kb) prov_ok = false; // z - 4d <= i
    }
    rep.add("contraction provenance satisfies the degree constraints", prov_ok);

    if (!a0.depends_on_p()) {
        bool coeff_q_only = true, derivative_profile = true, parity = true;
        for (const auto& [i, Bi] : e.components) {
            if (i == 0) continue;
            (void)Bi;
        }
        for (const auto& ct : e.audit) {
            if (ct.order == 0) continue;
            // only momentum-like fiber components of the second factor appear
            if (ct.b_spat_y != 0) derivative_profile = false;
            // z_b = i + 2 d_b: all three share parity
            if ((ct.za % 2) != (ct.order % 2) || (ct.zb % 2) != (ct.order % 2)) parity = false;
            if (!(ct.zb >= ct.order && ct.order >= ct.za)) parity = false;
        }
        if (!b0.depends_on_p()) {
            // pointwise regime: nothing beyond B_0 may survive
            for (const auto& [i, Bi] : e.components)
                if (i >= 1 && !Bi.is_zero()) coeff_q_only = false;
        } else {
            for (const auto& [i, Bi] : e.components)
                if (i >= 1)
                    for (const auto& [m, c] : Bi.terms())
                        if (m.p_degree() != 0) coeff_q_only = false;
        }
        rep.add("spatial first factor: coefficients free of the momenta", coeff_q_only);
        rep.add("spatial first factor: second factor enters through momentum fibers",
                derivative_profile);
        rep.add("spatial first factor: degree parity constraints", parity);
    }

    std::vector<uint32_t> pa, pb;
    if (momentum_monomial_shape(a0, pa) && momentum_monomial_shape(b0, pb) &&
        a0.depends_on_p() && b0.depends_on_p()) {
        // polynomial-in-momenta inputs: the hbar power cannot exceed the
        // total momentum degree
        uint32_t bound = a0.p_degree() + b0.p_degree();
        bool power_ok = true;
        for (const auto& [i, Bi] : e.components)
            if (i > bound && !Bi.is_zero()) power_ok = false;
        rep.add("hbar power bounded by the total momentum degree", power_ok);
        // pure monomials: component momentum degrees stay below ceil(i/2)
        bool weight_ok = true;
        bool pure = true;
        for (const auto& [m, c] : a0.terms())
            if (m.q_degree() || !m.fn.empty() || !m.jet.empty()) pure = false;
        for (const auto& [m, c] : b0.terms())
            if (m.q_degree() || !m.fn.empty() || !m.jet.empty()) pure = false;
        if (pure) {
            for (const auto& [i, Bi] : e.components)
                if (i >= 1)
                    for (const auto& [m, c] : Bi.terms())
                        if (m.p_degree() > i / 2) weight_ok = false;
            rep.add("momentum weights bounded by half the hbar order", weight_ok);
        }
    }
    return rep;
}

} // namespace fedq
