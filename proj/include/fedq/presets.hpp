#pragma once

#include <random>
#include <string>

#include "fedq/geometry.hpp"

namespace fedq {

struct Preset {
    std::string name;
    RingPtr ring;
    LinearConnection base;      // the inducing base connection
    SymplecticConnection conn;
    // function symbol ids for presets that declare any (sphere: s, c)
    std::map<std::string, uint32_t> symbols;
};

inline Preset preset_flat(uint32_t n = 2) {
    auto ring = Ring::make(n);
    LinearConnection base = LinearConnection::zero(ring);
    return Preset{"flat", ring, base, build_riemannian_induced(base), {}};
}

// Unit round sphere chart: q1 is the polar angle, metric diag(1, s^2) with
// s = sin(q1), c = cos(q1); 1/sin enters as the exact power s^-1.
inline Preset preset_sphere() {
    auto ring = Ring::make(2);
    uint32_t s = ring->declare_function("s");
    uint32_t c = ring->declare_function("c");
    ring->set_derivative(s, 1, RingElement::fn_sym(ring, c));
    ring->set_derivative(c, 1, -RingElement::fn_sym(ring, s));
    BaseMetric g(ring);
    g.set(1, 1, RingElement::one(ring));
    g.set(2, 2, RingElement::fn_sym(ring, s, 2));
    g.set_inverse(1, 1, RingElement::one(ring));
    g.set_inverse(2, 2, RingElement::fn_sym(ring, s, -2));
    LinearConnection base = levi_civita(g);
    Preset p{"sphere", ring, base, build_riemannian_induced(base), {}};
    p.symbols["s"] = s;
    p.symbols["c"] = c;
    return p;
}

// Fully abstract base connection in three dimensions: every coefficient is a
// jet symbol, the induced connection is the metric-induced one.
inline Preset preset_jet3() {
    auto ring = Ring::make(3);
    LinearConnection base = LinearConnection::jets(ring);
    return Preset{"jet3", ring, base, build_riemannian_induced(base), {}};
}

// Seeded random polynomial connection (n = 2): base coefficients and a free
// symmetric f tensor with q-degree <= 1.
inline Preset preset_random2(uint64_t seed) {
    auto ring = Ring::make(2);
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<long> num(-3, 3);
    std::uniform_int_distribution<unsigned long> den(1, 2);
    auto rnd_lin = [&]() {
        RingElement e = RingElement::constant(ring, GaussianRational(num(rng), den(rng)));
        for (uint32_t a = 1; a <= 2; ++a)
            e += RingElement::q_var(ring, a).scaled(GaussianRational(num(rng), den(rng)));
        return e;
    };
    LinearConnection base(ring);
    for (uint32_t e = 1; e <= 2; ++e)
        for (uint32_t a = 1; a <= 2; ++a)
            for (uint32_t b = a; b <= 2; ++b) base.set(e, a, b, rnd_lin());
    SymmetricCubic f(ring);
    for (uint32_t e = 1; e <= 2; ++e)
        for (uint32_t a = 1; a <= 2; ++a)
            for (uint32_t b = a; b <= 2; ++b)
                for (uint32_t d = b; d <= 2; ++d) f.set(e, a, b, d, rnd_lin());
    return Preset{"rand2", ring, base, build_induced(base, f), {}};
}

inline Preset make_preset(const std::string& name, uint64_t seed = 0) {
    if (name == "flat") return preset_flat(2);
    if (name == "flat1") return preset_flat(1);
    if (name == "sphere") return preset_sphere();
    if (name == "jet3") return preset_jet3();
    if (name == "rand2") return preset_random2(seed);
    throw StructureError("unknown preset: " + name);
}

} // namespace fedq
