#include "doctest.h"

#include "fedq/ring.hpp"
#include "test_util.hpp"

using namespace fedq;

namespace {

RingPtr trig_ring(uint32_t n = 2) {
    // Declares s = sin(q1), c = cos(q1); 1/sin is the power s^-1.
    auto ring = Ring::make(n);
    uint32_t s = ring->declare_function("s");
    uint32_t c = ring->declare_function("c");
    ring->set_derivative(s, 1, RingElement::fn_sym(ring, c));
    ring->set_derivative(c, 1, -RingElement::fn_sym(ring, s));
    return ring;
}

} // namespace

TEST_CASE("ring arithmetic basics") {
    auto ring = Ring::make(1);
    RingElement q = RingElement::q_var(ring, 1);
    RingElement p = RingElement::p_var(ring, 1);

    // difference of squares
    CHECK((q + p) * (q - p) == q * q - p * p);
    // annihilator
    CHECK((q * RingElement::zero(ring)).is_zero());
    // canonical powers collapse duplicate factors
    auto t = trig_ring(1);
    RingElement s = RingElement::fn_sym(t, 0);
    RingElement s2 = s * s;
    CHECK(s2.term_count() == 1);
    CHECK(s2.terms().begin()->first.fn == std::vector<std::pair<uint32_t, int32_t>>{{0, 2}});
    // integer powers cancel exactly: s * s^-1 = 1
    RingElement sinv = RingElement::fn_sym(t, 0, -1);
    CHECK(s * sinv == RingElement::one(t));
}

TEST_CASE("structural errors") {
    auto r1 = Ring::make(1);
    auto r2 = Ring::make(2);
    RingElement a = RingElement::q_var(r1, 1);
    RingElement b = RingElement::q_var(r2, 1);
    CHECK_THROWS_AS(a + b, StructureError);
    CHECK_THROWS_AS(RingElement::q_var(r1, 2), StructureError);
    CHECK_THROWS_AS(a.derive(3), StructureError);
    // same declarations in distinct ring objects are compatible
    auto r1b = Ring::make(1);
    CHECK(a + RingElement::q_var(r1b, 1) == a.scaled(GaussianRational(2)));
}

TEST_CASE("formal derivative: power rule, declared table, jet prolongation") {
    auto t = trig_ring(2);
    RingElement q1 = RingElement::q_var(t, 1);
    CHECK((q1 * q1).derive(1) == q1.scaled(GaussianRational(2)));

    RingElement s = RingElement::fn_sym(t, 0);
    RingElement c = RingElement::fn_sym(t, 1);
    CHECK(s.derive(1) == c);
    CHECK(s.derive(2).is_zero());
    CHECK(s.derive(3).is_zero()); // momentum derivative of a symbol vanishes
    // chain rule on negative powers: d(s^-1) = -c * s^-2
    RingElement sinv = RingElement::fn_sym(t, 0, -1);
    CHECK(sinv.derive(1) == -(c * RingElement::fn_sym(t, 0, -2)));
    // d(c * s^-1) = -1 - c^2 s^-2 after exact exponent cancellation
    RingElement cot = c * sinv;
    CHECK(cot.derive(1) ==
          -(RingElement::one(t) + c * c * RingElement::fn_sym(t, 0, -2)));

    auto jr = Ring::make(3);
    RingElement g = RingElement::jet_sym(jr, 1, 2, 1); // lower indices stored sorted
    CHECK(g == RingElement::jet_sym(jr, 1, 1, 2));
    RingElement dg = g.derive(2);
    REQUIRE(dg.term_count() == 1);
    const auto& sym = dg.terms().begin()->first.jet[0].first;
    CHECK(sym.jet == std::vector<uint32_t>{0, 1, 0});
}

TEST_CASE("derivatives commute and satisfy Leibniz (property)") {
    auto t = trig_ring(2);
    testutil::Rng rng(20260809);
    for (int it = 0; it < 25; ++it) {
        RingElement a = testutil::random_poly(t, rng, 2, 3);
        RingElement b = testutil::random_poly(t, rng, 2, 3);
        // mix a symbol factor in sometimes
        if (it % 3 == 0) a = a * RingElement::fn_sym(t, 0);
        if (it % 4 == 0) b = b * RingElement::fn_sym(t, 1, -1);
        for (uint32_t mu = 1; mu <= 4; ++mu) {
            for (uint32_t nu = mu; nu <= 4; ++nu)
                CHECK(a.derive(mu).derive(nu) == a.derive(nu).derive(mu));
            CHECK((a * b).derive(mu) == a.derive(mu) * b + a * b.derive(mu));
        }
    }
}

TEST_CASE("evaluation is an exact homomorphism") {
    auto t = trig_ring(1);
    RingElement q = RingElement::q_var(t, 1);
    RingElement p = RingElement::p_var(t, 1);

    PointAssignment at;
    at.q = {GaussianRational(2)};
    at.p = {GaussianRational(3)};
    CHECK((q * q + p).eval(at) == GaussianRational(7));
    CHECK(RingElement::zero(t).eval(at).is_zero());

    // homomorphism on random pairs, with a Pythagorean point for s, c
    at.fn[0] = GaussianRational(3, 5);
    at.fn[1] = GaussianRational(4, 5);
    testutil::Rng rng(7);
    for (int it = 0; it < 20; ++it) {
        RingElement a = testutil::random_poly(t, rng, 2, 3);
        RingElement b = testutil::random_poly(t, rng, 2, 3) * RingElement::fn_sym(t, 0);
        CHECK((a * b).eval(at) == a.eval(at) * b.eval(at));
        CHECK((a + b).eval(at) == a.eval(at) + b.eval(at));
    }

    RingElement s = RingElement::fn_sym(t, 0);
    PointAssignment missing;
    missing.q = {GaussianRational(0)};
    missing.p = {GaussianRational(0)};
    CHECK_THROWS_WITH_AS(s.eval(missing), "missing assignment for symbol s", EvalError);
}

TEST_CASE("canonicalization is idempotent; p-degree is tracked") {
    auto r = Ring::make(2);
    RingElement p1 = RingElement::p_var(r, 1);
    RingElement p2 = RingElement::p_var(r, 2);
    RingElement q1 = RingElement::q_var(r, 1);
    RingElement e = p1 * p2 * q1 + q1;
    CHECK(e.p_degree() == 2);
    for (const auto& [m, c] : e.terms()) CHECK(m.p_degree() == m.pdeg);
    CHECK(e - e == RingElement::zero(r));
    // adding then subtracting the same term leaves no residue
    RingElement f = e + p1;
    f -= p1;
    CHECK(f == e);
}
