#include "doctest.h"

#include "fedq/fedosov.hpp"
#include "fedq/presets.hpp"
#include "test_util.hpp"

using namespace fedq;

TEST_CASE("gamma one-form: shape, small example, delta-closure") {
    auto flat = preset_flat(2);
    CHECK(gamma_one_form(flat.conn, 6).is_zero());

    // n = 1, gamma_{211} = -c: the form is -(c/2)(y1)^2 dp1 - c y1 y2 dq1
    auto r1 = Ring::make(1);
    LinearConnection G(r1);
    G.set(1, 1, 1, RingElement::constant(r1, GaussianRational(4)));
    SymplecticConnection conn = build_special_atlas(G);
    WeylSeries form = gamma_one_form(conn, 6);
    WeylSeries want(r1, 6);
    want.add(WeylKey{0, {2, 0}, FormFactor::dx(2)},
             RingElement::constant(r1, GaussianRational(-2)));
    want.add(WeylKey{0, {1, 1}, FormFactor::dx(1)},
             RingElement::constant(r1, GaussianRational(-4)));
    CHECK(form == want);

    for (uint64_t seed : {1ull, 2ull}) {
        auto rnd = preset_random2(seed);
        CHECK(delta(gamma_one_form(rnd.conn, 6)).is_zero());
    }
    CHECK(delta(gamma_one_form(preset_sphere().conn, 6)).is_zero());
}

TEST_CASE("curvature two-form: classification against the curvature tensor") {
    auto flat = preset_flat(2);
    CHECK(curvature_two_form_series(gamma_one_form(flat.conn, 6)).is_zero());

    auto sp = preset_sphere();
    WeylSeries Rg = curvature_two_form_series(gamma_one_form(sp.conn, 6));
    CHECK(delta(Rg).is_zero());
    RTables cls = classify_two_form(Rg, 2);

    // entries match the curvature tensor contracted with the flipped kernel
    // (the two acceptance anchors force opposite omega contractions in the
    // tensor formula and in the fiberwise product; see the notes in the
    // geometry header)
    CurvatureTensor Kf = curvature(sp.conn, -1);
    uint32_t n = 2;
    for (uint32_t al = 1; al <= n; ++al)
        for (uint32_t be = al; be <= n; ++be)
            for (uint32_t e = 1; e <= n; ++e)
                for (uint32_t u = 1; u <= n; ++u) {
                    Multi i(n, 0);
                    i[al - 1] += 1;
                    i[be - 1] += 1;
                    RingElement got = detail::tget(cls.k1, sp.ring, std::make_tuple(i, e, u));
                    RingElement want = Kf.get(al, be, e, u + n);
                    if (al == be) want = want.scaled(GaussianRational(1, 2));
                    CHECK(got == want);
                }
    for (uint32_t al = 1; al <= n; ++al)
        for (uint32_t tau = 1; tau <= n; ++tau)
            for (uint32_t b = 1; b <= n; ++b)
                for (uint32_t e = b + 1; e <= n; ++e) {
                    Multi i(n, 0);
                    i[al - 1] += 1;
                    RingElement got =
                        detail::tget(cls.k2, sp.ring, std::make_tuple(i, tau, b, e));
                    CHECK(got == Kf.get(tau + n, al, b, e));
                }
    for (uint32_t al = 1; al <= n; ++al)
        for (uint32_t be = al; be <= n; ++be)
            for (uint32_t e = 1; e <= n; ++e)
                for (uint32_t u = e + 1; u <= n; ++u)
                    for (uint32_t ups = 1; ups <= n; ++ups) {
                        Multi i(n, 0);
                        i[al - 1] += 1;
                        i[be - 1] += 1;
                        RingElement got = third_kind_get(cls, sp.ring, ups, i, e, u);
                        RingElement want = Kf.get(al, be, e, u).derive(n + ups);
                        if (al == be) want = want.scaled(GaussianRational(1, 2));
                        CHECK(got == want);
                    }
}

TEST_CASE("generic recursion: flat state, defining residual, hand checks") {
    auto flat = preset_flat(2);
    AbelianState st = abelian_generic(flat.conn, 6);
    for (uint32_t z = 3; z <= 6; ++z) CHECK(st.r.at(z).is_zero());
    CHECK(validate_abelian(st).all_pass());

    auto sp = preset_sphere();
    AbelianState sps = abelian_generic(sp.conn, 4);
    // r[3] is the unique normalized solution of delta r = R_gamma
    CHECK(delta(sps.r.at(3)) == sps.R.at(2));
    CHECK(delta_inv(sps.r.at(3)).is_zero());
    CHECK_FALSE(sps.r.at(3).is_zero());
    CHECK(validate_abelian(sps).all_pass());
}

TEST_CASE("fast path equals the generic recursion term by term") {
    auto sp = preset_sphere();
    AbelianState fast = abelian_induced_fast(sp.conn, 6);
    AbelianState gen = abelian_generic(sp.conn, 6);
    CHECK(states_equal(fast, gen));

    auto rnd = preset_random2(20260809);
    AbelianState fr = abelian_induced_fast(rnd.conn, 5);
    AbelianState gr = abelian_generic(rnd.conn, 5);
    CHECK(states_equal(fr, gr));

    SymplecticConnection satlas = build_special_atlas(sp.base);
    CHECK(states_equal(abelian_induced_fast(satlas, 5), abelian_generic(satlas, 5)));

    auto jp = preset_jet3();
    CHECK(states_equal(abelian_induced_fast(jp.conn, 4), abelian_generic(jp.conn, 4)));

    // flat input: zero state in both modes
    auto flat = preset_flat(2);
    AbelianState ff = abelian_induced_fast(flat.conn, 5);
    for (uint32_t z = 3; z <= 5; ++z) CHECK(ff.r.at(z).is_zero());
    CHECK(states_equal(ff, abelian_generic(flat.conn, 5)));
}

TEST_CASE("classified tables agree between the modes") {
    auto sp = preset_sphere();
    AbelianState fast = abelian_induced_fast(sp.conn, 5);
    AbelianState gen = abelian_generic(sp.conn, 5);
    for (uint32_t z = 3; z <= 5; ++z) {
        CHECK(fast.rt.at(z).k1 == gen.rt.at(z).k1);
        CHECK(fast.rt.at(z).k2 == gen.rt.at(z).k2);
        CHECK(fast.rt.at(z).k3 == gen.rt.at(z).k3);
    }
    for (uint32_t z = 2; z <= 5; ++z) {
        CHECK(fast.Rt.at(z).k1 == gen.Rt.at(z).k1);
        CHECK(fast.Rt.at(z).k2 == gen.Rt.at(z).k2);
        CHECK(fast.Rt.at(z).k3 == gen.Rt.at(z).k3);
    }
}

TEST_CASE("standalone table builders against the generic state") {
    auto sp = preset_sphere();
    AbelianState gen = abelian_generic(sp.conn, 5);
    // the iterative first-kind display reproduces the classified tables
    for (uint32_t z = 3; z <= 5; ++z) {
        RTables it = first_kind_iterate(gen, z);
        CHECK(it.k1 == gen.Rt.at(z).k1);
    }
    // degree 2 falls back to the connection curvature
    CHECK(first_kind_iterate(gen, 2).k1 == gen.Rt.at(2).k1);

    // second kind from first, and the three-index identity after substitution
    for (uint32_t z = 3; z <= 5; ++z) {
        RTables t;
        t.k1 = gen.Rt.at(z).k1;
        second_kind_from_first(gen.ring, gen.n, z, t);
        CHECK(t.k2 == gen.Rt.at(z).k2);
    }

    // third kind from the Bianchi identity, with the audit sums
    for (uint32_t z = 3; z <= 5; ++z) {
        std::vector<RingElement> sums;
        RTables t = third_kind_from_bianchi(gen, z, &sums);
        CHECK(t.k3 == gen.Rt.at(z).k3);
        // total independent of summation order
        RingElement forward = RingElement::zero(gen.ring);
        RingElement backward = RingElement::zero(gen.ring);
        for (const auto& s : sums) forward += s;
        for (auto itr = sums.rbegin(); itr != sums.rend(); ++itr) backward += *itr;
        CHECK(forward == backward);
    }
    CHECK_THROWS_AS(third_kind_from_bianchi(gen, 2), StructureError);
}

TEST_CASE("n = 3 identities: substitution set and dependency blocks") {
    auto jp = preset_jet3();
    AbelianState st = abelian_induced_fast(jp.conn, 4);

    // the three-spatial-index conditions become identities under the
    // second-kind substitution
    const RingPtr& ring = st.ring;
    for (uint32_t z = 2; z <= 4; ++z) {
        const auto& t = st.Rt.at(z);
        for (const Multi& i : detail::compositions(3, z - 2))
            for (uint32_t tau = 1; tau <= 3; ++tau)
                for (uint32_t a = 1; a <= 3; ++a)
                    for (uint32_t b = a + 1; b <= 3; ++b)
                        for (uint32_t c = b + 1; c <= 3; ++c) {
                            auto k2 = [&](const Multi& m, uint32_t x, uint32_t y) {
                                return detail::tget(t.k2, ring, std::make_tuple(m, tau, x, y));
                            };
                            RingElement resid =
                                k2(detail::plus_e(i, a), b, c)
                                    .scaled(GaussianRational(static_cast<long>(i[a - 1] + 1))) -
                                k2(detail::plus_e(i, b), a, c)
                                    .scaled(GaussianRational(static_cast<long>(i[b - 1] + 1))) +
                                k2(detail::plus_e(i, c), a, b)
                                    .scaled(GaussianRational(static_cast<long>(i[c - 1] + 1)));
                            CHECK(resid.is_zero());
                        }
    }

    for (uint32_t z = 2; z <= 4; ++z) CHECK(third_kind_dependencies(st, z).all_pass());

    // n = 2: every block is a single independent coefficient and the report
    // passes trivially
    auto rnd = preset_random2(7);
    AbelianState st2 = abelian_induced_fast(rnd.conn, 4);
    for (uint32_t z = 2; z <= 4; ++z) CHECK(third_kind_dependencies(st2, z).all_pass());
}

TEST_CASE("class slot counts match the printed formulas") {
    // direct formula checks
    CHECK(class_counts(2, 2, RTables{}).R1.slots == 12);          // 4 * C(3,2)
    CHECK(class_counts(2, 3, RTables{}).R2.slots == 6);           // 2 * C(3,2) * C(2,2)
    CHECK(class_counts(3, 2, RTables{}).R3.slots == 54);          // 3 * C(4,2) * C(3,2)
    CHECK(class_counts(3, 2, RTables{}).R3_independent.slots == 45); // 3*3*C(5,4)
    for (uint32_t n = 2; n <= 3; ++n)
        for (uint32_t z = 2; z <= 5; ++z) CHECK(class_counts(n, z, RTables{}).slots_match);
}

TEST_CASE("validator battery and negative control") {
    auto sp = preset_sphere();
    AbelianState st = abelian_induced_fast(sp.conn, 6);
    CHECK(validate_abelian(st).all_pass());

    auto rnd = preset_random2(99);
    CHECK(validate_abelian(abelian_generic(rnd.conn, 5)).all_pass());

    // corrupt one correction component: the defining residual must fail
    AbelianState bad = st;
    bad.r.at(4) = bad.r.at(4).scaled(GaussianRational(2));
    CheckReport rep = validate_abelian(bad);
    CHECK_FALSE(rep.all_pass());
    bool defining_failed = false;
    for (const auto& item : rep.items)
        if (item.name == "defining equation residual" && !item.pass) defining_failed = true;
    CHECK(defining_failed);
}

TEST_CASE("vanishing families: calibration-robust ones hold, printed split does not") {
    auto sp = preset_sphere();
    AbelianState st = abelian_induced_fast(sp.conn, 5);
    CheckReport rep = check_vanishing_families(st);
    std::map<std::string, bool> items;
    for (const auto& it : rep.items) items[it.name] = it.pass;
    // consequences of the normalization alone: hold exactly
    CHECK(items.at("third-kind pure-power correction family"));
    CHECK(items.at("normalization contraction identity"));
    // the single-table split requires the opposite product kernel, which the
    // canonical commutation sign rules out; the faithful checks report that
    CHECK_FALSE(items.at("first-kind pure-power correction family (as printed)"));
    CHECK_FALSE(items.at("second-kind pure-power correction family (as printed)"));
    CHECK_FALSE(items.at("pure-power first-kind curvature family (as printed)"));

    // on the flat preset everything vanishes and all five pass
    auto flat = preset_flat(2);
    CHECK(check_vanishing_families(abelian_generic(flat.conn, 5)).all_pass());

    auto rnd = preset_random2(31);
    CheckReport rr = check_vanishing_families(abelian_induced_fast(rnd.conn, 4));
    std::map<std::string, bool> ri;
    for (const auto& it : rr.items) ri[it.name] = it.pass;
    CHECK(ri.at("third-kind pure-power correction family"));
    CHECK(ri.at("normalization contraction identity"));
}

TEST_CASE("metric-induced family: the printed simplification needs the other kernel") {
    auto sp = preset_sphere();
    AbelianState st = abelian_induced_fast(sp.conn, 6);
    // under the calibrated kernel the first-kind corrections do not vanish,
    // so the printed two-line family is reported as violated
    CheckReport rep = validate_riemannian_family(st);
    CHECK_FALSE(rep.all_pass());
    // trivially true on the flat preset
    auto flat = preset_flat(2);
    CHECK(validate_riemannian_family(abelian_generic(flat.conn, 5)).all_pass());
}
