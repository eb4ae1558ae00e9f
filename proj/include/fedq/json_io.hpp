#pragma once

#include <string>

#include "json.hpp"

#include "fedq/fedosov.hpp"
#include "fedq/geometry.hpp"
#include "fedq/quantize.hpp"

namespace fedq {

using nlohmann::json;

// ---- ring elements ----------------------------------------------------------
// Canonical term list in storage order; rationals as "num/den" strings with
// the imaginary part in a separate field.

inline json to_json(const RingElement& e) {
    json terms = json::array();
    for (const auto& [m, c] : e.terms()) {
        json t;
        t["q"] = m.q;
        t["p"] = m.p;
        if (!m.fn.empty()) {
            json fns = json::array();
            for (const auto& [id, pow] : m.fn)
                fns.push_back(json::array({e.ring()->function_name(id), pow}));
            t["fn"] = fns;
        }
        if (!m.jet.empty()) {
            json jets = json::array();
            for (const auto& [sym, pow] : m.jet)
                jets.push_back(json::array({sym.eps, sym.a, sym.b, sym.jet, pow}));
            t["jet"] = jets;
        }
        t["re"] = GaussianRational::rat_str(c.re());
        t["im"] = GaussianRational::rat_str(c.im());
        terms.push_back(std::move(t));
    }
    return terms;
}

inline RingElement ring_element_from_json(const RingPtr& ring, const json& j,
                                          const std::string& path) {
    if (!j.is_array()) throw StructureError("schema violation at " + path + ": term array expected");
    RingElement out = RingElement::zero(ring);
    uint32_t n = ring->n();
    size_t idx = 0;
    for (const auto& t : j) {
        std::string tp = path + "/" + std::to_string(idx++);
        Mono m;
        m.q.assign(n, 0);
        m.p.assign(n, 0);
        if (t.contains("q")) {
            auto v = t.at("q").get<std::vector<uint32_t>>();
            if (v.size() != n) throw StructureError("schema violation at " + tp + "/q");
            m.q = v;
        }
        if (t.contains("p")) {
            auto v = t.at("p").get<std::vector<uint32_t>>();
            if (v.size() != n) throw StructureError("schema violation at " + tp + "/p");
            m.p = v;
        }
        if (t.contains("fn")) {
            for (const auto& f : t.at("fn")) {
                auto name = f.at(0).get<std::string>();
                auto pow = f.at(1).get<int32_t>();
                auto id = ring->find_function(name);
                if (!id) throw StructureError("undeclared symbol at " + tp + ": " + name);
                m.fn.emplace_back(*id, pow);
            }
            std::sort(m.fn.begin(), m.fn.end());
        }
        if (t.contains("jet")) {
            for (const auto& f : t.at("jet")) {
                JetSymbol sym(f.at(0).get<uint32_t>(), f.at(1).get<uint32_t>(),
                              f.at(2).get<uint32_t>(), f.at(3).get<std::vector<uint32_t>>());
                if (sym.jet.size() != n) throw StructureError("schema violation at " + tp + "/jet");
                m.jet.emplace_back(sym, f.at(4).get<uint32_t>());
            }
            std::sort(m.jet.begin(), m.jet.end());
        }
        m.refresh_pdeg();
        GaussianRational c = GaussianRational::from_strings(
            t.value("re", std::string("0")), t.value("im", std::string("0")));
        out.add_term(m, c);
    }
    return out;
}

// ---- Weyl series --------------------------------------------------------------
// Array of {k, j, form, coeff} sorted by (degree, k, j, form).

inline json to_json(const WeylSeries& s) {
    std::vector<std::pair<WeylKey, const RingElement*>> rows;
    rows.reserve(s.terms().size());
    for (const auto& [key, c] : s.terms()) rows.push_back({key, &c});
    std::stable_sort(rows.begin(), rows.end(), [](const auto& x, const auto& y) {
        if (x.first.degree() != y.first.degree()) return x.first.degree() < y.first.degree();
        return x.first < y.first;
    });
    json out = json::array();
    for (const auto& [key, c] : rows) {
        json t;
        t["k"] = key.k;
        t["j"] = key.y;
        json form = json::array();
        for (uint8_t i = 0; i < key.form.m; ++i) form.push_back(key.form.idx[i]);
        t["form"] = form;
        t["coeff"] = to_json(*c);
        out.push_back(std::move(t));
    }
    return out;
}

// ---- classified tables ---------------------------------------------------------

inline std::string multi_str(const Multi& i) {
    std::string s;
    for (size_t k = 0; k < i.size(); ++k) {
        if (k) s += ",";
        s += std::to_string(i[k]);
    }
    return s;
}

inline json to_json(const rTables& t, uint32_t n) {
    json out;
    json k1 = json::array(), k2 = json::array(), k3 = json::array();
    for (const auto& [key, v] : t.k1) {
        const auto& [i, a] = key;
        k1.push_back({{"key", "[0|" + multi_str(i) + "|0|" + std::to_string(a + n) + "]"},
                      {"coeff", to_json(v)}});
    }
    for (const auto& [key, v] : t.k2) {
        const auto& [i, tau, a] = key;
        k2.push_back({{"key", "[0|" + multi_str(i) + "|" + std::to_string(tau) + "|" +
                                  std::to_string(a) + "]"},
                      {"coeff", to_json(v)}});
    }
    for (const auto& [key, v] : t.k3) {
        const auto& [ups, i, a] = key;
        k3.push_back({{"key", "[" + std::to_string(ups) + "|" + multi_str(i) + "|0|" +
                                  std::to_string(a) + "]"},
                      {"coeff", to_json(v)}});
    }
    out["kind1"] = k1;
    out["kind2"] = k2;
    out["kind3"] = k3;
    return out;
}

inline json to_json(const RTables& t, uint32_t n) {
    json out;
    json k1 = json::array(), k2 = json::array(), k3 = json::array();
    for (const auto& [key, v] : t.k1) {
        const auto& [i, a, b] = key;
        k1.push_back({{"key", "[0|" + multi_str(i) + "|0|" + std::to_string(a) + "," +
                                  std::to_string(b + n) + "]"},
                      {"coeff", to_json(v)}});
    }
    for (const auto& [key, v] : t.k2) {
        const auto& [i, tau, a, b] = key;
        k2.push_back({{"key", "[0|" + multi_str(i) + "|" + std::to_string(tau) + "|" +
                                  std::to_string(a) + "," + std::to_string(b) + "]"},
                      {"coeff", to_json(v)}});
    }
    for (const auto& [key, v] : t.k3) {
        const auto& [ups, i, a, b] = key;
        k3.push_back({{"key", "[" + std::to_string(ups) + "|" + multi_str(i) + "|0|" +
                                  std::to_string(a) + "," + std::to_string(b) + "]"},
                      {"coeff", to_json(v)}});
    }
    out["kind1"] = k1;
    out["kind2"] = k2;
    out["kind3"] = k3;
    return out;
}

inline json to_json(const AbelianState& st) {
    json out;
    out["Z"] = st.Z;
    out["mode"] = st.mode == AbelianMode::generic ? "generic" : "induced-fast";
    json r = json::object(), R = json::object();
    for (const auto& [z, t] : st.rt) r[std::to_string(z)] = to_json(t, st.n);
    for (const auto& [z, t] : st.Rt) R[std::to_string(z)] = to_json(t, st.n);
    out["r"] = r;
    out["R"] = R;
    return out;
}

inline json to_json(const StarExpansion& e, const RingPtr& ring) {
    json out;
    out["N"] = e.N;
    json comps = json::object();
    for (const auto& [i, c] : e.components) comps[std::to_string(i)] = to_json(c);
    out["components"] = comps;
    json prov = json::object();
    for (const auto& [i, pairs] : e.provenance) {
        json rows = json::array();
        for (const auto& [za, zb] : pairs) rows.push_back(json::array({za, zb}));
        prov[std::to_string(i)] = rows;
    }
    out["provenance"] = prov;
    return out;
}

inline json to_json(const SymplecticConnection& c) {
    json out;
    out["n"] = c.n();
    json table = json::object();
    for (const auto& [key, v] : c.table())
        table[std::to_string(key[0]) + "," + std::to_string(key[1]) + "," +
              std::to_string(key[2])] = to_json(v);
    out["gamma"] = table;
    return out;
}

inline json to_json(const CurvatureTensor& K) {
    json out;
    out["n"] = K.n();
    json table = json::object();
    for (const auto& [key, v] : K.canonical_table())
        table[std::to_string(key[0]) + "," + std::to_string(key[1]) + "," +
              std::to_string(key[2]) + "," + std::to_string(key[3])] = to_json(v);
    out["K"] = table;
    return out;
}

inline json to_json(const CheckReport& rep) {
    json items = json::array();
    for (const auto& it : rep.items) {
        json row;
        row["name"] = it.name;
        row["pass"] = it.pass;
        if (!it.detail.empty()) row["detail"] = it.detail;
        items.push_back(row);
    }
    return json{{"pass", rep.all_pass()}, {"checks", items}};
}

} // namespace fedq
