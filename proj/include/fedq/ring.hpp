#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <memory>
#include <numeric>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "fedq/error.hpp"
#include "fedq/rational.hpp"

namespace fedq {

// Opaque generator for one base-connection coefficient together with a
// spatial-derivative multi-index.  Lower indices are kept sorted (a <= b).
struct JetSymbol {
    uint32_t eps = 0;          // upper index, 1..n
    uint32_t a = 0, b = 0;     // lower indices, a <= b
    std::vector<uint32_t> jet; // derivative multi-index, length n

    JetSymbol() = default;
    JetSymbol(uint32_t eps_, uint32_t a_, uint32_t b_, std::vector<uint32_t> jet_)
        : eps(eps_), a(std::min(a_, b_)), b(std::max(a_, b_)), jet(std::move(jet_)) {}

    uint32_t jet_order() const { return std::accumulate(jet.begin(), jet.end(), 0u); }

    friend bool operator==(const JetSymbol& x, const JetSymbol& y) {
        return x.eps == y.eps && x.a == y.a && x.b == y.b && x.jet == y.jet;
    }
    friend bool operator<(const JetSymbol& x, const JetSymbol& y) {
        if (x.eps != y.eps) return x.eps < y.eps;
        if (x.a != y.a) return x.a < y.a;
        if (x.b != y.b) return x.b < y.b;
        return x.jet < y.jet;
    }

    std::string str() const {
        std::string s = "G" + std::to_string(eps) + "_" + std::to_string(a) + std::to_string(b);
        if (jet_order() > 0) {
            s += "[";
            for (size_t k = 0; k < jet.size(); ++k) {
                if (k) s += ",";
                s += std::to_string(jet[k]);
            }
            s += "]";
        }
        return s;
    }
};

// Canonical sparse monomial: exponents for q and p, declared function symbols
// with integer powers (negative powers give exact reciprocals, e.g. 1/sin),
// and jet symbols with positive powers.  The p-degree is cached so every term
// answers its momentum degree in O(1).
struct Mono {
    std::vector<uint32_t> q, p;                       // length n each
    std::vector<std::pair<uint32_t, int32_t>> fn;     // (symbol id, power != 0), sorted by id
    std::vector<std::pair<JetSymbol, uint32_t>> jet;  // sorted, power >= 1
    uint32_t pdeg = 0;                                // cached sum of p exponents

    void refresh_pdeg() { pdeg = std::accumulate(p.begin(), p.end(), 0u); }
    uint32_t q_degree() const { return std::accumulate(q.begin(), q.end(), 0u); }
    uint32_t p_degree() const { return pdeg; }
    bool is_constant() const {
        return q_degree() == 0 && pdeg == 0 && fn.empty() && jet.empty();
    }

    friend bool operator==(const Mono& x, const Mono& y) {
        return x.q == y.q && x.p == y.p && x.fn == y.fn && x.jet == y.jet;
    }
    friend bool operator<(const Mono& x, const Mono& y) {
        if (x.q != y.q) return x.q < y.q;
        if (x.p != y.p) return x.p < y.p;
        if (x.fn != y.fn) return x.fn < y.fn;
        return x.jet < y.jet;
    }
};

using TermMap = std::map<Mono, GaussianRational>;

class RingElement;

// Shared declaration table: base dimension plus the function symbols with
// their spatial-derivative closure.  Immutable once the presets finish
// declaring; values reference it through shared_ptr.
class Ring {
public:
    static std::shared_ptr<Ring> make(uint32_t n) { return std::shared_ptr<Ring>(new Ring(n)); }

    uint32_t n() const { return n_; }

    uint32_t declare_function(const std::string& name) {
        for (const auto& f : fns_)
            if (f.name == name) throw StructureError("symbol already declared: " + name);
        fns_.push_back({name, std::vector<TermMap>(n_)});
        return static_cast<uint32_t>(fns_.size() - 1);
    }

    void set_derivative(uint32_t id, uint32_t mu, const RingElement& d);

    uint32_t function_count() const { return static_cast<uint32_t>(fns_.size()); }
    const std::string& function_name(uint32_t id) const { return fns_.at(id).name; }
    const TermMap& function_derivative(uint32_t id, uint32_t mu) const {
        return fns_.at(id).dq.at(mu - 1);
    }
    std::optional<uint32_t> find_function(const std::string& name) const {
        for (uint32_t i = 0; i < fns_.size(); ++i)
            if (fns_[i].name == name) return i;
        return std::nullopt;
    }

    bool same_declarations(const Ring& o) const {
        if (n_ != o.n_ || fns_.size() != o.fns_.size()) return false;
        for (size_t i = 0; i < fns_.size(); ++i)
            if (fns_[i].name != o.fns_[i].name) return false;
        return true;
    }

private:
    explicit Ring(uint32_t n) : n_(n) {
        if (n == 0) throw StructureError("base dimension must be positive");
    }
    struct Fn {
        std::string name;
        std::vector<TermMap> dq; // dq[mu-1]; empty map = zero derivative
    };
    uint32_t n_;
    std::vector<Fn> fns_;
};

using RingPtr = std::shared_ptr<Ring>;

// Point assignment for exact evaluation.
struct PointAssignment {
    std::vector<GaussianRational> q, p;                 // length n each
    std::map<uint32_t, GaussianRational> fn;            // symbol id -> value
    std::map<JetSymbol, GaussianRational> jet;          // jet symbol -> value
};

// Immutable element of the differential ring.  All arithmetic is exact and
// results are canonical: no zero coefficients, terms sorted by Mono order.
class RingElement {
public:
    RingElement() = default;
    explicit RingElement(RingPtr ring) : ring_(std::move(ring)) {}

    static RingElement zero(RingPtr ring) { return RingElement(std::move(ring)); }
    static RingElement constant(RingPtr ring, GaussianRational c) {
        RingElement e(std::move(ring));
        if (!c.is_zero()) e.terms_[Mono{std::vector<uint32_t>(e.n(), 0), std::vector<uint32_t>(e.n(), 0), {}, {}, 0}] = std::move(c);
        return e;
    }
    static RingElement one(RingPtr ring) { return constant(std::move(ring), 1); }

    static RingElement q_var(RingPtr ring, uint32_t alpha) {
        RingElement e(std::move(ring));
        e.check_spatial(alpha);
        Mono m = e.unit_mono();
        m.q[alpha - 1] = 1;
        e.terms_[m] = 1;
        return e;
    }
    static RingElement p_var(RingPtr ring, uint32_t alpha) {
        RingElement e(std::move(ring));
        e.check_spatial(alpha);
        Mono m = e.unit_mono();
        m.p[alpha - 1] = 1;
        m.refresh_pdeg();
        e.terms_[m] = 1;
        return e;
    }
    // Either coordinate by phase-space index 1..2n.
    static RingElement coord(RingPtr ring, uint32_t k) {
        uint32_t n = ring->n();
        if (k == 0 || k > 2 * n) throw StructureError("coordinate index out of range");
        return k <= n ? q_var(std::move(ring), k) : p_var(std::move(ring), k - n);
    }
    static RingElement fn_sym(RingPtr ring, uint32_t id, int32_t power = 1) {
        if (id >= ring->function_count()) throw StructureError("undeclared function symbol");
        RingElement e(std::move(ring));
        if (power != 0) {
            Mono m = e.unit_mono();
            m.fn.emplace_back(id, power);
            e.terms_[m] = 1;
        } else {
            e = one(e.ring_);
        }
        return e;
    }
    static RingElement jet_sym(RingPtr ring, uint32_t eps, uint32_t a, uint32_t b) {
        uint32_t n = ring->n();
        if (eps == 0 || eps > n || a == 0 || a > n || b == 0 || b > n)
            throw StructureError("jet symbol index out of range");
        RingElement e(std::move(ring));
        Mono m = e.unit_mono();
        m.jet.emplace_back(JetSymbol(eps, a, b, std::vector<uint32_t>(n, 0)), 1);
        e.terms_[m] = 1;
        return e;
    }
    static RingElement from_terms(RingPtr ring, TermMap terms) {
        RingElement e(std::move(ring));
        for (auto& [m, c] : terms)
            if (!c.is_zero()) e.terms_.emplace(m, c);
        return e;
    }

    const RingPtr& ring() const { return ring_; }
    uint32_t n() const { return ring_ ? ring_->n() : 0; }
    const TermMap& terms() const { return terms_; }
    bool is_zero() const { return terms_.empty(); }
    size_t term_count() const { return terms_.size(); }

    bool is_constant() const {
        return terms_.empty() || (terms_.size() == 1 && terms_.begin()->first.is_constant());
    }
    GaussianRational constant_value() const {
        if (terms_.empty()) return 0;
        if (!is_constant()) throw StructureError("not a constant element");
        return terms_.begin()->second;
    }

    uint32_t p_degree() const {
        uint32_t d = 0;
        for (const auto& [m, c] : terms_) d = std::max(d, m.p_degree());
        return d;
    }
    bool depends_on_p() const { return p_degree() > 0; }
    uint32_t total_qp_degree() const {
        uint32_t d = 0;
        for (const auto& [m, c] : terms_) d = std::max(d, m.q_degree() + m.p_degree());
        return d;
    }

    bool operator==(const RingElement& o) const {
        return compatible(o) && terms_ == o.terms_;
    }
    bool operator!=(const RingElement& o) const { return !(*this == o); }

    RingElement operator-() const {
        RingElement r(ring_);
        for (const auto& [m, c] : terms_) r.terms_.emplace(m, -c);
        return r;
    }

    RingElement& operator+=(const RingElement& o) {
        require_compatible(o);
        for (const auto& [m, c] : o.terms_) add_term(m, c);
        return *this;
    }
    RingElement& operator-=(const RingElement& o) {
        require_compatible(o);
        for (const auto& [m, c] : o.terms_) add_term(m, -c);
        return *this;
    }
    friend RingElement operator+(RingElement a, const RingElement& b) { return a += b; }
    friend RingElement operator-(RingElement a, const RingElement& b) { return a -= b; }

    RingElement scaled(const GaussianRational& c) const {
        RingElement r(ring_);
        if (c.is_zero()) return r;
        for (const auto& [m, v] : terms_) r.terms_.emplace(m, v * c);
        return r;
    }
    friend RingElement operator*(const GaussianRational& c, const RingElement& a) {
        return a.scaled(c);
    }

    friend RingElement operator*(const RingElement& a, const RingElement& b) {
        a.require_compatible(b);
        RingElement r(a.ring_ ? a.ring_ : b.ring_);
        for (const auto& [ma, ca] : a.terms_)
            for (const auto& [mb, cb] : b.terms_) r.add_term(mul_mono(ma, mb), ca * cb);
        return r;
    }

    // Formal partial derivative with respect to phase-space coordinate
    // var = 1..2n (q for var <= n, p above).  Leibniz over every factor kind;
    // jet symbols pick up one more jet index.
    RingElement derive(uint32_t var) const {
        if (var == 0 || var > 2 * n()) throw StructureError("derivative index out of range");
        RingElement r(ring_);
        bool spatial = var <= n();
        uint32_t idx = spatial ? var - 1 : var - n() - 1;
        for (const auto& [m, c] : terms_) {
            if (spatial) {
                if (m.q[idx] > 0) {
                    Mono d = m;
                    d.q[idx] -= 1;
                    r.add_term(d, c * GaussianRational(static_cast<long>(m.q[idx])));
                }
                for (size_t f = 0; f < m.fn.size(); ++f) {
                    auto [id, pow] = m.fn[f];
                    const TermMap& dsym = ring_->function_derivative(id, var);
                    if (dsym.empty()) continue;
                    Mono base = m;
                    if (pow == 1)
                        base.fn.erase(base.fn.begin() + static_cast<long>(f));
                    else
                        base.fn[f].second = pow - 1;
                    GaussianRational k = c * GaussianRational(static_cast<long>(pow));
                    for (const auto& [dm, dc] : dsym) r.add_term(mul_mono(base, dm), k * dc);
                }
                for (size_t j = 0; j < m.jet.size(); ++j) {
                    auto [sym, pow] = m.jet[j];
                    Mono base = m;
                    if (pow == 1)
                        base.jet.erase(base.jet.begin() + static_cast<long>(j));
                    else
                        base.jet[j].second = pow - 1;
                    JetSymbol up = sym;
                    up.jet[idx] += 1;
                    Mono prolonged = base;
                    insert_jet(prolonged, up, 1);
                    r.add_term(prolonged, c * GaussianRational(static_cast<long>(pow)));
                }
            } else {
                // Function and jet symbols depend on q only.
                if (m.p[idx] > 0) {
                    Mono d = m;
                    d.p[idx] -= 1;
                    d.refresh_pdeg();
                    r.add_term(d, c * GaussianRational(static_cast<long>(m.p[idx])));
                }
            }
        }
        return r;
    }

    GaussianRational eval(const PointAssignment& at) const {
        if (at.q.size() != n() || at.p.size() != n())
            throw EvalError("assignment dimension mismatch");
        GaussianRational sum(0);
        for (const auto& [m, c] : terms_) {
            GaussianRational v = c;
            for (uint32_t a = 0; a < n(); ++a) {
                if (m.q[a]) v *= at.q[a].pow(m.q[a]);
                if (m.p[a]) v *= at.p[a].pow(m.p[a]);
            }
            for (const auto& [id, pow] : m.fn) {
                auto it = at.fn.find(id);
                if (it == at.fn.end())
                    throw EvalError("missing assignment for symbol " + ring_->function_name(id));
                if (pow < 0 && it->second.is_zero())
                    throw EvalError("zero value for inverted symbol " + ring_->function_name(id));
                v *= it->second.pow(pow);
            }
            for (const auto& [sym, pow] : m.jet) {
                auto it = at.jet.find(sym);
                if (it == at.jet.end())
                    throw EvalError("missing assignment for jet symbol " + sym.str());
                v *= it->second.pow(pow);
            }
            sum += v;
        }
        return sum;
    }

    // Substitute each q and p variable by the given elements (used by linear
    // chart transforms).  Function and jet symbols must be absent.
    RingElement substitute_linear(const std::vector<RingElement>& qs,
                                  const std::vector<RingElement>& ps) const {
        RingElement r = zero(ring_);
        for (const auto& [m, c] : terms_) {
            if (!m.fn.empty() || !m.jet.empty())
                throw StructureError("linear substitution requires a polynomial element");
            RingElement t = constant(ring_, c);
            for (uint32_t a = 0; a < n(); ++a) {
                for (uint32_t k = 0; k < m.q[a]; ++k) t = t * qs.at(a);
                for (uint32_t k = 0; k < m.p[a]; ++k) t = t * ps.at(a);
            }
            r += t;
        }
        return r;
    }

    // Rebuild this element against another ring carrying at least the same
    // declarations (symbols matched by name).
    RingElement migrate(const RingPtr& target) const {
        if (!ring_) return RingElement(target);
        std::vector<uint32_t> remap(ring_->function_count());
        for (uint32_t id = 0; id < ring_->function_count(); ++id) {
            auto found = target->find_function(ring_->function_name(id));
            if (!found) throw StructureError("target ring lacks symbol " + ring_->function_name(id));
            remap[id] = *found;
        }
        RingElement r(target);
        for (const auto& [m, c] : terms_) {
            Mono mm = m;
            for (auto& [id, pow] : mm.fn) id = remap[id];
            std::sort(mm.fn.begin(), mm.fn.end());
            r.add_term(mm, c);
        }
        return r;
    }

    bool compatible(const RingElement& o) const {
        if (!ring_ || !o.ring_) return true;
        return ring_ == o.ring_ || ring_->same_declarations(*o.ring_);
    }
    void require_compatible(const RingElement& o) const {
        if (!compatible(o))
            throw StructureError("ring elements come from incompatible declaration tables");
    }

    std::string str() const {
        if (terms_.empty()) return "0";
        std::ostringstream os;
        bool first = true;
        for (const auto& [m, c] : terms_) {
            if (!first) os << " + ";
            first = false;
            os << "(" << c.str() << ")";
            for (uint32_t a = 0; a < n(); ++a) {
                if (m.q[a]) {
                    os << "*q" << (a + 1);
                    if (m.q[a] > 1) os << "^" << m.q[a];
                }
            }
            for (uint32_t a = 0; a < n(); ++a) {
                if (m.p[a]) {
                    os << "*p" << (a + 1);
                    if (m.p[a] > 1) os << "^" << m.p[a];
                }
            }
            for (const auto& [id, pow] : m.fn) {
                os << "*" << ring_->function_name(id);
                if (pow != 1) os << "^" << pow;
            }
            for (const auto& [sym, pow] : m.jet) {
                os << "*" << sym.str();
                if (pow > 1) os << "^" << pow;
            }
        }
        return os.str();
    }

    void add_term(const Mono& m, const GaussianRational& c) {
        if (c.is_zero()) return;
        auto [it, fresh] = terms_.emplace(m, c);
        if (!fresh) {
            it->second += c;
            if (it->second.is_zero()) terms_.erase(it);
        }
    }

    Mono unit_mono() const {
        return Mono{std::vector<uint32_t>(n(), 0), std::vector<uint32_t>(n(), 0), {}, {}, 0};
    }

    static Mono mul_mono(const Mono& a, const Mono& b) {
        Mono r = a;
        for (size_t i = 0; i < r.q.size(); ++i) r.q[i] += b.q[i];
        for (size_t i = 0; i < r.p.size(); ++i) r.p[i] += b.p[i];
        r.pdeg = a.pdeg + b.pdeg;
        for (const auto& [id, pow] : b.fn) {
            auto it = std::lower_bound(r.fn.begin(), r.fn.end(), std::make_pair(id, INT32_MIN));
            if (it != r.fn.end() && it->first == id) {
                it->second += pow;
                if (it->second == 0) r.fn.erase(it);
            } else {
                r.fn.insert(it, {id, pow});
            }
        }
        for (const auto& [sym, pow] : b.jet) insert_jet(r, sym, pow);
        return r;
    }

private:
    void check_spatial(uint32_t alpha) const {
        if (alpha == 0 || alpha > n()) throw StructureError("base index out of range");
    }

    static void insert_jet(Mono& m, const JetSymbol& sym, uint32_t pow) {
        auto it = std::lower_bound(
            m.jet.begin(), m.jet.end(), sym,
            [](const std::pair<JetSymbol, uint32_t>& e, const JetSymbol& s) { return e.first < s; });
        if (it != m.jet.end() && it->first == sym)
            it->second += pow;
        else
            m.jet.insert(it, {sym, pow});
    }

    RingPtr ring_;
    TermMap terms_;
};

inline void Ring::set_derivative(uint32_t id, uint32_t mu, const RingElement& d) {
    if (id >= fns_.size()) throw StructureError("undeclared function symbol");
    if (mu == 0 || mu > n_) throw StructureError("derivative index out of range");
    if (d.p_degree() > 0)
        throw StructureError("function symbols depend on spatial coordinates only");
    fns_[id].dq[mu - 1] = d.terms();
}

} // namespace fedq
