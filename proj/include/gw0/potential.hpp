#pragma once

#include "gw0/parallel.hpp"
#include "gw0/series.hpp"

#include <sstream>
#include <string>
#include <vector>

namespace gw0 {

// A genus-0 potential in normal form: strata c_n at Laurent exponent
// 2 - n with deg c_n = n, i.e. every term has weight 2. The stratum
// homogeneity IS the dilaton equation, so construction only pins the
// storage contract and check_dilaton reports violations.
template <class K>
class Potential {
  public:
    explicit Potential(FormalSeries<K> series) : series_(std::move(series)) {
        if (series_.emin() != 2 - series_.degcap())
            throw precondition_error("potential storage floor must be 2 - degcap");
    }

    const FormalSeries<K>& series() const { return series_; }
    const FramePtr& frame() const { return series_.frame(); }
    int degcap() const { return series_.degcap(); }
    int zmax() const { return series_.zmax(); }
    int reliable() const { return series_.reliable(); }

    // c_n, the degree-n stratum at Laurent exponent 2 - n.
    typename FormalSeries<K>::Poly stratum(int n) const {
        return series_.laurent_component(2 - n);
    }

  private:
    FormalSeries<K> series_;
};

inline Caps potential_caps(int degcap, int zmax) {
    if (degcap < 3) throw precondition_error("potential degcap must be >= 3");
    if (zmax < 1) throw precondition_error("potential zmax must be >= 1");
    return Caps{degcap, zmax, 2 - degcap, degcap};
}

struct CheckResult {
    std::string name;
    bool pass = false;
    int checked_deg = 0;
    std::string detail;
};

struct TrrEntry {
    int k = 0, l = 0, m = 0;
    int alpha = 1, beta = 1, gamma = 1;
    bool pass = false;
    int checked_deg = 0;
};

struct AxiomReport {
    CheckResult dilaton;
    CheckResult string_eq;
    CheckResult cone;
    std::vector<TrrEntry> trr;
    bool has_dilaton = false, has_string = false, has_cone = false;

    bool all_pass() const {
        if (has_dilaton && !dilaton.pass) return false;
        if (has_string && !string_eq.pass) return false;
        if (has_cone && !cone.pass) return false;
        for (const auto& t : trr)
            if (!t.pass) return false;
        return true;
    }
};

namespace detail {

// Exact helper polynomials share the potential's caps but are fully
// reliable as stored.
template <class K>
Caps exact_caps(const FormalSeries<K>& s) {
    Caps c = s.caps();
    c.reliable = c.degcap;
    return c;
}

// (q_0, q_0) = sum g_{ab} q_0^a q_0^b.
template <class K>
FormalSeries<K> q0_pairing(const FormalSeries<K>& like) {
    const auto& fr = like.frame();
    FormalSeries<K> out(fr, exact_caps(like));
    for (int a = 1; a <= fr->dim(); ++a)
        for (int b = 1; b <= fr->dim(); ++b) {
            K g = scalar_from_rational<K>(fr->g(a, b));
            out.add_term(0, Monomial::var({a, 0}).times(Monomial::var({b, 0})), g);
        }
    return out;
}

template <class K>
FormalSeries<K> times_variable(const FormalSeries<K>& s, VarId v) {
    if (is_distinguished(v)) {
        FormalSeries<K> q = distinguished_series<K>(s.frame(), exact_caps(s));
        return q * s;
    }
    FormalSeries<K> q = variable_series<K>(s.frame(), exact_caps(s), v);
    return q * s;
}

} // namespace detail

// Dilaton equation, shifted form: sum_i q_i^a d_{a,i} F = 2F. Equivalent
// to per-term weight 2; checked term by term (the cone pairing check
// below goes through the differential machinery instead).
template <class K>
CheckResult check_dilaton(const Potential<K>& f) {
    CheckResult res;
    res.name = "dilaton";
    res.checked_deg = f.reliable();
    res.pass = true;
    for (const auto& [e, poly] : f.series().strata())
        for (const auto& [mono, c] : poly) {
            if (mono.degree() > res.checked_deg) continue;
            if (e + mono.degree() != 2) {
                res.pass = false;
                std::ostringstream os;
                os << "weight " << e + mono.degree() << " term at Q^" << e << "*" << mono.str();
                res.detail = os.str();
                return res;
            }
        }
    return res;
}

// String equation residual: sum_{i>=0} q_{i+1}^a d_{a,i} F + (q_0,q_0)/2.
template <class K>
FormalSeries<K> string_residual(const FormalSeries<K>& F) {
    const auto& fr = F.frame();
    FormalSeries<K> res(fr, F.caps());
    for (int i = 0; i + 1 <= F.zmax(); ++i)
        for (int a = 1; a <= fr->dim(); ++a) {
            VarId dv{a, i};
            VarId mv{a, i + 1};
            res = res + detail::times_variable(partial(F, dv), mv);
        }
    K half = scalar_from_rational<K>(rat(1, 2));
    res = res + half * detail::q0_pairing(F);
    return res;
}

template <class K>
CheckResult check_string(const Potential<K>& f) {
    FormalSeries<K> res = string_residual(f.series());
    CheckResult out;
    out.name = "string";
    out.checked_deg = res.reliable();
    out.pass = is_zero_on_reliable(res);
    if (!out.pass) out.detail = "residual " + res.str();
    return out;
}

// Cone pairing 2F = sum_i (p_i, q_i) with p_i^a = dF/dq_i^a. Same
// statement as the dilaton equation, computed through an independent
// path (derivatives and products instead of term inspection).
template <class K>
CheckResult check_cone_pairing(const Potential<K>& f) {
    const auto& F = f.series();
    const auto& fr = F.frame();
    FormalSeries<K> sum(fr, F.caps());
    for (int i = 0; i <= F.zmax(); ++i)
        for (int a = 1; a <= fr->dim(); ++a) {
            VarId v{a, i};
            sum = sum + detail::times_variable(partial(F, v), v);
        }
    FormalSeries<K> res = sum - (K(2) * F);
    CheckResult out;
    out.name = "cone";
    out.checked_deg = res.reliable();
    out.pass = is_zero_on_reliable(res);
    if (!out.pass) out.detail = "pairing defect " + res.str();
    return out;
}

// All third derivatives d_{a,i} d_{b,j} d_{c,k} F needed by the TRR
// sweep, memoized on the sorted key.
template <class K>
class ThirdDerivatives {
  public:
    explicit ThirdDerivatives(const FormalSeries<K>& F) : F_(F) {}

    const FormalSeries<K>& get(VarId x, VarId y, VarId z) {
        std::array<VarId, 3> key{x, y, z};
        std::sort(key.begin(), key.end());
        auto it = cache_.find(key);
        if (it != cache_.end()) return it->second;
        FormalSeries<K> d = partial(partial(partial(F_, key[0]), key[1]), key[2]);
        return cache_.emplace(key, std::move(d)).first->second;
    }

  private:
    const FormalSeries<K>& F_;
    std::map<std::array<VarId, 3>, FormalSeries<K>> cache_;
};

// One topological recursion relation:
// d_{a,k+1} d_{b,l} d_{c,m} F = d_{a,k} d_{mu,0} F g^{mu nu} d_{nu,0} d_{b,l} d_{c,m} F.
template <class K>
TrrEntry check_trr(const Potential<K>& f, int k, int l, int m, int alpha, int beta, int gamma,
                   ThirdDerivatives<K>* pool = nullptr) {
    const auto& F = f.series();
    const auto& fr = F.frame();
    if (k + 1 > F.zmax() || l > F.zmax() || m > F.zmax())
        throw precondition_error("TRR level out of range");

    std::optional<ThirdDerivatives<K>> local;
    if (!pool) {
        local.emplace(F);
        pool = &*local;
    }

    FormalSeries<K> lhs = pool->get({alpha, k + 1}, {beta, l}, {gamma, m});
    FormalSeries<K> rhs(fr, lhs.caps());
    for (int mu = 1; mu <= fr->dim(); ++mu) {
        FormalSeries<K> left = partial(partial(F, VarId{alpha, k}), VarId{mu, 0});
        for (int nu = 1; nu <= fr->dim(); ++nu) {
            K g = scalar_from_rational<K>(fr->ginv(mu, nu));
            if (gw0::is_zero(g)) continue;
            rhs = rhs + g * (left * pool->get({nu, 0}, {beta, l}, {gamma, m}));
        }
    }
    EqualityReport eq = equal_on_reliable(lhs, rhs);
    TrrEntry entry{k, l, m, alpha, beta, gamma, eq.equal, eq.checked_deg};
    return entry;
}

// Exhaustive sweep over k+1, l, m <= zmax and all index triples, with the
// (b,l) <-> (c,m) symmetry deduplicated. Deterministic order; distributes
// over the configured thread count.
template <class K>
std::vector<TrrEntry> trr_sweep(const Potential<K>& f) {
    const int M = f.zmax();
    const int N = f.frame()->dim();
    struct Task {
        int k, l, m, a, b, c;
    };
    std::vector<Task> tasks;
    for (int k = 0; k + 1 <= M; ++k)
        for (int l = 0; l <= M; ++l)
            for (int m = l; m <= M; ++m)
                for (int a = 1; a <= N; ++a)
                    for (int b = 1; b <= N; ++b)
                        for (int c = (m == l ? b : 1); c <= N; ++c)
                            tasks.push_back({k, l, m, a, b, c});

    std::vector<TrrEntry> out(tasks.size());
    parallel_for(tasks.size(), [&](std::size_t lo, std::size_t hi) {
        ThirdDerivatives<K> pool(f.series());
        for (std::size_t i = lo; i < hi; ++i) {
            const Task& t = tasks[i];
            out[i] = check_trr(f, t.k, t.l, t.m, t.a, t.b, t.c, &pool);
        }
    });
    return out;
}

template <class K>
AxiomReport verify_axioms(const Potential<K>& f, bool with_trr = true) {
    AxiomReport rep;
    rep.dilaton = check_dilaton(f);
    rep.has_dilaton = true;
    rep.string_eq = check_string(f);
    rep.has_string = true;
    rep.cone = check_cone_pairing(f);
    rep.has_cone = true;
    if (with_trr) rep.trr = trr_sweep(f);
    return rep;
}

} // namespace gw0
