#pragma once

#include "gw0/action.hpp"
#include "gw0/loop_group.hpp"
#include "gw0/potential.hpp"
#include "gw0/series.hpp"

#include <algorithm>
#include <map>
#include <sstream>
#include <string>
#include <vector>

namespace gw0 {

inline void require_rank1(const FramePtr& fr) {
    if (fr->dim() != 1) throw precondition_error("operation requires a rank-1 frame");
}

// Genus-0 psi-class intersection number <tau_{i_1} ... tau_{i_n}>.
// Produced by the string-equation recursion seeded by <tau_0^3> = 1,
// memoized on the sorted exponent vector. Zero unless sum i_j = n - 3.
inline Rational psi_intersection(std::vector<int> exponents) {
    const int n = static_cast<int>(exponents.size());
    if (n < 3) throw precondition_error("psi_intersection needs at least 3 marked points");
    long sum = 0;
    for (int e : exponents) {
        if (e < 0) throw precondition_error("negative psi exponent");
        sum += e;
    }
    if (sum != n - 3) return Rational(0);
    std::sort(exponents.begin(), exponents.end());

    static thread_local std::map<std::vector<int>, Rational> memo;
    auto it = memo.find(exponents);
    if (it != memo.end()) return it->second;

    Rational value(0);
    if (n == 3) {
        value = 1; // exponents are (0,0,0) here
    } else {
        // sum = n-3 < n forces a zero exponent; strip one tau_0 and
        // lower each remaining index in turn.
        std::vector<int> rest(exponents.begin() + 1, exponents.end());
        for (std::size_t j = 0; j < rest.size(); ++j) {
            if (rest[j] == 0) continue;
            std::vector<int> lowered = rest;
            --lowered[j];
            value += psi_intersection(lowered);
        }
    }
    memo.emplace(std::move(exponents), value);
    return value;
}

// The point potential in normal form: stratum n collects the multisets
// {k_1..k_n} with k_j in {0,2,..,M} and sum k_j = n-3, with coefficient
// (-1)^n <tau-multiset> / prod m_k! (the tau_1 insertions are resummed
// into the Laurent powers of the distinguished variable).
inline Potential<Rational> point_potential(int degcap, int zmax) {
    Caps caps = potential_caps(degcap, zmax);
    FramePtr fr = unit_frame();
    FormalSeries<Rational> F(fr, caps);

    std::vector<int> levels;
    levels.push_back(0);
    for (int k = 2; k <= zmax; ++k) levels.push_back(k);

    for (int n = 3; n <= degcap; ++n) {
        const int target = n - 3;
        std::vector<int> counts(levels.size(), 0);
        // Enumerates counts m_k with sum m_k = n, sum k*m_k = n-3.
        auto emit = [&]() {
            std::vector<int> exps;
            std::vector<Monomial::Factor> factors;
            Rational aut(1);
            for (std::size_t i = 0; i < levels.size(); ++i) {
                for (int c = 0; c < counts[i]; ++c) exps.push_back(levels[i]);
                if (counts[i] > 0) {
                    factors.push_back({VarId{1, levels[i]}, counts[i]});
                    for (int c = 1; c <= counts[i]; ++c) aut *= c;
                }
            }
            Rational corr = psi_intersection(exps);
            if (corr == 0) return;
            Rational coeff = corr / aut;
            if (n % 2 != 0) coeff = -coeff;
            F.add_term(2 - n, Monomial(factors), coeff);
        };
        auto rec = [&](auto&& self, std::size_t idx, int size_left, int sum_left) -> void {
            if (idx == levels.size()) {
                if (size_left == 0 && sum_left == 0) emit();
                return;
            }
            const int k = levels[idx];
            const int cmax = (k == 0) ? size_left : std::min(size_left, sum_left / std::max(k, 1));
            for (int c = 0; c <= cmax; ++c) {
                if (k * c > sum_left) break;
                counts[idx] = c;
                self(self, idx + 1, size_left - c, sum_left - k * c);
            }
            counts[idx] = 0;
        };
        rec(rec, 0, n, target);
    }
    return Potential<Rational>(std::move(F));
}

// Linear form q_0 + sum_{i>=2} alpha_i q_i; the q_0 coefficient is
// normalized to 1 and never stored.
struct LinearForm {
    std::map<int, Rational> alphas; // level >= 2 -> coefficient, nonzero
    int zmax = 0;

    Rational alpha(int i) const {
        auto it = alphas.find(i);
        return it == alphas.end() ? Rational(0) : it->second;
    }
    void set_alpha(int i, const Rational& v) {
        if (i < 2) throw precondition_error("linear form index must be >= 2");
        if (v == 0) alphas.erase(i);
        else alphas[i] = v;
    }

    FormalSeries<Rational> as_series(const FramePtr& fr, Caps caps) const {
        FormalSeries<Rational> s(fr, caps);
        s.add_term(0, Monomial::var({1, 0}), Rational(1));
        for (const auto& [i, v] : alphas) s.add_term(0, Monomial::var({1, i}), v);
        return s;
    }
};

// -d0^2 c_3 for a rank-1 potential, verified to cube back: c_3 must be
// -(1/6) L^3 with d0^3 c_3 = 1 and alpha_2 = 0.
inline LinearForm extract_cube(const Potential<Rational>& f) {
    require_rank1(f.frame());
    Caps caps = f.series().caps();
    FormalSeries<Rational> c3(f.frame(), caps);
    for (const auto& [mono, c] : f.stratum(3)) c3.add_term(0, mono, c);
    c3.set_reliable(caps.degcap);

    VarId q0{1, 0};
    FormalSeries<Rational> d3 = partial(partial(partial(c3, q0), q0), q0);
    d3.set_reliable(caps.degcap);
    FormalSeries<Rational> one = constant_series<Rational>(f.frame(), caps, Rational(1));
    if (!equal_on_reliable(d3, one).equal)
        throw precondition_error("extract_cube: d0^3 c_3 != 1");

    FormalSeries<Rational> L = -partial(partial(c3, q0), q0);
    L.set_reliable(caps.degcap);
    LinearForm form;
    form.zmax = f.zmax();
    for (const auto& [e, poly] : L.strata()) {
        if (e != 0) throw precondition_error("extract_cube: nonlinear cube root");
        for (const auto& [mono, c] : poly) {
            if (mono.degree() != 1) throw precondition_error("extract_cube: nonlinear cube root");
            int level = mono.factors()[0].first.level;
            if (level == 0) {
                if (c != 1) throw precondition_error("extract_cube: q_0 coefficient must be 1");
            } else {
                form.set_alpha(level, c);
            }
        }
    }
    if (form.alpha(2) != 0)
        throw precondition_error("extract_cube: alpha_2 != 0, input is not a genus-0 theory");

    Rational sixth = rat(-1, 6);
    FormalSeries<Rational> cube = sixth * (L * L * L);
    cube.set_reliable(caps.degcap);
    if (!equal_on_reliable(c3, cube).equal)
        throw precondition_error("extract_cube: c_3 is not -(1/6) L^3");
    return form;
}

namespace rank1_detail {

// Extended alpha table: given alphas up to zmax, odd entries beyond are
// zero and even entries follow from the beta-table walk. Even entries
// within range must already agree with the walk.
class AlphaTable {
  public:
    AlphaTable(const LinearForm& L, int upto, bool validate_given_evens) : upto_(upto) {
        if (L.alpha(2) != 0) throw precondition_error("alpha_2 must vanish");
        for (const auto& [i, v] : L.alphas)
            if (i <= upto_) given_[i] = v;
        for (int i = 2; i <= upto_; ++i) {
            if (i % 2 == 1) {
                ext_[i] = alpha_given(i);
            } else {
                Rational chain = chain_even(i);
                if (validate_given_evens && i <= L.zmax && alpha_given(i) != chain)
                    throw precondition_error(
                        "even cube coefficient alpha_" + std::to_string(i) +
                        " violates the odd-coefficient constraints");
                ext_[i] = chain;
            }
        }
    }

    Rational alpha(int i) const {
        auto it = ext_.find(i);
        return it == ext_.end() ? Rational(0) : it->second;
    }

  private:
    Rational alpha_given(int i) const {
        auto it = given_.find(i);
        return it == given_.end() ? Rational(0) : it->second;
    }

    // alpha_{2n} = beta_{2n-2,0} via the walk from the half-relation
    // anchor beta_{n-1,n} = alpha_n^2 / 2 along the antidiagonal.
    Rational chain_even(int two_n) const {
        const int s = two_n - 1;
        if (s < 5) return Rational(0); // alpha_4 = 0: the chain hits the empty index 1
        const int n = (s + 1) / 2;
        Rational cur = alpha(n) * alpha(n) / 2; // beta_{n-1, n}
        for (int p = n - 1; p + 1 <= s - 2; ++p) {
            // beta_{p+1, s-p-1} = alpha_{p+1} alpha_{s-p} - beta_{p, s-p}
            cur = alpha(p + 1) * alpha(s - p) - cur;
        }
        return cur; // beta_{s-2, 2} = beta_{s,0} = alpha_{s+1}
    }

    int upto_;
    std::map<int, Rational> given_;
    std::map<int, Rational> ext_;
};

} // namespace rank1_detail

// Symmetric table beta_{ij}, i,j in {0, 2, .., M}, from c_2 =
// (1/2) sum beta_{ij} q_i q_j.
struct BetaTable {
    int zmax = 0;
    std::map<std::pair<int, int>, Rational> entries;

    Rational get(int i, int j) const {
        if (i > j) std::swap(i, j);
        auto it = entries.find({i, j});
        return it == entries.end() ? Rational(0) : it->second;
    }
    void set(int i, int j, const Rational& v) {
        if (i > j) std::swap(i, j);
        if (v == 0) entries.erase({i, j});
        else entries[{i, j}] = v;
    }
};

inline bool valid_beta_index(int i) { return i == 0 || i >= 2; }

// Reads beta off a stored c_2 stratum.
inline BetaTable beta_from_c2(const Potential<Rational>& f) {
    require_rank1(f.frame());
    BetaTable table;
    table.zmax = f.zmax();
    for (const auto& [mono, c] : f.stratum(2)) {
        const auto& factors = mono.factors();
        if (mono.degree() != 2) throw precondition_error("c_2 stratum is not quadratic");
        if (factors.size() == 1) {
            table.set(factors[0].first.level, factors[0].first.level, 2 * c);
        } else {
            table.set(factors[0].first.level, factors[1].first.level, c);
        }
    }
    return table;
}

// Builds the beta table determined by a cube linear form: beta_{j,0} =
// alpha_{j+1}, beta_{j,2} = alpha_{j+3}, and the antidiagonal walk for
// the rest. Throws if the given even alphas contradict the odd ones.
inline BetaTable beta_from_alpha(const LinearForm& L, int zmax) {
    rank1_detail::AlphaTable alpha(L, 2 * zmax + 3, /*validate_given_evens=*/true);
    BetaTable table;
    table.zmax = zmax;
    std::map<std::pair<int, int>, Rational> memo;
    auto beta = [&](auto&& self, int p, int q) -> Rational {
        if (p > q) std::swap(p, q);
        if (!valid_beta_index(p) || !valid_beta_index(q))
            throw precondition_error("beta index 1 requested");
        if (p == 0) return q == 0 ? Rational(0) : alpha.alpha(q + 1);
        if (p == 2) return alpha.alpha(q + 3);
        auto it = memo.find({p, q});
        if (it != memo.end()) return it->second;
        // bebe with (i,j) = (p, q+1): beta_{p-1,q+1} + beta_{p,q} = alpha_p alpha_{q+1}
        Rational v = alpha.alpha(p) * alpha.alpha(q + 1) - self(self, p - 1, q + 1);
        memo.emplace(std::make_pair(p, q), v);
        return v;
    };
    for (int i : [&] {
             std::vector<int> idx{0};
             for (int k = 2; k <= zmax; ++k) idx.push_back(k);
             return idx;
         }())
        for (int j = i; j <= zmax; ++j) {
            if (!valid_beta_index(j)) continue;
            table.set(i, j, beta(beta, i, j));
        }
    // Internal cross-check: the half-relation anchor must be reproduced.
    for (int m = 3; m <= zmax; ++m) {
        if (m - 1 < 2) continue;
        if (table.get(m - 1, m) != alpha.alpha(m) * alpha.alpha(m) / 2)
            throw std::runtime_error("beta table walk lost the half-relation anchor");
    }
    return table;
}

struct Rank1Entry {
    std::string name;
    bool pass = true;
    std::string detail;
};

struct Rank1Report {
    std::vector<Rank1Entry> entries;
    bool all_pass() const {
        for (const auto& e : entries)
            if (!e.pass) return false;
        return true;
    }
};

namespace rank1_detail {

inline FormalSeries<Rational> stratum_series(const Potential<Rational>& f, int n) {
    Caps caps = f.series().caps();
    caps.reliable = caps.degcap;
    FormalSeries<Rational> s(f.frame(), caps);
    if (n >= 0)
        for (const auto& [mono, c] : f.stratum(n)) s.add_term(0, mono, c);
    return s;
}

// String-equation stratum nu:
//   d0 c_{3-nu} + (1+nu) q_2 c_{1-nu} + sum_{i>=2} q_{i+1} d_i c_{2-nu}
//     = -(1/2) q_0^2 delta_{nu,0}.
inline FormalSeries<Rational> se_residual(const Potential<Rational>& f, int nu) {
    const auto& fr = f.frame();
    const int M = f.zmax();
    VarId q0{1, 0};
    FormalSeries<Rational> res = partial(stratum_series(f, 3 - nu), q0);
    FormalSeries<Rational> c1nu = stratum_series(f, 1 - nu);
    res = res + Rational(1 + nu) * detail::times_variable(c1nu, VarId{1, 2});
    FormalSeries<Rational> c2nu = stratum_series(f, 2 - nu);
    for (int i = 2; i + 1 <= M; ++i)
        res = res + detail::times_variable(partial(c2nu, VarId{1, i}), VarId{1, i + 1});
    if (nu == 0) {
        Monomial q0sq = Monomial::var(q0).times(Monomial::var(q0));
        res.add_term(0, q0sq, rat(1, 2));
    }
    return res;
}

// TRR_{0,1,1} stratum nu residual:
//   (nu+3)(nu+2)(nu+1) c_{-nu-1}
//     - sum_{m1+m2=2-nu} (2-m2)(1-m2) d0^2 c_{m1} d0 c_{m2}.
inline FormalSeries<Rational> trr011_residual(const Potential<Rational>& f, int nu) {
    VarId q0{1, 0};
    Rational lead = Rational(nu + 3) * Rational(nu + 2) * Rational(nu + 1);
    FormalSeries<Rational> res = lead * stratum_series(f, -nu - 1);
    for (int m2 = 0; m2 <= 2 - nu; ++m2) {
        int m1 = 2 - nu - m2;
        Rational factor = Rational(2 - m2) * Rational(1 - m2);
        if (factor == 0) continue;
        if (m1 > f.degcap() || m2 > f.degcap()) continue;
        FormalSeries<Rational> d2c = partial(partial(stratum_series(f, m1), q0), q0);
        if (d2c.is_zero()) continue;
        FormalSeries<Rational> dc = partial(stratum_series(f, m2), q0);
        if (dc.is_zero()) continue;
        res = res - factor * (d2c * dc);
    }
    return res;
}

} // namespace rank1_detail

// Verifies the explicit rank-1 stratum equations: every SE(nu) within
// reach (including triviality for nu > 2), every TRR_{0,1,1}(nu) for
// nu <= -4 plus the trivial window, and the alpha/beta relation set
// against the stored strata.
inline Rank1Report check_rank1_relations(const Potential<Rational>& f) {
    require_rank1(f.frame());
    Rank1Report rep;
    const int R = std::min(f.reliable(), f.degcap());
    const int M = f.zmax();

    auto push = [&](std::string name, bool pass, std::string detail = "") {
        rep.entries.push_back({std::move(name), pass, std::move(detail)});
    };

    for (int nu = 5; nu >= 3 - R; --nu) {
        if (3 - nu > f.degcap()) continue;
        FormalSeries<Rational> res = rank1_detail::se_residual(f, nu);
        std::ostringstream name;
        name << "SE(" << nu << ")";
        bool zero = res.is_zero();
        push(name.str(), zero, zero ? "" : "residual " + res.str());
    }

    for (int nu = 0; nu >= -R - 1; --nu) {
        if (-nu - 1 > f.degcap()) continue;
        FormalSeries<Rational> res = rank1_detail::trr011_residual(f, nu);
        std::ostringstream name;
        name << "TRR011(" << nu << ")";
        bool zero = res.is_zero();
        push(name.str(), zero, zero ? "" : "residual " + res.str());
    }

    bool have_cube = true;
    LinearForm L;
    try {
        L = extract_cube(f);
    } catch (const precondition_error& e) {
        have_cube = false;
        push("cube", false, e.what());
    }
    if (have_cube) {
        push("cube", true);
        push("alpha2", L.alpha(2) == 0);
        BetaTable beta = beta_from_c2(f);
        push("beta00", beta.get(0, 0) == 0,
             beta.get(0, 0) == 0 ? "" : "beta_{0,0} = " + format_rational(beta.get(0, 0)));

        // (c0c1): c_0 = -beta_{2,0}/2 and c_1 = -sum_i beta_{i+1,0} q_i.
        Rational c0(0);
        for (const auto& [mono, c] : f.stratum(0)) c0 = c;
        push("c0", c0 == -beta.get(2, 0) / 2);
        bool c1ok = true;
        FormalSeries<Rational> c1 = rank1_detail::stratum_series(f, 1);
        for (int i = 2; i + 1 <= M; ++i) {
            if (c1.coeff_or_zero(0, Monomial::var({1, i})) != -beta.get(i + 1, 0)) c1ok = false;
        }
        push("c1", c1ok);

        bool alnbe0 = true;
        for (int n = 3; n - 1 <= M; ++n) {
            if (n > M) break;
            if (L.alpha(n) != beta.get(n - 1, 0)) alnbe0 = false;
        }
        push("alnbe0", alnbe0);

        bool be0be2 = true;
        for (int n = 2; n + 1 <= M; ++n)
            if (beta.get(n + 1, 0) != beta.get(n - 1, 2)) be0be2 = false;
        push("be0be2", be0be2);

        bool bebe = true;
        for (int i = 3; i <= M; ++i)
            for (int j = i; j <= M; ++j) {
                if (i - 1 < 2 || j - 1 < 2) continue;
                if (i == j) {
                    if (beta.get(i - 1, i) != L.alpha(i) * L.alpha(i) / 2) bebe = false;
                } else {
                    if (beta.get(i - 1, j) + beta.get(i, j - 1) != L.alpha(i) * L.alpha(j))
                        bebe = false;
                }
            }
        push("bebe", bebe);

        bool evenok = true;
        try {
            rank1_detail::AlphaTable check(L, M, true);
            (void)check;
        } catch (const precondition_error&) {
            evenok = false;
        }
        push("even-from-odd", evenok);
    }
    return rep;
}

// Orbit coordinates (a_3, a_5, ...).
struct OrbitCoords {
    std::vector<Rational> values; // values[i] = a_{2i+3}

    int depth() const { return static_cast<int>(values.size()); }
    Rational at(int i) const { return i < depth() ? values[i] : Rational(0); }
};

// Applies exp(sum a_{2i+1} z^{-2i-1}) to the point potential.
inline Potential<Rational> rank1_from_coords(const OrbitCoords& coords, int degcap, int zmax) {
    if (2 * coords.depth() + 1 > zmax)
        throw precondition_error("orbit coordinates exceed the truncation depth");
    FramePtr fr = unit_frame();
    const int order = 2 * zmax + 1;
    LieElement<Rational> a(fr, order);
    for (int i = 0; i < coords.depth(); ++i) {
        if (coords.values[i] == 0) continue;
        RatMat m(1, 1);
        m(0, 0) = coords.values[i];
        a.set(2 * i + 3, std::move(m));
    }
    GroupElement<Rational> S = exp_lie(a, order);
    return act_lower(S, point_potential(degcap, zmax));
}

// Inverse of rank1_from_coords: strips the cube coefficients
// alpha_3, alpha_5, ... one odd level at a time, asserting that the even
// ones vanish on their own at every stage. The group elements applied
// here always have S_1 = 0.
inline OrbitCoords rank1_coords(const Potential<Rational>& f) {
    require_rank1(f.frame());
    const int M = f.zmax();
    const int depth = (M - 1) / 2;
    const int order = 2 * M + 1;
    OrbitCoords coords;
    Potential<Rational> cur = f;
    for (int k = 1; k <= depth; ++k) {
        LinearForm L = extract_cube(cur);
        for (int i = 2; i <= 2 * k; ++i)
            if (L.alpha(i) != 0)
                throw precondition_error(
                    "cube coefficient alpha_" + std::to_string(i) +
                    " should have vanished; input is not a genus-0 theory");
        Rational strip = L.alpha(2 * k + 1);
        coords.values.push_back(-strip);
        if (strip == 0) continue;
        LieElement<Rational> a(f.frame(), order);
        RatMat m(1, 1);
        m(0, 0) = strip;
        a.set(2 * k + 1, std::move(m));
        cur = act_lower(exp_lie(a, order), cur);
    }
    LinearForm final_form = extract_cube(cur);
    for (int i = 2; i <= M; ++i)
        if (final_form.alpha(i) != 0)
            throw precondition_error("residual cube coefficients after stripping; "
                                     "input is not a genus-0 theory at this truncation");
    return coords;
}

// Rebuilds the full potential from its cube linear form using only the
// string equation and TRR_{0,1,1}: c_3 = -L^3/6; c_0, c_1, c_2 from the
// beta table; d0 c_n from SE(3-n), then c_n from TRR_{0,1,1}(-n-1).
inline Potential<Rational> reconstruct_from_c3(const LinearForm& L, int degcap, int zmax) {
    if (L.alpha(2) != 0)
        throw precondition_error("reconstruct_from_c3: alpha_2 must vanish");
    for (const auto& [i, v] : L.alphas)
        if (i > zmax) throw precondition_error("linear form exceeds the level truncation");

    Caps caps = potential_caps(degcap, zmax);
    FramePtr fr = unit_frame();
    VarId q0{1, 0};
    const int M = zmax;

    rank1_detail::AlphaTable alpha(L, 2 * M + 3, true);
    BetaTable beta = beta_from_alpha(L, M);

    // Strata as exact polynomial series at e = 0.
    std::vector<FormalSeries<Rational>> c(std::max(4, degcap + 1), FormalSeries<Rational>(fr, caps));
    for (auto& s : c) s.set_reliable(caps.degcap);

    c[0].add_term(0, Monomial{}, -alpha.alpha(3) / 2); // c_0 = -beta_{2,0}/2
    for (int i = 2; i <= M; ++i)
        c[1].add_term(0, Monomial::var({1, i}), -alpha.alpha(i + 2)); // c_1 = -sum beta_{i+1,0} q_i
    {
        std::vector<int> idx{0};
        for (int k = 2; k <= M; ++k) idx.push_back(k);
        for (std::size_t x = 0; x < idx.size(); ++x)
            for (std::size_t y = x; y < idx.size(); ++y) {
                Rational b = beta.get(idx[x], idx[y]);
                if (b == 0) continue;
                Monomial mono = Monomial::var({1, idx[x]}).times(Monomial::var({1, idx[y]}));
                Rational coeff = (idx[x] == idx[y]) ? Rational(b / 2) : b;
                c[2].add_term(0, mono, coeff);
            }
    }
    {
        FormalSeries<Rational> Ls = L.as_series(fr, caps);
        Ls.set_reliable(caps.degcap);
        c[3] = rat(-1, 6) * (Ls * Ls * Ls);
    }

    for (int n = 4; n <= degcap; ++n) {
        // d0 c_n from SE(3-n): d0 c_n = -(4-n) q_2 c_{n-2} - sum_i q_{i+1} d_i c_{n-1}.
        FormalSeries<Rational> d0cn = Rational(n - 4) * detail::times_variable(c[n - 2], VarId{1, 2});
        for (int i = 2; i + 1 <= M; ++i)
            d0cn = d0cn - detail::times_variable(partial(c[n - 1], VarId{1, i}), VarId{1, i + 1});

        // c_n from TRR_{0,1,1}(-n-1):
        //   -n(1-n)(2-n) c_n = 2 d0^2 c_n d0 c_3 + (2-n)(1-n) d0^2 c_3 d0 c_n
        //                      + sum_{m2=4}^{n-1} (2-m2)(1-m2) d0^2 c_{n+3-m2} d0 c_{m2}.
        FormalSeries<Rational> rhs = Rational(2) * (partial(d0cn, q0) * partial(c[3], q0));
        Rational fac_n = Rational(2 - n) * Rational(1 - n);
        rhs = rhs + fac_n * (partial(partial(c[3], q0), q0) * d0cn);
        for (int m2 = 4; m2 <= n - 1; ++m2) {
            int m1 = n + 3 - m2;
            if (m1 > degcap) continue;
            Rational factor = Rational(2 - m2) * Rational(1 - m2);
            rhs = rhs + factor * (partial(partial(c[m1], q0), q0) * partial(c[m2], q0));
        }
        Rational lead = Rational(-n) * Rational(1 - n) * Rational(2 - n);
        Rational inv_lead = Rational(1) / lead;
        FormalSeries<Rational> cn = inv_lead * rhs;
        cn.set_reliable(caps.degcap);

        // Consistency: the TRR-derived stratum must differentiate back to
        // the SE-derived d0 c_n.
        FormalSeries<Rational> back = partial(cn, q0);
        back.set_reliable(caps.degcap);
        d0cn.set_reliable(caps.degcap);
        if (!equal_on_reliable(back, d0cn).equal)
            throw precondition_error(
                "reconstruction inconsistency at stratum " + std::to_string(n) +
                "; the linear form does not come from a genus-0 theory");
        c[n] = std::move(cn);
    }

    FormalSeries<Rational> F(fr, caps);
    for (int n = 0; n <= degcap; ++n)
        for (const auto& [e, poly] : c[n].strata())
            for (const auto& [mono, coeff] : poly) F.add_term(2 - n, mono, coeff);
    return Potential<Rational>(std::move(F));
}

} // namespace gw0
