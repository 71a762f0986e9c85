#pragma once

#include "gw0/loop_group.hpp"
#include "gw0/potential.hpp"
#include "gw0/series.hpp"

#include <map>
#include <optional>

namespace gw0 {

struct ActOptions {
    // Permits S_1 != 0 (the change of variables is then not well-defined
    // as an infinite sum; output reliability collapses unless a bound is
    // supplied).
    bool allow_s1 = false;
    std::optional<int> reliable_bound;
};

// Substitution images q_i^a -> sum_n (T_n q_{i+n})^a for T = S^{-1},
// over the potential's frame and caps.
template <class K>
std::map<VarId, FormalSeries<K>> action_images(const GroupElement<K>& t_inverse, FramePtr frame,
                                               Caps caps) {
    const int N = frame->dim();
    const int M = caps.zmax;
    std::map<VarId, FormalSeries<K>> images;
    for (int i = 0; i <= M; ++i)
        for (int a = 1; a <= N; ++a) {
            FormalSeries<K> img(frame, caps);
            for (int n = 0; i + n <= M; ++n) {
                DenseMat<K> Tn = t_inverse.part(n);
                for (int b = 1; b <= N; ++b) {
                    const K& c = Tn(a - 1, b - 1);
                    if (is_zero(c)) continue;
                    VarId target{b, i + n};
                    if (is_distinguished(target)) img.add_term(1, Monomial{}, c);
                    else img.add_term(0, Monomial::var(target), c);
                }
            }
            images.emplace(VarId{a, i}, std::move(img));
        }
    return images;
}

// The quadratic form (1/2) sum_{k,l} (W_{k,l} q_k, q_l) as a series.
// Pairs involving the distinguished variable land in the c_0/c_1 weight
// strata through the Laurent exponent.
template <class K>
FormalSeries<K> w_quadratic(const WMatrixFamily<K>& fam, FramePtr frame, Caps caps) {
    const int N = frame->dim();
    const int M = caps.zmax;
    Caps qcaps = caps;
    qcaps.reliable = qcaps.degcap;
    FormalSeries<K> out(frame, qcaps);
    K half = scalar_from_rational<K>(rat(1, 2));
    for (const auto& [kl, wmat] : fam.w) {
        const auto [k, l] = kl;
        if (k > M || l > M) continue;
        // (W q_k, q_l) = sum_{a,b} (W^T G)_{a,b} q_k^a q_l^b.
        DenseMat<K> gk(N, N);
        for (int r = 0; r < N; ++r)
            for (int c = 0; c < N; ++c) gk(r, c) = scalar_from_rational<K>(frame->metric()(r, c));
        DenseMat<K> pairing = wmat.transpose() * gk;
        for (int a = 1; a <= N; ++a)
            for (int b = 1; b <= N; ++b) {
                K coeff = half * pairing(a - 1, b - 1);
                if (is_zero(coeff)) continue;
                VarId va{a, k}, vb{b, l};
                int e = 0;
                Monomial mono;
                if (is_distinguished(va) && is_distinguished(vb)) {
                    e = 2;
                } else if (is_distinguished(va)) {
                    e = 1;
                    mono = Monomial::var(vb);
                } else if (is_distinguished(vb)) {
                    e = 1;
                    mono = Monomial::var(va);
                } else {
                    mono = Monomial::var(va).times(Monomial::var(vb));
                }
                out.add_term(e, mono, coeff);
            }
    }
    return out;
}

// Lower-triangular group action:
//   (S . F)(q) = F([S^{-1}(z) q(z)]_+) + (1/2) sum (W_{k,l} q_k, q_l).
// Requires the group element to carry data to order >= 2*zmax+1: the
// quadratic form at level pair (k,l) reads S_{k+l+1}.
template <class K>
Potential<K> act_lower(const GroupElement<K>& s, const Potential<K>& f,
                       const ActOptions& opts = {}) {
    require_same_frame(s.frame(), f.frame());
    require_symplectic(s);
    const int M = f.zmax();
    if (s.zmax() < 2 * M + 1)
        throw precondition_error("group element order too low for this action; need >= 2*zmax+1");
    if (!s.lowest_order_vanishes() && !opts.allow_s1)
        throw precondition_error("action with S_1 != 0 requires the explicit override");

    GroupElement<K> t = inverse(s);
    auto images = action_images(t, f.frame(), f.series().caps());
    SubstituteOptions sopts;
    sopts.reliable_bound = opts.reliable_bound;
    FormalSeries<K> moved = substitute(f.series(), images, sopts);

    WMatrixFamily<K> fam = w_matrices(s);
    FormalSeries<K> quad = w_quadratic(fam, f.frame(), f.series().caps());
    return Potential<K>(moved + quad);
}

// Infinitesimal action of a Lie element (genus-0 restriction):
//   delta_a F = sum_l [ -sum_{i>=0} (a_l q_{i+l})^b d_{b,i} F
//                       + (1/2) sum_{n=0}^{l-1} (-1)^{n+1} (a_l q_{l-1-n}, q_n) ].
// Derivative of act_lower(exp(eps a), F) at eps = 0; well-defined for all
// Lie elements, a_1 != 0 included.
template <class K>
FormalSeries<K> act_infinitesimal(const LieElement<K>& a, const Potential<K>& f) {
    require_same_frame(a.frame, f.frame());
    if (!a.valid())
        throw precondition_error("Lie element violates a_i* = (-1)^{i+1} a_i");
    const auto& F = f.series();
    const auto& fr = f.frame();
    const int N = fr->dim();
    const int M = f.zmax();

    Caps out_caps = F.caps();
    out_caps.reliable = F.reliable() - 1;
    FormalSeries<K> out(fr, out_caps);

    const int n_rows = N;
    DenseMat<K> gk(n_rows, n_rows);
    for (int r = 0; r < N; ++r)
        for (int c = 0; c < N; ++c) gk(r, c) = scalar_from_rational<K>(fr->metric()(r, c));
    K half = scalar_from_rational<K>(rat(1, 2));

    for (const auto& [l, al] : a.coeffs) {
        // Linear part: -sum_i (a_l q_{i+l})^b d_{b,i} F.
        for (int i = 0; i + l <= M; ++i)
            for (int b = 1; b <= N; ++b) {
                FormalSeries<K> dF = partial(F, VarId{b, i});
                if (dF.is_zero()) continue;
                for (int g = 1; g <= N; ++g) {
                    const K& c = al(b - 1, g - 1);
                    if (is_zero(c)) continue;
                    VarId mult{g, i + l};
                    FormalSeries<K> term = detail::times_variable(dF, mult);
                    out.add_scaled(term, -c);
                }
            }
        // Quadratic part: (1/2) sum_n (-1)^{n+1} (a_l q_{l-1-n}, q_n).
        DenseMat<K> pairing = al.transpose() * gk; // (a q, q') = q^T a^T G q'
        for (int n = 0; n <= l - 1; ++n) {
            int k = l - 1 - n;
            if (k > M || n > M) continue;
            K sign = (n % 2 == 0) ? K(-1) : K(1);
            for (int aa = 1; aa <= N; ++aa)
                for (int bb = 1; bb <= N; ++bb) {
                    K coeff = half * sign * pairing(aa - 1, bb - 1);
                    if (is_zero(coeff)) continue;
                    VarId va{aa, k}, vb{bb, n};
                    int e = 0;
                    Monomial mono;
                    if (is_distinguished(va) && is_distinguished(vb)) e = 2;
                    else if (is_distinguished(va)) { e = 1; mono = Monomial::var(vb); }
                    else if (is_distinguished(vb)) { e = 1; mono = Monomial::var(va); }
                    else mono = Monomial::var(va).times(Monomial::var(vb));
                    out.add_term(e, mono, coeff);
                }
        }
    }
    return out;
}

// Basis change fixing the unit: new basis phi'_b = sum_a P_{ab} phi_a with
// first column e_1 (so phi'_1 stays the unit and the distinguished
// variable maps to itself plus level-1 terms). Metric transforms
// congruently; all axiom checks are invariant.
template <class K>
Potential<K> change_frame(const Potential<K>& f, const RatMat& P) {
    const int N = f.frame()->dim();
    if (P.rows() != N || P.cols() != N)
        throw precondition_error("basis change has wrong dimensions");
    Eigen::FullPivLU<RatMat> lu(P);
    if (!lu.isInvertible()) throw precondition_error("basis change must be invertible");
    for (int a = 1; a <= N; ++a)
        if (P(a - 1, 0) != (a == 1 ? Rational(1) : Rational(0)))
            throw precondition_error("basis change must fix the unit vector");

    RatMat g_new = P.transpose() * f.frame()->metric() * P;
    FramePtr new_frame = make_frame(N, std::move(g_new));

    Caps caps = f.series().caps();
    std::map<VarId, FormalSeries<K>> images;
    for (int k = 0; k <= f.zmax(); ++k)
        for (int a = 1; a <= N; ++a) {
            FormalSeries<K> img(new_frame, caps);
            for (int b = 1; b <= N; ++b) {
                K c = scalar_from_rational<K>(P(a - 1, b - 1));
                if (is_zero(c)) continue;
                VarId target{b, k};
                if (is_distinguished(target)) img.add_term(1, Monomial{}, c);
                else img.add_term(0, Monomial::var(target), c);
            }
            images.emplace(VarId{a, k}, std::move(img));
        }
    return Potential<K>(substitute(f.series(), images));
}

} // namespace gw0
