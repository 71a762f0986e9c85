#pragma once

#include "gw0/rank1.hpp"

#include <vector>

namespace gw0 {

// Frame for the sum of n one-point theories, expressed in a basis with
// phi_1 = the unit (sum of the idempotents e_i) and phi_j = e_{j-1} - e_j.
// The metric is the pairing sum_i x_i y_i of the idempotent coordinates.
inline FramePtr points_frame(int n_points) {
    if (n_points < 1) throw precondition_error("need at least one point");
    const int N = n_points;
    // basis(i, a) = idempotent coordinate i of phi_a.
    RatMat basis = RatMat::Zero(N, N);
    for (int i = 0; i < N; ++i) basis(i, 0) = 1;
    for (int a = 2; a <= N; ++a) {
        basis(a - 2, a - 1) = 1;
        basis(a - 1, a - 1) = -1;
    }
    RatMat metric = basis.transpose() * basis;
    return make_frame(N, std::move(metric));
}

// Idempotent coordinates of the basis vectors of points_frame.
inline RatMat points_basis(int n_points) {
    const int N = n_points;
    RatMat basis = RatMat::Zero(N, N);
    for (int i = 0; i < N; ++i) basis(i, 0) = 1;
    for (int a = 2; a <= N; ++a) {
        basis(a - 2, a - 1) = 1;
        basis(a - 1, a - 1) = -1;
    }
    return basis;
}

// The potential of n points: the sum of rank-1 point potentials in
// idempotent coordinates, re-expressed in the unit frame. Each summand
// is imported by the cross-frame linear substitution; its Laurent
// stratum re-expands through the distinguished-image machinery because
// the summand's own dilaton direction is q_1^1 + (level-1 corrections).
inline Potential<Rational> points_potential(int n_points, int degcap, int zmax) {
    FramePtr target = points_frame(n_points);
    RatMat basis = points_basis(n_points);
    Potential<Rational> seed = point_potential(degcap, zmax);
    Caps caps = seed.series().caps();

    FormalSeries<Rational> total(target, caps);
    for (int i = 0; i < n_points; ++i) {
        // Factor i sees the idempotent coordinate y_k = sum_a basis(i,a) q_k^a.
        std::map<VarId, FormalSeries<Rational>> images;
        for (int k = 0; k <= zmax; ++k) {
            FormalSeries<Rational> img(target, caps);
            for (int a = 1; a <= n_points; ++a) {
                const Rational& c = basis(i, a - 1);
                if (c == 0) continue;
                VarId v{a, k};
                if (is_distinguished(v)) img.add_term(1, Monomial{}, c);
                else img.add_term(0, Monomial::var(v), c);
            }
            images.emplace(VarId{1, k}, std::move(img));
        }
        total = total + substitute(seed.series(), images);
    }
    return Potential<Rational>(std::move(total));
}

} // namespace gw0
