#pragma once

#include "gw0/frame.hpp"
#include "gw0/series.hpp"

#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <utility>

namespace gw0 {

template <class K>
bool matrix_is_zero(const DenseMat<K>& m) {
    for (Eigen::Index i = 0; i < m.rows(); ++i)
        for (Eigen::Index j = 0; j < m.cols(); ++j)
            if (!is_zero(m(i, j))) return false;
    return true;
}

// End(H)-valued z-series: map from integer power i to the matrix
// coefficient of z^i. General container, powers of either sign; matrix
// arithmetic truncates below -zmax and keeps everything above.
template <class K>
struct EndSeries {
    FramePtr frame;
    int zmax = 0;
    std::map<int, DenseMat<K>> coeffs;

    EndSeries(FramePtr f, int m) : frame(std::move(f)), zmax(m) {
        if (zmax < 0) throw precondition_error("EndSeries zmax must be >= 0");
    }

    int dim() const { return frame->dim(); }

    static EndSeries identity(FramePtr f, int m) {
        EndSeries s(std::move(f), m);
        s.coeffs[0] = DenseMat<K>::Identity(s.dim(), s.dim());
        return s;
    }

    void add_coeff(int power, const DenseMat<K>& mat) {
        if (power < -zmax) return;
        auto it = coeffs.find(power);
        if (it == coeffs.end()) it = coeffs.emplace(power, DenseMat<K>::Zero(dim(), dim())).first;
        it->second += mat;
        if (matrix_is_zero(it->second)) coeffs.erase(it);
    }

    DenseMat<K> coeff(int power) const {
        auto it = coeffs.find(power);
        return it == coeffs.end() ? DenseMat<K>::Zero(dim(), dim()) : it->second;
    }

    bool is_zero() const { return coeffs.empty(); }
};

template <class K>
EndSeries<K> operator+(const EndSeries<K>& a, const EndSeries<K>& b) {
    require_same_frame(a.frame, b.frame);
    EndSeries<K> out(a.frame, std::min(a.zmax, b.zmax));
    for (const auto& [i, m] : a.coeffs) out.add_coeff(i, m);
    for (const auto& [i, m] : b.coeffs) out.add_coeff(i, m);
    return out;
}

template <class K>
EndSeries<K> operator*(const EndSeries<K>& a, const EndSeries<K>& b) {
    require_same_frame(a.frame, b.frame);
    EndSeries<K> out(a.frame, std::min(a.zmax, b.zmax));
    for (const auto& [i, ma] : a.coeffs)
        for (const auto& [j, mb] : b.coeffs) {
            if (i + j < -out.zmax) continue;
            out.add_coeff(i + j, DenseMat<K>(ma * mb));
        }
    return out;
}

template <class K>
EndSeries<K> operator*(const K& c, const EndSeries<K>& a) {
    EndSeries<K> out(a.frame, a.zmax);
    for (const auto& [i, m] : a.coeffs) out.add_coeff(i, DenseMat<K>(m * c));
    return out;
}

// M(z) -> M*(-z): coefficient at z^i becomes (-1)^i (M_i)*.
template <class K>
EndSeries<K> adjoint_flip(const EndSeries<K>& a) {
    EndSeries<K> out(a.frame, a.zmax);
    for (const auto& [i, m] : a.coeffs) {
        DenseMat<K> adj = adjoint(m, *a.frame);
        if (i % 2 != 0) adj = -adj;
        out.add_coeff(i, adj);
    }
    return out;
}

struct SymplecticReport {
    bool pass = true;
    std::optional<int> first_offending_power;
    std::string detail;
};

// Checks M*(-z) M(z) = Id on every computable power >= -zmax. A failure
// is a result, not an error. The scan visits powers in order of
// increasing magnitude (negative before positive on ties) and reports the
// first offender. Any series with a nonzero positive power fails here:
// its top coefficient would need (M_top)* M_top = 0, which the residual
// at the doubled power exposes.
template <class K>
SymplecticReport check_symplectic(const EndSeries<K>& m) {
    EndSeries<K> prod = adjoint_flip(m) * m;
    prod.add_coeff(0, DenseMat<K>(-DenseMat<K>::Identity(m.dim(), m.dim())));
    SymplecticReport rep;
    if (prod.is_zero()) return rep;
    int maxmag = 0;
    for (const auto& [i, mat] : prod.coeffs) maxmag = std::max(maxmag, i < 0 ? -i : i);
    for (int mag = 0; mag <= maxmag && rep.pass; ++mag) {
        for (int power : {-mag, mag}) {
            if (power < -m.zmax) continue;
            auto it = prod.coeffs.find(power);
            if (it == prod.coeffs.end()) continue;
            rep.pass = false;
            rep.first_offending_power = power;
            std::ostringstream os;
            os << "S*(-z)S(z) - Id has nonzero coefficient at z^" << power;
            rep.detail = os.str();
            break;
        }
    }
    return rep;
}

// Element of the Lie algebra g_-: finitely many matrices a_i (i >= 1) for
// z^{-i} with a_i* = (-1)^{i+1} a_i. Lie elements are exact finite data,
// not truncations; zmax only bounds the support.
template <class K>
struct LieElement {
    FramePtr frame;
    int zmax = 0;
    std::map<int, DenseMat<K>> coeffs; // i >= 1, matrix of z^{-i}

    LieElement(FramePtr f, int m) : frame(std::move(f)), zmax(m) {}

    void set(int i, DenseMat<K> mat) {
        if (i < 1 || i > zmax) throw precondition_error("Lie coefficient order out of range");
        if (matrix_is_zero(mat)) coeffs.erase(i);
        else coeffs[i] = std::move(mat);
    }

    DenseMat<K> get(int i) const {
        auto it = coeffs.find(i);
        return it == coeffs.end() ? DenseMat<K>::Zero(frame->dim(), frame->dim()) : it->second;
    }

    bool valid() const {
        for (const auto& [i, m] : coeffs) {
            DenseMat<K> adj = adjoint(m, *frame);
            if (i % 2 == 0) adj = -adj;
            if (adj != m) return false;
        }
        return true;
    }

    EndSeries<K> as_end_series(int zmax_out) const {
        EndSeries<K> s(frame, zmax_out);
        for (const auto& [i, m] : coeffs) s.add_coeff(-i, m);
        return s;
    }

    LieElement operator-() const {
        LieElement out(frame, zmax);
        for (const auto& [i, m] : coeffs) out.coeffs[i] = -m;
        return out;
    }
};

// Group element S(z) = Id + S_1 z^{-1} + ... + S_M z^{-M}, symplectic up
// to order M (a truncation of an infinite series; data to the stored
// order is taken as exact).
template <class K>
class GroupElement {
  public:
    explicit GroupElement(EndSeries<K> s) : series_(std::move(s)) { validate(); }

    const EndSeries<K>& series() const { return series_; }
    const FramePtr& frame() const { return series_.frame; }
    int zmax() const { return series_.zmax; }
    int dim() const { return series_.dim(); }

    // S_i, the matrix of z^{-i} (S_0 = Id).
    DenseMat<K> part(int i) const { return series_.coeff(-i); }

    bool lowest_order_vanishes() const { return series_.coeffs.count(-1) == 0; }

    static GroupElement identity(FramePtr f, int m) {
        return GroupElement(EndSeries<K>::identity(std::move(f), m));
    }

  private:
    // Shape only; symplecticity is a per-operation precondition (see
    // require_symplectic) so that non-symplectic truncations can still be
    // inverted and inspected.
    void validate() const {
        for (const auto& [i, m] : series_.coeffs) {
            if (i > 0) throw precondition_error("group element has a positive z-power");
            if (i == 0 && m != DenseMat<K>::Identity(dim(), dim()))
                throw precondition_error("group element must have Id at z^0");
        }
        if (!series_.coeffs.count(0))
            throw precondition_error("group element must have Id at z^0");
    }

    EndSeries<K> series_;
};

// exp of a Lie element, truncated at z^{-zmax_out}. Output passes
// check_symplectic exactly to that order.
template <class K>
GroupElement<K> exp_lie(const LieElement<K>& a, int zmax_out) {
    if (!a.valid())
        throw precondition_error("Lie element violates a_i* = (-1)^{i+1} a_i");
    EndSeries<K> acc = EndSeries<K>::identity(a.frame, zmax_out);
    EndSeries<K> az = a.as_end_series(zmax_out);
    EndSeries<K> term = EndSeries<K>::identity(a.frame, zmax_out);
    for (int k = 1; k <= zmax_out; ++k) {
        term = term * az;
        if (term.is_zero()) break;
        K inv_k = K(1) / K(k);
        term = inv_k * term;
        acc = acc + term;
    }
    return GroupElement<K>(std::move(acc));
}

// Unipotent inverse by the triangular recursion T_k = -sum_j S_j T_{k-j}.
template <class K>
GroupElement<K> inverse(const GroupElement<K>& s) {
    const int M = s.zmax();
    std::vector<DenseMat<K>> T(M + 1, DenseMat<K>::Zero(s.dim(), s.dim()));
    T[0] = DenseMat<K>::Identity(s.dim(), s.dim());
    for (int k = 1; k <= M; ++k) {
        DenseMat<K> acc = DenseMat<K>::Zero(s.dim(), s.dim());
        for (int j = 1; j <= k; ++j) acc += s.part(j) * T[k - j];
        T[k] = -acc;
    }
    EndSeries<K> out(s.frame(), M);
    for (int k = 0; k <= M; ++k) out.add_coeff(-k, T[k]);
    return GroupElement<K>(std::move(out));
}

template <class K>
GroupElement<K> operator*(const GroupElement<K>& a, const GroupElement<K>& b) {
    return GroupElement<K>(a.series() * b.series());
}

// The W_{k,l} operators of the quadratic form in the lower-triangular
// action, stored on the triangle k+l+1 <= order (all the data determines).
template <class K>
struct WMatrixFamily {
    FramePtr frame;
    int order = 0;
    std::map<std::pair<int, int>, DenseMat<K>> w;

    DenseMat<K> get(int k, int l) const {
        auto it = w.find({k, l});
        return it == w.end() ? DenseMat<K>::Zero(frame->dim(), frame->dim()) : it->second;
    }
};

// Solves sum_{m=0}^{k} W_{m,l} S_{k-m} = (-1)^{l+1} S_{k+l+1} for all
// k+l+1 <= order.
template <class K>
void require_symplectic(const GroupElement<K>& s) {
    SymplecticReport rep = check_symplectic(s.series());
    if (!rep.pass)
        throw precondition_error("group element is not symplectic to its order: " + rep.detail);
}

template <class K>
WMatrixFamily<K> w_matrices(const GroupElement<K>& s) {
    require_symplectic(s);
    WMatrixFamily<K> fam;
    fam.frame = s.frame();
    fam.order = s.zmax();
    for (int l = 0; l + 1 <= fam.order; ++l) {
        for (int k = 0; k + l + 1 <= fam.order; ++k) {
            DenseMat<K> acc = s.part(k + l + 1);
            if (l % 2 == 0) acc = -acc; // (-1)^{l+1}
            for (int m = 0; m < k; ++m) acc -= fam.get(m, l) * s.part(k - m);
            if (!matrix_is_zero(acc)) fam.w[{k, l}] = std::move(acc);
        }
    }
    return fam;
}

template <class K>
LieElement<K> cast_lie(const LieElement<Rational>& a) {
    LieElement<K> out(a.frame, a.zmax);
    for (const auto& [i, m] : a.coeffs) {
        DenseMat<K> mk(m.rows(), m.cols());
        for (int r = 0; r < m.rows(); ++r)
            for (int c = 0; c < m.cols(); ++c) mk(r, c) = scalar_from_rational<K>(m(r, c));
        out.set(i, std::move(mk));
    }
    return out;
}

} // namespace gw0
