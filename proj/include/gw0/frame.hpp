#pragma once

#include "gw0/dual.hpp"
#include "gw0/rational.hpp"

#include <Eigen/Dense>

#include <memory>
#include <utility>

namespace gw0 {

template <class K>
using DenseMat = Eigen::Matrix<K, Eigen::Dynamic, Eigen::Dynamic>;
template <class K>
using DenseVec = Eigen::Matrix<K, Eigen::Dynamic, 1>;

using RatMat = DenseMat<Rational>;
using RatVec = DenseVec<Rational>;

// The coefficient space H: dimension N, exact symmetric nondegenerate
// metric g, basis convention phi_1 = the unit vector. The inverse metric
// is computed once and cached. Frames are immutable; pass FramePtr around.
class Frame {
  public:
    Frame(int dim, RatMat metric) : dim_(dim), metric_(std::move(metric)) {
        if (dim_ < 1) throw precondition_error("frame dimension must be >= 1");
        if (metric_.rows() != dim_ || metric_.cols() != dim_)
            throw precondition_error("metric dimension mismatch");
        if (metric_ != RatMat(metric_.transpose()))
            throw precondition_error("metric must be symmetric");
        Eigen::FullPivLU<RatMat> lu(metric_);
        if (!lu.isInvertible())
            throw precondition_error("metric must be invertible");
        inverse_metric_ = lu.inverse();
    }

    int dim() const { return dim_; }
    const RatMat& metric() const { return metric_; }
    const RatMat& inverse_metric() const { return inverse_metric_; }
    const Rational& g(int alpha, int beta) const { return metric_(alpha - 1, beta - 1); }
    const Rational& ginv(int alpha, int beta) const { return inverse_metric_(alpha - 1, beta - 1); }

    friend bool operator==(const Frame& x, const Frame& y) {
        return x.dim_ == y.dim_ && x.metric_ == y.metric_;
    }
    friend bool operator!=(const Frame& x, const Frame& y) { return !(x == y); }

  private:
    int dim_;
    RatMat metric_;
    RatMat inverse_metric_;
};

using FramePtr = std::shared_ptr<const Frame>;

inline FramePtr make_frame(int dim, RatMat metric) {
    return std::make_shared<Frame>(dim, std::move(metric));
}

// Rank-1 frame with g_11 = 1.
inline FramePtr unit_frame() {
    RatMat g(1, 1);
    g(0, 0) = 1;
    return make_frame(1, std::move(g));
}

inline bool same_frame(const FramePtr& x, const FramePtr& y) {
    return x == y || (x && y && *x == *y);
}

inline void require_same_frame(const FramePtr& x, const FramePtr& y) {
    if (!same_frame(x, y)) throw precondition_error("frame mismatch");
}

// Metric adjoint: the unique A* with (A x, y) = (x, A* y), i.e.
// A* = G^{-1} A^T G. Stated once here and used everywhere.
template <class K>
DenseMat<K> adjoint(const DenseMat<K>& a, const Frame& frame) {
    const int n = frame.dim();
    DenseMat<K> gk(n, n), gi(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            gk(i, j) = scalar_from_rational<K>(frame.metric()(i, j));
            gi(i, j) = scalar_from_rational<K>(frame.inverse_metric()(i, j));
        }
    return gi * a.transpose() * gk;
}

} // namespace gw0
