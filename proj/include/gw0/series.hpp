#pragma once

#include "gw0/dual.hpp"
#include "gw0/frame.hpp"
#include "gw0/rational.hpp"

#include <algorithm>
#include <compare>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace gw0 {

// Variable q_level^alpha on the big phase space. The pair (1,1) is
// reserved: it names the distinguished Laurent variable, which never
// occurs inside a monomial (it lives in the Laurent exponent instead)
// but is a valid argument to partial()/substitute().
struct VarId {
    int alpha = 1;
    int level = 0;

    friend auto operator<=>(const VarId&, const VarId&) = default;
};

inline constexpr VarId distinguished_var{1, 1};

inline bool is_distinguished(VarId v) { return v == distinguished_var; }

// Sparse exponent list, sorted by (level, alpha), exponents > 0.
class Monomial {
  public:
    using Factor = std::pair<VarId, int>;

    Monomial() = default;
    explicit Monomial(std::vector<Factor> factors) : factors_(std::move(factors)) {
        normalize();
    }
    static Monomial var(VarId v) { return Monomial({{v, 1}}); }

    const std::vector<Factor>& factors() const { return factors_; }
    bool empty() const { return factors_.empty(); }

    int degree() const {
        int d = 0;
        for (const auto& [v, e] : factors_) d += e;
        return d;
    }
    int max_level() const {
        int m = 0;
        for (const auto& [v, e] : factors_) m = std::max(m, v.level);
        return m;
    }
    int exponent_of(VarId v) const {
        for (const auto& [w, e] : factors_)
            if (w == v) return e;
        return 0;
    }

    Monomial times(const Monomial& other) const {
        Monomial out;
        out.factors_.reserve(factors_.size() + other.factors_.size());
        auto a = factors_.begin(), b = other.factors_.begin();
        while (a != factors_.end() && b != other.factors_.end()) {
            if (a->first == b->first) {
                out.factors_.emplace_back(a->first, a->second + b->second);
                ++a, ++b;
            } else if (key(a->first) < key(b->first)) {
                out.factors_.push_back(*a++);
            } else {
                out.factors_.push_back(*b++);
            }
        }
        out.factors_.insert(out.factors_.end(), a, factors_.end());
        out.factors_.insert(out.factors_.end(), b, other.factors_.end());
        return out;
    }

    // Divides out one power of v; second component is the original
    // exponent (the derivative multiplicity). Requires v present.
    std::pair<Monomial, int> strip_one(VarId v) const {
        Monomial out = *this;
        for (auto it = out.factors_.begin(); it != out.factors_.end(); ++it) {
            if (it->first == v) {
                int e = it->second;
                if (--it->second == 0) out.factors_.erase(it);
                return {out, e};
            }
        }
        throw precondition_error("strip_one: variable absent");
    }

    friend bool operator==(const Monomial& x, const Monomial& y) {
        return x.factors_ == y.factors_;
    }
    friend auto operator<=>(const Monomial& x, const Monomial& y) {
        const auto n = std::min(x.factors_.size(), y.factors_.size());
        for (std::size_t i = 0; i < n; ++i) {
            if (auto c = key(x.factors_[i].first) <=> key(y.factors_[i].first); c != 0) return c;
            if (auto c = x.factors_[i].second <=> y.factors_[i].second; c != 0) return c;
        }
        return x.factors_.size() <=> y.factors_.size();
    }

    std::string str() const {
        if (factors_.empty()) return "1";
        std::ostringstream os;
        bool first = true;
        for (const auto& [v, e] : factors_) {
            if (!first) os << "*";
            first = false;
            os << "q" << v.level << "^" << v.alpha;
            if (e != 1) os << "**" << e;
        }
        return os.str();
    }

  private:
    static std::pair<int, int> key(VarId v) { return {v.level, v.alpha}; }
    void normalize() {
        std::sort(factors_.begin(), factors_.end(), [](const Factor& x, const Factor& y) {
            return key(x.first) < key(y.first);
        });
        std::vector<Factor> merged;
        for (const auto& f : factors_) {
            if (f.second == 0) continue;
            if (f.second < 0) throw precondition_error("negative exponent in monomial");
            if (is_distinguished(f.first))
                throw precondition_error("distinguished variable inside a monomial");
            if (!merged.empty() && merged.back().first == f.first)
                merged.back().second += f.second;
            else
                merged.push_back(f);
        }
        factors_ = std::move(merged);
    }

    std::vector<Factor> factors_;
};

// Truncation + reliability metadata. degcap D: max monomial degree kept;
// zmax M: max variable level kept; emin: lowest Laurent exponent kept;
// reliable R: largest degree (per Laurent stratum) at which stored
// coefficients are certified exact under the declared truncation.
struct Caps {
    int degcap = 0;
    int zmax = 0;
    int emin = 0;
    int reliable = 0;
};

inline Caps meet(const Caps& x, const Caps& y) {
    return Caps{std::min(x.degcap, y.degcap), std::min(x.zmax, y.zmax),
                std::max(x.emin, y.emin), std::min(x.reliable, y.reliable)};
}

// Truncated formal series over K in the variables q_k^alpha plus integer
// Laurent powers of the distinguished variable. Terms are stored per
// Laurent stratum as sparse monomial maps; zero coefficients are never
// stored.
template <class K>
class FormalSeries {
  public:
    using Poly = std::map<Monomial, K>;
    using Strata = std::map<int, Poly>;

    FormalSeries(FramePtr frame, Caps caps) : frame_(std::move(frame)), caps_(caps) {
        if (!frame_) throw precondition_error("null frame");
    }

    const FramePtr& frame() const { return frame_; }
    const Caps& caps() const { return caps_; }
    int degcap() const { return caps_.degcap; }
    int zmax() const { return caps_.zmax; }
    int emin() const { return caps_.emin; }
    int reliable() const { return caps_.reliable; }
    const Strata& strata() const { return strata_; }
    bool is_zero() const { return strata_.empty(); }

    void set_reliable(int r) { caps_.reliable = r; }

    std::size_t term_count() const {
        std::size_t n = 0;
        for (const auto& [e, poly] : strata_) n += poly.size();
        return n;
    }

    // Adds coeff * q1^e * mono, silently dropping out-of-cap terms.
    void add_term(int e, const Monomial& mono, const K& coeff) {
        if (is_zero_coeff(coeff)) return;
        if (e < caps_.emin || mono.degree() > caps_.degcap || mono.max_level() > caps_.zmax)
            return;
        auto& poly = strata_[e];
        auto it = poly.find(mono);
        if (it == poly.end()) {
            poly.emplace(mono, coeff);
        } else {
            it->second += coeff;
            if (is_zero_coeff(it->second)) {
                poly.erase(it);
                if (poly.empty()) strata_.erase(e);
            }
        }
    }

    void add_scaled(const FormalSeries& other, const K& scale) {
        require_same_frame(frame_, other.frame_);
        if (is_zero_coeff(scale)) return;
        for (const auto& [e, poly] : other.strata_)
            for (const auto& [mono, c] : poly) add_term(e, mono, c * scale);
    }

    // Stratum polynomial at Laurent exponent e (the c_n of the normal
    // form live at e = 2 - n). Zero polynomial if absent.
    Poly laurent_component(int e) const {
        auto it = strata_.find(e);
        return it == strata_.end() ? Poly{} : it->second;
    }

    const K* coeff(int e, const Monomial& mono) const {
        auto it = strata_.find(e);
        if (it == strata_.end()) return nullptr;
        auto jt = it->second.find(mono);
        return jt == it->second.end() ? nullptr : &jt->second;
    }

    K coeff_or_zero(int e, const Monomial& mono) const {
        const K* p = coeff(e, mono);
        return p ? *p : K(0);
    }

    // Uniform weight e + deg over all stored terms, if one exists.
    std::optional<int> homogeneous_weight() const {
        std::optional<int> w;
        for (const auto& [e, poly] : strata_)
            for (const auto& [mono, c] : poly) {
                int tw = e + mono.degree();
                if (!w) w = tw;
                else if (*w != tw) return std::nullopt;
            }
        return w ? w : std::optional<int>(0);
    }

    bool has_weight(int w) const {
        for (const auto& [e, poly] : strata_)
            for (const auto& [mono, c] : poly)
                if (e + mono.degree() != w) return false;
        return true;
    }

    std::string str() const {
        if (strata_.empty()) return "0";
        std::ostringstream os;
        bool first = true;
        for (const auto& [e, poly] : strata_)
            for (const auto& [mono, c] : poly) {
                if (!first) os << " + ";
                first = false;
                os << "(" << c << ")";
                if (e != 0) os << "*Q^" << e;
                if (!mono.empty()) os << "*" << mono.str();
            }
        return os.str();
    }

  private:
    static bool is_zero_coeff(const K& c) { return gw0::is_zero(c); }

    FramePtr frame_;
    Caps caps_;
    Strata strata_;
};

template <class K>
FormalSeries<K> zero_series(FramePtr frame, Caps caps) {
    return FormalSeries<K>(std::move(frame), caps);
}

template <class K>
FormalSeries<K> constant_series(FramePtr frame, Caps caps, const K& value) {
    FormalSeries<K> s(std::move(frame), caps);
    s.add_term(0, Monomial{}, value);
    return s;
}

// The series "q_k^alpha" (a single non-distinguished variable), fully
// reliable as stored.
template <class K>
FormalSeries<K> variable_series(FramePtr frame, Caps caps, VarId v) {
    if (is_distinguished(v))
        throw precondition_error("variable_series: use distinguished_series");
    if (v.alpha < 1 || v.alpha > frame->dim() || v.level < 0)
        throw precondition_error("variable out of frame range");
    FormalSeries<K> s(std::move(frame), caps);
    s.add_term(0, Monomial::var(v), K(1));
    return s;
}

// The distinguished variable itself: Laurent exponent 1, empty monomial.
template <class K>
FormalSeries<K> distinguished_series(FramePtr frame, Caps caps) {
    FormalSeries<K> s(std::move(frame), caps);
    s.add_term(1, Monomial{}, K(1));
    return s;
}

template <class K>
FormalSeries<K> operator+(const FormalSeries<K>& a, const FormalSeries<K>& b) {
    require_same_frame(a.frame(), b.frame());
    FormalSeries<K> out(a.frame(), meet(a.caps(), b.caps()));
    out.add_scaled(a, K(1));
    out.add_scaled(b, K(1));
    return out;
}

template <class K>
FormalSeries<K> operator-(const FormalSeries<K>& a, const FormalSeries<K>& b) {
    require_same_frame(a.frame(), b.frame());
    FormalSeries<K> out(a.frame(), meet(a.caps(), b.caps()));
    out.add_scaled(a, K(1));
    out.add_scaled(b, K(-1));
    return out;
}

template <class K>
FormalSeries<K> operator-(const FormalSeries<K>& a) {
    FormalSeries<K> out(a.frame(), a.caps());
    out.add_scaled(a, K(-1));
    return out;
}

template <class K>
FormalSeries<K> operator*(const K& scale, const FormalSeries<K>& a) {
    FormalSeries<K> out(a.frame(), a.caps());
    out.add_scaled(a, scale);
    return out;
}

// Product: Laurent exponents add, monomials multiply; output caps are the
// meet except emin, which adds (that is where product exponents land).
// Reliability: min of the factors.
template <class K>
FormalSeries<K> operator*(const FormalSeries<K>& a, const FormalSeries<K>& b) {
    require_same_frame(a.frame(), b.frame());
    Caps caps{std::min(a.degcap(), b.degcap()), std::min(a.zmax(), b.zmax()),
              a.emin() + b.emin(), std::min(a.reliable(), b.reliable())};
    FormalSeries<K> out(a.frame(), caps);
    for (const auto& [ea, pa] : a.strata())
        for (const auto& [ma, ca] : pa) {
            const int da = ma.degree();
            for (const auto& [eb, pb] : b.strata())
                for (const auto& [mb, cb] : pb) {
                    if (da + mb.degree() > caps.degcap) continue;
                    if (ea + eb < caps.emin) continue;
                    out.add_term(ea + eb, ma.times(mb), ca * cb);
                }
        }
    return out;
}

// Formal partial derivative. For the distinguished variable acts on the
// Laurent exponent (e -> e-1 with factor e); reliability drops by one for
// non-distinguished variables and is unchanged for the distinguished one.
template <class K>
FormalSeries<K> partial(const FormalSeries<K>& a, VarId v) {
    if (v.alpha < 1 || v.alpha > a.frame()->dim() || v.level < 0)
        throw precondition_error("partial: variable out of frame range");
    if (is_distinguished(v)) {
        Caps caps = a.caps();
        caps.emin = a.emin() - 1;
        FormalSeries<K> out(a.frame(), caps);
        for (const auto& [e, poly] : a.strata()) {
            if (e == 0) continue;
            for (const auto& [mono, c] : poly)
                out.add_term(e - 1, mono, c * K(e));
        }
        return out;
    }
    Caps caps = a.caps();
    caps.reliable = a.reliable() - 1;
    FormalSeries<K> out(a.frame(), caps);
    for (const auto& [e, poly] : a.strata())
        for (const auto& [mono, c] : poly) {
            if (mono.exponent_of(v) == 0) continue;
            auto [rest, mult] = mono.strip_one(v);
            out.add_term(e, rest, c * K(mult));
        }
    return out;
}

// A substitution image: must be weight-1 homogeneous and linear, i.e.
// every term is a single non-distinguished variable or a multiple of the
// distinguished variable (Laurent exponent 1, empty monomial).
template <class K>
void validate_linear_image(const FormalSeries<K>& img) {
    for (const auto& [e, poly] : img.strata()) {
        for (const auto& [mono, c] : poly) {
            if (e == 0 && mono.degree() == 1) continue;
            if (e == 1 && mono.empty()) continue;
            throw precondition_error("substitution image is not a linear form");
        }
    }
}

struct SubstituteOptions {
    // Certifies that the input's stored terms are its entire series (no
    // terms exist beyond the caps). Only consulted when some image feeds
    // the distinguished variable back into ordinary ones.
    bool input_complete = false;
    // Reliability to assign in the feedback case when input_complete is
    // false; "nothing certified" by default.
    std::optional<int> reliable_bound;
};

// Composition a(images). Missing variables map to themselves. The image
// of the distinguished variable must be (distinguished) + u with u linear
// in non-distinguished variables; negative Laurent powers re-expand
// through the generalized binomial series, truncated by the caps.
//
// Reliability: if no image of an ordinary variable contains the
// distinguished variable, output degree d receives contributions from
// input degrees <= d only, so R is preserved (u != 0 included). With
// feedback, contributions flow down from arbitrarily high degrees and R
// collapses to the caller-certified bound.
template <class K>
FormalSeries<K> substitute(const FormalSeries<K>& a,
                           const std::map<VarId, FormalSeries<K>>& images,
                           const SubstituteOptions& opts = {}) {
    FramePtr out_frame = a.frame();
    for (const auto& [v, img] : images) {
        validate_linear_image(img);
        out_frame = img.frame();
    }
    for (const auto& [v, img] : images)
        require_same_frame(out_frame, img.frame());
    const bool cross_frame = !same_frame(out_frame, a.frame());

    Caps caps = a.caps();
    FormalSeries<K> out(out_frame, caps);

    // u = image(distinguished) - distinguished; validate shape.
    FormalSeries<K> u(out_frame, caps);
    bool have_dist_image = false;
    if (auto it = images.find(distinguished_var); it != images.end()) {
        have_dist_image = true;
        const auto& img = it->second;
        if (img.coeff_or_zero(1, Monomial{}) != K(1))
            throw precondition_error(
                "image of the distinguished variable must be (distinguished) + u");
        u.add_scaled(img, K(1));
        u.add_term(1, Monomial{}, K(-1));
        for (const auto& [e, poly] : u.strata())
            if (e != 0)
                throw precondition_error(
                    "u part of the distinguished image must avoid the distinguished variable");
    }

    bool feedback = false;
    for (const auto& [v, img] : images) {
        if (is_distinguished(v)) continue;
        if (!img.strata().empty() && img.strata().count(1)) feedback = true;
    }
    if (cross_frame) {
        // Unmapped variables cannot default to themselves across frames.
        // Require every variable of the input to be covered.
        for (const auto& [e, poly] : a.strata())
            for (const auto& [mono, c] : poly)
                for (const auto& [v, exp] : mono.factors())
                    if (!images.count(v))
                        throw precondition_error("cross-frame substitution missing an image");
    }
    (void)have_dist_image;

    const bool u_zero = u.is_zero();

    // Cached powers of images and of the distinguished factor.
    std::map<VarId, std::vector<FormalSeries<K>>> image_pows;
    auto image_power = [&](VarId v, int k) -> const FormalSeries<K>& {
        auto& pows = image_pows[v];
        if (pows.empty()) {
            pows.push_back(constant_series<K>(out_frame, caps, K(1)));
            auto it = images.find(v);
            if (it != images.end()) pows.push_back(it->second);
            else pows.push_back(variable_series<K>(out_frame, caps, v));
        }
        while ((int)pows.size() <= k) pows.push_back(pows.back() * pows[1]);
        return pows[k];
    };

    std::vector<FormalSeries<K>> u_pows{constant_series<K>(out_frame, caps, K(1))};
    auto u_power = [&](int j) -> const FormalSeries<K>& {
        while ((int)u_pows.size() <= j) u_pows.push_back(u_pows.back() * u);
        return u_pows[j];
    };

    // (distinguished + u)^e, truncated: sum_j C(e,j) Q^{e-j} u^j.
    std::map<int, FormalSeries<K>> dist_pows;
    auto dist_power = [&](int e) -> const FormalSeries<K>& {
        auto it = dist_pows.find(e);
        if (it != dist_pows.end()) return it->second;
        FormalSeries<K> acc(out_frame, caps);
        if (u_zero) {
            if (e >= caps.emin) acc.add_term(e, Monomial{}, K(1));
        } else {
            const int jmax = (e >= 0) ? e : caps.degcap;
            for (int j = 0; j <= jmax; ++j) {
                if (e - j < caps.emin) break;
                K cj = scalar_from_rational<K>(binomial(e, j));
                const FormalSeries<K>& uj = u_power(j);
                for (const auto& [eu, pu] : uj.strata())
                    for (const auto& [mu, cu] : pu) acc.add_term(e - j + eu, mu, cj * cu);
            }
        }
        return dist_pows.emplace(e, std::move(acc)).first->second;
    };

    for (const auto& [e, poly] : a.strata()) {
        for (const auto& [mono, c] : poly) {
            FormalSeries<K> prod = constant_series<K>(out_frame, caps, c);
            for (const auto& [v, exp] : mono.factors()) prod = prod * image_power(v, exp);
            if (e != 0 || !u_zero) prod = prod * dist_power(e);
            out.add_scaled(prod, K(1));
        }
    }

    if (!feedback) {
        out.set_reliable(a.reliable());
    } else if (opts.input_complete) {
        out.set_reliable(a.reliable());
    } else {
        out.set_reliable(opts.reliable_bound.value_or(-1));
    }
    return out;
}

// Coefficient-wise equality on the intersection of reliable regions.
struct EqualityReport {
    bool equal = true;
    int checked_deg = 0;
    std::string first_difference;
};

template <class K>
EqualityReport equal_on_reliable(const FormalSeries<K>& a, const FormalSeries<K>& b) {
    require_same_frame(a.frame(), b.frame());
    EqualityReport rep;
    rep.checked_deg = std::min(a.reliable(), b.reliable());
    auto scan = [&](const FormalSeries<K>& x, const FormalSeries<K>& y) {
        for (const auto& [e, poly] : x.strata())
            for (const auto& [mono, c] : poly) {
                if (mono.degree() > rep.checked_deg) continue;
                if (y.coeff_or_zero(e, mono) != c) {
                    if (rep.equal) {
                        std::ostringstream os;
                        os << "Q^" << e << " * " << mono.str();
                        rep.first_difference = os.str();
                    }
                    rep.equal = false;
                }
            }
    };
    scan(a, b);
    scan(b, a);
    return rep;
}

template <class K>
bool is_zero_on_reliable(const FormalSeries<K>& a) {
    for (const auto& [e, poly] : a.strata())
        for (const auto& [mono, c] : poly)
            if (mono.degree() <= a.reliable()) return false;
    return true;
}

// Converts the coefficient ring (e.g. Rational -> Dual).
template <class K2, class K1>
FormalSeries<K2> cast_series(const FormalSeries<K1>& a) {
    FormalSeries<K2> out(a.frame(), a.caps());
    for (const auto& [e, poly] : a.strata())
        for (const auto& [mono, c] : poly) out.add_term(e, mono, K2(c));
    return out;
}

} // namespace gw0
