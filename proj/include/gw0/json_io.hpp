#pragma once

#include "gw0/frobenius.hpp"
#include "gw0/loop_group.hpp"
#include "gw0/potential.hpp"
#include "gw0/rank1.hpp"
#include "gw0/series.hpp"

#include <json.hpp>

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <string>

namespace gw0 {

using json = nlohmann::ordered_json;

// ---- frames ---------------------------------------------------------

inline json frame_to_json(const Frame& fr) {
    json metric = json::array();
    for (int i = 0; i < fr.dim(); ++i) {
        json row = json::array();
        for (int j = 0; j < fr.dim(); ++j) row.push_back(format_rational(fr.metric()(i, j)));
        metric.push_back(std::move(row));
    }
    return json{{"dim", fr.dim()}, {"metric", std::move(metric)}};
}

inline FramePtr frame_from_json(const json& j) {
    if (!j.is_object() || !j.contains("dim") || !j.contains("metric"))
        throw io_error("frame object needs dim and metric");
    int dim = j.at("dim").get<int>();
    if (dim < 1) throw io_error("frame dim must be >= 1");
    const json& m = j.at("metric");
    if (!m.is_array() || (int)m.size() != dim) throw io_error("metric has wrong shape");
    RatMat metric(dim, dim);
    for (int i = 0; i < dim; ++i) {
        if (!m[i].is_array() || (int)m[i].size() != dim) throw io_error("metric has wrong shape");
        for (int jx = 0; jx < dim; ++jx)
            metric(i, jx) = parse_rational(m[i][jx].get<std::string>());
    }
    try {
        return make_frame(dim, std::move(metric));
    } catch (const precondition_error& e) {
        throw io_error(std::string("bad frame: ") + e.what());
    }
}

// ---- formal series / potentials --------------------------------------

inline json series_to_json(const FormalSeries<Rational>& s) {
    json terms = json::array();
    for (const auto& [e, poly] : s.strata())
        for (const auto& [mono, c] : poly) {
            json jmono = json::array();
            for (const auto& [v, exp] : mono.factors())
                jmono.push_back(json::array({v.alpha, v.level, exp}));
            terms.push_back(json{{"e", e}, {"mono", std::move(jmono)}, {"coeff", format_rational(c)}});
        }
    return json{{"frame", frame_to_json(*s.frame())},
                {"zmax", s.zmax()},
                {"degcap", s.degcap()},
                {"reliable", s.reliable()},
                {"terms", std::move(terms)}};
}

inline FormalSeries<Rational> series_from_json(const json& j) {
    for (const char* key : {"frame", "zmax", "degcap", "reliable", "terms"})
        if (!j.contains(key)) throw io_error(std::string("series needs field ") + key);
    FramePtr fr = frame_from_json(j.at("frame"));
    Caps caps;
    caps.zmax = j.at("zmax").get<int>();
    caps.degcap = j.at("degcap").get<int>();
    caps.reliable = j.at("reliable").get<int>();
    caps.emin = 2 - caps.degcap;
    if (caps.zmax < 0 || caps.degcap < 0) throw io_error("bad truncation caps");
    // The storage floor is not serialized; admit whatever the terms use.
    const json& terms = j.at("terms");
    if (!terms.is_array()) throw io_error("terms must be an array");
    for (const json& t : terms)
        if (t.contains("e")) caps.emin = std::min(caps.emin, t.at("e").get<int>());
    FormalSeries<Rational> s(fr, caps);
    for (const json& t : terms) {
        if (!t.contains("e") || !t.contains("mono") || !t.contains("coeff"))
            throw io_error("series term needs e, mono, coeff");
        int e = t.at("e").get<int>();
        std::vector<Monomial::Factor> factors;
        for (const json& f : t.at("mono")) {
            if (!f.is_array() || f.size() != 3)
                throw io_error("monomial factor must be [alpha,level,exp]");
            int alpha = f[0].get<int>(), level = f[1].get<int>(), exp = f[2].get<int>();
            if (alpha == 1 && level == 1)
                throw io_error("the distinguished variable may not appear in a monomial");
            if (alpha < 1 || alpha > fr->dim() || level < 0 || level > caps.zmax || exp < 1)
                throw io_error("monomial factor out of range");
            factors.push_back({VarId{alpha, level}, exp});
        }
        Monomial mono{std::move(factors)};
        if (mono.degree() > caps.degcap) throw io_error("series term exceeds degcap");
        Rational c = parse_rational(t.at("coeff").get<std::string>());
        if (s.coeff(e, mono)) throw io_error("duplicate series term");
        s.add_term(e, mono, c);
    }
    return s;
}

inline json potential_to_json(const Potential<Rational>& f) {
    json j = series_to_json(f.series());
    j["normalform"] = true;
    return j;
}

inline Potential<Rational> potential_from_json(const json& j) {
    if (!j.contains("normalform") || j.at("normalform") != true)
        throw io_error("potential file must declare normalform: true");
    FormalSeries<Rational> s = series_from_json(j);
    Caps caps = s.caps();
    caps.emin = 2 - caps.degcap;
    FormalSeries<Rational> renorm(s.frame(), caps);
    renorm.add_scaled(s, Rational(1));
    try {
        return Potential<Rational>(std::move(renorm));
    } catch (const precondition_error& e) {
        throw io_error(std::string("not a normal-form potential: ") + e.what());
    }
}

// ---- loop group -------------------------------------------------------

inline json matrix_to_json(const RatMat& m) {
    json rows = json::array();
    for (int i = 0; i < m.rows(); ++i) {
        json row = json::array();
        for (int j = 0; j < m.cols(); ++j) row.push_back(format_rational(m(i, j)));
        rows.push_back(std::move(row));
    }
    return rows;
}

inline RatMat matrix_from_json(const json& j, int dim) {
    if (!j.is_array() || (int)j.size() != dim) throw io_error("matrix has wrong shape");
    RatMat m(dim, dim);
    for (int i = 0; i < dim; ++i) {
        if (!j[i].is_array() || (int)j[i].size() != dim) throw io_error("matrix has wrong shape");
        for (int jx = 0; jx < dim; ++jx) m(i, jx) = parse_rational(j[i][jx].get<std::string>());
    }
    return m;
}

// Shared layout for group and Lie elements: powers keyed by the magnitude
// i of z^{-i}.
inline json zpowers_to_json(const FramePtr& fr, int zmax,
                            const std::map<int, RatMat>& powers) {
    json jp = json::object();
    for (const auto& [i, m] : powers) jp[std::to_string(i)] = matrix_to_json(m);
    return json{{"frame", frame_to_json(*fr)}, {"zmax", zmax}, {"powers", std::move(jp)}};
}

inline GroupElement<Rational> group_from_json(const json& j) {
    for (const char* key : {"frame", "zmax", "powers"})
        if (!j.contains(key)) throw io_error(std::string("group element needs field ") + key);
    FramePtr fr = frame_from_json(j.at("frame"));
    int zmax = j.at("zmax").get<int>();
    if (zmax < 0) throw io_error("zmax must be >= 0");
    EndSeries<Rational> s = EndSeries<Rational>::identity(fr, zmax);
    for (const auto& [key, jm] : j.at("powers").items()) {
        int i = 0;
        try {
            i = std::stoi(key);
        } catch (...) {
            throw io_error("power keys must be integers");
        }
        if (i < 1 || i > zmax) throw io_error("power magnitude out of range");
        s.add_coeff(-i, matrix_from_json(jm, fr->dim()));
    }
    try {
        return GroupElement<Rational>(std::move(s));
    } catch (const precondition_error& e) {
        throw io_error(std::string("bad group element: ") + e.what());
    }
}

inline json group_to_json(const GroupElement<Rational>& g) {
    std::map<int, RatMat> powers;
    for (const auto& [i, m] : g.series().coeffs)
        if (i != 0) powers[-i] = m;
    return zpowers_to_json(g.frame(), g.zmax(), powers);
}

inline LieElement<Rational> lie_from_json(const json& j) {
    for (const char* key : {"frame", "zmax", "powers"})
        if (!j.contains(key)) throw io_error(std::string("Lie element needs field ") + key);
    FramePtr fr = frame_from_json(j.at("frame"));
    int zmax = j.at("zmax").get<int>();
    LieElement<Rational> a(fr, zmax);
    for (const auto& [key, jm] : j.at("powers").items()) {
        int i = 0;
        try {
            i = std::stoi(key);
        } catch (...) {
            throw io_error("power keys must be integers");
        }
        if (i < 1 || i > zmax) throw io_error("power magnitude out of range");
        a.set(i, matrix_from_json(jm, fr->dim()));
    }
    if (!a.valid()) throw io_error("Lie element violates a_i* = (-1)^{i+1} a_i");
    return a;
}

inline json lie_to_json(const LieElement<Rational>& a) {
    return zpowers_to_json(a.frame, a.zmax, a.coeffs);
}

inline json wfamily_to_json(const WMatrixFamily<Rational>& fam) {
    json entries = json::array();
    for (const auto& [kl, m] : fam.w)
        entries.push_back(json{{"k", kl.first}, {"l", kl.second}, {"matrix", matrix_to_json(m)}});
    return json{{"frame", frame_to_json(*fam.frame)}, {"order", fam.order},
                {"entries", std::move(entries)}};
}

// ---- rank-1 types -----------------------------------------------------

inline json coords_to_json(const OrbitCoords& c) {
    json vals = json::array();
    for (const auto& v : c.values) vals.push_back(format_rational(v));
    return json{{"coords", std::move(vals)}};
}

inline OrbitCoords coords_from_json(const json& j) {
    if (!j.contains("coords") || !j.at("coords").is_array())
        throw io_error("orbit coordinates need a coords array");
    OrbitCoords c;
    for (const json& v : j.at("coords")) c.values.push_back(parse_rational(v.get<std::string>()));
    return c;
}

inline json linear_form_to_json(const LinearForm& L) {
    json alphas = json::object();
    for (const auto& [i, v] : L.alphas) alphas[std::to_string(i)] = format_rational(v);
    return json{{"alphas", std::move(alphas)}};
}

inline LinearForm linear_form_from_json(const json& j, int zmax) {
    if (!j.contains("alphas") || !j.at("alphas").is_object())
        throw io_error("linear form needs an alphas object");
    LinearForm L;
    L.zmax = zmax;
    for (const auto& [key, v] : j.at("alphas").items()) {
        int i = 0;
        try {
            i = std::stoi(key);
        } catch (...) {
            throw io_error("alpha keys must be integers");
        }
        if (i < 2) throw io_error("alpha index must be >= 2");
        L.set_alpha(i, parse_rational(v.get<std::string>()));
    }
    return L;
}

// ---- frobenius --------------------------------------------------------

inline json tensor_to_json(const StructureTensor& t) {
    json a = json::array();
    for (const auto& plane : t.a) {
        json jplane = json::array();
        for (const auto& row : plane) {
            json jrow = json::array();
            for (const auto& v : row) jrow.push_back(format_rational(v));
            jplane.push_back(std::move(jrow));
        }
        a.push_back(std::move(jplane));
    }
    return json{{"A", std::move(a)}};
}

inline StructureTensor tensor_from_json(const json& j, FramePtr fr) {
    if (!j.contains("A")) throw io_error("structure tensor needs field A");
    const json& a = j.at("A");
    const int N = fr->dim();
    if (!a.is_array() || (int)a.size() != N) throw io_error("tensor has wrong shape");
    StructureTensor t;
    t.frame = std::move(fr);
    t.a.assign(N, std::vector<std::vector<Rational>>(N, std::vector<Rational>(N, Rational(0))));
    for (int x = 0; x < N; ++x) {
        if (!a[x].is_array() || (int)a[x].size() != N) throw io_error("tensor has wrong shape");
        for (int y = 0; y < N; ++y) {
            if (!a[x][y].is_array() || (int)a[x][y].size() != N)
                throw io_error("tensor has wrong shape");
            for (int z = 0; z < N; ++z)
                t.a[x][y][z] = parse_rational(a[x][y][z].get<std::string>());
        }
    }
    return t;
}

// ---- reports ----------------------------------------------------------

inline json check_to_json(const CheckResult& c) {
    json j{{"pass", c.pass}, {"checkedDeg", c.checked_deg}};
    if (!c.detail.empty()) j["detail"] = c.detail;
    return j;
}

inline json axiom_report_to_json(const AxiomReport& rep) {
    json j = json::object();
    if (rep.has_dilaton) j["dilaton"] = check_to_json(rep.dilaton);
    if (rep.has_string) j["string"] = check_to_json(rep.string_eq);
    if (rep.has_cone) j["cone"] = check_to_json(rep.cone);
    if (!rep.trr.empty()) {
        json entries = json::array();
        for (const auto& t : rep.trr)
            entries.push_back(json{{"k", t.k}, {"l", t.l}, {"m", t.m},
                                   {"alpha", t.alpha}, {"beta", t.beta}, {"gamma", t.gamma},
                                   {"pass", t.pass}, {"checkedDeg", t.checked_deg}});
        j["trr"] = std::move(entries);
    }
    j["pass"] = rep.all_pass();
    return j;
}

inline json rank1_report_to_json(const Rank1Report& rep) {
    json entries = json::array();
    for (const auto& e : rep.entries) {
        json je{{"name", e.name}, {"pass", e.pass}};
        if (!e.detail.empty()) je["detail"] = e.detail;
        entries.push_back(std::move(je));
    }
    return json{{"relations", std::move(entries)}, {"pass", rep.all_pass()}};
}

inline json wdvv_report_to_json(const WdvvReport& rep) {
    json entries = json::array();
    for (const auto& e : rep.entries)
        entries.push_back(json{{"a", e.a}, {"b", e.b}, {"c", e.c}, {"d", e.d},
                               {"small", e.small_pass}, {"series", e.series_pass},
                               {"agree", e.agree}, {"checkedDeg", e.checked_deg}});
    return json{{"quadruples", std::move(entries)}, {"pass", rep.all_pass()}};
}

// ---- files ------------------------------------------------------------

inline json load_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw io_error("cannot open " + path);
    json j;
    try {
        in >> j;
    } catch (const std::exception& e) {
        throw io_error("cannot parse " + path + ": " + e.what());
    }
    return j;
}

inline std::string dump_json(const json& j) { return j.dump(2) + "\n"; }

inline void save_json(const std::string& path, const json& j) {
    std::ofstream out(path);
    if (!out) throw io_error("cannot write " + path);
    out << dump_json(j);
}

// FNV-1a digest of a file's bytes, for report provenance.
inline std::string file_digest(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw io_error("cannot open " + path);
    std::uint64_t h = 14695981039346656037ull;
    char c;
    while (in.get(c)) {
        h ^= static_cast<unsigned char>(c);
        h *= 1099511628211ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return std::string(buf);
}

} // namespace gw0
