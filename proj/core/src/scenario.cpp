#include "pdeform/scenario.hpp"

#include <algorithm>
#include <set>
#include <sstream>

namespace pdeform {

namespace {

[[noreturn]] void syntax(int line, const std::string& what) {
    fail(Errc::SyntaxError, "line " + std::to_string(line) + ": " + what);
}

std::string trim(const std::string& s) {
    size_t a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    size_t b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : s) {
        if (c == sep) {
            out.push_back(trim(cur));
            cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    out.push_back(trim(cur));
    return out;
}

std::vector<std::string> words(const std::string& s) {
    std::istringstream is(s);
    std::vector<std::string> out;
    std::string w;
    while (is >> w) out.push_back(w);
    return out;
}

int to_int(const std::string& s, int line) {
    try {
        size_t pos = 0;
        int v = std::stoi(s, &pos);
        if (pos != s.size()) syntax(line, "bad integer '" + s + "'");
        return v;
    } catch (const std::exception&) {
        syntax(line, "bad integer '" + s + "'");
    }
}

int chart_of(const PoissonAtlas& a, const std::string& id, int line) {
    int i = a.chart_index(id);
    if (i < 0) syntax(line, "unknown chart '" + id + "'");
    return i;
}

// Parameter monomial grammar: "1" or "t^2*s" over the ring's parameters.
std::vector<int> parse_pmono(const std::string& s, const ParamRing& ring, int line) {
    std::vector<int> m(ring.r(), 0);
    if (trim(s) == "1") return m;
    for (const std::string& f : split(s, '*')) {
        auto caret = f.find('^');
        std::string name = caret == std::string::npos ? f : trim(f.substr(0, caret));
        int e = caret == std::string::npos ? 1 : to_int(trim(f.substr(caret + 1)), line);
        auto it = std::find(ring.params.begin(), ring.params.end(), name);
        if (it == ring.params.end()) syntax(line, "unknown parameter '" + name + "'");
        m[it - ring.params.begin()] += e;
    }
    return m;
}

std::string pmono_str(const std::vector<int>& m, const ParamRing& ring) {
    std::string out;
    for (int i = 0; i < ring.r(); ++i) {
        if (!m[i]) continue;
        if (!out.empty()) out += "*";
        out += ring.params[i];
        if (m[i] != 1) out += "^" + std::to_string(m[i]);
    }
    return out.empty() ? "1" : out;
}

std::vector<LaurentPoly> parse_components(const std::string& rhs, const Ctx& ctx, int line) {
    std::vector<LaurentPoly> out;
    for (const std::string& p : split(rhs, ',')) {
        if (p.empty()) syntax(line, "empty component");
        out.push_back(parse_poly(p, ctx));
    }
    return out;
}

std::string components_str(const std::vector<LaurentPoly>& comps) {
    std::string out;
    for (size_t i = 0; i < comps.size(); ++i) {
        if (i) out += ", ";
        out += comps[i].to_string();
    }
    return out;
}

struct Line {
    int no;
    std::vector<std::string> lhs;
    std::string rhs;
};

struct Section {
    int no;
    std::string kind, name;
    std::vector<Line> lines;
};

std::vector<Section> sectionize(const std::string& text, Scenario& sc) {
    std::vector<Section> out;
    std::istringstream is(text);
    std::string raw;
    int no = 0;
    Section* cur = nullptr;
    while (std::getline(is, raw)) {
        ++no;
        std::string s = trim(raw);
        if (s.empty() || s[0] == '#') continue;
        if (s.front() == '[') {
            if (s.back() != ']') syntax(no, "unterminated section header");
            auto w = words(s.substr(1, s.size() - 2));
            if (w.size() != 2) syntax(no, "section header needs a kind and a name");
            out.push_back(Section{no, w[0], w[1], {}});
            cur = &out.back();
            continue;
        }
        auto eq = s.find('=');
        if (eq == std::string::npos) syntax(no, "expected 'key = value'");
        Line ln{no, words(trim(s.substr(0, eq))), trim(s.substr(eq + 1))};
        if (ln.lhs.empty()) syntax(no, "missing key");
        if (!cur) {
            if (ln.lhs.size() == 1 && ln.lhs[0] == "window")
                sc.window = to_int(ln.rhs, no);
            else if (ln.lhs.size() == 1 && ln.lhs[0] == "description")
                sc.description = ln.rhs;
            else
                syntax(no, "unknown top-level key '" + ln.lhs[0] + "'");
            continue;
        }
        cur->lines.push_back(std::move(ln));
    }
    return out;
}

bool parse_onoff(const std::string& s, int line) {
    if (s == "on") return true;
    if (s == "off") return false;
    syntax(line, "expected 'on' or 'off'");
}

void parse_ring(const Section& sec, Scenario& sc) {
    ParamRing r;
    std::vector<std::string> ideal_texts;
    int ideal_line = sec.no;
    for (const Line& ln : sec.lines) {
        if (ln.lhs.size() != 1) syntax(ln.no, "unknown ring key");
        if (ln.lhs[0] == "params") {
            for (const std::string& p : split(ln.rhs, ','))
                if (!p.empty()) r.params.push_back(p);
        } else if (ln.lhs[0] == "order") {
            r.order = to_int(ln.rhs, ln.no);
        } else if (ln.lhs[0] == "ideal") {
            ideal_texts = split(ln.rhs, ',');
            ideal_line = ln.no;
        } else {
            syntax(ln.no, "unknown ring key '" + ln.lhs[0] + "'");
        }
    }
    for (const std::string& t : ideal_texts)
        if (!t.empty()) r.ideal_gens.push_back(parse_pmono(t, r, ideal_line));
    sc.rings.emplace_back(sec.name, std::move(r));
}

void parse_atlas(const Section& sec, Scenario& sc) {
    PoissonAtlas a;
    a.ring = ParamRing{};
    std::map<int, Multivector> bivs;
    for (const Line& ln : sec.lines) {
        const auto& k = ln.lhs;
        if (k[0] == "chart" && k.size() == 2) {
            auto parts = split(ln.rhs, ';');
            std::vector<std::string> vars; // empty list: a zero-dimensional chart
            for (const std::string& v : split(parts[0], ','))
                if (!v.empty()) vars.push_back(v);
            int W = 8;
            if (parts.size() > 1) {
                auto w = words(parts[1]);
                if (w.size() != 2 || w[0] != "window") syntax(ln.no, "expected 'window N'");
                W = to_int(w[1], ln.no);
            }
            if (a.chart_index(k[1]) >= 0) syntax(ln.no, "duplicate chart '" + k[1] + "'");
            a.charts.push_back({k[1], make_ctx(a.ring, vars, W), W});
        } else if (k[0] == "transition" && k.size() == 4 && k[2] == "<") {
            int i = chart_of(a, k[1], ln.no), j = chart_of(a, k[3], ln.no);
            auto comps = parse_components(ln.rhs, a.charts[j].ctx, ln.no);
            if (static_cast<int>(comps.size()) != a.charts[i].ctx->nvars())
                syntax(ln.no, "transition component count mismatch");
            a.transitions[{i, j}] = ChartMap{a.charts[j].ctx, a.charts[i].ctx, std::move(comps)};
        } else if (k[0] == "bivector" && k.size() == 2) {
            int i = chart_of(a, k[1], ln.no);
            bivs.emplace(i, parse_multivector(ln.rhs, a.charts[i].ctx,
                                              a.charts[i].ctx->nvars(), 2));
        } else {
            syntax(ln.no, "unknown atlas key '" + k[0] + "'");
        }
    }
    for (int i = 0; i < a.nchart(); ++i) {
        auto it = bivs.find(i);
        a.bivectors.push_back(it != bivs.end()
                                  ? it->second
                                  : Multivector(a.charts[i].ctx, a.charts[i].ctx->nvars(), 2));
    }
    sc.atlases.emplace_back(sec.name, std::move(a));
}

void parse_map(const Section& sec, Scenario& sc) {
    Scenario::MapEntry e;
    e.name = sec.name;
    std::map<int, std::pair<int, std::vector<LaurentPoly>>> comps;
    for (const Line& ln : sec.lines) {
        const auto& k = ln.lhs;
        if (k.size() == 1 && k[0] == "source") {
            e.source = ln.rhs;
            e.data.source = sc.atlas(e.source);
        } else if (k.size() == 1 && k[0] == "target") {
            e.target = ln.rhs;
            e.data.target = sc.atlas(e.target);
        } else if (k.size() == 4 && k[0] == "component" && k[2] == "->") {
            if (e.source.empty() || e.target.empty())
                syntax(ln.no, "'component' before 'source'/'target'");
            int i = chart_of(e.data.source, k[1], ln.no);
            int ti = chart_of(e.data.target, k[3], ln.no);
            auto c = parse_components(ln.rhs, e.data.source.charts[i].ctx, ln.no);
            if (static_cast<int>(c.size()) != e.data.target.charts[ti].ctx->nvars())
                syntax(ln.no, "component count != target chart dimension");
            comps[i] = {ti, std::move(c)};
        } else {
            syntax(ln.no, "unknown map key '" + k[0] + "'");
        }
    }
    for (int i = 0; i < e.data.source.nchart(); ++i) {
        auto it = comps.find(i);
        if (it == comps.end())
            syntax(sec.no, "map '" + e.name + "' misses components for chart " +
                               e.data.source.charts[i].id);
        e.data.assignment.push_back(it->second.first);
        e.data.components.push_back(std::move(it->second.second));
    }
    sc.maps.push_back(std::move(e));
}

void parse_submanifold(const Section& sec, Scenario& sc) {
    Scenario::SubEntry e;
    e.name = sec.name;
    std::map<int, std::vector<int>> defs;
    for (const Line& ln : sec.lines) {
        const auto& k = ln.lhs;
        if (k.size() == 1 && k[0] == "ambient") {
            e.ambient = ln.rhs;
            e.data.ambient = sc.atlas(e.ambient);
        } else if (k.size() == 2 && k[0] == "defining") {
            if (e.ambient.empty()) syntax(ln.no, "'defining' before 'ambient'");
            int i = chart_of(e.data.ambient, k[1], ln.no);
            std::vector<int> idx;
            for (const std::string& v : split(ln.rhs, ',')) {
                int vi = e.data.ambient.charts[i].ctx->var_index(v);
                if (vi < 0) syntax(ln.no, "unknown variable '" + v + "'");
                idx.push_back(vi);
            }
            std::sort(idx.begin(), idx.end());
            defs[i] = std::move(idx);
        } else {
            syntax(ln.no, "unknown submanifold key '" + k[0] + "'");
        }
    }
    for (int i = 0; i < e.data.ambient.nchart(); ++i) {
        auto it = defs.find(i);
        if (it == defs.end())
            syntax(sec.no, "submanifold '" + e.name + "' misses defining variables for chart " +
                               e.data.ambient.charts[i].id);
        e.data.defining.push_back(std::move(it->second));
    }
    sc.submanifolds.push_back(std::move(e));
}

DefMode parse_mode(const std::string& s, int line) {
    for (DefMode m : {DefMode::FixedBoth, DefMode::FixedTarget, DefMode::FixedSource,
                      DefMode::Free})
        if (defmode_name(m) == s) return m;
    syntax(line, "unknown mode '" + s + "'");
}

void parse_deformation(const Section& sec, Scenario& sc) {
    Scenario::DefEntry e;
    e.name = sec.name;
    bool built = false;
    DefMode mode = DefMode::FixedBoth;
    bool have_mode = false;
    std::set<std::pair<int, int>> src_explicit, tgt_explicit;
    auto ensure = [&](int line) -> DeformationDatum& {
        if (!built) {
            if (e.map.empty() || e.ring.empty() || !have_mode)
                syntax(line, "deformation data before 'map'/'ring'/'mode'");
            e.data = trivial_deformation(sc.map(e.map).data, sc.ring(e.ring), mode);
            built = true;
        }
        return e.data;
    };
    auto ring_ctx = [&](const PoissonAtlas& a, int i) {
        return ring_chart_ctx(a.charts[i], sc.ring(e.ring));
    };
    for (const Line& ln : sec.lines) {
        const auto& k = ln.lhs;
        if (k.size() == 1 && k[0] == "map") {
            e.map = ln.rhs;
        } else if (k.size() == 1 && k[0] == "ring") {
            e.ring = ln.rhs;
        } else if (k.size() == 1 && k[0] == "mode") {
            mode = parse_mode(ln.rhs, ln.no);
            have_mode = true;
        } else if (k.size() == 1 && k[0] == "lift") {
            e.lift = ln.rhs;
        } else if (k.size() == 1 && k[0] == "check") {
            e.check = parse_onoff(ln.rhs, ln.no);
        } else if (k.size() == 2 && k[0] == "phi") {
            DeformationDatum& d = ensure(ln.no);
            int i = chart_of(d.base.source, k[1], ln.no);
            auto c = parse_components(ln.rhs, ring_ctx(d.base.source, i), ln.no);
            if (c.size() != d.phi[i].size()) syntax(ln.no, "phi component count mismatch");
            d.phi[i] = std::move(c);
        } else if (k.size() >= 2 && (k[0] == "source" || k[0] == "target")) {
            DeformationDatum& d = ensure(ln.no);
            const bool src = (k[0] == "source");
            const PoissonAtlas& base = src ? d.base.source : d.base.target;
            AtlasDeformation& ad = src ? d.source : d.target;
            if (k.size() == 5 && k[1] == "transition" && k[3] == "<") {
                int i = chart_of(base, k[2], ln.no), j = chart_of(base, k[4], ln.no);
                auto c = parse_components(ln.rhs, ring_ctx(base, j), ln.no);
                if (static_cast<int>(c.size()) != base.charts[i].ctx->nvars())
                    syntax(ln.no, "transition component count mismatch");
                ad.transitions[{i, j}] =
                    ChartMap{ring_ctx(base, j), ring_ctx(base, i), std::move(c)};
                (src ? src_explicit : tgt_explicit).insert({i, j});
            } else if (k.size() == 3 && k[1] == "bivector") {
                int i = chart_of(base, k[2], ln.no);
                Ctx rc = ring_ctx(base, i);
                ad.bivectors[i] = parse_multivector(ln.rhs, rc, rc->nvars(), 2);
            } else {
                syntax(ln.no, "unknown deformation key");
            }
        } else {
            syntax(ln.no, "unknown deformation key '" + k[0] + "'");
        }
    }
    ensure(sec.no);
    // Complete half-specified transition pairs by formal inversion around the
    // trivial (base) lift.
    auto complete = [&](AtlasDeformation& ad, const std::set<std::pair<int, int>>& ex) {
        for (const auto& [i, j] : ex)
            if (!ex.count({j, i}))
                ad.transitions[{j, i}] = formal_inverse(ad.transitions[{i, j}],
                                                        ad.transitions.at({j, i}));
    };
    complete(e.data.source, src_explicit);
    complete(e.data.target, tgt_explicit);
    sc.deformations.push_back(std::move(e));
}

void parse_factor(const Section& sec, Scenario& sc) {
    Scenario::FactorEntry e;
    e.name = sec.name;
    for (const Line& ln : sec.lines) {
        if (ln.lhs.size() != 1) syntax(ln.no, "unknown factor key");
        const std::string& k = ln.lhs[0];
        if (k == "upsilon")
            e.upsilon = ln.rhs;
        else if (k == "phi")
            e.phi = ln.rhs;
        else if (k == "g")
            e.g = ln.rhs;
        else if (k == "check")
            e.check = parse_onoff(ln.rhs, ln.no);
        else
            syntax(ln.no, "unknown factor key '" + k + "'");
    }
    // resolve now so dangling references surface at parse time
    sc.deformation(e.upsilon);
    sc.deformation(e.phi);
    sc.map(e.g);
    sc.factors.push_back(std::move(e));
}

} // namespace

#define LOOKUP(field, what)                                                       \
    for (const auto& entry : field)                                               \
        if (entry.first == name) return entry.second;                             \
    fail(Errc::UnresolvedReference, std::string(what) + " '" + name + "' is not defined")

const ParamRing& Scenario::ring(const std::string& name) const { LOOKUP(rings, "ring"); }
const PoissonAtlas& Scenario::atlas(const std::string& name) const { LOOKUP(atlases, "atlas"); }
#undef LOOKUP

#define LOOKUP_ENTRY(field, what)                                                 \
    for (const auto& entry : field)                                               \
        if (entry.name == name) return entry;                                     \
    fail(Errc::UnresolvedReference, std::string(what) + " '" + name + "' is not defined")

const Scenario::MapEntry& Scenario::map(const std::string& name) const {
    LOOKUP_ENTRY(maps, "map");
}
const Scenario::SubEntry& Scenario::submanifold(const std::string& name) const {
    LOOKUP_ENTRY(submanifolds, "submanifold");
}
const Scenario::DefEntry& Scenario::deformation(const std::string& name) const {
    LOOKUP_ENTRY(deformations, "deformation");
}
const Scenario::FactorEntry& Scenario::factor(const std::string& name) const {
    LOOKUP_ENTRY(factors, "factorization");
}
#undef LOOKUP_ENTRY

Scenario parse_scenario(const std::string& text) {
    Scenario sc;
    for (const Section& sec : sectionize(text, sc)) {
        if (sec.kind == "ring")
            parse_ring(sec, sc);
        else if (sec.kind == "atlas")
            parse_atlas(sec, sc);
        else if (sec.kind == "map")
            parse_map(sec, sc);
        else if (sec.kind == "submanifold")
            parse_submanifold(sec, sc);
        else if (sec.kind == "deformation")
            parse_deformation(sec, sc);
        else if (sec.kind == "factor")
            parse_factor(sec, sc);
        else
            syntax(sec.no, "unknown section kind '" + sec.kind + "'");
    }
    return sc;
}

std::string serialize_scenario(const Scenario& sc) {
    std::ostringstream os;
    if (!sc.description.empty()) os << "description = " << sc.description << "\n";
    os << "window = " << sc.window << "\n";
    for (const auto& [name, r] : sc.rings) {
        os << "\n[ring " << name << "]\n";
        os << "params = ";
        for (size_t i = 0; i < r.params.size(); ++i) os << (i ? ", " : "") << r.params[i];
        os << "\norder = " << r.order << "\n";
        if (!r.ideal_gens.empty()) {
            os << "ideal = ";
            for (size_t i = 0; i < r.ideal_gens.size(); ++i)
                os << (i ? ", " : "") << pmono_str(r.ideal_gens[i], r);
            os << "\n";
        }
    }
    auto emit_atlas_body = [&](const PoissonAtlas& a, const std::string& prefix,
                               const std::vector<Multivector>& bivs,
                               const std::map<std::pair<int, int>, ChartMap>& trans) {
        for (const auto& [key, tr] : trans)
            os << prefix << "transition " << a.charts[key.first].id << " < "
               << a.charts[key.second].id << " = " << components_str(tr.components) << "\n";
        for (int i = 0; i < a.nchart(); ++i)
            os << prefix << "bivector " << a.charts[i].id << " = " << bivs[i].to_string() << "\n";
    };
    for (const auto& [name, a] : sc.atlases) {
        os << "\n[atlas " << name << "]\n";
        for (const auto& ch : a.charts) {
            os << "chart " << ch.id << " = ";
            for (int v = 0; v < ch.ctx->nvars(); ++v) os << (v ? ", " : "") << ch.ctx->vars[v];
            os << " ; window " << ch.window << "\n";
        }
        emit_atlas_body(a, "", a.bivectors, a.transitions);
    }
    for (const auto& m : sc.maps) {
        os << "\n[map " << m.name << "]\n";
        os << "source = " << m.source << "\ntarget = " << m.target << "\n";
        for (int i = 0; i < m.data.source.nchart(); ++i)
            os << "component " << m.data.source.charts[i].id << " -> "
               << m.data.target.charts[m.data.assignment[i]].id << " = "
               << components_str(m.data.components[i]) << "\n";
    }
    for (const auto& s : sc.submanifolds) {
        os << "\n[submanifold " << s.name << "]\n";
        os << "ambient = " << s.ambient << "\n";
        for (int i = 0; i < s.data.ambient.nchart(); ++i) {
            os << "defining " << s.data.ambient.charts[i].id << " = ";
            for (size_t l = 0; l < s.data.defining[i].size(); ++l)
                os << (l ? ", " : "")
                   << s.data.ambient.charts[i].ctx->vars[s.data.defining[i][l]];
            os << "\n";
        }
    }
    for (const auto& d : sc.deformations) {
        os << "\n[deformation " << d.name << "]\n";
        os << "map = " << d.map << "\nring = " << d.ring << "\n";
        os << "mode = " << defmode_name(d.data.mode) << "\n";
        if (!d.lift.empty()) os << "lift = " << d.lift << "\n";
        if (!d.check) os << "check = off\n";
        for (int i = 0; i < d.data.base.source.nchart(); ++i)
            os << "phi " << d.data.base.source.charts[i].id << " = "
               << components_str(d.data.phi[i]) << "\n";
        emit_atlas_body(d.data.base.source, "source ", d.data.source.bivectors,
                        d.data.source.transitions);
        emit_atlas_body(d.data.base.target, "target ", d.data.target.bivectors,
                        d.data.target.transitions);
    }
    for (const auto& f : sc.factors) {
        os << "\n[factor " << f.name << "]\n";
        os << "upsilon = " << f.upsilon << "\nphi = " << f.phi << "\ng = " << f.g << "\n";
        if (!f.check) os << "check = off\n";
    }
    return os.str();
}

} // namespace pdeform
