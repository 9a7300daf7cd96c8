#include "pdeform/geometry.hpp"

#include <algorithm>
#include <sstream>

namespace pdeform {

bool ValidationReport::ok() const {
    return std::all_of(entries.begin(), entries.end(), [](const auto& e) { return e.pass; });
}

void ValidationReport::add(std::string name, std::vector<int> charts, bool pass,
                           std::string residual) {
    entries.push_back({std::move(name), std::move(charts), pass, std::move(residual)});
}

std::string ValidationReport::to_string() const {
    std::ostringstream os;
    for (const auto& e : entries) {
        os << "CHECK " << e.name << " [";
        for (size_t i = 0; i < e.charts.size(); ++i) {
            if (i) os << ",";
            os << e.charts[i];
        }
        os << "] " << (e.pass ? "PASS" : "FAIL");
        if (!e.pass) os << " residual=" << e.residual;
        os << "\n";
    }
    return os.str();
}

bool PoissonAtlas::overlap(int i, int j) const {
    return transitions.count({i, j}) != 0;
}

const ChartMap& PoissonAtlas::transition(int i, int j) const {
    auto it = transitions.find({i, j});
    if (it == transitions.end())
        fail(Errc::ChartMismatch,
             "no transition " + std::to_string(i) + " <- " + std::to_string(j));
    return it->second;
}

int PoissonAtlas::chart_index(const std::string& id) const {
    for (int i = 0; i < nchart(); ++i)
        if (charts[i].id == id) return i;
    return -1;
}

std::vector<bool> PoissonAtlas::overlap_units(const std::vector<int>& tuple) const {
    if (tuple.empty()) fail(Errc::Internal, "empty chart tuple");
    int i0 = *std::min_element(tuple.begin(), tuple.end());
    std::vector<bool> units(charts[i0].ctx->nvars(), false);
    for (int j : tuple) {
        if (j == i0) continue;
        const ChartMap& t = transition(j, i0); // chart i0 coords -> chart j coords
        const int np = t.src->nparams();
        for (const auto& comp : t.components)
            for (const auto& [m, c] : comp.terms())
                for (int v = 0; v < t.src->nvars(); ++v)
                    if (m[np + v] < 0) units[v] = true;
    }
    return units;
}

int PoissonAtlas::data_exponent_bound() const {
    int b = 1;
    for (const auto& [key, t] : transitions)
        for (const auto& c : t.components) b = std::max(b, c.max_abs_exponent());
    for (const auto& L : bivectors) b = std::max(b, L.max_abs_exponent());
    return b;
}

ChartMap PoissonMapData::chart_map(int i) const {
    return ChartMap{source.charts[i].ctx, target.charts[assignment[i]].ctx, components[i]};
}

namespace {
std::string first_residual(const std::vector<LaurentPoly>& diffs) {
    for (const auto& d : diffs)
        if (!d.is_zero()) return d.to_string();
    return "";
}

std::string mv_residual(const Multivector& d) {
    for (const auto& [A, c] : d.comps())
        if (!c.is_zero()) return c.to_string();
    return "";
}
} // namespace

ValidationReport validate_atlas(const PoissonAtlas& a) {
    ValidationReport rep;
    if (static_cast<int>(a.bivectors.size()) != a.nchart())
        fail(Errc::InvalidDatum, "one bivector per chart required");
    for (int i = 0; i < a.nchart(); ++i) {
        if (a.bivectors[i].degree() != 2 || a.bivectors[i].axis_dim() != a.charts[i].ctx->nvars())
            fail(Errc::InvalidDatum, "bivector shape on chart " + a.charts[i].id);
    }
    for (const auto& [key, t] : a.transitions) {
        auto [i, j] = key;
        if (!a.overlap(j, i)) fail(Errc::InvalidDatum, "transition without its reverse");
        t.check();
    }
    // inverse pairs
    for (const auto& [key, t] : a.transitions) {
        auto [i, j] = key;
        if (i >= j) continue;
        bool ok = are_mutually_inverse(t, a.transition(j, i));
        rep.add("transition_inverse", {i, j}, ok, ok ? "" : "composite is not the identity");
    }
    // cocycle on triples
    for (int i = 0; i < a.nchart(); ++i)
        for (int j = 0; j < a.nchart(); ++j)
            for (int k = 0; k < a.nchart(); ++k) {
                if (i == j || j == k || i == k) continue;
                if (!a.overlap(i, j) || !a.overlap(j, k) || !a.overlap(i, k)) continue;
                ChartMap comp = compose(a.transition(i, j), a.transition(j, k));
                std::vector<LaurentPoly> diffs;
                Ctx work = comp.src;
                for (size_t v = 0; v < comp.components.size(); ++v)
                    diffs.push_back(comp.components[v].to_ctx(work) -
                                    a.transition(i, k).components[v].to_ctx(work));
                std::string res = first_residual(diffs);
                rep.add("cocycle", {i, j, k}, res.empty(), res);
            }
    // integrability per chart
    for (int i = 0; i < a.nchart(); ++i) {
        Multivector br = schouten(a.bivectors[i], a.bivectors[i]);
        rep.add("jacobi", {i}, br.is_zero(), mv_residual(br));
    }
    // bivector gluing on overlaps
    for (const auto& [key, t] : a.transitions) {
        auto [i, j] = key;
        Multivector pushed = pushforward(a.bivectors[j], t, a.transition(j, i));
        Multivector diff = pushed - a.bivectors[i].to_ctx(pushed.ctx());
        rep.add("bivector_glue", {i, j}, diff.is_zero(), mv_residual(diff));
    }
    return rep;
}

ValidationReport validate_map(const PoissonMapData& f) {
    ValidationReport rep;
    const int n = f.source.nchart();
    if (static_cast<int>(f.assignment.size()) != n ||
        static_cast<int>(f.components.size()) != n)
        fail(Errc::InvalidDatum, "map data must cover every source chart");
    for (int i = 0; i < n; ++i) f.chart_map(i).check();

    // gluing: Phi_i o phi_ij = psi_{a(i)a(j)} o Phi_j on source overlaps
    for (const auto& [key, phi] : f.source.transitions) {
        auto [i, j] = key;
        ChartMap lhs = compose(f.chart_map(i), phi);
        ChartMap rhs = f.chart_map(j);
        if (f.assignment[i] != f.assignment[j])
            rhs = compose(f.target.transition(f.assignment[i], f.assignment[j]), rhs);
        std::vector<LaurentPoly> diffs;
        Ctx work = scratch_ctx(f.source.charts[j].ctx);
        for (size_t v = 0; v < lhs.components.size(); ++v)
            diffs.push_back(lhs.components[v].to_ctx(work) - rhs.components[v].to_ctx(work));
        std::string res = first_residual(diffs);
        rep.add("map_glue", {i, j}, res.empty(), res);
    }

    // Poisson condition: Lambda_i(Phi^p, Phi^q) = Pi^{pq} o Phi_i
    for (int i = 0; i < n; ++i) {
        int ti = f.assignment[i];
        const auto& Pi = f.target.bivectors[ti];
        Ctx work = scratch_ctx(f.source.charts[i].ctx);
        std::vector<LaurentPoly> diffs;
        const int m = f.target.charts[ti].ctx->nvars();
        for (int p = 0; p < m; ++p)
            for (int q = p + 1; q < m; ++q) {
                LaurentPoly lhs =
                    evaluate(f.source.bivectors[i], {f.components[i][p], f.components[i][q]});
                LaurentPoly rhs = compose(Pi.coeff({p, q}), f.components[i], work);
                diffs.push_back(lhs.to_ctx(work) - rhs);
            }
        std::string res = first_residual(diffs);
        rep.add("map_poisson", {i}, res.empty(), res);
    }
    return rep;
}

bool ideal_divide(const LaurentPoly& p, const std::vector<int>& wvars,
                  std::vector<LaurentPoly>& out) {
    Ctx c = p.ctx();
    const int np = c->nparams();
    out.assign(wvars.size(), LaurentPoly(c));
    LaurentPoly rem = p;
    for (size_t b = 0; b < wvars.size(); ++b) {
        int v = wvars[b];
        LaurentPoly keep(c), quot(c);
        for (const auto& [m, coef] : rem.terms()) {
            if (m[np + v] >= 1) {
                Mono d = m;
                d[np + v] -= 1;
                quot.add_term(d, coef);
            } else {
                keep.add_term(m, coef);
            }
        }
        out[b] = quot;
        rem = keep;
    }
    return rem.is_zero();
}

SubmanifoldValidation validate_submanifold(const SubmanifoldData& s) {
    SubmanifoldValidation result;
    auto& rep = result.report;
    const int n = s.ambient.nchart();
    if (static_cast<int>(s.defining.size()) != n)
        fail(Errc::InvalidSubmanifold, "defining coordinates required on every chart");
    const int r = s.codim();
    for (int i = 0; i < n; ++i) {
        if (static_cast<int>(s.defining[i].size()) != r)
            fail(Errc::InvalidSubmanifold, "codimension must be constant across charts");
        for (int v : s.defining[i])
            if (v < 0 || v >= s.ambient.charts[i].ctx->nvars())
                fail(Errc::InvalidSubmanifold, "defining variable out of range");
    }

    result.T.assign(n, {});
    for (int i = 0; i < n; ++i) {
        const Ctx& c = s.ambient.charts[i].ctx;
        Ctx work = scratch_ctx(c);
        result.T[i].assign(r, std::vector<Multivector>(
                                  r, Multivector(work, c->nvars(), 1)));
        bool chart_ok = true;
        std::string res;
        for (int alpha = 0; alpha < r && chart_ok; ++alpha) {
            Multivector w(c, c->nvars(), 0);
            w.add_term({}, LaurentPoly::variable(c, s.defining[i][alpha]));
            Multivector br = schouten(s.ambient.bivectors[i], w); // vector field
            for (const auto& [A, coef] : br.comps()) {
                std::vector<LaurentPoly> quots;
                if (!ideal_divide(coef, s.defining[i], quots)) {
                    chart_ok = false;
                    res = coef.to_string();
                    break;
                }
                for (int beta = 0; beta < r; ++beta)
                    result.T[i][alpha][beta].add_term(A, quots[beta]);
            }
        }
        rep.add("tangential", {i}, chart_ok, res);
    }

    // the defining frames must be compatible across overlaps
    for (const auto& [key, t] : s.ambient.transitions) {
        auto [i, k] = key;
        bool ok = true;
        std::string res;
        for (int alpha = 0; alpha < r && ok; ++alpha) {
            LaurentPoly pulled =
                t.pullback(LaurentPoly::variable(s.ambient.charts[i].ctx, s.defining[i][alpha]));
            std::vector<LaurentPoly> quots;
            if (!ideal_divide(pulled, s.defining[k], quots)) {
                ok = false;
                res = pulled.to_string();
            }
        }
        rep.add("frame", {i, k}, ok, res);
    }
    return result;
}

std::vector<std::vector<LaurentPoly>> frame_transition(const SubmanifoldData& s, int i, int k) {
    const ChartMap& t = s.ambient.transition(i, k);
    const int r = s.codim();
    std::vector<std::vector<LaurentPoly>> F(r);
    for (int alpha = 0; alpha < r; ++alpha) {
        LaurentPoly pulled =
            t.pullback(LaurentPoly::variable(s.ambient.charts[i].ctx, s.defining[i][alpha]));
        if (!ideal_divide(pulled, s.defining[k], F[alpha]))
            fail(Errc::InvalidSubmanifold, "frame transition has a remainder");
    }
    return F;
}

} // namespace pdeform
