#include "pdeform/cech.hpp"

#include <algorithm>
#include <sstream>

namespace pdeform {

namespace {

std::vector<std::vector<int>> combinations(int n, int k) {
    std::vector<std::vector<int>> out;
    if (k < 0 || k > n) return out;
    std::vector<int> c(k);
    auto rec = [&](auto&& self, int pos, int start) -> void {
        if (pos == k) {
            out.push_back(c);
            return;
        }
        for (int a = start; a <= n - (k - pos); ++a) {
            c[pos] = a;
            self(self, pos + 1, a + 1);
        }
    };
    rec(rec, 0, 0);
    return out;
}

std::string tuple_str(const std::vector<int>& t) {
    std::ostringstream os;
    os << "(";
    for (size_t i = 0; i < t.size(); ++i) {
        if (i) os << ",";
        os << t[i];
    }
    os << ")";
    return os.str();
}

} // namespace

std::string CechSlot::to_string() const {
    std::ostringstream os;
    os << "C^" << c << "(" << (kind == SlotKind::TangentX ? "T_X" : "f*T_Y") << "^" << q << ")";
    return os.str();
}

bool Cochain::is_zero() const {
    for (const auto& [t, v] : values)
        if (!v.is_zero()) return false;
    return true;
}

void Cochain::add(const std::vector<int>& tuple, const Multivector& v) {
    if (v.is_zero()) return;
    auto it = values.find(tuple);
    if (it == values.end())
        values.emplace(tuple, v);
    else {
        it->second += v;
        if (it->second.is_zero()) values.erase(it);
    }
}

std::string Cochain::to_string() const {
    if (is_zero()) return slot.to_string() + ": 0";
    std::ostringstream os;
    os << slot.to_string() << ":";
    for (const auto& [t, v] : values) os << " " << tuple_str(t) << " {" << v.to_string() << "}";
    return os.str();
}

void CechContext::check() const {
    if (!X && !f) fail(Errc::InvalidDatum, "cech context has no geometry");
    if (atlas().ring.r() != 0)
        fail(Errc::WrongRing, "cohomology requires a trivial parameter ring");
    if (f && f->target.ring.r() != 0)
        fail(Errc::WrongRing, "cohomology requires a trivial parameter ring on the target");
}

int CechContext::axis_dim(SlotKind k) const {
    if (k == SlotKind::TangentX) return atlas().charts[0].ctx->nvars();
    if (!f) fail(Errc::InvalidDatum, "pullback slots require a map");
    return f->target.charts[0].ctx->nvars();
}

std::vector<std::vector<int>> nerve_tuples(const PoissonAtlas& a, int c) {
    std::vector<std::vector<int>> out;
    for (auto& t : combinations(a.nchart(), c + 1)) {
        bool ok = true;
        for (size_t i = 0; i < t.size() && ok; ++i)
            for (size_t j = i + 1; j < t.size() && ok; ++j)
                if (!a.overlap(t[i], t[j])) ok = false;
        if (ok) out.push_back(t);
    }
    return out;
}

Ctx tuple_ctx(const PoissonAtlas& a, const std::vector<int>& tuple, int window) {
    const Ctx& base = a.charts[tuple[0]].ctx;
    int n = base->nvars();
    std::vector<int> lo(n, 0), hi(n, window);
    if (tuple.size() > 1) {
        auto units = a.overlap_units(tuple);
        for (int v = 0; v < n; ++v)
            if (units[v]) lo[v] = -window;
    }
    return make_ctx(ParamRing{}, base->vars, lo, hi, /*strict=*/true);
}

Multivector transport(const CechContext& ctx, SlotKind kind, const Multivector& v, int i,
                      int j) {
    const PoissonAtlas& X = ctx.atlas();
    if (kind == SlotKind::TangentX) {
        const ChartMap& phi = X.transition(i, j); // chart j -> chart i
        const ChartMap& psi = X.transition(j, i);
        return pushforward(v, phi, psi);
    }
    // PullbackY: coefficients move from z_j to z_i; axes may change target chart.
    const PoissonMapData& f = *ctx.f;
    const ChartMap& phi_ji = X.transition(j, i); // z_j as functions of z_i
    Ctx wi = scratch_ctx(X.charts[i].ctx);
    const int m = v.axis_dim();
    const int q = v.degree();
    Multivector R(wi, m, q);
    int ai = f.assignment[i], aj = f.assignment[j];
    if (ai == aj) {
        for (const auto& [B, c] : v.comps()) R.add_term(B, compose(c, phi_ji.components, wi));
        return R;
    }
    // d/dw_{aj}^beta = sum_alpha (d psi^alpha / d w_{aj}^beta)|_{w=f_j} d/dw_{ai}^alpha,
    // with psi the target transition a_j -> a_i and f_j expressed in z_i.
    const ChartMap& psi = f.target.transition(ai, aj);
    std::vector<LaurentPoly> fj_i;
    fj_i.reserve(m);
    for (const auto& comp : f.components[j]) fj_i.push_back(compose(comp, phi_ji.components, wi));
    std::vector<std::vector<LaurentPoly>> J(m, std::vector<LaurentPoly>(m));
    for (int a = 0; a < m; ++a)
        for (int b = 0; b < m; ++b) J[a][b] = compose(psi.components[a].derivative(b), fj_i, wi);
    auto axes = combinations(m, q);
    for (const auto& [B, c] : v.comps()) {
        LaurentPoly cc = compose(c, phi_ji.components, wi);
        for (const auto& A : axes) {
            std::vector<std::vector<LaurentPoly>> M(q, std::vector<LaurentPoly>(q));
            for (int k = 0; k < q; ++k)
                for (int l = 0; l < q; ++l) M[k][l] = J[A[k]][B[l]];
            R.add_term(A, cc * poly_det(M, wi));
        }
    }
    return R;
}

Cochain cech_delta(const CechContext& ctx, const Cochain& ch) {
    const PoissonAtlas& X = ctx.atlas();
    const int adim = ctx.axis_dim(ch.slot.kind);
    Cochain out{CechSlot{ch.slot.kind, ch.slot.c + 1, ch.slot.q}, {}};
    for (const auto& S : nerve_tuples(X, ch.slot.c + 1)) {
        Ctx acc_ctx = scratch_ctx(X.charts[S[0]].ctx);
        Multivector acc(acc_ctx, adim, ch.slot.q);
        for (size_t k = 0; k < S.size(); ++k) {
            std::vector<int> face;
            for (size_t l = 0; l < S.size(); ++l)
                if (l != k) face.push_back(S[l]);
            auto it = ch.values.find(face);
            if (it == ch.values.end()) continue;
            Multivector val =
                k == 0 ? transport(ctx, ch.slot.kind, it->second, S[0], S[1]) : it->second;
            if (k % 2)
                acc -= val;
            else
                acc += val;
        }
        if (!acc.is_zero()) out.add(S, acc);
    }
    return out;
}

Cochain sheaf_d(const CechContext& ctx, const Cochain& ch) {
    Cochain out{CechSlot{ch.slot.kind, ch.slot.c, ch.slot.q + 1}, {}};
    for (const auto& [t, v] : ch.values) {
        int i0 = t[0];
        if (ch.slot.kind == SlotKind::TangentX) {
            out.add(t, schouten(ctx.atlas().bivectors[i0], v));
        } else {
            const PoissonMapData& f = *ctx.f;
            out.add(t, pi_f(v, f.source.bivectors[i0], f.target.bivectors[f.assignment[i0]],
                            f.chart_map(i0)));
        }
    }
    return out;
}

Cochain apply_F(const CechContext& ctx, const Cochain& ch) {
    if (ch.slot.kind != SlotKind::TangentX)
        fail(Errc::ArityMismatch, "F applies to tangent cochains");
    Cochain out{CechSlot{SlotKind::PullbackY, ch.slot.c, ch.slot.q}, {}};
    for (const auto& [t, v] : ch.values) out.add(t, chain_map_F(v, ctx.f->chart_map(t[0])));
    return out;
}

// ---------------------------------------------------------------------------

Cochain Space::basis_element(int k) const {
    for (const auto& cb : comps) {
        if (k < cb.offset || k >= cb.offset + cb.dim) continue;
        int local = k - cb.offset;
        size_t t = 0;
        while (t + 1 < cb.tuples.size() && cb.tuple_offset[t + 1] <= local) ++t;
        int block = local - cb.tuple_offset[t];
        int nm = static_cast<int>(cb.monos[t].size());
        int ai = block / nm, mi = block % nm;
        Multivector mv(cb.ctxs[t], cb.axis_dim, cb.slot.q);
        mv.add_term(cb.axes_list[ai], LaurentPoly::monomial(cb.ctxs[t], cb.monos[t][mi]));
        Cochain ch{cb.slot, {}};
        ch.add(cb.tuples[t], mv);
        return ch;
    }
    fail(Errc::Internal, "basis index out of range");
}

SRow Space::vectorize(const CochainList& vals) const {
    SRow out;
    for (const auto& ch : vals) {
        if (ch.is_zero()) continue;
        const ComponentBasis* cb = nullptr;
        for (const auto& c : comps)
            if (c.slot == ch.slot) {
                cb = &c;
                break;
            }
        if (!cb) fail(Errc::NotInSpace, "cochain slot " + ch.slot.to_string() + " not in space");
        for (const auto& [t, v] : ch.values) {
            if (v.is_zero()) continue;
            auto ti = std::find(cb->tuples.begin(), cb->tuples.end(), t);
            if (ti == cb->tuples.end())
                fail(Errc::NotInSpace, "tuple " + tuple_str(t) + " not in the nerve");
            int tidx = static_cast<int>(ti - cb->tuples.begin());
            int nm = static_cast<int>(cb->monos[tidx].size());
            for (const auto& [A, coef] : v.comps()) {
                auto ai = std::find(cb->axes_list.begin(), cb->axes_list.end(), A);
                if (ai == cb->axes_list.end())
                    fail(Errc::NotInSpace, "axis tuple outside component");
                int aidx = static_cast<int>(ai - cb->axes_list.begin());
                if (coef.ctx()->nparams() != 0)
                    fail(Errc::WrongRing, "vectorize: coefficients must be parameter-free");
                for (const auto& [m, c] : coef.terms()) {
                    auto mi = cb->mono_index[tidx].find(m);
                    if (mi == cb->mono_index[tidx].end())
                        fail(Errc::NotInSpace,
                             "monomial outside the window on tuple " + tuple_str(t));
                    out.emplace_back(cb->offset + cb->tuple_offset[tidx] + aidx * nm + mi->second,
                                     c);
                }
            }
        }
    }
    return srow_normalize(std::move(out));
}

CochainList Space::devectorize(const SRow& v) const {
    CochainList out;
    for (const auto& cb : comps) out.push_back(Cochain{cb.slot, {}});
    for (const auto& [col, c] : v) {
        size_t ci = 0;
        while (ci + 1 < comps.size() && comps[ci + 1].offset <= col) ++ci;
        const ComponentBasis& cb = comps[ci];
        int local = col - cb.offset;
        size_t t = 0;
        while (t + 1 < cb.tuples.size() && cb.tuple_offset[t + 1] <= local) ++t;
        int block = local - cb.tuple_offset[t];
        int nm = static_cast<int>(cb.monos[t].size());
        Multivector mv(cb.ctxs[t], cb.axis_dim, cb.slot.q);
        mv.add_term(cb.axes_list[block / nm],
                    LaurentPoly::monomial(cb.ctxs[t], cb.monos[t][block % nm], c));
        out[ci].add(cb.tuples[t], mv);
    }
    return out;
}

Space make_space(const CechContext& ctx, const std::vector<CechSlot>& slots, int window) {
    ctx.check();
    const PoissonAtlas& X = ctx.atlas();
    Space sp;
    int offset = 0;
    for (const auto& slot : slots) {
        ComponentBasis cb;
        cb.slot = slot;
        cb.axis_dim = ctx.axis_dim(slot.kind);
        cb.axes_list = combinations(cb.axis_dim, slot.q);
        cb.tuples = nerve_tuples(X, slot.c);
        cb.offset = offset;
        int local = 0;
        for (const auto& t : cb.tuples) {
            Ctx c = tuple_ctx(X, t, window);
            cb.ctxs.push_back(c);
            std::map<Mono, int, MonoLess> idx{MonoLess{0}};
            Mono m(c->nvars(), 0);
            auto rec = [&](auto&& self, int v) -> void {
                if (v == c->nvars()) {
                    idx.emplace(m, 0);
                    return;
                }
                for (int e = c->lo[v]; e <= c->hi[v]; ++e) {
                    m[v] = e;
                    self(self, v + 1);
                }
            };
            rec(rec, 0);
            int pos = 0;
            std::vector<Mono> monos;
            for (auto& [mm, p] : idx) {
                p = pos++;
                monos.push_back(mm);
            }
            cb.tuple_offset.push_back(local);
            local += static_cast<int>(cb.axes_list.size()) * static_cast<int>(monos.size());
            cb.monos.push_back(std::move(monos));
            cb.mono_index.push_back(std::move(idx));
        }
        cb.dim = local;
        offset += local;
        sp.comps.push_back(std::move(cb));
    }
    sp.dim = offset;
    return sp;
}

int KeyIndex::intern(const CoordKey& k) {
    auto it = idx.find(k);
    if (it != idx.end()) return it->second;
    int n = dim();
    idx.emplace(k, n);
    keys.push_back(k);
    return n;
}

SRow vectorize_exact(KeyIndex& ki, const CochainList& vals) {
    SRow out;
    for (const auto& ch : vals) {
        for (const auto& [t, v] : ch.values) {
            for (const auto& [A, coef] : v.comps()) {
                if (coef.ctx()->nparams() != 0)
                    fail(Errc::WrongRing, "vectorize_exact: parameter-free only");
                for (const auto& [m, c] : coef.terms())
                    out.emplace_back(
                        ki.intern(CoordKey{static_cast<int>(ch.slot.kind), ch.slot.c, ch.slot.q,
                                           t, A, m}),
                        c);
            }
        }
    }
    return srow_normalize(std::move(out));
}

void seed_keys(KeyIndex& ki, const Space& s) {
    for (const auto& cb : s.comps) {
        for (size_t t = 0; t < cb.tuples.size(); ++t) {
            int nm = static_cast<int>(cb.monos[t].size());
            for (size_t a = 0; a < cb.axes_list.size(); ++a)
                for (int m = 0; m < nm; ++m) {
                    int expect = cb.offset + cb.tuple_offset[t] +
                                 static_cast<int>(a) * nm + m;
                    int got = ki.intern(CoordKey{static_cast<int>(cb.slot.kind), cb.slot.c,
                                                 cb.slot.q, cb.tuples[t], cb.axes_list[a],
                                                 cb.monos[t][m]});
                    if (got != expect) fail(Errc::Internal, "key seeding out of order");
                }
        }
    }
}

namespace {
SparseMat mat_of(const std::vector<SRow>& rows, int cols) {
    SparseMat m(cols);
    for (const auto& r : rows) m.add_row(r);
    return m;
}
} // namespace

SubquotientResult span_mod_im(const std::vector<SRow>& ker_vecs,
                              const std::vector<SRow>& im_vecs, int emb_dim) {
    SubquotientResult res;
    res.ker_dim = static_cast<int>(ker_vecs.size());
    std::vector<SRow> inter;
    if (!ker_vecs.empty() && !im_vecs.empty())
        inter = span_intersection_basis(mat_of(im_vecs, emb_dim), mat_of(ker_vecs, emb_dim));
    res.im_cap_ker_dim = static_cast<int>(inter.size());
    res.im_reducer = rref(mat_of(inter, emb_dim));
    std::vector<SRow> reduced;
    for (const auto& kv : ker_vecs) {
        SRow r = res.im_reducer.reduce(kv);
        if (!r.empty()) reduced.push_back(std::move(r));
    }
    Rref rb = rref(mat_of(reduced, emb_dim));
    res.reps = rb.rows;
    res.rep_span = rb.rows;
    res.dim = rb.rank();
    if (res.dim != res.ker_dim - res.im_cap_ker_dim)
        fail(Errc::Internal, "subquotient rank bookkeeping mismatch");
    return res;
}

SubquotientResult subquotient_core(const std::vector<SRow>& Tcols,
                                   const std::vector<SRow>& im_vecs, int emb_dim) {
    int cod = 0;
    for (const auto& c : Tcols)
        for (const auto& [i, v] : c) cod = std::max(cod, i + 1);
    SparseMat colmat(cod);
    for (const auto& c : Tcols) colmat.add_row(c);
    SparseMat eqs = colmat.transpose();
    return span_mod_im(kernel_basis(eqs), im_vecs, emb_dim);
}

std::optional<std::vector<Rational>> SubquotientResult::class_coords(const SRow& v) const {
    SRow r = im_reducer.reduce(v);
    int cols = 0;
    for (const auto& row : rep_span)
        for (const auto& [i, c] : row) cols = std::max(cols, i + 1);
    for (const auto& [i, c] : r) cols = std::max(cols, i + 1);
    return coords_in_span(mat_of(rep_span, cols), r);
}

SubquotientResult ker_mod_im(const Space& dom, const Op& T, const Space* predom,
                             const Op& S) {
    KeyIndex cod;
    std::vector<SRow> cols;
    cols.reserve(dom.dim);
    for (int k = 0; k < dom.dim; ++k) cols.push_back(vectorize_exact(cod, T(dom.basis_element(k))));
    KeyIndex emb;
    seed_keys(emb, dom);
    std::vector<SRow> im;
    if (predom && S)
        for (int k = 0; k < predom->dim; ++k)
            im.push_back(vectorize_exact(emb, S(predom->basis_element(k))));
    return subquotient_core(cols, im, emb.dim());
}

// ---------------------------------------------------------------------------

int tot_eps(int c, int q) {
    if (c == 0) return q % 2 ? -1 : 1;
    return q % 2 ? 1 : -1;
}

std::vector<CechSlot> tot_slots(const CechContext& ctx, SlotKind kind, int n) {
    std::vector<CechSlot> out;
    int adim = ctx.axis_dim(kind);
    int maxc = ctx.atlas().nchart() - 1;
    for (int c = 0; c <= maxc; ++c) {
        int q = n + 1 - c;
        if (q >= 1 && q <= adim) out.push_back(CechSlot{kind, c, q});
    }
    return out;
}

namespace {
Cochain scaled(Cochain ch, int s) {
    if (s == 1) return ch;
    for (auto& [t, v] : ch.values) v = v * Rational(s);
    return ch;
}
} // namespace

Op tot_op(const CechContext& ctx) {
    return [ctx](const Cochain& e) {
        CochainList out;
        out.push_back(scaled(cech_delta(ctx, e), tot_eps(e.slot.c, e.slot.q)));
        out.push_back(sheaf_d(ctx, e));
        return out;
    };
}

int default_bump(const PoissonAtlas& a) { return std::max(2, a.data_exponent_bound()); }

namespace {

CohomologyReport run_with_audit(
    const HyperOptions& opt,
    const std::function<SubquotientResult(int, Space&)>& run) {
    CohomologyReport rep;
    rep.window = opt.window;
    Space dom;
    rep.detail = run(opt.window, dom);
    rep.dim = rep.detail.dim;
    for (const auto& r : rep.detail.reps) rep.basis.push_back(dom.devectorize(r));
    rep.dom = dom;
    if (opt.audit) {
        Space dom2;
        SubquotientResult r2 = run(opt.window + 2, dom2);
        rep.dim_enlarged = r2.dim;
        rep.audit_ok = (r2.dim == rep.dim);
        if (!rep.audit_ok && opt.throw_on_audit)
            fail(Errc::WindowInsufficient,
                 "dimension changed under window enlargement: " + std::to_string(rep.dim) +
                     " vs " + std::to_string(r2.dim));
    }
    return rep;
}

} // namespace

CohomologyReport tot_cohomology(const CechContext& ctx, SlotKind kind, int degree,
                                const HyperOptions& opt) {
    ctx.check();
    int bump = opt.bump >= 0 ? opt.bump : default_bump(ctx.atlas());
    Op T = tot_op(ctx);
    auto run = [&](int W, Space& dom_out) {
        Space dom = make_space(ctx, tot_slots(ctx, kind, degree), W);
        SubquotientResult r;
        if (degree == 0) {
            r = ker_mod_im(dom, T, nullptr, Op{});
        } else {
            Space predom = make_space(ctx, tot_slots(ctx, kind, degree - 1), W + bump);
            r = ker_mod_im(dom, T, &predom, T);
        }
        dom_out = std::move(dom);
        return r;
    };
    CohomologyReport rep = run_with_audit(opt, run);
    rep.degree = degree;
    return rep;
}

CohomologyReport sheaf_cohomology(const PoissonAtlas& a, int p, int degree,
                                  const HyperOptions& opt) {
    CechContext ctx{&a, nullptr};
    ctx.check();
    int bump = opt.bump >= 0 ? opt.bump : default_bump(a);
    Op D = [&ctx](const Cochain& e) { return CochainList{cech_delta(ctx, e)}; };
    auto run = [&](int W, Space& dom_out) {
        Space dom = make_space(ctx, {CechSlot{SlotKind::TangentX, degree, p}}, W);
        SubquotientResult r;
        if (degree == 0) {
            r = ker_mod_im(dom, D, nullptr, Op{});
        } else {
            Space predom =
                make_space(ctx, {CechSlot{SlotKind::TangentX, degree - 1, p}}, W + bump);
            r = ker_mod_im(dom, D, &predom, D);
        }
        dom_out = std::move(dom);
        return r;
    };
    CohomologyReport rep = run_with_audit(opt, run);
    rep.degree = degree;
    return rep;
}

std::string CohomologyReport::summary() const {
    std::ostringstream os;
    os << "H^" << degree << " dim=" << dim;
    if (dim_enlarged >= 0) os << " (audit window+2: " << dim_enlarged << ")";
    os << "\n";
    int i = 0;
    for (const auto& rep : basis) {
        os << "  [" << i++ << "]";
        for (const auto& ch : rep)
            if (!ch.is_zero()) os << " " << ch.to_string();
        os << "\n";
    }
    return os.str();
}

} // namespace pdeform
