#include "pdeform/pd.hpp"

#include <sstream>

namespace pdeform {

namespace {

Cochain scaled(Cochain ch, int s) {
    if (s == 1) return ch;
    for (auto& [t, v] : ch.values) v = v * Rational(s);
    return ch;
}

const CechSlot FY01{SlotKind::PullbackY, 0, 1};
const CechSlot FY11{SlotKind::PullbackY, 1, 1};
const CechSlot FY02{SlotKind::PullbackY, 0, 2};
const CechSlot TX01{SlotKind::TangentX, 0, 1};
const CechSlot TX11{SlotKind::TangentX, 1, 1};
const CechSlot TX02{SlotKind::TangentX, 0, 2};
const CechSlot TX21{SlotKind::TangentX, 2, 1};
const CechSlot TX12{SlotKind::TangentX, 1, 2};
const CechSlot TX03{SlotKind::TangentX, 0, 3};

// Relations of PD: rows indexed by their output slot.
CochainList pd_T(const CechContext& cx, const Cochain& e) {
    const CechSlot& s = e.slot;
    if (s == FY01) return {cech_delta(cx, e), sheaf_d(cx, e)};
    if (s == TX11) return {apply_F(cx, e), cech_delta(cx, e), sheaf_d(cx, e)};
    if (s == TX02) return {scaled(apply_F(cx, e), -1), cech_delta(cx, e), sheaf_d(cx, e)};
    fail(Errc::Internal, "pd relations: unexpected slot " + s.to_string());
}

// Coboundaries of PD: w in C^0(T_X) -> (F(w), -delta w, [Lambda0, w]).
CochainList pd_S(const CechContext& cx, const Cochain& w) {
    return {apply_F(cx, w), scaled(cech_delta(cx, w), -1), sheaf_d(cx, w)};
}

// Relations of PD^1.
CochainList pd1_T(const CechContext& cx, const Cochain& e) {
    const CechSlot& s = e.slot;
    if (s == FY11) return {cech_delta(cx, e), sheaf_d(cx, e)};
    if (s == FY02) return {cech_delta(cx, e), sheaf_d(cx, e)};
    if (s == TX21) return {scaled(apply_F(cx, e), -1), cech_delta(cx, e), sheaf_d(cx, e)};
    if (s == TX12)
        return {scaled(apply_F(cx, e), -1), scaled(cech_delta(cx, e), -1), sheaf_d(cx, e)};
    if (s == TX03)
        return {scaled(apply_F(cx, e), -1), scaled(cech_delta(cx, e), -1), sheaf_d(cx, e)};
    fail(Errc::Internal, "pd1 relations: unexpected slot " + s.to_string());
}

// Coboundaries of PD^1: (a, u, c) -> (F(u) - delta a, F(c) + pi(a), delta u,
// delta c + [Lambda0, u], [Lambda0, c]).
CochainList pd1_S(const CechContext& cx, const Cochain& e) {
    const CechSlot& s = e.slot;
    if (s == FY01) return {scaled(cech_delta(cx, e), -1), sheaf_d(cx, e)};
    if (s == TX11) return {apply_F(cx, e), cech_delta(cx, e), sheaf_d(cx, e)};
    if (s == TX02) return {apply_F(cx, e), cech_delta(cx, e), sheaf_d(cx, e)};
    fail(Errc::Internal, "pd1 coboundaries: unexpected slot " + s.to_string());
}

struct PDProblem {
    std::string name;
    std::vector<CechSlot> dom_slots;
    std::vector<CechSlot> pre_slots;
    std::function<CochainList(const CechContext&, const Cochain&)> T;
    std::function<CochainList(const CechContext&, const Cochain&)> S;
};

PDReport run_pd(const CechContext& cx, const PDProblem& prob,
                const std::vector<FamilyDirection>& dirs, const HyperOptions& opt) {
    cx.check();
    int bump = opt.bump >= 0 ? opt.bump : default_bump(cx.atlas());

    auto run = [&](int W, Space& dom_out) {
        Space dom = make_space(cx, prob.dom_slots, W);
        KeyIndex cod;
        std::vector<SRow> cols;
        cols.reserve(dom.dim + dirs.size());
        for (int k = 0; k < dom.dim; ++k)
            cols.push_back(vectorize_exact(cod, prob.T(cx, dom.basis_element(k))));
        for (const auto& d : dirs) {
            CochainList contrib{d.rho, scaled(d.gamma, -1)};
            cols.push_back(vectorize_exact(cod, contrib));
        }
        KeyIndex emb;
        seed_keys(emb, dom);
        for (size_t v = 0; v < dirs.size(); ++v) {
            // one embedding coordinate per theta, directly after the cochain block
            int got = emb.intern(CoordKey{-1, -1, static_cast<int>(v), {}, {}, {}});
            if (got != dom.dim + static_cast<int>(v)) fail(Errc::Internal, "theta key order");
        }
        Space predom = make_space(cx, prob.pre_slots, W + bump);
        std::vector<SRow> im;
        im.reserve(predom.dim);
        for (int k = 0; k < predom.dim; ++k)
            im.push_back(vectorize_exact(emb, prob.S(cx, predom.basis_element(k))));
        dom_out = std::move(dom);
        return subquotient_core(cols, im, emb.dim());
    };

    PDReport rep;
    rep.name = prob.name;
    rep.window = opt.window;
    rep.ntheta = static_cast<int>(dirs.size());
    Space dom;
    rep.detail = run(opt.window, dom);
    rep.dim = rep.detail.dim;
    for (const auto& r : rep.detail.reps) {
        PDClassRep cr;
        cr.thetas.assign(dirs.size(), 0);
        SRow cochain_part;
        for (const auto& [i, c] : r) {
            if (i < dom.dim)
                cochain_part.emplace_back(i, c);
            else
                cr.thetas[i - dom.dim] = c;
        }
        cr.parts = dom.devectorize(cochain_part);
        rep.basis.push_back(std::move(cr));
    }
    rep.dom = dom;
    if (opt.audit) {
        Space dom2;
        SubquotientResult r2 = run(opt.window + 2, dom2);
        rep.dim_enlarged = r2.dim;
        rep.audit_ok = (r2.dim == rep.dim);
        if (!rep.audit_ok && opt.throw_on_audit)
            fail(Errc::WindowInsufficient,
                 prob.name + " dimension changed under window enlargement: " +
                     std::to_string(rep.dim) + " vs " + std::to_string(r2.dim));
    }
    return rep;
}

void check_direction(const CechContext& cx, const FamilyDirection& d) {
    if (!(d.rho.slot == FY11) || !(d.gamma.slot == FY02))
        fail(Errc::NotACocycle, "family direction has wrong slots");
    // 1-cocycle of the pullback total complex: delta rho = 0, delta gamma + pi(rho) = 0,
    // pi(gamma) = 0.
    KeyIndex ki;
    if (!vectorize_exact(ki, {cech_delta(cx, d.rho)}).empty())
        fail(Errc::NotACocycle, "family direction: delta rho != 0");
    if (!vectorize_exact(ki, {cech_delta(cx, d.gamma), sheaf_d(cx, d.rho)}).empty())
        fail(Errc::NotACocycle, "family direction: delta gamma + pi(rho) != 0");
    if (!vectorize_exact(ki, {sheaf_d(cx, d.gamma)}).empty())
        fail(Errc::NotACocycle, "family direction: pi(gamma) != 0");
}

} // namespace

PDReport pd_space(const PoissonMapData& f, const HyperOptions& opt) {
    CechContext cx{nullptr, &f};
    PDProblem prob{"PD", {FY01, TX11, TX02}, {TX01}, pd_T, pd_S};
    return run_pd(cx, prob, {}, opt);
}

PDReport pd1_space(const PoissonMapData& f, const HyperOptions& opt) {
    CechContext cx{nullptr, &f};
    PDProblem prob{"PD1", {FY11, FY02, TX21, TX12, TX03}, {FY01, TX11, TX02}, pd1_T, pd1_S};
    return run_pd(cx, prob, {}, opt);
}

PDReport pd_family_space(const PoissonMapData& f, const std::vector<FamilyDirection>& dirs,
                         const HyperOptions& opt) {
    CechContext cx{nullptr, &f};
    for (const auto& d : dirs) check_direction(cx, d);
    PDProblem prob{"PD_family", {FY01, TX11, TX02}, {TX01}, pd_T, pd_S};
    return run_pd(cx, prob, dirs, opt);
}

CochainList pd_relation_rows(const CechContext& cx, const Cochain& e) { return pd_T(cx, e); }
CochainList pd_coboundary_rows(const CechContext& cx, const Cochain& w) { return pd_S(cx, w); }
CochainList pd1_relation_rows(const CechContext& cx, const Cochain& e) { return pd1_T(cx, e); }
CochainList pd1_coboundary_rows(const CechContext& cx, const Cochain& e) { return pd1_S(cx, e); }

int cone_dim(const PoissonMapData& f, int n, const HyperOptions& opt) {
    CechContext cx{nullptr, &f};
    cx.check();
    int bump = opt.bump >= 0 ? opt.bump : default_bump(cx.atlas());
    Op T = tot_op(cx);
    auto cone_slots = [&](int m) {
        std::vector<CechSlot> s = tot_slots(cx, SlotKind::PullbackY, m - 1);
        auto tx = tot_slots(cx, SlotKind::TangentX, m);
        s.insert(s.end(), tx.begin(), tx.end());
        return s;
    };
    Op C = [cx, T](const Cochain& e) {
        if (e.slot.kind == SlotKind::PullbackY) return T(e);
        CochainList out;
        for (auto& o : T(e)) out.push_back(scaled(std::move(o), -1));
        out.push_back(apply_F(cx, e));
        return out;
    };
    auto run = [&](int W) {
        Space dom = make_space(cx, cone_slots(n), W);
        Space predom = make_space(cx, cone_slots(n - 1), W + bump);
        return ker_mod_im(dom, C, &predom, C).dim;
    };
    int d = run(opt.window);
    if (opt.audit && run(opt.window + 2) != d)
        fail(Errc::WindowInsufficient, "cone dimension changed under window enlargement");
    return d;
}

std::string PDReport::summary() const {
    std::ostringstream os;
    os << name << " dim=" << dim;
    if (dim_enlarged >= 0) os << " (audit window+2: " << dim_enlarged << ")";
    os << "\n";
    int i = 0;
    for (const auto& rep : basis) {
        os << "  [" << i++ << "]";
        for (const auto& ch : rep.parts)
            if (!ch.is_zero()) os << " " << ch.to_string();
        for (size_t v = 0; v < rep.thetas.size(); ++v)
            os << " theta_" << v + 1 << "=" << rational_to_string(rep.thetas[v]);
        os << "\n";
    }
    return os.str();
}

} // namespace pdeform
