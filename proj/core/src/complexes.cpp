#include "pdeform/complexes.hpp"

namespace pdeform {

LaurentPoly mixed_evaluate(const Multivector& Q, const std::vector<LaurentPoly>& args,
                           const ChartMap& f) {
    const int q = Q.degree();
    if (static_cast<int>(args.size()) != q)
        fail(Errc::ArityMismatch, "mixed_evaluate: wrong argument count");
    Ctx twork = scratch_ctx(f.tgt);
    Ctx swork = scratch_ctx(f.src);
    std::vector<LaurentPoly> a;
    a.reserve(args.size());
    for (const auto& g : args) a.push_back(g.to_ctx(twork));
    LaurentPoly total(swork);
    for (const auto& [A, c] : Q.comps()) {
        std::vector<std::vector<LaurentPoly>> M(q, std::vector<LaurentPoly>(q));
        for (int k = 0; k < q; ++k)
            for (int l = 0; l < q; ++l) M[k][l] = a[k].derivative(A[l]);
        LaurentPoly det = poly_det(M, twork);
        total += c.to_ctx(swork) * compose(det, f.components, swork);
    }
    return total;
}

Multivector pi_f(const Multivector& Q, const Multivector& lambda_src,
                 const Multivector& pi_tgt, const ChartMap& f) {
    const int q = Q.degree();
    const int m = f.tgt->nvars();
    if (Q.axis_dim() != m) fail(Errc::ArityMismatch, "pi_f: axes must be target coordinates");
    Ctx twork = scratch_ctx(f.tgt);
    Ctx swork = scratch_ctx(f.src);
    Multivector R(swork, m, q + 1);
    std::vector<LaurentPoly> w;
    for (int i = 0; i < m; ++i) w.push_back(LaurentPoly::variable(twork, i));

    std::vector<int> T(q + 1);
    auto rec = [&](auto&& self, int pos, int start) -> void {
        if (pos == q + 1) {
            LaurentPoly val(swork);
            // first sum: move a_k last
            for (int k = 0; k <= q; ++k) {
                std::vector<LaurentPoly> rest;
                for (int i = 0; i <= q; ++i)
                    if (i != k) rest.push_back(w[T[i]]);
                LaurentPoly b1 = mixed_evaluate(Q, rest, f);
                LaurentPoly fa = f.components[T[k]].to_ctx(swork);
                LaurentPoly br = evaluate(lambda_src, {b1, fa}).to_ctx(swork);
                val += (q - k) % 2 ? -br : br;
            }
            // second sum: contract a_i, a_j through the target bivector
            int s2 = (q - 1) % 2 ? 1 : -1; // -(-1)^{q-1}
            for (int i = 0; i <= q; ++i)
                for (int j = i + 1; j <= q; ++j) {
                    std::vector<LaurentPoly> rest{
                        evaluate(pi_tgt, {w[T[i]], w[T[j]]}).to_ctx(twork)};
                    for (int k = 0; k <= q; ++k)
                        if (k != i && k != j) rest.push_back(w[T[k]]);
                    LaurentPoly term = mixed_evaluate(Q, rest, f);
                    int sgn = s2 * ((i + j - 1) % 2 ? -1 : 1);
                    val += sgn < 0 ? -term : term;
                }
            R.add_term(T, val);
            return;
        }
        for (int a = start; a <= m - (q + 1 - pos); ++a) {
            T[pos] = a;
            self(self, pos + 1, a + 1);
        }
    };
    rec(rec, 0, 0);
    return R;
}

Multivector chain_map_F(const Multivector& P, const ChartMap& f) {
    const int p = P.degree();
    const int m = f.tgt->nvars();
    Ctx swork = scratch_ctx(f.src);
    Multivector R(swork, m, p);
    std::vector<int> B(p);
    auto rec = [&](auto&& self, int pos, int start) -> void {
        if (pos == p) {
            std::vector<LaurentPoly> args;
            for (int k = 0; k < p; ++k) args.push_back(f.components[B[k]]);
            R.add_term(B, evaluate(P, args).to_ctx(swork));
            return;
        }
        for (int a = start; a <= m - (p - pos); ++a) {
            B[pos] = a;
            self(self, pos + 1, a + 1);
        }
    };
    rec(rec, 0, 0);
    return R;
}

Multivector pullback_mv(const Multivector& Q, const ChartMap& f) {
    Ctx swork = scratch_ctx(f.src);
    Multivector R(swork, Q.axis_dim(), Q.degree());
    for (const auto& [A, c] : Q.comps()) R.add_term(A, compose(c, f.components, swork));
    return R;
}

} // namespace pdeform
