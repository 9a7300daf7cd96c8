#include "pdeform/multivector.hpp"

#include <algorithm>
#include <cctype>
#include <numeric>
#include <sstream>

namespace pdeform {

namespace {

// sign of the permutation sorting `v`, or 0 if it has repeats
int sort_sign(std::vector<int>& v) {
    int sign = 1;
    for (size_t i = 0; i + 1 < v.size(); ++i)
        for (size_t j = 0; j + 1 < v.size() - i; ++j) {
            if (v[j] == v[j + 1]) return 0;
            if (v[j] > v[j + 1]) {
                std::swap(v[j], v[j + 1]);
                sign = -sign;
            }
        }
    return sign;
}

// merge two strictly increasing tuples; (sign, merged) or sign 0 on overlap
std::pair<int, std::vector<int>> merge_tuples(const std::vector<int>& A,
                                              const std::vector<int>& B) {
    std::vector<int> m = A;
    m.insert(m.end(), B.begin(), B.end());
    int s = sort_sign(m);
    return {s, std::move(m)};
}

int sigma(int q) { return (q * (q + 1) / 2) % 2 ? -1 : 1; }

// left derivative d/dxi_alpha: removing position k costs (-1)^k
Multivector xi_deriv(const Multivector& P, int alpha) {
    Multivector R(P.ctx(), P.axis_dim(), P.degree() - 1);
    for (const auto& [A, c] : P.comps()) {
        auto it = std::find(A.begin(), A.end(), alpha);
        if (it == A.end()) continue;
        int k = static_cast<int>(it - A.begin());
        std::vector<int> B;
        B.reserve(A.size() - 1);
        for (int x : A)
            if (x != alpha) B.push_back(x);
        R.add_term(B, k % 2 ? -c : c);
    }
    return R;
}

Multivector z_deriv(const Multivector& P, int alpha) {
    Multivector R(P.ctx(), P.axis_dim(), P.degree());
    for (const auto& [A, c] : P.comps()) R.add_term(A, c.derivative(alpha));
    return R;
}

// sum_alpha (-1)^p (dP/dxi_alpha) ^ (dQ/dz^alpha)
Multivector schouten_dot(const Multivector& P, const Multivector& Q) {
    const int p = P.degree();
    Multivector R(P.ctx(), P.axis_dim(), p + Q.degree() - 1);
    for (int alpha = 0; alpha < P.axis_dim(); ++alpha) {
        Multivector t = wedge(xi_deriv(P, alpha), z_deriv(Q, alpha));
        if (p % 2)
            R -= t;
        else
            R += t;
    }
    return R;
}

} // namespace

bool Multivector::is_zero() const { return comps_.empty(); }

void Multivector::add_term(std::vector<int> axes, const LaurentPoly& c) {
    if (static_cast<int>(axes.size()) != degree_)
        fail(Errc::ArityMismatch, "axis tuple length != multivector degree");
    for (int a : axes)
        if (a < 0 || a >= axis_dim_) fail(Errc::ArityMismatch, "axis index out of range");
    if (c.is_zero()) return;
    int sign = sort_sign(axes);
    if (sign == 0) return;
    LaurentPoly v = c.to_ctx(ctx_);
    if (sign < 0) v = -v;
    auto it = comps_.find(axes);
    if (it == comps_.end()) {
        if (!v.is_zero()) comps_.emplace(std::move(axes), std::move(v));
    } else {
        it->second += v;
        if (it->second.is_zero()) comps_.erase(it);
    }
}

LaurentPoly Multivector::coeff(const std::vector<int>& axes) const {
    auto it = comps_.find(axes);
    if (it == comps_.end()) return LaurentPoly(ctx_);
    return it->second;
}

void Multivector::check_compatible(const Multivector& o) const {
    if (axis_dim_ != o.axis_dim_ || degree_ != o.degree_)
        fail(Errc::ArityMismatch, "multivector shape mismatch");
    if (!ctx_->same_shape(*o.ctx_))
        fail(Errc::ContextMismatch, "multivector context mismatch");
}

Multivector Multivector::operator+(const Multivector& o) const {
    Multivector r = *this;
    r += o;
    return r;
}

Multivector& Multivector::operator+=(const Multivector& o) {
    check_compatible(o);
    for (const auto& [A, c] : o.comps_) add_term(A, c);
    return *this;
}

Multivector& Multivector::operator-=(const Multivector& o) {
    check_compatible(o);
    for (const auto& [A, c] : o.comps_) add_term(A, -c);
    return *this;
}

Multivector Multivector::operator-(const Multivector& o) const {
    Multivector r = *this;
    r -= o;
    return r;
}

Multivector Multivector::operator-() const {
    Multivector r = *this;
    for (auto& [A, c] : r.comps_) c = -c;
    return r;
}

Multivector Multivector::operator*(const Rational& c) const {
    Multivector r(ctx_, axis_dim_, degree_);
    if (c == 0) return r;
    r.comps_ = comps_;
    for (auto& [A, v] : r.comps_) v = v * c;
    return r;
}

bool Multivector::operator==(const Multivector& o) const {
    if (axis_dim_ != o.axis_dim_ || degree_ != o.degree_) return false;
    if (comps_.size() != o.comps_.size()) return false;
    for (const auto& [A, c] : comps_) {
        auto it = o.comps_.find(A);
        if (it == o.comps_.end() || !(it->second == c)) return false;
    }
    return true;
}

Multivector Multivector::scaled_by(const LaurentPoly& f) const {
    Multivector r(ctx_, axis_dim_, degree_);
    for (const auto& [A, c] : comps_) r.add_term(A, c * f.to_ctx(ctx_));
    return r;
}

Multivector Multivector::to_ctx(const Ctx& out) const {
    Multivector r(out, axis_dim_, degree_);
    for (const auto& [A, c] : comps_) r.add_term(A, c.to_ctx(out));
    return r;
}

int Multivector::max_abs_exponent() const {
    int e = 0;
    for (const auto& [A, c] : comps_) e = std::max(e, c.max_abs_exponent());
    return e;
}

int Multivector::max_param_degree() const {
    int e = 0;
    for (const auto& [A, c] : comps_) e = std::max(e, c.max_param_degree());
    return e;
}

std::string Multivector::to_string() const {
    if (comps_.empty()) return "0";
    if (degree_ == 0) return comps_.begin()->second.to_string();
    std::ostringstream os;
    bool first = true;
    for (const auto& [A, c] : comps_) {
        if (!first) os << "; ";
        first = false;
        os << "dz[";
        for (size_t i = 0; i < A.size(); ++i) {
            if (i) os << ",";
            os << (A[i] + 1);
        }
        os << "]: " << c.to_string();
    }
    return os.str();
}

Multivector wedge(const Multivector& P, const Multivector& Q) {
    if (P.axis_dim() != Q.axis_dim()) fail(Errc::ArityMismatch, "wedge axis mismatch");
    Multivector R(P.ctx(), P.axis_dim(), P.degree() + Q.degree());
    for (const auto& [A, a] : P.comps()) {
        for (const auto& [B, b] : Q.comps()) {
            auto [s, T] = merge_tuples(A, B);
            if (s == 0) continue;
            LaurentPoly c = a * b.to_ctx(a.ctx());
            R.add_term(T, s < 0 ? -c : c);
        }
    }
    return R;
}

Multivector schouten(const Multivector& P, const Multivector& Q) {
    if (P.axis_dim() != P.ctx()->nvars() || Q.axis_dim() != Q.ctx()->nvars())
        fail(Errc::ArityMismatch, "schouten requires axes = chart variables");
    Ctx work = scratch_ctx(P.ctx());
    Multivector Pw = P.to_ctx(work), Qw = Q.to_ctx(work);
    const int p = P.degree(), q = Q.degree();
    Multivector A = schouten_dot(Pw, Qw);
    Multivector B = schouten_dot(Qw, Pw);
    int s = ((p - 1) * (q - 1)) % 2 ? -1 : 1;
    Multivector raw = s < 0 ? A + B : A - B;
    int pre = sigma(p) * sigma(q) * sigma(p + q - 1);
    return pre < 0 ? -raw : raw;
}

LaurentPoly poly_det(const std::vector<std::vector<LaurentPoly>>& m, const Ctx& ctx) {
    const int n = static_cast<int>(m.size());
    LaurentPoly det(ctx);
    std::vector<int> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    do {
        std::vector<int> p = perm;
        int sign = sort_sign(p); // sign of permutation (p was perm, sorting it back)
        LaurentPoly term(ctx, sign);
        for (int k = 0; k < n; ++k) term = term * m[k][perm[k]];
        det += term;
    } while (std::next_permutation(perm.begin(), perm.end()));
    return det;
}

LaurentPoly evaluate(const Multivector& P, const std::vector<LaurentPoly>& fns) {
    if (P.axis_dim() != P.ctx()->nvars())
        fail(Errc::ArityMismatch, "evaluate requires axes = chart variables");
    const int p = P.degree();
    if (static_cast<int>(fns.size()) != p)
        fail(Errc::ArityMismatch, "evaluate: wrong number of functions");
    Ctx work = scratch_ctx(P.ctx());
    std::vector<LaurentPoly> f;
    f.reserve(fns.size());
    for (const auto& g : fns) f.push_back(g.to_ctx(work));
    LaurentPoly total(work);
    for (const auto& [A, c] : P.comps()) {
        std::vector<std::vector<LaurentPoly>> M(p, std::vector<LaurentPoly>(p));
        for (int k = 0; k < p; ++k)
            for (int l = 0; l < p; ++l) M[k][l] = f[k].derivative(A[l]);
        total += c.to_ctx(work) * poly_det(M, work);
    }
    return total;
}

void ChartMap::check() const {
    if (static_cast<int>(components.size()) != tgt->nvars())
        fail(Errc::ArityMismatch, "chart map component count != target dimension");
    for (const auto& c : components)
        if (c.ctx()->vars != src->vars)
            fail(Errc::ContextMismatch, "chart map component in wrong variables");
}

LaurentPoly ChartMap::pullback(const LaurentPoly& g) const {
    return compose(g, components, scratch_ctx(src));
}

ChartMap compose(const ChartMap& f, const ChartMap& g) {
    if (f.src->vars != g.tgt->vars)
        fail(Errc::CompositionMismatch, "chart map composition variable mismatch");
    ChartMap h;
    h.src = g.src;
    h.tgt = f.tgt;
    Ctx work = scratch_ctx(g.src);
    for (const auto& c : f.components) h.components.push_back(compose(c, g.components, work));
    return h;
}

namespace {
ChartMap identity_map(const Ctx& c) {
    ChartMap id;
    Ctx work = scratch_ctx(c);
    id.src = id.tgt = work;
    for (int i = 0; i < c->nvars(); ++i) id.components.push_back(LaurentPoly::variable(work, i));
    return id;
}

bool is_identity(const ChartMap& f) {
    if (f.src->vars != f.tgt->vars) return false;
    for (size_t i = 0; i < f.components.size(); ++i) {
        LaurentPoly v = LaurentPoly::variable(scratch_ctx(f.src), static_cast<int>(i));
        if (f.components[i].to_ctx(v.ctx()) != v) return false;
    }
    return true;
}
} // namespace

bool are_mutually_inverse(const ChartMap& phi, const ChartMap& psi) {
    return is_identity(compose(phi, psi)) && is_identity(compose(psi, phi));
}

ChartMap formal_inverse(const ChartMap& phi, const ChartMap& base_inverse) {
    // g = phi o psi0 - id on the target; must vanish at parameter degree 0
    ChartMap g = compose(phi, base_inverse);
    Ctx work = scratch_ctx(phi.tgt);
    std::vector<LaurentPoly> gt;
    for (int i = 0; i < phi.tgt->nvars(); ++i) {
        LaurentPoly d = g.components[i].to_ctx(work) - LaurentPoly::variable(work, i);
        if (!d.param_coeff(std::vector<int>(work->nparams(), 0), work).is_zero())
            fail(Errc::NoInverse, "base_inverse does not invert the base part");
        gt.push_back(std::move(d));
    }
    // fixed point rho = id - g o rho, gaining one parameter degree per pass
    std::vector<LaurentPoly> rho;
    for (int i = 0; i < phi.tgt->nvars(); ++i) rho.push_back(LaurentPoly::variable(work, i));
    const int mu = work->ring.order;
    for (int it = 0; it < mu; ++it) {
        std::vector<LaurentPoly> next;
        for (int i = 0; i < phi.tgt->nvars(); ++i)
            next.push_back(LaurentPoly::variable(work, i) - compose(gt[i], rho, work));
        rho = std::move(next);
    }
    ChartMap rho_map;
    rho_map.src = rho_map.tgt = work;
    rho_map.components = std::move(rho);
    ChartMap psi = compose(base_inverse, rho_map);
    psi.src = work;
    psi.tgt = scratch_ctx(phi.src);
    if (!are_mutually_inverse(phi, psi))
        fail(Errc::NoInverse, "fixed-point inverse failed the exact check");
    return psi;
}

Multivector pushforward(const Multivector& P, const ChartMap& phi, const ChartMap& psi) {
    if (P.axis_dim() != P.ctx()->nvars() || P.ctx()->vars != phi.src->vars)
        fail(Errc::ArityMismatch, "pushforward: multivector not on the source chart");
    const int p = P.degree();
    Ctx swork = scratch_ctx(phi.src);
    Ctx twork = scratch_ctx(phi.tgt);
    Multivector R(twork, phi.tgt->nvars(), p);
    // all strictly increasing p-tuples of target axes
    std::vector<int> B(p);
    auto rec = [&](auto&& self, int pos, int start) -> void {
        if (pos == p) {
            LaurentPoly total(swork);
            for (const auto& [A, c] : P.comps()) {
                std::vector<std::vector<LaurentPoly>> M(p, std::vector<LaurentPoly>(p));
                for (int k = 0; k < p; ++k)
                    for (int l = 0; l < p; ++l)
                        M[k][l] = phi.components[B[k]].to_ctx(swork).derivative(A[l]);
                total += c.to_ctx(swork) * poly_det(M, swork);
            }
            if (!total.is_zero()) R.add_term(B, compose(total, psi.components, twork));
            return;
        }
        for (int a = start; a <= phi.tgt->nvars() - (p - pos); ++a) {
            B[pos] = a;
            self(self, pos + 1, a + 1);
        }
    };
    rec(rec, 0, 0);
    return R;
}

Multivector parse_multivector(const std::string& text, const Ctx& ctx, int axis_dim,
                              int degree) {
    Multivector R(ctx, axis_dim, degree);
    // strip spaces for structure detection only
    std::string stripped;
    for (char c : text)
        if (!std::isspace(static_cast<unsigned char>(c))) stripped.push_back(c);
    if (stripped == "0") return R;
    if (degree == 0) {
        R.add_term({}, parse_poly(text, ctx));
        return R;
    }
    size_t pos = 0;
    while (pos < text.size()) {
        size_t semi = text.find(';', pos);
        std::string entry = text.substr(pos, semi == std::string::npos ? semi : semi - pos);
        pos = semi == std::string::npos ? text.size() : semi + 1;
        // entry: dz[1,2]: poly
        std::string e;
        size_t colon_after_bracket = std::string::npos;
        size_t close = entry.find(']');
        size_t open = entry.find('[');
        if (open == std::string::npos || close == std::string::npos || close < open)
            fail(Errc::SyntaxError, "multivector entry missing dz[...]: " + entry);
        colon_after_bracket = entry.find(':', close);
        if (colon_after_bracket == std::string::npos)
            fail(Errc::SyntaxError, "multivector entry missing ':': " + entry);
        std::vector<int> axes;
        std::string axlist = entry.substr(open + 1, close - open - 1);
        std::istringstream as(axlist);
        std::string tok;
        while (std::getline(as, tok, ',')) {
            size_t idx = 0;
            int a = std::stoi(tok, &idx);
            axes.push_back(a - 1);
        }
        R.add_term(axes, parse_poly(entry.substr(colon_after_bracket + 1), ctx));
    }
    return R;
}

} // namespace pdeform
