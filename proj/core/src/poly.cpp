#include "pdeform/poly.hpp"

#include <algorithm>
#include <cctype>
#include <limits>
#include <numeric>
#include <sstream>

namespace pdeform {

namespace {
int total_deg(const std::vector<int>& v) { return std::accumulate(v.begin(), v.end(), 0); }

bool divides(const std::vector<int>& gen, const std::vector<int>& m) {
    for (size_t i = 0; i < gen.size(); ++i)
        if (m[i] < gen[i]) return false;
    return true;
}
} // namespace

bool ParamRing::allows(const std::vector<int>& pexp) const {
    if (static_cast<int>(pexp.size()) != r()) fail(Errc::Internal, "param exponent width");
    if (total_deg(pexp) > order) return false;
    for (const auto& g : ideal_gens)
        if (divides(g, pexp)) return false;
    return true;
}

std::vector<std::vector<int>> ParamRing::monomials() const {
    std::vector<std::vector<int>> out;
    std::vector<int> cur(r(), 0);
    // enumerate all exponent vectors with total degree <= order
    auto rec = [&](auto&& self, int pos, int left) -> void {
        if (pos == r()) {
            if (allows(cur)) out.push_back(cur);
            return;
        }
        for (int e = 0; e <= left; ++e) {
            cur[pos] = e;
            self(self, pos + 1, left - e);
        }
        cur[pos] = 0;
    };
    rec(rec, 0, order);
    MonoLess less{r()};
    std::sort(out.begin(), out.end(), less);
    return out;
}

bool ParamRing::operator==(const ParamRing& o) const {
    return params == o.params && order == o.order && ideal_gens == o.ideal_gens;
}

void SmallExtension::check() const {
    if (!(total.params == quotient.params) || total.order != quotient.order)
        fail(Errc::ExtensionMismatch, "total and quotient rings differ in parameters");
    if (!total.allows(tau)) fail(Errc::ExtensionMismatch, "tau not allowed in total ring");
    if (quotient.allows(tau)) fail(Errc::ExtensionMismatch, "tau survives in quotient");
    auto mt = total.monomials();
    auto mq = quotient.monomials();
    if (mt.size() != mq.size() + 1)
        fail(Errc::ExtensionMismatch, "kernel is not one-dimensional");
    // m . tau = 0: tau times any allowed nonunit monomial must leave the ring
    for (const auto& m : mt) {
        if (total_deg(m) == 0) continue;
        std::vector<int> prod(m.size());
        for (size_t i = 0; i < m.size(); ++i) prod[i] = m[i] + tau[i];
        if (total.allows(prod)) fail(Errc::ExtensionMismatch, "m*tau nonzero in total ring");
    }
}

std::vector<SmallExtension> extension_chain(const ParamRing& A) {
    auto mons = A.monomials(); // global order: unit first, then by grade
    std::vector<SmallExtension> chain;
    // not-yet-added monomials are banned by listing them as extra ideal generators
    for (size_t k = 1; k < mons.size(); ++k) {
        ParamRing quotient = A;
        for (size_t j = k; j < mons.size(); ++j) quotient.ideal_gens.push_back(mons[j]);
        ParamRing tot = A;
        for (size_t j = k + 1; j < mons.size(); ++j) tot.ideal_gens.push_back(mons[j]);
        SmallExtension e{tot, quotient, mons[k]};
        e.check();
        chain.push_back(std::move(e));
    }
    return chain;
}

int VarContext::var_index(const std::string& name) const {
    for (int i = 0; i < nvars(); ++i)
        if (vars[i] == name) return i;
    return -1;
}

Ctx make_ctx(ParamRing ring, std::vector<std::string> vars, int window, bool strict) {
    auto c = std::make_shared<VarContext>();
    c->ring = std::move(ring);
    c->vars = std::move(vars);
    c->lo.assign(c->vars.size(), -window);
    c->hi.assign(c->vars.size(), window);
    c->strict = strict;
    return c;
}

Ctx make_ctx(ParamRing ring, std::vector<std::string> vars, std::vector<int> lo,
             std::vector<int> hi, bool strict) {
    auto c = std::make_shared<VarContext>();
    c->ring = std::move(ring);
    c->vars = std::move(vars);
    c->lo = std::move(lo);
    c->hi = std::move(hi);
    c->strict = strict;
    return c;
}

Ctx scratch_ctx(const Ctx& c) {
    auto s = std::make_shared<VarContext>(*c);
    const int big = std::numeric_limits<int>::max() / 4;
    s->lo.assign(s->vars.size(), -big);
    s->hi.assign(s->vars.size(), big);
    s->strict = true;
    return s;
}

Ctx widened_ctx(const Ctx& c, int extra) {
    auto s = std::make_shared<VarContext>(*c);
    for (auto& v : s->lo) v -= extra;
    for (auto& v : s->hi) v += extra;
    return s;
}

bool MonoLess::operator()(const Mono& a, const Mono& b) const {
    int da = 0, db = 0;
    for (int i = 0; i < np; ++i) {
        da += a[i];
        db += b[i];
    }
    if (da != db) return da < db;
    return a < b;
}

LaurentPoly::LaurentPoly(Ctx ctx, const Rational& c) : ctx_(std::move(ctx)) {
    terms_ = std::map<Mono, Rational, MonoLess>(MonoLess{ctx_->nparams()});
    if (c != 0) terms_.emplace(Mono(ctx_->width(), 0), c);
}

LaurentPoly LaurentPoly::monomial(Ctx ctx, const Mono& m, const Rational& c) {
    LaurentPoly p(std::move(ctx));
    p.terms_ = std::map<Mono, Rational, MonoLess>(MonoLess{p.ctx_->nparams()});
    p.add_term(m, c);
    return p;
}

LaurentPoly LaurentPoly::variable(Ctx ctx, int var) {
    Mono m(ctx->width(), 0);
    m[ctx->nparams() + var] = 1;
    return monomial(std::move(ctx), m, 1);
}

LaurentPoly LaurentPoly::parameter(Ctx ctx, int param) {
    Mono m(ctx->width(), 0);
    m[param] = 1;
    return monomial(std::move(ctx), m, 1);
}

void LaurentPoly::add_term(const Mono& m, const Rational& c) {
    if (c == 0) return;
    if (!ctx_) fail(Errc::Internal, "poly without context");
    if (static_cast<int>(m.size()) != ctx_->width())
        fail(Errc::ContextMismatch, "monomial width mismatch");
    const int np = ctx_->nparams();
    std::vector<int> pexp(m.begin(), m.begin() + np);
    if (!ctx_->ring.allows(pexp)) return; // ring truncation is part of the arithmetic
    for (int i = 0; i < ctx_->nvars(); ++i) {
        int e = m[np + i];
        if (e < ctx_->lo[i] || e > ctx_->hi[i]) {
            if (ctx_->strict)
                fail(Errc::WindowOverflow, "exponent " + std::to_string(e) + " of " +
                                               ctx_->vars[i] + " outside window");
            return; // lifting mode: silent truncation
        }
    }
    if (terms_.key_comp().np != np) terms_ = std::map<Mono, Rational, MonoLess>(MonoLess{np});
    auto it = terms_.find(m);
    if (it == terms_.end()) {
        terms_.emplace(m, c);
    } else {
        it->second += c;
        if (it->second == 0) terms_.erase(it);
    }
}

void LaurentPoly::check_same(const LaurentPoly& o) const {
    if (!ctx_ || !o.ctx_) fail(Errc::Internal, "poly without context");
    if (ctx_ != o.ctx_ && !ctx_->same_shape(*o.ctx_))
        fail(Errc::ContextMismatch, "operating on polynomials from different contexts");
}

LaurentPoly LaurentPoly::operator+(const LaurentPoly& o) const {
    LaurentPoly r = *this;
    r += o;
    return r;
}

LaurentPoly& LaurentPoly::operator+=(const LaurentPoly& o) {
    if (!ctx_) {
        *this = o;
        return *this;
    }
    if (o.is_zero()) return *this;
    check_same(o);
    for (const auto& [m, c] : o.terms_) add_term(m, c);
    return *this;
}

LaurentPoly& LaurentPoly::operator-=(const LaurentPoly& o) {
    if (!ctx_) {
        *this = -o;
        return *this;
    }
    if (o.is_zero()) return *this;
    check_same(o);
    for (const auto& [m, c] : o.terms_) add_term(m, -c);
    return *this;
}

LaurentPoly LaurentPoly::operator-(const LaurentPoly& o) const {
    LaurentPoly r = *this;
    r -= o;
    return r;
}

LaurentPoly LaurentPoly::operator-() const {
    LaurentPoly r = *this;
    for (auto& [m, c] : r.terms_) c = -c;
    return r;
}

LaurentPoly LaurentPoly::operator*(const LaurentPoly& o) const {
    check_same(o);
    LaurentPoly r(ctx_);
    r.terms_ = std::map<Mono, Rational, MonoLess>(MonoLess{ctx_->nparams()});
    Mono m(ctx_->width());
    for (const auto& [ma, ca] : terms_) {
        for (const auto& [mb, cb] : o.terms_) {
            for (int i = 0; i < ctx_->width(); ++i) m[i] = ma[i] + mb[i];
            r.add_term(m, ca * cb);
        }
    }
    return r;
}

LaurentPoly LaurentPoly::operator*(const Rational& c) const {
    LaurentPoly r(ctx_);
    if (c == 0) return r;
    r.terms_ = terms_;
    for (auto& [m, v] : r.terms_) v *= c;
    return r;
}

LaurentPoly LaurentPoly::pow(int n) const {
    if (n < 0) fail(Errc::Internal, "pow with negative exponent");
    LaurentPoly r(ctx_, 1);
    for (int i = 0; i < n; ++i) r = r * *this;
    return r;
}

LaurentPoly LaurentPoly::derivative(int var) const {
    LaurentPoly r(ctx_);
    r.terms_ = std::map<Mono, Rational, MonoLess>(MonoLess{ctx_->nparams()});
    const int np = ctx_->nparams();
    for (const auto& [m, c] : terms_) {
        int e = m[np + var];
        if (e == 0) continue;
        Mono d = m;
        d[np + var] = e - 1;
        r.add_term(d, c * e);
    }
    return r;
}

LaurentPoly LaurentPoly::param_coeff(const std::vector<int>& pexp, const Ctx& out) const {
    if (static_cast<int>(pexp.size()) != ctx_->nparams())
        fail(Errc::ContextMismatch, "parameter exponent width");
    if (out->vars != ctx_->vars) fail(Errc::ContextMismatch, "variable mismatch");
    LaurentPoly r(out);
    const int np = ctx_->nparams();
    for (const auto& [m, c] : terms_) {
        if (!std::equal(pexp.begin(), pexp.end(), m.begin())) continue;
        Mono v(out->width(), 0);
        std::copy(m.begin() + np, m.end(), v.begin() + out->nparams());
        r.add_term(v, c);
    }
    return r;
}

LaurentPoly LaurentPoly::to_ctx(const Ctx& out) const {
    if (out->vars != ctx_->vars) fail(Errc::ContextMismatch, "variable mismatch");
    LaurentPoly r(out);
    const int np = ctx_->nparams();
    const int onp = out->nparams();
    if (np == onp && ctx_->ring.params == out->ring.params) {
        for (const auto& [m, c] : terms_) r.add_term(m, c);
        return r;
    }
    if (np == 0) {
        for (const auto& [m, c] : terms_) {
            Mono v(out->width(), 0);
            std::copy(m.begin(), m.end(), v.begin() + onp);
            r.add_term(v, c);
        }
        return r;
    }
    fail(Errc::ContextMismatch, "parameter rings incompatible for context change");
}

int LaurentPoly::max_abs_exponent() const {
    int e = 0;
    const int np = ctx_ ? ctx_->nparams() : 0;
    for (const auto& [m, c] : terms_)
        for (size_t i = np; i < m.size(); ++i) e = std::max(e, std::abs(m[i]));
    return e;
}

int LaurentPoly::max_param_degree() const {
    int d = 0;
    const int np = ctx_ ? ctx_->nparams() : 0;
    for (const auto& [m, c] : terms_) {
        int t = 0;
        for (int i = 0; i < np; ++i) t += m[i];
        d = std::max(d, t);
    }
    return d;
}

std::string LaurentPoly::to_string() const {
    if (terms_.empty()) return "0";
    std::ostringstream os;
    const int np = ctx_->nparams();
    bool first = true;
    for (const auto& [m, c] : terms_) {
        if (!first) os << " + ";
        first = false;
        std::vector<std::string> factors;
        auto emit = [&](const std::string& name, int e) {
            if (e == 0) return;
            if (e == 1)
                factors.push_back(name);
            else
                factors.push_back(name + "^" + std::to_string(e));
        };
        for (int i = 0; i < ctx_->nvars(); ++i) emit(ctx_->vars[i], m[np + i]);
        for (int i = 0; i < np; ++i) emit(ctx_->ring.params[i], m[i]);
        if (factors.empty()) {
            os << rational_to_string(c);
        } else {
            if (c == -1)
                os << "-";
            else if (c != 1)
                os << rational_to_string(c) << "*";
            for (size_t i = 0; i < factors.size(); ++i) {
                if (i) os << "*";
                os << factors[i];
            }
        }
    }
    return os.str();
}

LaurentPoly compose(const LaurentPoly& p, const std::vector<LaurentPoly>& values,
                    const Ctx& out) {
    const auto& pc = *p.ctx();
    if (static_cast<int>(values.size()) != pc.nvars())
        fail(Errc::ArityMismatch, "compose: value count != variable count");
    if (!(pc.ring.params == out->ring.params))
        fail(Errc::ContextMismatch, "compose: parameter mismatch");
    Ctx work = scratch_ctx(out);
    // per-variable power caches (positive and negative separately)
    std::vector<std::map<int, LaurentPoly>> cache(values.size());
    std::vector<LaurentPoly> vals;
    vals.reserve(values.size());
    for (const auto& v : values) vals.push_back(v.to_ctx(work));
    auto power = [&](int i, int e) -> const LaurentPoly& {
        auto it = cache[i].find(e);
        if (it != cache[i].end()) return it->second;
        LaurentPoly r(work, 1);
        if (e > 0)
            r = vals[i].pow(e);
        else if (e < 0)
            r = invert(vals[i]).pow(-e);
        return cache[i].emplace(e, std::move(r)).first->second;
    };
    LaurentPoly acc(work);
    const int np = pc.nparams();
    for (const auto& [m, c] : p.terms()) {
        Mono pm(work->width(), 0);
        std::copy(m.begin(), m.begin() + np, pm.begin());
        LaurentPoly term = LaurentPoly::monomial(work, pm, c);
        for (int i = 0; i < pc.nvars(); ++i) {
            int e = m[np + i];
            if (e != 0) term = term * power(i, e);
        }
        acc += term;
    }
    return acc.to_ctx(out);
}

LaurentPoly invert(const LaurentPoly& p) {
    if (p.is_zero()) fail(Errc::NoInverse, "inverting zero");
    const Ctx work = scratch_ctx(p.ctx());
    LaurentPoly q = p.to_ctx(work);
    const int np = work->nparams();
    // the parameter-degree-0 part must be a single Laurent monomial
    std::optional<Mono> base;
    Rational basec;
    for (const auto& [m, c] : q.terms()) {
        int d = 0;
        for (int i = 0; i < np; ++i) d += m[i];
        if (d == 0) {
            if (base) fail(Errc::NoInverse, "base part is not a single monomial: " + p.to_string());
            base = m;
            basec = c;
        }
    }
    if (!base) fail(Errc::NoInverse, "base part vanishes: " + p.to_string());
    Mono inv_m(work->width(), 0);
    for (size_t i = 0; i < base->size(); ++i) inv_m[i] = -(*base)[i];
    LaurentPoly minv = LaurentPoly::monomial(work, inv_m, Rational(1) / basec);
    // q = c*m (1 + n) with n of positive parameter degree; invert the unit factor
    LaurentPoly n = q * minv - LaurentPoly(work, 1);
    LaurentPoly unit_inv(work, 1);
    LaurentPoly npow(work, 1);
    for (int k = 1; k <= work->ring.order; ++k) {
        npow = npow * n;
        if (npow.is_zero()) break;
        unit_inv += npow * Rational(k % 2 ? -1 : 1);
    }
    return (minv * unit_inv).to_ctx(p.ctx());
}

namespace {
bool name_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }
} // namespace

LaurentPoly parse_poly(const std::string& text, const Ctx& ctx) {
    std::string s;
    for (char c : text)
        if (!std::isspace(static_cast<unsigned char>(c))) s.push_back(c);
    if (s.empty()) fail(Errc::SyntaxError, "empty polynomial");
    LaurentPoly result(ctx);
    size_t i = 0;
    const int np = ctx->nparams();
    while (i < s.size()) {
        int sign = 1;
        while (i < s.size() && (s[i] == '+' || s[i] == '-')) {
            if (s[i] == '-') sign = -sign;
            ++i;
        }
        if (i >= s.size()) fail(Errc::SyntaxError, "dangling sign in '" + text + "'");
        Rational coeff = sign;
        Mono m(ctx->width(), 0);
        bool expect_factor = true;
        while (expect_factor) {
            if (i >= s.size()) fail(Errc::SyntaxError, "dangling '*' in '" + text + "'");
            if (std::isdigit(static_cast<unsigned char>(s[i]))) {
                size_t j = i;
                while (j < s.size() && (std::isdigit(static_cast<unsigned char>(s[j])) || s[j] == '/'))
                    ++j;
                coeff *= rational_from_string(s.substr(i, j - i));
                i = j;
            } else if (name_char(s[i])) {
                size_t j = i;
                while (j < s.size() && name_char(s[j])) ++j;
                std::string name = s.substr(i, j - i);
                i = j;
                int exp = 1;
                if (i < s.size() && s[i] == '^') {
                    ++i;
                    size_t k = i;
                    if (k < s.size() && s[k] == '-') ++k;
                    while (k < s.size() && std::isdigit(static_cast<unsigned char>(s[k]))) ++k;
                    if (k == i) fail(Errc::SyntaxError, "bad exponent in '" + text + "'");
                    exp = std::stoi(s.substr(i, k - i));
                    i = k;
                }
                int vi = ctx->var_index(name);
                if (vi >= 0) {
                    m[np + vi] += exp;
                } else {
                    int pi = -1;
                    for (int k2 = 0; k2 < np; ++k2)
                        if (ctx->ring.params[k2] == name) pi = k2;
                    if (pi < 0)
                        fail(Errc::SyntaxError, "unknown variable '" + name + "' in '" + text + "'");
                    if (exp < 0) fail(Errc::SyntaxError, "negative parameter exponent");
                    m[pi] += exp;
                }
            } else {
                fail(Errc::SyntaxError, std::string("unexpected character '") + s[i] + "'");
            }
            expect_factor = (i < s.size() && s[i] == '*');
            if (expect_factor) ++i;
        }
        result.add_term(m, coeff);
    }
    return result;
}

} // namespace pdeform
