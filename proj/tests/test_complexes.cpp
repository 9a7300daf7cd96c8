#include <doctest.h>

#include "pdeform/complexes.hpp"

#include <random>

using namespace pdeform;

namespace {
Ctx plane() { return make_ctx(ParamRing{}, {"x", "y"}, 10); }
Ctx line() { return make_ctx(ParamRing{}, {"s"}, 10); }

LaurentPoly rand_poly(const Ctx& c, std::mt19937& rng, int maxdeg = 2) {
    std::uniform_int_distribution<int> coef(-2, 2);
    LaurentPoly p(c);
    Mono m(c->width(), 0);
    auto rec = [&](auto&& self, int v) -> void {
        if (v == c->nvars()) {
            if (rng() % 2) p.add_term(m, coef(rng));
            return;
        }
        for (int e = 0; e <= maxdeg; ++e) {
            m[c->nparams() + v] = e;
            self(self, v + 1);
        }
        m[c->nparams() + v] = 0;
    };
    rec(rec, 0);
    return p;
}

Multivector rand_mv(const Ctx& c, int axis_dim, int deg, std::mt19937& rng) {
    Multivector P(c, axis_dim, deg);
    std::vector<int> A(deg);
    auto rec = [&](auto&& self, int pos, int start) -> void {
        if (pos == deg) {
            P.add_term(A, rand_poly(c, rng));
            return;
        }
        for (int a = start; a < axis_dim; ++a) {
            A[pos] = a;
            self(self, pos + 1, a + 1);
        }
    };
    rec(rec, 0, 0);
    return P;
}

ChartMap id_map(const Ctx& c) {
    ChartMap f{c, c, {}};
    for (int i = 0; i < c->nvars(); ++i) f.components.push_back(LaurentPoly::variable(c, i));
    return f;
}
} // namespace

TEST_CASE("pi for the identity map is the Lichnerowicz differential") {
    auto c = plane();
    auto L = parse_multivector("dz[1,2]: x + y^2", c, 2, 2);
    auto f = id_map(c);
    std::mt19937 rng(1);
    for (int deg = 0; deg <= 2; ++deg) {
        for (int t = 0; t < 3; ++t) {
            auto Q = rand_mv(c, 2, deg, rng);
            auto pi = pi_f(Q, L, L, f);
            auto d = lichnerowicz_d(L, Q);
            CHECK((pi - d.to_ctx(pi.ctx())).is_zero());
        }
    }
}

TEST_CASE("pi on the axis inclusion: pinned values") {
    // X = {y=0} in (A^2, Pi = y dx^dy); source structure zero
    auto cx = line();
    auto cy = plane();
    ChartMap f{cx, cy, {parse_poly("s", cx), LaurentPoly(cx, 0)}};
    auto Pi = parse_multivector("dz[1,2]: y", cy, 2, 2);
    Multivector lam0(cx, 1, 2); // zero bivector on the 1-dim source
    Multivector dy(cx, 2, 1);
    dy.add_term({1}, LaurentPoly(cx, 1));
    auto r = pi_f(dy, lam0, Pi, f);
    CHECK(r.to_string() == "dz[1,2]: -1"); // pi(dy) = -dx^dy
    Multivector dx(cx, 2, 1);
    dx.add_term({0}, LaurentPoly(cx, 1));
    CHECK(pi_f(dx, lam0, Pi, f).is_zero());
}

TEST_CASE("pi squares to zero") {
    auto cx = line();
    auto cy = plane();
    ChartMap f{cx, cy, {parse_poly("s", cx), LaurentPoly(cx, 0)}};
    auto Pi = parse_multivector("dz[1,2]: y*x + y^2", cy, 2, 2);
    Multivector lam0(cx, 1, 2);
    std::mt19937 rng(5);
    for (int deg = 0; deg <= 1; ++deg)
        for (int t = 0; t < 4; ++t) {
            auto Q = rand_mv(cx, 2, deg, rng);
            CHECK(pi_f(pi_f(Q, lam0, Pi, f), lam0, Pi, f).is_zero());
        }
}

TEST_CASE("F is a chain map: F [Lambda, P] = pi F(P)") {
    // identity-like test with a nontrivial Poisson map: P^1-style monomial map is
    // overkill; use the diagonal scaling automorphism of (A^2, x y dx^dy)... simplest
    // honest case: f = id with Lambda = Pi, plus the axis inclusion with Lambda = 0.
    auto c = plane();
    auto L = parse_multivector("dz[1,2]: x*y", c, 2, 2);
    auto f = id_map(c);
    std::mt19937 rng(7);
    for (int deg = 0; deg <= 2; ++deg) {
        auto P = rand_mv(c, 2, deg, rng);
        auto lhs = chain_map_F(schouten(L, P).to_ctx(c), f);
        auto rhs = pi_f(chain_map_F(P, f), L, L, f);
        CHECK((lhs.to_ctx(rhs.ctx()) - rhs).is_zero());
    }

    auto cx = line();
    ChartMap incl{cx, c, {parse_poly("s", cx), LaurentPoly(cx, 0)}};
    auto Pi = parse_multivector("dz[1,2]: y*x^2", c, 2, 2);
    Multivector lam0(cx, 1, 2);
    for (int deg = 0; deg <= 1; ++deg) {
        auto P = rand_mv(cx, 1, deg, rng);
        auto lhs = chain_map_F(schouten(lam0, P).to_ctx(cx), incl);
        auto rhs = pi_f(chain_map_F(P, incl), lam0, Pi, incl);
        CHECK((lhs.to_ctx(rhs.ctx()) - rhs).is_zero());
    }
}

TEST_CASE("pi on sections matches the explicit coordinate expansion") {
    // For Q = sum_rho Q^rho d/dw^rho the alternating-sum operator must unroll to
    //   pi(Q)(w^p, w^q) = sum_{a<b} L_ab (d_a Q^p d_b f^q - d_b Q^p d_a f^q)
    //                   - (p <-> q)
    //                   - sum_rho Q^rho (d Pi_pq / d w^rho) o f
    // on every chart datum, Poisson or not: this is a formula identity.
    auto c = make_ctx(ParamRing{}, {"x", "y"}, 30);
    auto cy = make_ctx(ParamRing{}, {"a", "b", "e"}, 30);
    std::mt19937 rng(21);
    for (int t = 0; t < 8; ++t) {
        auto L = rand_mv(c, 2, 2, rng);   // source bivector
        auto Pi = rand_mv(cy, 3, 2, rng); // target bivector
        ChartMap f{c, cy, {rand_poly(c, rng), rand_poly(c, rng), rand_poly(c, rng)}};
        auto Q = rand_mv(c, 3, 1, rng); // section of f*T_Y
        auto r = pi_f(Q, L, Pi, f);
        for (int p = 0; p < 3; ++p)
            for (int q = p + 1; q < 3; ++q) {
                auto half = [&](int p1, int q1) {
                    LaurentPoly acc(c);
                    for (const auto& [AB, lc] : L.comps()) {
                        const auto& Qp = Q.coeff({p1});
                        const auto& fq = f.components[q1];
                        acc += lc * (Qp.derivative(AB[0]) * fq.derivative(AB[1]) -
                                     Qp.derivative(AB[1]) * fq.derivative(AB[0]));
                    }
                    return acc;
                };
                LaurentPoly expect = half(p, q) - half(q, p);
                for (int rho = 0; rho < 3; ++rho)
                    expect -= Q.coeff({rho}) *
                              compose(Pi.coeff({p, q}).derivative(rho), f.components, c);
                CHECK((r.coeff({p, q}) - expect).is_zero());
            }
    }
}

TEST_CASE("F on bivectors matches the explicit coordinate expansion") {
    //   F(P)(w^p, w^q) = sum_{a<b} P_ab (d_a f^p d_b f^q - d_b f^p d_a f^q)
    auto c = make_ctx(ParamRing{}, {"x", "y"}, 30);
    auto cy = make_ctx(ParamRing{}, {"a", "b", "e"}, 30);
    std::mt19937 rng(23);
    for (int t = 0; t < 8; ++t) {
        auto P = rand_mv(c, 2, 2, rng);
        ChartMap f{c, cy, {rand_poly(c, rng), rand_poly(c, rng), rand_poly(c, rng)}};
        auto r = chain_map_F(P, f);
        for (int p = 0; p < 3; ++p)
            for (int q = p + 1; q < 3; ++q) {
                LaurentPoly expect(c);
                for (const auto& [AB, pc] : P.comps())
                    expect += pc * (f.components[p].derivative(AB[0]) *
                                        f.components[q].derivative(AB[1]) -
                                    f.components[p].derivative(AB[1]) *
                                        f.components[q].derivative(AB[0]));
                CHECK((r.coeff({p, q}) - expect).is_zero());
            }
    }
}

TEST_CASE("f* is a chain map: f*[Pi, Q] = pi f*(Q)") {
    auto cx = line();
    auto cy = plane();
    ChartMap incl{cx, cy, {parse_poly("s", cx), LaurentPoly(cx, 0)}};
    auto Pi = parse_multivector("dz[1,2]: y*x + 2*y^2", cy, 2, 2);
    Multivector lam0(cx, 1, 2);
    std::mt19937 rng(13);
    for (int deg = 0; deg <= 2; ++deg)
        for (int t = 0; t < 3; ++t) {
            auto Q = rand_mv(cy, 2, deg, rng);
            auto lhs = pullback_mv(schouten(Pi, Q), incl);
            auto rhs = pi_f(pullback_mv(Q, incl), lam0, Pi, incl);
            CHECK((lhs.to_ctx(rhs.ctx()) - rhs).is_zero());
        }
}
