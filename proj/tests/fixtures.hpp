#pragma once

#include "pdeform/geometry.hpp"

namespace fixtures {

using namespace pdeform;

inline PoissonAtlas affine_plane(const std::string& biv) {
    PoissonAtlas a;
    a.ring = ParamRing{};
    auto c = make_ctx(a.ring, {"x", "y"}, 8);
    a.charts.push_back({"U0", c, 8});
    a.bivectors.push_back(parse_multivector(biv, c, 2, 2));
    return a;
}

inline PoissonAtlas p1(bool broken = false) {
    PoissonAtlas a;
    a.ring = ParamRing{};
    auto c0 = make_ctx(a.ring, {"z"}, 8);
    auto c1 = make_ctx(a.ring, {"w"}, 8);
    a.charts.push_back({"U0", c0, 8});
    a.charts.push_back({"U1", c1, 8});
    a.transitions[{0, 1}] = ChartMap{c1, c0, {parse_poly("w^-1", c1)}};
    a.transitions[{1, 0}] = ChartMap{c0, c1, {parse_poly(broken ? "z" : "z^-1", c0)}};
    a.bivectors.push_back(Multivector(c0, 1, 2));
    a.bivectors.push_back(Multivector(c1, 1, 2));
    return a;
}

// Three-chart P^2; bivector induced by y dx^dy when with_bivector is set.
inline PoissonAtlas p2(bool with_bivector) {
    PoissonAtlas a;
    a.ring = ParamRing{};
    auto c0 = make_ctx(a.ring, {"x", "y"}, 10);
    auto c1 = make_ctx(a.ring, {"u", "v"}, 10);
    auto c2 = make_ctx(a.ring, {"s", "t"}, 10);
    a.charts.push_back({"U0", c0, 10});
    a.charts.push_back({"U1", c1, 10});
    a.charts.push_back({"U2", c2, 10});
    auto cm = [](Ctx src, Ctx tgt, const std::string& p1s, const std::string& p2s) {
        return ChartMap{src, tgt, {parse_poly(p1s, src), parse_poly(p2s, src)}};
    };
    a.transitions[{0, 1}] = cm(c1, c0, "u^-1", "v*u^-1");
    a.transitions[{1, 0}] = cm(c0, c1, "x^-1", "y*x^-1");
    a.transitions[{0, 2}] = cm(c2, c0, "t*s^-1", "s^-1");
    a.transitions[{2, 0}] = cm(c0, c2, "y^-1", "x*y^-1");
    a.transitions[{1, 2}] = cm(c2, c1, "s*t^-1", "t^-1");
    a.transitions[{2, 1}] = cm(c1, c2, "u*v^-1", "v^-1");
    if (with_bivector) {
        a.bivectors.push_back(parse_multivector("dz[1,2]: y", c0, 2, 2));
        a.bivectors.push_back(parse_multivector("dz[1,2]: -u^2*v", c1, 2, 2));
        a.bivectors.push_back(parse_multivector("dz[1,2]: s^2", c2, 2, 2));
    } else {
        a.bivectors.push_back(Multivector(c0, 2, 2));
        a.bivectors.push_back(Multivector(c1, 2, 2));
        a.bivectors.push_back(Multivector(c2, 2, 2));
    }
    return a;
}

// P^2 minus the point (0:0:1): the charts U0, U1 only (an ambient for the line v=0).
inline PoissonAtlas p2_minus_point(bool with_bivector) {
    auto a = p2(with_bivector);
    a.charts.resize(2);
    a.bivectors.resize(2);
    std::erase_if(a.transitions,
                  [](const auto& kv) { return kv.first.first > 1 || kv.first.second > 1; });
    return a;
}

// The Hirzebruch surface F_2 = P(O + O(2)) over P^1, zero bivector. Four charts:
// base z / w = z^-1, fiber p / q = p^-1, twisted fiber s = z^2 p, t = s^-1.
// Classical values: h^0(T) = 7, h^1(T) = 1, h^2(T) = 0.
inline PoissonAtlas hirzebruch2() {
    PoissonAtlas a;
    a.ring = ParamRing{};
    auto c0 = make_ctx(a.ring, {"z", "p"}, 12);
    auto c1 = make_ctx(a.ring, {"z", "q"}, 12);
    auto c2 = make_ctx(a.ring, {"w", "s"}, 12);
    auto c3 = make_ctx(a.ring, {"w", "t"}, 12);
    a.charts.push_back({"U0", c0, 12});
    a.charts.push_back({"U1", c1, 12});
    a.charts.push_back({"U2", c2, 12});
    a.charts.push_back({"U3", c3, 12});
    auto cm = [](Ctx src, Ctx tgt, const std::string& f, const std::string& g) {
        return ChartMap{src, tgt, {parse_poly(f, src), parse_poly(g, src)}};
    };
    a.transitions[{0, 1}] = cm(c1, c0, "z", "q^-1");
    a.transitions[{1, 0}] = cm(c0, c1, "z", "p^-1");
    a.transitions[{0, 2}] = cm(c2, c0, "w^-1", "w^2*s");
    a.transitions[{2, 0}] = cm(c0, c2, "z^-1", "z^2*p");
    a.transitions[{0, 3}] = cm(c3, c0, "w^-1", "w^2*t^-1");
    a.transitions[{3, 0}] = cm(c0, c3, "z^-1", "z^-2*p^-1");
    a.transitions[{1, 2}] = cm(c2, c1, "w^-1", "w^-2*s^-1");
    a.transitions[{2, 1}] = cm(c1, c2, "z^-1", "z^2*q^-1");
    a.transitions[{1, 3}] = cm(c3, c1, "w^-1", "w^-2*t");
    a.transitions[{3, 1}] = cm(c1, c3, "z^-1", "z^-2*q");
    a.transitions[{2, 3}] = cm(c3, c2, "w", "t^-1");
    a.transitions[{3, 2}] = cm(c2, c3, "w", "s^-1");
    for (auto& ch : a.charts) a.bivectors.push_back(Multivector(ch.ctx, 2, 2));
    return a;
}

inline PoissonAtlas point_atlas() {
    PoissonAtlas a;
    a.ring = ParamRing{};
    auto c = make_ctx(a.ring, {}, 8);
    a.charts.push_back({"P", c, 8});
    a.bivectors.push_back(Multivector(c, 0, 2));
    return a;
}

// The line P^1 = {y = 0} = {v = 0} inside P^2 minus a point, with the zero structure.
inline PoissonAtlas line_atlas() {
    PoissonAtlas a = p1();
    return a;
}

// Inclusion of the origin into the affine plane with the given bivector.
inline PoissonMapData point_in_plane(const std::string& biv) {
    PoissonMapData f;
    f.source = point_atlas();
    f.target = affine_plane(biv);
    f.assignment = {0};
    auto pc = f.source.charts[0].ctx;
    f.components.push_back({LaurentPoly(pc, 0), LaurentPoly(pc, 0)});
    return f;
}

// Identity map of the affine plane with the given bivector.
inline PoissonMapData plane_identity(const std::string& biv) {
    PoissonMapData f;
    f.source = affine_plane(biv);
    f.target = affine_plane(biv);
    f.assignment = {0};
    auto c = f.source.charts[0].ctx;
    f.components.push_back({LaurentPoly::variable(c, 0), LaurentPoly::variable(c, 1)});
    return f;
}

// Identity map of P^1 with the zero structure.
inline PoissonMapData p1_identity() {
    PoissonMapData f;
    f.source = p1();
    f.target = p1();
    f.assignment = {0, 1};
    f.components.push_back({LaurentPoly::variable(f.source.charts[0].ctx, 0)});
    f.components.push_back({LaurentPoly::variable(f.source.charts[1].ctx, 0)});
    return f;
}

// The line {y=0} included into P^2 minus a point, carrying the bivector induced by
// y dx^dy (which vanishes on the line; the line gets the zero structure).
inline PoissonMapData line_in_p2() {
    PoissonMapData f;
    f.source = line_atlas();
    f.target = p2_minus_point(true);
    f.assignment = {0, 1};
    auto c0 = f.source.charts[0].ctx;
    auto c1 = f.source.charts[1].ctx;
    f.components.push_back({LaurentPoly::variable(c0, 0), LaurentPoly(c0, 0)}); // (x,y)=(z,0)
    f.components.push_back({LaurentPoly::variable(c1, 0), LaurentPoly(c1, 0)}); // (u,v)=(w,0)
    return f;
}

// The line {y=0} inside the full three-chart P^2 (with or without the y-structure).
inline PoissonMapData line_in_full_p2(bool with_bivector) {
    PoissonMapData f = line_in_p2();
    f.target = p2(with_bivector);
    return f;
}

// Two disjoint points, both mapping to the origin of chart 0 of P^2 with the zero
// structure (the pullback comparison has a rank-1 diagonal image in a 2-dim target).
inline PoissonMapData two_points_to_p2_origin() {
    PoissonMapData f;
    f.source = point_atlas();
    f.source.charts.push_back({"Q", f.source.charts[0].ctx, 8});
    f.source.bivectors.push_back(f.source.bivectors[0]);
    f.target = p2(false);
    f.assignment = {0, 0};
    auto pc = f.source.charts[0].ctx;
    f.components.push_back({LaurentPoly(pc, 0), LaurentPoly(pc, 0)});
    f.components.push_back({LaurentPoly(pc, 0), LaurentPoly(pc, 0)});
    return f;
}

// The affine line A^1 with the zero structure.
inline PoissonAtlas affine_line() {
    PoissonAtlas a;
    a.ring = ParamRing{};
    auto c = make_ctx(a.ring, {"s"}, 8);
    a.charts.push_back({"L", c, 8});
    a.bivectors.push_back(Multivector(c, 1, 2));
    return a;
}

// Total space of a line bundle over the three-chart P^2 (fiber coordinate
// scaling with the inverse coordinate ratios), zero structure. The zero section
// {n = m = l = 0} is a three-chart Poisson submanifold whose normal frame
// transitions are nontrivial on every overlap.
inline PoissonAtlas bundle_over_p2() {
    PoissonAtlas a;
    a.ring = ParamRing{};
    auto c0 = make_ctx(a.ring, {"x", "y", "n"}, 10);
    auto c1 = make_ctx(a.ring, {"u", "v", "m"}, 10);
    auto c2 = make_ctx(a.ring, {"s", "t", "l"}, 10);
    a.charts.push_back({"U0", c0, 10});
    a.charts.push_back({"U1", c1, 10});
    a.charts.push_back({"U2", c2, 10});
    auto cm = [](Ctx src, Ctx tgt, const char* f, const char* g, const char* h) {
        return ChartMap{src, tgt, {parse_poly(f, src), parse_poly(g, src), parse_poly(h, src)}};
    };
    a.transitions[{0, 1}] = cm(c1, c0, "u^-1", "v*u^-1", "u^-1*m");
    a.transitions[{1, 0}] = cm(c0, c1, "x^-1", "y*x^-1", "x^-1*n");
    a.transitions[{0, 2}] = cm(c2, c0, "t*s^-1", "s^-1", "s^-1*l");
    a.transitions[{2, 0}] = cm(c0, c2, "y^-1", "x*y^-1", "y^-1*n");
    a.transitions[{1, 2}] = cm(c2, c1, "s*t^-1", "t^-1", "t^-1*l");
    a.transitions[{2, 1}] = cm(c1, c2, "u*v^-1", "v^-1", "v^-1*m");
    for (auto& ch : a.charts) a.bivectors.push_back(Multivector(ch.ctx, 3, 2));
    return a;
}

// Composable chain: point -> A^1 -> (A^2, given bivector), h = g o f the origin.
struct FactorChain {
    PoissonMapData f; // point into the line
    PoissonMapData g; // line into the plane, s -> (s, 0)
    PoissonMapData h; // point into the plane (the composition)
};

inline FactorChain point_line_plane(const std::string& biv = "dz[1,2]: 0") {
    FactorChain c;
    c.f.source = point_atlas();
    c.f.target = affine_line();
    c.f.assignment = {0};
    c.f.components.push_back({LaurentPoly(c.f.source.charts[0].ctx, 0)});
    c.g.source = affine_line();
    c.g.target = affine_plane(biv);
    c.g.assignment = {0};
    auto lc = c.g.source.charts[0].ctx;
    c.g.components.push_back({LaurentPoly::variable(lc, 0), LaurentPoly(lc, 0)});
    c.h = point_in_plane(biv);
    return c;
}

} // namespace fixtures
