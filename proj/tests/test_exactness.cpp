#include <doctest.h>

#include "pdeform/exactness.hpp"

#include "fixtures.hpp"

using namespace pdeform;
using namespace fixtures;

TEST_CASE("relative tangent and normal cohomology oracles") {
    HyperOptions opt;
    opt.window = 3;
    {
        // identity: F is an isomorphism, both complexes are exact
        auto f = plane_identity("dz[1,2]: x");
        CHECK(rel_tangent_cohomology(f, 1, opt).dim == 0);
        CHECK(normal_cohomology(f, 0, opt).dim == 0);
        CHECK(normal_cohomology(f, 1, opt).dim == 0);
    }
    {
        // point at the origin of (A^2, x dx^dy): T_X = 0, N_f = f*T_Y;
        // pi kills dx (the anchor direction dx^dy pairs it with x) and fixes dy
        auto f = point_in_plane("dz[1,2]: x");
        CHECK(rel_tangent_cohomology(f, 1, opt).dim == 0);
        CHECK(normal_cohomology(f, 0, opt).dim == 1);
        CHECK(normal_cohomology(f, 1, opt).dim == 0);
    }
    {
        // zero structure: pi = 0 and the point sees the full pullback complex
        auto f = point_in_plane("0");
        CHECK(normal_cohomology(f, 0, opt).dim == 2);
        CHECK(normal_cohomology(f, 1, opt).dim == 1);
    }
    {
        // the line is smoothly embedded: ker F = 0, and the two sequences
        // identify PD and PD^1 with the normal cohomology
        auto f = line_in_p2();
        CHECK(rel_tangent_cohomology(f, 1, opt).dim == 0);
        CHECK(rel_tangent_cohomology(f, 2, opt).dim == 0);
        CHECK(normal_cohomology(f, 0, opt).dim == 0);
        CHECK(normal_cohomology(f, 1, opt).dim == 2);
    }
}

static void check_audit(const PoissonMapData& f, int window) {
    HyperOptions opt;
    opt.window = window;
    auto rep = exactness_audit(f, opt);
    INFO(rep.to_string());
    CHECK(rep.ok());
}

TEST_CASE("exactness audit: identity of P^1") { check_audit(p1_identity(), 3); }

TEST_CASE("exactness audit rejects window-dependent cohomology") {
    // on a single affine chart H^0 grows with the window, so the dimensions
    // are not honest invariants and the audit must refuse to certify them
    HyperOptions opt;
    opt.window = 3;
    CHECK_THROWS_AS((void)exactness_audit(plane_identity("dz[1,2]: x"), opt), Error);
}

TEST_CASE("exactness audit: point in (A^2, x dx^dy)") {
    check_audit(point_in_plane("dz[1,2]: x"), 3);
}

TEST_CASE("exactness audit: point in the zero Poisson plane") {
    check_audit(point_in_plane("0"), 3);
}

TEST_CASE("exactness audit: line in (P^2, y dx^dy)") {
    check_audit(line_in_p2(), 3);
}
