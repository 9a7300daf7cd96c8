#include <doctest.h>

#include "pdeform/pd.hpp"

#include "fixtures.hpp"

using namespace pdeform;
using namespace fixtures;

TEST_CASE("PD of the identity map vanishes") {
    auto f = plane_identity("dz[1,2]: x");
    REQUIRE(validate_map(f).ok());
    HyperOptions opt;
    opt.window = 3;
    auto pd = pd_space(f, opt);
    CHECK(pd.dim == 0);
    CHECK(pd.audit_ok);
    CHECK(pd.summary().substr(0, 8) == "PD dim=0");
}

TEST_CASE("PD and PD1 of a point in (A^2, x dx^dy)") {
    auto f = point_in_plane("dz[1,2]: x");
    REQUIRE(validate_map(f).ok());
    HyperOptions opt;
    opt.window = 3;
    auto pd = pd_space(f, opt);
    CHECK(pd.dim == 1); // the kernel direction dy of the anchor at the origin
    REQUIRE(pd.basis.size() == 1);
    bool saw_dy = false;
    for (const auto& ch : pd.basis[0].parts)
        if (ch.slot == CechSlot{SlotKind::PullbackY, 0, 1} && !ch.is_zero())
            saw_dy = (ch.values.begin()->second.to_string() == "dz[2]: 1");
    CHECK(saw_dy);
    auto pd1 = pd1_space(f, opt);
    CHECK(pd1.dim == 0);
}

TEST_CASE("PD and PD1 of a point in the zero Poisson plane") {
    auto f = point_in_plane("0");
    HyperOptions opt;
    opt.window = 3;
    CHECK(pd_space(f, opt).dim == 2);  // all first-order motions of the point
    CHECK(pd1_space(f, opt).dim == 1); // eta = dx^dy survives, nothing cancels it
}

TEST_CASE("PD and PD1 of the line in (P^2, y dx^dy)") {
    auto f = line_in_p2();
    REQUIRE(validate_map(f).ok());
    HyperOptions opt;
    opt.window = 3;
    auto pd = pd_space(f, opt);
    CHECK(pd.dim == 0);
    CHECK(pd.audit_ok);
    auto pd1 = pd1_space(f, opt);
    CHECK(pd1.dim == 2);
    CHECK(pd1.audit_ok);
}

TEST_CASE("mapping-cone dimensions agree with the relation-based computation") {
    HyperOptions opt;
    opt.window = 3;
    {
        auto f = point_in_plane("dz[1,2]: x");
        CHECK(cone_dim(f, 1, opt) == 1);
        CHECK(cone_dim(f, 2, opt) == 0);
    }
    {
        auto f = point_in_plane("0");
        CHECK(cone_dim(f, 1, opt) == 2);
        CHECK(cone_dim(f, 2, opt) == 1);
    }
    {
        auto f = line_in_p2();
        CHECK(cone_dim(f, 1, opt) == 0);
        CHECK(cone_dim(f, 2, opt) == 2);
    }
    {
        auto f = plane_identity("dz[1,2]: x");
        CHECK(cone_dim(f, 1, opt) == 0);
    }
}

TEST_CASE("PD of a family: theta columns enter the relations") {
    auto f = point_in_plane("dz[1,2]: x");
    HyperOptions opt;
    opt.window = 3;
    // no directions: same as PD
    CHECK(pd_family_space(f, {}, opt).dim == 1);

    // one direction gamma = dx^dy: pi(tau) = theta * gamma couples tau_x to theta
    auto ctx = scratch_ctx(f.source.charts[0].ctx);
    Multivector g(ctx, 2, 2);
    g.add_term({0, 1}, LaurentPoly(ctx, 1));
    FamilyDirection d;
    d.rho = Cochain{CechSlot{SlotKind::PullbackY, 1, 1}, {}};
    d.gamma = Cochain{CechSlot{SlotKind::PullbackY, 0, 2}, {}};
    d.gamma.add({0}, g);
    auto fam = pd_family_space(f, {d}, opt);
    CHECK(fam.dim == 2);
    bool theta_used = false;
    for (const auto& rep : fam.basis)
        for (const auto& th : rep.thetas)
            if (th != 0) theta_used = true;
    CHECK(theta_used);
}

TEST_CASE("family directions must be cocycles") {
    auto f = line_in_p2();
    HyperOptions opt;
    opt.window = 2;
    // rho_{01} = dy: pi(rho) = -dx^dy != 0, so (rho, 0) is not a cocycle
    auto ctx01 = scratch_ctx(f.source.charts[0].ctx);
    Multivector dy(ctx01, 2, 1);
    dy.add_term({1}, LaurentPoly(ctx01, 1));
    FamilyDirection d;
    d.rho = Cochain{CechSlot{SlotKind::PullbackY, 1, 1}, {}};
    d.rho.add({0, 1}, dy);
    d.gamma = Cochain{CechSlot{SlotKind::PullbackY, 0, 2}, {}};
    CHECK_THROWS_AS((void)pd_family_space(f, {d}, opt), Error);
}
