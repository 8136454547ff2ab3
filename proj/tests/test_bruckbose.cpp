#include "doctest.h"

#include <algorithm>
#include <set>

#include "hermit/bruckbose.hpp"

using namespace hermit;
using namespace hermit::bruckbose;

namespace {

struct Pipeline {
    unital::HermitianUnital h;
    unital::Workspace w;
    bridge::Frame f;
    bridge::SpreadWitness s;
    BBPlane bb;
    PlaneIdentification id;
    BuekenhoutUnital bu;
    PhiPrime pp;

    explicit Pipeline(int e) : h(unital::hermitian_unital(e)), w(h.unital)
    {
        f = bridge::build_frame(w, 0);
        s = bridge::build_spread(f, w);
        bb = bruck_bose_plane(f, s);
        id = identify_with_pg2(bb);
        bu = buekenhout_unital(f, bb);
        pp = build_phi_prime(f, bb, bu);
    }
};

Pipeline& pipeline4()
{
    static Pipeline p(2);
    return p;
}

}  // namespace

TEST_CASE("Bruck-Bose plane")
{
    auto& p = pipeline4();
    const auto& bb = p.bb;
    CHECK(bb.order == 16);
    CHECK(bb.inc.v() == 273);
    CHECK(bb.inc.b() == 273);
    CHECK(bb.affine_point.size() == 256);
    for (const auto& l : bb.inc.blocks()) CHECK(l.size() == 17);
    // oracle: every pair of points on exactly one line
    std::int64_t pairs = 0;
    for (int a = 0; a < bb.inc.v(); ++a)
        for (int b = a + 1; b < bb.inc.v(); ++b) pairs += bb.inc.pair_multiplicity(a, b) == 1;
    CHECK(pairs == 273 * 272 / 2);
    const auto& inf = bb.inc.block(bb.line_at_infinity);
    CHECK(inf.front() == 256);
    CHECK(inf.back() == 272);
    // each affine line is an affine plane of PG(4,4) through its spread line
    const auto& pg4 = p.f.pg4();
    for (LineId l = 0; l < bb.inc.b(); ++l) {
        if (l == bb.line_at_infinity) continue;
        std::vector<projgeom::PointId> pts;
        for (int x : bb.inc.block(l))
            if (x < bb.infinity_base) pts.push_back(bb.affine_point[x]);
        CHECK(pg4.rank_of(pts) == 3);
    }
}

TEST_CASE("identification with PG(2,16)")
{
    auto& p = pipeline4();
    REQUIRE(p.id.map.has_value());
    design::IsoMap map = *p.id.map;
    CHECK(design::verify_isomorphism(p.bb.inc, p.id.pg2_inc, map));
    CHECK(p.id.pg2->num_points() == 273);
    // the line at infinity goes to a line
    CHECK(map.blocks[p.bb.line_at_infinity] >= 0);
}

TEST_CASE("Buekenhout unital")
{
    auto& p = pipeline4();
    const auto& u = p.bu.unital;
    CHECK(u.v() == 65);
    CHECK(u.b() == 208);
    CHECK(u.design_check().ok);
    CHECK(p.bu.a.size() == 5);
    int affine = 0;
    for (int x : p.bu.bb_point) affine += x < p.bb.infinity_base;
    CHECK(affine == 60);
    CHECK(p.bu.generators_ok);
}

TEST_CASE("phi prime")
{
    auto& p = pipeline4();
    const auto& pp = p.pp;
    CHECK(pp.ok());
    CHECK(pp.failing == -1);
    std::set<int> blocks(pp.line.begin(), pp.line.end());
    CHECK(blocks.size() == 208);
    CHECK_FALSE(blocks.count(-1));
    // points of L go to the points at infinity
    for (int i = 0; i < 5; ++i) CHECK(pp.point[p.f.aij.points[i]] == p.bu.a[i]);
}

TEST_CASE("embedding in PG(2,16)")
{
    auto& p = pipeline4();
    const auto emb = embed_in_pg2(p.h.unital, p.bu, p.pp, p.id);
    CHECK(emb.ok());
    CHECK(std::set<projgeom::PointId>(emb.point.begin(), emb.point.end()).size() == 65);
}

TEST_CASE("order 2")
{
    Pipeline p(1);
    CHECK(p.bb.inc.v() == 21);
    CHECK(p.id.map.has_value());
    CHECK(p.bu.unital.v() == 9);
    CHECK(p.pp.ok());
}
