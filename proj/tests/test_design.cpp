#include "doctest.h"

#include <algorithm>
#include <numeric>
#include <random>
#include <set>

#include "hermit/design.hpp"
#include "hermit/projgeom.hpp"

using namespace hermit;
using design::Block;
using design::Incidence;

namespace {

Incidence pg2_incidence(int e)
{
    projgeom::Space s(galois::make_field(e), 2);
    return Incidence(s.num_points(), s.lines());
}

Incidence relabel(const Incidence& inc, std::uint32_t seed, std::vector<int>* perm_out = nullptr)
{
    std::vector<int> perm(inc.v());
    std::iota(perm.begin(), perm.end(), 0);
    std::mt19937 rng(seed);
    std::shuffle(perm.begin(), perm.end(), rng);
    std::vector<Block> blocks;
    for (const auto& b : inc.blocks()) {
        Block nb;
        for (auto p : b) nb.push_back(perm[p]);
        blocks.push_back(nb);
    }
    std::shuffle(blocks.begin(), blocks.end(), rng);
    if (perm_out) *perm_out = perm;
    return Incidence(inc.v(), blocks);
}

// Miquelian inversive plane of order 4: plane sections of an elliptic quadric of PG(3,4).
Incidence miquelian_order4()
{
    projgeom::Space s(galois::make_field(2), 3);
    projgeom::QuadricForm e(3);
    e.coeff(0, 1) = 1;
    e.coeff(2, 2) = 1;
    e.coeff(2, 3) = 1;
    e.coeff(3, 3) = 2;  // x^2 + x + 2 is irreducible over GF(4)
    const auto pts = projgeom::zero_set(s, e);
    REQUIRE(pts.size() == 17);
    std::set<Block> circles;
    for (projgeom::PointId d = 0; d < s.num_points(); ++d) {
        const auto plane = s.hyperplane(s.coords(d));
        const auto sec = projgeom::intersection(plane, pts);
        if (sec.size() < 2) continue;
        Block b;
        for (auto p : sec) b.push_back(static_cast<int>(std::lower_bound(pts.begin(), pts.end(), p) - pts.begin()));
        circles.insert(b);
    }
    return Incidence(17, {circles.begin(), circles.end()});
}

// Exchange a point of block i with a point of block j (each outside the other block).
void swap_points(std::vector<Block>& blocks, int i, int j)
{
    auto pi = std::find_if(blocks[i].begin(), blocks[i].end(), [&](int p) {
        return std::find(blocks[j].begin(), blocks[j].end(), p) == blocks[j].end();
    });
    auto pj = std::find_if(blocks[j].begin(), blocks[j].end(), [&](int p) {
        return std::find(blocks[i].begin(), blocks[i].end(), p) == blocks[i].end();
    });
    std::swap(*pi, *pj);
}

}  // namespace

TEST_CASE("incidence indexes")
{
    const auto pg = pg2_incidence(2);
    CHECK(pg.v() == 21);
    CHECK(pg.b() == 21);
    CHECK(pg.is_linear());
    for (int a = 0; a < 21; ++a) {
        CHECK(pg.degree(a) == 5);
        for (int b = 0; b < 21; ++b) {
            if (a == b) continue;
            const auto blk = pg.block_of_pair(a, b);
            REQUIRE(blk >= 0);
            CHECK(pg.contains(blk, a));
            CHECK(pg.contains(blk, b));
            CHECK(pg.pair_multiplicity(a, b) == 1);
        }
    }
    for (int i = 0; i < 21; ++i) {
        CHECK(pg.find_block(pg.block(i)) == i);
        for (int j = 0; j < 21; ++j) CHECK(pg.meet(i, j) == (i == j ? 5 : 1));
    }
    CHECK_THROWS_AS(Incidence(3, {{0, 3}}), std::invalid_argument);
    CHECK_THROWS_AS(Incidence(3, {{0, 0}}), std::invalid_argument);
    const Incidence twice(3, {{0, 1}, {1, 0}});
    CHECK_FALSE(twice.is_linear());
    CHECK(twice.pair_multiplicity(0, 1) == 2);
    CHECK_THROWS_AS(twice.block_of_pair(0, 1), std::logic_error);
}

TEST_CASE("JSON round trip and validation")
{
    const auto pg = pg2_incidence(1);
    const auto j = design::to_json(pg);
    CHECK(design::incidence_from_json(j) == pg);
    CHECK_THROWS_AS(design::incidence_from_json(nlohmann::json::parse(R"({"v": 3})")), std::invalid_argument);
    CHECK_THROWS_AS(design::incidence_from_json(nlohmann::json::parse(R"({"v": "x", "blocks": []})")),
                    std::invalid_argument);
    CHECK_THROWS_AS(design::incidence_from_json(nlohmann::json::parse(R"({"v": 2, "blocks": [[0, 5]]})")),
                    std::invalid_argument);
    std::vector<int> perm;
    const auto canon = relabel(pg, 1).canonical();
    CHECK(std::is_sorted(canon.blocks().begin(), canon.blocks().end()));
}

TEST_CASE("t-design checks")
{
    const auto pg = pg2_incidence(2);
    CHECK(design::is_t_design(pg, 2, 5, 1));
    CHECK(design::is_t_design(pg, 1, 5, 5));
    CHECK_FALSE(design::is_t_design(pg, 2, 4, 1));
    // swap a point between two lines
    auto blocks = pg.blocks();
    swap_points(blocks, 0, 7);
    const Incidence swapped(21, blocks);
    const auto chk = design::check_t_design(swapped, 2, 5, 1);
    CHECK_FALSE(chk.ok);
    CHECK_FALSE(chk.failure.empty());
    CHECK(design::is_t_design(miquelian_order4(), 3, 5, 1));
}

TEST_CASE("inversive plane of order 4: bundles, flocks, pencils")
{
    const design::InversivePlane ip(miquelian_order4());
    const auto& inc = ip.incidence();
    CHECK(ip.order() == 4);
    CHECK(inc.b() == 68);
    for (int p = 0; p < 17; ++p) CHECK(inc.degree(p) == 20);
    for (int p1 = 0; p1 < 17; ++p1)
        for (int p2 = 0; p2 < 17; ++p2) {
            if (p1 == p2) continue;
            const auto bu = ip.bundle(p1, p2);
            CHECK(bu.circles.size() == 5);
            CHECK(ip.bundle(p2, p1).circles == bu.circles);
            std::vector<int> cover(17, 0);
            for (auto c : bu.circles)
                for (auto x : inc.block(c)) ++cover[x];
            for (int x = 0; x < 17; ++x) CHECK(cover[x] == ((x == p1 || x == p2) ? 5 : 1));
            const auto fl = ip.flock(p1, p2);
            CHECK(fl.circles.size() == 3);
            CHECK(ip.flock(p2, p1).circles == fl.circles);
            if ((p1 * 17 + p2) % 23 == 0) {
                const auto all = ip.flocks_by_search(p1, p2);
                REQUIRE(all.size() == 1);
                CHECK(all[0] == fl.circles);
            }
        }
    for (int p = 0; p < 17; ++p)
        for (auto c : inc.blocks_through(p)) {
            const auto pen = ip.pencil_of_circles(p, c);
            CHECK(pen.circles.size() == 4);
            std::vector<int> cover(17, 0);
            for (auto d : pen.circles)
                for (auto x : inc.block(d))
                    if (x != p) ++cover[x];
            for (int x = 0; x < 17; ++x) CHECK(cover[x] == (x == p ? 0 : 1));
            for (auto d : pen.circles) CHECK(ip.pencil_of_circles(p, d).circles == pen.circles);
        }
    CHECK_THROWS_AS(design::InversivePlane(pg2_incidence(2)), std::invalid_argument);
}

TEST_CASE("isomorphism search")
{
    for (int e : {1, 2, 3}) {
        const auto pg = pg2_incidence(e);
        std::vector<int> perm;
        const auto shuffled = relabel(pg, 42 + e, &perm);
        design::IsoStats stats;
        auto iso = design::find_isomorphism(pg, shuffled, &stats);
        REQUIRE(iso.has_value());
        CHECK(design::verify_isomorphism(pg, shuffled, *iso));
        CHECK(iso->blocks.size() == static_cast<std::size_t>(pg.b()));
        auto self = design::find_isomorphism(pg, pg);
        REQUIRE(self.has_value());
    }
    // a 2-(21,5,1) structure with two points swapped is not a plane
    auto blocks = pg2_incidence(2).blocks();
    swap_points(blocks, 0, 3);
    const Incidence broken(21, blocks);
    design::IsoStats stats;
    CHECK_FALSE(design::find_isomorphism(pg2_incidence(2), broken, &stats).has_value());
    CHECK(stats.exhausted);
    // GQ Q(4,2) against a relabelled copy
    projgeom::Space pg4(galois::make_field(1), 4);
    const auto q4 = projgeom::parabolic_quadric(pg4);
    std::vector<Block> lines;
    for (const auto& l : q4.lines) {
        Block b;
        for (auto p : l) b.push_back(static_cast<int>(std::lower_bound(q4.points.begin(), q4.points.end(), p) - q4.points.begin()));
        lines.push_back(b);
    }
    const Incidence gq(15, lines);
    CHECK(design::find_isomorphism(gq, relabel(gq, 9)).has_value());
    CHECK_FALSE(design::find_isomorphism(gq, pg2_incidence(1)).has_value());
}

TEST_CASE("plane and linear space searches")
{
    for (int e : {1, 2, 4}) {
        const auto pg = pg2_incidence(e);
        const auto shuffled = relabel(pg, 7 + e);
        design::IsoStats stats;
        auto iso = design::find_plane_isomorphism(shuffled, pg, &stats);
        REQUIRE(iso.has_value());
        CHECK(design::verify_isomorphism(shuffled, pg, *iso));
        CHECK(stats.nodes < 100);
    }
    auto blocks = pg2_incidence(2).blocks();
    swap_points(blocks, 0, 3);
    CHECK_THROWS_AS(design::find_plane_isomorphism(Incidence(21, blocks), pg2_incidence(2)), std::invalid_argument);

    // PG(3,2) as a linear space, seeded with a known image
    projgeom::Space pg3(galois::make_field(1), 3);
    const Incidence lin(pg3.num_points(), pg3.lines());
    std::vector<int> perm;
    const auto shuffled = relabel(lin, 5, &perm);
    auto iso = design::find_linear_isomorphism(lin, shuffled, {{0, perm[0]}});
    REQUIRE(iso.has_value());
    CHECK(design::verify_isomorphism(lin, shuffled, *iso));
    CHECK(iso->points[0] == perm[0]);
    const design::PairRelation never = [](int, int, int, int) { return false; };
    CHECK_FALSE(design::find_linear_isomorphism(lin, shuffled, {{0, perm[0]}}, never).has_value());
}
