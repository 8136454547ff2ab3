#include "doctest.h"

#include <algorithm>
#include <map>
#include <set>

#include "hermit/bridge.hpp"

using namespace hermit;
using namespace hermit::bridge;
using projgeom::Space;

namespace {

struct Fixture {
    unital::HermitianUnital h;
    unital::Workspace w;
    SigmaCheck sc;
    Frame f;
    SpreadWitness s;
    LineId m = -1;
    LineId n = -1;

    explicit Fixture(int e) : h(unital::hermitian_unital(e)), w(h.unital)
    {
        f = build_frame(w, 0, &sc);
        s = build_spread(f, w);
        m = w.spread(0).s_star.front();
        n = unital::polar_triple(w, 0, m);
    }
};

Fixture& fixture4()
{
    static Fixture fx(2);
    return fx;
}

// Three pairwise collinear points must share a line.
bool no_triangles(const Incidence& inc)
{
    const int v = inc.v();
    std::vector<std::vector<char>> col(v, std::vector<char>(v, 0));
    for (const auto& b : inc.blocks())
        for (int x : b)
            for (int y : b) col[x][y] = x != y;
    for (int a = 0; a < v; ++a)
        for (int b = a + 1; b < v; ++b) {
            if (!col[a][b]) continue;
            const int l = inc.block_of_pair(a, b);
            for (int c = b + 1; c < v; ++c)
                if (col[a][c] && col[b][c] && !inc.contains(l, c)) return false;
        }
    return true;
}

// No three collinear points, by ranks.
bool arc_by_rank(const Space& s, const PointSet& pts)
{
    for (std::size_t a = 0; a < pts.size(); ++a)
        for (std::size_t b = a + 1; b < pts.size(); ++b)
            for (std::size_t c = b + 1; c < pts.size(); ++c) {
                const std::vector<projgeom::PointId> t{pts[a], pts[b], pts[c]};
                if (s.rank_of(t) < 3) return false;
            }
    return true;
}

}  // namespace

TEST_CASE("GQ axioms")
{
    auto& fx = fixture4();
    const auto& gq = fx.f.gq;
    CHECK(gq.inc.v() == 85);
    CHECK(gq.inc.b() == 85);
    for (int p = 0; p < gq.inc.v(); ++p) CHECK(gq.inc.degree(p) == 5);
    for (const auto& b : gq.inc.blocks()) CHECK(b.size() == 5);
    const auto chk = check_gq_axioms(gq.inc, 4, 4);
    CHECK(chk.ok);
    CHECK(chk.antiflags == 85 * 80);
    CHECK(no_triangles(gq.inc));
    // a cell lies on A_i, B_j and the lines of the cell
    CHECK(gq.inc.contains(gq.line_a(2), gq.cell(2, 3)));
    CHECK(gq.inc.contains(gq.line_b(3), gq.cell(2, 3)));
    CHECK_FALSE(gq.inc.contains(gq.line_a(1), gq.cell(2, 3)));

    // removing a line breaks the counts
    auto blocks = gq.inc.blocks();
    blocks.pop_back();
    CHECK_FALSE(check_gq_axioms(Incidence(85, blocks), 4, 4).ok);
}

TEST_CASE("quadric GQ")
{
    const auto q4 = quadric_gq(2);
    CHECK(q4.inc.v() == 85);
    CHECK(q4.inc.b() == 85);
    CHECK(check_gq_axioms(q4.inc, 4, 4).ok);
    const auto q2 = quadric_gq(1);
    CHECK(q2.inc.v() == 15);
    CHECK(check_gq_axioms(q2.inc, 2, 2).ok);
}

TEST_CASE("hyperbolic completion")
{
    // W(q) completes to PG(3,q): (q^2+1)(q^2+q+1) lines of q+1 points
    for (int e : {1, 2}) {
        const int q = 1 << e;
        const auto q4 = quadric_gq(e);
        const auto lin = hyperbolic_completion(q4.inc);
        CHECK(lin.v() == (q + 1) * (q * q + 1));
        CHECK(lin.b() == (q * q + 1) * (q * q + q + 1));
        CHECK(design::is_t_design(lin, 2, q + 1, 1));
        for (int l = 0; l < q4.inc.b(); ++l) CHECK(lin.block(l) == q4.inc.block(l));
    }
    auto& fx = fixture4();
    const auto lin = hyperbolic_completion(fx.f.gq.inc);
    CHECK(lin.b() == 357);
}

TEST_CASE("phi is an isomorphism onto the quadric")
{
    auto& fx = fixture4();
    const auto& f = fx.f;
    design::IsoMap map = f.phi.map;
    CHECK(design::verify_isomorphism(f.gq.inc, f.q4.inc, map));
    for (int l = 0; l < f.gq.inc.b(); ++l) {
        PointSet img;
        for (int p : f.gq.inc.block(l)) img.push_back(f.phi.point[p]);
        std::sort(img.begin(), img.end());
        CHECK(std::binary_search(f.q4.quadric.lines.begin(), f.q4.quadric.lines.end(), img));
    }

    Fixture small(1);
    CHECK(small.f.gq.inc.v() == 15);
    CHECK(small.f.phi.point.size() == 15);
}

TEST_CASE("Sigma and the hyperbolic section")
{
    auto& fx = fixture4();
    const auto& f = fx.f;
    CHECK(fx.sc.ok());
    CHECK(fx.sc.section_points == 25);
    CHECK(f.h_points.size() == 25);
    CHECK(f.r0.size() == 5);
    CHECK(f.r0_opposite.size() == 5);
    for (const auto& a : f.r0)
        for (const auto& b : f.r0_opposite) CHECK(projgeom::intersection(a, b).size() == 1);
    CHECK(f.local().num_points() == 85);
    CHECK_FALSE(f.sigma->contains(f.nucleus));
    const auto cones = verify_cones(f);
    CHECK(cones.ok);
    CHECK(cones.points == 60);
}

TEST_CASE("the spread of Sigma")
{
    auto& fx = fixture4();
    const auto& s = fx.s;
    const Space& loc = fx.f.local();
    CHECK(s.lines.size() == 17);
    CHECK(s.misses_section);
    CHECK(s.is_spread);
    std::vector<int> cover(loc.num_points(), 0);
    for (const auto& l : s.lines) {
        CHECK(l.size() == 5);
        CHECK(loc.rank_of(l) == 2);
        for (auto p : l) ++cover[p];
    }
    CHECK(std::all_of(cover.begin(), cover.end(), [](int c) { return c == 1; }));
    CHECK(s.index_of_unital(fx.m) >= 5);
    CHECK(s.index_of_unital(0) == -1);
}

TEST_CASE("tube and regularity")
{
    auto& fx = fixture4();
    const auto t = verify_tube_and_regularity(fx.f, fx.w, fx.s, fx.m, fx.n);
    CHECK(t.ok());
    CHECK(t.tube.planes.size() == 5);
    for (const auto& h : t.tube.hyperovals) {
        CHECK(h.size() == 6);
        CHECK(arc_by_rank(fx.f.local(), h));
    }
    CHECK(t.regular.triples_checked == 680);
    CHECK(t.knarr_matches);
    CHECK(t.opposite_reguli);
    CHECK_THROWS_AS(verify_tube_and_regularity(fx.f, fx.w, fx.s, 0, fx.n), std::invalid_argument);
}

TEST_CASE("reguli of the spread")
{
    auto& fx = fixture4();
    const auto rc = classify_reguli(fx.f, fx.w, fx.s);
    CHECK(rc.ok());
    CHECK(rc.reguli.size() == 68);
    CHECK(rc.reguli.size() * 10 == 680);
    CHECK(rc.counts[static_cast<int>(RegulusType::base)] == 1);
    CHECK(rc.counts[static_cast<int>(RegulusType::disjoint)] == 12);
    CHECK(rc.counts[static_cast<int>(RegulusType::tangent)] == 15);
    CHECK(rc.counts[static_cast<int>(RegulusType::secant)] == 40);
    CHECK(rc.i1_design);
    CHECK(rc.i2_design);
    CHECK(rc.c0_equals_star);
    CHECK(rc.partners_pair);
    CHECK(rc.c0_star.size() == 12);

    // independent labels from the R_0 meet count
    std::map<int, int> by_meet;
    for (const auto& r : rc.reguli) {
        int k = 0;
        for (int m : r.members) k += m < 5;
        ++by_meet[k];
        if (r.type == RegulusType::disjoint) CHECK(r.j_lines.size() == 10);
    }
    CHECK(by_meet[0] == 12);
    CHECK(by_meet[1] == 15);
    CHECK(by_meet[2] == 40);
    CHECK(by_meet[5] == 1);

    const auto full = classify_reguli(fx.f, fx.w, fx.s, true);
    CHECK(full.ok());
    int pts = 0;
    for (const auto& r : full.reguli) pts += r.flock_points;
    CHECK(pts == 40 * 3 * 5);
}

TEST_CASE("flock criterion batch")
{
    auto& fx = fixture4();
    const auto b = verify_flock_batch(fx.f, fx.w);
    CHECK(b.ok);
    CHECK(b.upper_count_ok);
    // oracle: meeting pairs in distinct rows and columns
    const auto& aij = fx.f.aij;
    const auto& u = fx.h.unital;
    std::vector<std::pair<int, int>> rc(u.b(), {-1, -1});
    for (int i = 0; i < 5; ++i)
        for (int j = 0; j < 5; ++j)
            for (LineId k : aij.cells[i][j]) rc[k] = {i, j};
    std::int64_t pairs = 0;
    for (LineId a = 0; a < u.b(); ++a)
        for (LineId c = a + 1; c < u.b(); ++c)
            if (rc[a].first >= 0 && rc[c].first >= 0 && rc[a].first != rc[c].first && rc[a].second != rc[c].second &&
                u.incidence().meet(a, c) == 1)
                ++pairs;
    CHECK(b.pairs == pairs);
    CHECK(b.pairs == 600);
    CHECK(b.instances == b.pairs * 11);
    CHECK(b.positives == b.pairs * 2);

    const LineId k1 = aij.cells[0][0].front();
    const LineId same_row = aij.cells[0][1].front();
    CHECK_THROWS_AS(verify_flock_instance(fx.f, fx.w, {k1, same_row, fx.m}), std::invalid_argument);
    const LineId same_col = aij.cells[1][0].front();
    CHECK_THROWS_AS(verify_flock_instance(fx.f, fx.w, {k1, same_col, fx.m}), std::invalid_argument);
}

TEST_CASE("pencil of quadrics")
{
    auto& fx = fixture4();
    const auto trp = unital::triply_ruled_partition(fx.w, 0, fx.m, fx.n);
    const auto p = verify_pencil(fx.f, fx.s, trp);
    CHECK(p.ok());
    REQUIRE(p.members.size() == 5);
    int ruled = 0, lines = 0;
    for (const auto& m : p.members) {
        if (m.role == "line") {
            ++lines;
            CHECK(m.points.size() == 5);
        } else {
            ++ruled;
            CHECK(m.points.size() == 25);
        }
        // the form vanishes exactly on the designated points
        const Space& loc = fx.f.local();
        for (projgeom::PointId x = 0; x < loc.num_points(); ++x)
            CHECK((m.form.eval(loc.field(), loc.coords(x)) == 0) == std::binary_search(m.points.begin(), m.points.end(), x));
    }
    CHECK(ruled == 3);
    CHECK(lines == 2);
    std::set<int> idx;
    for (const auto& m : p.members) idx.insert(m.pencil_index);
    CHECK(idx.size() == 5);
}

TEST_CASE("images of lines missing L are coplanar")
{
    auto& fx = fixture4();
    const auto c = verify_j_coplanar(fx.f, fx.w, fx.s);
    CHECK(c.ok);
    CHECK(c.lines == 208 - 1 - 5 * 15 - 12);
    CHECK(c.predicted == c.lines);
    CHECK(c.star_lines == 12);
}
