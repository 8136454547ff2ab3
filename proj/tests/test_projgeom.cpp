#include "doctest.h"

#include <algorithm>
#include <random>
#include <set>

#include "hermit/projgeom.hpp"

using namespace hermit;
using namespace hermit::projgeom;

namespace {

PointSet all_points(const Space& s)
{
    PointSet out(s.num_points());
    for (int i = 0; i < s.num_points(); ++i) out[i] = i;
    return out;
}

// Nucleus oracle: intersect the tangent hyperplanes of every quadric point.
PointSet tangent_intersection(const Space& s, const QuadricForm& q, const PointSet& pts)
{
    PointSet common = all_points(s);
    for (PointId v : pts) common = intersection(common, tangent_hyperplane(s, q, v));
    return common;
}

// Desarguesian spread of PG(3,q): GF(q^2)-points of PG(1,q^2) written over GF(q).
std::vector<PointSet> desarguesian_spread(const Space& pg3)
{
    const Field& fq = pg3.field();
    auto big = galois::make_field(2 * fq.degree());
    const Field& fqq = *big;
    // Root of the GF(q) modulus inside GF(q^2) embeds GF(q).
    Elem root = 0;
    bool found = false;
    for (Elem r = 0; r < fqq.size() && !found; ++r) {
        Elem acc = 0;
        for (int i = 0; i <= fq.degree(); ++i)
            if ((fq.modulus() >> i) & 1U) acc ^= fqq.pow(r, i);
        if (acc == 0) {
            root = r;
            found = true;
        }
    }
    REQUIRE(found);
    std::vector<Elem> embed(fq.size());
    for (Elem a = 0; a < fq.size(); ++a) {
        Elem v = 0;
        for (int i = 0; i < fq.degree(); ++i)
            if ((a >> i) & 1U) v ^= fqq.pow(root, i);
        embed[a] = v;
    }
    Elem w = 0;
    for (Elem c = 1; c < fqq.size() && !w; ++c)
        if (std::find(embed.begin(), embed.end(), c) == embed.end()) w = c;
    // split[z] = (a, b) with z = a + b w
    std::vector<std::pair<Elem, Elem>> split(fqq.size());
    for (Elem a = 0; a < fq.size(); ++a)
        for (Elem b = 0; b < fq.size(); ++b) split[embed[a] ^ fqq.mul(embed[b], w)] = {a, b};
    std::set<PointSet> lines;
    for (Elem u = 0; u < fqq.size(); ++u)
        for (Elem v = 0; v < fqq.size(); ++v) {
            if (!u && !v) continue;
            PointSet l;
            for (Elem lam = 1; lam < fqq.size(); ++lam) {
                const auto [a, b] = split[fqq.mul(lam, u)];
                const auto [c, d] = split[fqq.mul(lam, v)];
                const Elem x[4] = {a, b, c, d};
                l.push_back(pg3.id_of(x));
            }
            std::sort(l.begin(), l.end());
            l.erase(std::unique(l.begin(), l.end()), l.end());
            lines.insert(l);
        }
    return {lines.begin(), lines.end()};
}

}  // namespace

TEST_CASE("point and line counts")
{
    auto f2 = galois::make_field(1);
    auto f4 = galois::make_field(2);
    Space pg24(f4, 2);
    CHECK(pg24.num_points() == 21);
    CHECK(pg24.num_lines() == 21);
    Space pg34(f4, 3);
    CHECK(pg34.num_points() == 85);
    CHECK(pg34.num_lines() == 357);
    CHECK(gaussian_binomial(4, 2, 4) == 357);
    Space pg42(f2, 4);
    CHECK(pg42.num_points() == 31);
    CHECK(pg42.num_lines() == gaussian_binomial(5, 2, 2));
    Space pg32(f2, 3);
    CHECK(pg32.num_lines() == 35);
    for (const auto& l : pg34.lines()) CHECK(l.size() == 5);
}

TEST_CASE("enumeration is lexicographic and ids round-trip")
{
    Space s(galois::make_field(2), 3);
    for (PointId p = 0; p < s.num_points(); ++p) {
        CHECK(s.id_of(s.coords(p)) == p);
        const auto c = s.vec(p);
        const auto lead = std::find_if(c.begin(), c.end(), [](Elem x) { return x != 0; });
        CHECK(*lead == 1);
        if (p > 0) CHECK(std::lexicographical_compare(s.vec(p - 1).begin(), s.vec(p - 1).end(), c.begin(), c.end()));
        // scaled vectors map to the same id
        auto v = c;
        for (Elem& x : v) x = s.field().mul(x, 3);
        CHECK(s.id_of(v) == p);
    }
    const Elem zero[4] = {0, 0, 0, 0};
    CHECK_THROWS_AS(s.id_of(zero), std::invalid_argument);
    const auto& lines = s.lines();
    CHECK(std::is_sorted(lines.begin(), lines.end()));
    for (int i = 0; i < static_cast<int>(lines.size()); ++i) {
        CHECK(s.line_id(lines[i]) == i);
        CHECK(s.line_id(lines[i][1], lines[i][3]) == i);
    }
    CHECK(s.line_id(PointSet{0, 1, 2, 3, 4}) == 0);
    CHECK(s.line_id(PointSet{0, 1, 2, 3, 5}) == -1);
}

TEST_CASE("parabolic quadric Q(4,q)")
{
    for (int e : {1, 2}) {
        auto f = galois::make_field(e);
        Space pg4(f, 4);
        const int q = pg4.q();
        const auto p = parabolic_quadric(pg4);
        CHECK(static_cast<int>(p.points.size()) == (q * q + 1) * (q + 1));
        CHECK(static_cast<int>(p.lines.size()) == (q * q + 1) * (q + 1));
        std::vector<int> deg(pg4.num_points(), 0);
        for (const auto& l : p.lines)
            for (PointId x : l) ++deg[x];
        for (PointId x : p.points) CHECK(deg[x] == q + 1);
        const Elem n0[5] = {1, 0, 0, 0, 0};
        const PointId n = pg4.id_of(n0);
        CHECK(!std::binary_search(p.points.begin(), p.points.end(), n));
        CHECK(nucleus(pg4, p.form) == n);
        CHECK(tangent_intersection(pg4, p.form, p.points) == PointSet{n});
    }
}

TEST_CASE("nucleus is equivariant under a projectivity")
{
    auto f = galois::make_field(2);
    const Field& fld = *f;
    Space pg4(f, 4);
    const auto p = parabolic_quadric(pg4);
    std::mt19937 rng(7);
    linalg::Matrix g(5, 5);
    do {
        for (Elem& x : g.data) x = rng() % 4;
    } while (linalg::rank(fld, {g.row(0), g.row(1), g.row(2), g.row(3), g.row(4)}, 5) < 5);
    // image quadric Q'(x) = Q(g^{-1} x) has nucleus g N
    const auto ginv = linalg::inverse(fld, g);
    const auto moved = substitute(fld, p.form, ginv);
    const Elem n0[5] = {1, 0, 0, 0, 0};
    const auto gn = linalg::multiply(fld, g, n0);
    CHECK(nucleus(pg4, moved) == pg4.id_of(gn));
    QuadricForm degenerate(4);
    degenerate.coeff(1, 2) = 1;
    CHECK_THROWS_AS(nucleus(pg4, degenerate), std::invalid_argument);
}

TEST_CASE("projection from the nucleus and tangent cones")
{
    for (int e : {1, 2}) {
        auto f = galois::make_field(e);
        const Field& fld = *f;
        Space pg4(f, 4);
        const int q = pg4.q();
        const auto p = parabolic_quadric(pg4);
        const PointId n = nucleus(pg4, p.form);
        PointSet x0zero;
        for (PointId v = 0; v < pg4.num_points(); ++v)
            if (pg4.coords(v)[0] == 0) x0zero.push_back(v);
        Hyperplane sigma(pg4, x0zero);
        CHECK(sigma.points() == x0zero);
        const auto mu = mu_projection(pg4, p.points, n, sigma);
        std::set<PointId> image;
        for (PointId v : p.points) {
            image.insert(mu(v));
            if (sigma.contains(v)) CHECK(mu(v) == v);
        }
        CHECK(image.size() == sigma.points().size());
        const auto h = substitute(fld, p.form, sigma.basis_matrix());
        const PointSet hpts = zero_set(sigma.local(), h);
        CHECK(static_cast<int>(hpts.size()) == (q + 1) * (q + 1));
        CHECK(hpts == sigma.to_local(intersection(p.points, sigma.points())));
        Polarity alpha(sigma.local(), h);
        int checked = 0;
        for (PointId v : p.points) {
            if (sigma.contains(v)) continue;
            const auto c = cone_image(pg4, p.form, p.points, mu, sigma, alpha, hpts, v);
            CHECK_MESSAGE(c.ok, c.failure);
            CHECK(static_cast<int>(c.plane.size()) == q * q + q + 1);
            CHECK(static_cast<int>(c.conic.size()) == q + 1);
            ++checked;
        }
        CHECK(checked == q * q * q - q);
    }
}

TEST_CASE("polarity is involutory and incidence-reversing")
{
    auto f = galois::make_field(2);
    Space pg3(f, 3);
    QuadricForm h(3);
    h.coeff(0, 1) = 1;
    h.coeff(2, 3) = 1;
    Polarity alpha(pg3, h);
    for (PointId p = 0; p < pg3.num_points(); ++p) {
        CHECK(alpha.hyperplane_to_point(alpha.point_to_hyperplane(p)) == p);
        const auto plane = alpha.polar_of_point(p);
        CHECK(plane.size() == 21);
        for (PointId r = 0; r < pg3.num_points(); ++r) {
            const auto other = alpha.polar_of_point(r);
            CHECK(std::binary_search(plane.begin(), plane.end(), r) == std::binary_search(other.begin(), other.end(), p));
        }
    }
    // points of the hyperbolic quadric go to their tangent planes
    for (PointId p : zero_set(pg3, h)) CHECK(alpha.polar_of_point(p) == tangent_hyperplane(pg3, h, p));
    QuadricForm degenerate(3);
    degenerate.coeff(0, 1) = 1;
    CHECK_THROWS_AS(Polarity(pg3, degenerate), std::domain_error);
}

TEST_CASE("regulus through three skew lines")
{
    auto f = galois::make_field(2);
    Space pg3(f, 3);
    const auto& lines = pg3.lines();
    std::mt19937 rng(3);
    int done = 0;
    while (done < 20) {
        const auto& a = lines[rng() % lines.size()];
        const auto& b = lines[rng() % lines.size()];
        const auto& c = lines[rng() % lines.size()];
        if (meets(a, b) || meets(a, c) || meets(b, c)) continue;
        const Regulus r = regulus_through(pg3, a, b, c);
        REQUIRE(r.lines.size() == 5);
        REQUIRE(r.opposite.size() == 5);
        for (const auto& x : {a, b, c}) CHECK(std::binary_search(r.lines.begin(), r.lines.end(), x));
        // brute-force oracle: transversals are exactly the lines meeting a, b, c
        std::vector<PointSet> trans;
        for (const auto& l : lines)
            if (meets(l, a) && meets(l, b) && meets(l, c)) trans.push_back(l);
        CHECK(trans == r.opposite);
        for (const auto& l : r.lines)
            for (const auto& t : r.opposite) CHECK(intersection(l, t).size() == 1);
        const auto pts = r.points();
        CHECK(pts.size() == 25);
        PointSet opp_pts = opposite(r).points();
        CHECK(opp_pts == pts);
        const Regulus back = opposite(opposite(r));
        CHECK(back.lines == r.lines);
        const auto fit = fit_quadric(pg3, pts);
        REQUIRE(fit.has_value());
        CHECK(zero_set(pg3, fit->form) == pts);
        const Polarity nondegenerate(pg3, fit->form);
        ++done;
    }
    CHECK_THROWS_AS(regulus_through(pg3, lines[0], lines[0], lines[1]), std::invalid_argument);
}

TEST_CASE("fit_quadric matches an exhaustive search over all forms of PG(3,4)")
{
    auto f = galois::make_field(2);
    const Field& fld = *f;
    Space pg3(f, 3);
    const PointSet line = pg3.lines()[100];
    // four points in general position
    const Elem e[4][4] = {{1, 0, 0, 0}, {0, 1, 0, 0}, {0, 0, 1, 0}, {1, 1, 1, 1}};
    PointSet frame;
    for (const auto& v : e) frame.push_back(pg3.id_of(v));
    std::sort(frame.begin(), frame.end());

    bool line_found = false;
    bool frame_found = false;
    QuadricForm form(3);
    std::vector<char> zero(pg3.num_points());
    for (std::uint32_t code = 1; code < (1U << 20); ++code) {
        for (int k = 0; k < 10; ++k) form.coeffs[k] = (code >> (2 * k)) & 3U;
        int count = 0;
        for (PointId p = 0; p < pg3.num_points(); ++p) {
            zero[p] = form.eval(fld, pg3.coords(p)) == 0;
            count += zero[p];
        }
        if (count == 5 && !line_found) {
            line_found = std::all_of(line.begin(), line.end(), [&](PointId p) { return zero[p]; });
        }
        if (count == 4 && !frame_found) {
            frame_found = std::all_of(frame.begin(), frame.end(), [&](PointId p) { return zero[p]; });
        }
    }
    CHECK(line_found);
    CHECK_FALSE(frame_found);
    const auto fl = fit_quadric(pg3, line);
    REQUIRE(fl.has_value());
    CHECK(zero_set(pg3, fl->form) == line);
    CHECK_FALSE(fit_quadric(pg3, frame).has_value());
}

TEST_CASE("spreads and regularity")
{
    for (int e : {1, 2}) {
        auto f = galois::make_field(e);
        Space pg3(f, 3);
        const int q = pg3.q();
        auto spread = desarguesian_spread(pg3);
        REQUIRE(static_cast<int>(spread.size()) == q * q + 1);
        CHECK(is_spread(pg3, spread));
        const auto reg = is_regular_spread(pg3, spread);
        CHECK(reg.ok);
        const int n = q * q + 1;
        CHECK(reg.triples_checked == n * (n - 1) * (n - 2) / 6);
        // swap one member for a line meeting it
        auto broken = spread;
        for (const auto& l : pg3.lines())
            if (l != spread[0] && meets(l, spread[0])) {
                broken[0] = l;
                break;
            }
        CHECK_FALSE(is_spread(pg3, broken));
    }
}

TEST_CASE("tube rejects intersecting lines; random line sets are not tubes")
{
    auto f = galois::make_field(2);
    Space pg3(f, 3);
    const auto& lines = pg3.lines();
    const PointSet l = lines[0];
    std::vector<PointSet> bad;
    for (const auto& m : lines)
        if (meets(m, l) && m != l) {
            bad.push_back(m);
            break;
        }
    const auto t = is_tube(pg3, l, bad);
    CHECK_FALSE(t.ok);
    std::mt19937 rng(11);
    int tubes = 0;
    int trials = 0;
    while (trials < 200) {
        std::vector<PointSet> pick;
        while (pick.size() < 6) {
            const auto& m = lines[rng() % lines.size()];
            bool ok = !meets(m, l);
            for (const auto& x : pick) ok = ok && !meets(x, m);
            if (ok) pick.push_back(m);
        }
        tubes += is_tube(pg3, l, pick).ok;
        ++trials;
    }
    CHECK(tubes == 0);
}

TEST_CASE("planes through a line and arcs")
{
    auto f = galois::make_field(2);
    Space pg3(f, 3);
    const auto planes = planes_through_line(pg3, pg3.lines()[5]);
    CHECK(planes.size() == 5);
    for (const auto& p : planes) CHECK(p.size() == 21);
    Space pg2(f, 2);
    // conic x0 x1 = x2^2 has nucleus (0,0,1)
    QuadricForm c(2);
    c.coeff(0, 1) = 1;
    c.coeff(2, 2) = 1;
    const auto conic = zero_set(pg2, c);
    CHECK(conic.size() == 5);
    CHECK(is_arc(pg2, conic));
    const Elem nz[3] = {0, 0, 1};
    const auto nuc = conic_nucleus(pg2, all_points(pg2), conic);
    REQUIRE(nuc.has_value());
    CHECK(*nuc == pg2.id_of(nz));
    PointSet hyperoval = conic;
    hyperoval.push_back(*nuc);
    std::sort(hyperoval.begin(), hyperoval.end());
    CHECK(is_arc(pg2, hyperoval));
}

TEST_CASE("pencil members")
{
    auto f = galois::make_field(2);
    Space pg3(f, 3);
    QuadricForm a(3);
    a.coeff(0, 1) = 1;
    a.coeff(2, 3) = 1;
    QuadricForm b(3);
    b.coeff(0, 0) = 1;
    b.coeff(1, 1) = 1;
    const auto members = pencil_members(pg3, a, b);
    CHECK(members.size() == 5);
    const auto base = intersection(zero_set(pg3, a), zero_set(pg3, b));
    for (const auto& m : members) CHECK(is_subset(base, m.points));
    CHECK_THROWS_AS(pencil_members(pg3, a, a), std::invalid_argument);
}

TEST_CASE("hyperplane coordinates")
{
    auto f = galois::make_field(2);
    Space pg4(f, 4);
    std::mt19937 rng(5);
    for (int trial = 0; trial < 5; ++trial) {
        Elem h[5];
        do {
            for (Elem& x : h) x = rng() % 4;
        } while (std::all_of(h, h + 5, [](Elem x) { return x == 0; }));
        const PointSet pts = pg4.hyperplane(h);
        Hyperplane sigma(pg4, pts);
        CHECK(sigma.points() == pts);
        CHECK(sigma.local().num_points() == 85);
        for (PointId l = 0; l < 85; ++l) CHECK(sigma.to_local(sigma.to_global(l)) == l);
        // local lines are global lines
        for (int i = 0; i < 357; i += 17) CHECK(pg4.line_id(sigma.to_global(sigma.local().lines()[i])) >= 0);
    }
}
