#include "hermit/bridge.hpp"

#include <algorithm>
#include <map>
#include <random>
#include <set>
#include <stdexcept>

namespace hermit::bridge {

using projgeom::Space;
using unital::Unital;
using unital::Workspace;

namespace {

std::string str(long long v) { return std::to_string(v); }

template <class T>
std::vector<T> sorted(std::vector<T> v)
{
    std::sort(v.begin(), v.end());
    return v;
}

int log2_exact(int n)
{
    int e = 0;
    while ((1 << e) < n) ++e;
    if ((1 << e) != n) throw std::invalid_argument("order " + str(n) + " is not a power of 2");
    return e;
}

}  // namespace

// ---------------------------------------------------------------------------

GQCheck check_gq_axioms(const Incidence& inc, int s, int t)
{
    GQCheck out;
    const long long v = inc.v();
    if (v != static_cast<long long>(s + 1) * (s * t + 1) || inc.b() != static_cast<long long>(t + 1) * (s * t + 1)) {
        out.failure = "wrong numbers of points or lines";
        return out;
    }
    for (int l = 0; l < inc.b(); ++l)
        if (static_cast<int>(inc.block(l).size()) != s + 1) {
            out.failure = "line " + str(l) + " has " + str(static_cast<long long>(inc.block(l).size())) + " points";
            return out;
        }
    for (int p = 0; p < v; ++p)
        if (inc.degree(p) != t + 1) {
            out.failure = "point " + str(p) + " is on " + str(inc.degree(p)) + " lines";
            return out;
        }
    if (!inc.is_linear()) {
        out.failure = "two points lie on two lines";
        return out;
    }
    std::vector<char> collinear(v);
    for (int p = 0; p < v; ++p) {
        std::fill(collinear.begin(), collinear.end(), 0);
        for (int l : inc.blocks_through(p))
            for (int x : inc.block(l)) collinear[x] = 1;
        for (int l = 0; l < inc.b(); ++l) {
            if (inc.contains(l, p)) continue;
            ++out.antiflags;
            int c = 0;
            for (int x : inc.block(l)) c += collinear[x];
            if (c != 1) {
                out.failure = "point " + str(p) + " is collinear with " + str(c) + " points of line " + str(l);
                return out;
            }
        }
    }
    out.ok = true;
    return out;
}

GQ build_gq(const Unital& u, const unital::AijTable& aij)
{
    const int n = u.order();
    GQ g;
    g.order = n;
    g.line = aij.line;
    const int cells = (n + 1) * (n + 1);
    g.gq_point.assign(u.v(), -1);
    g.unital_point.assign(cells, -1);
    std::vector<char> on_l(u.v(), 0);
    for (PointId x : aij.points) on_l[x] = 1;
    for (PointId p = 0; p < u.v(); ++p) {
        if (on_l[p]) continue;
        g.gq_point[p] = static_cast<int>(g.unital_point.size());
        g.unital_point.push_back(p);
    }

    std::vector<design::Block> lines;
    for (int i = 0; i <= n; ++i) {
        design::Block b;
        for (int j = 0; j <= n; ++j) b.push_back(g.cell(i, j));
        lines.push_back(b);
    }
    for (int j = 0; j <= n; ++j) {
        design::Block b;
        for (int i = 0; i <= n; ++i) b.push_back(g.cell(i, j));
        lines.push_back(b);
    }
    g.unital_line.assign(lines.size(), -1);
    g.row_of.assign(lines.size(), -1);
    g.gq_line.assign(u.b(), -1);
    std::vector<int> cell_of(u.b(), -1);
    std::vector<int> row_of(u.b(), -1);
    for (int i = 0; i <= n; ++i)
        for (int j = 0; j <= n; ++j)
            for (LineId k : aij.cells[i][j]) {
                cell_of[k] = g.cell(i, j);
                row_of[k] = i;
            }
    for (LineId k = 0; k < u.b(); ++k) {
        if (k == aij.line || !u.meets(k, aij.line)) continue;
        if (cell_of[k] < 0) throw std::runtime_error("line " + str(k) + " meets L but lies in no cell");
        design::Block b{cell_of[k]};
        for (PointId p : u.line(k))
            if (!on_l[p]) b.push_back(g.gq_point[p]);
        if (static_cast<int>(b.size()) != n + 1) throw std::runtime_error("line " + str(k) + " meets L more than once");
        g.gq_line[k] = static_cast<int>(lines.size());
        g.unital_line.push_back(k);
        g.row_of.push_back(row_of[k]);
        lines.push_back(sorted(b));
    }
    g.inc = Incidence(static_cast<int>(g.unital_point.size()), std::move(lines));
    const auto check = check_gq_axioms(g.inc, n, n);
    if (!check.ok) throw std::runtime_error("GQ(L) axiom failure: " + check.failure);
    return g;
}

QuadricGQ quadric_gq(int e)
{
    QuadricGQ out;
    out.space = std::make_shared<Space>(galois::make_field(e), 4);
    out.quadric = projgeom::parabolic_quadric(*out.space);
    out.local_of.assign(out.space->num_points(), -1);
    for (std::size_t i = 0; i < out.quadric.points.size(); ++i) out.local_of[out.quadric.points[i]] = static_cast<int>(i);
    std::vector<design::Block> lines;
    for (const auto& l : out.quadric.lines) {
        design::Block b;
        for (auto p : l) b.push_back(out.local_of[p]);
        lines.push_back(sorted(b));
    }
    out.inc = Incidence(static_cast<int>(out.quadric.points.size()), std::move(lines));
    return out;
}

Incidence hyperbolic_completion(const Incidence& gq)
{
    const int v = gq.v();
    const int s = static_cast<int>(gq.block(0).size()) - 1;
    std::vector<std::vector<char>> col(v, std::vector<char>(v, 0));
    for (const auto& l : gq.blocks())
        for (int x : l)
            for (int y : l) col[x][y] = 1;
    std::vector<design::Block> lines = gq.blocks();
    std::vector<std::vector<char>> covered(v, std::vector<char>(v, 0));
    std::vector<int> trace;
    for (int x = 0; x < v; ++x)
        for (int y = x + 1; y < v; ++y) {
            if (col[x][y] || covered[x][y]) continue;
            trace.clear();
            for (int z = 0; z < v; ++z)
                if (col[x][z] && col[y][z]) trace.push_back(z);
            design::Block span;
            for (int w = 0; w < v; ++w)
                if (std::all_of(trace.begin(), trace.end(), [&](int z) { return col[w][z] != 0; })) span.push_back(w);
            if (static_cast<int>(span.size()) != s + 1)
                throw std::runtime_error("points " + str(x) + " and " + str(y) + " span a hyperbolic line of " +
                                         str(static_cast<long long>(span.size())) + " points");
            for (int a : span)
                for (int b : span) covered[a][b] = 1;
            lines.push_back(std::move(span));
        }
    Incidence out(v, std::move(lines));
    if (!out.is_linear()) throw std::runtime_error("hyperbolic lines overlap");
    return out;
}

std::optional<design::IsoMap> find_gq_isomorphism(const Incidence& a, const Incidence& b, design::IsoStats* stats,
                                                  std::int64_t node_limit)
{
    if (a.v() != b.v() || a.b() != b.b()) return std::nullopt;
    const auto ha = hyperbolic_completion(a);
    const auto hb = hyperbolic_completion(b);
    if (ha.b() != hb.b()) return std::nullopt;
    // completion keeps the GQ lines first
    const design::PairRelation collinear = [&](PointId a1, PointId a2, PointId b1, PointId b2) {
        return (ha.block_of_pair(a1, a2) < a.b()) == (hb.block_of_pair(b1, b2) < b.b());
    };
    auto map = design::find_linear_isomorphism(ha, hb, {{0, 0}}, collinear, stats, node_limit);
    if (!map) return std::nullopt;
    design::IsoMap out{map->points, {}};
    if (!design::verify_isomorphism(a, b, out)) return std::nullopt;
    return out;
}

Phi find_phi(const GQ& gq, const QuadricGQ& q4)
{
    Phi phi;
    auto map = find_gq_isomorphism(gq.inc, q4.inc, &phi.stats);
    if (!map) throw std::runtime_error("GQ(L) is not isomorphic to Q(4,q)");
    phi.map = std::move(*map);
    phi.point.resize(phi.map.points.size());
    for (std::size_t i = 0; i < phi.point.size(); ++i) phi.point[i] = q4.quadric.points[phi.map.points[i]];
    return phi;
}

// ---------------------------------------------------------------------------

projgeom::PointId Frame::mu_phi(PointId p) const { return sigma->to_local(mu(phi.of_unital(gq, p))); }

PointSet Frame::mu_phi_line(LineId l) const
{
    PointSet out;
    for (PointId p : u->line(l)) out.push_back(mu_phi(p));
    return sorted(out);
}

PointSet Frame::mu_phi_gq_line(int gl) const
{
    PointSet out;
    for (int p : gq.inc.block(gl)) out.push_back(sigma->to_local(mu(phi.point[p])));
    return sorted(out);
}

Frame start_frame(Workspace& w, LineId l)
{
    const Unital& u = w.unital();
    Frame f;
    f.u = &u;
    f.aij = unital::aij_table(w, l);
    f.gq = build_gq(u, f.aij);
    f.q4 = quadric_gq(log2_exact(u.order()));
    return f;
}

void attach_phi(Frame& f) { f.phi = find_phi(f.gq, f.q4); }

SigmaCheck attach_sigma(Frame& f)
{
    const int n = f.order();
    const Space& pg4 = f.pg4();
    const auto& quad = f.q4.quadric;

    std::vector<projgeom::PointId> span;
    for (int gl : {f.gq.line_a(0), f.gq.line_a(1)})
        for (int p : f.gq.inc.block(gl)) span.push_back(f.phi.point[p]);
    f.sigma = std::make_shared<projgeom::Hyperplane>(pg4, span);

    SigmaCheck sc;
    PointSet cells;
    for (int c = 0; c < f.gq.num_cells(); ++c) cells.push_back(f.phi.point[c]);
    cells = sorted(cells);
    PointSet section;
    for (auto p : quad.points)
        if (f.sigma->contains(p)) section.push_back(p);
    sc.section_points = static_cast<int>(section.size());
    sc.section_is_cells = section == cells;
    if (!sc.section_is_cells) throw std::runtime_error("Sigma meets the quadric outside the cell images");

    const Space& loc = f.local();
    f.h_form = projgeom::substitute(pg4.field(), quad.form, f.sigma->basis_matrix()).normalized(pg4.field());
    f.h_points = projgeom::zero_set(loc, f.h_form);
    if (f.h_points != sorted(f.sigma->to_local(cells))) throw std::logic_error("restricted form has the wrong zero set");
    const auto on_sigma = [&](int gl) {
        PointSet out;
        for (int p : f.gq.inc.block(gl)) out.push_back(f.sigma->to_local(f.phi.point[p]));
        return sorted(out);
    };
    for (int i = 0; i <= n; ++i) f.r0.push_back(on_sigma(f.gq.line_a(i)));
    for (int j = 0; j <= n; ++j) f.r0_opposite.push_back(on_sigma(f.gq.line_b(j)));
    const auto reg = projgeom::regulus_through(loc, f.r0[0], f.r0[1], f.r0[2]);
    sc.reguli_match = reg.lines == sorted(f.r0) && reg.opposite == sorted(f.r0_opposite) && reg.points() == f.h_points;

    f.alpha = std::make_shared<projgeom::Polarity>(loc, f.h_form);
    sc.involution = true;
    for (projgeom::PointId p = 0; p < loc.num_points() && sc.involution; ++p) {
        if (f.alpha->hyperplane_to_point(f.alpha->point_to_hyperplane(p)) != p) sc.involution = false;
        for (auto r : f.alpha->polar_of_point(p)) {
            const auto back = f.alpha->polar_of_point(r);
            if (!std::binary_search(back.begin(), back.end(), p)) sc.involution = false;
        }
    }
    sc.tangent_planes = true;
    for (auto v : f.h_points)
        if (f.alpha->polar_of_point(v) != projgeom::tangent_hyperplane(loc, f.h_form, v)) sc.tangent_planes = false;

    f.nucleus = projgeom::nucleus(pg4, quad.form);
    f.mu = projgeom::mu_projection(pg4, quad.points, f.nucleus, *f.sigma);
    return sc;
}

Frame build_frame(Workspace& w, LineId l, SigmaCheck* check)
{
    Frame f = start_frame(w, l);
    attach_phi(f);
    const auto sc = attach_sigma(f);
    if (check) *check = sc;
    return f;
}

ConeCheck verify_cones(const Frame& f)
{
    ConeCheck out;
    const auto& quad = f.q4.quadric;
    for (auto v : quad.points) {
        if (f.sigma->contains(v)) continue;
        ++out.points;
        const auto cone = projgeom::cone_image(f.pg4(), quad.form, quad.points, f.mu, *f.sigma, *f.alpha, f.h_points, v);
        if (!cone.ok) {
            out.failing = v;
            out.failure = cone.failure;
            return out;
        }
    }
    out.ok = true;
    return out;
}

// ---------------------------------------------------------------------------

int SpreadWitness::index_of_unital(LineId l) const
{
    const auto it = std::find(unital_line.begin(), unital_line.end(), l);
    return it == unital_line.end() ? -1 : static_cast<int>(it - unital_line.begin());
}

SpreadWitness build_spread(const Frame& f, Workspace& w)
{
    SpreadWitness s;
    for (std::size_t i = 0; i < f.r0.size(); ++i) {
        s.lines.push_back(f.r0[i]);
        s.r0_index.push_back(static_cast<int>(i));
        s.unital_line.push_back(-1);
    }
    s.misses_section = true;
    for (LineId m : w.spread(f.gq.line).s_star) {
        auto img = f.mu_phi_line(m);
        if (f.local().line_id(img) < 0) throw std::runtime_error("image of line " + str(m) + " is not a line of Sigma");
        if (projgeom::meets(img, f.h_points)) s.misses_section = false;
        s.lines.push_back(std::move(img));
        s.r0_index.push_back(-1);
        s.unital_line.push_back(m);
    }
    s.is_spread = projgeom::is_spread(f.local(), s.lines);
    if (!s.is_spread) throw std::runtime_error("R_0 and the images of S*_L do not form a spread");
    return s;
}

TubeRegularity verify_tube_and_regularity(const Frame& f, Workspace& w, const SpreadWitness& s, LineId m, LineId n)
{
    const Unital& u = w.unital();
    const Space& loc = f.local();
    TubeRegularity out;
    out.m = m;
    out.n = n;
    const int im = s.index_of_unital(m);
    const int in = s.index_of_unital(n);
    if (im < 0 || in < 0) throw std::invalid_argument("triangle sides must lie in S*_L");
    const PointSet& lm = s.lines[im];
    const PointSet& ln = s.lines[in];
    std::vector<PointSet> others{ln};
    others.insert(others.end(), f.r0.begin(), f.r0.end());
    out.tube = projgeom::is_tube(loc, lm, others);
    try {
        out.knarr_matches = sorted(projgeom::cameron_knarr_spread(loc, lm, others)) == sorted(s.lines);
    } catch (const std::runtime_error&) {
        out.knarr_matches = false;
    }
    out.regular = projgeom::is_regular_spread(loc, s.lines);

    out.opposite_reguli = true;
    for (std::size_t i = 0; i < f.r0.size(); ++i) {
        const auto ri = projgeom::regulus_through(loc, lm, ln, f.r0[i]);
        const PointId x = f.aij.points[i];
        std::vector<PointSet> images;
        for (PointId z : u.line(m)) images.push_back(f.mu_phi_gq_line(f.gq.gq_line[u.line_through(x, z)]));
        if (sorted(images) != ri.opposite) out.opposite_reguli = false;
    }
    return out;
}

// ---------------------------------------------------------------------------

const char* to_string(RegulusType t)
{
    switch (t) {
    case RegulusType::base: return "R0";
    case RegulusType::disjoint: return "disjoint";
    case RegulusType::tangent: return "tangent";
    case RegulusType::secant: return "secant";
    }
    return "?";
}

bool RegulusClassification::ok() const
{
    if (reguli.empty()) return false;
    const int n = static_cast<int>(reguli.front().members.size()) - 1;
    const bool shape = counts[0] == 1 && counts[1] == n * (n - 1) * (n - 2) / 2 && counts[2] == (n + 1) * (n - 1) &&
                       static_cast<int>(reguli.size()) == n * (n * n + 1);
    const bool witnesses = std::all_of(reguli.begin(), reguli.end(), [](const RegulusInfo& r) { return r.witness_ok; });
    return shape && witnesses && i1_design && c0_equals_star && partners_pair && i2_design;
}

namespace {

// F(z1.x_i1, z1.x_i2) in I(z1) is the arcs of the other star lines plus one circle through infinity.
bool secant_flock_at(const Frame& f, Workspace& w, PointId z1, int i1, int i2, const LineSet& others)
{
    const Unital& u = w.unital();
    const auto& lp = w.plane(z1);
    const LineId k1 = u.line_through(z1, f.aij.points[i1]);
    const LineId k2 = u.line_through(z1, f.aij.points[i2]);
    if (k1 < 0 || k2 < 0) return false;
    design::Flock fl;
    try {
        fl = lp.plane->flock(lp.local_of[k1], lp.local_of[k2]);
    } catch (const std::runtime_error&) {
        return false;
    }
    std::set<design::BlockId> flock(fl.circles.begin(), fl.circles.end());
    std::set<design::BlockId> arcs;
    for (LineId m : others) {
        const auto c = lp.circle_of_line(m);
        if (!flock.count(c)) return false;
        arcs.insert(c);
    }
    if (arcs.size() != others.size()) return false;
    int rest = 0;
    for (auto c : flock) {
        if (arcs.count(c)) continue;
        ++rest;
        if (lp.circle_class[c] >= 0) return false;
    }
    return rest == 1;
}

}  // namespace

RegulusClassification classify_reguli(const Frame& f, Workspace& w, const SpreadWitness& s, bool all_z_points)
{
    const Unital& u = w.unital();
    const Space& loc = f.local();
    const int n = u.order();
    const int total = static_cast<int>(s.lines.size());
    RegulusClassification out;
    out.all_z_points = all_z_points;

    std::map<PointSet, int> index;
    for (int i = 0; i < total; ++i) index[s.lines[i]] = i;
    std::set<std::vector<int>> circles;
    for (int a = 0; a < total; ++a)
        for (int b = a + 1; b < total; ++b)
            for (int c = b + 1; c < total; ++c) {
                const auto reg = projgeom::regulus_through(loc, s.lines[a], s.lines[b], s.lines[c]);
                std::vector<int> members;
                for (const auto& l : reg.lines) {
                    const auto it = index.find(l);
                    if (it == index.end())
                        throw std::runtime_error("regulus of spread lines " + str(a) + ", " + str(b) + ", " + str(c) +
                                                 " leaves the spread");
                    members.push_back(it->second);
                }
                circles.insert(sorted(members));
            }
    std::vector<design::Block> blocks(circles.begin(), circles.end());
    out.i1 = Incidence(total, blocks);
    out.i1_design = design::is_t_design(out.i1, 3, n + 1, 1);

    // C(J) for every line J missing L outside m_L, grouped by block
    const auto lpar = unital::l_parallel_classes(w, f.gq.line);
    std::map<std::vector<int>, LineSet> c_of_j;
    const auto& star = w.spread(f.gq.line).s_star;
    for (LineId j = 0; j < u.b(); ++j) {
        if (lpar.class_of[j] < 0) continue;
        std::vector<int> blk;
        for (LineId sl : star)
            if (u.meets(j, sl)) blk.push_back(s.index_of_unital(sl));
        c_of_j[sorted(blk)].push_back(j);
    }
    out.partners_pair = true;
    for (auto& [blk, js] : c_of_j) {
        out.c0_star.push_back(blk);
        std::set<int> classes;
        for (LineId j : js) classes.insert(lpar.class_of[j]);
        const int c = *classes.begin();
        if (classes.size() != 2 || !classes.count(lpar.classes[c].partner)) out.partners_pair = false;
        if (static_cast<int>(blk.size()) != n + 1) out.partners_pair = false;
    }

    for (const auto& members : blocks) {
        RegulusInfo r;
        r.members = members;
        std::vector<int> rows;
        LineSet stars;
        for (int m : members) {
            if (s.r0_index[m] >= 0)
                rows.push_back(s.r0_index[m]);
            else
                stars.push_back(s.unital_line[m]);
        }
        stars = sorted(stars);
        if (static_cast<int>(rows.size()) == n + 1) {
            r.type = RegulusType::base;
            r.witness_ok = members.size() == f.r0.size();
        } else if (rows.empty()) {
            r.type = RegulusType::disjoint;
            const auto it = c_of_j.find(members);
            if (it != c_of_j.end()) {
                r.j_lines = it->second;
                r.witness_ok = true;
            }
        } else if (rows.size() == 1) {
            r.type = RegulusType::tangent;
            r.row = rows[0];
            const PointId x = f.aij.points[r.row];
            const auto& xp = w.plane(x).parallel;
            r.parallel_class = xp.class_of[stars.front()];
            r.witness_ok = r.parallel_class >= 0;
            for (LineId m : stars)
                if (xp.class_of[m] != r.parallel_class || !unital::parallel_at(u, x, stars.front(), m)) r.witness_ok = false;
        } else if (rows.size() == 2) {
            r.type = RegulusType::secant;
            r.row = rows[0];
            r.row2 = rows[1];
            r.witness_ok = true;
            for (std::size_t a = 0; a < stars.size() && r.witness_ok; ++a) {
                LineSet others;
                for (std::size_t b = 0; b < stars.size(); ++b)
                    if (b != a) others.push_back(stars[b]);
                for (PointId z : u.line(stars[a])) {
                    ++r.flock_points;
                    if (!secant_flock_at(f, w, z, r.row, r.row2, others)) {
                        r.witness_ok = false;
                        break;
                    }
                    if (!all_z_points) break;
                }
                if (!all_z_points) break;
            }
        } else {
            r.type = RegulusType::secant;
            r.witness_ok = false;
        }
        ++out.counts[static_cast<int>(r.type)];
        out.reguli.push_back(std::move(r));
    }

    std::set<std::vector<int>> c0;
    for (const auto& r : out.reguli)
        if (r.type == RegulusType::disjoint) c0.insert(r.members);
    out.c0_equals_star = c0 == std::set<std::vector<int>>(out.c0_star.begin(), out.c0_star.end());

    std::vector<design::Block> i2;
    for (const auto& r : out.reguli)
        if (r.type != RegulusType::disjoint) i2.push_back(r.members);
    i2.insert(i2.end(), out.c0_star.begin(), out.c0_star.end());
    out.i2_design = design::is_t_design(Incidence(total, i2), 3, n + 1, 1);
    return out;
}

// ---------------------------------------------------------------------------

namespace {

struct CellIndex {
    std::vector<int> row;
    std::vector<int> col;
};

CellIndex cell_index(const Frame& f)
{
    CellIndex c;
    c.row.assign(f.u->b(), -1);
    c.col.assign(f.u->b(), -1);
    const int n = f.order();
    for (int i = 0; i <= n; ++i)
        for (int j = 0; j <= n; ++j)
            for (LineId k : f.aij.cells[i][j]) {
                c.row[k] = i;
                c.col[k] = j;
            }
    return c;
}

bool has_z(const Frame& f, const CellIndex& ci, PointId z, LineId k1, LineId k2)
{
    const Unital& u = *f.u;
    const LineId a = u.line_through(z, f.aij.points[ci.row[k1]]);
    const LineId b = u.line_through(z, f.aij.points[ci.row[k2]]);
    return a >= 0 && b >= 0 && ci.row[a] == ci.row[k1] && ci.col[a] == ci.col[k1] && ci.row[b] == ci.row[k2] &&
           ci.col[b] == ci.col[k2];
}

std::set<design::BlockId> flock_of(Workspace& w, PointId y, LineId k1, LineId k2)
{
    const auto& lp = w.plane(y);
    const auto fl = lp.plane->flock(lp.local_of[k1], lp.local_of[k2]);
    return {fl.circles.begin(), fl.circles.end()};
}

}  // namespace

FlockInstanceResult verify_flock_instance(const Frame& f, Workspace& w, const FlockInstance& inst)
{
    const Unital& u = w.unital();
    const auto ci = cell_index(f);
    const LineId k1 = inst.k1, k2 = inst.k2, m = inst.m;
    if (ci.row[k1] < 0 || ci.row[k2] < 0) throw std::invalid_argument("K1 and K2 must meet L off each other");
    if (ci.row[k1] == ci.row[k2]) throw std::invalid_argument("K1 and K2 pass through the same point of L");
    if (ci.col[k1] == ci.col[k2]) throw std::invalid_argument("K1 and K2 lie in the same column");
    const PointId y = u.meet_point(k1, k2);
    if (y < 0) throw std::invalid_argument("K1 and K2 do not meet");
    if (!w.in_s_star(f.gq.line, m)) throw std::invalid_argument("M is not in S*_L");
    if (u.on(y, m)) throw std::invalid_argument("M passes through the meeting point");
    FlockInstanceResult r;
    r.in_flock = flock_of(w, y, k1, k2).count(w.plane(y).circle_of_line(m)) > 0;
    for (PointId z : u.line(m))
        if (has_z(f, ci, z, k1, k2)) r.has_z = true;
    return r;
}

FlockBatch verify_flock_batch(const Frame& f, Workspace& w, std::int64_t max_pairs, std::uint32_t seed)
{
    const Unital& u = w.unital();
    const int n = u.order();
    const auto ci = cell_index(f);
    const auto& star = w.spread(f.gq.line).s_star;
    FlockBatch out;
    out.upper_count_ok = true;
    LineSet meeting;
    for (LineId k = 0; k < u.b(); ++k)
        if (ci.row[k] >= 0) meeting.push_back(k);
    std::vector<std::pair<LineId, LineId>> todo;
    for (std::size_t a = 0; a < meeting.size(); ++a)
        for (std::size_t b = a + 1; b < meeting.size(); ++b) {
            const LineId k1 = meeting[a], k2 = meeting[b];
            if (ci.row[k1] == ci.row[k2] || ci.col[k1] == ci.col[k2]) continue;
            if (u.meet_point(k1, k2) >= 0) todo.emplace_back(k1, k2);
        }
    out.admissible_pairs = static_cast<std::int64_t>(todo.size());
    if (max_pairs > 0 && out.admissible_pairs > max_pairs) {
        std::mt19937 rng(seed);
        std::shuffle(todo.begin(), todo.end(), rng);
        todo.resize(static_cast<std::size_t>(max_pairs));
        std::sort(todo.begin(), todo.end());
        out.sampled = true;
    }
    for (const auto& [k1, k2] : todo) {
        const PointId y = u.meet_point(k1, k2);
        ++out.pairs;
        const auto& lp = w.plane(y);
        const auto flock = flock_of(w, y, k1, k2);
        int upper = 0;
        for (auto c : flock) upper += lp.circle_class[c] >= 0;
        int zs = 0;
        for (PointId z = 0; z < u.v(); ++z)
            if (z != y && f.gq.gq_point[z] >= 0 && has_z(f, ci, z, k1, k2)) ++zs;
        if (upper != n - 2 || zs != n - 2) out.upper_count_ok = false;
        for (LineId m : star) {
            if (u.on(y, m)) continue;
            ++out.instances;
            const bool in = flock.count(lp.circle_of_line(m)) > 0;
            bool z = false;
            for (PointId p : u.line(m))
                if (has_z(f, ci, p, k1, k2)) z = true;
            out.positives += in;
            if (in != z && out.failing.m < 0) out.failing = {k1, k2, m};
        }
    }
    out.ok = out.failing.m < 0 && out.upper_count_ok && out.pairs > 0;
    return out;
}

// ---------------------------------------------------------------------------

PencilWitness verify_pencil(const Frame& f, const SpreadWitness& s, const unital::TriplyRuledPartition& trp)
{
    const Space& loc = f.local();
    const auto& field = loc.field();
    PencilWitness out;

    const auto fit = [&](const PointSet& pts, const std::string& what) {
        const auto q = projgeom::fit_quadric(loc, pts);
        if (!q) throw std::runtime_error("no quadric vanishes exactly on " + what);
        return q->form.normalized(field);
    };
    out.members.push_back({"section", f.h_points, f.h_form, -1});
    std::vector<PointSet> block_lines;
    out.blocks_are_reguli = true;
    for (std::size_t i = 0; i < trp.sets.size(); ++i) {
        PointSet pts;
        for (PointId p : trp.sets[i].points) pts.push_back(f.mu_phi(p));
        pts = sorted(pts);
        out.members.push_back({"ruled", pts, fit(pts, "ruled set " + str(static_cast<long long>(i))), -1});
        std::vector<PointSet> imgs;
        for (LineId l : trp.sets[i].l_ruling) imgs.push_back(f.mu_phi_line(l));
        imgs = sorted(imgs);
        if (imgs.size() < 3) {
            out.blocks_are_reguli = false;
        } else {
            const auto reg = projgeom::regulus_through(loc, imgs[0], imgs[1], imgs[2]);
            if (reg.lines != imgs || reg.points() != pts) out.blocks_are_reguli = false;
        }
        block_lines.insert(block_lines.end(), imgs.begin(), imgs.end());
    }
    for (LineId l : {trp.m, trp.n}) {
        const auto pts = f.mu_phi_line(l);
        out.members.push_back({"line", pts, fit(pts, "line " + str(l)), -1});
        block_lines.push_back(pts);
    }
    block_lines.insert(block_lines.end(), f.r0.begin(), f.r0.end());
    out.spread_decomposes = sorted(block_lines) == sorted(s.lines);

    out.generators[0] = 0;
    out.generators[1] = out.members.size() > 3 ? 1 : static_cast<int>(out.members.size()) - 2;
    const auto pencil =
        projgeom::pencil_members(loc, out.members[out.generators[0]].form, out.members[out.generators[1]].form);
    out.members_match = pencil.size() == out.members.size();
    std::vector<char> used(pencil.size(), 0);
    for (auto& m : out.members) {
        for (std::size_t k = 0; k < pencil.size(); ++k)
            if (!used[k] && pencil[k].points == m.points) {
                m.pencil_index = static_cast<int>(k);
                used[k] = 1;
                break;
            }
        if (m.pencil_index < 0)
            out.members_match = false;
        else if (m.role != "line" && !pencil[m.pencil_index].form.proportional_to(field, m.form))
            out.members_match = false;
    }

    std::vector<int> cover(loc.num_points(), 0);
    for (const auto& m : out.members)
        for (auto p : m.points) ++cover[p];
    out.partition = std::all_of(cover.begin(), cover.end(), [](int c) { return c == 1; });
    return out;
}

CoplanarCheck verify_j_coplanar(const Frame& f, Workspace& w, const SpreadWitness& s)
{
    const Unital& u = w.unital();
    const Space& pg4 = f.pg4();
    const LineId l = f.gq.line;
    const auto& sp = w.spread(l);
    CoplanarCheck out;
    std::vector<PointSet> global;
    for (const auto& line : s.lines) global.push_back(sorted(f.sigma->to_global(line)));

    const auto fail = [&](LineId j) {
        if (out.failing < 0) out.failing = j;
    };
    for (LineId j = 0; j < u.b(); ++j) {
        if (j == l || u.meets(j, l)) continue;
        std::vector<projgeom::PointId> img;
        for (PointId p : u.line(j)) img.push_back(f.phi.of_unital(f.gq, p));
        if (std::binary_search(sp.s_star.begin(), sp.s_star.end(), j)) {
            std::vector<projgeom::PointId> gen{f.nucleus};
            for (auto p : s.lines[s.index_of_unital(j)]) gen.push_back(f.sigma->to_global(p));
            const auto plane = pg4.span(gen);
            if (pg4.rank_of(gen) == 3 && projgeom::is_subset(sorted(img), plane))
                ++out.star_lines;
            else
                fail(j);
            continue;
        }
        ++out.lines;
        if (pg4.rank_of(img) != 3) {
            fail(j);
            continue;
        }
        const auto plane = pg4.span(img);
        std::vector<int> contained;
        for (std::size_t k = 0; k < global.size(); ++k)
            if (projgeom::is_subset(global[k], plane)) contained.push_back(static_cast<int>(k));
        if (contained.size() != 1) {
            fail(j);
            continue;
        }
        LineSet ms;
        for (LineId m : sp.s_star)
            if (w.in_s_star(m, j)) ms.push_back(m);
        if (ms.size() != 1) continue;
        const LineId nn = unital::polar_triple(w, l, ms.front());
        if (s.index_of_unital(nn) == contained.front()) ++out.predicted;
    }
    out.ok = out.failing < 0 && out.predicted == out.lines &&
             out.star_lines == static_cast<int>(sp.s_star.size());
    return out;
}

}  // namespace hermit::bridge
