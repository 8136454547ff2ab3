#include "hermit/bruckbose.hpp"

#include <algorithm>
#include <stdexcept>

namespace hermit::bruckbose {

using projgeom::PointSet;
using projgeom::Space;

namespace {

std::string str(long long v) { return std::to_string(v); }

}  // namespace

BBPlane bruck_bose_plane(const bridge::Frame& f, const bridge::SpreadWitness& s)
{
    const Space& pg4 = f.pg4();
    const auto& sigma = *f.sigma;
    const int q = pg4.q();
    BBPlane bb;
    bb.order = q * q;
    bb.bb_of.assign(pg4.num_points(), -1);
    for (projgeom::PointId p = 0; p < pg4.num_points(); ++p) {
        if (sigma.contains(p)) continue;
        bb.bb_of[p] = static_cast<int>(bb.affine_point.size());
        bb.affine_point.push_back(p);
    }
    bb.infinity_base = static_cast<int>(bb.affine_point.size());
    if (bb.infinity_base != q * q * q * q) throw std::logic_error("wrong number of affine points");

    std::vector<design::Block> lines;
    std::vector<char> done(pg4.num_points());
    for (std::size_t k = 0; k < s.lines.size(); ++k) {
        const auto spread_line = sigma.to_global(s.lines[k]);
        std::fill(done.begin(), done.end(), 0);
        for (projgeom::PointId p : bb.affine_point) {
            if (done[p]) continue;
            std::vector<projgeom::PointId> gen(spread_line.begin(), spread_line.end());
            gen.push_back(p);
            design::Block b;
            for (auto x : pg4.span(gen)) {
                if (bb.bb_of[x] < 0) continue;
                done[x] = 1;
                b.push_back(bb.bb_of[x]);
            }
            if (static_cast<int>(b.size()) != q * q)
                throw std::runtime_error("affine plane with " + str(static_cast<long long>(b.size())) + " points");
            b.push_back(bb.infinite_point(static_cast<int>(k)));
            std::sort(b.begin(), b.end());
            lines.push_back(std::move(b));
            bb.line_spread.push_back(static_cast<int>(k));
        }
    }
    design::Block inf;
    for (std::size_t k = 0; k < s.lines.size(); ++k) inf.push_back(bb.infinite_point(static_cast<int>(k)));
    bb.line_at_infinity = static_cast<LineId>(lines.size());
    lines.push_back(inf);
    bb.line_spread.push_back(-1);
    bb.inc = Incidence(bb.infinity_base + static_cast<int>(s.lines.size()), std::move(lines));

    const int v = bb.order * bb.order + bb.order + 1;
    if (bb.inc.v() != v || bb.inc.b() != v) throw std::runtime_error("plane has the wrong numbers of points or lines");
    const auto chk = design::check_t_design(bb.inc, 2, bb.order + 1, 1);
    if (!chk.ok) throw std::runtime_error("not a projective plane: " + chk.failure);
    return bb;
}

PlaneIdentification identify_with_pg2(const BBPlane& bb, std::int64_t node_limit)
{
    int e2 = 0;
    while ((1 << e2) < bb.order) ++e2;
    PlaneIdentification out;
    out.pg2 = std::make_shared<Space>(galois::make_field(e2), 2);
    out.pg2_inc = Incidence(out.pg2->num_points(), out.pg2->lines());
    out.map = design::find_plane_isomorphism(bb.inc, out.pg2_inc, &out.stats, node_limit);
    return out;
}

BuekenhoutUnital buekenhout_unital(const bridge::Frame& f, const BBPlane& bb)
{
    const Space& pg4 = f.pg4();
    const int n = f.order();
    BuekenhoutUnital bu;
    for (auto p : f.q4.quadric.points)
        if (bb.bb_of[p] >= 0) bu.bb_point.push_back(bb.bb_of[p]);
    std::sort(bu.bb_point.begin(), bu.bb_point.end());
    for (int i = 0; i <= n; ++i) {
        bu.a.push_back(static_cast<int>(bu.bb_point.size()));
        bu.bb_point.push_back(bb.infinite_point(i));
    }
    bu.of_bb.assign(bb.inc.v(), -1);
    for (std::size_t i = 0; i < bu.bb_point.size(); ++i) bu.of_bb[bu.bb_point[i]] = static_cast<int>(i);

    std::vector<design::Block> blocks;
    for (LineId l = 0; l < bb.inc.b(); ++l) {
        design::Block b;
        for (int p : bb.inc.block(l))
            if (bu.of_bb[p] >= 0) b.push_back(bu.of_bb[p]);
        if (static_cast<int>(b.size()) != n + 1) continue;
        std::sort(b.begin(), b.end());
        blocks.push_back(std::move(b));
        bu.bb_line.push_back(l);
    }
    Incidence inc(static_cast<int>(bu.bb_point.size()), std::move(blocks));
    const auto chk = design::check_t_design(inc, 2, n + 1, 1);
    if (!chk.ok) throw std::runtime_error("Buekenhout point set is not a unital: " + chk.failure);
    bu.unital = unital::Unital(std::move(inc), "buekenhout");

    // blocks through a_i other than the one at infinity
    bu.generators_ok = true;
    for (int i = 0; i <= n; ++i) {
        const auto ai = f.sigma->to_global(f.r0[i]);
        int count = 0;
        for (LineId blk : bu.unital.lines_through(bu.a[i])) {
            if (bu.bb_line[blk] == bb.line_at_infinity) continue;
            ++count;
            std::vector<projgeom::PointId> aff;
            for (int p : bu.unital.line(blk))
                if (p != bu.a[i]) aff.push_back(bb.affine_point[bu.bb_point[p]]);
            bool ok = pg4.rank_of(aff) == 2;
            if (ok) {
                const auto line = pg4.span(aff);
                ok = projgeom::is_subset(line, f.q4.quadric.points) && projgeom::intersection(line, ai).size() == 1;
            }
            if (!ok) bu.generators_ok = false;
        }
        if (count != n * n - 1) bu.generators_ok = false;
    }
    return bu;
}

PhiPrime build_phi_prime(const bridge::Frame& f, const BBPlane& bb, const BuekenhoutUnital& bu)
{
    const unital::Unital& u = *f.u;
    const int n = f.order();
    const LineId l = f.gq.line;
    PhiPrime pp;
    pp.point.assign(u.v(), -1);
    std::vector<int> row(u.v(), -1);
    for (int i = 0; i <= n; ++i) {
        row[f.aij.points[i]] = i;
        pp.point[f.aij.points[i]] = bu.a[i];
    }
    for (PointId y = 0; y < u.v(); ++y)
        if (row[y] < 0) pp.point[y] = bu.of_bb[bb.bb_of[f.phi.of_unital(f.gq, y)]];

    std::vector<char> hit(bu.unital.v(), 0);
    pp.bijective = static_cast<int>(pp.point.size()) == bu.unital.v();
    for (int x : pp.point) {
        if (x < 0 || hit[x]) pp.bijective = false;
        if (x >= 0) hit[x] = 1;
    }

    pp.line.assign(u.b(), -1);
    pp.lines_to_blocks = true;
    for (LineId k = 0; k < u.b(); ++k) {
        design::Block img;
        if (k == l) {
            img = bu.a;
        } else {
            int meet = -1;
            for (PointId p : u.line(k)) {
                if (row[p] >= 0)
                    meet = row[p];
                else
                    img.push_back(pp.point[p]);
            }
            if (meet >= 0) img.push_back(bu.a[meet]);
        }
        std::sort(img.begin(), img.end());
        pp.line[k] = bu.unital.incidence().find_block(img);
        if (pp.line[k] < 0) {
            pp.lines_to_blocks = false;
            if (pp.failing < 0) pp.failing = k;
        }
    }
    pp.line_to_infinity = pp.line[l] >= 0 && bu.bb_line[pp.line[l]] == bb.line_at_infinity;

    if (pp.bijective) {
        design::IsoMap map{std::vector<design::PointId>(pp.point.begin(), pp.point.end()), {}};
        pp.verified = design::verify_isomorphism(u.incidence(), bu.unital.incidence(), map) &&
                      std::equal(map.blocks.begin(), map.blocks.end(), pp.line.begin());
    }
    return pp;
}

Embedding embed_in_pg2(const unital::Unital& u, const BuekenhoutUnital& bu, const PhiPrime& pp,
                       const PlaneIdentification& id, std::int64_t node_limit)
{
    Embedding out;
    if (!id.map) return out;
    const int n = u.order();
    const auto& pmap = id.map->points;
    for (PointId p = 0; p < u.v(); ++p) out.point.push_back(pmap[bu.bb_point[pp.point[p]]]);

    const Incidence& plane = id.pg2_inc;
    out.lines_collinear = true;
    for (LineId k = 0; k < u.b(); ++k) {
        const auto& pts = u.line(k);
        const auto carrier = plane.block_of_pair(out.point[pts[0]], out.point[pts[1]]);
        for (PointId p : pts)
            if (carrier < 0 || !plane.contains(carrier, out.point[p])) out.lines_collinear = false;
    }
    std::vector<char> in(plane.v(), 0);
    for (auto p : out.point) in[p] = 1;
    out.unital_set = true;
    for (const auto& line : plane.blocks()) {
        int c = 0;
        for (int p : line) c += in[p];
        if (c != 1 && c != n + 1) out.unital_set = false;
    }

    int e = 0;
    while ((1 << e) < n) ++e;
    const auto herm = unital::hermitian_unital(e);
    out.hermitian_iso = design::find_isomorphism(u.incidence(), herm.unital.incidence(), &out.stats, node_limit).has_value();
    return out;
}

}  // namespace hermit::bruckbose
