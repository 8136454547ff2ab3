#include "hermit/unital.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <random>
#include <set>
#include <stdexcept>

#include <boost/dynamic_bitset.hpp>

namespace hermit::unital {

namespace {

using Bits = boost::dynamic_bitset<>;

bool has(const LineSet& s, LineId l) { return std::binary_search(s.begin(), s.end(), l); }

std::string str(int v) { return std::to_string(v); }

// Lines through x meeting m, as local indices into lines_through(x).
std::vector<int> key_of(const Unital& u, PointId x, LineId m, const std::vector<int>& local)
{
    std::vector<int> key;
    const auto& inc = u.incidence();
    for (PointId p : u.line(m)) {
        if (p == x) continue;
        if (inc.is_linear()) {
            const LineId k = inc.block_of_pair(x, p);
            if (k >= 0) key.push_back(local[k]);
        } else {
            for (LineId k : u.lines_through(p))
                if (local[k] >= 0) key.push_back(local[k]);
        }
    }
    std::sort(key.begin(), key.end());
    key.erase(std::unique(key.begin(), key.end()), key.end());
    return key;
}

std::vector<int> local_index(const Unital& u, PointId x)
{
    std::vector<int> local(u.b(), -1);
    const auto& th = u.lines_through(x);
    for (int i = 0; i < static_cast<int>(th.size()); ++i) local[th[i]] = i;
    return local;
}

std::vector<PointId> points_of(const Unital& u, const LineSet& lines)
{
    std::vector<PointId> pts;
    for (LineId l : lines) pts.insert(pts.end(), u.line(l).begin(), u.line(l).end());
    std::sort(pts.begin(), pts.end());
    return pts;
}

bool pairwise_disjoint(const Unital& u, const LineSet& lines)
{
    for (std::size_t i = 0; i < lines.size(); ++i)
        for (std::size_t j = i + 1; j < lines.size(); ++j)
            if (u.incidence().meet(lines[i], lines[j]) != 0) return false;
    return true;
}

LineSet minus(const LineSet& a, const LineSet& b)
{
    LineSet out;
    std::set_difference(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
    return out;
}

LineSet intersect(const LineSet& a, const LineSet& b)
{
    LineSet out;
    std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
    return out;
}

LineSet sorted(LineSet s)
{
    std::sort(s.begin(), s.end());
    return s;
}

// Every line through two points; more than one only in non-linear inputs.
std::vector<LineId> lines_on_pair(const Unital& u, PointId a, PointId b)
{
    if (u.incidence().is_linear()) {
        const LineId l = u.line_through(a, b);
        return l >= 0 ? std::vector<LineId>{l} : std::vector<LineId>{};
    }
    std::vector<LineId> out;
    for (LineId l : u.lines_through(a))
        if (u.on(b, l)) out.push_back(l);
    return out;
}

}  // namespace

// ---------------------------------------------------------------------------
// Unital

Unital::Unital(Incidence inc, std::string construction) : inc_(std::move(inc)), construction_(std::move(construction))
{
    if (inc_.b() == 0) throw std::invalid_argument("unital has no lines");
    const int k = static_cast<int>(inc_.block(0).size());
    n_ = k - 1;
    if (n_ < 2) throw std::invalid_argument("lines must have at least 3 points");
    for (LineId l = 0; l < inc_.b(); ++l)
        if (static_cast<int>(inc_.block(l).size()) != k)
            throw std::invalid_argument("line " + str(l) + " has " + str(static_cast<int>(inc_.block(l).size())) +
                                        " points, expected " + str(k));
    if (inc_.v() != n_ * n_ * n_ + 1)
        throw std::invalid_argument("point count " + str(inc_.v()) + " is not n^3+1 for n = " + str(n_));
}

LineId Unital::line_through(PointId a, PointId b) const
{
    if (a == b) return -1;
    if (inc_.is_linear()) return inc_.block_of_pair(a, b);
    LineId found = -1;
    for (LineId l : inc_.blocks_through(a))
        if (inc_.contains(l, b)) {
            if (found >= 0) return -1;
            found = l;
        }
    return found;
}

PointId Unital::meet_point(LineId a, LineId b) const
{
    if (a == b) return -1;
    const Block s = inc_.intersection(a, b);
    return s.size() == 1 ? s[0] : -1;
}

nlohmann::json to_json(const Unital& u)
{
    nlohmann::json j = design::to_json(u.incidence());
    j["order"] = u.order();
    j["construction"] = u.construction();
    return j;
}

Unital unital_from_json(const nlohmann::json& j)
{
    Incidence inc = design::incidence_from_json(j);
    std::string construction = "external";
    if (j.contains("construction")) {
        if (!j["construction"].is_string()) throw std::invalid_argument("construction must be a string");
        construction = j["construction"].get<std::string>();
    }
    Unital u(std::move(inc), construction);
    if (j.contains("order")) {
        if (!j["order"].is_number_integer() || j["order"].get<int>() != u.order())
            throw std::invalid_argument("order field does not match the line size");
    }
    return u;
}

HermitianUnital hermitian_unital(int e)
{
    if (e < 1 || e > 4) throw std::invalid_argument("hermitian_unital supports 1 <= e <= 4");
    auto plane = std::make_shared<projgeom::Space>(galois::make_field(2 * e), 2);
    const galois::Field& f = plane->field();
    const int q = 1 << e;

    std::vector<int> uid(plane->num_points(), -1);
    std::vector<projgeom::PointId> pg_point;
    for (projgeom::PointId p = 0; p < plane->num_points(); ++p) {
        auto c = plane->coords(p);
        if ((f.norm(c[0]) ^ f.norm(c[1]) ^ f.norm(c[2])) == 0) {
            uid[p] = static_cast<int>(pg_point.size());
            pg_point.push_back(p);
        }
    }
    std::vector<Block> blocks;
    std::vector<int> from_line;
    int tangents = 0;
    const auto& lines = plane->lines();
    for (int l = 0; l < static_cast<int>(lines.size()); ++l) {
        Block b;
        for (auto p : lines[l])
            if (uid[p] >= 0) b.push_back(uid[p]);
        if (b.size() == 1) {
            ++tangents;
        } else if (static_cast<int>(b.size()) == q + 1) {
            blocks.push_back(std::move(b));
            from_line.push_back(l);
        } else {
            throw std::logic_error("line " + str(l) + " meets the Hermitian curve in " + str(static_cast<int>(b.size())) +
                                   " points");
        }
    }
    std::vector<design::BlockId> perm;
    Incidence inc = Incidence(static_cast<int>(pg_point.size()), std::move(blocks)).canonical(&perm);
    std::vector<int> pg_line(perm.size());
    for (std::size_t i = 0; i < perm.size(); ++i) pg_line[i] = from_line[perm[i]];
    const int secants = inc.b();
    return HermitianUnital{plane, Unital(std::move(inc), "hermitian"), std::move(pg_point), std::move(pg_line), tangents,
                           secants};
}

Unital onan_mutation(const Unital& u, std::uint32_t seed)
{
    if (!u.incidence().is_linear()) throw std::invalid_argument("onan_mutation needs a linear input");
    std::mt19937 rng(seed);
    auto pick = [&](const auto& v) { return v[std::uniform_int_distribution<std::size_t>(0, v.size() - 1)(rng)]; };
    auto others = [](const Block& b, std::initializer_list<PointId> skip) {
        Block out;
        for (PointId p : b)
            if (std::find(skip.begin(), skip.end(), p) == skip.end()) out.push_back(p);
        return out;
    };
    for (int attempt = 0; attempt < 10000; ++attempt) {
        const LineId l1 = std::uniform_int_distribution<LineId>(0, u.b() - 1)(rng);
        const PointId a = pick(u.line(l1));
        LineId l2 = pick(u.lines_through(a));
        if (l2 == l1) continue;
        const PointId b = pick(others(u.line(l1), {a}));
        const PointId c = pick(others(u.line(l2), {a}));
        const LineId l3 = u.line_through(b, c);
        if (l3 < 0) continue;
        const PointId p = pick(others(u.line(l1), {a, b}));
        const PointId q = pick(others(u.line(l2), {a, c}));
        const LineId l = u.line_through(p, q);
        if (l < 0 || u.incidence().meet(l, l3) != 0) continue;
        const PointId s = pick(others(u.line(l), {p, q}));
        const PointId r = pick(others(u.line(l3), {b, c}));
        Block nb = others(u.line(l), {s});
        nb.push_back(r);
        std::sort(nb.begin(), nb.end());
        if (u.incidence().find_block(nb) >= 0) continue;
        std::vector<Block> blocks = u.incidence().blocks();
        blocks[l] = nb;
        return Unital(Incidence(u.v(), std::move(blocks)), "onan-mutation");
    }
    throw std::runtime_error("no triangle admits a rewired fourth line");
}

Unital single_line_mutation(const Unital& u, std::uint32_t seed)
{
    std::mt19937 rng(seed);
    for (int attempt = 0; attempt < 10000; ++attempt) {
        const LineId l = std::uniform_int_distribution<LineId>(0, u.b() - 1)(rng);
        const Block& blk = u.line(l);
        const PointId s = blk[std::uniform_int_distribution<std::size_t>(0, blk.size() - 1)(rng)];
        const PointId r = std::uniform_int_distribution<PointId>(0, u.v() - 1)(rng);
        if (u.on(r, l)) continue;
        Block nb;
        for (PointId p : blk)
            if (p != s) nb.push_back(p);
        nb.push_back(r);
        std::sort(nb.begin(), nb.end());
        if (u.incidence().find_block(nb) >= 0) continue;
        std::vector<Block> blocks = u.incidence().blocks();
        blocks[l] = nb;
        return Unital(Incidence(u.v(), std::move(blocks)), "line-mutation");
    }
    throw std::runtime_error("no line could be mutated");
}

// ---------------------------------------------------------------------------
// Condition (I)

OnanResult check_onan(const Unital& u, int limit, const std::vector<LineId>& first_lines)
{
    OnanResult res;
    std::vector<LineId> firsts = first_lines;
    if (firsts.empty()) {
        firsts.resize(u.b());
        std::iota(firsts.begin(), firsts.end(), 0);
    } else {
        res.sampled = static_cast<int>(firsts.size()) < u.b();
    }
    // Fourth lines through non-vertex points of l1 and l2 meeting l3 off its vertices.
    auto extend = [&](LineId l1, LineId l2, LineId l3, PointId a, PointId b, PointId c) {
        for (PointId p : u.line(l1)) {
            if (p == a || p == b) continue;
            for (PointId q : u.line(l2)) {
                if (q == a || q == c) continue;
                for (LineId l4 : lines_on_pair(u, p, q)) {
                    if (l4 <= l3 || u.meet_point(l1, l4) != p || u.meet_point(l2, l4) != q) continue;
                    const PointId r = u.meet_point(l3, l4);
                    if (r < 0 || r == b || r == c) continue;
                    ++res.total;
                    if (static_cast<int>(res.found.size()) < limit) {
                        std::vector<PointId> pts{a, b, c, p, q, r};
                        std::sort(pts.begin(), pts.end());
                        res.found.push_back({{l1, l2, l3, l4}, pts});
                    }
                }
            }
        }
    };
    for (LineId l1 : firsts) {
        std::set<LineId> seconds;
        for (PointId a : u.line(l1))
            for (LineId l2 : u.lines_through(a))
                if (l2 > l1 && u.meet_point(l1, l2) == a) seconds.insert(l2);
        for (LineId l2 : seconds) {
            const PointId a = u.meet_point(l1, l2);
            for (PointId b : u.line(l1)) {
                if (b == a) continue;
                for (PointId c : u.line(l2)) {
                    if (c == a) continue;
                    for (LineId l3 : lines_on_pair(u, b, c)) {
                        if (l3 <= l2 || u.meet_point(l1, l3) != b || u.meet_point(l2, l3) != c) continue;
                        ++res.triangles;
                        extend(l1, l2, l3, a, b, c);
                    }
                }
            }
        }
    }
    return res;
}

bool is_onan_configuration(const Unital& u, const std::vector<LineId>& lines)
{
    if (lines.size() != 4) return false;
    std::set<LineId> distinct(lines.begin(), lines.end());
    if (distinct.size() != 4) return false;
    std::set<PointId> pts;
    for (int i = 0; i < 4; ++i)
        for (int j = i + 1; j < 4; ++j) {
            const PointId p = u.meet_point(lines[i], lines[j]);
            if (p < 0) return false;
            pts.insert(p);
        }
    return pts.size() == 6;
}

// ---------------------------------------------------------------------------
// Condition (II)

ConditionII check_condition_II(const Unital& u, const std::vector<PointId>& points)
{
    ConditionII res;
    std::vector<PointId> xs = points;
    if (xs.empty()) {
        xs.resize(u.v());
        std::iota(xs.begin(), xs.end(), 0);
    }
    const int n = u.order();
    for (PointId x : xs) {
        ++res.points_checked;
        const auto local = local_index(u, x);
        const auto& through = u.lines_through(x);
        std::vector<std::vector<int>> keys(u.b());
        std::map<std::vector<int>, int> class_id;
        std::vector<std::vector<LineId>> members;
        std::vector<int> cls(u.b(), -1);
        bool regular = true;
        for (LineId m = 0; m < u.b(); ++m) {
            if (u.on(x, m)) continue;
            keys[m] = key_of(u, x, m, local);
            if (static_cast<int>(keys[m].size()) != n + 1) regular = false;
            auto [it, fresh] = class_id.emplace(keys[m], static_cast<int>(members.size()));
            if (fresh) members.emplace_back();
            members[it->second].push_back(m);
            cls[m] = it->second;
        }
        const int nc = static_cast<int>(members.size());
        std::vector<std::vector<int>> ordered_keys(nc);
        for (const auto& [k, id] : class_id) ordered_keys[id] = k;

        // count[y * nc + c]: lines through y missing x whose key contains key c
        std::vector<int> count;
        if (regular) {
            count.assign(static_cast<std::size_t>(u.v()) * nc, 0);
            for (PointId y = 0; y < u.v(); ++y) {
                if (y == x) continue;
                for (LineId m : u.lines_through(y))
                    if (cls[m] >= 0) ++count[static_cast<std::size_t>(y) * nc + cls[m]];
            }
        }
        auto tally = [&](PointId y, int c) {
            if (regular) return count[static_cast<std::size_t>(y) * nc + c];
            int t = 0;
            for (LineId m : u.lines_through(y))
                if (cls[m] >= 0 && std::includes(keys[m].begin(), keys[m].end(), ordered_keys[c].begin(),
                                                  ordered_keys[c].end()))
                    ++t;
            return t;
        };
        for (int c = 0; c < nc; ++c) {
            const auto weight = static_cast<std::int64_t>(members[c].size());
            for (int li : ordered_keys[c]) {
                const LineId l = through[li];
                for (PointId y : u.line(l)) {
                    if (y == x) continue;
                    res.instances += weight;
                    const int t = tally(y, c);
                    if (t == 0) {
                        res.x = x;
                        res.l = l;
                        res.m = members[c].front();
                        res.y = y;
                        res.ok = false;
                        return res;
                    }
                    if (t != 1) res.always_unique = false;
                }
            }
        }
    }
    res.ok = true;
    return res;
}

// ---------------------------------------------------------------------------
// x-parallelism and I(x)

XParallel x_parallel_classes(const Unital& u, PointId x)
{
    const auto local = local_index(u, x);
    std::map<std::vector<int>, LineSet> groups;
    for (LineId m = 0; m < u.b(); ++m)
        if (!u.on(x, m)) groups[key_of(u, x, m, local)].push_back(m);
    XParallel xp;
    xp.x = x;
    const auto& through = u.lines_through(x);
    for (auto& [key, members] : groups) {
        if (static_cast<int>(members.size()) != u.order())
            throw std::runtime_error("x-parallel class of line " + str(members.front()) + " at point " + str(x) + " has " +
                                     str(static_cast<int>(members.size())) + " lines");
        ParallelClass pc;
        for (int k : key) pc.key.push_back(through[k]);
        pc.members = members;
        xp.classes.push_back(std::move(pc));
    }
    std::sort(xp.classes.begin(), xp.classes.end(),
              [](const ParallelClass& a, const ParallelClass& b) { return a.representative() < b.representative(); });
    xp.class_of.assign(u.b(), -1);
    for (int c = 0; c < static_cast<int>(xp.classes.size()); ++c)
        for (LineId m : xp.classes[c].members) xp.class_of[m] = c;
    return xp;
}

design::BlockId LocalPlane::circle_of_line(LineId m) const
{
    const int c = parallel.class_of[m];
    if (c < 0) throw std::invalid_argument("line " + str(m) + " passes through the base point");
    return c;
}

LocalPlane inversive_plane_at(const Unital& u, PointId x)
{
    LocalPlane lp;
    lp.x = x;
    lp.parallel = x_parallel_classes(u, x);
    lp.lines = u.lines_through(x);
    const int m = static_cast<int>(lp.lines.size());
    lp.infinity = m;
    lp.local_of.assign(u.b(), -1);
    for (int i = 0; i < m; ++i) lp.local_of[lp.lines[i]] = i;

    std::vector<Block> circles;
    std::vector<Bits> covered(static_cast<std::size_t>(m) * m, Bits(m));
    for (const auto& pc : lp.parallel.classes) {
        Block c;
        for (LineId k : pc.key) c.push_back(lp.local_of[k]);
        std::sort(c.begin(), c.end());
        for (std::size_t i = 0; i < c.size(); ++i)
            for (std::size_t j = i + 1; j < c.size(); ++j)
                for (std::size_t k = 0; k < c.size(); ++k)
                    if (k != i && k != j) covered[static_cast<std::size_t>(c[i]) * m + c[j]].set(c[k]);
        circles.push_back(std::move(c));
        lp.circle_class.push_back(static_cast<int>(lp.circle_class.size()));
    }
    lp.upper_circles = static_cast<int>(circles.size());
    std::set<Block> lower;
    for (int a = 0; a < m; ++a)
        for (int b = a + 1; b < m; ++b) {
            const Bits& cov = covered[static_cast<std::size_t>(a) * m + b];
            Block c{a, b};
            for (int k = 0; k < m; ++k)
                if (k != a && k != b && !cov.test(k)) c.push_back(k);
            std::sort(c.begin(), c.end());
            c.push_back(lp.infinity);
            lower.insert(std::move(c));
        }
    lp.lower_circles = static_cast<int>(lower.size());
    for (const auto& c : lower) {
        circles.push_back(c);
        lp.circle_class.push_back(-1);
    }
    try {
        lp.plane = std::make_shared<design::InversivePlane>(Incidence(m + 1, std::move(circles)));
    } catch (const std::invalid_argument& e) {
        throw std::runtime_error("I(" + str(x) + ") is not an inversive plane: " + e.what());
    }
    return lp;
}

// ---------------------------------------------------------------------------
// Special spreads

const LocalPlane& Workspace::plane(PointId x)
{
    if (!planes_[x]) planes_[x] = std::make_unique<LocalPlane>(inversive_plane_at(*u_, x));
    return *planes_[x];
}

const SpecialSpread& Workspace::spread(LineId l)
{
    if (!spreads_[l]) spreads_[l] = std::make_unique<SpecialSpread>(special_spread(*this, l));
    return *spreads_[l];
}

bool is_spread(const Unital& u, const LineSet& lines)
{
    std::vector<int> hits(u.v(), 0);
    for (LineId l : lines)
        for (PointId p : u.line(l))
            if (++hits[p] > 1) return false;
    return std::all_of(hits.begin(), hits.end(), [](int h) { return h == 1; });
}

LineSet spread_from_base(Workspace& w, LineId l, PointId x)
{
    const Unital& u = w.unital();
    const LocalPlane& lp = w.plane(x);
    const int pl = lp.local_of[l];
    if (pl < 0) throw std::invalid_argument("base point is not on the line");
    const design::Flock fl = lp.plane->flock(pl, lp.infinity);
    LineSet lines{l};
    for (auto c : fl.circles) {
        const int cls = lp.circle_class[c];
        if (cls < 0) throw std::runtime_error("flock circle passes through infinity");
        const auto& mem = lp.parallel.classes[cls].members;
        lines.insert(lines.end(), mem.begin(), mem.end());
    }
    lines = sorted(lines);
    if (!is_spread(u, lines))
        throw std::runtime_error("lines from the flock at point " + str(x) + " do not form a spread (line " + str(l) + ")");
    return lines;
}

namespace {

// Components of the meet graph between star lines and the lines through x other than l.
bool special_at(const Unital& u, LineId l, PointId x, const LineSet& star, std::vector<LineSet>& sparts,
                std::vector<LineSet>& kparts, std::string& why)
{
    const int n = u.order();
    LineSet ks;
    for (LineId k : u.lines_through(x))
        if (k != l) ks.push_back(k);
    const int ns = static_cast<int>(star.size());
    const int nk = static_cast<int>(ks.size());
    std::vector<int> parent(ns + nk);
    std::iota(parent.begin(), parent.end(), 0);
    auto find = [&](int a) {
        while (parent[a] != a) a = parent[a] = parent[parent[a]];
        return a;
    };
    for (int i = 0; i < ns; ++i)
        for (int j = 0; j < nk; ++j)
            if (u.incidence().meet(star[i], ks[j]) > 0) parent[find(i)] = find(ns + j);
    std::map<int, std::pair<LineSet, LineSet>> comps;
    for (int i = 0; i < ns; ++i) comps[find(i)].first.push_back(star[i]);
    for (int j = 0; j < nk; ++j) comps[find(ns + j)].second.push_back(ks[j]);
    if (static_cast<int>(comps.size()) != n - 1) {
        why = str(static_cast<int>(comps.size())) + " meet components at point " + str(x);
        return false;
    }
    sparts.clear();
    kparts.clear();
    for (auto& [root, comp] : comps) {
        auto& [s, k] = comp;
        if (static_cast<int>(s.size()) != n || static_cast<int>(k.size()) != n + 1) {
            why = "meet component of shape " + str(static_cast<int>(s.size())) + "x" + str(static_cast<int>(k.size())) +
                  " at point " + str(x);
            return false;
        }
        for (LineId a : s)
            for (LineId b : k)
                if (u.incidence().meet(a, b) == 0) {
                    why = "lines " + str(a) + " and " + str(b) + " miss inside a meet component at point " + str(x);
                    return false;
                }
        sparts.push_back(s);
        kparts.push_back(k);
    }
    std::sort(sparts.begin(), sparts.end());
    std::sort(kparts.begin(), kparts.end());
    return true;
}

}  // namespace

SpecialSpread special_spread(Workspace& w, LineId l)
{
    const Unital& u = w.unital();
    SpecialSpread sp;
    sp.line = l;
    const Block& pts = u.line(l);
    sp.base = pts.front();
    sp.lines = spread_from_base(w, l, sp.base);
    sp.s_star = minus(sp.lines, {l});
    for (PointId x : pts) {
        std::vector<LineSet> s, k;
        std::string why;
        if (!special_at(u, l, x, sp.s_star, s, k, why))
            throw std::runtime_error("spread of line " + str(l) + " is not special: " + why);
        sp.spread_parts.push_back(std::move(s));
        sp.pencil_parts.push_back(std::move(k));
    }
    for (PointId x : pts) {
        if (x == sp.base) continue;
        if (spread_from_base(w, l, x) != sp.lines)
            throw std::runtime_error("spread of line " + str(l) + " changes with the base point " + str(x));
    }
    sp.base_independent = true;
    return sp;
}

ConditionP check_condition_P(Workspace& w)
{
    const Unital& u = w.unital();
    ConditionP res;
    std::vector<Bits> full(u.b(), Bits(u.b()));
    try {
        for (LineId l = 0; l < u.b(); ++l) {
            const auto& sp = w.spread(l);
            if (!has(sp.lines, l)) {
                res.failure = "line " + str(l) + " is not in its own spread";
                return res;
            }
            for (LineId m : sp.lines) full[l].set(m);
        }
    } catch (const std::exception& e) {
        res.failure = e.what();
        return res;
    }
    for (LineId l = 0; l < u.b(); ++l)
        for (LineId m : w.spread(l).s_star) {
            if (!w.in_s_star(m, l)) {
                res.failure = "line " + str(m) + " is in the spread of " + str(l) + " but not conversely";
                return res;
            }
            if (l < m) ++res.symmetric_pairs;
        }
    for (LineId a = 0; a < u.b(); ++a)
        for (LineId b = a + 1; b < u.b(); ++b) {
            const Bits common = full[a] & full[b];
            res.max_common = std::max(res.max_common, static_cast<int>(common.count()));
            if (u.incidence().meet(a, b) != 0) continue;
            ++res.disjoint_pairs;
            Bits star = common;
            star.reset(a);
            star.reset(b);
            if (star.none()) {
                res.failure = "disjoint lines " + str(a) + " and " + str(b) + " share no spread line";
                return res;
            }
        }
    res.ok = true;
    return res;
}

// ---------------------------------------------------------------------------
// Self-polar triangles

bool is_self_polar(Workspace& w, LineId l, LineId m, LineId n)
{
    if (l == m || l == n || m == n) return false;
    const LineSet tri = sorted({l, m, n});
    const auto& sl = w.spread(l).lines;
    const auto& sm = w.spread(m).lines;
    const auto& sn = w.spread(n).lines;
    return intersect(sl, sm) == tri && intersect(sl, sn) == tri && intersect(sm, sn) == tri;
}

LineId polar_triple(Workspace& w, LineId l, LineId m)
{
    if (!w.in_s_star(l, m)) throw std::invalid_argument("second line is not in the star of the first");
    const LineSet cand = minus(intersect(w.spread(l).lines, w.spread(m).lines), sorted({l, m}));
    LineId found = -1;
    int hits = 0;
    for (LineId n : cand)
        if (is_self_polar(w, l, m, n)) {
            found = n;
            ++hits;
        }
    if (hits != 1)
        throw std::runtime_error(str(hits) + " lines complete a self-polar triangle with " + str(l) + ", " + str(m));
    return found;
}

bool parallel_at(const Unital& u, PointId z, LineId l, LineId m)
{
    if (u.on(z, l) || u.on(z, m)) return false;
    for (LineId k : u.lines_through(z))
        if (u.meets(k, l) != u.meets(k, m)) return false;
    return true;
}

TriangleCriteria check_triangle_criteria(Workspace& w, LineId l, LineId m, LineId n)
{
    const Unital& u = w.unital();
    const int q = u.order();
    TriangleCriteria tc;
    tc.by_spreads = is_self_polar(w, l, m, n);

    tc.parallel_on_third = true;
    int parallel_points = 0;
    for (PointId z : u.line(n))
        if (parallel_at(u, z, l, m))
            ++parallel_points;
        else
            tc.parallel_on_third = false;

    bool all_three = true;
    for (LineId k = 0; k < u.b(); ++k) {
        if (k == l || k == m || k == n) continue;
        const int hits = (u.meets(k, l) ? 1 : 0) + (u.meets(k, m) ? 1 : 0) + (u.meets(k, n) ? 1 : 0);
        if (hits == 3) ++tc.common_transversals;
        if (hits == 2) all_three = false;
    }
    tc.transversals = all_three && tc.common_transversals == (q + 1) * (q + 1);
    tc.star_and_two_points = w.in_s_star(l, m) && parallel_points >= 2;
    return tc;
}

StarByParallelism s_star_via_parallelism(Workspace& w, LineId l, LineId m)
{
    const Unital& u = w.unital();
    std::map<LineId, int> mult;
    for (PointId y : u.line(m)) {
        const LocalPlane& lp = w.plane(y);
        const int c = lp.parallel.class_of[l];
        if (c < 0) continue;
        for (LineId j : lp.parallel.classes[c].members) ++mult[j];
    }
    StarByParallelism res;
    for (auto [j, k] : mult) {
        res.lines.push_back(j);
        res.multiplicity.push_back(k);
        if (k == u.order() + 1) ++res.every_point;
        if (k == 1) ++res.single_point;
    }
    res.equals_s_star = res.lines == w.spread(m).s_star;
    return res;
}

// ---------------------------------------------------------------------------
// L-parallelism and triply ruled sets

LParallel l_parallel_classes(Workspace& w, LineId l)
{
    const Unital& u = w.unital();
    const int n = u.order();
    const auto& sp = w.spread(l);
    LParallel res;
    res.line = l;
    res.class_of.assign(u.b(), -1);
    std::map<LineSet, LineSet> groups;
    for (LineId m = 0; m < u.b(); ++m) {
        if (m == l || u.meets(m, l)) continue;
        ++res.lines_missing;
        if (has(sp.lines, m)) continue;
        LineSet key;
        for (LineId s : sp.s_star)
            if (u.meets(m, s)) key.push_back(s);
        groups[key].push_back(m);
    }
    for (auto& [key, group] : groups) {
        const LineId first = group.front();
        LineSet a{first}, b;
        for (std::size_t i = 1; i < group.size(); ++i) (u.meets(first, group[i]) ? b : a).push_back(group[i]);
        if (static_cast<int>(a.size()) != n + 1 || static_cast<int>(b.size()) != n + 1)
            throw std::runtime_error("lines meeting the same star lines as " + str(first) + " do not split into two classes of " +
                                     str(n + 1));
        if (!pairwise_disjoint(u, a) || !pairwise_disjoint(u, b))
            throw std::runtime_error("L-parallel class of line " + str(first) + " contains meeting lines");
        for (LineId x : a)
            for (LineId y : b)
                if (!u.meets(x, y)) throw std::runtime_error("partner classes of line " + str(first) + " contain disjoint lines");
        const auto pts_a = points_of(u, a);
        const auto pts_b = points_of(u, b);
        const auto pts_key = points_of(u, key);
        if (pts_a != pts_b || pts_a != pts_key)
            throw std::runtime_error("partner classes of line " + str(first) + " cover different points");
        const int ia = static_cast<int>(res.classes.size());
        res.classes.push_back({a, key, ia + 1, pts_a});
        res.classes.push_back({b, key, ia, pts_b});
    }
    std::vector<int> order(res.classes.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](int x, int y) { return res.classes[x].lines.front() < res.classes[y].lines.front(); });
    std::vector<int> pos(order.size());
    for (std::size_t i = 0; i < order.size(); ++i) pos[order[i]] = static_cast<int>(i);
    std::vector<LParallelClass> reordered;
    for (int o : order) {
        reordered.push_back(res.classes[o]);
        reordered.back().partner = pos[reordered.back().partner];
    }
    res.classes = std::move(reordered);
    for (int c = 0; c < static_cast<int>(res.classes.size()); ++c)
        for (LineId m : res.classes[c].lines) res.class_of[m] = c;
    return res;
}

TriplyRuledPartition triply_ruled_partition(Workspace& w, LineId l, LineId m, LineId n, LineId first_seed)
{
    const Unital& u = w.unital();
    const int q = u.order();
    if (!is_self_polar(w, l, m, n)) throw std::invalid_argument("lines do not form a self-polar triangle");
    const LineSet tri = sorted({l, m, n});
    const LineSet pool = minus(w.spread(m).lines, tri);
    if (first_seed >= 0 && !has(pool, first_seed)) throw std::invalid_argument("seed line is not in the spread of M");
    const LParallel lp = l_parallel_classes(w, l);
    const auto& star_l = w.spread(l).s_star;
    const auto& star_m = w.spread(m).s_star;
    const auto& star_n = w.spread(n).s_star;

    TriplyRuledPartition trp{l, m, n, {}};
    LineSet used;
    LineId seed = first_seed >= 0 ? first_seed : (pool.empty() ? -1 : pool.front());
    while (seed >= 0) {
        RuledSet rs;
        for (LineId s : star_l)
            if (u.meets(s, seed)) rs.l_ruling.push_back(s);
        const int c = lp.class_of[seed];
        if (c < 0) throw std::runtime_error("seed line " + str(seed) + " has no L-parallel class");
        rs.m_ruling = lp.classes[c].lines;
        rs.n_ruling = lp.classes[lp.classes[c].partner].lines;
        if (static_cast<int>(rs.l_ruling.size()) != q + 1)
            throw std::runtime_error(str(static_cast<int>(rs.l_ruling.size())) + " star lines of L meet seed " + str(seed));
        if (!std::includes(star_m.begin(), star_m.end(), rs.m_ruling.begin(), rs.m_ruling.end()))
            throw std::runtime_error("M-ruling of seed " + str(seed) + " leaves the star of M");
        if (!std::includes(star_n.begin(), star_n.end(), rs.n_ruling.begin(), rs.n_ruling.end()))
            throw std::runtime_error("N-ruling of seed " + str(seed) + " leaves the star of N");
        rs.points = points_of(u, rs.l_ruling);
        if (static_cast<int>(rs.points.size()) != (q + 1) * (q + 1) || points_of(u, rs.m_ruling) != rs.points ||
            points_of(u, rs.n_ruling) != rs.points)
            throw std::runtime_error("rulings from seed " + str(seed) + " cover different points");
        used.insert(used.end(), rs.m_ruling.begin(), rs.m_ruling.end());
        used = sorted(used);
        trp.sets.push_back(std::move(rs));
        const LineSet rest = minus(pool, used);
        seed = rest.empty() ? -1 : rest.front();
    }
    if (static_cast<int>(trp.sets.size()) != q - 2)
        throw std::runtime_error(str(static_cast<int>(trp.sets.size())) + " triply ruled sets instead of " + str(q - 2));
    std::vector<int> hits(u.v(), 0);
    for (LineId t : tri)
        for (PointId p : u.line(t)) ++hits[p];
    for (const auto& rs : trp.sets)
        for (PointId p : rs.points) ++hits[p];
    for (PointId p = 0; p < u.v(); ++p)
        if (hits[p] != 1) throw std::runtime_error("point " + str(p) + " is covered " + str(hits[p]) + " times");
    return trp;
}

LineSet subregular_spread(const Unital& u, const TriplyRuledPartition& trp, const std::vector<int>& choice)
{
    if (choice.size() != trp.sets.size()) throw std::invalid_argument("one ruling choice per triply ruled set");
    LineSet lines{trp.l, trp.m, trp.n};
    for (std::size_t i = 0; i < choice.size(); ++i) {
        const auto& rs = trp.sets[i];
        const LineSet* r = choice[i] == 0 ? &rs.l_ruling : choice[i] == 1 ? &rs.m_ruling : choice[i] == 2 ? &rs.n_ruling : nullptr;
        if (!r) throw std::invalid_argument("ruling choice must be 0, 1 or 2");
        lines.insert(lines.end(), r->begin(), r->end());
    }
    lines = sorted(lines);
    if (!is_spread(u, lines)) throw std::runtime_error("chosen rulings do not form a spread");
    return lines;
}

// ---------------------------------------------------------------------------
// A_ij

AijTable aij_table(Workspace& w, LineId l, int base_row)
{
    const Unital& u = w.unital();
    const int n = u.order();
    AijTable t;
    t.line = l;
    t.points = u.line(l);
    t.base = base_row;
    const PointId x1 = t.points.at(base_row);
    const LocalPlane& lp = w.plane(x1);
    const int pl = lp.local_of[l];
    const auto bundle = lp.plane->bundle(pl, lp.infinity);
    if (static_cast<int>(bundle.circles.size()) != n + 1) throw std::runtime_error("bundle has the wrong size");

    std::vector<std::pair<LineSet, design::BlockId>> cols;
    for (auto c : bundle.circles) {
        LineSet cell;
        for (int p : lp.circles().block(c))
            if (p != pl && p != lp.infinity) cell.push_back(lp.lines[p]);
        cols.push_back({sorted(cell), c});
    }
    std::sort(cols.begin(), cols.end());

    const int rows = n + 1;
    t.cells.assign(rows, std::vector<LineSet>(n + 1));
    std::vector<int> row_of(u.v(), -1);
    for (int i = 0; i < rows; ++i) row_of[t.points[i]] = i;
    for (int j = 0; j <= n; ++j) {
        t.cells[base_row][j] = cols[j].first;
        const auto pencil = lp.plane->pencil_of_circles(pl, cols[j].second);
        for (auto c : pencil.circles) {
            if (c == cols[j].second) continue;
            const int cls = lp.circle_class[c];
            if (cls < 0) throw std::runtime_error("pencil circle passes through infinity");
            for (LineId mline : lp.parallel.classes[cls].members) {
                const PointId x = u.meet_point(mline, l);
                if (x < 0 || row_of[x] < 0 || row_of[x] == base_row)
                    throw std::runtime_error("pencil class member " + str(mline) + " does not meet the line off the base point");
                t.cells[row_of[x]][j].push_back(mline);
            }
        }
    }
    for (int i = 0; i < rows; ++i) {
        LineSet all;
        for (auto& cell : t.cells[i]) {
            cell = sorted(cell);
            if (static_cast<int>(cell.size()) != n - 1)
                throw std::runtime_error("cell in row " + str(i) + " has " + str(static_cast<int>(cell.size())) + " lines");
            all.insert(all.end(), cell.begin(), cell.end());
        }
        LineSet expect;
        for (LineId k : u.lines_through(t.points[i]))
            if (k != l) expect.push_back(k);
        if (sorted(all) != expect) throw std::runtime_error("cells of row " + str(i) + " do not partition its lines");
    }
    return t;
}

bool same_columns(const AijTable& a, const AijTable& b)
{
    if (a.line != b.line || a.cells.size() != b.cells.size()) return false;
    auto columns = [](const AijTable& t) {
        std::vector<std::vector<LineSet>> cols(t.cells.empty() ? 0 : t.cells[0].size());
        for (std::size_t j = 0; j < cols.size(); ++j)
            for (const auto& row : t.cells) cols[j].push_back(row[j]);
        std::sort(cols.begin(), cols.end());
        return cols;
    };
    return columns(a) == columns(b);
}

// ---------------------------------------------------------------------------
// Flock properties

FlockMeet verify_flock_meet(Workspace& w, LineId l, LineId m, LineId n)
{
    const Unital& u = w.unital();
    FlockMeet fm;
    const PointId y = u.meet_point(m, n);
    if (y < 0 || u.on(y, l) || w.in_spread(l, m) || w.in_spread(l, n)) return fm;
    const LocalPlane& lp = w.plane(y);
    const int pm = lp.local_of[m];
    const int pn = lp.local_of[n];
    const auto arc_l = lp.circle_of_line(l);
    const auto flock = lp.plane->flock(pm, pn);
    if (std::find(flock.circles.begin(), flock.circles.end(), arc_l) == flock.circles.end()) return fm;
    fm.precondition = true;

    const auto& star = w.spread(l).s_star;
    LineId l1 = -1;
    for (LineId s : star)
        if (u.on(y, s)) l1 = s;
    design::BlockId circle = -1;
    for (auto c : lp.plane->bundle(pm, pn).circles)
        if (lp.circles().contains(c, lp.infinity)) circle = c;
    fm.clause1 = l1 >= 0 && circle >= 0 && lp.circles().contains(circle, lp.local_of[l1]);

    fm.clause2 = true;
    LineSet both;
    for (LineId s : star) {
        if (!u.meets(s, m)) continue;
        ++fm.star_lines_meeting;
        if (!u.meets(s, n))
            fm.clause2 = false;
        else if (s != l1)
            both.push_back(s);
    }

    PointId special = -1;
    for (PointId x : u.line(l)) {
        bool ok = true;
        for (PointId p : u.line(l1)) {
            const LineId k = u.line_through(x, p);
            if (k < 0) continue;
            for (LineId s : both)
                if (u.meets(k, s)) ok = false;
        }
        if (ok) {
            ++fm.special_points;
            special = x;
        }
    }
    if (fm.special_points == 1 && circle >= 0) {
        const LineId xy = u.line_through(special, y);
        fm.clause3 = xy >= 0 && lp.circles().contains(circle, lp.local_of[xy]);
    }
    return fm;
}

TangencyCheck check_tangent_spread_lines(Workspace& w, LineId l, PointId y)
{
    const Unital& u = w.unital();
    if (u.on(y, l)) throw std::invalid_argument("point lies on the line");
    TangencyCheck tc;
    const auto& sp = w.spread(l);
    LineId m = -1;
    for (LineId s : sp.lines)
        if (u.on(y, s)) m = s;
    const LineId n = polar_triple(w, l, m);
    const LocalPlane& lp = w.plane(y);
    const auto arc_l = lp.circle_of_line(l);
    std::set<design::BlockId> tangent, from_spread;
    for (int c = 0; c < lp.upper_circles; ++c)
        if (c != arc_l && lp.plane->tangent(c, arc_l)) tangent.insert(c);
    for (LineId j : sp.lines) {
        if (j == l || j == m || j == n) continue;
        ++tc.spread_lines;
        from_spread.insert(lp.circle_of_line(j));
    }
    tc.tangent_circles = static_cast<int>(tangent.size());
    tc.ok = tangent == from_spread && static_cast<int>(from_spread.size()) == tc.spread_lines;
    return tc;
}

}  // namespace hermit::unital
