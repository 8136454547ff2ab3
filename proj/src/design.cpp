#include "hermit/design.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <numeric>
#include <stdexcept>

#include <boost/dynamic_bitset.hpp>

namespace hermit::design {

namespace {

constexpr int kPairTableLimit = 4200;

std::size_t pair_slot(int v, PointId a, PointId b) { return static_cast<std::size_t>(a) * v + b; }

}  // namespace

Incidence::Incidence(int v, std::vector<Block> blocks) : v_(v), blocks_(std::move(blocks))
{
    if (v < 0) throw std::invalid_argument("negative point count");
    through_.assign(v, {});
    for (BlockId i = 0; i < b(); ++i) {
        auto& blk = blocks_[i];
        std::sort(blk.begin(), blk.end());
        if (std::adjacent_find(blk.begin(), blk.end()) != blk.end())
            throw std::invalid_argument("block " + std::to_string(i) + " repeats a point");
        for (PointId p : blk) {
            if (p < 0 || p >= v) throw std::invalid_argument("block " + std::to_string(i) + " has an out-of-range point");
            through_[p].push_back(i);
        }
    }
    // linearity: no point sees another point twice
    std::vector<int> seen(v, -1);
    for (PointId p = 0; p < v && linear_; ++p)
        for (BlockId blk : through_[p]) {
            for (PointId r : blocks_[blk]) {
                if (r == p) continue;
                if (seen[r] == p) {
                    linear_ = false;
                    break;
                }
                seen[r] = p;
            }
            if (!linear_) break;
        }
    if (linear_ && v <= kPairTableLimit) {
        pair_table_.assign(static_cast<std::size_t>(v) * v, -1);
        for (BlockId i = 0; i < b(); ++i)
            for (PointId x : blocks_[i])
                for (PointId y : blocks_[i])
                    if (x != y) pair_table_[pair_slot(v, x, y)] = i;
    }
}

bool Incidence::contains(BlockId blk, PointId p) const
{
    return std::binary_search(blocks_[blk].begin(), blocks_[blk].end(), p);
}

int Incidence::pair_multiplicity(PointId a, PointId b) const
{
    if (a == b) return degree(a);
    if (!pair_table_.empty()) return pair_table_[pair_slot(v_, a, b)] >= 0 ? 1 : 0;
    const auto& x = through_[a];
    const auto& y = through_[b];
    int n = 0;
    auto i = x.begin();
    auto j = y.begin();
    while (i != x.end() && j != y.end()) {
        if (*i == *j) {
            ++n;
            ++i;
            ++j;
        } else if (*i < *j) {
            ++i;
        } else {
            ++j;
        }
    }
    return n;
}

BlockId Incidence::block_of_pair(PointId a, PointId b) const
{
    if (!linear_) throw std::logic_error("block_of_pair on a structure with repeated pairs");
    if (a == b) return -1;
    if (!pair_table_.empty()) return pair_table_[pair_slot(v_, a, b)];
    for (BlockId blk : through_[a])
        if (contains(blk, b)) return blk;
    return -1;
}

BlockId Incidence::find_block(const Block& pts) const
{
    if (pts.empty() || pts[0] < 0 || pts[0] >= v_) return -1;
    if (linear_ && pts.size() >= 2) {
        if (pts[1] < 0 || pts[1] >= v_) return -1;
        const BlockId c = block_of_pair(pts[0], pts[1]);
        return c >= 0 && blocks_[c] == pts ? c : -1;
    }
    for (BlockId blk : through_[pts[0]])
        if (blocks_[blk] == pts) return blk;
    return -1;
}

int Incidence::meet(BlockId a, BlockId b) const
{
    const auto& x = blocks_[a];
    const auto& y = blocks_[b];
    int n = 0;
    auto i = x.begin();
    auto j = y.begin();
    while (i != x.end() && j != y.end()) {
        if (*i == *j) {
            ++n;
            ++i;
            ++j;
        } else if (*i < *j) {
            ++i;
        } else {
            ++j;
        }
    }
    return n;
}

Block Incidence::intersection(BlockId a, BlockId b) const
{
    Block out;
    std::set_intersection(blocks_[a].begin(), blocks_[a].end(), blocks_[b].begin(), blocks_[b].end(),
                          std::back_inserter(out));
    return out;
}

Incidence Incidence::canonical(std::vector<BlockId>* perm) const
{
    std::vector<BlockId> order(b());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](BlockId x, BlockId y) { return blocks_[x] < blocks_[y]; });
    std::vector<Block> sorted;
    sorted.reserve(b());
    for (BlockId i : order) sorted.push_back(blocks_[i]);
    if (perm) *perm = order;
    return Incidence(v_, std::move(sorted));
}

nlohmann::json to_json(const Incidence& inc)
{
    return {{"v", inc.v()}, {"blocks", inc.blocks()}};
}

Incidence incidence_from_json(const nlohmann::json& j)
{
    if (!j.is_object() || !j.contains("v") || !j.contains("blocks"))
        throw std::invalid_argument("incidence JSON needs \"v\" and \"blocks\"");
    if (!j["v"].is_number_integer()) throw std::invalid_argument("\"v\" must be an integer");
    const auto v = j["v"].get<std::int64_t>();
    if (v < 0 || v > 1'000'000) throw std::invalid_argument("\"v\" out of range");
    if (!j["blocks"].is_array()) throw std::invalid_argument("\"blocks\" must be an array");
    std::vector<Block> blocks;
    for (const auto& blk : j["blocks"]) {
        if (!blk.is_array()) throw std::invalid_argument("every block must be an array");
        Block b;
        for (const auto& p : blk) {
            if (!p.is_number_integer()) throw std::invalid_argument("block entries must be integers");
            b.push_back(p.get<PointId>());
        }
        blocks.push_back(std::move(b));
    }
    return Incidence(static_cast<int>(v), std::move(blocks));
}

DesignCheck check_t_design(const Incidence& inc, int t, int k, int lambda)
{
    DesignCheck out;
    const int v = inc.v();
    for (BlockId i = 0; i < inc.b(); ++i)
        if (static_cast<int>(inc.block(i).size()) != k) {
            out.failure = "block " + std::to_string(i) + " has " + std::to_string(inc.block(i).size()) + " points";
            return out;
        }
    if (t < 1 || t > 3) throw std::invalid_argument("t-design check supports t in 1..3");
    if (t == 1) {
        for (PointId p = 0; p < v; ++p)
            if (inc.degree(p) != lambda) {
                out.failure = "point " + std::to_string(p) + " lies on " + std::to_string(inc.degree(p)) + " blocks";
                return out;
            }
        out.ok = true;
        return out;
    }
    if (t == 2) {
        std::vector<std::uint16_t> count(static_cast<std::size_t>(v) * v, 0);
        for (const auto& blk : inc.blocks())
            for (std::size_t i = 0; i < blk.size(); ++i)
                for (std::size_t j = i + 1; j < blk.size(); ++j) ++count[pair_slot(v, blk[i], blk[j])];
        for (PointId a = 0; a < v; ++a)
            for (PointId b = a + 1; b < v; ++b)
                if (count[pair_slot(v, a, b)] != lambda) {
                    out.failure = "pair {" + std::to_string(a) + "," + std::to_string(b) + "} lies on " +
                                  std::to_string(count[pair_slot(v, a, b)]) + " blocks";
                    return out;
                }
        out.ok = true;
        return out;
    }
    if (v > 700) throw std::invalid_argument("3-design check limited to 700 points");
    auto c2 = [](std::int64_t x) { return x * (x - 1) / 2; };
    auto c3 = [](std::int64_t x) { return x * (x - 1) * (x - 2) / 6; };
    auto idx = [&](std::int64_t i, std::int64_t j, std::int64_t l) { return c3(l) + c2(j) + i; };
    std::vector<std::uint16_t> count(static_cast<std::size_t>(c3(v)), 0);
    for (const auto& blk : inc.blocks())
        for (std::size_t i = 0; i < blk.size(); ++i)
            for (std::size_t j = i + 1; j < blk.size(); ++j)
                for (std::size_t l = j + 1; l < blk.size(); ++l) ++count[idx(blk[i], blk[j], blk[l])];
    for (PointId l = 2; l < v; ++l)
        for (PointId j = 1; j < l; ++j)
            for (PointId i = 0; i < j; ++i)
                if (count[idx(i, j, l)] != lambda) {
                    out.failure = "triple {" + std::to_string(i) + "," + std::to_string(j) + "," + std::to_string(l) +
                                  "} lies on " + std::to_string(count[idx(i, j, l)]) + " blocks";
                    return out;
                }
    out.ok = true;
    return out;
}

// ---------------------------------------------------------------------------

InversivePlane::InversivePlane(Incidence circles) : inc_(std::move(circles))
{
    const int m = static_cast<int>(std::lround(std::sqrt(std::max(0, inc_.v() - 1))));
    if (m < 1 || m * m + 1 != inc_.v()) throw std::invalid_argument("point count is not m^2+1");
    order_ = m;
    const auto check = check_t_design(inc_, 3, m + 1, 1);
    if (!check.ok) throw std::invalid_argument("not a 3-(m^2+1,m+1,1) design: " + check.failure);
}

Bundle InversivePlane::bundle(PointId p1, PointId p2) const
{
    if (p1 == p2) throw std::invalid_argument("bundle carriers must differ");
    Bundle out{p1, p2, {}};
    for (BlockId c : inc_.blocks_through(p1))
        if (inc_.contains(c, p2)) out.circles.push_back(c);
    return out;
}

Flock InversivePlane::flock(PointId p1, PointId p2) const
{
    const Bundle bu = bundle(p1, p2);
    Flock out{p1, p2, {}};
    for (BlockId c = 0; c < inc_.b(); ++c) {
        if (inc_.contains(c, p1) || inc_.contains(c, p2)) continue;
        bool all = true;
        for (BlockId d : bu.circles)
            if (!tangent(c, d)) {
                all = false;
                break;
            }
        if (all) out.circles.push_back(c);
    }
    std::vector<int> cover(inc_.v(), 0);
    for (BlockId c : out.circles)
        for (PointId p : inc_.block(c)) ++cover[p];
    for (PointId p = 0; p < inc_.v(); ++p) {
        const int want = (p == p1 || p == p2) ? 0 : 1;
        if (cover[p] != want)
            throw std::runtime_error("circles tangent to the bundle do not partition the plane (point " +
                                     std::to_string(p) + " covered " + std::to_string(cover[p]) + " times)");
    }
    if (static_cast<int>(out.circles.size()) != order_ - 1) throw std::runtime_error("flock has the wrong size");
    return out;
}

std::vector<std::vector<BlockId>> InversivePlane::flocks_by_search(PointId p1, PointId p2, int limit) const
{
    std::vector<BlockId> usable;
    for (BlockId c = 0; c < inc_.b(); ++c)
        if (!inc_.contains(c, p1) && !inc_.contains(c, p2)) usable.push_back(c);
    std::vector<char> covered(inc_.v(), 0);
    covered[p1] = covered[p2] = 1;
    std::vector<std::vector<BlockId>> found;
    std::vector<BlockId> chosen;
    auto fits = [&](BlockId c) {
        for (PointId p : inc_.block(c))
            if (covered[p]) return false;
        return true;
    };
    auto rec = [&](auto&& self) -> void {
        if (static_cast<int>(found.size()) >= limit) return;
        // least-candidate uncovered point
        PointId best = -1;
        std::vector<BlockId> best_cands;
        for (PointId p = 0; p < inc_.v(); ++p) {
            if (covered[p]) continue;
            std::vector<BlockId> cands;
            for (BlockId c : inc_.blocks_through(p))
                if (!inc_.contains(c, p1) && !inc_.contains(c, p2) && fits(c)) cands.push_back(c);
            if (best < 0 || cands.size() < best_cands.size()) {
                best = p;
                best_cands = std::move(cands);
                if (best_cands.empty()) break;
            }
        }
        if (best < 0) {
            auto sol = chosen;
            std::sort(sol.begin(), sol.end());
            found.push_back(std::move(sol));
            return;
        }
        for (BlockId c : best_cands) {
            for (PointId p : inc_.block(c)) covered[p] = 1;
            chosen.push_back(c);
            self(self);
            chosen.pop_back();
            for (PointId p : inc_.block(c)) covered[p] = 0;
        }
    };
    rec(rec);
    return found;
}

PencilOfCircles InversivePlane::pencil_of_circles(PointId p, BlockId c) const
{
    if (!inc_.contains(c, p)) throw std::invalid_argument("pencil carrier is not on the base circle");
    PencilOfCircles out{p, c, {}};
    for (BlockId d : inc_.blocks_through(p))
        if (d == c || inc_.meet(c, d) == 1) out.circles.push_back(d);
    if (static_cast<int>(out.circles.size()) != order_)
        throw std::runtime_error("pencil has " + std::to_string(out.circles.size()) + " circles");
    for (std::size_t i = 0; i < out.circles.size(); ++i)
        for (std::size_t j = i + 1; j < out.circles.size(); ++j)
            if (inc_.meet(out.circles[i], out.circles[j]) != 1)
                throw std::runtime_error("pencil circles are not mutually tangent");
    return out;
}

// ---------------------------------------------------------------------------

bool verify_isomorphism(const Incidence& a, const Incidence& b, IsoMap& map)
{
    if (a.v() != b.v() || a.b() != b.b() || static_cast<int>(map.points.size()) != a.v()) return false;
    std::vector<char> hit(b.v(), 0);
    for (PointId p : map.points) {
        if (p < 0 || p >= b.v() || hit[p]) return false;
        hit[p] = 1;
    }
    map.blocks.assign(a.b(), -1);
    std::vector<char> bhit(b.b(), 0);
    for (BlockId i = 0; i < a.b(); ++i) {
        Block img;
        for (PointId p : a.block(i)) img.push_back(map.points[p]);
        std::sort(img.begin(), img.end());
        const BlockId j = b.find_block(img);
        if (j < 0 || bhit[j]) return false;
        bhit[j] = 1;
        map.blocks[i] = j;
    }
    return true;
}

namespace {

using Bits = boost::dynamic_bitset<>;

std::vector<std::uint8_t> multiplicities(const Incidence& s)
{
    const int v = s.v();
    std::vector<std::uint8_t> m(static_cast<std::size_t>(v) * v, 0);
    for (const auto& blk : s.blocks())
        for (PointId x : blk)
            for (PointId y : blk)
                if (x != y && m[pair_slot(v, x, y)] < 255) ++m[pair_slot(v, x, y)];
    return m;
}

// Joint colour refinement of both structures; returns false if the colour
// histograms ever disagree.
bool refine_colours(const Incidence& a, const Incidence& b, const std::vector<std::uint8_t>& ma,
                    const std::vector<std::uint8_t>& mb, std::vector<int>& ca, std::vector<int>& cb, int& classes)
{
    const int v = a.v();
    auto initial = [](const Incidence& s, PointId p) {
        std::vector<int> key{s.degree(p)};
        for (BlockId blk : s.blocks_through(p)) key.push_back(static_cast<int>(s.block(blk).size()));
        std::sort(key.begin() + 1, key.end());
        return key;
    };
    std::map<std::vector<int>, int> names;
    ca.assign(v, 0);
    cb.assign(v, 0);
    for (PointId p = 0; p < v; ++p) ca[p] = names.try_emplace(initial(a, p), static_cast<int>(names.size())).first->second;
    for (PointId p = 0; p < v; ++p) cb[p] = names.try_emplace(initial(b, p), static_cast<int>(names.size())).first->second;
    auto histogram_matches = [&](int n) {
        std::vector<int> ha(n, 0);
        std::vector<int> hb(n, 0);
        for (PointId p = 0; p < v; ++p) {
            ++ha[ca[p]];
            ++hb[cb[p]];
        }
        return ha == hb;
    };
    classes = static_cast<int>(names.size());
    if (!histogram_matches(classes)) return false;
    for (;;) {
        std::map<std::vector<std::int64_t>, int> next;
        auto signature = [&](const std::vector<std::uint8_t>& m, const std::vector<int>& col, PointId p) {
            std::vector<std::int64_t> sig;
            sig.reserve(v);
            for (PointId r = 0; r < v; ++r)
                if (r != p) sig.push_back(static_cast<std::int64_t>(m[pair_slot(v, p, r)]) * classes + col[r]);
            std::sort(sig.begin(), sig.end());
            sig.insert(sig.begin(), col[p]);
            return sig;
        };
        std::vector<int> na(v);
        std::vector<int> nb(v);
        for (PointId p = 0; p < v; ++p) na[p] = next.try_emplace(signature(ma, ca, p), static_cast<int>(next.size())).first->second;
        for (PointId p = 0; p < v; ++p) nb[p] = next.try_emplace(signature(mb, cb, p), static_cast<int>(next.size())).first->second;
        const int n = static_cast<int>(next.size());
        ca.swap(na);
        cb.swap(nb);
        if (!histogram_matches(n)) {
            classes = n;
            return false;
        }
        const bool stable = n == classes;
        classes = n;
        if (stable) return true;
    }
}

class IsoSearch {
public:
    IsoSearch(const Incidence& a, const Incidence& b, std::int64_t limit) : a_(a), b_(b), limit_(limit) {}

    std::optional<IsoMap> run(IsoStats& stats)
    {
        const int v = a_.v();
        ma_ = multiplicities(a_);
        mb_ = multiplicities(b_);
        std::vector<int> ca;
        std::vector<int> cb;
        int classes = 0;
        const bool ok = refine_colours(a_, b_, ma_, mb_, ca, cb, classes);
        stats.refinement_colours = classes;
        if (!ok) {
            stats.exhausted = true;
            return std::nullopt;
        }
        int maxm = 0;
        for (auto x : mb_) maxm = std::max<int>(maxm, x);
        for (auto x : ma_)
            if (x > maxm) {
                stats.exhausted = true;
                return std::nullopt;
            }
        // neighbours of each b-point by multiplicity
        nbr_.assign(maxm + 1, std::vector<Bits>(v, Bits(v)));
        for (PointId w = 0; w < v; ++w)
            for (PointId r = 0; r < v; ++r)
                if (r != w) nbr_[mb_[pair_slot(v, w, r)]][w].set(r);
        linear_ = a_.is_linear() && b_.is_linear();
        if (linear_) {
            bblock_bits_.assign(b_.b(), Bits(v));
            for (BlockId i = 0; i < b_.b(); ++i)
                for (PointId p : b_.block(i)) bblock_bits_[i].set(p);
            ablock_bits_.assign(a_.b(), Bits(v));
            for (BlockId i = 0; i < a_.b(); ++i)
                for (PointId p : a_.block(i)) ablock_bits_[i].set(p);
        }
        State s;
        s.dom.assign(v, Bits(v));
        for (PointId u = 0; u < v; ++u)
            for (PointId w = 0; w < v; ++w)
                if (ca[u] == cb[w]) s.dom[u].set(w);
        s.image.assign(v, -1);
        s.used = Bits(v);
        s.bmap.assign(a_.b(), -1);
        s.bused.assign(b_.b(), 0);
        s.mapped_on_block.assign(a_.b(), 0);
        s.mapped_neighbours.assign(v, 0);
        std::optional<IsoMap> result;
        aborted_ = false;
        search(s, result, stats);
        stats.exhausted = !aborted_;
        return result;
    }

private:
    struct State {
        std::vector<Bits> dom;
        std::vector<PointId> image;
        Bits used;
        std::vector<BlockId> bmap;
        std::vector<char> bused;
        std::vector<int> mapped_on_block;
        std::vector<int> mapped_neighbours;
        int assigned = 0;
    };

    bool assign(State& s, PointId u, PointId w, std::vector<PointId>& forced)
    {
        const int v = a_.v();
        if (!s.dom[u].test(w) || s.used.test(w)) return false;
        s.image[u] = w;
        s.used.set(w);
        ++s.assigned;
        s.dom[u].reset();
        s.dom[u].set(w);
        for (PointId t = 0; t < v; ++t) {
            if (s.image[t] >= 0) continue;
            const auto m = ma_[pair_slot(v, u, t)];
            s.dom[t] &= nbr_[m][w];
            if (m > 0) ++s.mapped_neighbours[t];
        }
        if (linear_) {
            for (BlockId blk : a_.blocks_through(u)) {
                if (++s.mapped_on_block[blk] != 2) continue;
                PointId other = -1;
                for (PointId t : a_.block(blk))
                    if (t != u && s.image[t] >= 0) other = t;
                const BlockId img = b_.block_of_pair(w, s.image[other]);
                if (img < 0 || s.bused[img] || b_.block(img).size() != a_.block(blk).size()) return false;
                s.bmap[blk] = img;
                s.bused[img] = 1;
                const Bits& on = bblock_bits_[img];
                const Bits& mine = ablock_bits_[blk];
                for (PointId t = 0; t < v; ++t) {
                    if (s.image[t] >= 0) continue;
                    if (mine.test(t))
                        s.dom[t] &= on;
                    else
                        s.dom[t] -= on;
                }
            }
        }
        for (PointId t = 0; t < v; ++t) {
            if (s.image[t] >= 0) continue;
            const auto c = s.dom[t].count();
            if (c == 0) return false;
            if (c == 1) forced.push_back(t);
        }
        return true;
    }

    bool assign_and_propagate(State& s, PointId u, PointId w)
    {
        std::vector<PointId> forced;
        if (!assign(s, u, w, forced)) return false;
        while (!forced.empty()) {
            const PointId t = forced.back();
            forced.pop_back();
            if (s.image[t] >= 0) continue;
            const auto x = s.dom[t].find_first();
            if (x == Bits::npos) return false;
            if (!assign(s, t, static_cast<PointId>(x), forced)) return false;
        }
        return true;
    }

    PointId choose(const State& s) const
    {
        const int v = a_.v();
        if (s.assigned == 0) {
            PointId best = 0;
            for (PointId u = 1; u < v; ++u)
                if (a_.degree(u) > a_.degree(best)) best = u;
            return best;
        }
        PointId best = -1;
        std::size_t best_size = 0;
        for (PointId u = 0; u < v; ++u) {
            if (s.image[u] >= 0) continue;
            const auto c = s.dom[u].count();
            if (best < 0 || c < best_size ||
                (c == best_size && s.mapped_neighbours[u] > s.mapped_neighbours[best])) {
                best = u;
                best_size = c;
            }
        }
        return best;
    }

    void search(State& s, std::optional<IsoMap>& result, IsoStats& stats)
    {
        if (result || aborted_) return;
        if (s.assigned == a_.v()) {
            IsoMap m{s.image, {}};
            if (verify_isomorphism(a_, b_, m)) result = std::move(m);
            return;
        }
        const PointId u = choose(s);
        for (auto w = s.dom[u].find_first(); w != Bits::npos; w = s.dom[u].find_next(w)) {
            if (limit_ > 0 && stats.nodes >= limit_) {
                aborted_ = true;
                return;
            }
            ++stats.nodes;
            State next = s;
            if (assign_and_propagate(next, u, static_cast<PointId>(w))) search(next, result, stats);
            if (result || aborted_) return;
            ++stats.backtracks;
        }
    }

    const Incidence& a_;
    const Incidence& b_;
    std::int64_t limit_;
    bool aborted_ = false;
    bool linear_ = false;
    std::vector<std::uint8_t> ma_;
    std::vector<std::uint8_t> mb_;
    std::vector<std::vector<Bits>> nbr_;
    std::vector<Bits> ablock_bits_;
    std::vector<Bits> bblock_bits_;
};

}  // namespace

std::optional<IsoMap> find_isomorphism(const Incidence& a, const Incidence& b, IsoStats* stats, std::int64_t node_limit)
{
    IsoStats local;
    IsoStats& st = stats ? *stats : local;
    st = IsoStats{};
    auto fail = [&]() -> std::optional<IsoMap> {
        st.exhausted = true;
        return std::nullopt;
    };
    if (a.v() != b.v() || a.b() != b.b() || a.is_linear() != b.is_linear()) return fail();
    std::vector<int> da;
    std::vector<int> db;
    for (PointId p = 0; p < a.v(); ++p) {
        da.push_back(a.degree(p));
        db.push_back(b.degree(p));
    }
    std::sort(da.begin(), da.end());
    std::sort(db.begin(), db.end());
    if (da != db) return fail();
    std::vector<std::size_t> ka;
    std::vector<std::size_t> kb;
    for (const auto& blk : a.blocks()) ka.push_back(blk.size());
    for (const auto& blk : b.blocks()) kb.push_back(blk.size());
    std::sort(ka.begin(), ka.end());
    std::sort(kb.begin(), kb.end());
    if (ka != kb) return fail();
    if (a.v() == 0) return IsoMap{};
    IsoSearch search(a, b, node_limit);
    return search.run(st);
}

namespace {

class LinearSearch {
public:
    LinearSearch(const Incidence& a, const Incidence& b, const PairRelation& rel, std::int64_t limit)
        : a_(a), b_(b), rel_(rel), limit_(limit)
    {
    }

    struct State {
        std::vector<PointId> pt;   // a -> b
        std::vector<PointId> inv;  // b -> a
        std::vector<BlockId> ln;     // a -> b
        std::vector<BlockId> lninv;  // b -> a
        std::vector<PointId> mapped;
        std::vector<BlockId> mapped_lines;
    };

    std::optional<IsoMap> run(const std::vector<std::pair<PointId, PointId>>& seed, IsoStats& st)
    {
        State s;
        s.pt.assign(a_.v(), -1);
        s.inv.assign(b_.v(), -1);
        s.ln.assign(a_.b(), -1);
        s.lninv.assign(b_.b(), -1);
        auto res = dfs(s, seed, st);
        st.exhausted = !hit_limit_;
        return res;
    }

private:
    static PointId meet(const Incidence& inc, BlockId x, BlockId y)
    {
        const auto m = inc.intersection(x, y);
        return m.size() == 1 ? m.front() : -1;
    }

    bool assign(State& s, PointId p, PointId img, std::vector<PointId>& queue) const
    {
        if (s.pt[p] >= 0) return s.pt[p] == img;
        if (img < 0 || s.inv[img] >= 0) return false;
        s.pt[p] = img;
        s.inv[img] = p;
        queue.push_back(p);
        return true;
    }

    bool close(State& s, std::vector<PointId> queue) const
    {
        std::vector<BlockId> lqueue;
        while (!queue.empty() || !lqueue.empty()) {
            if (!queue.empty()) {
                const PointId p = queue.back();
                queue.pop_back();
                const PointId ip = s.pt[p];
                for (PointId r : s.mapped) {
                    if (rel_ && !rel_(p, r, ip, s.pt[r])) return false;
                    const BlockId l = a_.block_of_pair(p, r);
                    const BlockId il = b_.block_of_pair(ip, s.pt[r]);
                    if (l < 0 || il < 0) return false;
                    if (s.ln[l] >= 0) {
                        if (s.ln[l] != il) return false;
                        continue;
                    }
                    if (s.lninv[il] >= 0) return false;
                    s.ln[l] = il;
                    s.lninv[il] = l;
                    s.mapped_lines.push_back(l);
                    lqueue.push_back(l);
                }
                s.mapped.push_back(p);
                continue;
            }
            const BlockId l = lqueue.back();
            lqueue.pop_back();
            const BlockId il = s.ln[l];
            // mapped lines meeting l must map to lines meeting il, and no others may
            int meeting = 0;
            for (PointId x : a_.block(l))
                for (BlockId m : a_.blocks_through(x)) {
                    if (m == l || s.ln[m] < 0) continue;
                    ++meeting;
                    const PointId known = s.pt[x];
                    if (known >= 0) {
                        if (!b_.contains(il, known) || !b_.contains(s.ln[m], known)) return false;
                    } else if (!assign(s, x, meet(b_, il, s.ln[m]), queue)) {
                        return false;
                    }
                }
            int image_meeting = 0;
            for (PointId y : b_.block(il))
                for (BlockId m : b_.blocks_through(y)) image_meeting += m != il && s.lninv[m] >= 0;
            if (meeting != image_meeting) return false;
            for (PointId x : a_.block(l))
                if (s.pt[x] >= 0 && !b_.contains(s.ln[l], s.pt[x])) return false;
        }
        return true;
    }

    bool consistent(const State& s, PointId p, PointId c) const
    {
        if (!rel_) return true;
        for (PointId r : s.mapped)
            if (!rel_(p, r, c, s.pt[r])) return false;
        return true;
    }

    std::optional<IsoMap> dfs(const State& from, const std::vector<std::pair<PointId, PointId>>& add, IsoStats& st)
    {
        if (limit_ > 0 && st.nodes >= limit_) {
            hit_limit_ = true;
            return std::nullopt;
        }
        ++st.nodes;
        State s = from;
        std::vector<PointId> queue;
        for (auto [p, img] : add)
            if (!assign(s, p, img, queue)) {
                ++st.backtracks;
                return std::nullopt;
            }
        if (!close(s, queue)) {
            ++st.backtracks;
            return std::nullopt;
        }
        if (static_cast<int>(s.mapped.size()) == a_.v()) {
            IsoMap map{s.pt, {}};
            if (verify_isomorphism(a_, b_, map)) return map;
            ++st.backtracks;
            return std::nullopt;
        }
        // branch on an unmapped point of a mapped line, else on any unmapped point
        PointId p = -1;
        BlockId carrier = -1;
        for (BlockId l : s.mapped_lines) {
            for (PointId x : a_.block(l))
                if (s.pt[x] < 0) {
                    p = x;
                    carrier = l;
                    break;
                }
            if (p >= 0) break;
        }
        if (p < 0)
            for (PointId x = 0; x < a_.v() && p < 0; ++x)
                if (s.pt[x] < 0) p = x;
        std::vector<PointId> cands;
        if (carrier >= 0) {
            cands = b_.block(s.ln[carrier]);
        } else {
            cands.resize(b_.v());
            std::iota(cands.begin(), cands.end(), 0);
        }
        for (PointId c : cands) {
            if (s.inv[c] >= 0 || !consistent(s, p, c)) continue;
            if (auto r = dfs(s, {{p, c}}, st)) return r;
            if (hit_limit_) return std::nullopt;
        }
        ++st.backtracks;
        return std::nullopt;
    }

    const Incidence& a_;
    const Incidence& b_;
    const PairRelation& rel_;
    std::int64_t limit_;
    bool hit_limit_ = false;
};

std::array<PointId, 4> quadrangle(const Incidence& inc)
{
    const PointId p0 = 0, p1 = 1;
    const BlockId l01 = inc.block_of_pair(p0, p1);
    PointId p2 = -1;
    for (PointId x = 0; x < inc.v() && p2 < 0; ++x)
        if (!inc.contains(l01, x)) p2 = x;
    if (p2 < 0) throw std::invalid_argument("plane has no triangle");
    const BlockId l02 = inc.block_of_pair(p0, p2), l12 = inc.block_of_pair(p1, p2);
    for (PointId x = 0; x < inc.v(); ++x)
        if (!inc.contains(l01, x) && !inc.contains(l02, x) && !inc.contains(l12, x)) return {p0, p1, p2, x};
    throw std::invalid_argument("plane has no quadrangle");
}

}  // namespace

std::optional<IsoMap> find_linear_isomorphism(const Incidence& a, const Incidence& b,
                                              const std::vector<std::pair<PointId, PointId>>& seed,
                                              const PairRelation& respects, IsoStats* stats, std::int64_t node_limit)
{
    if (a.v() != b.v() || a.b() != b.b() || !a.is_linear() || !b.is_linear())
        throw std::invalid_argument("linear isomorphism search needs two linear structures of the same size");
    IsoStats local;
    IsoStats& st = stats ? *stats : local;
    st = IsoStats{};
    LinearSearch search(a, b, respects, node_limit);
    return search.run(seed, st);
}

std::optional<IsoMap> find_plane_isomorphism(const Incidence& a, const Incidence& b, IsoStats* stats,
                                             std::int64_t node_limit)
{
    if (a.v() != b.v() || a.b() != b.b() || !a.is_linear() || !b.is_linear() || a.v() < 4)
        throw std::invalid_argument("plane isomorphism needs two linear structures of the same size");
    const auto qa = quadrangle(a);
    const auto qb = quadrangle(b);
    std::vector<std::pair<PointId, PointId>> seed;
    for (int i = 0; i < 4; ++i) seed.push_back({qa[i], qb[i]});
    return find_linear_isomorphism(a, b, seed, {}, stats, node_limit);
}

}  // namespace hermit::design
