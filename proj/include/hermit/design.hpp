#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

namespace hermit::design {

using PointId = std::int32_t;
using BlockId = std::int32_t;
/// Sorted point ids.
using Block = std::vector<PointId>;

/// Points 0..v-1 versus a list of blocks, with point and pair indexes.
///
/// Blocks are stored sorted. When every pair of points lies in at most one
/// block the structure is "linear" and block_of_pair() answers from a table.
class Incidence {
public:
    Incidence() = default;
    /// Throws std::invalid_argument on out-of-range or repeated points.
    Incidence(int v, std::vector<Block> blocks);

    int v() const { return v_; }
    int b() const { return static_cast<int>(blocks_.size()); }
    const std::vector<Block>& blocks() const { return blocks_; }
    const Block& block(BlockId i) const { return blocks_[i]; }
    const std::vector<BlockId>& blocks_through(PointId p) const { return through_[p]; }
    int degree(PointId p) const { return static_cast<int>(through_[p].size()); }
    bool contains(BlockId blk, PointId p) const;

    bool is_linear() const { return linear_; }
    /// Number of blocks containing both points.
    int pair_multiplicity(PointId a, PointId b) const;
    /// The block through two distinct points of a linear structure, or -1.
    /// Throws std::logic_error on a non-linear structure.
    BlockId block_of_pair(PointId a, PointId b) const;
    /// Id of a block with exactly this point set, or -1.
    BlockId find_block(const Block& pts) const;
    /// |B1 ∩ B2|.
    int meet(BlockId a, BlockId b) const;
    Block intersection(BlockId a, BlockId b) const;

    /// Same structure with blocks in lexicographic order; perm[new] = old.
    Incidence canonical(std::vector<BlockId>* perm = nullptr) const;

    bool operator==(const Incidence& o) const { return v_ == o.v_ && blocks_ == o.blocks_; }

private:
    int v_ = 0;
    std::vector<Block> blocks_;
    std::vector<std::vector<BlockId>> through_;
    bool linear_ = true;
    std::vector<BlockId> pair_table_;  // v*v, only when linear and v is small
};

/// {"v": v, "blocks": [[...], ...]}, blocks as stored.
nlohmann::json to_json(const Incidence& inc);
/// Throws std::invalid_argument on malformed input.
Incidence incidence_from_json(const nlohmann::json& j);

struct DesignCheck {
    bool ok = false;
    std::string failure;
};

/// Every block has k points and every t-subset (t <= 3) lies in exactly lambda blocks.
DesignCheck check_t_design(const Incidence& inc, int t, int k, int lambda);
inline bool is_t_design(const Incidence& inc, int t, int k, int lambda) { return check_t_design(inc, t, k, lambda).ok; }

// ---------------------------------------------------------------------------
// Inversive planes

struct Bundle {
    PointId p1 = -1;
    PointId p2 = -1;
    std::vector<BlockId> circles;
};

struct Flock {
    PointId p1 = -1;
    PointId p2 = -1;
    std::vector<BlockId> circles;
};

struct PencilOfCircles {
    PointId carrier = -1;
    BlockId base = -1;
    std::vector<BlockId> circles;  // sorted, includes base
};

/// A 3-(m^2+1, m+1, 1) design; circles are blocks.
class InversivePlane {
public:
    /// Throws std::invalid_argument unless the structure is a 3-design of that shape.
    explicit InversivePlane(Incidence circles);

    const Incidence& incidence() const { return inc_; }
    int order() const { return order_; }
    bool tangent(BlockId a, BlockId b) const { return inc_.meet(a, b) == 1; }

    Bundle bundle(PointId p1, PointId p2) const;
    /// Circles tangent to every circle of the bundle; throws std::runtime_error
    /// if they do not partition the points other than the carriers.
    Flock flock(PointId p1, PointId p2) const;
    /// All flocks with these carriers, by exact-cover search (stops after limit).
    std::vector<std::vector<BlockId>> flocks_by_search(PointId p1, PointId p2, int limit = 16) const;
    /// C together with the circles through p meeting C only in p; throws
    /// std::runtime_error if they are not m mutually tangent circles.
    PencilOfCircles pencil_of_circles(PointId p, BlockId c) const;

private:
    Incidence inc_;
    int order_ = 0;
};

// ---------------------------------------------------------------------------
// Isomorphism search

struct IsoMap {
    std::vector<PointId> points;  // a-point -> b-point
    std::vector<BlockId> blocks;  // a-block -> b-block
};

struct IsoStats {
    std::int64_t nodes = 0;
    std::int64_t backtracks = 0;
    int refinement_colours = 0;
    bool exhausted = false;  // true when the search finished without hitting the node limit
};

/// Checks that the point map is a bijection carrying blocks onto blocks; fills in the block map.
bool verify_isomorphism(const Incidence& a, const Incidence& b, IsoMap& map);

/// Backtracking search with colour refinement and forward checking; the
/// first solution in search order is returned, verified. node_limit <= 0 means unbounded.
std::optional<IsoMap> find_isomorphism(const Incidence& a, const Incidence& b, IsoStats* stats = nullptr,
                                       std::int64_t node_limit = 0);

/// rel(a1, a2, b1, b2): may a1 -> b1 and a2 -> b2 be combined.
using PairRelation = std::function<bool(PointId, PointId, PointId, PointId)>;

/// Isomorphism of linear spaces by propagation: once two points are mapped
/// their join is, and once two lines are mapped their meet is. Branches on
/// one point at a time, starting from the seed pairs; complete for every
/// isomorphism extending the seed. Throws std::invalid_argument unless both
/// structures are linear with equal numbers of points and lines.
std::optional<IsoMap> find_linear_isomorphism(const Incidence& a, const Incidence& b,
                                              const std::vector<std::pair<PointId, PointId>>& seed,
                                              const PairRelation& respects = {}, IsoStats* stats = nullptr,
                                              std::int64_t node_limit = 0);

/// Projective planes: the seed sends a quadrangle of a to a quadrangle of b,
/// which loses nothing when b is Desarguesian.
std::optional<IsoMap> find_plane_isomorphism(const Incidence& a, const Incidence& b, IsoStats* stats = nullptr,
                                             std::int64_t node_limit = 0);

}  // namespace hermit::design
