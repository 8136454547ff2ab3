#pragma once

#include <algorithm>
#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "hermit/design.hpp"
#include "hermit/galois.hpp"
#include "hermit/projgeom.hpp"

namespace hermit::unital {

using design::Block;
using design::Incidence;
using PointId = std::int32_t;
using LineId = std::int32_t;
using LineSet = std::vector<LineId>;  // sorted

/// Points 0..n^3 with lines of n+1 points. Loading does not require the
/// 2-design property so that damaged inputs can be run through the checks.
class Unital {
public:
    Unital() = default;
    /// Throws std::invalid_argument unless all blocks have n+1 points and v = n^3+1.
    explicit Unital(Incidence inc, std::string construction = "external");

    int order() const { return n_; }
    int v() const { return inc_.v(); }
    int b() const { return inc_.b(); }
    const Incidence& incidence() const { return inc_; }
    const std::string& construction() const { return construction_; }

    const Block& line(LineId l) const { return inc_.block(l); }
    const std::vector<LineId>& lines_through(PointId p) const { return inc_.blocks_through(p); }
    bool on(PointId p, LineId l) const { return inc_.contains(l, p); }
    /// Unique line through two points, -1 if there is none or more than one.
    LineId line_through(PointId a, PointId b) const;
    bool meets(LineId a, LineId b) const { return a == b || inc_.meet(a, b) > 0; }
    /// Common point of two lines meeting once, else -1.
    PointId meet_point(LineId a, LineId b) const;

    /// 2-(n^3+1, n+1, 1)?
    design::DesignCheck design_check() const { return design::check_t_design(inc_, 2, n_ + 1, 1); }

private:
    Incidence inc_;
    int n_ = 0;
    std::string construction_;
};

/// Incidence JSON plus "order" and "construction".
nlohmann::json to_json(const Unital& u);
/// Throws std::invalid_argument on malformed input.
Unital unital_from_json(const nlohmann::json& j);

/// The Hermitian curve of PG(2,q^2) with its secant-line sections.
struct HermitianUnital {
    std::shared_ptr<projgeom::Space> plane;  // PG(2,q^2)
    Unital unital;
    std::vector<projgeom::PointId> pg_point;  // unital point -> plane point
    std::vector<int> pg_line;                 // unital line -> plane line
    int tangent_lines = 0;
    int secant_lines = 0;
};

/// q = 2^e; the points are zeros of x0^(q+1) + x1^(q+1) + x2^(q+1).
/// Unital points follow the plane's point order; lines are in lexicographic order.
HermitianUnital hermitian_unital(int e);

/// Rewires one line so that it closes a quadrilateral with a triangle of lines.
Unital onan_mutation(const Unital& u, std::uint32_t seed);
/// Replaces one point of one line by a point off that line.
Unital single_line_mutation(const Unital& u, std::uint32_t seed);

// ---------------------------------------------------------------------------
// Condition (I): no four lines pairwise meeting in six distinct points

struct OnanConfiguration {
    std::vector<LineId> lines;    // sorted
    std::vector<PointId> points;  // the six meeting points, sorted
};

struct OnanResult {
    std::vector<OnanConfiguration> found;  // at most `limit` stored
    std::int64_t total = 0;
    std::int64_t triangles = 0;
    bool sampled = false;
};

/// Triangle extension over ordered line triples; first_lines restricts the
/// least line of each configuration (empty = all lines).
OnanResult check_onan(const Unital& u, int limit = 1000, const std::vector<LineId>& first_lines = {});

/// Independent 4-subset test.
bool is_onan_configuration(const Unital& u, const std::vector<LineId>& lines);

// ---------------------------------------------------------------------------
// Condition (II)

struct ConditionII {
    bool ok = false;
    std::int64_t instances = 0;  // (x, M, L, y') quadruples checked
    bool always_unique = true;   // M' unique in every instance
    std::int64_t points_checked = 0;
    // first counterexample
    PointId x = -1;
    LineId l = -1;
    LineId m = -1;
    PointId y = -1;
};

/// points empty = every point.
ConditionII check_condition_II(const Unital& u, const std::vector<PointId>& points = {});

// ---------------------------------------------------------------------------
// x-parallelism and the inversive planes I(x)

struct ParallelClass {
    LineSet key;      // lines through x meeting the members
    LineSet members;  // lines missing x
    LineId representative() const { return members.front(); }
};

struct XParallel {
    PointId x = -1;
    std::vector<ParallelClass> classes;  // ordered by representative
    std::vector<int> class_of;           // line -> class index, -1 for lines through x
};

/// Throws std::runtime_error if some class does not have n members.
XParallel x_parallel_classes(const Unital& u, PointId x);

/// I(x): local points are the lines through x (sorted) then infinity.
struct LocalPlane {
    PointId x = -1;
    LineSet lines;
    int infinity = -1;
    std::vector<int> local_of;  // line -> local point, -1 if the line misses x
    XParallel parallel;
    std::vector<int> circle_class;  // circle -> parallel class index, -1 for circles through infinity
    int upper_circles = 0;          // circles from parallel classes
    int lower_circles = 0;          // circles through infinity
    std::shared_ptr<design::InversivePlane> plane;

    const design::Incidence& circles() const { return plane->incidence(); }
    /// Circle of the parallel class containing a line that misses x.
    design::BlockId circle_of_line(LineId m) const;
};

/// Throws std::runtime_error if the circles do not form a 3-(n^2+1, n+1, 1) design.
LocalPlane inversive_plane_at(const Unital& u, PointId x);

// ---------------------------------------------------------------------------
// Special spreads

struct SpecialSpread {
    LineId line = -1;
    PointId base = -1;
    LineSet lines;   // the spread, including `line`
    LineSet s_star;  // lines without `line`
    /// For each point x of `line` (in order): the classes of s_star and the
    /// matching classes of lines through x, block-diagonal meets.
    std::vector<std::vector<LineSet>> spread_parts;
    std::vector<std::vector<LineSet>> pencil_parts;
    bool base_independent = false;
};

/// Caches of I(x) and the special spreads of a unital.
class Workspace {
public:
    explicit Workspace(const Unital& u) : u_(&u), planes_(u.v()), spreads_(u.b()) {}

    const Unital& unital() const { return *u_; }
    const LocalPlane& plane(PointId x);
    /// Built from the least point of the line, checked at every point and for base independence.
    const SpecialSpread& spread(LineId l);
    bool in_spread(LineId l, LineId m) { return std::binary_search(spread(l).lines.begin(), spread(l).lines.end(), m); }
    bool in_s_star(LineId l, LineId m) { return l != m && in_spread(l, m); }

private:
    const Unital* u_;
    std::vector<std::unique_ptr<LocalPlane>> planes_;
    std::vector<std::unique_ptr<SpecialSpread>> spreads_;
};

/// The spread from the flock F(L, infinity) at base point x; throws std::runtime_error if it is not a spread.
LineSet spread_from_base(Workspace& w, LineId l, PointId x);
/// Throws std::runtime_error naming the violated property.
SpecialSpread special_spread(Workspace& w, LineId l);

struct ConditionP {
    bool ok = false;
    std::string failure;
    std::int64_t symmetric_pairs = 0;
    std::int64_t disjoint_pairs = 0;
    int max_common = 0;  // over all pairs of distinct lines, |m_J ∩ m_J'|
};

/// Builds every special spread; the failure names the first violated property.
ConditionP check_condition_P(Workspace& w);

// ---------------------------------------------------------------------------
// Self-polar triangles

bool is_self_polar(Workspace& w, LineId l, LineId m, LineId n);
/// The unique N completing a self-polar triangle; throws std::runtime_error otherwise.
LineId polar_triple(Workspace& w, LineId l, LineId m);

struct TriangleCriteria {
    bool by_spreads = false;          // triple intersection of special spreads
    bool parallel_on_third = false;   // L ||_z M for every z on N
    bool transversals = false;        // a line meeting two of them meets all three
    bool star_and_two_points = false; // M in S*_L and L ||_z M at two points of N
    int common_transversals = 0;
    bool agree() const
    {
        return by_spreads == parallel_on_third && parallel_on_third == transversals && transversals == star_and_two_points;
    }
};

/// The lines must be mutually disjoint.
TriangleCriteria check_triangle_criteria(Workspace& w, LineId l, LineId m, LineId n);

/// L ||_z M: both miss z and meet the same lines through z.
bool parallel_at(const Unital& u, PointId z, LineId l, LineId m);

struct StarByParallelism {
    LineSet lines;
    std::vector<int> multiplicity;  // parallel to L at how many points of M, per member
    bool equals_s_star = false;
    int every_point = 0;  // members found from every point of M
    int single_point = 0; // members found from exactly one point
};

/// {J : L ||_y J for some y on M}, compared with S*_M.
StarByParallelism s_star_via_parallelism(Workspace& w, LineId l, LineId m);

// ---------------------------------------------------------------------------
// L-parallelism and triply ruled sets

struct LParallelClass {
    LineSet lines;     // mutually disjoint
    LineSet key;       // lines of S*_L met
    int partner = -1;  // index of the class with the same key
    std::vector<PointId> points;
};

struct LParallel {
    LineId line = -1;
    std::vector<LParallelClass> classes;
    std::vector<int> class_of;  // line -> class, -1 if not classified
    int lines_missing = 0;      // lines missing L
};

/// Throws std::runtime_error if a class is not n+1 disjoint lines or partners do not pair up.
LParallel l_parallel_classes(Workspace& w, LineId l);

struct RuledSet {
    LineSet l_ruling;
    LineSet m_ruling;
    LineSet n_ruling;
    std::vector<PointId> points;
};

struct TriplyRuledPartition {
    LineId l = -1;
    LineId m = -1;
    LineId n = -1;
    std::vector<RuledSet> sets;
};

/// Seeds are taken from m_M in increasing id order starting with `first_seed` (or the least when -1).
/// Throws std::runtime_error on the first failed coverage or containment.
TriplyRuledPartition triply_ruled_partition(Workspace& w, LineId l, LineId m, LineId n, LineId first_seed = -1);

/// choice[i] in {0,1,2} picks the L, M or N ruling of set i; throws if the result is not a spread.
LineSet subregular_spread(const Unital& u, const TriplyRuledPartition& trp, const std::vector<int>& choice);

bool is_spread(const Unital& u, const LineSet& lines);

// ---------------------------------------------------------------------------
// A_ij and flock properties

struct AijTable {
    LineId line = -1;
    std::vector<PointId> points;  // x_1..x_{n+1}: the points of L in increasing order
    int base = 0;                 // row used to build the table
    /// cells[i][j]: lines through points[i]
    std::vector<std::vector<LineSet>> cells;
};

/// Rows are indexed by the points of L; columns ordered by the least line of the base row.
/// Throws std::runtime_error when a pencil circle passes through infinity or sizes fail.
AijTable aij_table(Workspace& w, LineId l, int base_row = 0);
/// Same columns up to relabelling.
bool same_columns(const AijTable& a, const AijTable& b);

struct FlockMeet {
    bool precondition = false;
    bool clause1 = false;  // L_1 on the circle through M, N, infinity
    bool clause2 = false;  // S*_L lines meeting M meet N
    bool clause3 = false;  // unique special point x on L, with x.y on that circle
    int star_lines_meeting = 0;
    int special_points = 0;
};

/// M and N meet at a point y; L misses y; neither M nor N is in m_L.
FlockMeet verify_flock_meet(Workspace& w, LineId l, LineId m, LineId n);

struct TangencyCheck {
    bool ok = false;
    int tangent_circles = 0;
    int spread_lines = 0;
};

/// For y off L: the circles of m_L minus the triangle through y are exactly the
/// parallel-class circles tangent to the circle of L in I(y).
TangencyCheck check_tangent_spread_lines(Workspace& w, LineId l, PointId y);

}  // namespace hermit::unital
