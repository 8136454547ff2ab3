#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "hermit/design.hpp"
#include "hermit/projgeom.hpp"
#include "hermit/unital.hpp"

namespace hermit::bridge {

using design::Incidence;
using projgeom::PointSet;
using projgeom::QuadricForm;
using unital::LineId;
using unital::LineSet;
using unital::PointId;

// ---------------------------------------------------------------------------
// The quadrangle GQ(L)

struct GQCheck {
    bool ok = false;
    std::string failure;
    std::int64_t antiflags = 0;
};

/// Order (s,t): s+1 points per line, t+1 lines per point, two points on at most
/// one line, and a unique collinear point on every line for each point off it.
GQCheck check_gq_axioms(const Incidence& inc, int s, int t);

/// Points: cells A_ij (id i*(n+1)+j) then the unital points off L.
/// Lines: A_i (id i), B_j (id n+1+j), then the unital lines meeting L other than L.
struct GQ {
    int order = 0;
    LineId line = -1;
    Incidence inc;
    std::vector<int> unital_point;  // gq point -> unital point, -1 for cells
    std::vector<int> gq_point;      // unital point -> gq point, -1 on L
    std::vector<int> unital_line;   // gq line -> unital line, -1 for A_i, B_j
    std::vector<int> gq_line;       // unital line -> gq line, -1 if it misses L or is L
    std::vector<int> row_of;        // gq line -> i for a unital line through x_i

    int cell(int i, int j) const { return i * (order + 1) + j; }
    int line_a(int i) const { return i; }
    int line_b(int j) const { return order + 1 + j; }
    int num_cells() const { return (order + 1) * (order + 1); }
};

/// Throws std::runtime_error if an axiom of a GQ of order (n,n) fails.
GQ build_gq(const unital::Unital& u, const unital::AijTable& aij);

/// The parabolic quadric of PG(4,q) as a point-line geometry.
struct QuadricGQ {
    std::shared_ptr<projgeom::Space> space;  // PG(4,q)
    projgeom::ParabolicQuadric quadric;
    Incidence inc;                    // local ids index quadric.points
    std::vector<int> local_of;        // space point -> local, -1 off the quadric
};

QuadricGQ quadric_gq(int e);

struct Phi {
    design::IsoMap map;
    design::IsoStats stats;
    std::vector<projgeom::PointId> point;  // gq point -> PG(4,q) point

    projgeom::PointId of_unital(const GQ& gq, PointId p) const { return point[gq.gq_point[p]]; }
};

/// Lines of the GQ followed by the hyperbolic lines {x,y}^perp-perp of the
/// non-collinear pairs; throws std::runtime_error when some pair has a
/// hyperbolic line of the wrong size or the result is not a linear space.
/// For the symplectic quadrangle W(q) this is the line set of PG(3,q).
Incidence hyperbolic_completion(const Incidence& gq);

/// GQ isomorphism by a join/meet search on the hyperbolic completions that
/// preserves collinearity. The first point pair is fixed, which loses nothing
/// when b's collineation group is point-transitive.
std::optional<design::IsoMap> find_gq_isomorphism(const Incidence& a, const Incidence& b, design::IsoStats* stats = nullptr,
                                                  std::int64_t node_limit = 0);

/// Throws std::runtime_error if the search finds no isomorphism.
Phi find_phi(const GQ& gq, const QuadricGQ& q4);

// ---------------------------------------------------------------------------
// The hyperplane and the spread

/// Everything between PG(4,q) and the spread; members are heap allocated so
/// that the internal Space pointers stay valid when the frame moves.
struct Frame {
    const unital::Unital* u = nullptr;
    unital::AijTable aij;
    GQ gq;
    QuadricGQ q4;
    Phi phi;

    std::shared_ptr<projgeom::Hyperplane> sigma;
    QuadricForm h_form;               // local coordinates of Sigma
    PointSet h_points;                // local ids
    std::vector<PointSet> r0;         // phi(A_i), local
    std::vector<PointSet> r0_opposite;  // phi(B_j), local
    std::shared_ptr<projgeom::Polarity> alpha;
    projgeom::PointId nucleus = -1;   // PG(4,q) id
    projgeom::NucleusMap mu;

    const projgeom::Space& pg4() const { return *q4.space; }
    const projgeom::Space& local() const { return sigma->local(); }
    int order() const { return gq.order; }
    /// mu(phi(p)) as a local point of Sigma, for p off L.
    projgeom::PointId mu_phi(PointId p) const;
    /// Pointwise image of a unital line missing L.
    PointSet mu_phi_line(LineId l) const;
    /// mu(phi(K)) for a line of GQ(L).
    PointSet mu_phi_gq_line(int gq_line) const;
};

struct SigmaCheck {
    int section_points = 0;
    bool section_is_cells = false;
    bool reguli_match = false;
    bool involution = false;
    bool tangent_planes = false;
    bool ok() const { return section_is_cells && reguli_match && involution && tangent_planes; }
};

/// Aij table, GQ(L), phi, Sigma, the hyperbolic section, its polarity and mu.
/// Throws std::runtime_error when GQ(L) or phi cannot be built or Sigma meets
/// the quadric outside the cell images.
Frame build_frame(unital::Workspace& w, LineId l, SigmaCheck* check = nullptr);

/// The steps of build_frame, for callers that report them separately:
/// Aij table, GQ(L) and the quadric; then phi; then Sigma, the polarity and mu.
Frame start_frame(unital::Workspace& w, LineId l);
void attach_phi(Frame& f);
SigmaCheck attach_sigma(Frame& f);

struct ConeCheck {
    bool ok = false;
    int points = 0;
    projgeom::PointId failing = -1;
    std::string failure;
};

/// Tangent cones of the quadric points off Sigma versus the polarity.
ConeCheck verify_cones(const Frame& f);

struct SpreadWitness {
    std::vector<PointSet> lines;           // R_0 in order, then mu phi(L') by increasing L'
    std::vector<int> r0_index;             // -1 for lines from S*_L
    std::vector<LineId> unital_line;      // -1 for R_0
    bool misses_section = false;           // S*_L images avoid the hyperbolic quadric
    bool is_spread = false;

    int index_of_unital(LineId l) const;
};

/// Throws std::runtime_error if some image is not a line of Sigma or the union is no spread.
SpreadWitness build_spread(const Frame& f, unital::Workspace& w);

struct TubeRegularity {
    LineId m = -1;
    LineId n = -1;
    projgeom::TubeCheck tube;
    bool knarr_matches = false;
    projgeom::RegularityCheck regular;
    bool opposite_reguli = false;  // every x_i
    bool ok() const { return tube.ok && knarr_matches && regular.ok && opposite_reguli; }
};

TubeRegularity verify_tube_and_regularity(const Frame& f, unital::Workspace& w, const SpreadWitness& s, LineId m,
                                          LineId n);

// ---------------------------------------------------------------------------
// Reguli of the spread

enum class RegulusType { base, disjoint, tangent, secant };
const char* to_string(RegulusType t);

struct RegulusInfo {
    std::vector<int> members;  // spread indices, sorted
    RegulusType type = RegulusType::disjoint;
    bool witness_ok = false;
    // tangent: the point x_i and its class; secant: A_i1, A_i2 and the z_1 points tested
    int row = -1;
    int parallel_class = -1;
    int row2 = -1;
    int flock_points = 0;
    // disjoint: the lines J with C(J) equal to the regulus
    LineSet j_lines;
};

struct RegulusClassification {
    std::vector<RegulusInfo> reguli;
    Incidence i1;  // circles on the spread indices
    bool i1_design = false;
    int counts[4] = {0, 0, 0, 0};  // indexed by RegulusType
    std::vector<std::vector<int>> c0_star;  // C(J) blocks, sorted
    bool c0_equals_star = false;
    bool partners_pair = false;  // each C(J) comes from a class and its partner only
    bool i2_design = false;
    bool all_z_points = false;
    bool ok() const;
};

/// all_z_points: check the secant flock condition at every point of every
/// S*_L member instead of one point per regulus.
RegulusClassification classify_reguli(const Frame& f, unital::Workspace& w, const SpreadWitness& s,
                                      bool all_z_points = false);

struct FlockInstance {
    LineId k1 = -1;
    LineId k2 = -1;
    LineId m = -1;
};

struct FlockInstanceResult {
    bool in_flock = false;
    bool has_z = false;
};

/// Both sides of the flock criterion; throws std::invalid_argument when the
/// instance violates the preconditions (rows or columns equal, no meet, M through y).
FlockInstanceResult verify_flock_instance(const Frame& f, unital::Workspace& w, const FlockInstance& inst);

struct FlockBatch {
    bool ok = false;
    std::int64_t pairs = 0;
    std::int64_t instances = 0;
    std::int64_t positives = 0;
    bool upper_count_ok = false;  // n-2 upper flock circles with such a z per pair
    FlockInstance failing;
    std::int64_t admissible_pairs = 0;
    bool sampled = false;
};

/// Every admissible (K1, K2, M); with max_pairs > 0 at most that many
/// (K1, K2) pairs, drawn with the seed.
FlockBatch verify_flock_batch(const Frame& f, unital::Workspace& w, std::int64_t max_pairs = 0, std::uint32_t seed = 0);

// ---------------------------------------------------------------------------
// The pencil

struct PencilMember {
    std::string role;  // "section", "ruled", "line"
    PointSet points;
    QuadricForm form;  // fitted, normalized
    int pencil_index = -1;  // member of F + t G, q for G
};

struct PencilWitness {
    std::vector<PencilMember> members;
    int generators[2] = {-1, -1};  // members spanning the pencil
    bool members_match = false;    // designated sets are exactly the pencil zero sets
    bool partition = false;
    bool blocks_are_reguli = false;
    bool spread_decomposes = false;
    bool ok() const { return members_match && partition && blocks_are_reguli && spread_decomposes; }
};

/// Throws std::runtime_error when a designated set admits no quadric.
PencilWitness verify_pencil(const Frame& f, const SpreadWitness& s, const unital::TriplyRuledPartition& trp);

struct CoplanarCheck {
    bool ok = false;
    int lines = 0;
    int predicted = 0;  // contained spread line equals mu phi(N)
    int star_lines = 0; // J in S*_L with phi(J) in <N, mu phi(J)>
    LineId failing = -1;
};

CoplanarCheck verify_j_coplanar(const Frame& f, unital::Workspace& w, const SpreadWitness& s);

}  // namespace hermit::bridge
