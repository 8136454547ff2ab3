#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "hermit/bridge.hpp"
#include "hermit/design.hpp"
#include "hermit/unital.hpp"

namespace hermit::bruckbose {

using design::Incidence;
using unital::LineId;
using unital::PointId;

/// Affine points of PG(4,q) (ids 0..q^4-1, increasing PG id) then one point per
/// spread line (q^4 + spread index). The line at infinity is the last line.
struct BBPlane {
    int order = 0;  // q^2
    Incidence inc;
    std::vector<projgeom::PointId> affine_point;  // bb point -> PG(4,q) point, for affine ids
    std::vector<int> bb_of;                       // PG(4,q) point -> bb point, -1 on Sigma
    std::vector<int> line_spread;                 // bb line -> spread index, -1 for the line at infinity
    int infinity_base = 0;
    LineId line_at_infinity = -1;

    int infinite_point(int spread_index) const { return infinity_base + spread_index; }
};

/// Throws std::runtime_error if the result is not a projective plane of order q^2.
BBPlane bruck_bose_plane(const bridge::Frame& f, const bridge::SpreadWitness& s);

struct PlaneIdentification {
    std::optional<design::IsoMap> map;  // bb -> PG(2,q^2), points and lines
    design::IsoStats stats;
    std::shared_ptr<projgeom::Space> pg2;
    Incidence pg2_inc;  // lines in canonical order
};

/// Plane isomorphism search against PG(2,q^2); a map exists exactly when the plane is Desarguesian.
PlaneIdentification identify_with_pg2(const BBPlane& bb, std::int64_t node_limit = 0);

struct BuekenhoutUnital {
    unital::Unital unital;
    std::vector<int> bb_point;  // unital point -> bb point
    std::vector<int> bb_line;   // block -> bb line
    std::vector<int> a;         // a_i: unital point at infinity of R_0 line i
    std::vector<int> of_bb;     // bb point -> unital point, -1 off the unital
    bool generators_ok = false; // blocks through each a_i are quadric lines meeting phi(A_i)
};

/// Throws std::runtime_error if the point set with its (q+1)-secants is not a 2-design.
BuekenhoutUnital buekenhout_unital(const bridge::Frame& f, const BBPlane& bb);

struct PhiPrime {
    std::vector<int> point;  // U point -> U' point
    std::vector<int> line;   // U line -> U' block, -1 when the image is no block
    bool bijective = false;
    bool lines_to_blocks = false;
    bool line_to_infinity = false;  // phi'(L) = line at infinity meet U'
    bool verified = false;          // independent isomorphism check
    LineId failing = -1;
    bool ok() const { return bijective && lines_to_blocks && line_to_infinity && verified; }
};

/// Points of L go to the a_i, other points through phi; lines are imaged by cases.
PhiPrime build_phi_prime(const bridge::Frame& f, const BBPlane& bb, const BuekenhoutUnital& bu);

struct Embedding {
    std::vector<projgeom::PointId> point;  // U point -> PG(2,q^2) point
    bool lines_collinear = false;          // every U line lies on a line of the plane
    bool unital_set = false;               // every plane line meets the image in 1 or q+1 points
    bool hermitian_iso = false;
    design::IsoStats stats;
    bool ok() const { return lines_collinear && unital_set && hermitian_iso; }
};

/// U -> U' -> Bruck-Bose plane -> PG(2,q^2), then an isomorphism search against the Hermitian unital.
Embedding embed_in_pg2(const unital::Unital& u, const BuekenhoutUnital& bu, const PhiPrime& pp,
                       const PlaneIdentification& id, std::int64_t node_limit = 0);

}  // namespace hermit::bruckbose
