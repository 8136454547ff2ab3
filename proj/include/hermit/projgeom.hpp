#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "hermit/galois.hpp"
#include "hermit/linalg.hpp"

namespace hermit::projgeom {

using galois::Elem;
using galois::Field;
using galois::FieldPtr;
using PointId = std::int32_t;
/// Sorted list of point ids; the set form of lines, planes and quadrics.
using PointSet = std::vector<PointId>;

/// PG(d,q) with points enumerated lexicographically on normalized coordinate
/// vectors (first nonzero coordinate equal to 1).
class Space {
public:
    Space(FieldPtr field, int dim);

    const Field& field() const { return *field_; }
    const FieldPtr& field_ptr() const { return field_; }
    int dim() const { return dim_; }
    int q() const { return static_cast<int>(field_->size()); }
    int num_points() const { return num_points_; }
    /// Points per line, q+1.
    int line_size() const { return q() + 1; }

    std::span<const Elem> coords(PointId p) const
    {
        return {coords_.data() + static_cast<std::size_t>(p) * (dim_ + 1), static_cast<std::size_t>(dim_ + 1)};
    }
    linalg::Vec vec(PointId p) const { return {coords(p).begin(), coords(p).end()}; }
    /// Id of the point spanned by v; throws std::invalid_argument on the zero vector.
    PointId id_of(std::span<const Elem> v) const;

    PointSet line_through(PointId a, PointId b) const;
    /// Points of the subspace spanned by the given points.
    PointSet span(std::span<const PointId> pts) const;
    int rank_of(std::span<const PointId> pts) const;
    /// Points x with dual . x = 0.
    PointSet hyperplane(std::span<const Elem> dual) const;

    /// Canonical line list, sorted lexicographically; built on first use.
    const std::vector<PointSet>& lines() const;
    int num_lines() const { return static_cast<int>(lines().size()); }
    int line_id(PointId a, PointId b) const;
    /// -1 if the set is not a line of the space.
    int line_id(const PointSet& line) const;

private:
    void build_lines() const;

    FieldPtr field_;
    int dim_;
    int num_points_;
    std::vector<Elem> coords_;
    mutable std::vector<PointSet> lines_;
    mutable std::unordered_map<std::uint64_t, int> line_key_;
    mutable bool lines_built_ = false;
};

/// Gaussian binomial [n choose k]_q.
std::int64_t gaussian_binomial(int n, int k, int q);

bool meets(const PointSet& a, const PointSet& b);
PointSet intersection(const PointSet& a, const PointSet& b);
bool is_subset(const PointSet& small, const PointSet& big);

// ---------------------------------------------------------------------------
// Quadratic forms

/// Coefficients of the monomials x_i x_j (i <= j) in the order
/// (0,0),(0,1),...,(0,d),(1,1),...,(d,d).
struct QuadricForm {
    int dim = 0;
    std::vector<Elem> coeffs;

    QuadricForm() = default;
    explicit QuadricForm(int d);
    QuadricForm(int d, std::vector<Elem> c);

    static int monomial_count(int d) { return (d + 1) * (d + 2) / 2; }
    static int index(int i, int j, int d);

    Elem& coeff(int i, int j) { return coeffs[index(i, j, dim)]; }
    Elem coeff(int i, int j) const { return coeffs[index(i, j, dim)]; }

    Elem eval(const Field& f, std::span<const Elem> x) const;
    /// Associated (alternating) bilinear form Q(x+y)-Q(x)-Q(y).
    Elem polar(const Field& f, std::span<const Elem> x, std::span<const Elem> y) const;
    linalg::Matrix gram() const;
    bool is_zero() const;
    /// Scaled so that the first nonzero coefficient is 1.
    QuadricForm normalized(const Field& f) const;
    bool proportional_to(const Field& f, const QuadricForm& o) const;
    std::string to_string() const;
};

/// Q(A x) for a (d+1) x (k+1) matrix A; restriction to a subspace when A's
/// columns are a basis of it, a change of coordinates when A is invertible.
QuadricForm substitute(const Field& f, const QuadricForm& q, const linalg::Matrix& a);

PointSet zero_set(const Space& s, const QuadricForm& q);

struct Quadric {
    QuadricForm form;
    PointSet points;
};

/// The pinned parabolic quadric x0^2 + x1 x2 + x3 x4 = 0 of PG(4,q).
struct ParabolicQuadric {
    QuadricForm form;
    PointSet points;
    std::vector<PointSet> lines;  // lines fully contained, sorted
};

ParabolicQuadric parabolic_quadric(const Space& pg4);
/// All lines of the space contained in the zero set of q.
std::vector<PointSet> lines_on_quadric(const Space& s, const QuadricForm& q, const PointSet& points);

/// Common point of all tangent hyperplanes of a parabolic quadric (q even).
/// Throws std::invalid_argument if the form is not parabolic.
PointId nucleus(const Space& s, const QuadricForm& q);

/// Tangent hyperplane {y : B(v, y) = 0} at a point v.
PointSet tangent_hyperplane(const Space& s, const QuadricForm& q, PointId v);

// ---------------------------------------------------------------------------
// Hyperplane coordinates

/// A hyperplane of PG(d,q) identified with PG(d-1,q) through its reduced basis.
class Hyperplane {
public:
    /// Hyperplane spanned by the given points; throws unless they span rank d.
    Hyperplane(const Space& ambient, std::span<const PointId> spanning);

    const Space& ambient() const { return *ambient_; }
    const Space& local() const { return local_; }
    const linalg::Vec& normal() const { return normal_; }
    const PointSet& points() const { return points_; }
    bool contains(PointId global) const;
    /// Global id to local id; -1 when the point is off the hyperplane.
    PointId to_local(PointId global) const;
    PointId to_global(PointId local) const { return to_global_[local]; }
    PointSet to_local(const PointSet& globals) const;
    PointSet to_global(const PointSet& locals) const;
    /// Columns are the basis vectors (for substitute()).
    linalg::Matrix basis_matrix() const;

private:
    const Space* ambient_;
    Space local_;
    linalg::Vec normal_;
    linalg::Echelon basis_;
    PointSet points_;
    std::vector<PointId> to_local_;
    std::vector<PointId> to_global_;
};

/// Projection mu from the nucleus onto a hyperplane, restricted to the quadric.
struct NucleusMap {
    PointId nucleus = -1;
    /// Indexed by ambient point id; -1 off the quadric, else an ambient id on the hyperplane.
    std::vector<PointId> image;

    PointId operator()(PointId v) const { return image[v]; }
};

/// Throws std::runtime_error if the nucleus lies on the hyperplane or the
/// map fails to be a bijection onto the hyperplane.
NucleusMap mu_projection(const Space& s, const PointSet& quadric_points, PointId nucleus, const Hyperplane& sigma);

struct ConeImage {
    bool ok = false;
    std::string failure;
    PointSet plane;      // local ids
    PointSet conic;      // plane meets the section quadric here
    PointId conic_nucleus = -1;
};

class Polarity;

/// Checks that the tangent cone at v projects onto the polar plane of mu(v)
/// and that this plane cuts the section quadric in a conic with nucleus mu(v).
ConeImage cone_image(const Space& s, const QuadricForm& q, const PointSet& quadric_points, const NucleusMap& mu,
                     const Hyperplane& sigma, const Polarity& alpha, const PointSet& section_points, PointId v);

// ---------------------------------------------------------------------------
// Polarity of a nondegenerate alternating form

class Polarity {
public:
    /// From the bilinear form of q; throws std::domain_error if degenerate.
    Polarity(const Space& s, const QuadricForm& q);

    /// Hyperplane (as dual-coordinate id) polar to a point.
    PointId point_to_hyperplane(PointId p) const { return point_to_plane_[p]; }
    PointId hyperplane_to_point(PointId h) const { return plane_to_point_[h]; }
    PointSet hyperplane_points(PointId h) const;
    PointSet polar_of_point(PointId p) const { return hyperplane_points(point_to_hyperplane(p)); }

private:
    const Space* space_;
    std::vector<PointId> point_to_plane_;
    std::vector<PointId> plane_to_point_;
};

// ---------------------------------------------------------------------------
// Reguli, spreads, tubes in PG(3,q)

struct Regulus {
    std::vector<PointSet> lines;     // sorted
    std::vector<PointSet> opposite;  // sorted
    PointSet points() const;
};

/// Throws std::invalid_argument unless the lines are pairwise skew.
Regulus regulus_through(const Space& s, const PointSet& l1, const PointSet& l2, const PointSet& l3);
Regulus opposite(const Regulus& r);

/// Lines pairwise disjoint and covering every point exactly once.
bool is_spread(const Space& s, const std::vector<PointSet>& lines);

struct RegularityCheck {
    bool ok = false;
    std::int64_t triples_checked = 0;
    std::vector<int> failing_triple;
};
RegularityCheck is_regular_spread(const Space& s, const std::vector<PointSet>& spread);

std::vector<PointSet> planes_through_line(const Space& s, const PointSet& l);
bool is_arc(const Space& s, const PointSet& pts);

struct TubeCheck {
    bool ok = false;
    std::vector<PointSet> planes;
    std::vector<PointSet> hyperovals;
    int failing_plane = -1;
    std::string failure;
};
TubeCheck is_tube(const Space& s, const PointSet& l, const std::vector<PointSet>& others);

/// Union of the reguli through l, others[0], others[i]; throws
/// std::runtime_error when the result is not a spread of q^2+1 lines.
std::vector<PointSet> cameron_knarr_spread(const Space& s, const PointSet& l, const std::vector<PointSet>& others);

/// Nucleus of a conic lying in a plane (common point of its tangents).
std::optional<PointId> conic_nucleus(const Space& s, const PointSet& plane, const PointSet& conic);

// ---------------------------------------------------------------------------
// Fitting and pencils

/// A form whose zero set is exactly pts, or nullopt.
std::optional<Quadric> fit_quadric(const Space& s, const PointSet& pts);
/// The q+1 members F + t G (t in GF(q)) and G, with zero sets.
std::vector<Quadric> pencil_members(const Space& s, const QuadricForm& f, const QuadricForm& g);

}  // namespace hermit::projgeom
