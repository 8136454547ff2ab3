#include "hermit/projgeom.hpp"

#include <algorithm>
#include <numeric>
#include <set>
#include <sstream>
#include <stdexcept>

namespace hermit::projgeom {

namespace {

std::uint64_t pair_key(PointId a, PointId b)
{
    if (a > b) std::swap(a, b);
    return (static_cast<std::uint64_t>(a) << 32) | static_cast<std::uint32_t>(b);
}

// All nonzero vectors of the span of rows, one per projective point.
template <class Fn>
void for_each_combination(const Field& f, int k, Fn&& fn)
{
    // Normalized coefficient vectors c in GF(q)^k, first nonzero entry 1.
    const std::uint32_t q = f.size();
    std::vector<Elem> c(k, 0);
    for (int lead = 0; lead < k; ++lead) {
        std::fill(c.begin(), c.end(), 0);
        c[lead] = 1;
        const int tail = k - lead - 1;
        std::uint64_t total = 1;
        for (int i = 0; i < tail; ++i) total *= q;
        for (std::uint64_t t = 0; t < total; ++t) {
            std::uint64_t r = t;
            for (int i = k - 1; i > lead; --i) {
                c[i] = static_cast<Elem>(r % q);
                r /= q;
            }
            fn(std::span<const Elem>(c));
        }
    }
}

}  // namespace

// ---------------------------------------------------------------------------

Space::Space(FieldPtr field, int dim) : field_(std::move(field)), dim_(dim)
{
    if (dim < 1 || dim > 4) throw std::invalid_argument("projective dimension must be in 1..4");
    const std::uint32_t q = field_->size();
    std::int64_t n = 0;
    for (int k = 0; k <= dim; ++k) {
        std::int64_t t = 1;
        for (int i = 0; i < k; ++i) t *= q;
        n += t;
    }
    num_points_ = static_cast<int>(n);
    coords_.reserve(static_cast<std::size_t>(n) * (dim + 1));
    std::vector<Elem> v(dim + 1);
    for (int lead = dim; lead >= 0; --lead) {
        const int tail = dim - lead;
        std::uint64_t total = 1;
        for (int i = 0; i < tail; ++i) total *= q;
        for (std::uint64_t t = 0; t < total; ++t) {
            std::fill(v.begin(), v.end(), 0);
            v[lead] = 1;
            std::uint64_t r = t;
            for (int i = dim; i > lead; --i) {
                v[i] = static_cast<Elem>(r % q);
                r /= q;
            }
            coords_.insert(coords_.end(), v.begin(), v.end());
        }
    }
}

PointId Space::id_of(std::span<const Elem> v) const
{
    const Field& f = *field_;
    const std::uint32_t q = f.size();
    int lead = -1;
    for (int i = 0; i <= dim_; ++i)
        if (v[i] != 0) {
            lead = i;
            break;
        }
    if (lead < 0) throw std::invalid_argument("zero vector has no projective point");
    const Elem s = f.inv(v[lead]);
    std::int64_t offset = 0;
    for (int j = lead + 1; j <= dim_; ++j) {
        std::int64_t t = 1;
        for (int i = 0; i < dim_ - j; ++i) t *= q;
        offset += t;
    }
    std::int64_t tail = 0;
    for (int i = lead + 1; i <= dim_; ++i) tail = tail * q + f.mul(v[i], s);
    return static_cast<PointId>(offset + tail);
}

PointSet Space::line_through(PointId a, PointId b) const
{
    if (a == b) throw std::invalid_argument("line through a single point");
    const Field& f = *field_;
    PointSet out;
    out.reserve(line_size());
    out.push_back(b);
    const auto va = coords(a);
    const auto vb = coords(b);
    std::vector<Elem> w(dim_ + 1);
    for (Elem t = 0; t < f.size(); ++t) {
        for (int i = 0; i <= dim_; ++i) w[i] = va[i] ^ f.mul(t, vb[i]);
        out.push_back(id_of(w));
    }
    std::sort(out.begin(), out.end());
    return out;
}

PointSet Space::span(std::span<const PointId> pts) const
{
    if (pts.empty()) return {};
    std::vector<linalg::Vec> rows;
    for (PointId p : pts) rows.push_back(vec(p));
    const auto e = linalg::rref(*field_, linalg::Matrix::from_rows(rows, dim_ + 1));
    PointSet out;
    std::vector<Elem> w(dim_ + 1);
    for_each_combination(*field_, e.rank(), [&](std::span<const Elem> c) {
        std::fill(w.begin(), w.end(), 0);
        for (int r = 0; r < e.rank(); ++r)
            if (c[r])
                for (int k = 0; k <= dim_; ++k) w[k] ^= field_->mul(c[r], e.reduced.at(r, k));
        out.push_back(id_of(w));
    });
    std::sort(out.begin(), out.end());
    return out;
}

int Space::rank_of(std::span<const PointId> pts) const
{
    std::vector<linalg::Vec> rows;
    for (PointId p : pts) rows.push_back(vec(p));
    return linalg::rank(*field_, rows, dim_ + 1);
}

PointSet Space::hyperplane(std::span<const Elem> dual) const
{
    PointSet out;
    for (PointId p = 0; p < num_points_; ++p)
        if (linalg::dot(*field_, dual, coords(p)) == 0) out.push_back(p);
    return out;
}

void Space::build_lines() const
{
    if (lines_built_) return;
    std::set<PointSet> found;
    if (dim_ == 2) {
        for (PointId d = 0; d < num_points_; ++d) found.insert(hyperplane(coords(d)));
    } else {
        std::vector<char> seen(static_cast<std::size_t>(num_points_) * num_points_, 0);
        for (PointId a = 0; a < num_points_; ++a)
            for (PointId b = a + 1; b < num_points_; ++b) {
                if (seen[static_cast<std::size_t>(a) * num_points_ + b]) continue;
                PointSet l = line_through(a, b);
                for (std::size_t i = 0; i < l.size(); ++i)
                    for (std::size_t j = i + 1; j < l.size(); ++j)
                        seen[static_cast<std::size_t>(l[i]) * num_points_ + l[j]] = 1;
                found.insert(std::move(l));
            }
    }
    lines_.assign(found.begin(), found.end());
    line_key_.clear();
    for (int i = 0; i < static_cast<int>(lines_.size()); ++i) line_key_[pair_key(lines_[i][0], lines_[i][1])] = i;
    lines_built_ = true;
}

const std::vector<PointSet>& Space::lines() const
{
    build_lines();
    return lines_;
}

int Space::line_id(PointId a, PointId b) const { return line_id(line_through(a, b)); }

int Space::line_id(const PointSet& line) const
{
    build_lines();
    if (static_cast<int>(line.size()) != line_size()) return -1;
    auto it = line_key_.find(pair_key(line[0], line[1]));
    if (it == line_key_.end() || lines_[it->second] != line) return -1;
    return it->second;
}

std::int64_t gaussian_binomial(int n, int k, int q)
{
    if (k < 0 || k > n) return 0;
    std::int64_t num = 1;
    std::int64_t den = 1;
    for (int i = 0; i < k; ++i) {
        std::int64_t a = 1;
        std::int64_t b = 1;
        for (int j = 0; j < n - i; ++j) a *= q;
        for (int j = 0; j < i + 1; ++j) b *= q;
        num *= a - 1;
        den *= b - 1;
    }
    return num / den;
}

bool meets(const PointSet& a, const PointSet& b)
{
    auto i = a.begin();
    auto j = b.begin();
    while (i != a.end() && j != b.end()) {
        if (*i == *j) return true;
        if (*i < *j)
            ++i;
        else
            ++j;
    }
    return false;
}

PointSet intersection(const PointSet& a, const PointSet& b)
{
    PointSet out;
    std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
    return out;
}

bool is_subset(const PointSet& small, const PointSet& big)
{
    return std::includes(big.begin(), big.end(), small.begin(), small.end());
}

// ---------------------------------------------------------------------------

QuadricForm::QuadricForm(int d) : dim(d), coeffs(monomial_count(d), 0) {}

QuadricForm::QuadricForm(int d, std::vector<Elem> c) : dim(d), coeffs(std::move(c))
{
    if (static_cast<int>(coeffs.size()) != monomial_count(d))
        throw std::invalid_argument("wrong number of quadric coefficients");
}

int QuadricForm::index(int i, int j, int d)
{
    if (i > j) std::swap(i, j);
    // rows 0..i-1 contribute (d+1) + d + ... terms
    return i * (d + 1) - i * (i - 1) / 2 + (j - i);
}

Elem QuadricForm::eval(const Field& f, std::span<const Elem> x) const
{
    Elem acc = 0;
    int k = 0;
    for (int i = 0; i <= dim; ++i)
        for (int j = i; j <= dim; ++j, ++k)
            if (coeffs[k] && x[i] && x[j]) acc ^= f.mul(coeffs[k], f.mul(x[i], x[j]));
    return acc;
}

Elem QuadricForm::polar(const Field& f, std::span<const Elem> x, std::span<const Elem> y) const
{
    Elem acc = 0;
    for (int i = 0; i <= dim; ++i)
        for (int j = i + 1; j <= dim; ++j) {
            const Elem c = coeff(i, j);
            if (c) acc ^= f.mul(c, f.mul(x[i], y[j]) ^ f.mul(x[j], y[i]));
        }
    return acc;
}

linalg::Matrix QuadricForm::gram() const
{
    linalg::Matrix g(dim + 1, dim + 1);
    for (int i = 0; i <= dim; ++i)
        for (int j = i + 1; j <= dim; ++j) {
            g.at(i, j) = coeff(i, j);
            g.at(j, i) = coeff(i, j);
        }
    return g;
}

bool QuadricForm::is_zero() const
{
    return std::all_of(coeffs.begin(), coeffs.end(), [](Elem c) { return c == 0; });
}

QuadricForm QuadricForm::normalized(const Field& f) const
{
    QuadricForm out = *this;
    for (Elem c : coeffs)
        if (c) {
            const Elem s = f.inv(c);
            for (Elem& x : out.coeffs) x = f.mul(x, s);
            break;
        }
    return out;
}

bool QuadricForm::proportional_to(const Field& f, const QuadricForm& o) const
{
    return dim == o.dim && normalized(f).coeffs == o.normalized(f).coeffs;
}

std::string QuadricForm::to_string() const
{
    std::ostringstream os;
    os << '[';
    for (std::size_t i = 0; i < coeffs.size(); ++i) os << (i ? "," : "") << coeffs[i];
    os << ']';
    return os.str();
}

QuadricForm substitute(const Field& f, const QuadricForm& q, const linalg::Matrix& a)
{
    if (a.rows != q.dim + 1) throw std::invalid_argument("substitution matrix has wrong row count");
    const int k = a.cols - 1;
    QuadricForm out(k);
    std::vector<linalg::Vec> cols(a.cols, linalg::Vec(a.rows));
    for (int c = 0; c < a.cols; ++c)
        for (int r = 0; r < a.rows; ++r) cols[c][r] = a.at(r, c);
    for (int i = 0; i <= k; ++i) {
        out.coeff(i, i) = q.eval(f, cols[i]);
        for (int j = i + 1; j <= k; ++j) out.coeff(i, j) = q.polar(f, cols[i], cols[j]);
    }
    return out;
}

PointSet zero_set(const Space& s, const QuadricForm& q)
{
    PointSet out;
    for (PointId p = 0; p < s.num_points(); ++p)
        if (q.eval(s.field(), s.coords(p)) == 0) out.push_back(p);
    return out;
}

std::vector<PointSet> lines_on_quadric(const Space& s, const QuadricForm& q, const PointSet& points)
{
    const Field& f = s.field();
    std::set<PointSet> found;
    for (std::size_t i = 0; i < points.size(); ++i)
        for (std::size_t j = i + 1; j < points.size(); ++j) {
            const PointId a = points[i];
            const PointId b = points[j];
            if (q.polar(f, s.coords(a), s.coords(b)) != 0) continue;
            PointSet l = s.line_through(a, b);
            if (l[0] < a || (l[0] == a && l[1] < b)) continue;  // reached from its two least points only
            found.insert(std::move(l));
        }
    return {found.begin(), found.end()};
}

ParabolicQuadric parabolic_quadric(const Space& pg4)
{
    if (pg4.dim() != 4) throw std::invalid_argument("parabolic quadric lives in PG(4,q)");
    ParabolicQuadric p;
    p.form = QuadricForm(4);
    p.form.coeff(0, 0) = 1;
    p.form.coeff(1, 2) = 1;
    p.form.coeff(3, 4) = 1;
    p.points = zero_set(pg4, p.form);
    p.lines = lines_on_quadric(pg4, p.form, p.points);
    return p;
}

PointId nucleus(const Space& s, const QuadricForm& q)
{
    const Field& f = s.field();
    const auto radical = linalg::null_space(f, q.gram());
    if (radical.size() != 1) throw std::invalid_argument("form is not parabolic: radical has dimension " +
                                                         std::to_string(radical.size()));
    if (q.eval(f, radical[0]) == 0) throw std::invalid_argument("form is not parabolic: radical lies on the quadric");
    return s.id_of(radical[0]);
}

PointSet tangent_hyperplane(const Space& s, const QuadricForm& q, PointId v)
{
    PointSet out;
    const auto cv = s.coords(v);
    for (PointId p = 0; p < s.num_points(); ++p)
        if (q.polar(s.field(), cv, s.coords(p)) == 0) out.push_back(p);
    return out;
}

// ---------------------------------------------------------------------------

Hyperplane::Hyperplane(const Space& ambient, std::span<const PointId> spanning)
    : ambient_(&ambient), local_(ambient.field_ptr(), ambient.dim() - 1)
{
    const Field& f = ambient.field();
    const int n = ambient.dim() + 1;
    std::vector<linalg::Vec> rows;
    for (PointId p : spanning) rows.push_back(ambient.vec(p));
    basis_ = linalg::rref(f, linalg::Matrix::from_rows(rows, n));
    if (basis_.rank() != n - 1) throw std::invalid_argument("points do not span a hyperplane");
    const auto ns = linalg::null_space(f, basis_.reduced);
    normal_ = ns.at(0);
    to_local_.assign(ambient.num_points(), -1);
    to_global_.assign(local_.num_points(), -1);
    for (PointId p = 0; p < ambient.num_points(); ++p) {
        if (linalg::dot(f, normal_, ambient.coords(p)) != 0) continue;
        points_.push_back(p);
        const auto c = ambient.coords(p);
        linalg::Vec loc(n - 1);
        for (int r = 0; r < n - 1; ++r) loc[r] = c[basis_.pivots[r]];
        const PointId l = local_.id_of(loc);
        to_local_[p] = l;
        to_global_[l] = p;
    }
}

bool Hyperplane::contains(PointId global) const { return to_local_[global] >= 0; }

PointId Hyperplane::to_local(PointId global) const { return to_local_[global]; }

PointSet Hyperplane::to_local(const PointSet& globals) const
{
    PointSet out;
    for (PointId g : globals) {
        const PointId l = to_local_[g];
        if (l < 0) throw std::invalid_argument("point is not on the hyperplane");
        out.push_back(l);
    }
    std::sort(out.begin(), out.end());
    return out;
}

PointSet Hyperplane::to_global(const PointSet& locals) const
{
    PointSet out;
    for (PointId l : locals) out.push_back(to_global_[l]);
    std::sort(out.begin(), out.end());
    return out;
}

linalg::Matrix Hyperplane::basis_matrix() const
{
    const int n = ambient_->dim() + 1;
    linalg::Matrix a(n, n - 1);
    for (int c = 0; c < n - 1; ++c)
        for (int r = 0; r < n; ++r) a.at(r, c) = basis_.reduced.at(c, r);
    return a;
}

NucleusMap mu_projection(const Space& s, const PointSet& quadric_points, PointId nucleus, const Hyperplane& sigma)
{
    const Field& f = s.field();
    const auto& h = sigma.normal();
    const auto cn = s.coords(nucleus);
    const Elem hn = linalg::dot(f, h, cn);
    if (hn == 0) throw std::runtime_error("nucleus lies on the projection hyperplane");
    NucleusMap mu;
    mu.nucleus = nucleus;
    mu.image.assign(s.num_points(), -1);
    std::vector<char> hit(s.num_points(), 0);
    std::vector<Elem> w(s.dim() + 1);
    for (PointId v : quadric_points) {
        const auto cv = s.coords(v);
        const Elem hv = linalg::dot(f, h, cv);
        // h(hv N + hn V) = hv hn + hn hv = 0 in characteristic 2
        for (int i = 0; i <= s.dim(); ++i) w[i] = f.mul(hv, cn[i]) ^ f.mul(hn, cv[i]);
        const PointId img = s.id_of(w);
        if (!sigma.contains(img)) throw std::logic_error("projection left the hyperplane");
        if (hit[img]) throw std::runtime_error("projection from the nucleus is not injective");
        hit[img] = 1;
        mu.image[v] = img;
    }
    if (quadric_points.size() != sigma.points().size())
        throw std::runtime_error("projection from the nucleus is not onto the hyperplane");
    return mu;
}

// ---------------------------------------------------------------------------

Polarity::Polarity(const Space& s, const QuadricForm& q) : space_(&s)
{
    const Field& f = s.field();
    const auto g = q.gram();
    const auto ginv = linalg::inverse(f, g);
    point_to_plane_.resize(s.num_points());
    plane_to_point_.resize(s.num_points());
    for (PointId p = 0; p < s.num_points(); ++p) {
        point_to_plane_[p] = s.id_of(linalg::multiply(f, g, s.coords(p)));
        plane_to_point_[p] = s.id_of(linalg::multiply(f, ginv, s.coords(p)));
    }
}

PointSet Polarity::hyperplane_points(PointId h) const { return space_->hyperplane(space_->coords(h)); }

ConeImage cone_image(const Space& s, const QuadricForm& q, const PointSet& quadric_points, const NucleusMap& mu,
                     const Hyperplane& sigma, const Polarity& alpha, const PointSet& section_points, PointId v)
{
    ConeImage out;
    if (sigma.contains(v)) {
        out.failure = "point lies on the hyperplane";
        return out;
    }
    const Field& f = s.field();
    const auto cv = s.coords(v);
    PointSet cone;
    for (PointId p : quadric_points)
        if (q.polar(f, cv, s.coords(p)) == 0) cone.push_back(p);
    const int qq = s.q();
    if (static_cast<int>(cone.size()) != qq * qq + qq + 1) {
        out.failure = "tangent cone has " + std::to_string(cone.size()) + " points";
        return out;
    }
    PointSet image;
    for (PointId p : cone) image.push_back(sigma.to_local(mu(p)));
    std::sort(image.begin(), image.end());
    const Space& loc = sigma.local();
    const PointId muv = sigma.to_local(mu(v));
    const PointSet polar_plane = alpha.polar_of_point(muv);
    out.plane = image;
    if (image != polar_plane) {
        out.failure = "image of the tangent cone is not the polar plane of mu(V)";
        return out;
    }
    out.conic = intersection(polar_plane, section_points);
    if (static_cast<int>(out.conic.size()) != qq + 1 || !is_arc(loc, out.conic)) {
        out.failure = "polar plane does not cut an irreducible conic";
        return out;
    }
    const auto nuc = conic_nucleus(loc, polar_plane, out.conic);
    if (!nuc || *nuc != muv) {
        out.failure = "conic nucleus differs from mu(V)";
        return out;
    }
    out.conic_nucleus = *nuc;
    out.ok = true;
    return out;
}

// ---------------------------------------------------------------------------

PointSet Regulus::points() const
{
    PointSet out;
    for (const auto& l : lines) out.insert(out.end(), l.begin(), l.end());
    std::sort(out.begin(), out.end());
    return out;
}

namespace {

// The unique line through p meeting both a and b (p on neither, a and b skew).
std::optional<PointSet> transversal_from(const Space& s, PointId p, const PointSet& a, const PointSet& b)
{
    for (PointId r : b) {
        PointSet l = s.line_through(p, r);
        if (meets(l, a)) return l;
    }
    return std::nullopt;
}

}  // namespace

Regulus regulus_through(const Space& s, const PointSet& l1, const PointSet& l2, const PointSet& l3)
{
    if (meets(l1, l2) || meets(l1, l3) || meets(l2, l3))
        throw std::invalid_argument("regulus_through needs pairwise skew lines");
    Regulus r;
    for (PointId p : l1) {
        auto t = transversal_from(s, p, l2, l3);
        if (!t) throw std::runtime_error("no transversal through a point of the first line");
        r.opposite.push_back(std::move(*t));
    }
    const PointSet& t1 = r.opposite[0];
    const PointSet& t2 = r.opposite[1];
    const PointSet& t3 = r.opposite[2];
    for (PointId p : t1) {
        auto l = transversal_from(s, p, t2, t3);
        if (!l) throw std::runtime_error("no line through a transversal point meeting two transversals");
        r.lines.push_back(std::move(*l));
    }
    std::sort(r.lines.begin(), r.lines.end());
    std::sort(r.opposite.begin(), r.opposite.end());
    return r;
}

Regulus opposite(const Regulus& r) { return Regulus{r.opposite, r.lines}; }

bool is_spread(const Space& s, const std::vector<PointSet>& lines)
{
    std::vector<int> cover(s.num_points(), 0);
    for (const auto& l : lines)
        for (PointId p : l) ++cover[p];
    return std::all_of(cover.begin(), cover.end(), [](int c) { return c == 1; });
}

RegularityCheck is_regular_spread(const Space& s, const std::vector<PointSet>& spread)
{
    RegularityCheck out;
    std::set<PointSet> members(spread.begin(), spread.end());
    const int n = static_cast<int>(spread.size());
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j)
            for (int k = j + 1; k < n; ++k) {
                ++out.triples_checked;
                const Regulus r = regulus_through(s, spread[i], spread[j], spread[k]);
                for (const auto& l : r.lines)
                    if (!members.count(l)) {
                        out.failing_triple = {i, j, k};
                        return out;
                    }
            }
    out.ok = true;
    return out;
}

std::vector<PointSet> planes_through_line(const Space& s, const PointSet& l)
{
    std::set<PointSet> planes;
    std::vector<char> used(s.num_points(), 0);
    for (PointId p : l) used[p] = 1;
    for (PointId p = 0; p < s.num_points(); ++p) {
        if (used[p]) continue;
        PointSet gen = l;
        gen.push_back(p);
        PointSet pl = s.span(gen);
        for (PointId x : pl) used[x] = 1;
        planes.insert(std::move(pl));
    }
    return {planes.begin(), planes.end()};
}

bool is_arc(const Space& s, const PointSet& pts)
{
    for (std::size_t i = 0; i < pts.size(); ++i)
        for (std::size_t j = i + 1; j < pts.size(); ++j) {
            const PointSet l = s.line_through(pts[i], pts[j]);
            if (intersection(l, pts).size() > 2) return false;
        }
    return true;
}

TubeCheck is_tube(const Space& s, const PointSet& l, const std::vector<PointSet>& others)
{
    TubeCheck out;
    const int q = s.q();
    std::vector<PointSet> all = others;
    all.push_back(l);
    for (std::size_t i = 0; i < all.size(); ++i)
        for (std::size_t j = i + 1; j < all.size(); ++j)
            if (meets(all[i], all[j])) {
                out.failure = "lines are not mutually disjoint";
                return out;
            }
    if (static_cast<int>(others.size()) != q + 2) {
        out.failure = "tube needs q+2 lines besides the axis";
        return out;
    }
    out.planes = planes_through_line(s, l);
    for (std::size_t k = 0; k < out.planes.size(); ++k) {
        PointSet oval;
        for (const auto& m : others) {
            const PointSet x = intersection(out.planes[k], m);
            oval.insert(oval.end(), x.begin(), x.end());
        }
        std::sort(oval.begin(), oval.end());
        out.hyperovals.push_back(oval);
        if (static_cast<int>(oval.size()) != q + 2 || !is_arc(s, oval)) {
            out.failing_plane = static_cast<int>(k);
            out.failure = "plane section is not a hyperoval";
            return out;
        }
    }
    out.ok = true;
    return out;
}

std::vector<PointSet> cameron_knarr_spread(const Space& s, const PointSet& l, const std::vector<PointSet>& others)
{
    if (others.size() < 2) throw std::invalid_argument("tube too small");
    std::set<PointSet> spread;
    for (std::size_t i = 1; i < others.size(); ++i) {
        const Regulus r = regulus_through(s, l, others[0], others[i]);
        spread.insert(r.lines.begin(), r.lines.end());
    }
    std::vector<PointSet> out(spread.begin(), spread.end());
    const int q = s.q();
    if (static_cast<int>(out.size()) != q * q + 1 || !is_spread(s, out))
        throw std::runtime_error("reguli of the tube do not assemble into a spread");
    return out;
}

std::optional<PointId> conic_nucleus(const Space& s, const PointSet& plane, const PointSet& conic)
{
    std::vector<PointSet> tangents;
    for (PointId c : conic) {
        std::set<PointSet> through;
        for (PointId r : plane)
            if (r != c) through.insert(s.line_through(c, r));
        for (const auto& l : through)
            if (intersection(l, conic).size() == 1) tangents.push_back(l);
    }
    if (tangents.empty()) return std::nullopt;
    PointSet common = tangents[0];
    for (const auto& t : tangents) common = intersection(common, t);
    if (common.size() != 1) return std::nullopt;
    return common[0];
}

// ---------------------------------------------------------------------------

std::optional<Quadric> fit_quadric(const Space& s, const PointSet& pts)
{
    const Field& f = s.field();
    const int d = s.dim();
    const int m = QuadricForm::monomial_count(d);
    auto monomials = [&](PointId p) {
        const auto c = s.coords(p);
        linalg::Vec row(m);
        int k = 0;
        for (int i = 0; i <= d; ++i)
            for (int j = i; j <= d; ++j) row[k++] = f.mul(c[i], c[j]);
        return row;
    };
    linalg::Matrix sys(static_cast<int>(pts.size()), m);
    for (int r = 0; r < sys.rows; ++r) {
        const auto row = monomials(pts[r]);
        for (int c = 0; c < m; ++c) sys.at(r, c) = row[c];
    }
    std::vector<linalg::Vec> basis;
    if (pts.empty()) {
        for (int c = 0; c < m; ++c) {
            linalg::Vec e(m, 0);
            e[c] = 1;
            basis.push_back(e);
        }
    } else {
        basis = linalg::null_space(f, sys);
    }
    if (basis.empty()) return std::nullopt;

    std::vector<char> inside(s.num_points(), 0);
    for (PointId p : pts) inside[p] = 1;
    std::vector<linalg::Vec> outside;
    for (PointId p = 0; p < s.num_points(); ++p)
        if (!inside[p]) outside.push_back(monomials(p));

    std::optional<Quadric> found;
    const int k = static_cast<int>(basis.size());
    linalg::Vec coeffs(m);
    // Visit normalized combinations; stop at the first exact fit.
    std::vector<Elem> c(k, 0);
    const std::uint32_t q = f.size();
    for (int lead = 0; lead < k && !found; ++lead) {
        std::uint64_t total = 1;
        for (int i = lead + 1; i < k; ++i) total *= q;
        for (std::uint64_t t = 0; t < total && !found; ++t) {
            std::fill(c.begin(), c.end(), 0);
            c[lead] = 1;
            std::uint64_t r = t;
            for (int i = k - 1; i > lead; --i) {
                c[i] = static_cast<Elem>(r % q);
                r /= q;
            }
            std::fill(coeffs.begin(), coeffs.end(), 0);
            for (int b = 0; b < k; ++b)
                if (c[b])
                    for (int x = 0; x < m; ++x) coeffs[x] ^= f.mul(c[b], basis[b][x]);
            bool exact = true;
            for (const auto& row : outside)
                if (linalg::dot(f, coeffs, row) == 0) {
                    exact = false;
                    break;
                }
            if (exact) {
                Quadric qd;
                qd.form = QuadricForm(d, coeffs).normalized(f);
                qd.points = pts;
                found = std::move(qd);
            }
        }
    }
    return found;
}

std::vector<Quadric> pencil_members(const Space& s, const QuadricForm& f, const QuadricForm& g)
{
    const Field& fld = s.field();
    if (f.dim != g.dim) throw std::invalid_argument("pencil of forms in different dimensions");
    if (f.is_zero() || g.is_zero() || f.proportional_to(fld, g))
        throw std::invalid_argument("pencil needs two independent forms");
    std::vector<Quadric> out;
    for (Elem t = 0; t < fld.size(); ++t) {
        QuadricForm h(f.dim);
        for (std::size_t i = 0; i < h.coeffs.size(); ++i) h.coeffs[i] = f.coeffs[i] ^ fld.mul(t, g.coeffs[i]);
        h = h.normalized(fld);
        out.push_back({h, zero_set(s, h)});
    }
    QuadricForm gn = g.normalized(fld);
    out.push_back({gn, zero_set(s, gn)});
    return out;
}

}  // namespace hermit::projgeom
