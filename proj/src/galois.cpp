#include "hermit/galois.hpp"

#include <stdexcept>
#include <string>

namespace hermit::galois {

namespace {

int poly_degree(std::uint32_t p)
{
    int d = -1;
    while (p) {
        ++d;
        p >>= 1;
    }
    return d;
}

std::uint32_t polymod(std::uint32_t a, std::uint32_t m)
{
    const int dm = poly_degree(m);
    for (int d = poly_degree(a); d >= dm; d = poly_degree(a)) a ^= m << (d - dm);
    return a;
}

}  // namespace

Elem polymul_mod(Elem a, Elem b, std::uint32_t modulus)
{
    std::uint32_t acc = 0;
    for (int i = 0; b >> i; ++i)
        if ((b >> i) & 1U) acc ^= a << i;
    return polymod(acc, modulus);
}

bool is_irreducible(std::uint32_t poly)
{
    const int d = poly_degree(poly);
    if (d < 1) return false;
    if (d == 1) return true;
    for (std::uint32_t f = 2; poly_degree(f) <= d / 2; ++f)
        if (polymod(poly, f) == 0) return false;
    return true;
}

std::uint32_t modulus_for_degree(int degree)
{
    switch (degree) {
    case 1: return 0b10;
    case 2: return 0b111;
    case 3: return 0b1011;
    case 4: return 0b10011;
    case 6: return 0b1011011;
    default: break;
    }
    if (degree < 1 || degree > 8) throw std::invalid_argument("field degree must be in 1..8");
    for (std::uint32_t p = 1U << degree;; ++p)
        if (is_irreducible(p)) return p;
}

Field::Field(int degree) : degree_(degree)
{
    if (degree < 1 || degree > 8)
        throw std::invalid_argument("field degree must be in 1..8, got " + std::to_string(degree));
    modulus_ = modulus_for_degree(degree);
    if (!is_irreducible(modulus_)) throw std::logic_error("pinned modulus is reducible");
    size_ = 1U << degree;
    const std::uint32_t group = size_ - 1;

    generator_ = 0;
    for (Elem g = 1; g < size_ && generator_ == 0; ++g) {
        Elem acc = g;
        std::uint32_t order = 1;
        while (acc != 1) {
            acc = polymul_mod(acc, g, modulus_);
            ++order;
        }
        if (order == group) generator_ = g;
    }

    exp_.assign(2 * group, 0);
    log_.assign(size_, 0);
    Elem acc = 1;
    for (std::uint32_t k = 0; k < group; ++k) {
        exp_[k] = acc;
        exp_[k + group] = acc;
        log_[acc] = k;
        acc = polymul_mod(acc, generator_, modulus_);
    }
}

Elem Field::inv(Elem a) const
{
    if (a == 0) throw std::domain_error("inverse of zero");
    const std::uint32_t group = size_ - 1;
    return exp_[(group - log_[a]) % group];
}

Elem Field::pow(Elem a, std::uint64_t k) const
{
    if (k == 0) return 1;
    if (a == 0) return 0;
    const std::uint64_t group = size_ - 1;
    return exp_[(static_cast<std::uint64_t>(log_[a]) * (k % group)) % group];
}

std::uint32_t Field::log(Elem a) const
{
    if (a == 0) throw std::domain_error("log of zero");
    return log_[a];
}

std::uint32_t Field::subfield_order() const
{
    if (!has_quadratic_subfield())
        throw std::invalid_argument("field of odd degree has no quadratic subfield");
    return 1U << (degree_ / 2);
}

Elem Field::conjugate(Elem a) const { return pow(a, subfield_order()); }

Elem Field::norm(Elem a) const { return pow(a, subfield_order() + 1); }

std::vector<Elem> Field::subfield_elements() const
{
    std::vector<Elem> out;
    for (Elem a = 0; a < size_; ++a)
        if (conjugate(a) == a) out.push_back(a);
    return out;
}

Elem Field::trace(Elem a) const
{
    Elem t = 0;
    Elem s = a;
    for (int i = 0; i < degree_; ++i) {
        t ^= s;
        s = square(s);
    }
    return t;
}

FieldPtr make_field(int degree) { return std::make_shared<const Field>(degree); }

}  // namespace hermit::galois
