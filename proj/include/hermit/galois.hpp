#pragma once

#include <cstdint>
#include <memory>
#include <vector>

namespace hermit::galois {

/// Field element in polynomial bit encoding (bit i = coefficient of x^i).
using Elem = std::uint32_t;

/// GF(2^e) for 1 <= e <= 8 with log/antilog tables.
///
/// The modulus is pinned per degree so that serialized coordinates agree
/// across runs and implementations:
///   e=1: x, e=2: x^2+x+1, e=3: x^3+x+1, e=4: x^4+x+1,
///   e=6: x^6+x^4+x^3+x+1, other e: least irreducible by integer value.
/// Immutable after construction.
class Field {
public:
    explicit Field(int degree);

    int degree() const { return degree_; }
    std::uint32_t modulus() const { return modulus_; }
    std::uint32_t size() const { return size_; }
    std::uint32_t order_of_group() const { return size_ - 1; }
    /// The least element generating the multiplicative group.
    Elem generator() const { return generator_; }

    static Elem add(Elem a, Elem b) { return a ^ b; }
    Elem mul(Elem a, Elem b) const
    {
        if (a == 0 || b == 0) return 0;
        return exp_[log_[a] + log_[b]];
    }
    Elem inv(Elem a) const;
    Elem div(Elem a, Elem b) const { return mul(a, inv(b)); }
    Elem pow(Elem a, std::uint64_t k) const;
    Elem square(Elem a) const { return mul(a, a); }
    /// Discrete log to base generator(); a must be nonzero.
    std::uint32_t log(Elem a) const;
    Elem antilog(std::uint32_t k) const { return exp_[k % (size_ - 1)]; }

    bool has_quadratic_subfield() const { return degree_ % 2 == 0; }
    /// Order q of the subfield with q^2 = size(); requires even degree.
    std::uint32_t subfield_order() const;
    /// a -> a^q over GF(q^2).
    Elem conjugate(Elem a) const;
    /// a -> a^(q+1) over GF(q^2); the result lies in GF(q).
    Elem norm(Elem a) const;
    /// Fixed points of conjugation, sorted.
    std::vector<Elem> subfield_elements() const;

    /// Absolute trace GF(2^e) -> GF(2).
    Elem trace(Elem a) const;

    bool operator==(const Field& o) const { return degree_ == o.degree_ && modulus_ == o.modulus_; }

private:
    int degree_;
    std::uint32_t modulus_;
    std::uint32_t size_;
    Elem generator_;
    std::vector<Elem> exp_;           // doubled to skip a modulo in mul
    std::vector<std::uint32_t> log_;
};

using FieldPtr = std::shared_ptr<const Field>;

/// Builds GF(2^e); throws std::invalid_argument outside 1..8.
FieldPtr make_field(int degree);

/// Pinned modulus for a degree (see Field).
std::uint32_t modulus_for_degree(int degree);

/// Carry-less product reduced modulo `modulus`; table-free reference path.
Elem polymul_mod(Elem a, Elem b, std::uint32_t modulus);

/// Irreducibility over GF(2) by trial division.
bool is_irreducible(std::uint32_t poly);

/// Value type bundling an element with its field, for readable arithmetic.
class FieldElement {
public:
    FieldElement(const Field& f, Elem v) : field_(&f), value_(v) {}

    Elem value() const { return value_; }
    const Field& field() const { return *field_; }

    FieldElement operator+(FieldElement o) const { return {*field_, value_ ^ o.value_}; }
    FieldElement operator-(FieldElement o) const { return *this + o; }
    FieldElement operator*(FieldElement o) const { return {*field_, field_->mul(value_, o.value_)}; }
    FieldElement operator/(FieldElement o) const { return {*field_, field_->div(value_, o.value_)}; }
    FieldElement pow(std::uint64_t k) const { return {*field_, field_->pow(value_, k)}; }
    FieldElement inverse() const { return {*field_, field_->inv(value_)}; }
    FieldElement conjugate() const { return {*field_, field_->conjugate(value_)}; }
    FieldElement norm() const { return {*field_, field_->norm(value_)}; }

    bool operator==(const FieldElement& o) const { return value_ == o.value_; }
    bool is_zero() const { return value_ == 0; }

private:
    const Field* field_;
    Elem value_;
};

}  // namespace hermit::galois
