#include "doctest.h"

#include <map>
#include <set>

#include "hermit/galois.hpp"

using namespace hermit::galois;

namespace {

// Table-free power using only carry-less multiplication.
Elem slow_pow(Elem a, unsigned k, std::uint32_t modulus)
{
    Elem acc = 1;
    for (unsigned i = 0; i < k; ++i) acc = polymul_mod(acc, a, modulus);
    return acc;
}

}  // namespace

TEST_CASE("pinned moduli and sizes")
{
    CHECK(make_field(1)->modulus() == 0b10);
    CHECK(make_field(2)->modulus() == 0b111);
    CHECK(make_field(3)->modulus() == 0b1011);
    CHECK(make_field(4)->modulus() == 0b10011);
    CHECK(make_field(6)->modulus() == 0b1011011);
    CHECK(make_field(5)->modulus() == 37);
    CHECK(make_field(7)->modulus() == 131);
    CHECK(make_field(8)->modulus() == 283);
    CHECK(make_field(2)->size() == 4);
    CHECK(make_field(2)->order_of_group() == 3);
    for (int e = 1; e <= 8; ++e) CHECK(is_irreducible(make_field(e)->modulus()));
}

TEST_CASE("degree range is enforced")
{
    CHECK_THROWS_AS(make_field(0), std::invalid_argument);
    CHECK_THROWS_AS(make_field(9), std::invalid_argument);
}

TEST_CASE("GF(16): x generates and has order 15")
{
    auto f = make_field(4);
    CHECK(f->generator() == 2);
    CHECK(slow_pow(2, 15, f->modulus()) == 1);
    for (unsigned k = 1; k < 15; ++k) CHECK(slow_pow(2, k, f->modulus()) != 1);
    CHECK(f->pow(2, 15) == 1);
}

TEST_CASE("GF(2) Frobenius is trivial")
{
    auto f = make_field(1);
    for (Elem a = 0; a < 2; ++a) CHECK(f->square(a) == a);
}

TEST_CASE("table multiplication matches carry-less reference")
{
    for (int e = 1; e <= 8; ++e) {
        auto f = make_field(e);
        for (Elem a = 0; a < f->size(); ++a)
            for (Elem b = 0; b < f->size(); ++b) REQUIRE(f->mul(a, b) == polymul_mod(a, b, f->modulus()));
    }
}

TEST_CASE("inverse, division, Frobenius")
{
    for (int e = 1; e <= 4; ++e) {
        auto f = make_field(e);
        CHECK_THROWS_AS(f->inv(0), std::domain_error);
        for (Elem a = 1; a < f->size(); ++a) {
            CHECK(f->mul(a, f->inv(a)) == 1);
            CHECK(f->pow(a, f->size()) == a);
        }
        for (Elem a = 0; a < f->size(); ++a)
            for (Elem b = 0; b < f->size(); ++b) CHECK(f->square(a ^ b) == (f->square(a) ^ f->square(b)));
    }
}

TEST_CASE("conjugation over GF(16)/GF(4)")
{
    auto f = make_field(4);
    CHECK(f->subfield_order() == 4);
    CHECK(f->conjugate(0) == 0);
    const Elem g = f->generator();
    CHECK(f->conjugate(g) == slow_pow(g, 4, f->modulus()));
    for (Elem a = 0; a < 16; ++a) CHECK(f->conjugate(f->conjugate(a)) == a);
    const auto sub = f->subfield_elements();
    CHECK(sub.size() == 4);
    for (Elem a : sub) CHECK(f->conjugate(a) == a);
    for (Elem a = 0; a < 16; ++a)
        for (Elem b = 0; b < 16; ++b) CHECK(f->conjugate(f->mul(a, b)) == f->mul(f->conjugate(a), f->conjugate(b)));
    CHECK_THROWS_AS(make_field(3)->conjugate(1), std::invalid_argument);
}

TEST_CASE("norm is 5-to-1 onto GF(4)*")
{
    auto f = make_field(4);
    CHECK(f->norm(0) == 0);
    CHECK(f->norm(1) == 1);
    std::map<Elem, int> fibres;
    for (Elem a = 1; a < 16; ++a) {
        const Elem n = f->norm(a);
        CHECK(n == slow_pow(a, 5, f->modulus()));
        CHECK(f->conjugate(n) == n);
        ++fibres[n];
    }
    CHECK(fibres.size() == 3);
    for (auto [v, c] : fibres) CHECK(c == 5);
    for (int e : {2, 4, 6, 8}) {
        auto g = make_field(e);
        for (Elem a = 0; a < g->size(); ++a)
            for (Elem b = 0; b < g->size(); b += 7) CHECK(g->norm(g->mul(a, b)) == g->mul(g->norm(a), g->norm(b)));
    }
}

TEST_CASE("FieldElement wrapper")
{
    auto f = make_field(4);
    FieldElement a(*f, 6);
    FieldElement b(*f, 11);
    CHECK((a + b).value() == (6 ^ 11));
    CHECK((a * b).value() == f->mul(6, 11));
    CHECK(((a * b) / b) == a);
    CHECK((a * a.inverse()).value() == 1);
    CHECK(a.conjugate().value() == f->conjugate(6));
    CHECK(a.norm().value() == f->norm(6));
}
