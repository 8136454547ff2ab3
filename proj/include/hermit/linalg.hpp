#pragma once

#include <span>
#include <vector>

#include "hermit/galois.hpp"

namespace hermit::linalg {

using galois::Elem;
using galois::Field;
using Vec = std::vector<Elem>;

/// Dense row-major matrix over a finite field.
struct Matrix {
    int rows = 0;
    int cols = 0;
    std::vector<Elem> data;

    Matrix() = default;
    Matrix(int r, int c) : rows(r), cols(c), data(static_cast<std::size_t>(r) * c, 0) {}
    static Matrix from_rows(const std::vector<Vec>& rs, int cols);

    Elem& at(int r, int c) { return data[static_cast<std::size_t>(r) * cols + c]; }
    Elem at(int r, int c) const { return data[static_cast<std::size_t>(r) * cols + c]; }
    Vec row(int r) const;
};

struct Echelon {
    Matrix reduced;          // only the nonzero rows
    std::vector<int> pivots; // pivot column of each row
    int rank() const { return static_cast<int>(pivots.size()); }
};

/// Reduced row echelon form (pivots normalized to 1).
Echelon rref(const Field& f, Matrix m);
int rank(const Field& f, const std::vector<Vec>& rows, int cols);
/// Basis of {x : M x = 0}, each vector with its pivot-free coordinate set to 1.
std::vector<Vec> null_space(const Field& f, const Matrix& m);
/// Inverse of a square matrix; throws std::domain_error when singular.
Matrix inverse(const Field& f, const Matrix& m);
Vec multiply(const Field& f, const Matrix& m, std::span<const Elem> x);
Elem dot(const Field& f, std::span<const Elem> a, std::span<const Elem> b);

}  // namespace hermit::linalg
