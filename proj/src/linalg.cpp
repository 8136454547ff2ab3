#include "hermit/linalg.hpp"

#include <stdexcept>
#include <utility>

namespace hermit::linalg {

Matrix Matrix::from_rows(const std::vector<Vec>& rs, int cols)
{
    Matrix m(static_cast<int>(rs.size()), cols);
    for (int r = 0; r < m.rows; ++r)
        for (int c = 0; c < cols; ++c) m.at(r, c) = rs[r][c];
    return m;
}

Vec Matrix::row(int r) const
{
    return Vec(data.begin() + static_cast<std::ptrdiff_t>(r) * cols,
               data.begin() + static_cast<std::ptrdiff_t>(r + 1) * cols);
}

Echelon rref(const Field& f, Matrix m)
{
    Echelon e;
    int lead = 0;
    for (int c = 0; c < m.cols && lead < m.rows; ++c) {
        int piv = -1;
        for (int r = lead; r < m.rows; ++r)
            if (m.at(r, c) != 0) {
                piv = r;
                break;
            }
        if (piv < 0) continue;
        if (piv != lead)
            for (int k = 0; k < m.cols; ++k) std::swap(m.at(piv, k), m.at(lead, k));
        const Elem s = f.inv(m.at(lead, c));
        for (int k = 0; k < m.cols; ++k) m.at(lead, k) = f.mul(m.at(lead, k), s);
        for (int r = 0; r < m.rows; ++r) {
            if (r == lead || m.at(r, c) == 0) continue;
            const Elem t = m.at(r, c);
            for (int k = 0; k < m.cols; ++k) m.at(r, k) ^= f.mul(t, m.at(lead, k));
        }
        e.pivots.push_back(c);
        ++lead;
    }
    e.reduced = Matrix(lead, m.cols);
    for (int r = 0; r < lead; ++r)
        for (int k = 0; k < m.cols; ++k) e.reduced.at(r, k) = m.at(r, k);
    return e;
}

int rank(const Field& f, const std::vector<Vec>& rows, int cols)
{
    if (rows.empty()) return 0;
    return rref(f, Matrix::from_rows(rows, cols)).rank();
}

std::vector<Vec> null_space(const Field& f, const Matrix& m)
{
    const Echelon e = rref(f, m);
    std::vector<bool> is_pivot(m.cols, false);
    for (int p : e.pivots) is_pivot[p] = true;
    std::vector<Vec> basis;
    for (int free = 0; free < m.cols; ++free) {
        if (is_pivot[free]) continue;
        Vec x(m.cols, 0);
        x[free] = 1;
        for (int r = 0; r < e.rank(); ++r) x[e.pivots[r]] = e.reduced.at(r, free);
        basis.push_back(std::move(x));
    }
    return basis;
}

Matrix inverse(const Field& f, const Matrix& m)
{
    if (m.rows != m.cols) throw std::invalid_argument("inverse of non-square matrix");
    const int n = m.rows;
    Matrix aug(n, 2 * n);
    for (int r = 0; r < n; ++r) {
        for (int c = 0; c < n; ++c) aug.at(r, c) = m.at(r, c);
        aug.at(r, n + r) = 1;
    }
    const Echelon e = rref(f, aug);
    if (e.rank() < n || e.pivots[n - 1] != n - 1) throw std::domain_error("singular matrix");
    Matrix out(n, n);
    for (int r = 0; r < n; ++r)
        for (int c = 0; c < n; ++c) out.at(r, c) = e.reduced.at(r, n + c);
    return out;
}

Vec multiply(const Field& f, const Matrix& m, std::span<const Elem> x)
{
    Vec y(m.rows, 0);
    for (int r = 0; r < m.rows; ++r) {
        Elem acc = 0;
        for (int c = 0; c < m.cols; ++c) acc ^= f.mul(m.at(r, c), x[c]);
        y[r] = acc;
    }
    return y;
}

Elem dot(const Field& f, std::span<const Elem> a, std::span<const Elem> b)
{
    Elem acc = 0;
    for (std::size_t i = 0; i < a.size(); ++i) acc ^= f.mul(a[i], b[i]);
    return acc;
}

}  // namespace hermit::linalg
