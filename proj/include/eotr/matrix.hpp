#ifndef EOTR_MATRIX_HPP
#define EOTR_MATRIX_HPP

#include <cstddef>
#include <initializer_list>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <utility>
#include <vector>

#include <eotr/rational.hpp>

namespace eotr
{

// Small dense matrix over Rat, row-major.
class Mat
{
public:
    Mat() = default;
    Mat(std::size_t rows, std::size_t cols) : m_rows(rows), m_cols(cols), m_data(rows * cols, Rat(0)) {}
    Mat(std::initializer_list<std::initializer_list<Rat>> rows)
    {
        m_rows = rows.size();
        m_cols = m_rows ? rows.begin()->size() : 0;
        for (const auto &r : rows) {
            if (r.size() != m_cols) {
                throw std::invalid_argument("Mat: ragged initializer");
            }
            m_data.insert(m_data.end(), r.begin(), r.end());
        }
    }

    static Mat identity(std::size_t n)
    {
        Mat m(n, n);
        for (std::size_t i = 0; i < n; ++i) {
            m(i, i) = Rat(1);
        }
        return m;
    }

    std::size_t rows() const { return m_rows; }
    std::size_t cols() const { return m_cols; }
    bool square() const { return m_rows == m_cols; }

    Rat &operator()(std::size_t i, std::size_t j) { return m_data[i * m_cols + j]; }
    const Rat &operator()(std::size_t i, std::size_t j) const { return m_data[i * m_cols + j]; }

    bool is_zero() const
    {
        for (const auto &x : m_data) {
            if (!x.is_zero()) {
                return false;
            }
        }
        return true;
    }

    Mat transpose() const
    {
        Mat t(m_cols, m_rows);
        for (std::size_t i = 0; i < m_rows; ++i) {
            for (std::size_t j = 0; j < m_cols; ++j) {
                t(j, i) = (*this)(i, j);
            }
        }
        return t;
    }

    Mat &operator+=(const Mat &o)
    {
        check_same(o);
        for (std::size_t k = 0; k < m_data.size(); ++k) {
            m_data[k] += o.m_data[k];
        }
        return *this;
    }
    Mat &operator-=(const Mat &o)
    {
        check_same(o);
        for (std::size_t k = 0; k < m_data.size(); ++k) {
            m_data[k] -= o.m_data[k];
        }
        return *this;
    }
    Mat &operator*=(const Rat &c)
    {
        for (auto &x : m_data) {
            x *= c;
        }
        return *this;
    }

    friend Mat operator+(Mat a, const Mat &b) { return a += b; }
    friend Mat operator-(Mat a, const Mat &b) { return a -= b; }
    friend Mat operator*(Mat a, const Rat &c) { return a *= c; }
    friend Mat operator*(const Rat &c, Mat a) { return a *= c; }
    friend Mat operator*(const Mat &a, const Mat &b)
    {
        if (a.m_cols != b.m_rows) {
            throw std::invalid_argument("Mat: dimension mismatch in product");
        }
        Mat r(a.m_rows, b.m_cols);
        for (std::size_t i = 0; i < a.m_rows; ++i) {
            for (std::size_t k = 0; k < a.m_cols; ++k) {
                const Rat &x = a(i, k);
                if (x.is_zero()) {
                    continue;
                }
                for (std::size_t j = 0; j < b.m_cols; ++j) {
                    if (!b(k, j).is_zero()) {
                        r(i, j) += x * b(k, j);
                    }
                }
            }
        }
        return r;
    }
    friend std::vector<Rat> operator*(const Mat &a, const std::vector<Rat> &v)
    {
        if (a.m_cols != v.size()) {
            throw std::invalid_argument("Mat: dimension mismatch in matrix-vector product");
        }
        std::vector<Rat> r(a.m_rows, Rat(0));
        for (std::size_t i = 0; i < a.m_rows; ++i) {
            for (std::size_t j = 0; j < a.m_cols; ++j) {
                r[i] += a(i, j) * v[j];
            }
        }
        return r;
    }

    friend bool operator==(const Mat &a, const Mat &b)
    {
        return a.m_rows == b.m_rows && a.m_cols == b.m_cols && a.m_data == b.m_data;
    }

    friend std::ostream &operator<<(std::ostream &os, const Mat &m)
    {
        os << "[";
        for (std::size_t i = 0; i < m.m_rows; ++i) {
            os << (i ? "; " : "");
            for (std::size_t j = 0; j < m.m_cols; ++j) {
                os << (j ? " " : "") << m(i, j);
            }
        }
        return os << "]";
    }

private:
    void check_same(const Mat &o) const
    {
        if (m_rows != o.m_rows || m_cols != o.m_cols) {
            throw std::invalid_argument("Mat: dimension mismatch");
        }
    }

    std::size_t m_rows = 0;
    std::size_t m_cols = 0;
    std::vector<Rat> m_data;
};

// Gauss-Jordan inverse; nullopt when singular.
inline std::optional<Mat> inverse(const Mat &m)
{
    if (!m.square()) {
        throw std::invalid_argument("inverse: matrix not square");
    }
    const std::size_t n = m.rows();
    Mat a = m;
    Mat inv = Mat::identity(n);
    for (std::size_t c = 0; c < n; ++c) {
        std::size_t p = c;
        while (p < n && a(p, c).is_zero()) {
            ++p;
        }
        if (p == n) {
            return std::nullopt;
        }
        if (p != c) {
            for (std::size_t j = 0; j < n; ++j) {
                std::swap(a(p, j), a(c, j));
                std::swap(inv(p, j), inv(c, j));
            }
        }
        const Rat piv = a(c, c);
        for (std::size_t j = 0; j < n; ++j) {
            a(c, j) /= piv;
            inv(c, j) /= piv;
        }
        for (std::size_t r = 0; r < n; ++r) {
            if (r == c || a(r, c).is_zero()) {
                continue;
            }
            const Rat f = a(r, c);
            for (std::size_t j = 0; j < n; ++j) {
                a(r, j) -= f * a(c, j);
                inv(r, j) -= f * inv(c, j);
            }
        }
    }
    return inv;
}

inline Rat determinant(const Mat &m)
{
    if (!m.square()) {
        throw std::invalid_argument("determinant: matrix not square");
    }
    const std::size_t n = m.rows();
    Mat a = m;
    Rat det(1);
    for (std::size_t c = 0; c < n; ++c) {
        std::size_t p = c;
        while (p < n && a(p, c).is_zero()) {
            ++p;
        }
        if (p == n) {
            return Rat(0);
        }
        if (p != c) {
            for (std::size_t j = 0; j < n; ++j) {
                std::swap(a(p, j), a(c, j));
            }
            det = -det;
        }
        det *= a(c, c);
        for (std::size_t r = c + 1; r < n; ++r) {
            if (a(r, c).is_zero()) {
                continue;
            }
            const Rat f = a(r, c) / a(c, c);
            for (std::size_t j = c; j < n; ++j) {
                a(r, j) -= f * a(c, j);
            }
        }
    }
    return det;
}

} // namespace eotr

#endif
