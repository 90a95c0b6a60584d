#ifndef EOTR_RATIONAL_HPP
#define EOTR_RATIONAL_HPP

#include <compare>
#include <cstdint>
#include <functional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <string_view>

#include <gmpxx.h>

namespace eotr
{

// Exact rational scalar. Always kept in canonical form (gcd(num, den) = 1, den > 0);
// GMP canonicalizes after every arithmetic operation, construction from
// numerator/denominator pairs canonicalizes explicitly.
class Rat
{
public:
    Rat() = default;
    Rat(long v) : m_value(v) {}
    Rat(int v) : m_value(v) {}
    Rat(long num, long den)
    {
        if (den == 0) {
            throw std::domain_error("Rat: zero denominator");
        }
        m_value = mpq_class(num, den);
        m_value.canonicalize();
    }
    explicit Rat(const mpz_class &num) : m_value(num) {}
    Rat(const mpz_class &num, const mpz_class &den)
    {
        if (den == 0) {
            throw std::domain_error("Rat: zero denominator");
        }
        m_value = mpq_class(num, den);
        m_value.canonicalize();
    }
    explicit Rat(mpq_class v) : m_value(std::move(v)) { m_value.canonicalize(); }

    // Parses "p/q" or "p". Whitespace is not accepted.
    static Rat parse(std::string_view s)
    {
        if (s.empty()) {
            throw std::invalid_argument("Rat::parse: empty string");
        }
        const auto slash = s.find('/');
        auto parse_int = [](std::string_view t) {
            if (t.empty()) {
                throw std::invalid_argument("Rat::parse: malformed integer");
            }
            std::size_t start = (t[0] == '-' || t[0] == '+') ? 1u : 0u;
            if (start == t.size()) {
                throw std::invalid_argument("Rat::parse: malformed integer");
            }
            for (auto i = start; i < t.size(); ++i) {
                if (t[i] < '0' || t[i] > '9') {
                    throw std::invalid_argument("Rat::parse: malformed integer '" + std::string(t) + "'");
                }
            }
            return mpz_class(std::string(t[0] == '+' ? t.substr(1) : t), 10);
        };
        if (slash == std::string_view::npos) {
            return Rat(parse_int(s));
        }
        return Rat(parse_int(s.substr(0, slash)), parse_int(s.substr(slash + 1)));
    }

    // Canonical "p/q" text, q > 0. Integers are still written with "/1".
    std::string str() const
    {
        return m_value.get_num().get_str() + "/" + m_value.get_den().get_str();
    }

    const mpq_class &value() const { return m_value; }
    mpz_class num() const { return m_value.get_num(); }
    mpz_class den() const { return m_value.get_den(); }

    bool is_zero() const { return sgn(m_value) == 0; }
    int sign() const { return sgn(m_value); }

    Rat &operator+=(const Rat &o)
    {
        m_value += o.m_value;
        return *this;
    }
    Rat &operator-=(const Rat &o)
    {
        m_value -= o.m_value;
        return *this;
    }
    Rat &operator*=(const Rat &o)
    {
        m_value *= o.m_value;
        return *this;
    }
    Rat &operator/=(const Rat &o)
    {
        if (o.is_zero()) {
            throw std::domain_error("Rat: division by zero");
        }
        m_value /= o.m_value;
        return *this;
    }

    friend Rat operator+(Rat a, const Rat &b) { return a += b; }
    friend Rat operator-(Rat a, const Rat &b) { return a -= b; }
    friend Rat operator*(Rat a, const Rat &b) { return a *= b; }
    friend Rat operator/(Rat a, const Rat &b) { return a /= b; }
    friend Rat operator-(const Rat &a) { return Rat(mpq_class(-a.m_value)); }

    friend bool operator==(const Rat &a, const Rat &b) { return a.m_value == b.m_value; }
    friend std::strong_ordering operator<=>(const Rat &a, const Rat &b)
    {
        const int c = cmp(a.m_value, b.m_value);
        return c < 0 ? std::strong_ordering::less : (c > 0 ? std::strong_ordering::greater : std::strong_ordering::equal);
    }

    friend std::ostream &operator<<(std::ostream &os, const Rat &r) { return os << r.m_value; }

private:
    mpq_class m_value;
};

// (-1)^k for any integer k.
inline int sign_pow(long k) { return (k % 2 == 0) ? 1 : -1; }

// Double factorial (2k-1)!! extended by (-1)!! = 1.
inline mpz_class odd_double_factorial(long k)
{
    if (k < 0) {
        throw std::domain_error("odd_double_factorial: negative argument");
    }
    mpz_class r = 1;
    for (long m = 2 * k - 1; m > 1; m -= 2) {
        r *= m;
    }
    return r;
}

inline Rat binomial(long n, long k)
{
    if (k < 0 || n < 0 || k > n) {
        return Rat(0);
    }
    mpz_class r;
    mpz_bin_uiui(r.get_mpz_t(), static_cast<unsigned long>(n), static_cast<unsigned long>(k));
    return Rat(r);
}

// Generalized binomial coefficient C(alpha, m) for rational alpha.
inline Rat binomial(const Rat &alpha, long m)
{
    Rat r(1);
    for (long i = 0; i < m; ++i) {
        r *= (alpha - Rat(i)) / Rat(i + 1);
    }
    return r;
}

} // namespace eotr

#endif
