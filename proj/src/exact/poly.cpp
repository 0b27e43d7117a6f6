#include "limord/exact.hpp"

#include <sstream>

namespace limord {

IntMatrix int_matrix(std::initializer_list<std::initializer_list<long>> rows)
{
    const Eigen::Index r = static_cast<Eigen::Index>(rows.size());
    const Eigen::Index c = r ? static_cast<Eigen::Index>(rows.begin()->size()) : 0;
    IntMatrix m(r, c);
    Eigen::Index i = 0;
    for (const auto& row : rows) {
        if (static_cast<Eigen::Index>(row.size()) != c) throw ShapeError("int_matrix: ragged rows");
        Eigen::Index j = 0;
        for (long x : row) m(i, j++) = x;
        ++i;
    }
    return m;
}

IntVector int_vector(std::initializer_list<long> xs)
{
    return int_vector(std::vector<long>(xs));
}

IntVector int_vector(const std::vector<long>& xs)
{
    IntVector v(static_cast<Eigen::Index>(xs.size()));
    for (size_t i = 0; i < xs.size(); ++i) v(static_cast<Eigen::Index>(i)) = xs[i];
    return v;
}

IntMatrix identity(Eigen::Index n)
{
    IntMatrix m = IntMatrix::Zero(n, n);
    for (Eigen::Index i = 0; i < n; ++i) m(i, i) = 1;
    return m;
}

std::string to_string(const IntVector& v)
{
    std::string s = "(";
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        if (i) s += ",";
        s += v(i).str();
    }
    return s + ")";
}

std::string to_string(const IntMatrix& m)
{
    std::string s = "[";
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        if (i) s += ",";
        s += "[";
        for (Eigen::Index j = 0; j < m.cols(); ++j) {
            if (j) s += ",";
            s += m(i, j).str();
        }
        s += "]";
    }
    return s + "]";
}

bool nonnegative(const IntVector& v)
{
    for (Eigen::Index i = 0; i < v.size(); ++i)
        if (v(i) < 0) return false;
    return true;
}

IntVector apply(const IntMatrix& m, const IntVector& v)
{
    if (m.cols() != v.size()) throw ShapeError("apply: " + std::to_string(m.cols()) + " columns, vector of " + std::to_string(v.size()));
    IntVector out(m.rows());
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        BigInt acc = 0;
        for (Eigen::Index j = 0; j < m.cols(); ++j)
            if (m(i, j) != 0 && v(j) != 0) acc += m(i, j) * v(j);
        out(i) = std::move(acc);
    }
    return out;
}

bool is_zero(const IntVector& v)
{
    for (Eigen::Index i = 0; i < v.size(); ++i)
        if (v(i) != 0) return false;
    return true;
}

QPoly to_q(const ZPoly& p)
{
    return QPoly(p.begin(), p.end());
}

BigInt content(const ZPoly& p)
{
    BigInt g = 0;
    for (const auto& c : p) g = gcd(g, abs(c));
    return g;
}

ZPoly primitive(const ZPoly& p)
{
    ZPoly r = p;
    trim(r);
    if (r.empty()) return r;
    BigInt g = content(r);
    if (r.back() < 0) g = -g;
    for (auto& c : r) c /= g;
    return r;
}

ZPoly primitive(const QPoly& p)
{
    QPoly t = p;
    trim(t);
    BigInt l = 1;
    for (const auto& c : t) l = lcm(l, denominator(c));
    ZPoly z;
    z.reserve(t.size());
    for (const auto& c : t) z.push_back(numerator(c) * (l / denominator(c)));
    return primitive(z);
}

template <class S>
static std::vector<S> add_impl(const std::vector<S>& a, const std::vector<S>& b, int sgn)
{
    std::vector<S> r(std::max(a.size(), b.size()), S(0));
    for (size_t i = 0; i < a.size(); ++i) r[i] += a[i];
    for (size_t i = 0; i < b.size(); ++i) r[i] += sgn > 0 ? b[i] : -b[i];
    trim(r);
    return r;
}

template <class S>
static std::vector<S> mul_impl(const std::vector<S>& a, const std::vector<S>& b)
{
    if (a.empty() || b.empty()) return {};
    std::vector<S> r(a.size() + b.size() - 1, S(0));
    for (size_t i = 0; i < a.size(); ++i) {
        if (a[i] == 0) continue;
        for (size_t j = 0; j < b.size(); ++j) r[i + j] += a[i] * b[j];
    }
    trim(r);
    return r;
}

ZPoly add(const ZPoly& a, const ZPoly& b) { return add_impl(a, b, 1); }
ZPoly sub(const ZPoly& a, const ZPoly& b) { return add_impl(a, b, -1); }
ZPoly mul(const ZPoly& a, const ZPoly& b) { return mul_impl(a, b); }
QPoly add(const QPoly& a, const QPoly& b) { return add_impl(a, b, 1); }
QPoly sub(const QPoly& a, const QPoly& b) { return add_impl(a, b, -1); }
QPoly mul(const QPoly& a, const QPoly& b) { return mul_impl(a, b); }

QPoly scale(const QPoly& a, const Rational& c)
{
    QPoly r = a;
    for (auto& x : r) x *= c;
    trim(r);
    return r;
}

void divmod(const QPoly& a, const QPoly& b, QPoly& q, QPoly& r)
{
    if (b.empty()) throw std::domain_error("divmod: division by zero polynomial");
    r = a;
    trim(r);
    q.assign(r.size() >= b.size() ? r.size() - b.size() + 1 : 0, Rational(0));
    const Rational lead = b.back();
    while (!r.empty() && r.size() >= b.size()) {
        const size_t shift = r.size() - b.size();
        const Rational c = r.back() / lead;
        q[shift] = c;
        for (size_t i = 0; i < b.size(); ++i) r[shift + i] -= c * b[i];
        r.pop_back();
        trim(r);
    }
    trim(q);
}

QPoly rem(const QPoly& a, const QPoly& b)
{
    QPoly q, r;
    divmod(a, b, q, r);
    return r;
}

QPoly monic(const QPoly& a)
{
    QPoly r = a;
    trim(r);
    if (r.empty()) return r;
    const Rational l = r.back();
    for (auto& c : r) c /= l;
    return r;
}

QPoly gcd(const QPoly& a, const QPoly& b)
{
    QPoly x = a, y = b;
    trim(x);
    trim(y);
    while (!y.empty()) {
        QPoly r = rem(x, y);
        x = std::move(y);
        y = std::move(r);
    }
    return monic(x);
}

std::optional<ZPoly> exact_div(const ZPoly& a, const ZPoly& b)
{
    if (b.empty()) return std::nullopt;
    ZPoly r = a;
    trim(r);
    if (r.empty()) return ZPoly{};
    if (r.size() < b.size()) return std::nullopt;
    ZPoly q(r.size() - b.size() + 1, BigInt(0));
    while (!r.empty() && r.size() >= b.size()) {
        const size_t shift = r.size() - b.size();
        if (r.back() % b.back() != 0) return std::nullopt;
        const BigInt c = r.back() / b.back();
        q[shift] = c;
        for (size_t i = 0; i < b.size(); ++i) r[shift + i] -= c * b[i];
        r.pop_back();
        trim(r);
    }
    if (!r.empty()) return std::nullopt;
    trim(q);
    return q;
}

ZPoly derivative(const ZPoly& p)
{
    ZPoly r;
    for (size_t i = 1; i < p.size(); ++i) r.push_back(p[i] * static_cast<long>(i));
    trim(r);
    return r;
}

QPoly derivative(const QPoly& p)
{
    QPoly r;
    for (size_t i = 1; i < p.size(); ++i) r.push_back(p[i] * static_cast<long>(i));
    trim(r);
    return r;
}

Rational eval(const ZPoly& p, const Rational& x)
{
    Rational r = 0;
    for (size_t i = p.size(); i-- > 0;) r = r * x + Rational(p[i]);
    return r;
}

Rational eval(const QPoly& p, const Rational& x)
{
    Rational r = 0;
    for (size_t i = p.size(); i-- > 0;) r = r * x + p[i];
    return r;
}

template <class S>
static std::string poly_str(const std::vector<S>& p, const std::string& var)
{
    if (p.empty()) return "0";
    std::ostringstream os;
    bool first = true;
    for (size_t i = p.size(); i-- > 0;) {
        const S& c = p[i];
        if (c == 0) continue;
        const bool neg = c < 0;
        const S a = neg ? S(-c) : c;
        if (first)
            os << (neg ? "-" : "");
        else
            os << (neg ? " - " : " + ");
        first = false;
        if (i == 0 || a != 1) {
            os << a.str();
            if (i > 0) os << "*";
        }
        if (i >= 1) os << var;
        if (i >= 2) os << "^" << i;
    }
    return os.str();
}

std::string to_string(const ZPoly& p, const std::string& var) { return poly_str(p, var); }
std::string to_string(const QPoly& p, const std::string& var) { return poly_str(p, var); }

ZPoly char_poly(const IntMatrix& m)
{
    if (m.rows() != m.cols()) throw ShapeError("char_poly: matrix is not square");
    const Eigen::Index n = m.rows();
    if (n == 0) return ZPoly{BigInt(1)};
    // coefficients from the highest degree down
    std::vector<BigInt> vect{BigInt(1), BigInt(-m(0, 0))};
    for (Eigen::Index r = 1; r < n; ++r) {
        const IntMatrix lead = m.topLeftCorner(r, r);
        const IntVector col = m.block(0, r, r, 1);
        const Eigen::Matrix<BigInt, 1, Eigen::Dynamic> row = m.block(r, 0, 1, r);
        std::vector<BigInt> t(static_cast<size_t>(r) + 2);
        t[0] = 1;
        t[1] = -m(r, r);
        IntVector cur = col;
        for (Eigen::Index k = 0; k < r; ++k) {
            t[static_cast<size_t>(k) + 2] = -(row * cur)(0, 0);
            cur = (lead * cur).eval();
        }
        std::vector<BigInt> next(static_cast<size_t>(r) + 2, BigInt(0));
        for (size_t i = 0; i < next.size(); ++i)
            for (size_t j = 0; j <= i && j < vect.size(); ++j) next[i] += t[i - j] * vect[j];
        vect = std::move(next);
    }
    ZPoly p(vect.rbegin(), vect.rend());
    trim(p);
    return p;
}

}  // namespace limord
