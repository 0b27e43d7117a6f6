#pragma once

#include <boost/multiprecision/gmp.hpp>
#include <boost/multiprecision/eigen.hpp>
#include <Eigen/Core>

#include <initializer_list>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace limord {

namespace mp = boost::multiprecision;

using BigInt = mp::number<mp::gmp_int, mp::et_off>;
using Rational = mp::number<mp::gmp_rational, mp::et_off>;

template <class S>
using Mat = Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic>;
template <class S>
using Vec = Eigen::Matrix<S, Eigen::Dynamic, 1>;

using IntMatrix = Mat<BigInt>;
using IntVector = Vec<BigInt>;

struct ShapeError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

IntMatrix int_matrix(std::initializer_list<std::initializer_list<long>> rows);
IntVector int_vector(std::initializer_list<long> xs);
IntVector int_vector(const std::vector<long>& xs);
IntMatrix identity(Eigen::Index n);

std::string to_string(const IntVector& v);
std::string to_string(const IntMatrix& m);

bool nonnegative(const IntVector& v);
bool is_zero(const IntVector& v);
// m * v without Eigen's temporaries; skips zero entries of m
IntVector apply(const IntMatrix& m, const IntVector& v);

// Fraction-free (Bareiss) determinant over any exact integral domain.
template <class Derived>
typename Derived::Scalar det(const Eigen::MatrixBase<Derived>& m)
{
    using S = typename Derived::Scalar;
    if (m.rows() != m.cols()) throw ShapeError("det: matrix is not square");
    const Eigen::Index n = m.rows();
    if (n == 0) return S(1);
    Mat<S> a = m;
    S sign(1), prev(1);
    for (Eigen::Index k = 0; k + 1 < n; ++k) {
        if (a(k, k) == 0) {
            Eigen::Index p = k + 1;
            while (p < n && a(p, k) == 0) ++p;
            if (p == n) return S(0);
            a.row(k).swap(a.row(p));
            sign = -sign;
        }
        for (Eigen::Index i = k + 1; i < n; ++i)
            for (Eigen::Index j = k + 1; j < n; ++j)
                a(i, j) = (a(i, j) * a(k, k) - a(i, k) * a(k, j)) / prev;
        prev = a(k, k);
    }
    return sign * a(n - 1, n - 1);
}

// rank by fraction-free elimination
template <class Derived>
Eigen::Index rank(const Eigen::MatrixBase<Derived>& m)
{
    using S = typename Derived::Scalar;
    Mat<S> a = m;
    Eigen::Index r = 0;
    S prev(1);
    for (Eigen::Index c = 0; c < a.cols() && r < a.rows(); ++c) {
        Eigen::Index p = r;
        while (p < a.rows() && a(p, c) == 0) ++p;
        if (p == a.rows()) continue;
        a.row(r).swap(a.row(p));
        for (Eigen::Index i = r + 1; i < a.rows(); ++i) {
            for (Eigen::Index j = c + 1; j < a.cols(); ++j) a(i, j) = (a(i, j) * a(r, c) - a(i, c) * a(r, j)) / prev;
            a(i, c) = 0;
        }
        prev = a(r, c);
        ++r;
    }
    return r;
}

template <class Derived>
Mat<typename Derived::Scalar> mat_pow(const Eigen::MatrixBase<Derived>& m, unsigned long k)
{
    using S = typename Derived::Scalar;
    if (m.rows() != m.cols()) throw ShapeError("mat_pow: matrix is not square");
    Mat<S> result = Mat<S>::Identity(m.rows(), m.cols());
    Mat<S> base = m;
    while (k) {
        if (k & 1) result = (result * base).eval();
        k >>= 1;
        if (k) base = (base * base).eval();
    }
    return result;
}

// ---- polynomials, coefficient vectors low degree first, no trailing zeros

using ZPoly = std::vector<BigInt>;
using QPoly = std::vector<Rational>;

template <class S>
void trim(std::vector<S>& p)
{
    while (!p.empty() && p.back() == 0) p.pop_back();
}
template <class S>
int degree(const std::vector<S>& p)
{
    return static_cast<int>(p.size()) - 1;
}

QPoly to_q(const ZPoly& p);
// Primitive integer polynomial with positive leading coefficient proportional to p.
ZPoly primitive(const QPoly& p);
ZPoly primitive(const ZPoly& p);
BigInt content(const ZPoly& p);

ZPoly add(const ZPoly& a, const ZPoly& b);
ZPoly sub(const ZPoly& a, const ZPoly& b);
ZPoly mul(const ZPoly& a, const ZPoly& b);
QPoly add(const QPoly& a, const QPoly& b);
QPoly sub(const QPoly& a, const QPoly& b);
QPoly mul(const QPoly& a, const QPoly& b);
QPoly scale(const QPoly& a, const Rational& c);
void divmod(const QPoly& a, const QPoly& b, QPoly& q, QPoly& r);
QPoly rem(const QPoly& a, const QPoly& b);
QPoly monic(const QPoly& a);
QPoly gcd(const QPoly& a, const QPoly& b);
// exact quotient a / b over the integers, nullopt if b does not divide a in Z[t]
std::optional<ZPoly> exact_div(const ZPoly& a, const ZPoly& b);
ZPoly derivative(const ZPoly& p);
QPoly derivative(const QPoly& p);
Rational eval(const ZPoly& p, const Rational& x);
Rational eval(const QPoly& p, const Rational& x);
std::string to_string(const ZPoly& p, const std::string& var = "t");
std::string to_string(const QPoly& p, const std::string& var = "t");

// det(tI - m), division free (Berkowitz).
ZPoly char_poly(const IntMatrix& m);

struct Factor {
    ZPoly poly;  // primitive, irreducible over Q, positive leading coefficient
    int multiplicity;
};
// Complete factorisation over Q of a nonzero polynomial (constant content dropped).
std::vector<Factor> factor(const ZPoly& p);
// Square-free factorisation: pairs (square-free primitive factor, multiplicity).
std::vector<Factor> squarefree_decomposition(const ZPoly& p);

// ---- real roots

// Number of distinct real roots of square-free p in the half-open interval (a, b].
int count_roots(const ZPoly& p, const Rational& a, const Rational& b);
Rational root_bound(const ZPoly& p);

struct AlgebraicReal {
    ZPoly poly;  // irreducible (square-free), primitive
    Rational lo, hi;  // exactly one root in (lo, hi), lo and hi not roots

    void refine();  // halves the interval
    std::string describe() const;
    double approx() const;
};

std::vector<AlgebraicReal> real_roots(const ZPoly& squarefree);
std::optional<AlgebraicReal> largest_real_root(const ZPoly& squarefree);
// -1, 0, +1
int compare(AlgebraicReal a, AlgebraicReal b);
int compare(AlgebraicReal a, const Rational& r);

// ---- the field Q(lambda) = Q[t]/(minimal polynomial)

class NumberField {
public:
    explicit NumberField(AlgebraicReal generator);
    const AlgebraicReal& generator() const { return gen_; }
    int degree() const { return ::limord::degree(gen_.poly); }

    QPoly reduce(const QPoly& a) const;
    QPoly add(const QPoly& a, const QPoly& b) const;
    QPoly sub(const QPoly& a, const QPoly& b) const;
    QPoly mul(const QPoly& a, const QPoly& b) const;
    QPoly inv(const QPoly& a) const;
    QPoly from_int(const BigInt& x) const;
    QPoly gen() const;  // the class of t
    bool is_zero(const QPoly& a) const { return reduce(a).empty(); }
    // exact sign of a(lambda); interval bisection up to budget, then a Sturm fallback
    int sign(const QPoly& a, int budget = 256) const;

private:
    AlgebraicReal gen_;
    QPoly mod_;  // monic minimal polynomial
};

// Nullspace basis of a matrix over the field (rows of vectors).
std::vector<std::vector<QPoly>> nullspace(const NumberField& k, std::vector<std::vector<QPoly>> a);

// ---- Perron data

struct ImprimitiveError : std::domain_error {
    using std::domain_error::domain_error;
};

bool is_primitive(const IntMatrix& m);

struct PerronData {
    IntMatrix matrix;
    AlgebraicReal eigenvalue;
    std::vector<QPoly> left_eigenvector;  // entries in Q(eigenvalue), first nonzero entry 1

    NumberField field() const { return NumberField(eigenvalue); }
    // w X - lambda w reduced in the field; all zero for valid data
    std::vector<QPoly> eigen_residual() const;
};

PerronData perron(const IntMatrix& m);

int sign_dot(const IntVector& v, const PerronData& p, int budget = 256);

// Nonnegative left eigenvectors of a nonnegative matrix, one per real eigenvalue
// that is the largest real root of an irreducible factor of the characteristic
// polynomial and whose left eigenspace is one-dimensional with sign-coherent entries.
struct EigenFunctional {
    AlgebraicReal eigenvalue;
    std::vector<QPoly> vector;
};
std::vector<EigenFunctional> nonnegative_eigenfunctionals(const IntMatrix& m);
int sign_dot(const IntVector& v, const EigenFunctional& f, int budget = 256);

}  // namespace limord
