#include "limord/exact.hpp"

#include <algorithm>

namespace limord {

namespace {

int sgn(const Rational& x) { return x > 0 ? 1 : (x < 0 ? -1 : 0); }

std::vector<ZPoly> sturm_chain(const ZPoly& p)
{
    std::vector<QPoly> chain{to_q(p), derivative(to_q(p))};
    while (!chain.back().empty()) {
        QPoly r = rem(chain[chain.size() - 2], chain.back());
        if (r.empty()) break;
        chain.push_back(scale(r, Rational(-1)));
    }
    std::vector<ZPoly> out;
    for (const auto& q : chain) {
        // positive rescaling keeps the sign pattern
        QPoly t = q;
        trim(t);
        if (t.empty()) continue;
        ZPoly z = primitive(t);
        if ((t.back() < 0) != (z.back() < 0)) {
            for (auto& c : z) c = -c;
        }
        out.push_back(z);
    }
    return out;
}

int variations(const std::vector<ZPoly>& chain, const Rational& x)
{
    int v = 0, last = 0;
    for (const auto& p : chain) {
        const int s = sgn(eval(p, x));
        if (s == 0) continue;
        if (last != 0 && s != last) ++v;
        last = s;
    }
    return v;
}

struct Interval {
    Rational lo, hi;
};

Interval imul(const Interval& a, const Interval& b)
{
    Rational c[4] = {a.lo * b.lo, a.lo * b.hi, a.hi * b.lo, a.hi * b.hi};
    return {*std::min_element(c, c + 4), *std::max_element(c, c + 4)};
}

Interval ieval(const QPoly& p, const Interval& x)
{
    Interval r{Rational(0), Rational(0)};
    for (size_t i = p.size(); i-- > 0;) {
        r = imul(r, x);
        r.lo += p[i];
        r.hi += p[i];
    }
    return r;
}

// split point in (lo, hi) that is not a root of p
Rational split_point(const ZPoly& p, const Rational& lo, const Rational& hi)
{
    for (int d = 2;; ++d) {
        for (int k = 1; k < d; ++k) {
            Rational m = lo + (hi - lo) * Rational(k, d);
            if (eval(p, m) != 0) return m;
        }
    }
}

}  // namespace

int count_roots(const ZPoly& p, const Rational& a, const Rational& b)
{
    if (degree(p) < 1) return 0;
    auto chain = sturm_chain(p);
    return variations(chain, a) - variations(chain, b);
}

Rational root_bound(const ZPoly& p)
{
    Rational m = 0;
    for (size_t i = 0; i + 1 < p.size(); ++i) {
        Rational r(abs(p[i]), abs(p.back()));
        if (r > m) m = r;
    }
    return m + 1;
}

void AlgebraicReal::refine()
{
    Rational mid = (lo + hi) / 2;
    const Rational fm = eval(poly, mid);
    if (fm == 0) {
        const Rational w = (hi - lo) / 4;
        lo = mid - w;
        hi = mid + w;
        return;
    }
    if (sgn(eval(poly, lo)) != sgn(fm))
        hi = mid;
    else
        lo = mid;
}

std::string AlgebraicReal::describe() const
{
    return "root of " + to_string(poly) + " in (" + lo.str() + ", " + hi.str() + ")";
}

double AlgebraicReal::approx() const
{
    AlgebraicReal c = *this;
    for (int i = 0; i < 60; ++i) c.refine();
    return ((c.lo + c.hi) / 2).convert_to<double>();
}

std::vector<AlgebraicReal> real_roots(const ZPoly& squarefree)
{
    ZPoly p = primitive(squarefree);
    std::vector<AlgebraicReal> out;
    if (degree(p) < 1) return out;
    auto chain = sturm_chain(p);
    Rational b = root_bound(p);
    std::vector<Interval> work{{-b, b}};
    while (!work.empty()) {
        Interval iv = work.back();
        work.pop_back();
        const int n = variations(chain, iv.lo) - variations(chain, iv.hi);
        if (n == 0) continue;
        if (n == 1 && eval(p, iv.hi) != 0 && eval(p, iv.lo) != 0) {
            out.push_back({p, iv.lo, iv.hi});
            continue;
        }
        Rational m = split_point(p, iv.lo, iv.hi);
        if (n == 1 && eval(p, iv.hi) == 0) {
            // the single root sits on hi: re-centre
            const Rational w = iv.hi - m;
            out.push_back({p, iv.hi - w / 2, iv.hi + w / 2});
            AlgebraicReal& r = out.back();
            while (count_roots(p, r.lo, r.hi) != 1 || eval(p, r.hi + (r.hi - r.lo)) == 0) {
                const Rational ww = (r.hi - r.lo) / 4;
                r.lo = iv.hi - ww;
                r.hi = iv.hi + ww;
            }
            continue;
        }
        work.push_back({iv.lo, m});
        work.push_back({m, iv.hi});
    }
    // rational roots placed on an interval boundary need their interval to exclude other roots
    for (auto& r : out) {
        while (count_roots(p, r.lo, r.hi) != 1 || eval(p, r.lo) == 0 || eval(p, r.hi) == 0) {
            r.refine();
        }
    }
    std::sort(out.begin(), out.end(), [](const AlgebraicReal& a, const AlgebraicReal& b) { return a.hi <= b.lo; });
    return out;
}

std::optional<AlgebraicReal> largest_real_root(const ZPoly& squarefree)
{
    ZPoly p = primitive(squarefree);
    if (degree(p) < 1) return std::nullopt;
    auto chain = sturm_chain(p);
    Rational b = root_bound(p);
    Rational lo = -b, hi = b;
    if (variations(chain, lo) - variations(chain, hi) == 0) return std::nullopt;
    // shrink from below while keeping the largest root inside (lo, hi]
    while (true) {
        const int n = variations(chain, lo) - variations(chain, hi);
        if (n == 1 && eval(p, lo) != 0 && eval(p, hi) != 0) break;
        Rational m = split_point(p, lo, hi);
        if (variations(chain, m) - variations(chain, hi) >= 1)
            lo = m;
        else
            hi = m;
        if (eval(p, hi) == 0 && variations(chain, lo) - variations(chain, hi) == 1) {
            // rational root exactly at hi
            const Rational w = (hi - lo) / 2;
            Rational r = hi;
            lo = r - w;
            hi = r + w;
            while (count_roots(p, lo, hi) != 1 || eval(p, lo) == 0 || eval(p, hi) == 0) {
                lo = (lo + r) / 2;
                hi = (hi + r) / 2;
            }
            break;
        }
    }
    return AlgebraicReal{p, lo, hi};
}

namespace {

bool contains_common_root(const ZPoly& g, const AlgebraicReal& a)
{
    // the root of a.poly in (a.lo, a.hi) is a root of g iff g has a root there
    return count_roots(g, a.lo, a.hi) > 0;
}

}  // namespace

int compare(AlgebraicReal a, AlgebraicReal b)
{
    ZPoly g = primitive(gcd(to_q(a.poly), to_q(b.poly)));
    if (degree(g) >= 1) {
        // square-free part of the common factor
        ZPoly gs = primitive(gcd(to_q(g), derivative(to_q(g))));
        if (degree(gs) >= 1) {
            auto q = exact_div(g, gs);
            if (q) g = primitive(*q);
        }
        if (contains_common_root(g, a) && contains_common_root(g, b)) {
            // both are roots of g; restrict to g and compare there
            a.poly = g;
            b.poly = g;
            while (count_roots(g, a.lo, a.hi) != 1) a.refine();
            while (count_roots(g, b.lo, b.hi) != 1) b.refine();
            while (true) {
                const Rational lo = std::max(a.lo, b.lo), hi = std::min(a.hi, b.hi);
                if (lo >= hi) break;
                if (count_roots(g, lo, hi) == 1 && eval(g, hi) != 0) {
                    // one root of g in the overlap: both intervals hold that root
                    return 0;
                }
                a.refine();
                b.refine();
            }
        }
    }
    while (!(a.hi <= b.lo || b.hi <= a.lo)) {
        a.refine();
        b.refine();
    }
    return a.hi <= b.lo ? -1 : 1;
}

int compare(AlgebraicReal a, const Rational& r)
{
    if (eval(a.poly, r) == 0 && a.lo < r && r < a.hi) return 0;
    while (a.lo <= r && r <= a.hi) a.refine();
    return a.hi < r ? -1 : 1;
}

// ---------------------------------------------------------------- number field

NumberField::NumberField(AlgebraicReal generator) : gen_(std::move(generator)), mod_(monic(to_q(gen_.poly))) {}

QPoly NumberField::reduce(const QPoly& a) const
{
    QPoly t = a;
    trim(t);
    if (t.size() < mod_.size()) return t;
    return rem(t, mod_);
}

QPoly NumberField::add(const QPoly& a, const QPoly& b) const { return reduce(limord::add(a, b)); }
QPoly NumberField::sub(const QPoly& a, const QPoly& b) const { return reduce(limord::sub(a, b)); }
QPoly NumberField::mul(const QPoly& a, const QPoly& b) const { return reduce(limord::mul(a, b)); }

QPoly NumberField::inv(const QPoly& a) const
{
    QPoly r0 = mod_, r1 = reduce(a);
    if (r1.empty()) throw std::domain_error("NumberField::inv: zero element");
    QPoly s0{}, s1{Rational(1)};
    while (limord::degree(r1) > 0) {
        QPoly q, r;
        divmod(r0, r1, q, r);
        QPoly s2 = limord::sub(s0, limord::mul(q, s1));
        r0 = std::move(r1);
        r1 = std::move(r);
        s0 = std::move(s1);
        s1 = std::move(s2);
    }
    if (r1.empty()) throw std::domain_error("NumberField::inv: modulus is not irreducible");
    return reduce(scale(s1, Rational(1) / r1[0]));
}

QPoly NumberField::from_int(const BigInt& x) const
{
    if (x == 0) return {};
    return QPoly{Rational(x)};
}

QPoly NumberField::gen() const { return reduce(QPoly{Rational(0), Rational(1)}); }

int NumberField::sign(const QPoly& elem, int budget) const
{
    QPoly a = reduce(elem);
    if (a.empty()) return 0;
    if (a.size() == 1) return sgn(a[0]);
    AlgebraicReal g = gen_;
    for (int i = 0; i <= budget; ++i) {
        Interval v = ieval(a, {g.lo, g.hi});
        if (v.lo > 0) return 1;
        if (v.hi < 0) return -1;
        g.refine();
    }
    // exact fallback: shrink until a has no root in [lo, hi]
    ZPoly az = primitive(a);
    ZPoly sq = primitive(gcd(to_q(az), derivative(to_q(az))));
    if (limord::degree(sq) >= 1) {
        if (auto q = exact_div(az, sq)) az = primitive(*q);
    }
    while (count_roots(az, g.lo, g.hi) > 0 || eval(az, g.lo) == 0) g.refine();
    return sgn(eval(a, g.lo));
}

std::vector<std::vector<QPoly>> nullspace(const NumberField& k, std::vector<std::vector<QPoly>> a)
{
    const size_t m = a.size();
    const size_t n = m ? a[0].size() : 0;
    std::vector<int> where(n, -1);
    size_t row = 0;
    for (size_t col = 0; col < n && row < m; ++col) {
        size_t sel = row;
        while (sel < m && k.is_zero(a[sel][col])) ++sel;
        if (sel == m) continue;
        std::swap(a[sel], a[row]);
        const QPoly iv = k.inv(a[row][col]);
        for (auto& x : a[row]) x = k.mul(x, iv);
        for (size_t i = 0; i < m; ++i) {
            if (i == row || k.is_zero(a[i][col])) continue;
            const QPoly c = a[i][col];
            for (size_t j = 0; j < n; ++j) a[i][j] = k.sub(a[i][j], k.mul(c, a[row][j]));
        }
        where[col] = static_cast<int>(row);
        ++row;
    }
    std::vector<std::vector<QPoly>> basis;
    for (size_t free = 0; free < n; ++free) {
        if (where[free] != -1) continue;
        std::vector<QPoly> v(n);
        v[free] = QPoly{Rational(1)};
        for (size_t col = 0; col < n; ++col)
            if (where[col] != -1) v[col] = k.sub({}, a[static_cast<size_t>(where[col])][free]);
        basis.push_back(v);
    }
    return basis;
}

// ---------------------------------------------------------------- Perron data

bool is_primitive(const IntMatrix& m)
{
    if (m.rows() != m.cols()) throw ShapeError("is_primitive: matrix is not square");
    const Eigen::Index n = m.rows();
    if (n == 0) return false;
    using B = Eigen::Matrix<int, Eigen::Dynamic, Eigen::Dynamic>;
    B b(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j) b(i, j) = m(i, j) > 0 ? 1 : 0;
    auto bmul = [n](const B& x, const B& y) {
        B r = B::Zero(n, n);
        for (Eigen::Index i = 0; i < n; ++i)
            for (Eigen::Index k = 0; k < n; ++k)
                if (x(i, k))
                    for (Eigen::Index j = 0; j < n; ++j)
                        if (y(k, j)) r(i, j) = 1;
        return r;
    };
    unsigned long e = static_cast<unsigned long>((n - 1) * (n - 1) + 1);
    B acc = B::Identity(n, n), base = b;
    while (e) {
        if (e & 1) acc = bmul(acc, base);
        e >>= 1;
        if (e) base = bmul(base, base);
    }
    return (acc.array() > 0).all();
}

namespace {

std::vector<std::vector<QPoly>> left_eigen_system(const IntMatrix& m, const NumberField& k)
{
    const Eigen::Index n = m.rows();
    std::vector<std::vector<QPoly>> a(static_cast<size_t>(n), std::vector<QPoly>(static_cast<size_t>(n)));
    const QPoly t = k.gen();
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j) {
            QPoly e = k.from_int(m(j, i));
            if (i == j) e = k.sub(e, t);
            a[static_cast<size_t>(i)][static_cast<size_t>(j)] = e;
        }
    return a;
}

std::vector<QPoly> normalise_first(const NumberField& k, std::vector<QPoly> w)
{
    for (const auto& x : w) {
        if (!k.is_zero(x)) {
            const QPoly iv = k.inv(x);
            for (auto& y : w) y = k.mul(y, iv);
            break;
        }
    }
    return w;
}

}  // namespace

std::vector<QPoly> PerronData::eigen_residual() const
{
    NumberField k = field();
    const Eigen::Index n = matrix.rows();
    std::vector<QPoly> r(static_cast<size_t>(n));
    for (Eigen::Index j = 0; j < n; ++j) {
        QPoly acc;
        for (Eigen::Index i = 0; i < n; ++i)
            acc = k.add(acc, k.mul(left_eigenvector[static_cast<size_t>(i)], k.from_int(matrix(i, j))));
        acc = k.sub(acc, k.mul(k.gen(), left_eigenvector[static_cast<size_t>(j)]));
        r[static_cast<size_t>(j)] = acc;
    }
    return r;
}

PerronData perron(const IntMatrix& m)
{
    if (m.rows() != m.cols()) throw ShapeError("perron: matrix is not square");
    for (Eigen::Index i = 0; i < m.rows(); ++i)
        for (Eigen::Index j = 0; j < m.cols(); ++j)
            if (m(i, j) < 0) throw std::domain_error("perron: matrix has a negative entry");
    if (!is_primitive(m)) throw ImprimitiveError("perron: matrix is imprimitive/reducible (no strictly positive power within the Wielandt bound)");
    std::optional<AlgebraicReal> best;
    for (const auto& f : factor(char_poly(m))) {
        auto r = largest_real_root(f.poly);
        if (!r) continue;
        if (!best || compare(*r, *best) > 0) best = r;
    }
    if (!best) throw std::logic_error("perron: no real eigenvalue");
    NumberField k(*best);
    auto basis = nullspace(k, left_eigen_system(m, k));
    if (basis.size() != 1) throw std::logic_error("perron: Perron eigenspace is not one-dimensional");
    PerronData d{m, *best, normalise_first(k, basis[0])};
    for (const auto& x : d.left_eigenvector)
        if (k.sign(x) <= 0) throw std::logic_error("perron: eigenvector not strictly positive");
    return d;
}

int sign_dot(const IntVector& v, const PerronData& p, int budget)
{
    if (static_cast<size_t>(v.size()) != p.left_eigenvector.size()) throw ShapeError("sign_dot: length mismatch");
    NumberField k = p.field();
    QPoly acc;
    for (Eigen::Index i = 0; i < v.size(); ++i)
        acc = k.add(acc, k.mul(k.from_int(v(i)), p.left_eigenvector[static_cast<size_t>(i)]));
    return k.sign(acc, budget);
}

int sign_dot(const IntVector& v, const EigenFunctional& f, int budget)
{
    if (static_cast<size_t>(v.size()) != f.vector.size()) throw ShapeError("sign_dot: length mismatch");
    NumberField k(f.eigenvalue);
    QPoly acc;
    for (Eigen::Index i = 0; i < v.size(); ++i)
        acc = k.add(acc, k.mul(k.from_int(v(i)), f.vector[static_cast<size_t>(i)]));
    return k.sign(acc, budget);
}

std::vector<EigenFunctional> nonnegative_eigenfunctionals(const IntMatrix& m)
{
    if (m.rows() != m.cols()) throw ShapeError("nonnegative_eigenfunctionals: matrix is not square");
    std::vector<EigenFunctional> out;
    for (const auto& f : factor(char_poly(m))) {
        auto r = largest_real_root(f.poly);
        if (!r || compare(*r, Rational(0)) <= 0) continue;
        NumberField k(*r);
        auto basis = nullspace(k, left_eigen_system(m, k));
        if (basis.size() != 1) continue;
        auto w = normalise_first(k, basis[0]);
        bool ok = true;
        for (const auto& x : w)
            if (k.sign(x) < 0) ok = false;
        if (ok) out.push_back({*r, w});
    }
    std::sort(out.begin(), out.end(),
              [](const EigenFunctional& a, const EigenFunctional& b) { return compare(a.eigenvalue, b.eigenvalue) > 0; });
    return out;
}

}  // namespace limord
