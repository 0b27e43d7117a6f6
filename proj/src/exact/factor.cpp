// Factorisation over Q: square-free split, Berlekamp mod p, Hensel lifting,
// subset recombination.
#include "limord/exact.hpp"

#include <algorithm>
#include <cstdint>

namespace limord {

namespace {

using i64 = std::int64_t;
using FpPoly = std::vector<i64>;  // coefficients in [0, p)

i64 modp(i64 a, i64 p)
{
    a %= p;
    return a < 0 ? a + p : a;
}

i64 modp(const BigInt& a, i64 p)
{
    BigInt r = a % p;
    if (r < 0) r += p;
    return r.convert_to<i64>();
}

i64 inv_mod(i64 a, i64 p)
{
    i64 t = 0, nt = 1, r = p, nr = modp(a, p);
    while (nr) {
        const i64 q = r / nr;
        std::tie(t, nt) = std::make_pair(nt, t - q * nt);
        std::tie(r, nr) = std::make_pair(nr, r - q * nr);
    }
    return modp(t, p);
}

void ftrim(FpPoly& a)
{
    while (!a.empty() && a.back() == 0) a.pop_back();
}

FpPoly fp_of(const ZPoly& f, i64 p)
{
    FpPoly r;
    for (const auto& c : f) r.push_back(modp(c, p));
    ftrim(r);
    return r;
}

FpPoly fsub(const FpPoly& a, const FpPoly& b, i64 p)
{
    FpPoly r(std::max(a.size(), b.size()), 0);
    for (size_t i = 0; i < a.size(); ++i) r[i] = a[i];
    for (size_t i = 0; i < b.size(); ++i) r[i] = modp(r[i] - b[i], p);
    ftrim(r);
    return r;
}

FpPoly fmul(const FpPoly& a, const FpPoly& b, i64 p)
{
    if (a.empty() || b.empty()) return {};
    FpPoly r(a.size() + b.size() - 1, 0);
    for (size_t i = 0; i < a.size(); ++i)
        for (size_t j = 0; j < b.size(); ++j) r[i + j] = (r[i + j] + a[i] * b[j]) % p;
    ftrim(r);
    return r;
}

void fdivmod(const FpPoly& a, const FpPoly& b, i64 p, FpPoly& q, FpPoly& r)
{
    r = a;
    ftrim(r);
    q.assign(r.size() >= b.size() ? r.size() - b.size() + 1 : 0, 0);
    const i64 il = inv_mod(b.back(), p);
    while (!r.empty() && r.size() >= b.size()) {
        const size_t s = r.size() - b.size();
        const i64 c = r.back() * il % p;
        q[s] = c;
        for (size_t i = 0; i < b.size(); ++i) r[s + i] = modp(r[s + i] - c * b[i], p);
        ftrim(r);
    }
    ftrim(q);
}

FpPoly frem(const FpPoly& a, const FpPoly& b, i64 p)
{
    FpPoly q, r;
    fdivmod(a, b, p, q, r);
    return r;
}

FpPoly fmonic(FpPoly a, i64 p)
{
    ftrim(a);
    if (a.empty()) return a;
    const i64 il = inv_mod(a.back(), p);
    for (auto& c : a) c = c * il % p;
    return a;
}

FpPoly fgcd(FpPoly a, FpPoly b, i64 p)
{
    ftrim(a);
    ftrim(b);
    while (!b.empty()) {
        FpPoly r = frem(a, b, p);
        a = std::move(b);
        b = std::move(r);
    }
    return fmonic(a, p);
}

// s*a + t*b = 1 (a, b coprime)
void fbezout(const FpPoly& a, const FpPoly& b, i64 p, FpPoly& s, FpPoly& t)
{
    FpPoly r0 = a, r1 = b, s0{1}, s1{}, t0{}, t1{1};
    while (!r1.empty()) {
        FpPoly q, r;
        fdivmod(r0, r1, p, q, r);
        FpPoly s2 = fsub(s0, fmul(q, s1, p), p);
        FpPoly t2 = fsub(t0, fmul(q, t1, p), p);
        r0 = std::move(r1);
        r1 = std::move(r);
        s0 = std::move(s1);
        s1 = std::move(s2);
        t0 = std::move(t1);
        t1 = std::move(t2);
    }
    // r0 is a nonzero constant
    const i64 il = inv_mod(r0.at(0), p);
    s = s0;
    t = t0;
    for (auto& c : s) c = c * il % p;
    for (auto& c : t) c = c * il % p;
    ftrim(s);
    ftrim(t);
}

// Berlekamp factorisation of a monic square-free polynomial over F_p.
std::vector<FpPoly> berlekamp(const FpPoly& f, i64 p)
{
    const size_t n = f.size() - 1;
    if (n <= 1) return {f};
    // columns: x^{jp} mod f minus e_j
    std::vector<std::vector<i64>> b(n, std::vector<i64>(n, 0));
    FpPoly xp{1};
    FpPoly xpow;
    {
        // x^p mod f by repeated squaring
        FpPoly base{0, 1}, acc{1};
        i64 e = p;
        while (e) {
            if (e & 1) acc = frem(fmul(acc, base, p), f, p);
            base = frem(fmul(base, base, p), f, p);
            e >>= 1;
        }
        xpow = acc;
    }
    FpPoly cur{1};
    for (size_t j = 0; j < n; ++j) {
        for (size_t i = 0; i < n; ++i) b[i][j] = i < cur.size() ? cur[i] : 0;
        b[j][j] = modp(b[j][j] - 1, p);
        cur = frem(fmul(cur, xpow, p), f, p);
    }
    // nullspace of b
    std::vector<int> pivot_col;
    size_t row = 0;
    std::vector<int> where(n, -1);
    for (size_t col = 0; col < n && row < n; ++col) {
        size_t sel = row;
        while (sel < n && b[sel][col] == 0) ++sel;
        if (sel == n) continue;
        std::swap(b[sel], b[row]);
        const i64 il = inv_mod(b[row][col], p);
        for (auto& x : b[row]) x = x * il % p;
        for (size_t i = 0; i < n; ++i) {
            if (i == row || b[i][col] == 0) continue;
            const i64 c = b[i][col];
            for (size_t k = 0; k < n; ++k) b[i][k] = modp(b[i][k] - c * b[row][k], p);
        }
        where[col] = static_cast<int>(row);
        ++row;
    }
    std::vector<FpPoly> basis;
    for (size_t free = 0; free < n; ++free) {
        if (where[free] != -1) continue;
        FpPoly v(n, 0);
        v[free] = 1;
        for (size_t col = 0; col < n; ++col)
            if (where[col] != -1) v[col] = modp(-b[static_cast<size_t>(where[col])][free], p);
        ftrim(v);
        basis.push_back(v);
    }
    const size_t r = basis.size();
    std::vector<FpPoly> factors{f};
    for (const auto& v : basis) {
        if (factors.size() == r) break;
        if (v.size() <= 1) continue;
        std::vector<FpPoly> next;
        for (const auto& g : factors) {
            FpPoly rest = g;
            if (g.size() > 2) {
                for (i64 s = 0; s < p && rest.size() > 1; ++s) {
                    FpPoly vs = fsub(v, FpPoly{s}, p);
                    FpPoly h = fgcd(rest, vs, p);
                    if (h.size() > 1 && h.size() < rest.size()) {
                        next.push_back(h);
                        FpPoly q, rr;
                        fdivmod(rest, h, p, q, rr);
                        rest = fmonic(q, p);
                    }
                }
            }
            if (rest.size() > 1) next.push_back(rest);
        }
        factors = std::move(next);
    }
    std::sort(factors.begin(), factors.end());
    return factors;
}

ZPoly sym_mod(const ZPoly& a, const BigInt& m)
{
    ZPoly r;
    const BigInt half = m / 2;
    for (const auto& c : a) {
        BigInt x = c % m;
        if (x < 0) x += m;
        if (x > half) x -= m;
        r.push_back(x);
    }
    trim(r);
    return r;
}

ZPoly zpoly_of(const FpPoly& a)
{
    ZPoly r;
    for (i64 c : a) r.push_back(BigInt(c));
    trim(r);
    return r;
}

// Lift f = g*h mod p (g monic) to mod p^k; returns (g, h) mod p^k with lc(h) = lc(f).
std::pair<ZPoly, ZPoly> hensel2(const ZPoly& f, const FpPoly& g0, const FpPoly& h0, i64 p, int k)
{
    FpPoly s, t;
    fbezout(g0, h0, p, s, t);
    ZPoly g = zpoly_of(g0), h = zpoly_of(h0);
    h.back() = f.back();  // exact leading coefficient
    BigInt m = p;
    for (int step = 1; step < k; ++step) {
        // e = (f - g h) / m mod p
        ZPoly diff = sub(f, mul(g, h));
        ZPoly e_z;
        for (const auto& c : diff) {
            // diff is divisible by m modulo the working precision
            e_z.push_back(c / m);
        }
        FpPoly e = fp_of(e_z, p);
        FpPoly q, dg;
        fdivmod(fmul(t, e, p), g0, p, q, dg);
        // dh = (e - dg*h) / g mod p, exact
        FpPoly num = fsub(e, fmul(dg, fp_of(h, p), p), p);
        FpPoly dh, rr;
        fdivmod(num, fp_of(g, p), p, dh, rr);
        g = add(g, mul(ZPoly{m}, zpoly_of(dg)));
        h = add(h, mul(ZPoly{m}, zpoly_of(dh)));
        m *= p;
        g = sym_mod(g, m);
        ZPoly hl = sym_mod(h, m);
        hl.resize(h.size(), BigInt(0));
        hl.back() = f.back();
        h = hl;
    }
    return {g, h};
}

// Lift f = lc * prod gs mod p to mod p^k, all lifted factors monic.
std::vector<ZPoly> hensel_multi(const ZPoly& f, std::vector<FpPoly> gs, i64 p, int k)
{
    std::vector<ZPoly> out;
    BigInt mk = 1;
    for (int i = 0; i < k; ++i) mk *= p;
    ZPoly cur = sym_mod(f, mk);
    while (gs.size() > 1) {
        FpPoly g0 = gs.front();
        FpPoly h0{modp(cur.back(), p)};
        for (size_t i = 1; i < gs.size(); ++i) h0 = fmul(h0, gs[i], p);
        auto [g, h] = hensel2(cur, g0, h0, p, k);
        out.push_back(sym_mod(g, mk));
        ZPoly hh = sym_mod(h, mk);
        hh.resize(h.size(), BigInt(0));
        hh.back() = cur.back();
        cur = hh;
        gs.erase(gs.begin());
    }
    // last factor: cur / lc made monic mod p^k
    BigInt lc = cur.back();
    BigInt inv;
    {
        // inverse of lc mod p^k
        mpz_t r;
        mpz_init(r);
        mpz_invert(r, lc.backend().data(), mk.backend().data());
        inv = BigInt(r);
        mpz_clear(r);
    }
    ZPoly last;
    for (const auto& c : cur) last.push_back(c * inv);
    out.push_back(sym_mod(last, mk));
    out.back().back() = 1;
    return out;
}

std::vector<ZPoly> zassenhaus(const ZPoly& f)
{
    const int n = degree(f);
    if (n <= 1) return {f};
    const BigInt lc = f.back();
    const ZPoly df = derivative(f);
    static const i64 primes[] = {3,  5,  7,  11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59,
                                 61, 67, 71, 73, 79, 83, 89, 97, 101, 103, 107, 109, 113, 127};
    i64 p = 0;
    for (i64 q : primes) {
        if (modp(lc, q) == 0) continue;
        FpPoly fq = fp_of(f, q);
        if (fgcd(fq, fp_of(df, q), q).size() != 1) continue;
        p = q;
        break;
    }
    if (p == 0) throw std::runtime_error("factor: no good prime found");
    FpPoly fm = fmonic(fp_of(f, p), p);
    std::vector<FpPoly> local = berlekamp(fm, p);
    if (local.size() == 1) return {f};
    // bound on coefficients of lc * (any factor)
    BigInt norm = 0;
    for (const auto& c : f) norm += abs(c);
    BigInt bound = 2 * abs(lc) * norm;
    for (int i = 0; i < n; ++i) bound *= 2;
    int k = 1;
    BigInt mk = p;
    while (mk <= bound) {
        mk *= p;
        ++k;
    }
    std::vector<ZPoly> lifted = hensel_multi(f, local, p, k);
    std::vector<ZPoly> result;
    ZPoly rest = f;
    std::vector<ZPoly> pool = lifted;
    size_t s = 1;
    while (2 * s <= pool.size()) {
        bool found = false;
        std::vector<int> idx(s);
        for (size_t i = 0; i < s; ++i) idx[i] = static_cast<int>(i);
        while (true) {
            ZPoly cand{rest.back()};
            for (int i : idx) cand = sym_mod(mul(cand, pool[static_cast<size_t>(i)]), mk);
            ZPoly prim = primitive(cand);
            if (auto q = exact_div(rest, prim)) {
                result.push_back(prim);
                rest = *q;
                std::vector<ZPoly> np;
                for (size_t i = 0; i < pool.size(); ++i)
                    if (std::find(idx.begin(), idx.end(), static_cast<int>(i)) == idx.end())
                        np.push_back(pool[i]);
                pool = np;
                found = true;
                break;
            }
            // next combination
            int i = static_cast<int>(s) - 1;
            while (i >= 0 && idx[static_cast<size_t>(i)] == static_cast<int>(pool.size() - s) + i) --i;
            if (i < 0) break;
            ++idx[static_cast<size_t>(i)];
            for (size_t j = static_cast<size_t>(i) + 1; j < s; ++j) idx[j] = idx[j - 1] + 1;
        }
        if (!found) ++s;
    }
    if (degree(rest) >= 1) result.push_back(primitive(rest));
    return result;
}

}  // namespace

std::vector<Factor> squarefree_decomposition(const ZPoly& p)
{
    ZPoly f = primitive(p);
    std::vector<Factor> out;
    if (degree(f) < 1) return out;
    // Yun's algorithm over Q
    QPoly a = to_q(f);
    QPoly da = derivative(a);
    QPoly g = gcd(a, da);
    QPoly q, r;
    divmod(a, g, q, r);
    QPoly b = q;
    divmod(da, g, q, r);
    QPoly c = q;
    QPoly d = sub(c, derivative(b));
    int i = 1;
    while (degree(b) >= 1) {
        QPoly h = gcd(b, d);
        if (degree(h) >= 1) out.push_back({primitive(h), i});
        divmod(b, h, q, r);
        b = q;
        divmod(d, h, q, r);
        c = q;
        d = sub(c, derivative(b));
        ++i;
    }
    return out;
}

std::vector<Factor> factor(const ZPoly& p)
{
    std::vector<Factor> out;
    for (const auto& sf : squarefree_decomposition(p)) {
        for (auto& g : zassenhaus(sf.poly)) out.push_back({primitive(g), sf.multiplicity});
    }
    std::sort(out.begin(), out.end(), [](const Factor& a, const Factor& b) {
        if (a.poly.size() != b.poly.size()) return a.poly.size() < b.poly.size();
        if (a.poly != b.poly) return a.poly < b.poly;
        return a.multiplicity < b.multiplicity;
    });
    return out;
}

}  // namespace limord
