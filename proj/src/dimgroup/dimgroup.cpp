#include "limord/dimgroup.hpp"

#include <map>
#include <mutex>
#include <set>
#include <sstream>

namespace limord {

namespace {

template <class A, class B>
bool same(const A& a, const B& b)
{
    return a.rows() == b.rows() && a.cols() == b.cols() && (a.array() == b.array()).all();
}

// last stage reachable by pushing, or -1 for unbounded
int last_stage(const BratteliDiagram& d) { return d.generator ? -1 : d.levels() - 1; }

int width(const BratteliDiagram& d, int stage)
{
    if (stage < d.levels()) return d.vertices(stage);
    return static_cast<int>(d.generator->rows());
}

struct Spectral {
    bool primitive = false;
    std::optional<PerronData> perron;
    std::vector<EigenFunctional> functionals;
};

const Spectral& spectral(const IntMatrix& x)
{
    static std::mutex mu;
    static std::map<std::string, Spectral> cache;
    const std::string key = to_string(x);
    std::lock_guard<std::mutex> lock(mu);
    auto it = cache.find(key);
    if (it != cache.end()) return it->second;
    Spectral s;
    s.primitive = is_primitive(x);
    if (s.primitive) s.perron = perron(x);
    s.functionals = nonnegative_eigenfunctionals(x);
    return cache.emplace(key, std::move(s)).first->second;
}

// direction of a nonzero vector: divided by the gcd of its entries
std::string direction(const IntVector& v)
{
    BigInt g = 0;
    for (Eigen::Index i = 0; i < v.size(); ++i) g = gcd(g, abs(v(i)));
    std::string out;
    for (Eigen::Index i = 0; i < v.size(); ++i) out += BigInt(v(i) / g).str() + ",";
    return out;
}

}  // namespace

LimitElement push(const BratteliDiagram& d, const LimitElement& e, int to_stage)
{
    if (e.stage < 0 || to_stage < e.stage) throw std::out_of_range("push: target stage " + std::to_string(to_stage) + " before element stage " + std::to_string(e.stage));
    const int last = last_stage(d);
    if (last >= 0 && to_stage > last) throw std::out_of_range("push: stage " + std::to_string(to_stage) + " beyond diagram depth " + std::to_string(last));
    if (e.vector.size() != width(d, e.stage))
        throw ShapeError("element has " + std::to_string(e.vector.size()) + " entries, stage " + std::to_string(e.stage) + " has " +
                         std::to_string(width(d, e.stage)) + " vertices");
    LimitElement out{e.stage, e.vector};
    while (out.stage < to_stage) {
        out.vector = apply(d.step(out.stage), out.vector);
        ++out.stage;
    }
    return out;
}

IntVector unit_at(const BratteliDiagram& d, int stage)
{
    if (stage < d.levels()) return d.level_sizes[static_cast<size_t>(stage)];
    return push(d, {d.levels() - 1, d.level_sizes.back()}, stage).vector;
}

std::string to_string(Verdict v)
{
    switch (v) {
    case Verdict::yes: return "yes";
    case Verdict::no: return "no";
    default: return "inconclusive";
    }
}

std::string to_string(PositivityVerdict::Kind k)
{
    switch (k) {
    case PositivityVerdict::positive: return "positive";
    case PositivityVerdict::not_positive: return "not_positive";
    case PositivityVerdict::zero: return "zero";
    default: return "inconclusive";
    }
}

EqualityVerdict equal(const BratteliDiagram& d, const LimitElement& a, const LimitElement& b, int depth)
{
    EqualityVerdict out;
    const int s = std::max(a.stage, b.stage);
    LimitElement diff{s, IntVector(push(d, a, s).vector - push(d, b, s).vector)};
    const int last = last_stage(d);
    // injective steps from here on make the comparison final
    bool injective = true;
    const int stored_end = last >= 0 ? last : static_cast<int>(d.multiplicities.size());
    const IntMatrix* checked = nullptr;
    auto full_rank = [&](const IntMatrix& m) {
        if (checked && checked->rows() == m.rows() && checked->cols() == m.cols() && *checked == m) return true;
        checked = &m;
        return rank(m) == m.cols();
    };
    for (int k = s; k < stored_end && injective; ++k) injective = full_rank(d.step(k));
    if (d.generator && injective) injective = full_rank(*d.generator);
    for (int k = s;; ++k) {
        if (is_zero(diff.vector)) {
            out.verdict = Verdict::yes;
            out.stage = k;
            out.reason = "vectors coincide at stage " + std::to_string(k);
            return out;
        }
        if (injective) {
            out.verdict = Verdict::no;
            out.stage = k;
            out.reason = "vectors differ at stage " + std::to_string(k) + " and every later step is injective";
            return out;
        }
        if (k - s >= depth || (last >= 0 && k >= last)) break;
        diff = push(d, diff, k + 1);
    }
    out.stage = diff.stage;
    if (last >= 0 && diff.stage >= last) {
        out.verdict = Verdict::no;
        out.reason = "vectors differ at the final stage " + std::to_string(diff.stage);
    } else {
        out.reason = "vectors still differ at stage " + std::to_string(diff.stage) + " after depth " + std::to_string(depth);
    }
    return out;
}

PositivityVerdict positive(const BratteliDiagram& d, const LimitElement& e, int depth)
{
    PositivityVerdict out;
    out.depth = depth;
    const int last = last_stage(d);
    const int stop = last >= 0 ? std::min(last, e.stage + depth) : e.stage + depth;
    std::set<std::string> seen;
    bool cycle = false;
    LimitElement w = push(d, e, e.stage);
    for (;;) {
        if (is_zero(w.vector)) {
            out.kind = PositivityVerdict::zero;
            out.method = w.stage == e.stage ? "iteration" : "kernel";
            out.stage = w.stage;
            out.pushed = w.vector;
            out.reason = w.stage == e.stage ? "zero vector" : "pushed to zero at stage " + std::to_string(w.stage);
            return out;
        }
        if (nonnegative(w.vector)) {
            out.kind = PositivityVerdict::positive;
            out.method = "iteration";
            out.stage = w.stage;
            out.pushed = w.vector;
            out.reason = "entrywise nonnegative at stage " + std::to_string(w.stage);
            return out;
        }
        // constant steps from here: a repeated direction repeats forever
        if (d.generator && !cycle) cycle = !seen.insert(direction(w.vector)).second;
        if (w.stage >= stop || cycle) break;
        w = push(d, w, w.stage + 1);
    }
    if (cycle) {
        out.kind = PositivityVerdict::not_positive;
        out.method = "cycle";
        out.stage = w.stage;
        out.reason = "direction repeats at stage " + std::to_string(w.stage) + " without becoming nonnegative";
        return out;
    }
    if (d.generator) {
        const IntMatrix& x = *d.generator;
        const LimitElement& base = e;
        const Spectral& sp = spectral(x);
        for (const auto& f : sp.functionals) {
            if (sign_dot(base.vector, f) < 0) {
                out.kind = PositivityVerdict::not_positive;
                out.method = sp.primitive ? "perron" : "eigenfunctional";
                out.reason = "negative pairing with the nonnegative eigenfunctional for " + f.eigenvalue.describe();
                return out;
            }
        }
        if (sp.primitive) {
            const int s = sign_dot(base.vector, *sp.perron);
            const LimitElement k = push(d, base, base.stage + static_cast<int>(x.rows()));
            if (is_zero(k.vector)) {
                out.kind = PositivityVerdict::zero;
                out.method = "kernel";
                out.stage = k.stage;
                out.pushed = k.vector;
                out.reason = "pushed to zero at stage " + std::to_string(k.stage);
                return out;
            }
            if (s == 0) {
                out.kind = PositivityVerdict::not_positive;
                out.method = "perron";
                out.reason = "zero pairing with the Perron eigenvector of a primitive generator, vector nonzero";
                return out;
            }
            if (s > 0) {
                out.kind = PositivityVerdict::positive;
                out.method = "perron";
                out.reason = "positive pairing with the Perron eigenvector of a primitive generator";
                // locate the certificate stage
                LimitElement v = w;
                const int cap = w.stage + std::max(2000, 10 * depth);
                while (v.stage < cap && !nonnegative(v.vector)) v = push(d, v, v.stage + 1);
                if (nonnegative(v.vector)) {
                    out.stage = v.stage;
                    out.pushed = v.vector;
                }
                return out;
            }
        }
    }
    out.kind = PositivityVerdict::inconclusive;
    out.method = "iteration";
    out.reason = "no nonnegative push up to stage " + std::to_string(w.stage);
    return out;
}

bool validate_positivity(const BratteliDiagram& d, const LimitElement& e, const PositivityVerdict& v, std::string* why)
{
    auto fail = [&](const std::string& m) {
        if (why) *why = m;
        return false;
    };
    if (v.kind != PositivityVerdict::positive && v.kind != PositivityVerdict::zero) return true;
    if (!v.stage || !v.pushed) return v.kind == PositivityVerdict::positive && v.method == "perron" ? true : fail("missing certificate");
    const LimitElement p = push(d, e, *v.stage);
    if (!same(p.vector, *v.pushed)) return fail("pushed vector differs from the recomputed push");
    if (v.kind == PositivityVerdict::zero) return is_zero(p.vector) ? true : fail("certificate vector not zero");
    return nonnegative(p.vector) ? true : fail("certificate vector has a negative entry");
}

ScaleVerdict in_scale(const BratteliDiagram& d, const LimitElement& e, int depth)
{
    ScaleVerdict out;
    out.lower = positive(d, e, depth);
    out.upper = positive(d, {e.stage, IntVector(unit_at(d, e.stage) - e.vector)}, depth);
    auto ok = [](const PositivityVerdict& v) { return v.kind == PositivityVerdict::positive || v.kind == PositivityVerdict::zero; };
    if (ok(out.lower) && ok(out.upper))
        out.verdict = Verdict::yes;
    else if (out.lower.kind == PositivityVerdict::not_positive || out.upper.kind == PositivityVerdict::not_positive)
        out.verdict = Verdict::no;
    return out;
}

const IntMatrix& InducedMap::at(int k) const
{
    if (stationary) return *stationary;
    if (k < 0 || static_cast<size_t>(k) >= levels.size()) throw std::out_of_range("induced map has no level " + std::to_string(k));
    return levels[static_cast<size_t>(k)];
}

InducedMap make_induced_map(BratteliDiagram source, BratteliDiagram target, std::vector<IntMatrix> levels)
{
    InducedMap m{std::move(source), std::move(target), std::move(levels), std::nullopt};
    for (size_t k = 0; k + 1 < m.levels.size(); ++k) {
        const int ki = static_cast<int>(k);
        if (!same(IntMatrix(m.target.step(ki) * m.levels[k]), IntMatrix(m.levels[k + 1] * m.source.step(ki))))
            throw std::logic_error("induced map: square at step " + std::to_string(k) + " does not commute");
    }
    return m;
}

InducedMap make_stationary_map(BratteliDiagram source, BratteliDiagram target, IntMatrix map)
{
    InducedMap m{std::move(source), std::move(target), {}, std::move(map)};
    const IntMatrix& s = *m.stationary;
    const size_t steps = std::max(m.source.multiplicities.size(), m.target.multiplicities.size()) + 1;
    for (size_t k = 0; k < steps; ++k) {
        const int ki = static_cast<int>(k);
        if (!same(IntMatrix(m.target.step(ki) * s), IntMatrix(s * m.source.step(ki))))
            throw std::logic_error("induced map: square at step " + std::to_string(k) + " does not commute");
    }
    return m;
}

LimitElement induced_map_apply(const InducedMap& m, const LimitElement& e)
{
    const IntMatrix& a = m.at(e.stage);
    if (a.cols() != e.vector.size()) throw ShapeError("induced map expects " + std::to_string(a.cols()) + " entries");
    return {e.stage, apply(a, e.vector)};
}

InducedMap envelope_induced_map(const StageSystem& s) { return make_induced_map(s.k0, s.envelope, s.envelope_map); }

namespace {

std::vector<BigInt> prime_factors(BigInt n)
{
    std::vector<BigInt> out;
    n = abs(n);
    for (BigInt p = 2; p * p <= n; ++p)
        if (n % p == 0) {
            out.push_back(p);
            while (n % p == 0) n /= p;
        }
    if (n > 1) out.push_back(n);
    return out;
}

std::string localisation(const std::vector<BigInt>& primes)
{
    if (primes.empty()) return "Z";
    std::string s = "Z[1/";
    BigInt prod = 1;
    for (const auto& p : primes) prod *= p;
    return s + prod.str() + "]";
}

}  // namespace

K0Report k0_report(const BratteliDiagram& d)
{
    K0Report r;
    std::ostringstream os;
    if (!d.generator) {
        r.kind = "presented direct limit";
        r.rank = d.vertices(d.levels() - 1);
        os << "direct limit of Z^n along " << d.multiplicities.size() << " connecting matrices; level sizes";
        for (const auto& s : d.level_sizes) os << " " << to_string(s);
        r.description = os.str();
        return r;
    }
    const IntMatrix& x = *d.generator;
    const int n = static_cast<int>(x.rows());
    r.determinant = det(x);
    const Spectral& sp = spectral(x);
    r.primitive = sp.primitive;
    r.perron = sp.perron;
    r.cone = sp.functionals;
    if (n == 1) {
        const BigInt m = x(0, 0);
        r.rank = 1;
        if (m == 1) {
            r.kind = "free abelian";
            r.description = "Z";
        } else {
            r.kind = "m-adic rationals";
            r.description = localisation(prime_factors(m)) + (m == 2 ? " (binary rationals)" : "") + ", unit class 1";
        }
        return r;
    }
    if (abs(*r.determinant) == 1) {
        r.kind = "free abelian";
        r.rank = n;
        os << "Z^" << n << " (generator invertible over Z)";
        if (sp.primitive)
            os << ", Perron cone: v >= 0 iff <v, w> > 0 or v = 0, w the left eigenvector for " << sp.perron->eigenvalue.describe();
        else {
            os << ", cone bounded by nonnegative eigenfunctionals for";
            for (const auto& f : sp.functionals) os << " " << f.eigenvalue.describe() << " (~" << f.eigenvalue.approx() << ")";
        }
        r.description = os.str();
        return r;
    }
    if (*r.determinant == 0) {
        r.kind = "presented direct limit";
        r.rank = static_cast<int>(rank(mat_pow(x, static_cast<unsigned long>(n))));
        os << "singular stationary generator; eventual rank " << r.rank;
        r.description = os.str();
        return r;
    }
    r.kind = "stationary non-unimodular";
    r.rank = n;
    // integer eigenvalues: the eigenfunctionals f / lambda^k embed the limit in a product of localisations
    std::vector<BigInt> roots;
    for (const auto& f : factor(char_poly(x))) {
        if (degree(f.poly) != 1 || f.multiplicity != 1 || f.poly[1] != 1) {
            roots.clear();
            break;
        }
        roots.push_back(-f.poly[0]);
    }
    if (static_cast<int>(roots.size()) == n) {
        std::vector<std::string> parts;
        for (const auto& lam : roots) parts.push_back(localisation(prime_factors(lam)));
        bool uniform = true;
        for (const auto& p : parts) uniform = uniform && p == parts[0];
        os << "embeds in ";
        if (uniform)
            os << parts[0] << "^" << n << (parts[0] == "Z[1/2]" ? " (Q_d^" + std::to_string(n) + ")" : "");
        else
            for (size_t i = 0; i < parts.size(); ++i) os << (i ? " x " : "") << parts[i];
        os << " through v -> f(v) / lambda^k for the eigenvalues";
        for (const auto& lam : roots) os << " " << lam.str();
    } else {
        os << "direct limit of Z^" << n << " under a generator of determinant " << r.determinant->str();
    }
    if (sp.primitive) os << "; Perron eigenvalue " << sp.perron->eigenvalue.describe();
    r.description = os.str();
    return r;
}

}  // namespace limord
