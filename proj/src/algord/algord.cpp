#include "limord/algord.hpp"

#include <algorithm>
#include <functional>
#include <map>
#include <numeric>
#include <set>
#include <stdexcept>

namespace limord {

namespace {

bool fits(const IntVector& v, const IntVector& sizes)
{
    for (Eigen::Index i = 0; i < v.size(); ++i)
        if (v(i) < 0 || v(i) > sizes(i)) return false;
    return true;
}

// vertices from which a right-most germ continues forever under the repeated
// last step, and the right-most index of each vertex at the last stage
struct RightmostTail {
    std::vector<char> infinite;            // per vertex at the last stage
    std::vector<int> last_index;           // per vertex at the last stage
};

std::optional<RightmostTail> rightmost_tail(const NestSystem& n)
{
    if (n.embeddings.empty()) return std::nullopt;
    const size_t h = n.stages.size() - 1;
    const auto& sizes = n.vertex_sizes[h];
    const auto& off = n.offsets[h];
    const auto& prev_sizes = n.vertex_sizes[h - 1];
    const auto& prev_off = n.offsets[h - 1];
    const auto& emb = n.embeddings.back();
    const int nv = static_cast<int>(sizes.size());
    if (static_cast<int>(prev_sizes.size()) != nv) return std::nullopt;  // repetition needs equal vertex counts
    std::vector<int> parent(static_cast<size_t>(emb.target.size()), -1);
    for (size_t i = 0; i < emb.image.size(); ++i)
        for (int a : emb.image[i]) parent[static_cast<size_t>(a)] = static_cast<int>(i);
    // w -> v when the last index of w comes from the last index of v
    std::vector<int> from(static_cast<size_t>(nv), -1);
    for (int w = 0; w < nv; ++w) {
        if (sizes[static_cast<size_t>(w)] == 0) continue;
        const int p = parent[static_cast<size_t>(off[static_cast<size_t>(w)] + sizes[static_cast<size_t>(w)] - 1)];
        for (int v = 0; v < nv; ++v)
            if (prev_sizes[static_cast<size_t>(v)] > 0 && p == prev_off[static_cast<size_t>(v)] + prev_sizes[static_cast<size_t>(v)] - 1)
                from[static_cast<size_t>(w)] = v;
    }
    RightmostTail t;
    t.infinite.assign(static_cast<size_t>(nv), 1);
    for (bool changed = true; changed;) {
        changed = false;
        for (int v = 0; v < nv; ++v) {
            if (!t.infinite[static_cast<size_t>(v)]) continue;
            bool out = false;
            for (int w = 0; w < nv; ++w)
                if (from[static_cast<size_t>(w)] == v && t.infinite[static_cast<size_t>(w)]) out = true;
            if (!out) {
                t.infinite[static_cast<size_t>(v)] = 0;
                changed = true;
            }
        }
    }
    for (int v = 0; v < nv; ++v)
        t.last_index.push_back(sizes[static_cast<size_t>(v)] > 0 ? off[static_cast<size_t>(v)] + sizes[static_cast<size_t>(v)] - 1 : -1);
    return t;
}

struct SpecialObstruction {
    int index = -1;
};

// p holds a germ that stays right-most forever while q misses it
std::optional<SpecialObstruction> special_obstruction(const StageSystem& s, const IntVector& p, const IntVector& q)
{
    if (!s.nest || !s.envelope.generator) return std::nullopt;
    auto tail = rightmost_tail(*s.nest);
    if (!tail) return std::nullopt;
    const auto& alg = s.nest->stages.back();
    for (size_t v = 0; v < tail->infinite.size(); ++v) {
        if (!tail->infinite[v]) continue;
        const int x = tail->last_index[v];
        const int b = alg.block_of(x);
        if (p(b) > 0 && q(b) == 0) return SpecialObstruction{x};
    }
    return std::nullopt;
}

bool trace_final(const StageSystem& s) { return s.complete || s.envelope.generator.has_value(); }

std::string one_based(int i) { return std::to_string(i + 1); }

// last relation and connecting matrix repeat forever
bool stationary_tail(const StageSystem& s)
{
    const int last = s.depth() - 1;
    if (last < 1 || !s.k0.generator || !s.envelope.generator) return false;
    const auto& a = s.stages[static_cast<size_t>(last)];
    const auto& b = s.stages[static_cast<size_t>(last - 1)];
    const IntMatrix& g = *s.k0.generator;
    const IntMatrix& l = s.k0.multiplicities.back();
    return a.reach() == b.reach() && g.rows() == l.rows() && g.cols() == l.cols() && g == l;
}

BigInt cut_value(const std::vector<char>& u, const IntVector& v)
{
    BigInt t = 0;
    for (size_t i = 0; i < u.size(); ++i)
        if (u[i]) t += v(static_cast<Eigen::Index>(i));
    return t;
}

// index of a cut violated by the pair at the last stage, or -1
int violated_cut(const std::vector<std::vector<char>>& cuts, const IntVector& p, const IntVector& q)
{
    for (size_t c = 0; c < cuts.size(); ++c)
        if (cut_value(cuts[c], q) > cut_value(cuts[c], p)) return static_cast<int>(c);
    return -1;
}

std::string describe_cut(const std::vector<char>& u)
{
    std::string r = "{";
    for (size_t i = 0; i < u.size(); ++i)
        if (u[i]) r += (r.size() > 1 ? "," : "") + std::to_string(i + 1);
    return r + "}";
}

}  // namespace

std::vector<std::vector<char>> persistent_cuts(const StageSystem& s)
{
    if (!stationary_tail(s)) return {};
    const BlockPreorder& b = s.stages.back();
    const int n = b.types();
    if (n > 14) return {};
    std::vector<std::vector<char>> closed;
    for (unsigned mask = 1; mask < (1u << n); ++mask) {
        std::vector<char> u(static_cast<size_t>(n));
        for (int t = 0; t < n; ++t) u[static_cast<size_t>(t)] = (mask >> t) & 1u;
        bool ok = true;
        for (int t = 0; t < n && ok; ++t)
            for (int r = 0; r < n && ok; ++r)
                if (u[static_cast<size_t>(t)] && b.reaches(r, t) && !u[static_cast<size_t>(r)]) ok = false;
        if (ok) closed.push_back(std::move(u));
    }
    const IntMatrix& m = s.envelope_map.back();
    const IntMatrix& x = *s.k0.generator;
    const size_t c = closed.size();
    // echelon basis of the envelope rows over Q
    using QRow = std::vector<Rational>;
    std::vector<QRow> basis;
    std::vector<int> pivots;
    auto reduce = [&](QRow r) {
        for (size_t b = 0; b < basis.size(); ++b) {
            const Rational f = r[static_cast<size_t>(pivots[b])];
            if (f == 0) continue;
            for (int t = 0; t < n; ++t) r[static_cast<size_t>(t)] -= f * basis[b][static_cast<size_t>(t)];
        }
        return r;
    };
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        QRow r(static_cast<size_t>(n));
        for (int t = 0; t < n; ++t) r[static_cast<size_t>(t)] = Rational(m(i, t));
        r = reduce(std::move(r));
        int p = 0;
        while (p < n && r[static_cast<size_t>(p)] == 0) ++p;
        if (p == n) continue;
        const Rational lead = r[static_cast<size_t>(p)];
        for (auto& e : r) e /= lead;
        for (auto& b : basis) {
            const Rational f = b[static_cast<size_t>(p)];
            if (f != 0)
                for (int t = 0; t < n; ++t) b[static_cast<size_t>(t)] -= f * r[static_cast<size_t>(t)];
        }
        basis.push_back(std::move(r));
        pivots.push_back(p);
    }
    auto indicator = [&](const std::vector<char>& u) {
        QRow r(static_cast<size_t>(n));
        for (int t = 0; t < n; ++t) r[static_cast<size_t>(t)] = u[static_cast<size_t>(t)] ? 1 : 0;
        return reduce(std::move(r));
    };
    // j -> i when 1_{U_i} X = c 1_{U_j} modulo the envelope rows with c > 0;
    // on differences killed by the envelope map this carries a positive
    // excess on U_j to a positive excess on U_i one step later
    std::vector<QRow> reduced(c);
    for (size_t j = 0; j < c; ++j) reduced[j] = indicator(closed[j]);
    std::vector<std::vector<int>> next(c);
    for (size_t i = 0; i < c; ++i) {
        QRow pulled(static_cast<size_t>(n));
        for (int t = 0; t < n; ++t) {
            BigInt v = 0;
            for (int r = 0; r < n; ++r)
                if (closed[i][static_cast<size_t>(r)]) v += x(r, t);
            pulled[static_cast<size_t>(t)] = Rational(v);
        }
        pulled = reduce(std::move(pulled));
        for (size_t j = 0; j < c; ++j) {
            const QRow& u = reduced[j];
            int p = 0;
            while (p < n && u[static_cast<size_t>(p)] == 0) ++p;
            if (p == n) continue;  // never violated
            const Rational f = pulled[static_cast<size_t>(p)] / u[static_cast<size_t>(p)];
            if (f <= 0) continue;
            bool ok = true;
            for (int t = 0; t < n && ok; ++t) ok = pulled[static_cast<size_t>(t)] == f * u[static_cast<size_t>(t)];
            if (ok) next[j].push_back(static_cast<int>(i));
        }
    }
    std::vector<char> alive(c, 1);
    for (bool changed = true; changed;) {
        changed = false;
        for (size_t j = 0; j < c; ++j) {
            if (!alive[j]) continue;
            bool out = false;
            for (int i : next[j])
                if (alive[static_cast<size_t>(i)]) out = true;
            if (!out) {
                alive[j] = 0;
                changed = true;
            }
        }
    }
    std::vector<std::vector<char>> out;
    for (size_t j = 0; j < c; ++j)
        if (alive[j]) out.push_back(closed[j]);
    return out;
}

void attach_cuts(StageSystem& s) { s.cuts = persistent_cuts(s); }

LimitOrderVerdict limit_order_holds(const StageSystem& s, const LimitElement& p, const LimitElement& q, int depth)
{
    LimitOrderVerdict out;
    const int start = std::max(p.stage, q.stage);
    const int last = s.depth() - 1;
    if (start > last) throw std::out_of_range("limit order: element stage beyond the stored stages");
    const int stop = std::min(last, std::max(start, depth));
    LimitElement pk = push(s.k0, p, start), qk = push(s.k0, q, start);

    // trace obstruction
    const IntVector ep = apply(s.envelope_map[static_cast<size_t>(start)], pk.vector);
    const IntVector eq = apply(s.envelope_map[static_cast<size_t>(start)], qk.vector);
    if (ep != eq && trace_final(s)) {
        EqualityVerdict e = equal(s.envelope, {start, ep}, {start, eq}, std::max(depth, 1));
        if (e.verdict == Verdict::no) {
            out.verdict = Verdict::no;
            out.stage = start;
            out.p_at = pk.vector;
            out.q_at = qk.vector;
            out.method = "trace";
            out.reason = "envelope classes differ: " + e.reason;
            return out;
        }
    }

    // a persistent cut violated at the last stage is violated at every stage
    if (stationary_tail(s)) {
        const std::vector<std::vector<char>> computed = s.cuts ? std::vector<std::vector<char>>{} : persistent_cuts(s);
        const auto& cuts = s.cuts ? *s.cuts : computed;
        const LimitElement ph = push(s.k0, pk, last), qh = push(s.k0, qk, last);
        const IntMatrix& m = s.envelope_map.back();
        if (!cuts.empty() && apply(m, ph.vector) == apply(m, qh.vector)) {
            const int c = violated_cut(cuts, ph.vector, qh.vector);
            if (c >= 0) {
                out.verdict = Verdict::no;
                out.stage = last;
                out.p_at = ph.vector;
                out.q_at = qh.vector;
                out.method = "invariant cut";
                out.reason = "closed type set " + describe_cut(cuts[static_cast<size_t>(c)]) + " holds more of the second class (" +
                             cut_value(cuts[static_cast<size_t>(c)], qh.vector).str() + " > " +
                             cut_value(cuts[static_cast<size_t>(c)], ph.vector).str() + ") and every later step keeps a positive excess on a closed set";
                return out;
            }
        }
    }

    for (int k = start; k <= stop; ++k) {
        if (k > start) {
            pk = push(s.k0, pk, k);
            qk = push(s.k0, qk, k);
        }
        const IntVector& sz = s.k0.level_sizes[static_cast<size_t>(k)];
        if (!fits(pk.vector, sz) || !fits(qk.vector, sz)) continue;
        OrderResult r = order_holds(s.stages[static_cast<size_t>(k)], pk.vector, qk.vector);
        if (r.holds) {
            out.verdict = Verdict::yes;
            out.stage = k;
            out.p_at = pk.vector;
            out.q_at = qk.vector;
            out.certificate = std::move(r.certificate);
            out.method = "stage matching";
            out.reason = "matching at stage " + std::to_string(k);
            return out;
        }
    }

    if (s.nest) {
        const LimitElement ph = push(s.k0, pk, last), qh = push(s.k0, qk, last);
        if (auto ob = special_obstruction(s, ph.vector, qh.vector)) {
            out.verdict = Verdict::no;
            out.stage = last;
            out.p_at = ph.vector;
            out.q_at = qh.vector;
            out.method = "special point";
            out.reason = "index " + one_based(ob->index) + " at stage " + std::to_string(last) +
                         " starts a germ that stays right-most in its summand; the first class contains it, the second does not";
            return out;
        }
    }
    out.stage = stop;
    out.p_at = pk.vector;
    out.q_at = qk.vector;
    out.reason = "no matching through stage " + std::to_string(stop) + " and no stage-independent obstruction";
    return out;
}

bool validate_limit_order(const StageSystem& s, const LimitElement& p, const LimitElement& q, const LimitOrderVerdict& v,
                          std::string* why)
{
    auto fail = [&](std::string m) {
        if (why) *why = std::move(m);
        return false;
    };
    if (v.verdict == Verdict::inconclusive) return true;
    if (v.stage < std::max(p.stage, q.stage) || v.stage >= s.depth()) return fail("stage out of range");
    const IntVector pa = push(s.k0, p, v.stage).vector, qa = push(s.k0, q, v.stage).vector;
    if (pa != v.p_at || qa != v.q_at) return fail("stated classes differ from the pushed classes");
    if (v.verdict == Verdict::yes) return validate_certificate(s.stages[static_cast<size_t>(v.stage)], pa, qa, v.certificate, why);
    if (v.method == "trace") {
        const IntMatrix& e = s.envelope_map[static_cast<size_t>(v.stage)];
        if (!trace_final(s)) return fail("trace refutation on a truncated system");
        if (equal(s.envelope, {v.stage, e * pa}, {v.stage, e * qa}).verdict != Verdict::no) return fail("envelope classes agree");
        return true;
    }
    if (v.method == "special point") {
        if (!special_obstruction(s, pa, qa)) return fail("no right-most germ separates the classes");
        return true;
    }
    if (v.method == "invariant cut") {
        if (v.stage != s.depth() - 1) return fail("cut stated away from the last stage");
        const IntMatrix& m = s.envelope_map.back();
        if (IntVector(m * pa) != IntVector(m * qa)) return fail("envelope classes differ at the cut stage");
        if (violated_cut(persistent_cuts(s), pa, qa) < 0) return fail("no persistent cut is violated");
        return true;
    }
    return fail("unknown refutation method");
}

// ---- closed forms

bool closed_form_4_1(const std::vector<int>& sizes, const IntVector& a, const IntVector& b)
{
    const Eigen::Index r = static_cast<Eigen::Index>(sizes.size());
    if (a.size() != r || b.size() != r) throw ShapeError("closed form: expected " + std::to_string(r) + " block counts");
    BigInt ta = 0, tb = 0;
    bool tails = true;
    for (Eigen::Index k = r; k-- > 0;) {
        ta += a(k);
        tb += b(k);
        if (tb < ta) tails = false;
    }
    return ta == tb && tails;
}

bool closed_form_4_4(const std::pair<Rational, Rational>& ab, const std::pair<Rational, Rational>& cd)
{
    return ab.first == cd.first && ab.second <= cd.second;
}

bool closed_form_4_5(const IntVector& x, const IntVector& y)
{
    if (x.size() != 3 || y.size() != 3) throw ShapeError("closed form: expected triples");
    return x(2) == y(2) && x(0) + x(1) == y(0) + y(1) && x(1) <= y(1);
}

std::pair<Rational, Rational> trace_difference_coordinates(const LimitElement& e)
{
    if (e.vector.size() != 2) throw ShapeError("coordinates: expected a pair");
    BigInt two_k = 1;
    for (int i = 0; i < e.stage; ++i) two_k *= 2;
    const Rational sum(e.vector(0) + e.vector(1)), diff(e.vector(1) - e.vector(0));
    return {sum / Rational(2 * two_k * two_k), diff / Rational(2 * two_k)};
}

// ---- fibres

FiberReport fiber_equivalence_check(const StageSystem& s, const InducedMap& induced, const std::vector<LimitElement>& sample,
                                    int depth)
{
    FiberReport rep;
    const size_t n = sample.size();
    std::vector<int> cls(n), fib(n);
    std::iota(cls.begin(), cls.end(), 0);
    std::iota(fib.begin(), fib.end(), 0);
    std::function<int(std::vector<int>&, int)> find = [&](std::vector<int>& uf, int x) {
        while (uf[static_cast<size_t>(x)] != x) x = uf[static_cast<size_t>(x)] = uf[static_cast<size_t>(uf[static_cast<size_t>(x)])];
        return x;
    };
    auto unite = [&](std::vector<int>& uf, int a, int b) { uf[static_cast<size_t>(find(uf, a))] = find(uf, b); };

    std::vector<LimitElement> img;
    for (const auto& e : sample) img.push_back(induced_map_apply(induced, e));
    for (size_t i = 0; i < n; ++i)
        for (size_t j = i + 1; j < n; ++j) {
            const int a = static_cast<int>(i), b = static_cast<int>(j);
            if (equal(induced.target, img[i], img[j], depth).verdict == Verdict::yes) unite(fib, a, b);
            if (find(cls, a) == find(cls, b)) continue;
            if (limit_order_holds(s, sample[i], sample[j], depth).verdict == Verdict::yes ||
                limit_order_holds(s, sample[j], sample[i], depth).verdict == Verdict::yes)
                unite(cls, a, b);
        }
    auto groups = [&](std::vector<int>& uf) {
        std::map<int, std::vector<int>> g;
        for (size_t i = 0; i < n; ++i) g[find(uf, static_cast<int>(i))].push_back(static_cast<int>(i));
        std::vector<std::vector<int>> out;
        for (auto& [k, v] : g) out.push_back(std::move(v));
        return out;
    };
    rep.classes = groups(cls);
    rep.fibers = groups(fib);
    for (const auto& c : rep.classes)
        for (int i : c)
            if (find(fib, i) != find(fib, c.front())) {
                rep.classes_in_fibers = false;
                rep.violations.push_back("sample " + one_based(c.front()) + " and " + one_based(i) +
                                         " are order-equivalent but have different envelope classes");
                break;
            }
    for (const auto& f : rep.fibers)
        for (int i : f)
            if (find(cls, i) != find(cls, f.front())) {
                rep.fibers_connected = false;
                rep.violations.push_back("sample " + one_based(f.front()) + " and " + one_based(i) +
                                         " share an envelope class but no decided order chain joins them");
                break;
            }
    return rep;
}

// ---- special point

std::string to_string(SpecialPointResult::Kind k)
{
    switch (k) {
    case SpecialPointResult::exists: return "exists";
    case SpecialPointResult::none: return "none";
    default: return "inconclusive";
    }
}

namespace {

OrderedBratteliDiagram extended(const OrderedBratteliDiagram& d, int depth)
{
    OrderedBratteliDiagram e = d;
    if (e.orders.empty()) return e;
    e.orders.resize(static_cast<size_t>(std::max(depth, 1)), d.orders.back());
    return e;
}

}  // namespace

SpecialPointResult special_point_exists(const OrderedBratteliDiagram& d, int depth, const SpecialPointOptions& opt)
{
    SpecialPointResult out;
    out.depth = depth;
    if (depth < 1 || d.orders.empty()) {
        out.reason = "needs at least one step";
        return out;
    }
    const NestSystem ns = realize_nest_system(extended(d, depth));
    const int horizon = depth;
    // per stage: vertex, position and parent of each index
    std::vector<std::vector<int>> vert(static_cast<size_t>(horizon + 1)), pos(vert.size()), parent(vert.size());
    for (int k = 0; k <= horizon; ++k) {
        const auto& sz = ns.vertex_sizes[static_cast<size_t>(k)];
        for (size_t v = 0; v < sz.size(); ++v)
            for (int i = 0; i < sz[v]; ++i) {
                vert[static_cast<size_t>(k)].push_back(static_cast<int>(v));
                pos[static_cast<size_t>(k)].push_back(i);
            }
        parent[static_cast<size_t>(k)].assign(vert[static_cast<size_t>(k)].size(), -1);
        if (k > 0) {
            const auto& e = ns.embeddings[static_cast<size_t>(k - 1)];
            for (size_t i = 0; i < e.image.size(); ++i)
                for (int a : e.image[i]) parent[static_cast<size_t>(k)][static_cast<size_t>(a)] = static_cast<int>(i);
        }
    }
    auto size_of = [&](int k, int i) { return ns.vertex_sizes[static_cast<size_t>(k)][static_cast<size_t>(vert[static_cast<size_t>(k)][static_cast<size_t>(i)])]; };
    auto rightmost = [&](int k, int i) { return pos[static_cast<size_t>(k)][static_cast<size_t>(i)] == size_of(k, i) - 1; };
    auto ancestry = [&](int i) {
        std::vector<int> a(static_cast<size_t>(horizon + 1));
        for (int k = horizon; k >= 0; --k) {
            a[static_cast<size_t>(k)] = i;
            if (k > 0) i = parent[static_cast<size_t>(k)][static_cast<size_t>(i)];
        }
        return a;
    };
    // some x-unit moves onto a y-unit by orthogonal diagonal projections
    auto below = [&](int k, int x, int y) {
        if (x == y) return false;
        const int vx = vert[static_cast<size_t>(k)][static_cast<size_t>(x)], vy = vert[static_cast<size_t>(k)][static_cast<size_t>(y)];
        const int px = pos[static_cast<size_t>(k)][static_cast<size_t>(x)], py = pos[static_cast<size_t>(k)][static_cast<size_t>(y)];
        if (vx == vy && py < px) return true;
        return px > 0 && py < size_of(k, y) - 1;
    };

    const int count = static_cast<int>(vert[static_cast<size_t>(horizon)].size());
    std::vector<std::vector<int>> anc(static_cast<size_t>(count));
    for (int i = 0; i < count; ++i) anc[static_cast<size_t>(i)] = ancestry(i);

    int best = -1;
    for (int x = 0; x < count; ++x) {
        const auto& ax = anc[static_cast<size_t>(x)];
        bool maximal = true;
        for (int k = 0; k <= horizon && maximal; ++k) maximal = rightmost(k, ax[static_cast<size_t>(k)]);
        if (opt.rightmost_only && !maximal) continue;
        ++out.candidates;
        if (!maximal) continue;
        bool greatest = true;
        for (int y = 0; y < count && greatest; ++y) {
            const auto& ay = anc[static_cast<size_t>(y)];
            if (ay[static_cast<size_t>(horizon - 1)] == ax[static_cast<size_t>(horizon - 1)]) continue;
            bool dominated = false;
            for (int k = 0; k <= horizon && !dominated; ++k) dominated = below(k, ax[static_cast<size_t>(k)], ay[static_cast<size_t>(k)]);
            greatest = dominated;
        }
        if (!greatest) continue;
        if (best < 0 || vert[static_cast<size_t>(horizon)][static_cast<size_t>(x)] > vert[static_cast<size_t>(horizon)][static_cast<size_t>(best)]) best = x;
    }
    if (best < 0) {
        out.kind = SpecialPointResult::none;
        out.reason = "no candidate germ through stage " + std::to_string(horizon) + " is right-most and above every other germ";
        return out;
    }
    out.kind = SpecialPointResult::exists;
    const auto& ab = anc[static_cast<size_t>(best)];
    for (int k = 0; k <= horizon; ++k)
        out.path.emplace_back(vert[static_cast<size_t>(k)][static_cast<size_t>(ab[static_cast<size_t>(k)])],
                              pos[static_cast<size_t>(k)][static_cast<size_t>(ab[static_cast<size_t>(k)])]);
    out.reason = "right-most germ above every germ separated by stage " + std::to_string(horizon - 1);
    return out;
}

// ---- realizing relations

namespace {

struct IndexView {
    PreorderAlgebra algebra;
    std::vector<std::vector<int>> type_indices;
};

IndexView index_view(const StageSystem& s, int stage)
{
    if (stage < 0 || stage >= s.depth()) throw std::out_of_range("stage out of range");
    IndexView v;
    const BlockPreorder& b = s.stages[static_cast<size_t>(stage)];
    v.type_indices.resize(static_cast<size_t>(b.types()));
    if (s.nest) {
        v.algebra = s.nest->stages[static_cast<size_t>(stage)];
        for (int i = 0; i < v.algebra.size(); ++i) v.type_indices[static_cast<size_t>(v.algebra.block_of(i))].push_back(i);
        return v;
    }
    BigInt total = 0;
    for (int t = 0; t < b.types(); ++t) total += b.size(t);
    if (total > 4096) throw std::length_error("index algebra: stage " + std::to_string(stage) + " has " + total.str() + " units");
    std::vector<int> kept, block_of;
    for (int t = 0; t < b.types(); ++t) {
        if (b.size(t) == 0) continue;
        const int blk = static_cast<int>(kept.size());
        kept.push_back(t);
        for (int i = 0; i < b.size(t).convert_to<int>(); ++i) {
            v.type_indices[static_cast<size_t>(t)].push_back(static_cast<int>(block_of.size()));
            block_of.push_back(blk);
        }
    }
    std::vector<std::vector<char>> reach(kept.size(), std::vector<char>(kept.size(), 0));
    for (size_t i = 0; i < kept.size(); ++i)
        for (size_t j = 0; j < kept.size(); ++j) reach[i][j] = b.reaches(kept[i], kept[j]) ? 1 : 0;
    v.algebra = PreorderAlgebra::from_blocks(std::move(block_of), std::move(reach), true);
    return v;
}

}  // namespace

PreorderAlgebra index_algebra(const StageSystem& s, int stage) { return index_view(s, stage).algebra; }

RealizationResult realize_relation(const StageSystem& s, const RelationSpec& r, int stage_budget, const SearchOptions& opt)
{
    RealizationResult out;
    if (static_cast<int>(r.classes.size()) != r.nodes) throw std::invalid_argument("relation: one class per node required");
    const PreorderAlgebra src = PreorderAlgebra::from_relation(r.nodes, r.pairs);
    int start = 0;
    for (const auto& c : r.classes) start = std::max(start, c.stage);
    const int stop = std::min(stage_budget, s.depth() - 1);
    for (int k = start; k <= stop; ++k) {
        std::vector<IntVector> cls;
        for (const auto& c : r.classes) cls.push_back(push(s.k0, c, k).vector);
        const IntVector& sz = s.k0.level_sizes[static_cast<size_t>(k)];
        IntVector used = IntVector::Zero(sz.size());
        bool ok = true;
        for (const auto& c : cls) {
            if (!nonnegative(c)) ok = false;
            used += c;
        }
        if (!ok || !fits(used, sz)) continue;
        const IndexView view = index_view(s, k);
        // canonical allocation: inside a block any choice is conjugate to any other
        DiagonalMap diag(static_cast<size_t>(r.nodes));
        std::vector<size_t> next(view.type_indices.size(), 0);
        for (int i = 0; i < r.nodes; ++i) {
            for (size_t t = 0; t < view.type_indices.size(); ++t)
                for (BigInt c = 0; c < cls[static_cast<size_t>(i)](static_cast<Eigen::Index>(t)); ++c)
                    diag[static_cast<size_t>(i)].push_back(view.type_indices[t][next[t]++]);
            std::sort(diag[static_cast<size_t>(i)].begin(), diag[static_cast<size_t>(i)].end());
        }
        bool sizes_match = true;
        for (auto [i, j] : src.pairs())
            if (diag[static_cast<size_t>(i)].size() != diag[static_cast<size_t>(j)].size()) sizes_match = false;
        if (!sizes_match) continue;
        SearchResult sr = search_regular_embedding(src, view.algebra, diag, opt);
        if (sr.status == SearchStatus::found) {
            out.status = SearchStatus::found;
            out.stage = k;
            out.embedding = std::move(sr.embedding);
            out.reason = "realized at stage " + std::to_string(k);
            return out;
        }
        if (sr.status == SearchStatus::inconclusive) out.status = SearchStatus::inconclusive;
    }
    out.reason = out.status == SearchStatus::inconclusive ? "search budget spent before stage " + std::to_string(stop)
                                                          : "exhausted through stage " + std::to_string(stop);
    return out;
}

// ---- intertwining search

MatrixUnitEmbedding connecting(const NestSystem& n, int from, int to)
{
    if (from < 0 || to < from || to >= static_cast<int>(n.stages.size())) throw std::out_of_range("connecting: stages out of range");
    const PreorderAlgebra& a = n.stages[static_cast<size_t>(from)];
    MatrixUnitEmbedding e{a, a, {}, {}};
    for (int i = 0; i < a.size(); ++i) e.image.push_back({i});
    for (int k = from; k < to; ++k) e = compose(e, n.embeddings[static_cast<size_t>(k)]);
    return e;
}

bool same_embedding(const MatrixUnitEmbedding& x, const MatrixUnitEmbedding& y)
{
    if (!(x.source == y.source) || !(x.target == y.target) || x.image.size() != y.image.size()) return false;
    for (size_t i = 0; i < x.image.size(); ++i) {
        auto a = x.image[i], b = y.image[i];
        std::sort(a.begin(), a.end());
        std::sort(b.begin(), b.end());
        if (a != b) return false;
    }
    const int n = x.source.size();
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            if (i == j || !x.source.related(i, j)) continue;
            auto a = x.pairing(i, j), b = y.pairing(i, j);
            std::sort(a.begin(), a.end());
            std::sort(b.begin(), b.end());
            if (a != b) return false;
        }
    return true;
}

namespace {

std::vector<std::vector<int>> component_indices(const PreorderAlgebra& a)
{
    std::vector<std::vector<int>> out;
    for (const auto& comp : a.components()) {
        out.emplace_back();
        for (int b : comp)
            for (int i : a.block_members(b)) out.back().push_back(i);
        std::sort(out.back().begin(), out.back().end());
    }
    return out;
}

// copies of a component: per copy, target index for every source index (-1 outside)
std::vector<std::vector<int>> copies(const MatrixUnitEmbedding& e, const std::vector<int>& comp)
{
    const int n = e.source.size();
    const int root = comp.front();
    const size_t r = e.image[static_cast<size_t>(root)].size();
    std::vector<std::vector<int>> out(r, std::vector<int>(static_cast<size_t>(n), -1));
    for (size_t t = 0; t < r; ++t) out[t][static_cast<size_t>(root)] = e.image[static_cast<size_t>(root)][t];
    std::vector<char> seen(static_cast<size_t>(n), 0);
    seen[static_cast<size_t>(root)] = 1;
    std::vector<int> queue{root};
    for (size_t h = 0; h < queue.size(); ++h) {
        const int i = queue[h];
        for (int j : comp) {
            if (seen[static_cast<size_t>(j)]) continue;
            std::map<int, int> step;  // target unit of i -> target unit of j
            if (e.source.related(i, j))
                for (auto [a, b] : e.pairing(i, j)) step[a] = b;
            else if (e.source.related(j, i))
                for (auto [a, b] : e.pairing(j, i)) step[b] = a;
            else
                continue;
            for (auto& c : out) c[static_cast<size_t>(j)] = step.at(c[static_cast<size_t>(i)]);
            seen[static_cast<size_t>(j)] = 1;
            queue.push_back(j);
        }
    }
    std::sort(out.begin(), out.end(), [&](const auto& a, const auto& b) { return a[static_cast<size_t>(root)] < b[static_cast<size_t>(root)]; });
    return out;
}

struct Budget {
    long nodes = 0;
    long limit = 0;
    bool spent() { return ++nodes > limit; }
};

using Visit = std::function<bool(const MatrixUnitEmbedding&)>;

MatrixUnitEmbedding assemble(const PreorderAlgebra& x, const PreorderAlgebra& y, const std::vector<std::vector<std::vector<int>>>& per_comp,
                             const std::vector<std::vector<int>>& comps)
{
    MatrixUnitEmbedding h{x, y, std::vector<std::vector<int>>(static_cast<size_t>(x.size())), {}};
    for (size_t d = 0; d < comps.size(); ++d)
        for (const auto& c : per_comp[d])
            for (int i : comps[d]) h.image[static_cast<size_t>(i)].push_back(c[static_cast<size_t>(i)]);
    return h;
}

bool compatible(const PreorderAlgebra& x, const PreorderAlgebra& y, const std::vector<int>& h, const std::vector<int>& assigned, int i)
{
    for (int j : assigned) {
        if (j == i) continue;
        if (x.related(i, j) && !y.related(h[static_cast<size_t>(i)], h[static_cast<size_t>(j)])) return false;
        if (x.related(j, i) && !y.related(h[static_cast<size_t>(j)], h[static_cast<size_t>(i)])) return false;
    }
    return true;
}

// unital regular maps x -> y given by copies of each component
bool free_maps(const PreorderAlgebra& x, const PreorderAlgebra& y, Budget& budget, const Visit& visit)
{
    const auto comps = component_indices(x);
    std::vector<char> used(static_cast<size_t>(y.size()), 0);
    int free_left = y.size();
    std::vector<std::vector<std::vector<int>>> chosen(comps.size());
    std::vector<int> h(static_cast<size_t>(x.size()), -1);
    bool stop = false;

    std::function<void(size_t, int)> comp_rec;
    std::function<void(size_t, size_t, int, std::vector<int>&)> fill = [&](size_t d, size_t pos, int first_min, std::vector<int>& done) {
        if (stop || budget.spent()) {
            stop = true;
            return;
        }
        const auto& comp = comps[d];
        if (pos == comp.size()) {
            chosen[d].push_back(h);
            const std::vector<int> keep = h;
            comp_rec(d, h[static_cast<size_t>(comp.front())]);
            h = keep;
            chosen[d].pop_back();
            return;
        }
        const int i = comp[pos];
        for (int a = pos == 0 ? first_min + 1 : 0; a < y.size() && !stop; ++a) {
            if (used[static_cast<size_t>(a)]) continue;
            h[static_cast<size_t>(i)] = a;
            if (!compatible(x, y, h, done, i)) continue;
            used[static_cast<size_t>(a)] = 1;
            --free_left;
            done.push_back(i);
            fill(d, pos + 1, first_min, done);
            done.pop_back();
            ++free_left;
            used[static_cast<size_t>(a)] = 0;
        }
        h[static_cast<size_t>(i)] = -1;
    };
    // after a copy of component d: another copy, or move on
    comp_rec = [&](size_t d, int last_first) {
        if (stop) return;
        if (d == comps.size()) return;
        if (free_left >= static_cast<int>(comps[d].size())) {
            std::vector<int> done;
            fill(d, 0, last_first, done);
        }
        if (stop || chosen[d].empty()) return;
        if (d + 1 == comps.size()) {
            if (free_left == 0 && visit(assemble(x, y, chosen, comps))) stop = true;
            return;
        }
        comp_rec(d + 1, -1);
    };
    if (comps.empty()) return false;
    comp_rec(0, -1);
    return stop && budget.nodes <= budget.limit;
}

// maps h: x -> y with h . prev = conn exactly
bool constrained_maps(const MatrixUnitEmbedding& prev, const MatrixUnitEmbedding& conn, Budget& budget, const Visit& visit)
{
    const PreorderAlgebra& w = prev.source;
    const PreorderAlgebra& x = prev.target;
    const PreorderAlgebra& y = conn.target;
    const auto wcomps = component_indices(w);
    const auto xcomps = component_indices(x);
    std::vector<int> comp_of(static_cast<size_t>(x.size()), -1);
    for (size_t d = 0; d < xcomps.size(); ++d)
        for (int i : xcomps[d]) comp_of[static_cast<size_t>(i)] = static_cast<int>(d);

    struct Piece {
        int wc;
        std::vector<int> map;  // w index -> x index
    };
    std::vector<std::vector<Piece>> pieces(xcomps.size());
    std::vector<std::vector<std::vector<int>>> pool(wcomps.size());
    std::vector<int> pieces_of(wcomps.size(), 0);
    std::vector<int> cover(static_cast<size_t>(x.size()), 0);
    for (size_t c = 0; c < wcomps.size(); ++c) {
        pool[c] = copies(conn, wcomps[c]);
        for (auto& m : copies(prev, wcomps[c])) {
            const int d = comp_of[static_cast<size_t>(m[static_cast<size_t>(wcomps[c].front())])];
            for (int i : wcomps[c]) ++cover[static_cast<size_t>(m[static_cast<size_t>(i)])];
            pieces[static_cast<size_t>(d)].push_back({static_cast<int>(c), std::move(m)});
            ++pieces_of[c];
        }
    }
    for (int c : cover)
        if (c != 1) return false;  // prev must be unital
    for (size_t c = 0; c < wcomps.size(); ++c)
        if (pool[c].size() < static_cast<size_t>(pieces_of[c])) return false;

    std::vector<std::vector<char>> taken(wcomps.size());
    std::vector<int> left(wcomps.size());
    for (size_t c = 0; c < wcomps.size(); ++c) {
        taken[c].assign(pool[c].size(), 0);
        left[c] = static_cast<int>(pool[c].size());
    }
    // pieces still to serve in components after d
    std::vector<std::vector<int>> later(xcomps.size() + 1, std::vector<int>(wcomps.size(), 0));
    for (size_t d = xcomps.size(); d-- > 0;) {
        later[d] = later[d + 1];
        for (const auto& p : pieces[d]) ++later[d][static_cast<size_t>(p.wc)];
    }
    std::vector<std::vector<std::vector<int>>> chosen(xcomps.size());
    std::vector<int> h(static_cast<size_t>(x.size()), -1);
    bool stop = false;

    std::function<void(size_t, int)> comp_rec;
    std::function<void(size_t, size_t, int, std::vector<int>&)> fill = [&](size_t d, size_t pi, int first_min, std::vector<int>& done) {
        if (stop || budget.spent()) {
            stop = true;
            return;
        }
        if (pi == pieces[d].size()) {
            chosen[d].push_back(h);
            const std::vector<int> keep = h;
            comp_rec(d, first_min);
            h = keep;
            chosen[d].pop_back();
            return;
        }
        const Piece& p = pieces[d][pi];
        const size_t c = static_cast<size_t>(p.wc);
        const size_t from = pi == 0 ? static_cast<size_t>(first_min + 1) : 0;
        for (size_t a = from; a < pool[c].size() && !stop; ++a) {
            if (taken[c][a]) continue;
            bool ok = true;
            const size_t mark = done.size();
            for (int i : wcomps[c]) {
                const int xi = p.map[static_cast<size_t>(i)];
                h[static_cast<size_t>(xi)] = pool[c][a][static_cast<size_t>(i)];
                done.push_back(xi);
            }
            for (size_t q = mark; q < done.size() && ok; ++q) ok = compatible(x, y, h, done, done[q]);
            if (ok) {
                taken[c][a] = 1;
                --left[c];
                fill(d, pi + 1, pi == 0 ? static_cast<int>(a) : first_min, done);
                ++left[c];
                taken[c][a] = 0;
            }
            for (size_t q = mark; q < done.size(); ++q) h[static_cast<size_t>(done[q])] = -1;
            done.resize(mark);
        }
    };
    comp_rec = [&](size_t d, int last_first) {
        if (stop) return;
        // one more copy of component d
        bool room = true;
        for (size_t c = 0; c < wcomps.size(); ++c) {
            int need = 0;
            for (const auto& p : pieces[d])
                if (static_cast<size_t>(p.wc) == c) ++need;
            if (left[c] < need + later[d + 1][c]) room = false;
        }
        if (room) {
            std::vector<int> done;
            fill(d, 0, last_first, done);
        }
        if (stop || chosen[d].empty()) return;
        if (d + 1 == xcomps.size()) {
            for (int l : left)
                if (l != 0) return;
            if (visit(assemble(x, y, chosen, xcomps))) stop = true;
            return;
        }
        comp_rec(d + 1, -1);
    };
    if (xcomps.empty()) return false;
    comp_rec(0, -1);
    return stop && budget.nodes <= budget.limit;
}

}  // namespace

IsoResult iso_search(const StageSystem& a, const StageSystem& b, int depth, const IsoOptions& opt)
{
    if (!a.nest || !b.nest) throw std::invalid_argument("iso_search: both systems need index-level nest stages");
    IsoResult out;
    const NestSystem& na = *a.nest;
    const NestSystem& nb = *b.nest;
    const int top_a = std::min(depth, static_cast<int>(na.stages.size()) - 1);
    const int top_b = std::min(depth, static_cast<int>(nb.stages.size()) - 1);
    Budget budget{0, opt.node_budget};
    const int total = 2 * opt.rounds;
    IsoCertificate cert;

    // step i maps from the side reached by step i-1
    std::function<bool(int)> rec = [&](int i) -> bool {
        if (i == total) return true;
        const bool forward = i % 2 == 0;
        const NestSystem& to_sys = forward ? nb : na;
        const int top = forward ? top_b : top_a;
        const int from_stage = i == 0 ? 0 : cert.steps.back().to_stage;
        const PreorderAlgebra& src = forward ? na.stages[static_cast<size_t>(from_stage)] : nb.stages[static_cast<size_t>(from_stage)];
        // previous stage reached on the target side
        const int floor = i < 2 ? (i == 0 ? 0 : 1) : cert.steps[static_cast<size_t>(i - 2)].to_stage + 1;
        for (int t = floor; t <= top; ++t) {
            const PreorderAlgebra& tgt = to_sys.stages[static_cast<size_t>(t)];
            if (tgt.size() < src.size()) continue;
            bool found = false;
            Visit visit = [&](const MatrixUnitEmbedding& h) {
                cert.steps.push_back({forward, from_stage, t, h});
                if (rec(i + 1)) {
                    found = true;
                    return true;
                }
                cert.steps.pop_back();
                return budget.nodes > budget.limit;
            };
            if (i == 0) {
                free_maps(src, tgt, budget, visit);
            } else {
                // copied: visiting grows cert.steps
                const MatrixUnitEmbedding prev = cert.steps.back().map;
                const MatrixUnitEmbedding conn = connecting(to_sys, cert.steps.back().from_stage, t);
                constrained_maps(prev, conn, budget, visit);
            }
            if (found) return true;
            if (budget.nodes > budget.limit) return false;
        }
        return false;
    };
    const bool ok = rec(0);
    out.nodes = budget.nodes;
    if (ok) {
        out.status = SearchStatus::found;
        out.certificate = cert;
        out.reason = "intertwining of " + std::to_string(total) + " maps";
    } else if (budget.nodes > budget.limit) {
        out.status = SearchStatus::inconclusive;
        out.reason = "node budget spent";
    } else {
        out.reason = "exhausted: no intertwining of " + std::to_string(total) + " maps through stage " + std::to_string(depth);
    }
    return out;
}

bool validate_iso_certificate(const StageSystem& a, const StageSystem& b, const IsoCertificate& c, std::string* why)
{
    auto fail = [&](std::string m) {
        if (why) *why = std::move(m);
        return false;
    };
    if (!a.nest || !b.nest) return fail("systems lack nest stages");
    const NestSystem& na = *a.nest;
    const NestSystem& nb = *b.nest;
    for (size_t i = 0; i < c.steps.size(); ++i) {
        const IsoStep& s = c.steps[i];
        const NestSystem& from = s.forward ? na : nb;
        const NestSystem& to = s.forward ? nb : na;
        if (s.forward != (i % 2 == 0)) return fail("steps do not alternate");
        if (s.from_stage < 0 || s.from_stage >= static_cast<int>(from.stages.size()) || s.to_stage < 0 ||
            s.to_stage >= static_cast<int>(to.stages.size()))
            return fail("step " + std::to_string(i + 1) + " stage out of range");
        if (!(s.map.source == from.stages[static_cast<size_t>(s.from_stage)]) || !(s.map.target == to.stages[static_cast<size_t>(s.to_stage)]))
            return fail("step " + std::to_string(i + 1) + " does not map between the stated stages");
        EmbeddingCheck e = check_star_extendible(s.map);
        if (!e) return fail("step " + std::to_string(i + 1) + ": " + e.message);
        int covered = 0;
        for (const auto& img : s.map.image) covered += static_cast<int>(img.size());
        if (covered != s.map.target.size()) return fail("step " + std::to_string(i + 1) + " is not unital");
        if (i == 0) {
            if (s.from_stage != 0) return fail("chain must start at stage 0");
            continue;
        }
        const IsoStep& p = c.steps[i - 1];
        if (p.to_stage != s.from_stage) return fail("step " + std::to_string(i + 1) + " does not start where the previous ends");
        if (i >= 2 && s.to_stage <= c.steps[i - 2].to_stage) return fail("stages do not increase");
        if (!same_embedding(compose(p.map, s.map), connecting(to, p.from_stage, s.to_stage)))
            return fail("triangle at step " + std::to_string(i + 1) + " does not commute");
    }
    return true;
}

}  // namespace limord
