#include "limord/fdcsl.hpp"

#include <deque>

namespace limord {

void check_scale(const BlockPreorder& a, const ScaleVector& p)
{
    if (p.size() != a.types())
        throw ScaleError("scale vector has " + std::to_string(p.size()) + " entries, algebra has " +
                         std::to_string(a.types()) + " blocks");
    for (int b = 0; b < a.types(); ++b)
        if (p(b) < 0 || p(b) > a.size(b))
            throw ScaleError("scale entry " + std::to_string(b + 1) + " = " + p(b).str() + " outside [0," +
                             a.size(b).str() + "]");
}

void check_scale(const PreorderAlgebra& a, const ScaleVector& p) { check_scale(a.blocks(), p); }

std::vector<ScaleVector> scale_enumerate(const PreorderAlgebra& a, size_t limit)
{
    double count = 1;
    for (int s : a.block_sizes()) count *= s + 1;
    if (count > static_cast<double>(limit))
        throw ScaleError("scale has " + std::to_string(static_cast<long double>(count)) + " elements, limit " + std::to_string(limit));
    const int r = a.num_blocks();
    std::vector<ScaleVector> out;
    ScaleVector v = ScaleVector::Zero(r);
    while (true) {
        out.push_back(v);
        int k = r - 1;
        while (k >= 0 && v(k) == a.block_size(k)) v(k--) = 0;
        if (k < 0) break;
        v(k) += 1;
    }
    return out;
}

namespace {

// class-level counts
std::vector<BigInt> class_counts(const BlockPreorder& a, const ScaleVector& v)
{
    std::vector<BigInt> out(static_cast<size_t>(a.num_classes()), BigInt(0));
    for (int t = 0; t < a.types(); ++t) out[static_cast<size_t>(a.class_of(t))] += v(t);
    return out;
}

// q units move to earlier (upper) p units along a chain of classes
OrderResult chain_greedy(const std::vector<int>& chain, const std::vector<BigInt>& p, const std::vector<BigInt>& q)
{
    OrderResult r;
    std::vector<BigInt> left;
    for (int b : chain) left.push_back(p[static_cast<size_t>(b)]);
    size_t from = 0;
    for (size_t y = 0; y < chain.size(); ++y) {
        BigInt need = q[static_cast<size_t>(chain[y])];
        while (need > 0) {
            while (from <= y && left[from] == 0) ++from;
            if (from > y) {
                r.reason = "no p unit at or above block " + std::to_string(chain[y] + 1) + " left for a q unit there";
                return r;
            }
            const BigInt take = need < left[from] ? need : left[from];
            r.certificate.flow.push_back({chain[from], chain[y], take});
            left[from] -= take;
            need -= take;
        }
    }
    r.holds = true;
    return r;
}

OrderResult component_flow(const BlockPreorder& a, const std::vector<int>& comp, const std::vector<BigInt>& p,
                           const std::vector<BigInt>& q)
{
    // nodes: 0 source, 1..m q classes, m+1..2m p classes, 2m+1 sink
    const int m = static_cast<int>(comp.size());
    const int n = 2 * m + 2, s = 0, t = 2 * m + 1;
    BigInt total = 0;
    for (int b : comp) total += q[static_cast<size_t>(b)];
    std::vector<std::vector<BigInt>> cap(static_cast<size_t>(n), std::vector<BigInt>(static_cast<size_t>(n), BigInt(0)));
    std::vector<std::vector<int>> adj(static_cast<size_t>(n));
    auto edge = [&](int u, int v, const BigInt& c) {
        cap[u][v] = c;
        adj[u].push_back(v);
        adj[v].push_back(u);
    };
    for (int x = 0; x < m; ++x) {
        edge(s, 1 + x, q[static_cast<size_t>(comp[x])]);
        edge(1 + m + x, t, p[static_cast<size_t>(comp[x])]);
    }
    for (int y = 0; y < m; ++y)
        for (int x = 0; x < m; ++x)
            if (a.class_reaches(comp[x], comp[y])) edge(1 + y, 1 + m + x, total);
    std::vector<std::vector<BigInt>> flow(static_cast<size_t>(n), std::vector<BigInt>(static_cast<size_t>(n), BigInt(0)));
    BigInt value = 0;
    while (true) {
        std::vector<int> prev(static_cast<size_t>(n), -1);
        prev[s] = s;
        std::deque<int> queue{s};
        while (!queue.empty() && prev[t] == -1) {
            const int u = queue.front();
            queue.pop_front();
            for (int v : adj[u])
                if (prev[v] == -1 && cap[u][v] - flow[u][v] > 0) {
                    prev[v] = u;
                    queue.push_back(v);
                }
        }
        if (prev[t] == -1) break;
        BigInt push = -1;
        for (int v = t; v != s; v = prev[v]) {
            const BigInt res = cap[prev[v]][v] - flow[prev[v]][v];
            if (push < 0 || res < push) push = res;
        }
        for (int v = t; v != s; v = prev[v]) {
            flow[prev[v]][v] += push;
            flow[v][prev[v]] -= push;
        }
        value += push;
    }
    OrderResult r;
    if (value != total) {
        r.reason = "max flow " + value.str() + " below total " + total.str();
        return r;
    }
    for (int y = 0; y < m; ++y)
        for (int x = 0; x < m; ++x)
            if (flow[1 + y][1 + m + x] > 0) r.certificate.flow.push_back({comp[x], comp[y], flow[1 + y][1 + m + x]});
    r.holds = true;
    return r;
}

bool is_chain(const BlockPreorder& a, const std::vector<int>& comp)
{
    for (size_t x = 0; x + 1 < comp.size(); ++x)
        if (!a.class_reaches(comp[x], comp[x + 1])) return false;
    return true;
}

// class-level flow to type-level flow
OrderCertificate split_to_types(const BlockPreorder& a, const ScaleVector& p, const ScaleVector& q, const OrderCertificate& c)
{
    std::vector<BigInt> pl(p.data(), p.data() + p.size()), ql(q.data(), q.data() + q.size());
    std::vector<size_t> pn(static_cast<size_t>(a.num_classes()), 0), qn = pn;
    OrderCertificate out;
    for (const auto& f : c.flow) {
        const auto& pm = a.class_members(f.p_block);
        const auto& qm = a.class_members(f.q_block);
        BigInt need = f.amount;
        while (need > 0) {
            size_t& x = pn[static_cast<size_t>(f.p_block)];
            size_t& y = qn[static_cast<size_t>(f.q_block)];
            while (pl[static_cast<size_t>(pm[x])] == 0) ++x;
            while (ql[static_cast<size_t>(qm[y])] == 0) ++y;
            BigInt take = need;
            if (pl[static_cast<size_t>(pm[x])] < take) take = pl[static_cast<size_t>(pm[x])];
            if (ql[static_cast<size_t>(qm[y])] < take) take = ql[static_cast<size_t>(qm[y])];
            out.flow.push_back({pm[x], qm[y], take});
            pl[static_cast<size_t>(pm[x])] -= take;
            ql[static_cast<size_t>(qm[y])] -= take;
            need -= take;
        }
    }
    return out;
}

}  // namespace

OrderResult order_holds(const BlockPreorder& a, const ScaleVector& p, const ScaleVector& q, OrderMethod method)
{
    check_scale(a, p);
    check_scale(a, q);
    const auto pc = class_counts(a, p), qc = class_counts(a, q);
    OrderResult out;
    for (const auto& comp : a.components()) {
        BigInt tp = 0, tq = 0;
        for (int b : comp) {
            tp += pc[static_cast<size_t>(b)];
            tq += qc[static_cast<size_t>(b)];
        }
        if (tp != tq) {
            out.reason = "totals differ on the component containing block " + std::to_string(a.class_members(comp[0])[0] + 1) +
                         ": " + tp.str() + " vs " + tq.str();
            out.certificate.flow.clear();
            return out;
        }
        if (tp == 0) continue;
        OrderResult part = (method == OrderMethod::automatic && is_chain(a, comp)) ? chain_greedy(comp, pc, qc)
                                                                                   : component_flow(a, comp, pc, qc);
        if (!part.holds) {
            part.certificate.flow.clear();
            return part;
        }
        for (auto& f : part.certificate.flow) out.certificate.flow.push_back(std::move(f));
    }
    if (!a.antisymmetric()) out.certificate = split_to_types(a, p, q, out.certificate);
    out.holds = true;
    out.reason = "matching found";
    return out;
}

OrderResult order_holds(const PreorderAlgebra& a, const ScaleVector& p, const ScaleVector& q, OrderMethod method)
{
    return order_holds(a.blocks(), p, q, method);
}

bool validate_certificate(const BlockPreorder& a, const ScaleVector& p, const ScaleVector& q, const OrderCertificate& c,
                          std::string* why)
{
    auto fail = [&](const std::string& m) {
        if (why) *why = m;
        return false;
    };
    if (p.size() != a.types() || q.size() != a.types()) return fail("shape");
    std::vector<BigInt> ps(static_cast<size_t>(a.types()), BigInt(0)), qs = ps;
    for (const auto& f : c.flow) {
        if (f.p_block < 0 || f.q_block < 0 || f.p_block >= a.types() || f.q_block >= a.types())
            return fail("block out of range");
        if (f.amount <= 0) return fail("nonpositive amount");
        if (!a.reaches(f.p_block, f.q_block))
            return fail("pair of blocks (" + std::to_string(f.p_block + 1) + "," + std::to_string(f.q_block + 1) + ") not in the relation");
        ps[static_cast<size_t>(f.p_block)] += f.amount;
        qs[static_cast<size_t>(f.q_block)] += f.amount;
    }
    for (int b = 0; b < a.types(); ++b) {
        if (ps[static_cast<size_t>(b)] != p(b)) return fail("p marginal differs at block " + std::to_string(b + 1));
        if (qs[static_cast<size_t>(b)] != q(b)) return fail("q marginal differs at block " + std::to_string(b + 1));
    }
    return true;
}

bool validate_certificate(const PreorderAlgebra& a, const ScaleVector& p, const ScaleVector& q, const OrderCertificate& c,
                          std::string* why)
{
    return validate_certificate(a.blocks(), p, q, c, why);
}

std::vector<IndexPair> expand_matching(const PreorderAlgebra& a, const OrderCertificate& c)
{
    std::vector<long> pnext(static_cast<size_t>(a.num_blocks()), 0), qnext = pnext;
    std::vector<IndexPair> out;
    for (const auto& f : c.flow) {
        const long k = f.amount.convert_to<long>();
        for (long t = 0; t < k; ++t) {
            const int pi = a.block_members(f.p_block)[static_cast<size_t>(pnext[static_cast<size_t>(f.p_block)]++)];
            const int qi = a.block_members(f.q_block)[static_cast<size_t>(qnext[static_cast<size_t>(f.q_block)]++)];
            out.emplace_back(pi, qi);
        }
    }
    return out;
}

bool nest_order_formula(const std::vector<int>& sizes, const ScaleVector& a, const ScaleVector& b)
{
    const Eigen::Index r = static_cast<Eigen::Index>(sizes.size());
    if (a.size() != r || b.size() != r) throw ShapeError("nest_order_formula: dimension mismatch");
    BigInt ta = 0, tb = 0;
    for (Eigen::Index k = r; k-- > 0;) {
        ta += a(k);
        tb += b(k);
        if (tb < ta) return false;
    }
    return ta == tb;
}

OrderResult strong_order_holds(const BlockPreorder& a, const ScaleVector& p, const ScaleVector& q)
{
    if (!a.sum_of_nests()) throw StrongOrderError("strong order oracle requires nest structure");
    check_scale(a, p);
    check_scale(a, q);
    OrderResult out;
    for (const auto& comp : a.components()) {
        // minimal subprojections listed in nest order, matched by position
        std::vector<int> seq;
        for (int c : comp)
            for (int t : a.class_members(c)) seq.push_back(t);
        size_t x = 0, y = 0;
        BigInt lp = seq.empty() ? BigInt(0) : p(seq[0]), lq = seq.empty() ? BigInt(0) : q(seq[0]);
        while (true) {
            while (x < seq.size() && lp == 0) {
                if (++x < seq.size()) lp = p(seq[x]);
            }
            while (y < seq.size() && lq == 0) {
                if (++y < seq.size()) lq = q(seq[y]);
            }
            if (x == seq.size() || y == seq.size()) {
                if (x != seq.size() || y != seq.size()) {
                    out.reason = "unit counts differ on the component containing block " + std::to_string(seq[0] + 1);
                    out.certificate.flow.clear();
                    return out;
                }
                break;
            }
            if (!a.reaches(seq[x], seq[y])) {
                out.reason = "in-order match pairs a q unit of block " + std::to_string(seq[y] + 1) +
                             " with a p unit of block " + std::to_string(seq[x] + 1) + " outside the relation";
                out.certificate.flow.clear();
                return out;
            }
            const BigInt take = lp < lq ? lp : lq;
            out.certificate.flow.push_back({seq[x], seq[y], take});
            lp -= take;
            lq -= take;
        }
    }
    out.holds = true;
    out.reason = "in-order matching";
    return out;
}

OrderResult strong_order_holds(const PreorderAlgebra& a, const ScaleVector& p, const ScaleVector& q)
{
    return strong_order_holds(a.blocks(), p, q);
}

}  // namespace limord
