#include "limord/fdcsl.hpp"

#include <algorithm>
#include <deque>
#include <set>

namespace limord {

namespace {

std::string idx(int i) { return std::to_string(i + 1); }
std::string pr(int i, int j) { return "(" + idx(i) + "," + idx(j) + ")"; }

EmbeddingCheck bad(std::string m)
{
    EmbeddingCheck c;
    c.message = std::move(m);
    return c;
}

EmbeddingCheck good(std::string m = "ok")
{
    EmbeddingCheck c;
    c.ok = true;
    c.message = std::move(m);
    return c;
}

// source indices grouped by connected component
std::vector<std::vector<int>> index_components(const PreorderAlgebra& a)
{
    std::vector<std::vector<int>> out(a.components().size());
    for (int i = 0; i < a.size(); ++i) out[static_cast<size_t>(a.component_of_block(a.block_of(i)))].push_back(i);
    return out;
}

}  // namespace

std::string to_string(SearchStatus s)
{
    switch (s) {
    case SearchStatus::found: return "found";
    case SearchStatus::none: return "none";
    case SearchStatus::inconclusive: return "inconclusive";
    }
    return "?";
}

std::vector<IndexPair> MatrixUnitEmbedding::pairing(int i, int j) const
{
    auto it = pairing_override.find({i, j});
    if (it != pairing_override.end()) return it->second;
    const auto& a = image[static_cast<size_t>(i)];
    const auto& b = image[static_cast<size_t>(j)];
    std::vector<IndexPair> out;
    for (size_t t = 0; t < std::min(a.size(), b.size()); ++t) out.emplace_back(a[t], b[t]);
    return out;
}

EmbeddingCheck check_well_formed(const MatrixUnitEmbedding& e)
{
    const int n = e.source.size(), m = e.target.size();
    if (static_cast<int>(e.image.size()) != n) return bad("image list count differs from source size");
    std::vector<int> owner(static_cast<size_t>(m), -1);
    for (int i = 0; i < n; ++i) {
        if (e.image[static_cast<size_t>(i)].empty()) return bad("index " + idx(i) + " has empty image");
        for (int a : e.image[static_cast<size_t>(i)]) {
            if (a < 0 || a >= m) return bad("image of " + idx(i) + " leaves the target");
            if (owner[static_cast<size_t>(a)] != -1)
                return bad("target index " + idx(a) + " lies in the images of " + idx(owner[static_cast<size_t>(a)]) + " and " + idx(i));
            owner[static_cast<size_t>(a)] = i;
        }
    }
    for (const auto& [key, pairs] : e.pairing_override)
        if (key.first < 0 || key.second < 0 || key.first >= n || key.second >= n || !e.source.related(key.first, key.second))
            return bad("explicit pairing for " + pr(key.first, key.second) + ", which is not a source matrix unit");
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            if (!e.source.related(i, j)) continue;
            const auto& ii = e.image[static_cast<size_t>(i)];
            const auto& jj = e.image[static_cast<size_t>(j)];
            if (ii.size() != jj.size())
                return bad("related indices " + idx(i) + ", " + idx(j) + " have images of different sizes");
            auto pairs = e.pairing(i, j);
            if (pairs.size() != ii.size()) return bad("pairing for " + pr(i, j) + " is not a bijection");
            std::set<int> left, right;
            for (auto [a, b] : pairs) {
                if (a < 0 || b < 0 || a >= m || b >= m || owner[static_cast<size_t>(a)] != i || owner[static_cast<size_t>(b)] != j)
                    return bad("pairing for " + pr(i, j) + " leaves the image sets");
                left.insert(a);
                right.insert(b);
                if (!e.target.related(a, b))
                    return bad("image of e" + pr(i, j) + " uses e" + pr(a, b) + ", which is not in the target");
            }
            if (left.size() != ii.size() || right.size() != jj.size())
                return bad("pairing for " + pr(i, j) + " is not a bijection");
            if (i == j)
                for (auto [a, b] : pairs)
                    if (a != b) return bad("diagonal unit " + idx(i) + " is not sent to a projection");
        }
    return good();
}

namespace {

// a compatible ordering of every image (a frame), or the first inconsistency
bool frames(const MatrixUnitEmbedding& e, std::vector<std::vector<int>>& pi, std::string& why)
{
    const int n = e.source.size();
    std::vector<int> pos(static_cast<size_t>(e.target.size()), -1);
    pi.assign(static_cast<size_t>(n), {});
    std::vector<char> done(static_cast<size_t>(n), 0);
    for (int root = 0; root < n; ++root) {
        if (done[static_cast<size_t>(root)]) continue;
        pi[static_cast<size_t>(root)] = e.image[static_cast<size_t>(root)];
        done[static_cast<size_t>(root)] = 1;
        for (size_t t = 0; t < pi[static_cast<size_t>(root)].size(); ++t) pos[static_cast<size_t>(pi[static_cast<size_t>(root)][t])] = static_cast<int>(t);
        std::deque<int> queue{root};
        while (!queue.empty()) {
            const int u = queue.front();
            queue.pop_front();
            for (int v = 0; v < n; ++v) {
                if (done[static_cast<size_t>(v)]) continue;
                std::vector<int> fr(pi[static_cast<size_t>(u)].size(), -1);
                if (e.source.related(v, u)) {
                    for (auto [a, b] : e.pairing(v, u)) fr[static_cast<size_t>(pos[static_cast<size_t>(b)])] = a;
                } else if (e.source.related(u, v)) {
                    for (auto [a, b] : e.pairing(u, v)) fr[static_cast<size_t>(pos[static_cast<size_t>(a)])] = b;
                } else {
                    continue;
                }
                pi[static_cast<size_t>(v)] = fr;
                for (size_t t = 0; t < fr.size(); ++t) pos[static_cast<size_t>(fr[t])] = static_cast<int>(t);
                done[static_cast<size_t>(v)] = 1;
                queue.push_back(v);
            }
        }
    }
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            if (i == j || !e.source.related(i, j)) continue;
            for (auto [a, b] : e.pairing(i, j))
                if (pos[static_cast<size_t>(a)] != pos[static_cast<size_t>(b)]) {
                    why = "pairings do not compose: image of e" + pr(i, j) + " contains e" + pr(a, b) +
                          ", inconsistent with the other matrix-unit images";
                    return false;
                }
        }
    return true;
}

}  // namespace

EmbeddingCheck check_star_extendible(const MatrixUnitEmbedding& e)
{
    EmbeddingCheck w = check_well_formed(e);
    if (!w) return w;
    std::vector<std::vector<int>> pi;
    std::string why;
    if (!frames(e, pi, why)) return bad(why);
    return good("star-extendible");
}

EmbeddingCheck check_strongly_regular(const MatrixUnitEmbedding& e)
{
    EmbeddingCheck w = check_well_formed(e);
    if (!w) return w;
    const int n = e.source.size();
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            if (i == j || !e.source.related(i, j)) continue;
            const auto pairs = e.pairing(i, j);
            // b in image(j) goes to a in image(i)
            for (size_t x = 0; x < pairs.size(); ++x)
                for (size_t y = 0; y < pairs.size(); ++y) {
                    if (x == y) continue;
                    const int b1 = pairs[x].second, b2 = pairs[y].second;
                    const int a1 = pairs[x].first, a2 = pairs[y].first;
                    if (e.target.related(b1, b2) != e.target.related(a1, a2)) {
                        EmbeddingCheck c = bad("image of e" + pr(i, j) + " carries " + pr(b1, b2) + " to " + pr(a1, a2) +
                                               "; the target relation holds for exactly one of them");
                        c.source_unit = IndexPair{i, j};
                        c.witness = IndexPair{b1, b2};
                        c.witness_image = IndexPair{a1, a2};
                        return c;
                    }
                }
        }
    return good("strongly regular");
}

MatrixUnitEmbedding refinement_embedding(int m, int n)
{
    MatrixUnitEmbedding e{PreorderAlgebra::upper_triangular(m), PreorderAlgebra::upper_triangular(m * n), {}, {}};
    for (int i = 0; i < m; ++i) {
        e.image.emplace_back();
        for (int t = 0; t < n; ++t) e.image.back().push_back(i * n + t);
    }
    return e;
}

MatrixUnitEmbedding standard_embedding(int m, int n)
{
    MatrixUnitEmbedding e{PreorderAlgebra::upper_triangular(m), PreorderAlgebra::upper_triangular(m * n), {}, {}};
    for (int i = 0; i < m; ++i) {
        e.image.emplace_back();
        for (int t = 0; t < n; ++t) e.image.back().push_back(i + t * m);
    }
    return e;
}

MatrixUnitEmbedding compose(const MatrixUnitEmbedding& first, const MatrixUnitEmbedding& second)
{
    if (!(first.target == second.source)) throw std::invalid_argument("compose: algebras do not chain");
    MatrixUnitEmbedding e{first.source, second.target, {}, {}};
    for (const auto& img : first.image) {
        e.image.emplace_back();
        for (int a : img)
            for (int c : second.image[static_cast<size_t>(a)]) e.image.back().push_back(c);
    }
    const int n = first.source.size();
    const bool plain = first.pairing_override.empty() && second.pairing_override.empty();
    if (plain) {
        // zipped pairings compose to zipped pairings
        return e;
    }
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            if (i == j || !first.source.related(i, j)) continue;
            std::vector<IndexPair> pairs;
            for (auto [a, b] : first.pairing(i, j))
                for (auto pq : second.pairing(a, b)) pairs.push_back(pq);
            if (pairs != e.pairing(i, j)) e.pairing_override[{i, j}] = pairs;
        }
    return e;
}

DiagonalMap allocate_diagonal(const PreorderAlgebra& src, const PreorderAlgebra& tgt, const IntMatrix& mult)
{
    if (mult.rows() != tgt.num_blocks() || mult.cols() != src.num_blocks())
        throw ShapeError("allocate_diagonal: multiplicity matrix must be target blocks x source blocks");
    DiagonalMap d(static_cast<size_t>(src.size()));
    for (int h = 0; h < tgt.num_blocks(); ++h) {
        size_t next = 0;
        const auto& mem = tgt.block_members(h);
        for (int b = 0; b < src.num_blocks(); ++b) {
            const long copies = mult(h, b).convert_to<long>();
            if (copies < 0) throw std::invalid_argument("allocate_diagonal: negative multiplicity");
            for (long c = 0; c < copies; ++c)
                for (int i : src.block_members(b)) {
                    if (next >= mem.size())
                        throw std::invalid_argument("allocate_diagonal: target block " + idx(h) + " too small");
                    d[static_cast<size_t>(i)].push_back(mem[next++]);
                }
        }
    }
    return d;
}

// ---------------------------------------------------------------- searches

namespace {

struct FrameSearch {
    const PreorderAlgebra& src;
    const PreorderAlgebra& tgt;
    const DiagonalMap& diag;
    const SearchOptions& opt;
    std::vector<int> order;  // component indices, first is the root
    std::vector<std::vector<int>> pi;
    std::vector<std::vector<char>> used;  // per order slot, per image position
    long nodes = 0;
    bool budget_hit = false;
    std::vector<std::vector<std::vector<int>>> solutions;
    size_t want = 1;  // 0 = all

    bool pair_ok(int u, int v, size_t t) const
    {
        // (u, v) in source rel: e_uv goes to sum of e_{pi_u[t], pi_v[t]}
        return tgt.related(pi[static_cast<size_t>(u)][t], pi[static_cast<size_t>(v)][t]);
    }

    bool regular_ok(int u, int v, size_t t) const
    {
        const auto& pu = pi[static_cast<size_t>(u)];
        const auto& pv = pi[static_cast<size_t>(v)];
        for (size_t s = 0; s < t; ++s) {
            if (tgt.related(pv[s], pv[t]) != tgt.related(pu[s], pu[t])) return false;
            if (tgt.related(pv[t], pv[s]) != tgt.related(pu[t], pu[s])) return false;
        }
        return true;
    }

    bool consistent(size_t slot, size_t t) const
    {
        const int u = order[slot];
        for (size_t k = 0; k < slot; ++k) {
            const int v = order[k];
            if (src.related(u, v)) {
                if (!pair_ok(u, v, t)) return false;
                if (opt.strongly_regular && !regular_ok(u, v, t)) return false;
            }
            if (src.related(v, u)) {
                if (!pair_ok(v, u, t)) return false;
                if (opt.strongly_regular && !regular_ok(v, u, t)) return false;
            }
        }
        return true;
    }

    bool done() const { return budget_hit || (want != 0 && solutions.size() >= want); }

    void run(size_t slot, size_t t)
    {
        if (done()) return;
        if (slot == order.size()) {
            solutions.push_back(pi);
            return;
        }
        const int u = order[slot];
        const auto& cand = diag[static_cast<size_t>(u)];
        if (t == cand.size()) {
            run(slot + 1, 0);
            return;
        }
        for (size_t c = 0; c < cand.size(); ++c) {
            if (used[slot][c]) continue;
            if (++nodes > opt.node_budget) {
                budget_hit = true;
                return;
            }
            pi[static_cast<size_t>(u)][t] = cand[c];
            used[slot][c] = 1;
            if (consistent(slot, t)) run(slot, t + 1);
            used[slot][c] = 0;
            if (done()) return;
        }
    }
};

std::string prune(const PreorderAlgebra& src, const PreorderAlgebra& tgt, const DiagonalMap& diag)
{
    if (static_cast<int>(diag.size()) != src.size()) return "diagonal map has the wrong number of entries";
    std::vector<int> owner(static_cast<size_t>(tgt.size()), -1);
    for (int i = 0; i < src.size(); ++i) {
        if (diag[static_cast<size_t>(i)].empty()) return "index " + idx(i) + " has an empty image";
        for (int a : diag[static_cast<size_t>(i)]) {
            if (a < 0 || a >= tgt.size()) return "image of " + idx(i) + " leaves the target";
            if (owner[static_cast<size_t>(a)] != -1) return "images of " + idx(owner[static_cast<size_t>(a)]) + " and " + idx(i) + " overlap";
            owner[static_cast<size_t>(a)] = i;
        }
    }
    auto counts = [&](int i) {
        ScaleVector v = ScaleVector::Zero(tgt.num_blocks());
        for (int a : diag[static_cast<size_t>(i)]) v(tgt.block_of(a)) += 1;
        return v;
    };
    for (int i = 0; i < src.size(); ++i)
        for (int j = 0; j < src.size(); ++j) {
            if (i == j || !src.related(i, j)) continue;
            if (diag[static_cast<size_t>(i)].size() != diag[static_cast<size_t>(j)].size())
                return "related indices " + idx(i) + ", " + idx(j) + " have images of different sizes";
            // a matching of image(j) onto image(i) inside the target relation
            if (!order_holds(tgt, counts(i), counts(j), OrderMethod::max_flow))
                return "no partial isometry in the target carries image(" + idx(j) + ") onto image(" + idx(i) + ")";
        }
    return {};
}

// regular homomorphisms without the star-extendibility requirement: a pairing
// per off-diagonal source unit, multiplicative on composable pairs
struct PairingSearch {
    const PreorderAlgebra& src;
    const PreorderAlgebra& tgt;
    const DiagonalMap& diag;
    const SearchOptions& opt;
    std::vector<IndexPair> units;
    std::map<IndexPair, std::vector<int>> chosen;  // (i,j) -> for each b in sorted image(j), its partner in image(i)
    long nodes = 0;
    bool budget_hit = false;
    bool found = false;
    std::map<IndexPair, std::vector<int>> solution;

    int position(int i, int a) const
    {
        const auto& d = diag[static_cast<size_t>(i)];
        return static_cast<int>(std::find(d.begin(), d.end(), a) - d.begin());
    }

    bool multiplicative() const
    {
        for (const auto& [ij, f] : chosen) {
            const int i = ij.first, j = ij.second;
            for (const auto& [jk, g] : chosen) {
                if (jk.first != j) continue;
                const int k = jk.second;
                if (i == k) continue;
                auto it = chosen.find({i, k});
                if (it == chosen.end()) continue;
                // e_ij e_jk = e_ik
                for (size_t c = 0; c < g.size(); ++c) {
                    const int mid = g[c];
                    const int top = f[static_cast<size_t>(position(j, mid))];
                    if (it->second[c] != top) return false;
                }
            }
        }
        if (opt.strongly_regular) {
            for (const auto& [ij, f] : chosen) {
                const auto& dj = diag[static_cast<size_t>(ij.second)];
                for (size_t x = 0; x < dj.size(); ++x)
                    for (size_t y = 0; y < dj.size(); ++y)
                        if (x != y && tgt.related(dj[x], dj[y]) != tgt.related(f[x], f[y])) return false;
            }
        }
        return true;
    }

    void run(size_t u)
    {
        if (found || budget_hit) return;
        if (u == units.size()) {
            found = true;
            solution = chosen;
            return;
        }
        const auto [i, j] = units[u];
        std::vector<int> perm = diag[static_cast<size_t>(i)];
        std::sort(perm.begin(), perm.end());
        const auto& dj = diag[static_cast<size_t>(j)];
        do {
            if (++nodes > opt.node_budget) {
                budget_hit = true;
                return;
            }
            bool ok = true;
            for (size_t c = 0; c < dj.size() && ok; ++c) ok = tgt.related(perm[c], dj[c]);
            if (!ok) continue;
            chosen[{i, j}] = perm;
            if (multiplicative()) run(u + 1);
            chosen.erase({i, j});
            if (found || budget_hit) return;
        } while (std::next_permutation(perm.begin(), perm.end()));
    }
};

}  // namespace

std::vector<MatrixUnitEmbedding> enumerate_embeddings(const PreorderAlgebra& src, const PreorderAlgebra& tgt, const DiagonalMap& diag,
                                                      const SearchOptions& opt, bool* exhausted_budget)
{
    if (exhausted_budget) *exhausted_budget = false;
    std::vector<MatrixUnitEmbedding> out;
    if (!prune(src, tgt, diag).empty()) return out;
    DiagonalMap sorted = diag;
    for (auto& d : sorted) std::sort(d.begin(), d.end());
    // per component, all frames; then the product
    std::vector<std::vector<std::vector<std::vector<int>>>> per;
    const auto comps = index_components(src);
    long nodes = 0;
    for (const auto& comp : comps) {
        FrameSearch fs{src, tgt, sorted, opt, {}, {}, {}, 0, false, {}, 0};
        // breadth-first order from the smallest index
        std::vector<char> seen(static_cast<size_t>(src.size()), 0);
        std::deque<int> q{comp[0]};
        seen[static_cast<size_t>(comp[0])] = 1;
        while (!q.empty()) {
            const int u = q.front();
            q.pop_front();
            fs.order.push_back(u);
            for (int v : comp)
                if (!seen[static_cast<size_t>(v)] && (src.related(u, v) || src.related(v, u))) {
                    seen[static_cast<size_t>(v)] = 1;
                    q.push_back(v);
                }
        }
        fs.pi.assign(static_cast<size_t>(src.size()), {});
        for (int u : comp) fs.pi[static_cast<size_t>(u)].assign(sorted[static_cast<size_t>(u)].size(), -1);
        fs.used.assign(fs.order.size(), {});
        for (size_t s = 0; s < fs.order.size(); ++s) fs.used[s].assign(sorted[static_cast<size_t>(fs.order[s])].size(), 0);
        // the root frame is fixed: relabelling all frames at once changes nothing
        fs.pi[static_cast<size_t>(comp[0])] = sorted[static_cast<size_t>(comp[0])];
        std::fill(fs.used[0].begin(), fs.used[0].end(), 1);
        fs.run(1, 0);
        nodes += fs.nodes;
        if (fs.budget_hit) {
            if (exhausted_budget) *exhausted_budget = true;
            return {};
        }
        if (fs.solutions.empty()) return {};
        per.push_back(std::move(fs.solutions));
    }
    std::vector<size_t> choice(per.size(), 0);
    while (true) {
        MatrixUnitEmbedding e{src, tgt, std::vector<std::vector<int>>(static_cast<size_t>(src.size())), {}};
        for (size_t c = 0; c < per.size(); ++c)
            for (int u : comps[c]) e.image[static_cast<size_t>(u)] = per[c][choice[c]][static_cast<size_t>(u)];
        out.push_back(std::move(e));
        if (static_cast<long>(out.size()) > opt.node_budget) {
            if (exhausted_budget) *exhausted_budget = true;
            return {};
        }
        size_t k = per.size();
        while (k > 0 && ++choice[k - 1] == per[k - 1].size()) choice[--k] = 0;
        if (k == 0) break;
    }
    (void)nodes;
    return out;
}

SearchResult search_regular_embedding(const PreorderAlgebra& src, const PreorderAlgebra& tgt, const DiagonalMap& diag,
                                      const SearchOptions& opt)
{
    SearchResult r;
    const std::string why = prune(src, tgt, diag);
    if (!why.empty()) {
        r.status = SearchStatus::none;
        r.reason = "pruned: " + why;
        return r;
    }
    DiagonalMap sorted = diag;
    for (auto& d : sorted) std::sort(d.begin(), d.end());
    if (!opt.star_extendible) {
        PairingSearch ps{src, tgt, sorted, opt, {}, {}, 0, false, false, {}};
        for (int i = 0; i < src.size(); ++i)
            for (int j = 0; j < src.size(); ++j)
                if (i != j && src.related(i, j)) ps.units.emplace_back(i, j);
        ps.run(0);
        r.nodes = ps.nodes;
        if (ps.budget_hit) {
            r.status = SearchStatus::inconclusive;
            r.reason = "inconclusive: budget";
            return r;
        }
        if (!ps.found) {
            r.status = SearchStatus::none;
            r.reason = "search space exhausted";
            return r;
        }
        MatrixUnitEmbedding e{src, tgt, sorted, {}};
        for (const auto& [ij, f] : ps.solution) {
            std::vector<IndexPair> pairs;
            const auto& dj = sorted[static_cast<size_t>(ij.second)];
            for (size_t c = 0; c < dj.size(); ++c) pairs.emplace_back(f[c], dj[c]);
            e.pairing_override[ij] = pairs;
        }
        r.status = SearchStatus::found;
        r.embedding = e;
        r.reason = "found";
        return r;
    }
    SearchOptions one = opt;
    bool budget = false;
    // first frame per component in lexicographic order
    const auto comps = index_components(src);
    MatrixUnitEmbedding e{src, tgt, std::vector<std::vector<int>>(static_cast<size_t>(src.size())), {}};
    for (const auto& comp : comps) {
        FrameSearch fs{src, tgt, sorted, one, {}, {}, {}, 0, false, {}, 1};
        std::vector<char> seen(static_cast<size_t>(src.size()), 0);
        std::deque<int> q{comp[0]};
        seen[static_cast<size_t>(comp[0])] = 1;
        while (!q.empty()) {
            const int u = q.front();
            q.pop_front();
            fs.order.push_back(u);
            for (int v : comp)
                if (!seen[static_cast<size_t>(v)] && (src.related(u, v) || src.related(v, u))) {
                    seen[static_cast<size_t>(v)] = 1;
                    q.push_back(v);
                }
        }
        fs.pi.assign(static_cast<size_t>(src.size()), {});
        for (int u : comp) fs.pi[static_cast<size_t>(u)].assign(sorted[static_cast<size_t>(u)].size(), -1);
        fs.used.assign(fs.order.size(), {});
        for (size_t s = 0; s < fs.order.size(); ++s) fs.used[s].assign(sorted[static_cast<size_t>(fs.order[s])].size(), 0);
        fs.pi[static_cast<size_t>(comp[0])] = sorted[static_cast<size_t>(comp[0])];
        std::fill(fs.used[0].begin(), fs.used[0].end(), 1);
        fs.run(1, 0);
        r.nodes += fs.nodes;
        one.node_budget -= fs.nodes;
        if (fs.budget_hit) budget = true;
        if (budget || fs.solutions.empty()) break;
        for (int u : comp) e.image[static_cast<size_t>(u)] = fs.solutions[0][static_cast<size_t>(u)];
    }
    if (budget) {
        r.status = SearchStatus::inconclusive;
        r.reason = "inconclusive: budget";
        return r;
    }
    for (const auto& img : e.image)
        if (img.empty()) {
            r.status = SearchStatus::none;
            r.reason = "search space exhausted";
            return r;
        }
    r.status = SearchStatus::found;
    r.embedding = e;
    r.reason = "found";
    return r;
}

bool conjugate(const MatrixUnitEmbedding& a, const MatrixUnitEmbedding& b)
{
    if (!(a.source == b.source) || !(a.target == b.target) || a.image.size() != b.image.size()) return false;
    for (size_t i = 0; i < a.image.size(); ++i) {
        auto x = a.image[i], y = b.image[i];
        std::sort(x.begin(), x.end());
        std::sort(y.begin(), y.end());
        if (x != y) return false;
    }
    std::vector<std::vector<int>> fa, fb;
    std::string why;
    if (!frames(a, fa, why) || !frames(b, fb, why)) return false;
    // a common relabelling of frame positions must match target blocks of every image
    for (const auto& comp : index_components(a.source)) {
        const size_t m = fa[static_cast<size_t>(comp[0])].size();
        std::multiset<std::vector<int>> sa, sb;
        for (size_t t = 0; t < m; ++t) {
            std::vector<int> ka, kb;
            for (int i : comp) {
                ka.push_back(a.target.block_of(fa[static_cast<size_t>(i)][t]));
                kb.push_back(b.target.block_of(fb[static_cast<size_t>(i)][t]));
            }
            sa.insert(ka);
            sb.insert(kb);
        }
        if (sa != sb) return false;
    }
    return true;
}

ConjugacyResult conjugacy_check(const PreorderAlgebra& src, const PreorderAlgebra& tgt, const DiagonalMap& diag,
                                const SearchOptions& opt)
{
    ConjugacyResult r;
    bool budget = false;
    auto all = enumerate_embeddings(src, tgt, diag, opt, &budget);
    if (budget) {
        r.status = SearchStatus::inconclusive;
        r.reason = "inconclusive: budget";
        return r;
    }
    r.enumerated = static_cast<long>(all.size());
    if (all.empty()) {
        r.status = SearchStatus::found;
        r.reason = "no star-extendible embedding over this diagonal map (vacuous)";
        return r;
    }
    for (size_t k = 1; k < all.size(); ++k)
        if (!conjugate(all[0], all[k])) {
            r.status = SearchStatus::none;
            r.counterexample = std::make_pair(all[0], all[k]);
            r.reason = "two embeddings agree on the diagonal but are not conjugate by a unitary of the target's self-adjoint part";
            return r;
        }
    r.status = SearchStatus::found;
    r.reason = "all " + std::to_string(all.size()) + " embeddings are conjugate";
    return r;
}

}  // namespace limord
