#include "limord/statpair.hpp"

#include <map>
#include <set>
#include <stdexcept>

namespace limord {

namespace {

using Relation = std::vector<std::vector<char>>;

Relation diagonal_relation(int n)
{
    Relation r(static_cast<size_t>(n), std::vector<char>(static_cast<size_t>(n), 0));
    for (int i = 0; i < n; ++i) r[static_cast<size_t>(i)][static_cast<size_t>(i)] = 1;
    return r;
}

void close_transitively(Relation& r)
{
    const size_t n = r.size();
    for (size_t k = 0; k < n; ++k)
        for (size_t i = 0; i < n; ++i)
            if (r[i][k])
                for (size_t j = 0; j < n; ++j)
                    if (r[k][j]) r[i][j] = 1;
}

bool transitive(const Relation& r)
{
    const size_t n = r.size();
    for (size_t i = 0; i < n; ++i)
        for (size_t k = 0; k < n; ++k)
            if (r[i][k])
                for (size_t j = 0; j < n; ++j)
                    if (r[k][j] && !r[i][j]) return false;
    return true;
}

// lists[u][h]: the D-vertex of group h carrying copy c of vertex u
std::vector<std::vector<std::vector<int>>> unit_lists(const StationaryPair& p)
{
    const int n = p.vertices();
    std::vector<std::vector<std::vector<int>>> out(static_cast<size_t>(n), std::vector<std::vector<int>>(static_cast<size_t>(p.groups())));
    for (int u = 0; u < n; ++u)
        for (int v = 0; v < n; ++v) {
            const long m = p.x(v, u).convert_to<long>();
            for (long c = 0; c < m; ++c) out[static_cast<size_t>(u)][static_cast<size_t>(p.group_of(v))].push_back(v);
        }
    return out;
}

using PairSet = std::set<IndexPair>;

PairSet images(const std::vector<std::vector<std::vector<int>>>& lists, const PairSet& from)
{
    PairSet out;
    for (auto [a, b] : from) {
        const auto& la = lists[static_cast<size_t>(a)];
        const auto& lb = lists[static_cast<size_t>(b)];
        for (size_t h = 0; h < la.size(); ++h)
            for (size_t c = 0; c < la[h].size(); ++c) out.insert({la[h][c], lb[h][c]});
    }
    return out;
}

std::vector<BigInt> as_sizes(const IntVector& v) { return std::vector<BigInt>(v.data(), v.data() + v.size()); }

}  // namespace

int StationaryPair::group_of(int v) const
{
    int g = 0;
    for (int acc = partition[0]; v >= acc; acc += partition[static_cast<size_t>(++g)]) {
    }
    return g;
}

int StationaryPair::first(int g) const
{
    int f = 0;
    for (int i = 0; i < g; ++i) f += partition[static_cast<size_t>(i)];
    return f;
}

StationaryPair derive_pair(const IntMatrix& x, std::vector<int> partition, IntVector unit)
{
    const Eigen::Index n = x.rows();
    if (x.cols() != n || n == 0) throw ShapeError("stationary pair: the matrix must be square and nonempty");
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j)
            if (x(i, j) < 0) throw std::invalid_argument("stationary pair: negative matrix entry");
    long total = 0;
    for (int k : partition) {
        if (k <= 0) throw std::invalid_argument("stationary pair: partition parts must be positive");
        total += k;
    }
    if (total != n)
        throw std::invalid_argument("stationary pair: partition sums to " + std::to_string(total) + ", matrix has size " +
                                    std::to_string(n));
    if (unit.size() != n) throw ShapeError("stationary pair: unit needs " + std::to_string(n) + " entries");
    if (!nonnegative(unit)) throw std::invalid_argument("stationary pair: negative unit entry");

    StationaryPair p;
    p.x = x;
    p.partition = std::move(partition);
    p.unit = std::move(unit);
    const int r = p.groups();
    p.y = IntMatrix::Zero(r, r);
    p.summation = IntMatrix::Zero(r, n);
    for (int i = 0; i < r; ++i)
        for (int l = 0; l < p.partition[static_cast<size_t>(i)]; ++l) p.summation(i, p.first(i) + l) = 1;
    for (int i = 0; i < r; ++i)
        for (int j = 0; j < r; ++j) {
            BigInt ref;
            for (int l = 0; l < p.partition[static_cast<size_t>(j)]; ++l) {
                BigInt b = 0;
                for (int row = 0; row < p.partition[static_cast<size_t>(i)]; ++row) b += x(p.first(i) + row, p.first(j) + l);
                if (l == 0)
                    ref = b;
                else if (b != ref)
                    throw PairError("stationary pair: partial column sums differ at (i, j, l, l') = (" + std::to_string(i + 1) + ", " +
                                        std::to_string(j + 1) + ", 1, " + std::to_string(l + 1) + "): " + ref.str() + " vs " + b.str(),
                                    i, j, 0, l);
            }
            p.y(i, j) = ref;
        }
    return p;
}

BratteliDiagram small_diagram(const StationaryPair& p, int depth) { return stationary(p.x, p.unit, depth); }

BratteliDiagram large_diagram(const StationaryPair& p, int depth)
{
    return stationary(p.y, IntVector(p.summation * p.unit), depth);
}

InducedMap s_infinity(const StationaryPair& p, int depth)
{
    const IntMatrix lhs = p.summation * p.x, rhs = p.y * p.summation;
    if (!(lhs == rhs)) throw std::logic_error("stationary pair: S X != Y S");
    return make_stationary_map(small_diagram(p, depth), large_diagram(p, depth), p.summation);
}

UnimodularityReport unimodularity_check(const StationaryPair& p)
{
    UnimodularityReport r;
    r.det_x = det(p.x);
    r.det_y = det(p.y);
    r.divides = r.det_y == 0 ? r.det_x == 0 : BigInt(r.det_x % r.det_y) == 0;
    r.x_unimodular = abs(r.det_x) == 1;
    r.y_unimodular = abs(r.det_y) == 1;
    return r;
}

// ---- intermediate specs

std::vector<IndexPair> IntermediateSpec::pairs() const
{
    std::vector<IndexPair> out;
    for (size_t a = 0; a < relation.size(); ++a)
        for (size_t b = 0; b < relation.size(); ++b)
            if (a != b && relation[a][b]) out.push_back({static_cast<int>(a), static_cast<int>(b)});
    return out;
}

std::string IntermediateSpec::describe() const
{
    const auto ps = pairs();
    if (ps.empty()) return "diagonal";
    std::string s;
    for (auto [a, b] : ps) s += (s.empty() ? "" : " ") + std::to_string(a + 1) + "<-" + std::to_string(b + 1);
    return s;
}

IntermediateSpec intermediate_from_pairs(const StationaryPair& p, const std::vector<IndexPair>& pairs)
{
    const int n = p.vertices();
    IntermediateSpec s{diagonal_relation(n)};
    for (auto [a, b] : pairs) {
        if (a < 0 || b < 0 || a >= n || b >= n)
            throw std::out_of_range("intermediate: vertex out of range in (" + std::to_string(a + 1) + "," + std::to_string(b + 1) + ")");
        if (p.group_of(a) != p.group_of(b))
            throw std::invalid_argument("intermediate: vertices " + std::to_string(a + 1) + " and " + std::to_string(b + 1) +
                                        " lie in different groups");
        s.relation[static_cast<size_t>(a)][static_cast<size_t>(b)] = 1;
    }
    if (!transitive(s.relation)) throw std::invalid_argument("intermediate: relation is not transitive");
    return s;
}

std::vector<IntermediateSpec> enumerate_intermediates(const StationaryPair& p, int group)
{
    if (group < 0 || group >= p.groups()) throw std::out_of_range("intermediates: no group " + std::to_string(group + 1));
    const int m = p.partition[static_cast<size_t>(group)];
    if (m > 5) throw std::length_error("intermediates: group " + std::to_string(group + 1) + " has " + std::to_string(m) + " vertices (at most 5)");
    const int f = p.first(group);
    std::vector<IndexPair> slots;
    for (int a = 0; a < m; ++a)
        for (int b = 0; b < m; ++b)
            if (a != b) slots.push_back({a, b});
    std::vector<IntermediateSpec> out;
    const Relation diag = diagonal_relation(m);
    for (unsigned long mask = 0; mask < (1ul << slots.size()); ++mask) {
        Relation r = diag;
        for (size_t i = 0; i < slots.size(); ++i)
            if ((mask >> i) & 1ul) r[static_cast<size_t>(slots[i].first)][static_cast<size_t>(slots[i].second)] = 1;
        if (!transitive(r)) continue;
        IntermediateSpec s{diagonal_relation(p.vertices())};
        for (int a = 0; a < m; ++a)
            for (int b = 0; b < m; ++b) s.relation[static_cast<size_t>(f + a)][static_cast<size_t>(f + b)] = r[static_cast<size_t>(a)][static_cast<size_t>(b)];
        out.push_back(std::move(s));
    }
    return out;
}

std::vector<Relation> stage_relations(const StationaryPair& p, const IntermediateSpec& s, int depth)
{
    const int n = p.vertices();
    if (static_cast<int>(s.relation.size()) != n) throw ShapeError("intermediate: relation has the wrong size");
    const auto lists = unit_lists(p);
    std::vector<Relation> out{s.relation};
    for (int k = 1; k <= depth; ++k) {
        PairSet cur;
        for (int a = 0; a < n; ++a)
            for (int b = 0; b < n; ++b)
                if (a != b && out.back()[static_cast<size_t>(a)][static_cast<size_t>(b)]) cur.insert({a, b});
        Relation r = diagonal_relation(n);
        for (auto [a, b] : images(lists, cur)) r[static_cast<size_t>(a)][static_cast<size_t>(b)] = 1;
        close_transitively(r);
        out.push_back(std::move(r));
    }
    return out;
}

StageSystem generated_system(const StationaryPair& p, const IntermediateSpec& s, int depth)
{
    const int levels = std::max(1, depth);
    const auto rel = stage_relations(p, s, levels - 1);
    const BratteliDiagram d = small_diagram(p, levels);
    std::vector<BlockPreorder> stages;
    for (int k = 0; k < levels; ++k)
        stages.emplace_back(as_sizes(d.level_sizes[static_cast<size_t>(k)]), rel[static_cast<size_t>(k)], true);
    StageSystem sys = make_stage_system(stages, d.multiplicities, p.x);
    // relations are a deterministic function of the previous one: a repeat is a fixed point
    if (levels < 2 || rel[rel.size() - 1] != rel[rel.size() - 2]) sys.envelope.generator.reset();
    return sys;
}

std::vector<Relation> pullback_relations(const StationaryPair& p, const IntermediateSpec& s, int depth, int lookahead)
{
    const int n = p.vertices();
    const auto rel = stage_relations(p, s, depth + lookahead);
    const auto lists = unit_lists(p);
    std::vector<Relation> out;
    for (int k = 0; k <= depth; ++k) {
        Relation r = diagonal_relation(n);
        for (int a = 0; a < n; ++a)
            for (int b = 0; b < n; ++b) {
                if (a == b || p.group_of(a) != p.group_of(b)) continue;
                PairSet cur{{a, b}};
                for (int m = k; m <= k + lookahead; ++m) {
                    bool inside = true;
                    for (auto [u, v] : cur)
                        if (!rel[static_cast<size_t>(m)][static_cast<size_t>(u)][static_cast<size_t>(v)]) inside = false;
                    if (inside) {
                        r[static_cast<size_t>(a)][static_cast<size_t>(b)] = 1;
                        break;
                    }
                    cur = images(lists, cur);
                }
            }
        out.push_back(std::move(r));
    }
    return out;
}

std::vector<std::vector<int>> collapse_detect(const StationaryPair& p, const std::vector<IntermediateSpec>& specs, int depth)
{
    std::map<std::vector<Relation>, size_t> seen;
    std::vector<std::vector<int>> out;
    for (size_t i = 0; i < specs.size(); ++i) {
        auto key = pullback_relations(p, specs[i], depth, std::max(depth, 1));
        auto [it, fresh] = seen.emplace(std::move(key), out.size());
        if (fresh) out.emplace_back();
        out[it->second].push_back(static_cast<int>(i));
    }
    return out;
}

IntermediateOracle::IntermediateOracle(const StationaryPair& p, const IntermediateSpec& s, int depth)
    : sys_(generated_system(p, s, depth)), depth_(depth)
{
    attach_cuts(sys_);
}

LimitOrderVerdict IntermediateOracle::operator()(const LimitElement& a, const LimitElement& b) const
{
    return limit_order_holds(sys_, a, b, depth_);
}

LimitOrderVerdict intermediate_order_oracle(const StationaryPair& p, const IntermediateSpec& s, const LimitElement& a,
                                            const LimitElement& b, int depth)
{
    return IntermediateOracle(p, s, depth)(a, b);
}

}  // namespace limord
