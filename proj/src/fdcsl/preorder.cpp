#include "limord/fdcsl.hpp"

#include <algorithm>
#include <numeric>
#include <sstream>

namespace limord {

namespace {

std::string pair_str(int i, int j) { return "(" + std::to_string(i + 1) + "," + std::to_string(j + 1) + ")"; }

}  // namespace

ValidationReport validate(int n, const std::vector<IndexPair>& pairs)
{
    ValidationReport r;
    if (n < 0) {
        r.message = "negative size";
        return r;
    }
    // the diagonal is always present
    std::vector<std::vector<char>> rel(static_cast<size_t>(n), std::vector<char>(static_cast<size_t>(n), 0));
    for (int i = 0; i < n; ++i) rel[i][i] = 1;
    for (auto [i, j] : pairs) {
        if (i < 0 || j < 0 || i >= n || j >= n) {
            r.message = "pair " + pair_str(i, j) + " out of range 1.." + std::to_string(n);
            r.violation = {{i, j}, {i, j}};
            return r;
        }
        rel[i][j] = 1;
    }
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            if (!rel[i][j] || i == j) continue;
            for (int k = 0; k < n; ++k) {
                if (rel[j][k] && !rel[i][k]) {
                    r.message = "not transitive: " + pair_str(i, j) + " and " + pair_str(j, k) + " present, " +
                                pair_str(i, k) + " missing";
                    r.violation = {{i, j}, {j, k}};
                    return r;
                }
            }
        }
    std::vector<int> block(static_cast<size_t>(n), -1);
    for (int i = 0; i < n; ++i) {
        if (block[i] != -1) continue;
        block[i] = static_cast<int>(r.blocks.size());
        r.blocks.push_back({i});
        for (int j = i + 1; j < n; ++j)
            if (block[j] == -1 && rel[i][j] && rel[j][i]) {
                block[j] = block[i];
                r.blocks.back().push_back(j);
            }
    }
    r.ok = true;
    r.triangular = r.blocks.size() == static_cast<size_t>(n);
    r.nest = true;
    for (int i = 0; i < n && r.nest; ++i)
        for (int j = 0; j < n; ++j)
            if (!rel[i][j] && !rel[j][i]) {
                r.nest = false;
                break;
            }
    r.message = "ok";
    return r;
}

BlockPreorder::BlockPreorder(std::vector<BigInt> sizes, std::vector<std::vector<char>> reach, bool trusted)
    : sizes_(std::move(sizes)), reach_(std::move(reach))
{
    const size_t r = sizes_.size();
    if (reach_.size() != r) throw ShapeError("BlockPreorder: reach matrix does not match type count");
    for (const auto& row : reach_)
        if (row.size() != r) throw ShapeError("BlockPreorder: reach matrix not square");
    if (!trusted) {
        for (size_t x = 0; x < r; ++x) {
            if (sizes_[x] < 0) throw std::invalid_argument("BlockPreorder: negative size");
            if (!reach_[x][x]) throw std::invalid_argument("BlockPreorder: reach not reflexive");
            for (size_t y = 0; y < r; ++y) {
                if (!reach_[x][y]) continue;
                for (size_t z = 0; z < r; ++z)
                    if (reach_[y][z] && !reach_[x][z]) throw std::invalid_argument("BlockPreorder: reach not transitive");
            }
        }
    }
    class_of_.assign(r, -1);
    class_members_.clear();
    for (size_t x = 0; x < r; ++x) {
        if (class_of_[x] != -1) continue;
        class_of_[x] = static_cast<int>(class_members_.size());
        class_members_.push_back({static_cast<int>(x)});
        for (size_t y = x + 1; y < r; ++y)
            if (class_of_[y] == -1 && reach_[x][y] && reach_[y][x]) {
                class_of_[y] = class_of_[x];
                class_members_.back().push_back(static_cast<int>(y));
            }
    }
    const size_t c = class_members_.size();
    std::vector<int> parent(c);
    std::iota(parent.begin(), parent.end(), 0);
    auto find = [&](int x) {
        while (parent[static_cast<size_t>(x)] != x) x = parent[static_cast<size_t>(x)] = parent[static_cast<size_t>(parent[static_cast<size_t>(x)])];
        return x;
    };
    std::vector<int> reach_count(c, 0);
    for (size_t x = 0; x < c; ++x)
        for (size_t y = 0; y < c; ++y)
            if (class_reaches(static_cast<int>(x), static_cast<int>(y))) {
                ++reach_count[x];
                parent[static_cast<size_t>(find(static_cast<int>(x)))] = find(static_cast<int>(y));
            }
    components_.clear();
    component_of_.assign(c, -1);
    std::vector<int> root_comp(c, -1);
    for (size_t x = 0; x < c; ++x) {
        const int root = find(static_cast<int>(x));
        if (root_comp[static_cast<size_t>(root)] == -1) {
            root_comp[static_cast<size_t>(root)] = static_cast<int>(components_.size());
            components_.push_back({});
        }
        component_of_[x] = root_comp[static_cast<size_t>(root)];
        components_[static_cast<size_t>(component_of_[x])].push_back(static_cast<int>(x));
    }
    // upper classes reach strictly more
    for (auto& comp : components_)
        std::stable_sort(comp.begin(), comp.end(), [&](int x, int y) { return reach_count[static_cast<size_t>(x)] > reach_count[static_cast<size_t>(y)]; });
}

bool BlockPreorder::sum_of_nests() const
{
    for (const auto& comp : components_)
        for (size_t x = 0; x + 1 < comp.size(); ++x)
            if (!class_reaches(comp[x], comp[x + 1])) return false;
    return true;
}

PreorderAlgebra PreorderAlgebra::from_relation(int n, const std::vector<IndexPair>& pairs)
{
    ValidationReport v = validate(n, pairs);
    if (!v.ok) throw std::invalid_argument("invalid preorder: " + v.message);
    std::vector<std::vector<char>> rel(static_cast<size_t>(n), std::vector<char>(static_cast<size_t>(n), 0));
    for (int i = 0; i < n; ++i) rel[i][i] = 1;
    for (auto [i, j] : pairs) rel[i][j] = 1;
    PreorderAlgebra a;
    a.block_of_.assign(static_cast<size_t>(n), 0);
    for (size_t b = 0; b < v.blocks.size(); ++b)
        for (int i : v.blocks[b]) a.block_of_[static_cast<size_t>(i)] = static_cast<int>(b);
    const size_t r = v.blocks.size();
    std::vector<std::vector<char>> reach(r, std::vector<char>(r, 0));
    for (size_t x = 0; x < r; ++x)
        for (size_t y = 0; y < r; ++y) reach[x][y] = rel[v.blocks[x][0]][v.blocks[y][0]];
    a.finish(std::move(reach), true);
    return a;
}

PreorderAlgebra PreorderAlgebra::from_blocks(std::vector<int> block_of, std::vector<std::vector<char>> reach, bool trusted)
{
    const size_t r = reach.size();
    for (const auto& row : reach)
        if (row.size() != r) throw ShapeError("from_blocks: reach matrix not square");
    // relabel blocks by first appearance
    std::vector<int> relabel(r, -1);
    int next = 0;
    for (int& b : block_of) {
        if (b < 0 || static_cast<size_t>(b) >= r) throw std::invalid_argument("from_blocks: block id out of range");
        if (relabel[static_cast<size_t>(b)] == -1) relabel[static_cast<size_t>(b)] = next++;
        b = relabel[static_cast<size_t>(b)];
    }
    if (static_cast<size_t>(next) != r) throw std::invalid_argument("from_blocks: empty block");
    std::vector<std::vector<char>> rr(r, std::vector<char>(r, 0));
    for (size_t x = 0; x < r; ++x)
        for (size_t y = 0; y < r; ++y) rr[static_cast<size_t>(relabel[x])][static_cast<size_t>(relabel[y])] = reach[x][y];
    if (!trusted) {
        for (size_t x = 0; x < r; ++x) {
            if (!rr[x][x]) throw std::invalid_argument("from_blocks: reach not reflexive");
            for (size_t y = 0; y < r; ++y) {
                if (x != y && rr[x][y] && rr[y][x]) throw std::invalid_argument("from_blocks: blocks mutually reachable");
                if (!rr[x][y]) continue;
                for (size_t z = 0; z < r; ++z)
                    if (rr[y][z] && !rr[x][z]) throw std::invalid_argument("from_blocks: reach not transitive");
            }
        }
    }
    PreorderAlgebra a;
    a.block_of_ = std::move(block_of);
    a.finish(std::move(rr), true);
    return a;
}

void PreorderAlgebra::finish(std::vector<std::vector<char>> reach, bool trusted)
{
    const size_t r = reach.size();
    block_size_.assign(r, 0);
    members_.assign(r, {});
    for (size_t i = 0; i < block_of_.size(); ++i) {
        ++block_size_[static_cast<size_t>(block_of_[i])];
        members_[static_cast<size_t>(block_of_[i])].push_back(static_cast<int>(i));
    }
    std::vector<BigInt> sizes;
    for (int s : block_size_) sizes.emplace_back(s);
    blocks_ = BlockPreorder(std::move(sizes), std::move(reach), trusted);
}

PreorderAlgebra PreorderAlgebra::diagonal(int n)
{
    std::vector<int> b(static_cast<size_t>(n));
    std::iota(b.begin(), b.end(), 0);
    std::vector<std::vector<char>> reach(static_cast<size_t>(n), std::vector<char>(static_cast<size_t>(n), 0));
    for (int i = 0; i < n; ++i) reach[i][i] = 1;
    return from_blocks(b, reach, true);
}

PreorderAlgebra PreorderAlgebra::full(int n) { return nest({n}); }

PreorderAlgebra PreorderAlgebra::upper_triangular(int n) { return nest(std::vector<int>(static_cast<size_t>(n), 1)); }

PreorderAlgebra PreorderAlgebra::nest(const std::vector<int>& block_sizes)
{
    std::vector<int> b;
    for (size_t k = 0; k < block_sizes.size(); ++k) {
        if (block_sizes[k] <= 0) throw std::invalid_argument("nest: block sizes must be positive");
        for (int t = 0; t < block_sizes[k]; ++t) b.push_back(static_cast<int>(k));
    }
    const size_t r = block_sizes.size();
    std::vector<std::vector<char>> reach(r, std::vector<char>(r, 0));
    for (size_t x = 0; x < r; ++x)
        for (size_t y = x; y < r; ++y) reach[x][y] = 1;
    return from_blocks(b, reach, true);
}

PreorderAlgebra PreorderAlgebra::direct_sum(const PreorderAlgebra& a, const PreorderAlgebra& b)
{
    const int ra = a.num_blocks(), rb = b.num_blocks();
    std::vector<int> bo = a.block_of_;
    for (int x : b.block_of_) bo.push_back(x + ra);
    std::vector<std::vector<char>> reach(static_cast<size_t>(ra + rb), std::vector<char>(static_cast<size_t>(ra + rb), 0));
    for (int x = 0; x < ra; ++x)
        for (int y = 0; y < ra; ++y) reach[x][y] = a.block_reaches(x, y);
    for (int x = 0; x < rb; ++x)
        for (int y = 0; y < rb; ++y) reach[ra + x][ra + y] = b.block_reaches(x, y);
    return from_blocks(bo, reach, true);
}

PreorderAlgebra PreorderAlgebra::tensor(const PreorderAlgebra& a, const PreorderAlgebra& b)
{
    const int ra = a.num_blocks(), rb = b.num_blocks();
    std::vector<int> bo;
    for (int i = 0; i < a.size(); ++i)
        for (int j = 0; j < b.size(); ++j) bo.push_back(a.block_of(i) * rb + b.block_of(j));
    const size_t r = static_cast<size_t>(ra * rb);
    std::vector<std::vector<char>> reach(r, std::vector<char>(r, 0));
    for (int x = 0; x < ra; ++x)
        for (int y = 0; y < rb; ++y)
            for (int u = 0; u < ra; ++u)
                for (int v = 0; v < rb; ++v)
                    reach[static_cast<size_t>(x * rb + y)][static_cast<size_t>(u * rb + v)] = a.block_reaches(x, u) && b.block_reaches(y, v);
    // product blocks that never occur would be empty; all occur since every block is nonempty
    return from_blocks(bo, reach, true);
}

bool PreorderAlgebra::triangular() const
{
    for (int s : block_size_)
        if (s != 1) return false;
    return true;
}

bool PreorderAlgebra::total() const { return components().size() <= 1 && sum_of_nests(); }

bool PreorderAlgebra::sum_of_nests() const { return blocks_.sum_of_nests(); }

std::vector<IndexPair> PreorderAlgebra::pairs() const
{
    std::vector<IndexPair> out;
    for (int i = 0; i < size(); ++i)
        for (int j = 0; j < size(); ++j)
            if (related(i, j)) out.emplace_back(i, j);
    return out;
}

std::string PreorderAlgebra::describe() const
{
    std::ostringstream os;
    os << "preorder algebra on " << size() << " indices, " << num_blocks() << " blocks";
    if (triangular()) os << ", triangular";
    if (total()) os << ", nest";
    else if (sum_of_nests()) os << ", sum of nests";
    return os.str();
}

}  // namespace limord
