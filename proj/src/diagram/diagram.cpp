#include "limord/diagram.hpp"

#include <algorithm>

namespace limord {

namespace {

template <class A, class B>
bool same(const A& a, const B& b)
{
    return a.rows() == b.rows() && a.cols() == b.cols() && (a.array() == b.array()).all();
}

std::string at(int level, int v) { return "level " + std::to_string(level) + " vertex " + std::to_string(v + 1); }

}  // namespace

int BratteliDiagram::vertices(int level) const { return static_cast<int>(level_sizes.at(static_cast<size_t>(level)).size()); }

const IntMatrix& BratteliDiagram::step(int k) const
{
    if (k >= 0 && static_cast<size_t>(k) < multiplicities.size()) return multiplicities[static_cast<size_t>(k)];
    if (k >= 0 && generator) return *generator;
    throw std::out_of_range("diagram has no step " + std::to_string(k));
}

bool BratteliDiagram::operator==(const BratteliDiagram& o) const
{
    if (level_sizes.size() != o.level_sizes.size() || multiplicities.size() != o.multiplicities.size()) return false;
    if (generator.has_value() != o.generator.has_value()) return false;
    if (generator && !same(*generator, *o.generator)) return false;
    for (size_t k = 0; k < level_sizes.size(); ++k)
        if (!same(level_sizes[k], o.level_sizes[k])) return false;
    for (size_t k = 0; k < multiplicities.size(); ++k)
        if (!same(multiplicities[k], o.multiplicities[k])) return false;
    return true;
}

int OrderedBratteliDiagram::vertices(int level) const
{
    return level == 0 ? static_cast<int>(unit.size()) : static_cast<int>(orders.at(static_cast<size_t>(level - 1)).size());
}

IntMatrix OrderedBratteliDiagram::multiplicity(int k) const
{
    const int n = vertices(k);
    const auto& o = orders.at(static_cast<size_t>(k));
    IntMatrix m = IntMatrix::Zero(static_cast<Eigen::Index>(o.size()), n);
    for (size_t v = 0; v < o.size(); ++v)
        for (int u : o[v]) {
            if (u < 0 || u >= n) throw std::out_of_range("edge label " + std::to_string(u + 1) + " out of range at " + at(k + 1, static_cast<int>(v)));
            m(static_cast<Eigen::Index>(v), u) += 1;
        }
    return m;
}

BratteliDiagram OrderedBratteliDiagram::underlying() const
{
    DiagramCheck c = validate(*this);
    if (!c.ok) throw std::invalid_argument("invalid ordered diagram: " + c.violations.front());
    BratteliDiagram d;
    d.level_sizes.push_back(unit);
    for (size_t k = 0; k < orders.size(); ++k) {
        d.multiplicities.push_back(multiplicity(static_cast<int>(k)));
        d.level_sizes.push_back(d.multiplicities.back() * d.level_sizes.back());
    }
    return d;
}

OrderedBratteliDiagram OrderedBratteliDiagram::stationary(const IntVector& unit, const std::vector<std::vector<int>>& order, int depth)
{
    OrderedBratteliDiagram d;
    d.unit = unit;
    for (int k = 1; k < std::max(1, depth); ++k) d.orders.push_back(order);
    return d;
}

DiagramCheck validate(const BratteliDiagram& d)
{
    DiagramCheck c;
    auto bad = [&](std::string m) {
        c.ok = false;
        c.violations.push_back(std::move(m));
    };
    if (d.level_sizes.empty()) {
        bad("no levels");
        return c;
    }
    if (d.multiplicities.size() + 1 != d.level_sizes.size())
        bad(std::to_string(d.level_sizes.size()) + " levels but " + std::to_string(d.multiplicities.size()) + " connecting matrices");
    for (size_t k = 0; k < d.level_sizes.size(); ++k)
        for (Eigen::Index v = 0; v < d.level_sizes[k].size(); ++v)
            if (d.level_sizes[k](v) <= 0) bad(at(static_cast<int>(k), static_cast<int>(v)) + ": size must be positive");
    for (size_t k = 0; k < d.multiplicities.size() && k + 1 < d.level_sizes.size(); ++k) {
        const IntMatrix& m = d.multiplicities[k];
        if (m.cols() != d.level_sizes[k].size() || m.rows() != d.level_sizes[k + 1].size()) {
            bad("step " + std::to_string(k) + ": matrix is " + std::to_string(m.rows()) + "x" + std::to_string(m.cols()) +
                ", levels have " + std::to_string(d.level_sizes[k + 1].size()) + " and " + std::to_string(d.level_sizes[k].size()) +
                " vertices");
            continue;
        }
        for (Eigen::Index i = 0; i < m.rows(); ++i)
            for (Eigen::Index j = 0; j < m.cols(); ++j)
                if (m(i, j) < 0) bad("step " + std::to_string(k) + ": negative multiplicity at (" + std::to_string(i + 1) + "," + std::to_string(j + 1) + ")");
        const IntVector next = m * d.level_sizes[k];
        if (!same(next, d.level_sizes[k + 1]))
            bad("step " + std::to_string(k) + ": level sizes " + to_string(d.level_sizes[k + 1]) + " differ from multiplicities times sizes " + to_string(next));
    }
    if (d.generator) {
        const IntMatrix& g = *d.generator;
        if (g.rows() != g.cols()) bad("generator not square");
        for (const auto& m : d.multiplicities)
            if (!same(m, g)) {
                bad("stationary diagram with a step different from its generator");
                break;
            }
    }
    return c;
}

DiagramCheck validate(const OrderedBratteliDiagram& d)
{
    DiagramCheck c;
    auto bad = [&](std::string m) {
        c.ok = false;
        c.violations.push_back(std::move(m));
    };
    if (d.unit.size() == 0) bad("empty unit");
    for (Eigen::Index v = 0; v < d.unit.size(); ++v)
        if (d.unit(v) <= 0) bad(at(0, static_cast<int>(v)) + ": size must be positive");
    for (size_t k = 0; k < d.orders.size(); ++k) {
        const int n = d.vertices(static_cast<int>(k));
        if (d.orders[k].empty()) bad("level " + std::to_string(k + 1) + " has no vertices");
        std::vector<char> used(static_cast<size_t>(n), 0);
        for (size_t v = 0; v < d.orders[k].size(); ++v) {
            if (d.orders[k][v].empty()) bad(at(static_cast<int>(k) + 1, static_cast<int>(v)) + ": missing edge ordering");
            for (int u : d.orders[k][v]) {
                if (u < 0 || u >= n)
                    bad(at(static_cast<int>(k) + 1, static_cast<int>(v)) + ": source label " + std::to_string(u + 1) + " out of range 1.." + std::to_string(n));
                else
                    used[static_cast<size_t>(u)] = 1;
            }
        }
        for (int u = 0; u < n; ++u)
            if (!used[static_cast<size_t>(u)]) bad(at(static_cast<int>(k), u) + ": no outgoing edge (embedding not injective)");
    }
    return c;
}

BratteliDiagram stationary(const IntMatrix& x, const IntVector& unit, int depth)
{
    if (x.rows() != x.cols()) throw ShapeError("stationary: generator not square");
    if (unit.size() != x.cols()) throw ShapeError("stationary: unit has " + std::to_string(unit.size()) + " entries, generator is " + std::to_string(x.rows()) + "x" + std::to_string(x.cols()));
    for (Eigen::Index i = 0; i < x.rows(); ++i)
        for (Eigen::Index j = 0; j < x.cols(); ++j)
            if (x(i, j) < 0) throw std::invalid_argument("stationary: negative generator entry");
    BratteliDiagram d;
    d.generator = x;
    d.level_sizes.push_back(unit);
    for (int k = 1; k < std::max(1, depth); ++k) {
        d.multiplicities.push_back(x);
        d.level_sizes.push_back(x * d.level_sizes.back());
    }
    return d;
}

namespace {

void check_selection(const std::vector<int>& sel, int levels)
{
    if (sel.empty() || sel.front() != 0) throw std::invalid_argument("telescope: selection must start at level 0");
    for (size_t i = 0; i < sel.size(); ++i) {
        if (sel[i] >= levels) throw std::invalid_argument("telescope: level " + std::to_string(sel[i]) + " beyond depth");
        if (i > 0 && sel[i] <= sel[i - 1]) throw std::invalid_argument("telescope: selection not increasing");
    }
}

}  // namespace

BratteliDiagram telescope(const BratteliDiagram& d, const std::vector<int>& sel)
{
    check_selection(sel, d.levels());
    BratteliDiagram out;
    for (size_t i = 0; i < sel.size(); ++i) {
        out.level_sizes.push_back(d.level_sizes[static_cast<size_t>(sel[i])]);
        if (i == 0) continue;
        IntMatrix m = identity(d.vertices(sel[i - 1]));
        for (int k = sel[i - 1]; k < sel[i]; ++k) m = IntMatrix(d.step(k) * m);
        out.multiplicities.push_back(std::move(m));
    }
    // evenly spaced selections of a stationary diagram stay stationary
    if (d.generator) {
        const int gap = sel.size() > 1 ? sel[1] - sel[0] : 1;
        bool even = true;
        for (size_t i = 1; i < sel.size(); ++i) even = even && sel[i] - sel[i - 1] == gap;
        if (even) out.generator = mat_pow(*d.generator, static_cast<unsigned long>(gap));
    }
    return out;
}

OrderedBratteliDiagram telescope(const OrderedBratteliDiagram& d, const std::vector<int>& sel)
{
    check_selection(sel, d.levels());
    OrderedBratteliDiagram out;
    out.unit = d.unit;
    for (size_t i = 1; i < sel.size(); ++i) {
        // labels at level sel[i] in terms of level sel[i-1], substituting each
        // label with that vertex's own ordering
        std::vector<std::vector<int>> cur = d.orders[static_cast<size_t>(sel[i] - 1)];
        for (int k = sel[i] - 1; k > sel[i - 1]; --k) {
            const auto& below = d.orders[static_cast<size_t>(k - 1)];
            for (auto& seq : cur) {
                std::vector<int> next;
                for (int u : seq) next.insert(next.end(), below[static_cast<size_t>(u)].begin(), below[static_cast<size_t>(u)].end());
                seq = std::move(next);
            }
        }
        out.orders.push_back(std::move(cur));
    }
    return out;
}

namespace {

PreorderAlgebra sum_of_triangular(const std::vector<int>& sizes, std::vector<int>& offsets)
{
    int n = 0;
    offsets.clear();
    for (int s : sizes) {
        offsets.push_back(n);
        n += s;
    }
    std::vector<int> block(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i) block[static_cast<size_t>(i)] = i;
    std::vector<std::vector<char>> reach(static_cast<size_t>(n), std::vector<char>(static_cast<size_t>(n), 0));
    for (size_t v = 0; v < sizes.size(); ++v)
        for (int i = 0; i < sizes[v]; ++i)
            for (int j = i; j < sizes[v]; ++j) reach[static_cast<size_t>(offsets[v] + i)][static_cast<size_t>(offsets[v] + j)] = 1;
    return PreorderAlgebra::from_blocks(std::move(block), std::move(reach), true);
}

std::vector<int> to_ints(const IntVector& v)
{
    std::vector<int> out;
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        if (v(i) > 1000000) throw std::length_error("nest realization: summand of size " + v(i).str() + " too large");
        out.push_back(v(i).convert_to<int>());
    }
    return out;
}

}  // namespace

NestSystem realize_nest_system(const OrderedBratteliDiagram& d)
{
    const BratteliDiagram u = d.underlying();
    NestSystem s;
    for (int k = 0; k < u.levels(); ++k) {
        s.vertex_sizes.push_back(to_ints(u.level_sizes[static_cast<size_t>(k)]));
        std::vector<int> off;
        s.stages.push_back(sum_of_triangular(s.vertex_sizes.back(), off));
        s.offsets.push_back(std::move(off));
    }
    for (int k = 0; k + 1 < u.levels(); ++k) {
        MatrixUnitEmbedding e;
        e.source = s.stages[static_cast<size_t>(k)];
        e.target = s.stages[static_cast<size_t>(k + 1)];
        e.image.assign(static_cast<size_t>(e.source.size()), {});
        const auto& src_size = s.vertex_sizes[static_cast<size_t>(k)];
        const auto& src_off = s.offsets[static_cast<size_t>(k)];
        const auto& ord = d.orders[static_cast<size_t>(k)];
        for (size_t w = 0; w < ord.size(); ++w) {
            int seg = s.offsets[static_cast<size_t>(k + 1)][w];
            for (int src : ord[w]) {
                for (int i = 0; i < src_size[static_cast<size_t>(src)]; ++i)
                    e.image[static_cast<size_t>(src_off[static_cast<size_t>(src)] + i)].push_back(seg + i);
                seg += src_size[static_cast<size_t>(src)];
            }
        }
        s.embeddings.push_back(std::move(e));
    }
    return s;
}

MatrixUnitEmbedding twisted_refinement_stage(int n)
{
    if (n < 1 || n > 20) throw std::invalid_argument("twisted_refinement_stage: n out of range");
    const int m = 1 << n;
    MatrixUnitEmbedding e = refinement_embedding(m, 2);
    std::reverse(e.image[static_cast<size_t>(m - 1)].begin(), e.image[static_cast<size_t>(m - 1)].end());
    return e;
}

namespace {

// components as summands: (component, type) indicator
IntMatrix component_map(const BlockPreorder& b)
{
    IntMatrix m = IntMatrix::Zero(static_cast<Eigen::Index>(b.components().size()), b.types());
    for (int t = 0; t < b.types(); ++t) m(b.component_of_class(b.class_of(t)), t) = 1;
    return m;
}

IntVector sizes_vector(const BlockPreorder& b)
{
    IntVector v(b.types());
    for (int t = 0; t < b.types(); ++t) v(t) = b.size(t);
    return v;
}

}  // namespace

StageSystem make_stage_system(const std::vector<BlockPreorder>& stages, const std::vector<IntMatrix>& push,
                              std::optional<IntMatrix> generator)
{
    if (stages.empty()) throw std::invalid_argument("stage system without stages");
    if (push.size() + 1 != stages.size()) throw ShapeError("stage system: need one connecting matrix per step");
    StageSystem s;
    s.stages = stages;
    for (const auto& b : stages) {
        s.k0.level_sizes.push_back(sizes_vector(b));
        s.envelope_map.push_back(component_map(b));
        s.envelope.level_sizes.push_back(s.envelope_map.back() * s.k0.level_sizes.back());
    }
    s.k0.multiplicities = push;
    s.k0.generator = std::move(generator);
    DiagramCheck c = validate(s.k0);
    if (!c.ok) throw std::invalid_argument("stage system: " + c.violations.front());
    for (size_t k = 0; k < push.size(); ++k) {
        // summand-level multiplicity read off one type per component, checked on all
        const IntMatrix& e0 = s.envelope_map[k];
        const IntMatrix img = s.envelope_map[k + 1] * push[k];
        IntMatrix env = IntMatrix::Zero(img.rows(), e0.rows());
        for (Eigen::Index t = 0; t < e0.cols(); ++t) {
            Eigen::Index c0 = 0;
            while (e0(c0, t) == 0) ++c0;
            env.col(c0) = img.col(t);
        }
        if (!same(IntMatrix(env * e0), img))
            throw std::invalid_argument("stage system: step " + std::to_string(k) + " does not induce a map of enveloping summands");
        s.envelope.multiplicities.push_back(std::move(env));
    }
    // later steps repeat the last one
    if (s.k0.generator && !s.envelope.multiplicities.empty()) s.envelope.generator = s.envelope.multiplicities.back();
    return s;
}

StageSystem self_adjoint_system(const BratteliDiagram& d)
{
    std::vector<BlockPreorder> stages;
    for (const auto& sz : d.level_sizes) {
        const size_t n = static_cast<size_t>(sz.size());
        std::vector<std::vector<char>> reach(n, std::vector<char>(n, 0));
        for (size_t i = 0; i < n; ++i) reach[i][i] = 1;
        stages.emplace_back(std::vector<BigInt>(sz.data(), sz.data() + sz.size()), reach, true);
    }
    return make_stage_system(stages, d.multiplicities, d.generator);
}

StageSystem nest_stage_system(const OrderedBratteliDiagram& d)
{
    NestSystem ns = realize_nest_system(d);
    std::vector<BlockPreorder> stages;
    for (const auto& a : ns.stages) stages.push_back(a.blocks());
    std::vector<IntMatrix> push;
    for (const auto& e : ns.embeddings) {
        IntMatrix m = IntMatrix::Zero(e.target.size(), e.source.size());
        for (size_t i = 0; i < e.image.size(); ++i)
            for (int t : e.image[i]) m(t, static_cast<Eigen::Index>(i)) += 1;
        push.push_back(std::move(m));
    }
    StageSystem s = make_stage_system(stages, push);
    if (!s.envelope.multiplicities.empty()) s.envelope.generator = s.envelope.multiplicities.back();
    s.nest = std::move(ns);
    return s;
}

}  // namespace limord
