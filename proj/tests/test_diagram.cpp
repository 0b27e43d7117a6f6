#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "limord/diagram.hpp"

#include <algorithm>
#include <random>
#include <set>

using namespace limord;

namespace {

bool same_matrix(const IntMatrix& a, const IntMatrix& b)
{
    return a.rows() == b.rows() && a.cols() == b.cols() && (a.array() == b.array()).all();
}

const IntMatrix fib = int_matrix({{1, 1}, {1, 0}});

// x -> y, y -> x + y; and y -> y + x
OrderedBratteliDiagram theta(int depth) { return OrderedBratteliDiagram::stationary(int_vector({1, 1}), {{1}, {0, 1}}, depth); }
OrderedBratteliDiagram psi(int depth) { return OrderedBratteliDiagram::stationary(int_vector({1, 1}), {{1}, {1, 0}}, depth); }

std::set<int> as_set(const std::vector<int>& v) { return {v.begin(), v.end()}; }
std::set<IndexPair> as_set(const std::vector<IndexPair>& v) { return {v.begin(), v.end()}; }

OrderedBratteliDiagram random_ordered(std::mt19937& rng, int depth)
{
    auto pick = [&](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };
    OrderedBratteliDiagram d;
    const int n0 = pick(1, 3);
    d.unit = IntVector(n0);
    for (int v = 0; v < n0; ++v) d.unit(v) = pick(1, 2);
    int prev = n0;
    for (int k = 1; k < depth; ++k) {
        const int n = pick(1, 3);
        std::vector<std::vector<int>> ord(static_cast<size_t>(n));
        for (int u = 0; u < prev; ++u) ord[static_cast<size_t>(pick(0, n - 1))].push_back(u);
        for (auto& seq : ord) {
            if (seq.empty() || pick(0, 1)) seq.push_back(pick(0, prev - 1));
            std::shuffle(seq.begin(), seq.end(), rng);
        }
        d.orders.push_back(ord);
        prev = n;
    }
    return d;
}

}  // namespace

TEST_CASE("validation")
{
    CHECK(validate(stationary(fib, int_vector({1, 1}), 5)).ok);
    CHECK(validate(theta(6)).ok);

    BratteliDiagram bad = stationary(fib, int_vector({1, 1}), 3);
    bad.multiplicities[1] = int_matrix({{1, 1, 0}, {1, 0, 0}});
    DiagramCheck c = validate(bad);
    CHECK_FALSE(c.ok);
    CHECK(c.violations.size() >= 1);

    OrderedBratteliDiagram missing = theta(3);
    missing.orders[1][0].clear();
    c = validate(missing);
    CHECK_FALSE(c.ok);
    CHECK(c.violations.front().find("level 2 vertex 1") != std::string::npos);
    CHECK_THROWS(missing.underlying());

    OrderedBratteliDiagram dropped = theta(3);
    dropped.orders[0] = {{1}, {1}};
    CHECK_FALSE(validate(dropped).ok);
}

TEST_CASE("stationary diagrams")
{
    BratteliDiagram d = stationary(int_matrix({{3, 1}, {1, 3}}), int_vector({1, 1}), 3);
    REQUIRE(d.levels() == 3);
    CHECK(same_matrix(d.level_sizes[1], int_vector({4, 4})));
    CHECK(same_matrix(d.level_sizes[2], int_vector({16, 16})));

    d = stationary(int_matrix({{2}}), int_vector({1}), 3);
    CHECK(d.level_sizes[0](0) == 1);
    CHECK(d.level_sizes[1](0) == 2);
    CHECK(d.level_sizes[2](0) == 4);

    CHECK(stationary(fib, int_vector({1, 1}), 0).levels() == 1);
    CHECK(same_matrix(d.step(40), int_matrix({{2}})));
    CHECK_THROWS_AS(stationary(fib, int_vector({1, 1, 1}), 3), ShapeError);

    // sizes_{k+1} = M_k sizes_k, recomputed by hand
    d = stationary(fib, int_vector({1, 1}), 8);
    long a = 1, b = 1;
    for (int k = 0; k < 8; ++k) {
        CHECK(d.level_sizes[static_cast<size_t>(k)](0) == a);
        CHECK(d.level_sizes[static_cast<size_t>(k)](1) == b);
        const long na = a + b;
        b = a;
        a = na;
    }
}

TEST_CASE("telescoping")
{
    const IntMatrix x = int_matrix({{3, 1}, {1, 3}});
    BratteliDiagram d = stationary(x, int_vector({1, 1}), 4);
    BratteliDiagram t = telescope(d, {0, 2});
    REQUIRE(t.multiplicities.size() == 1);
    CHECK(same_matrix(t.multiplicities[0], int_matrix({{10, 6}, {6, 10}})));
    CHECK(validate(t).ok);

    t = telescope(stationary(fib, int_vector({1, 1}), 4), {0, 2});
    CHECK(same_matrix(t.multiplicities[0], int_matrix({{2, 1}, {1, 1}})));
    REQUIRE(t.generator);
    CHECK(same_matrix(*t.generator, int_matrix({{2, 1}, {1, 1}})));

    CHECK(telescope(d, {0, 1, 2, 3}) == d);
    CHECK_FALSE(telescope(d, {0, 1, 3}).generator.has_value());
    CHECK_THROWS(telescope(d, {1, 2}));
    CHECK_THROWS(telescope(d, {0, 2, 2}));
    CHECK_THROWS(telescope(d, {0, 4}));

    OrderedBratteliDiagram th = theta(5);
    CHECK(telescope(th, {0, 1, 2, 3, 4}) == th);
    // two steps of x -> y, y -> xy: x -> xy, y -> y xy
    OrderedBratteliDiagram t2 = telescope(th, {0, 2});
    REQUIRE(t2.orders.size() == 1);
    CHECK(t2.orders[0] == std::vector<std::vector<int>>{{0, 1}, {1, 0, 1}});
    CHECK(same_matrix(t2.multiplicity(0), int_matrix({{1, 1}, {1, 2}})));
}

TEST_CASE("nest realization of the Fibonacci ordered diagrams")
{
    for (auto d : {theta(7), psi(7)}) {
        NestSystem s = realize_nest_system(d);
        REQUIRE(s.stages.size() == 7);
        long a = 1, b = 1;
        for (size_t k = 0; k < s.stages.size(); ++k) {
            CHECK(s.vertex_sizes[k] == std::vector<int>{static_cast<int>(a), static_cast<int>(b)});
            CHECK(s.stages[k].size() == a + b);
            CHECK(s.stages[k].triangular());
            CHECK(s.stages[k].components().size() == 2);
            const long nb = a + b;
            a = b;
            b = nb;
        }
        for (const auto& e : s.embeddings) {
            CHECK(check_well_formed(e).ok);
            CHECK(check_star_extendible(e).ok);
            CHECK(check_strongly_regular(e).ok);
        }
    }
    // theta at step 0: x -> second summand first slot, y -> first summand and second summand second slot
    NestSystem s = realize_nest_system(theta(2));
    CHECK(s.embeddings[0].image == std::vector<std::vector<int>>{{1}, {0, 2}});
    s = realize_nest_system(psi(2));
    CHECK(s.embeddings[0].image == std::vector<std::vector<int>>{{2}, {0, 1}});
}

TEST_CASE("ordered refinement diagram gives the refinement chain")
{
    NestSystem s = realize_nest_system(OrderedBratteliDiagram::stationary(int_vector({1}), {{0, 0}}, 5));
    for (int k = 0; k < 4; ++k) {
        CHECK(s.stages[static_cast<size_t>(k)] == PreorderAlgebra::upper_triangular(1 << k));
        // refinement sends i to {2i, 2i+1}; the ordered realization lays the
        // copies side by side, which is the standard embedding
        const MatrixUnitEmbedding e = s.embeddings[static_cast<size_t>(k)];
        const MatrixUnitEmbedding st = standard_embedding(1 << k, 2);
        CHECK(e.image == st.image);
        CHECK(check_strongly_regular(e).ok);
    }
}

TEST_CASE("twisted refinement")
{
    MatrixUnitEmbedding t = twisted_refinement_stage(1);
    CHECK(t.image == std::vector<std::vector<int>>{{0, 1}, {3, 2}});
    CHECK(as_set(t.pairing(0, 1)) == std::set<IndexPair>{{1, 2}, {0, 3}});
    for (int n = 1; n <= 4; ++n) {
        t = twisted_refinement_stage(n);
        const MatrixUnitEmbedding r = refinement_embedding(1 << n, 2);
        for (size_t i = 0; i < r.image.size(); ++i) CHECK(as_set(t.image[i]) == as_set(r.image[i]));
        // only the last column moves
        const int last = (1 << n) - 1;
        for (int i = 0; i < last; ++i)
            for (int j = i; j < last; ++j) CHECK(t.pairing(i, j) == r.pairing(i, j));
        // formula: e_{i,last} -> e_{2i+1, 2 last} + e_{2i, 2 last + 1}
        for (int i = 0; i < last; ++i)
            CHECK(as_set(t.pairing(i, last)) == std::set<IndexPair>{{2 * i + 1, 2 * last}, {2 * i, 2 * last + 1}});
        CHECK(check_star_extendible(t).ok);
        EmbeddingCheck c = check_strongly_regular(t);
        CHECK_FALSE(c.ok);
        CHECK(c.witness.has_value());
    }
}

TEST_CASE("telescope then realize equals realize then compose")
{
    std::mt19937 rng(20261016);
    int checked = 0;
    for (int trial = 0; trial < 60; ++trial) {
        const int depth = 2 + trial % 4;
        const OrderedBratteliDiagram d = random_ordered(rng, depth);
        REQUIRE(validate(d).ok);
        std::vector<int> sel{0};
        for (int k = 1; k < depth; ++k)
            if (k == depth - 1 || rng() % 2) sel.push_back(k);
        const NestSystem full = realize_nest_system(d);
        for (const auto& e : full.embeddings) {
            REQUIRE(check_star_extendible(e).ok);
            REQUIRE(check_strongly_regular(e).ok);
        }
        const NestSystem tel = realize_nest_system(telescope(d, sel));
        REQUIRE(tel.stages.size() == sel.size());
        for (size_t i = 0; i < sel.size(); ++i) CHECK(tel.stages[i] == full.stages[static_cast<size_t>(sel[i])]);
        for (size_t i = 1; i < sel.size(); ++i) {
            MatrixUnitEmbedding c = full.embeddings[static_cast<size_t>(sel[i - 1])];
            for (int k = sel[i - 1] + 1; k < sel[i]; ++k) c = compose(c, full.embeddings[static_cast<size_t>(k)]);
            const MatrixUnitEmbedding& t = tel.embeddings[i - 1];
            REQUIRE(c.image.size() == t.image.size());
            for (size_t a = 0; a < c.image.size(); ++a) CHECK(as_set(c.image[a]) == as_set(t.image[a]));
            for (auto [a, b] : c.source.pairs()) CHECK(as_set(c.pairing(a, b)) == as_set(t.pairing(a, b)));
            ++checked;
        }
    }
    CHECK(checked > 60);
}

TEST_CASE("stage systems")
{
    const OrderedBratteliDiagram d = theta(6);
    StageSystem s = nest_stage_system(d);
    CHECK(s.depth() == 6);
    // the envelope continues with the last step
    BratteliDiagram u = d.underlying();
    u.generator = u.multiplicities.back();
    CHECK(s.envelope == u);
    CHECK(validate(s.k0).ok);
    CHECK(s.nest.has_value());

    StageSystem f = self_adjoint_system(stationary(fib, int_vector({1, 1}), 5));
    CHECK(f.envelope.levels() == 5);
    CHECK(same_matrix(f.envelope.multiplicities[2], fib));

    // T(1,1) -> T(4,4) with block multiplicity [[3,1],[1,3]]
    std::vector<std::vector<char>> t2{{1, 1}, {0, 1}};
    std::vector<BlockPreorder> stages{BlockPreorder({1, 1}, t2), BlockPreorder({4, 4}, t2)};
    StageSystem g = make_stage_system(stages, {int_matrix({{3, 1}, {1, 3}})});
    CHECK(same_matrix(g.envelope.multiplicities[0], int_matrix({{4}})));
    CHECK(same_matrix(g.envelope.level_sizes[1], int_vector({8})));

    // a step that splits an enveloping summand is rejected
    std::vector<std::vector<char>> diag{{1, 0}, {0, 1}};
    std::vector<BlockPreorder> bad{BlockPreorder({1, 1}, t2), BlockPreorder({1, 1}, diag)};
    CHECK_THROWS(make_stage_system(bad, {identity(2)}));
}
