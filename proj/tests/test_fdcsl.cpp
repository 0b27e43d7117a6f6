#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "limord/fdcsl.hpp"

#include <algorithm>
#include <functional>

using namespace limord;

namespace {

ScaleVector sv(std::initializer_list<long> xs) { return int_vector(xs); }

// every reflexive transitive relation on n points, by filtering all relations
std::vector<std::vector<IndexPair>> brute_preorders(int n)
{
    std::vector<IndexPair> off;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            if (i != j) off.emplace_back(i, j);
    std::vector<std::vector<IndexPair>> out;
    for (unsigned long mask = 0; mask < (1UL << off.size()); ++mask) {
        std::vector<std::vector<char>> r(n, std::vector<char>(n, 0));
        for (int i = 0; i < n; ++i) r[i][i] = 1;
        std::vector<IndexPair> pairs;
        for (size_t k = 0; k < off.size(); ++k)
            if (mask >> k & 1) {
                r[off[k].first][off[k].second] = 1;
                pairs.push_back(off[k]);
            }
        bool ok = true;
        for (int i = 0; i < n && ok; ++i)
            for (int j = 0; j < n && ok; ++j)
                for (int k = 0; k < n && ok; ++k)
                    if (r[i][j] && r[j][k] && !r[i][k]) ok = false;
        if (ok) out.push_back(pairs);
    }
    return out;
}

// unit-level perfect matching by trying every bijection
bool brute_order(const PreorderAlgebra& a, const ScaleVector& p, const ScaleVector& q)
{
    std::vector<int> pu, qu;
    for (int b = 0; b < a.num_blocks(); ++b) {
        for (long t = 0; t < p(b); ++t) pu.push_back(b);
        for (long t = 0; t < q(b); ++t) qu.push_back(b);
    }
    if (pu.size() != qu.size()) return false;
    std::vector<int> perm(pu.size());
    for (size_t i = 0; i < perm.size(); ++i) perm[i] = static_cast<int>(i);
    do {
        bool ok = true;
        for (size_t k = 0; k < perm.size() && ok; ++k) ok = a.block_reaches(pu[static_cast<size_t>(perm[k])], qu[k]);
        if (ok) return true;
    } while (std::next_permutation(perm.begin(), perm.end()));
    return false;
}

void compositions(int n, std::vector<int>& cur, const std::function<void(const std::vector<int>&)>& f)
{
    if (n == 0) {
        if (!cur.empty()) f(cur);
        return;
    }
    for (int k = 1; k <= n; ++k) {
        cur.push_back(k);
        compositions(n - k, cur, f);
        cur.pop_back();
    }
}

PreorderAlgebra remark33_target()
{
    // the 8x8 pattern: upper entries present in each row
    std::vector<IndexPair> r;
    const std::vector<std::vector<int>> rows = {{3, 5, 7, 8}, {4, 6, 7, 8}, {7}, {8}, {8}, {7}, {}, {}};
    for (int i = 0; i < 8; ++i)
        for (int j : rows[static_cast<size_t>(i)]) r.emplace_back(i, j - 1);
    return PreorderAlgebra::from_relation(8, r);
}

}  // namespace

TEST_CASE("validate")
{
    std::vector<IndexPair> fullrel;
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) fullrel.emplace_back(i, j);
    auto f = validate(4, fullrel);
    CHECK(f.ok);
    CHECK(f.blocks.size() == 1);
    CHECK(f.blocks[0].size() == 4);

    auto t3 = validate(3, {{0, 1}, {0, 2}, {1, 2}});
    CHECK(t3.ok);
    CHECK(t3.triangular);
    CHECK(t3.nest);

    auto bad = validate(3, {{0, 1}, {1, 2}});
    CHECK_FALSE(bad.ok);
    REQUIRE(bad.violation);
    CHECK(bad.violation->first == IndexPair{0, 1});
    CHECK(bad.violation->second == IndexPair{1, 2});
    CHECK_THROWS(PreorderAlgebra::from_relation(3, {{0, 1}, {1, 2}}));

    CHECK(brute_preorders(1).size() == 1);
    CHECK(brute_preorders(2).size() == 4);
    CHECK(brute_preorders(3).size() == 29);
}

TEST_CASE("scale enumeration")
{
    CHECK(scale_enumerate(PreorderAlgebra::nest({1, 1})).size() == 4);
    auto t21 = scale_enumerate(PreorderAlgebra::nest({2, 1}));
    CHECK(t21.size() == 6);
    CHECK(scale_enumerate(PreorderAlgebra::full(2)).size() == 3);
    CHECK_THROWS_AS(scale_enumerate(PreorderAlgebra::upper_triangular(21)), ScaleError);
}

TEST_CASE("order oracle examples")
{
    auto t11 = PreorderAlgebra::nest({1, 1});
    auto r = order_holds(t11, sv({1, 0}), sv({0, 1}));
    CHECK(r.holds);
    CHECK(validate_certificate(t11, sv({1, 0}), sv({0, 1}), r.certificate));
    REQUIRE(r.certificate.flow.size() == 1);
    CHECK(r.certificate.flow[0] == FlowEntry{0, 1, 1});
    CHECK(expand_matching(t11, r.certificate) == std::vector<IndexPair>{{0, 1}});
    CHECK_FALSE(order_holds(t11, sv({0, 1}), sv({1, 0})).holds);
    CHECK_FALSE(order_holds(t11, sv({0, 1}), sv({1, 0}), OrderMethod::max_flow).holds);
    CHECK_THROWS_AS(order_holds(t11, sv({2, 0}), sv({1, 1})), ScaleError);

    // a tampered certificate is rejected
    OrderCertificate tampered{{{1, 0, 1}}};
    CHECK_FALSE(validate_certificate(t11, sv({0, 1}), sv({1, 0}), tampered));
}

TEST_CASE("order oracle agrees with unit-level matching on all preorders up to 4 points")
{
    for (int n = 1; n <= 4; ++n)
        for (const auto& rel : brute_preorders(n)) {
            auto a = PreorderAlgebra::from_relation(n, rel);
            auto sc = scale_enumerate(a);
            for (const auto& p : sc)
                for (const auto& q : sc) {
                    const bool want = brute_order(a, p, q);
                    auto r1 = order_holds(a, p, q);
                    auto r2 = order_holds(a, p, q, OrderMethod::max_flow);
                    CHECK(r1.holds == want);
                    CHECK(r2.holds == want);
                    if (r1.holds) CHECK(validate_certificate(a, p, q, r1.certificate));
                    if (r2.holds) CHECK(validate_certificate(a, p, q, r2.certificate));
                }
        }
}

TEST_CASE("order is reflexive, transitive, antisymmetric up to block counts (all preorders, n <= 5)")
{
    long algebras = 0, failures = 0;
    for (int n = 1; n <= 5; ++n)
        for (const auto& rel : brute_preorders(n)) {
            auto a = PreorderAlgebra::from_relation(n, rel);
            auto sc = scale_enumerate(a);
            const size_t m = sc.size();
            std::vector<std::vector<char>> s(m, std::vector<char>(m, 0));
            for (size_t x = 0; x < m; ++x)
                for (size_t y = 0; y < m; ++y) s[x][y] = order_holds(a, sc[x], sc[y]).holds;
            for (size_t x = 0; x < m; ++x) {
                if (!s[x][x]) ++failures;
                for (size_t y = 0; y < m; ++y) {
                    if (!s[x][y]) continue;
                    if (s[y][x] && x != y) ++failures;  // per-block counts are the coordinates
                    for (size_t z = 0; z < m; ++z)
                        if (s[y][z] && !s[x][z]) ++failures;
                }
            }
            ++algebras;
        }
    CHECK(algebras == 1 + 4 + 29 + 355 + 6942);
    CHECK(failures == 0);
}

TEST_CASE("nest order formula")
{
    CHECK(nest_order_formula({1, 1}, sv({1, 1}), sv({0, 2})));
    CHECK(nest_order_formula({1, 1}, sv({1, 1}), sv({1, 1})));
    CHECK_FALSE(nest_order_formula({1, 1}, sv({0, 2}), sv({1, 1})));
    CHECK_THROWS_AS(nest_order_formula({1, 1}, sv({0, 2, 0}), sv({1, 1})), ShapeError);
    // equivalence with the flow oracle on compositions of size <= 5 (acceptance covers 7)
    for (int n = 1; n <= 5; ++n) {
        std::vector<int> cur;
        compositions(n, cur, [](const std::vector<int>& sizes) {
            auto a = PreorderAlgebra::nest(sizes);
            auto sc = scale_enumerate(a);
            for (const auto& p : sc)
                for (const auto& q : sc) CHECK(nest_order_formula(sizes, p, q) == order_holds(a, p, q, OrderMethod::max_flow).holds);
        });
    }
}

TEST_CASE("strong order")
{
    auto t3 = PreorderAlgebra::upper_triangular(3);
    auto r = strong_order_holds(t3, sv({1, 0, 0}), sv({0, 0, 1}));
    CHECK(r.holds);
    CHECK(r.certificate.flow == std::vector<FlowEntry>{{0, 2, 1}});
    CHECK(strong_order_holds(t3, sv({1, 1, 0}), sv({1, 1, 0})).holds);
    CHECK_FALSE(strong_order_holds(PreorderAlgebra::nest({1, 1}), sv({0, 1}), sv({1, 0})).holds);
    auto vee = PreorderAlgebra::from_relation(3, {{0, 2}, {1, 2}});
    CHECK_THROWS_AS(strong_order_holds(vee, sv({0, 0, 0}), sv({0, 0, 0})), StrongOrderError);
    // sums of two nests
    for (int n1 = 1; n1 <= 3; ++n1)
        for (int n2 = 1; n2 <= 3; ++n2) {
            std::vector<int> c1, c2;
            compositions(n1, c1, [&](const std::vector<int>& s1) {
                compositions(n2, c2, [&](const std::vector<int>& s2) {
                    auto a = PreorderAlgebra::direct_sum(PreorderAlgebra::nest(s1), PreorderAlgebra::nest(s2));
                    auto sc = scale_enumerate(a);
                    for (const auto& p : sc)
                        for (const auto& q : sc) {
                            auto s = strong_order_holds(a, p, q);
                            CHECK(s.holds == order_holds(a, p, q, OrderMethod::max_flow).holds);
                            if (s.holds) CHECK(validate_certificate(a, p, q, s.certificate));
                        }
                });
            });
        }
}

TEST_CASE("star-extendibility and strong regularity")
{
    for (int m = 1; m <= 6; ++m)
        for (int n = 1; m * n <= 6 * 6 && n <= 6; ++n) {
            auto rho = refinement_embedding(m, n);
            auto sig = standard_embedding(m, n);
            CHECK(check_star_extendible(rho).ok);
            CHECK(check_star_extendible(sig).ok);
            CHECK(check_strongly_regular(rho).ok);
            CHECK(check_strongly_regular(sig).ok);
        }
    // the T2 -> T4 example: b split to (1,4) and (2,3)
    MatrixUnitEmbedding ex{PreorderAlgebra::upper_triangular(2), PreorderAlgebra::upper_triangular(4), {{0, 1}, {3, 2}}, {}};
    CHECK(check_star_extendible(ex).ok);
    auto sr = check_strongly_regular(ex);
    CHECK_FALSE(sr.ok);
    REQUIRE(sr.witness);
    CHECK(sr.source_unit == IndexPair{0, 1});
    CHECK(ex.pairing(0, 1) == std::vector<IndexPair>{{0, 3}, {1, 2}});

    // a 3-chain whose (1,3) pairing does not compose
    auto rho3 = refinement_embedding(3, 2);
    rho3.pairing_override[{0, 2}] = {{0, 5}, {1, 4}};
    CHECK(check_well_formed(rho3).ok);
    CHECK_FALSE(check_star_extendible(rho3).ok);

    // composition of refinements is a refinement
    auto c = compose(refinement_embedding(2, 2), refinement_embedding(4, 3));
    CHECK(c.image == refinement_embedding(2, 6).image);
}

TEST_CASE("regular embedding search")
{
    auto t2 = PreorderAlgebra::upper_triangular(2), t4 = PreorderAlgebra::upper_triangular(4);
    auto found = search_regular_embedding(t2, t4, {{0, 1}, {2, 3}});
    CHECK(found.status == SearchStatus::found);
    REQUIRE(found.embedding);
    CHECK(check_star_extendible(*found.embedding).ok);

    auto a1 = PreorderAlgebra::tensor(t2, t2);
    CHECK(a1.pairs().size() == 4 + 5);
    auto a2 = remark33_target();
    DiagonalMap diag{{0, 1}, {2, 3}, {4, 5}, {6, 7}};
    auto none = search_regular_embedding(a1, a2, diag);
    CHECK(none.status == SearchStatus::none);
    SearchOptions any;
    any.star_extendible = false;
    CHECK(search_regular_embedding(a1, a2, diag, any).status == SearchStatus::none);

    // the target has no matrix unit joining the two image sets
    CHECK(search_regular_embedding(t2, PreorderAlgebra::diagonal(4), {{0, 1}, {2, 3}}).status == SearchStatus::none);

    SearchOptions tiny;
    tiny.node_budget = 1;
    CHECK(search_regular_embedding(PreorderAlgebra::upper_triangular(3), PreorderAlgebra::full(9),
                                   {{0, 1, 2}, {3, 4, 5}, {6, 7, 8}}, tiny)
              .status == SearchStatus::inconclusive);
}

TEST_CASE("conjugacy")
{
    // T2 into T2 (x) M4: x -> {1,2,3,5}, y -> {4,6,7,8}
    auto t2 = PreorderAlgebra::upper_triangular(2);
    auto t44 = PreorderAlgebra::nest({4, 4});
    auto r = conjugacy_check(t2, t44, {{0, 1, 2, 4}, {3, 5, 6, 7}});
    CHECK(r.holds());
    CHECK(r.enumerated > 1);

    auto t4 = PreorderAlgebra::upper_triangular(4);
    auto c = conjugacy_check(t2, t4, {{0, 1}, {2, 3}});
    CHECK(c.status == SearchStatus::none);
    REQUIRE(c.counterexample);
    SearchOptions sr;
    sr.strongly_regular = true;
    auto h = conjugacy_check(t2, t4, {{0, 1}, {2, 3}}, sr);
    CHECK(h.holds());
    CHECK(h.enumerated == 1);
    for (int m = 2; m <= 3; ++m)
        for (int n = 2; n <= 3; ++n) {
            auto rho = refinement_embedding(m, n);
            CHECK(conjugacy_check(rho.source, rho.target, rho.image, sr).holds());
        }
}

TEST_CASE("block multiplicity allocation")
{
    auto d = allocate_diagonal(PreorderAlgebra::upper_triangular(2), PreorderAlgebra::nest({4, 4}), int_matrix({{3, 1}, {1, 3}}));
    CHECK(d == DiagonalMap{{0, 1, 2, 4}, {3, 5, 6, 7}});
    CHECK_THROWS(allocate_diagonal(PreorderAlgebra::upper_triangular(2), PreorderAlgebra::nest({4, 4}), int_matrix({{3, 2}, {1, 3}})));
}

TEST_CASE("type-level order with mutually reachable types")
{
    // all preorders on 3 types, sizes 2,1,2; compared with unit bijections
    for (const auto& pairs : brute_preorders(3)) {
        std::vector<std::vector<char>> reach(3, std::vector<char>(3, 0));
        for (int i = 0; i < 3; ++i) reach[i][i] = 1;
        for (auto [i, j] : pairs) reach[i][j] = 1;
        const BlockPreorder a({BigInt(2), BigInt(1), BigInt(2)}, reach);
        for (long p0 = 0; p0 <= 2; ++p0)
            for (long p1 = 0; p1 <= 1; ++p1)
                for (long p2 = 0; p2 <= 2; ++p2)
                    for (long q0 = 0; q0 <= 2; ++q0)
                        for (long q1 = 0; q1 <= 1; ++q1)
                            for (long q2 = 0; q2 <= 2; ++q2) {
                                const ScaleVector p = sv({p0, p1, p2}), q = sv({q0, q1, q2});
                                std::vector<int> pu, qu;
                                for (int t = 0; t < 3; ++t) {
                                    for (long k = 0; k < p(t); ++k) pu.push_back(t);
                                    for (long k = 0; k < q(t); ++k) qu.push_back(t);
                                }
                                bool brute = false;
                                if (pu.size() == qu.size()) {
                                    std::vector<int> perm(pu.size());
                                    for (size_t i = 0; i < perm.size(); ++i) perm[i] = static_cast<int>(i);
                                    do {
                                        bool ok = true;
                                        for (size_t k = 0; k < perm.size() && ok; ++k) ok = a.reaches(pu[static_cast<size_t>(perm[k])], qu[k]);
                                        brute = brute || ok;
                                    } while (!brute && std::next_permutation(perm.begin(), perm.end()));
                                }
                                const OrderResult r = order_holds(a, p, q);
                                REQUIRE(r.holds == brute);
                                if (r.holds) {
                                    std::string why;
                                    CHECK_MESSAGE(validate_certificate(a, p, q, r.certificate, &why), why);
                                }
                            }
    }
    CHECK_THROWS_AS(BlockPreorder({BigInt(1), BigInt(1)}, {{1, 1}, {0, 0}}), std::invalid_argument);
}
