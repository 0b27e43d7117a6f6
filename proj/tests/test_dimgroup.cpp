#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "limord/dimgroup.hpp"

#include <random>

using namespace limord;

namespace {

bool same(const IntVector& a, const IntVector& b) { return a.size() == b.size() && (a.array() == b.array()).all(); }

const IntMatrix fib = int_matrix({{1, 1}, {1, 0}});
const IntMatrix x45 = int_matrix({{1, 0, 0}, {0, 1, 1}, {1, 1, 0}});
const IntMatrix x44 = int_matrix({{3, 1}, {1, 3}});
const IntMatrix x46 = int_matrix({{1, 0, 0, 0, 1}, {0, 1, 0, 0, 1}, {0, 0, 1, 0, 1}, {0, 0, 0, 1, 1}, {1, 1, 1, 1, 3}});

// sign of a * golden + b, golden = (1 + sqrt 5) / 2, in integers
int golden_sign(long a, long b)
{
    // 2(a g + b) = a sqrt5 + (a + 2b)
    const long c = a + 2 * b;
    const int sa = a > 0 ? 1 : (a < 0 ? -1 : 0), sc = c > 0 ? 1 : (c < 0 ? -1 : 0);
    if (sa == 0) return sc;
    if (sc == 0 || sa == sc) return sa;
    // opposite signs: compare 5 a^2 with c^2
    const long l = 5 * a * a, r = c * c;
    return l > r ? sa : (l < r ? sc : 0);
}

// three-vertex generator: (l, m, n) -> (l, m + n, l + m).  The pair (m, n)
// follows the Fibonacci step plus (0, l), with fixed point (-l, 0); an element
// is eventually nonnegative iff l >= 0 and (m + l, n) has positive Fibonacci
// Perron component.
bool cone45(long l, long m, long n) { return l >= 0 && golden_sign(m + l, n) > 0; }

}  // namespace

TEST_CASE("push")
{
    const BratteliDiagram f = stationary(fib, int_vector({1, 1}), 4);
    LimitElement e{1, int_vector({1, 0})};
    CHECK(same(push(f, e, 1).vector, e.vector));
    CHECK(same(push(f, e, 2).vector, int_vector({1, 1})));
    CHECK(push(f, e, 30).stage == 30);  // stationary diagrams extend
    CHECK(same(push(stationary(x45, int_vector({1, 1, 1}), 3), {0, int_vector({1, 0, 0})}, 1).vector, int_vector({1, 0, 1})));
    CHECK_THROWS(push(f, e, 0));
    CHECK_THROWS_AS(push(f, {0, int_vector({1, 0, 0})}, 1), ShapeError);
    BratteliDiagram finite = f;
    finite.generator.reset();
    CHECK_THROWS_AS(push(finite, e, 4), std::out_of_range);
    CHECK(same(unit_at(f, 6), int_vector({21, 13})));
}

TEST_CASE("equality")
{
    const BratteliDiagram f = stationary(fib, int_vector({1, 1}), 4);
    const LimitElement e{2, int_vector({3, -1})};
    CHECK(equal(f, e, e).verdict == Verdict::yes);
    CHECK(equal(f, {0, int_vector({1, 0})}, {0, int_vector({0, 1})}).verdict == Verdict::no);
    const BratteliDiagram two = stationary(int_matrix({{2}}), int_vector({1}), 3);
    CHECK(equal(two, {1, int_vector({1})}, {2, int_vector({2})}).verdict == Verdict::yes);
    CHECK(equal(two, {1, int_vector({1})}, {2, int_vector({3})}).verdict == Verdict::no);
    // rank one generator: classes merge after one step
    const BratteliDiagram flat = stationary(int_matrix({{1, 1}, {1, 1}}), int_vector({1, 1}), 3);
    EqualityVerdict v = equal(flat, {0, int_vector({1, 0})}, {0, int_vector({0, 1})});
    CHECK(v.verdict == Verdict::yes);
    CHECK(v.stage == 1);
    v = equal(flat, {0, int_vector({1, 0})}, {0, int_vector({0, 2})}, 5);
    CHECK(v.verdict == Verdict::inconclusive);
}

TEST_CASE("positivity on small examples")
{
    const BratteliDiagram f = stationary(fib, int_vector({1, 1}), 3);
    for (int stage = 0; stage < 5; ++stage) {
        CHECK(positive(f, {stage, int_vector({1, 0})}).kind == PositivityVerdict::positive);
        CHECK(positive(f, {stage, int_vector({0, 1})}).kind == PositivityVerdict::positive);
    }
    CHECK(positive(f, {0, int_vector({0, 0})}).kind == PositivityVerdict::zero);

    const BratteliDiagram d45 = stationary(x45, int_vector({1, 1, 1}), 3);
    // (1,0,-1) -> (1,-1,1) -> (1,0,0)
    PositivityVerdict v = positive(d45, {0, int_vector({1, 0, -1})});
    CHECK(v.kind == PositivityVerdict::positive);
    REQUIRE(v.stage);
    CHECK(*v.stage == 2);
    CHECK(same(*v.pushed, int_vector({1, 0, 0})));
    v = positive(d45, {0, int_vector({1, 0, 0})});
    CHECK(v.kind == PositivityVerdict::positive);
    CHECK(*v.stage == 0);
    v = positive(d45, {0, int_vector({2, -2, 0})});  // fixed direction
    CHECK(v.kind == PositivityVerdict::not_positive);
    v = positive(d45, {0, int_vector({-1, 5, 5})});
    CHECK(v.kind == PositivityVerdict::not_positive);
    CHECK(v.method == "eigenfunctional");
}

TEST_CASE("Fibonacci cone agrees with the golden ratio test")
{
    const BratteliDiagram f = stationary(fib, int_vector({1, 1}), 2);
    for (long a = -12; a <= 12; ++a)
        for (long b = -12; b <= 12; ++b) {
            const PositivityVerdict v = positive(f, {0, int_vector({a, b})});
            if (a == 0 && b == 0)
                CHECK(v.kind == PositivityVerdict::zero);
            else
                CHECK((v.kind == PositivityVerdict::positive) == (golden_sign(a, b) > 0));
            CHECK(v.kind != PositivityVerdict::inconclusive);
            std::string why;
            CHECK_MESSAGE(validate_positivity(f, {0, int_vector({a, b})}, v, &why), why);
        }
}

TEST_CASE("three-vertex cone against the fixed-point analysis")
{
    const BratteliDiagram d = stationary(x45, int_vector({1, 1, 1}), 2);
    int decided = 0;
    for (long l = -6; l <= 6; ++l)
        for (long m = -6; m <= 6; ++m)
            for (long n = -6; n <= 6; ++n) {
                const LimitElement e{0, int_vector({l, m, n})};
                const PositivityVerdict v = positive(d, e);
                if (l == 0 && m == 0 && n == 0) {
                    CHECK(v.kind == PositivityVerdict::zero);
                    continue;
                }
                REQUIRE(v.kind != PositivityVerdict::inconclusive);
                CHECK((v.kind == PositivityVerdict::positive) == cone45(l, m, n));
                CHECK(validate_positivity(d, e, v));
                ++decided;
            }
    CHECK(decided == 13 * 13 * 13 - 1);
}

TEST_CASE("doubling-difference positivity and scale")
{
    const BratteliDiagram d = stationary(x44, int_vector({1, 1}), 4);
    for (int stage = 0; stage <= 2; ++stage)
        for (long a = -8; a <= 8; ++a)
            for (long b = -8; b <= 8; ++b) {
                const LimitElement e{stage, int_vector({a, b})};
                const PositivityVerdict v = positive(d, e);
                const bool expect = a + b > 0 || (a == 0 && b == 0);
                CHECK((v.kind == PositivityVerdict::positive || v.kind == PositivityVerdict::zero) == expect);
                // scale: 0, the unit, or total strictly between
                long total_unit = 2;
                for (int k = 0; k < stage; ++k) total_unit *= 4;
                const long unit_entry = total_unit / 2;
                const bool in = (a == 0 && b == 0) || (a == unit_entry && b == unit_entry) || (a + b > 0 && a + b < total_unit);
                CHECK((in_scale(d, e).verdict == Verdict::yes) == in);
            }
}

TEST_CASE("cone properties")
{
    std::mt19937 g(99);
    std::uniform_int_distribution<int> c(-5, 5);
    const BratteliDiagram d = stationary(x45, int_vector({1, 1, 1}), 2);
    for (int t = 0; t < 300; ++t) {
        const IntVector a = int_vector({c(g), c(g), c(g)}), b = int_vector({c(g), c(g), c(g)});
        const auto pa = positive(d, {0, a}), pna = positive(d, {0, IntVector(-a)});
        const bool pos_a = pa.kind == PositivityVerdict::positive || pa.kind == PositivityVerdict::zero;
        const bool pos_na = pna.kind == PositivityVerdict::positive || pna.kind == PositivityVerdict::zero;
        if (pos_a && pos_na) CHECK(is_zero(a));
        const auto pb = positive(d, {0, b});
        const bool pos_b = pb.kind == PositivityVerdict::positive || pb.kind == PositivityVerdict::zero;
        if (pos_a && pos_b) {
            const auto ps = positive(d, {0, IntVector(a + b)});
            CHECK((ps.kind == PositivityVerdict::positive || ps.kind == PositivityVerdict::zero));
        }
    }
}

TEST_CASE("certificates are checked")
{
    const BratteliDiagram d = stationary(x45, int_vector({1, 1, 1}), 2);
    const LimitElement e{0, int_vector({1, 0, -1})};
    PositivityVerdict v = positive(d, e);
    CHECK(validate_positivity(d, e, v));
    v.pushed = int_vector({1, 0, 1});
    CHECK_FALSE(validate_positivity(d, e, v));
    v.stage = 1;
    v.pushed = int_vector({1, -1, 1});
    CHECK_FALSE(validate_positivity(d, e, v));
}

TEST_CASE("scale membership")
{
    const BratteliDiagram d = stationary(x45, int_vector({1, 1, 1}), 2);
    CHECK(in_scale(d, {0, int_vector({0, 0, 0})}).verdict == Verdict::yes);
    CHECK(in_scale(d, {0, int_vector({1, 1, 1})}).verdict == Verdict::yes);
    CHECK(in_scale(d, {3, unit_at(d, 3)}).verdict == Verdict::yes);
    CHECK(in_scale(d, {0, int_vector({2, 0, 0})}).verdict == Verdict::no);
}

TEST_CASE("induced maps")
{
    const BratteliDiagram d45 = stationary(x45, int_vector({1, 1, 1}), 3);
    const BratteliDiagram df = stationary(fib, int_vector({2, 1}), 3);
    const IntMatrix s = int_matrix({{1, 1, 0}, {0, 0, 1}});
    const InducedMap m = make_stationary_map(d45, df, s);
    CHECK(same(induced_map_apply(m, {0, int_vector({3, 4, 5})}).vector, int_vector({7, 5})));
    CHECK(is_zero(induced_map_apply(m, {2, int_vector({0, 0, 0})}).vector));
    std::mt19937 g(5);
    std::uniform_int_distribution<int> c(-9, 9);
    for (int t = 0; t < 50; ++t) {
        const LimitElement e{t % 3, int_vector({c(g), c(g), c(g)})};
        CHECK(same(push(df, induced_map_apply(m, e), 5).vector, induced_map_apply(m, push(d45, e, 5)).vector));
    }
    CHECK_THROWS_AS(make_stationary_map(d45, df, int_matrix({{1, 0, 0}, {0, 1, 1}})), std::logic_error);

    const BratteliDiagram d46 = stationary(x46, int_vector({1, 1, 1, 1, 1}), 2);
    const BratteliDiagram dy = stationary(int_matrix({{1, 4}, {1, 3}}), int_vector({4, 1}), 2);
    const InducedMap m46 = make_stationary_map(d46, dy, int_matrix({{1, 1, 1, 1, 0}, {0, 0, 0, 0, 1}}));
    CHECK(same(induced_map_apply(m46, {0, int_vector({1, 1, 1, 1, 0})}).vector, int_vector({4, 0})));

    // K0 of a nest system into its envelope
    const StageSystem st = nest_stage_system(OrderedBratteliDiagram::stationary(int_vector({1, 1}), {{1}, {0, 1}}, 5));
    const InducedMap env = envelope_induced_map(st);
    const LimitElement e{1, int_vector({1, 0, 1})};
    CHECK(same(induced_map_apply(env, e).vector, int_vector({1, 1})));
    CHECK(same(push(st.envelope, induced_map_apply(env, e), 4).vector, induced_map_apply(env, push(st.k0, e, 4)).vector));
}

TEST_CASE("K0 reports")
{
    K0Report r = k0_report(stationary(x45, int_vector({1, 1, 1}), 2));
    CHECK(r.kind == "free abelian");
    CHECK(r.rank == 3);
    CHECK(*r.determinant == -1);
    bool golden = false;
    for (const auto& f : r.cone) golden = golden || std::abs(f.eigenvalue.approx() - 1.6180339887) < 1e-9;
    CHECK(golden);

    r = k0_report(stationary(int_matrix({{2}}), int_vector({1}), 2));
    CHECK(r.kind == "m-adic rationals");
    CHECK(r.description.find("Z[1/2]") != std::string::npos);

    r = k0_report(stationary(x44, int_vector({1, 1}), 2));
    CHECK(r.kind == "stationary non-unimodular");
    CHECK(r.description.find("Z[1/2]^2") != std::string::npos);
    CHECK(r.primitive);

    r = k0_report(stationary(x46, int_vector({1, 1, 1, 1, 1}), 2));
    CHECK(r.kind == "free abelian");
    CHECK(r.rank == 5);
}
