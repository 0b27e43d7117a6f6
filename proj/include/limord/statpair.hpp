#pragma once

#include "limord/algord.hpp"

#include <string>
#include <vector>

namespace limord {

// offending data are 0-based: row block i, column block j, columns l and l2 of block j
struct PairError : std::invalid_argument {
    PairError(const std::string& what, int i, int j, int l, int l2)
        : std::invalid_argument(what), block_row(i), block_col(j), col(l), other_col(l2)
    {
    }
    int block_row, block_col, col, other_col;
};

// D is the stationary system of x; B groups the vertices of D by the partition.
struct StationaryPair {
    IntMatrix x;
    std::vector<int> partition;
    IntMatrix y;           // partial column sums
    IntVector unit;        // at level 0, on the vertices of D
    IntMatrix summation;   // groups x vertices

    int vertices() const { return static_cast<int>(x.rows()); }
    int groups() const { return static_cast<int>(partition.size()); }
    int group_of(int v) const;
    int first(int g) const;  // first vertex of group g
};

StationaryPair derive_pair(const IntMatrix& x, std::vector<int> partition, IntVector unit);

BratteliDiagram small_diagram(const StationaryPair& p, int depth);  // D
BratteliDiagram large_diagram(const StationaryPair& p, int depth);  // B
// summation at every level; the square S X = Y S is checked exactly
InducedMap s_infinity(const StationaryPair& p, int depth = default_scan_depth);

struct UnimodularityReport {
    BigInt det_x, det_y;
    bool divides = false;  // det y | det x
    bool x_unimodular = false, y_unimodular = false;
};
UnimodularityReport unimodularity_check(const StationaryPair& p);

// A preorder on the vertices of D relating vertices of the same group only.
// relation[a][b]: units of vertex b move onto units of vertex a.
struct IntermediateSpec {
    std::vector<std::vector<char>> relation;

    std::vector<IndexPair> pairs() const;  // off-diagonal pairs
    std::string describe() const;          // 1-based
    bool operator==(const IntermediateSpec&) const = default;
};

// reflexive closure added; pairs must be transitive and stay inside groups
IntermediateSpec intermediate_from_pairs(const StationaryPair& p, const std::vector<IndexPair>& pairs);
// all preorders on one group (0-based), the other groups diagonal; at most 5 vertices
std::vector<IntermediateSpec> enumerate_intermediates(const StationaryPair& p, int group);

// E_0 = spec; E_{k+1} closes the diagonal and the images of E_k under the
// pair's matrix-unit system
std::vector<std::vector<std::vector<char>>> stage_relations(const StationaryPair& p, const IntermediateSpec& s, int depth);
StageSystem generated_system(const StationaryPair& p, const IntermediateSpec& s, int depth);

// pairs (a, b) at stage k whose matrix units fall into the generated algebra
// within `lookahead` further stages
std::vector<std::vector<std::vector<char>>> pullback_relations(const StationaryPair& p, const IntermediateSpec& s, int depth,
                                                               int lookahead);
// classes of spec indices with equal pullbacks at stages 0..depth
std::vector<std::vector<int>> collapse_detect(const StationaryPair& p, const std::vector<IntermediateSpec>& specs, int depth);

class IntermediateOracle {
public:
    IntermediateOracle(const StationaryPair& p, const IntermediateSpec& s, int depth);
    LimitOrderVerdict operator()(const LimitElement& a, const LimitElement& b) const;
    const StageSystem& system() const { return sys_; }

private:
    StageSystem sys_;
    int depth_;
};

LimitOrderVerdict intermediate_order_oracle(const StationaryPair& p, const IntermediateSpec& s, const LimitElement& a,
                                            const LimitElement& b, int depth = 12);

}  // namespace limord
