#pragma once

#include "limord/fdcsl.hpp"

#include <optional>
#include <string>
#include <vector>

namespace limord {

// Levels are 0-based.  multiplicities[k](v, u) counts edges from vertex u at
// level k to vertex v at level k + 1.
struct BratteliDiagram {
    std::vector<IntVector> level_sizes;
    std::vector<IntMatrix> multiplicities;
    std::optional<IntMatrix> generator;  // set for stationary diagrams

    int levels() const { return static_cast<int>(level_sizes.size()); }
    int vertices(int level) const;
    const IntVector& unit() const { return level_sizes.front(); }
    // connecting matrix at step k; stationary diagrams extend past their stored depth
    const IntMatrix& step(int k) const;
    bool operator==(const BratteliDiagram&) const;
};

// Edge orders per target vertex as 0-based source labels; multiplicities are
// derived.  An empty order marks a missing ordering.
struct OrderedBratteliDiagram {
    IntVector unit;
    std::vector<std::vector<std::vector<int>>> orders;  // orders[k][v]: step k -> k + 1

    int levels() const { return static_cast<int>(orders.size()) + 1; }
    int vertices(int level) const;
    IntMatrix multiplicity(int k) const;
    BratteliDiagram underlying() const;  // throws on invalid input
    bool operator==(const OrderedBratteliDiagram&) const = default;

    // same edge orders at every step
    static OrderedBratteliDiagram stationary(const IntVector& unit, const std::vector<std::vector<int>>& order, int depth);
};

struct DiagramCheck {
    bool ok = true;
    std::vector<std::string> violations;
    explicit operator bool() const { return ok; }
};

DiagramCheck validate(const BratteliDiagram& d);
DiagramCheck validate(const OrderedBratteliDiagram& d);

// levels = max(1, depth)
BratteliDiagram stationary(const IntMatrix& x, const IntVector& unit, int depth);

// selection: increasing 0-based levels starting at 0
BratteliDiagram telescope(const BratteliDiagram& d, const std::vector<int>& selection);
OrderedBratteliDiagram telescope(const OrderedBratteliDiagram& d, const std::vector<int>& selection);

// one stage: direct sum of T_{n_v} over vertices, vertex v starting at offsets[v]
struct NestSystem {
    std::vector<PreorderAlgebra> stages;
    std::vector<std::vector<int>> offsets;
    std::vector<MatrixUnitEmbedding> embeddings;  // stage k -> k + 1
    std::vector<std::vector<int>> vertex_sizes;
};

NestSystem realize_nest_system(const OrderedBratteliDiagram& d);

// T_{2^n} -> T_{2^{n+1}}: refinement except that the last column is twisted
MatrixUnitEmbedding twisted_refinement_stage(int n);

// A presented system of preorder algebras.  K0 coordinates at stage k are the
// types of stages[k] (blocks of the self-adjoint part); k0 carries the sizes
// and the connecting matrices.  The enveloping C*-system has one summand per
// connected component; envelope_map[k] sends type counts to summand counts.
struct StageSystem {
    BratteliDiagram k0;
    std::vector<BlockPreorder> stages;
    BratteliDiagram envelope;
    std::vector<IntMatrix> envelope_map;
    std::optional<NestSystem> nest;  // index-level realization when available
    bool complete = false;           // no stages beyond the stored ones
    // closed type sets at the last stage whose deficit survives every later
    // step; filled on demand (see persistent_cuts)
    std::optional<std::vector<std::vector<char>>> cuts;

    int depth() const { return static_cast<int>(stages.size()); }
};

// every vertex a full matrix summand (the AF C*-algebra itself)
StageSystem self_adjoint_system(const BratteliDiagram& d);
// the envelope repeats the last step past the stored levels
StageSystem nest_stage_system(const OrderedBratteliDiagram& d);
// type-level stages with their relations; k0 connecting matrices are given
StageSystem make_stage_system(const std::vector<BlockPreorder>& stages, const std::vector<IntMatrix>& push,
                              std::optional<IntMatrix> generator = std::nullopt);

}  // namespace limord
