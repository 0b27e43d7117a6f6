#pragma once

#include "limord/dimgroup.hpp"

#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace limord {

// ---- order in the limit

struct LimitOrderVerdict {
    Verdict verdict = Verdict::inconclusive;  // yes = holds, no = refuted
    int stage = 0;                            // stage of the certificate or obstruction
    ScaleVector p_at, q_at;                   // both classes at that stage
    OrderCertificate certificate;
    std::string method;  // stage matching, trace, special point
    std::string reason;
};

// [p] S [q]: pushes both classes through the stored stages up to depth and
// tries the stage order wherever both fit the stage scale.
LimitOrderVerdict limit_order_holds(const StageSystem& s, const LimitElement& p, const LimitElement& q,
                                    int depth = default_scan_depth);
// Closed type sets U at the last stored stage (t in U and reach(s, t) put s
// in U) with an infinite chain U = U_0, U_1, ... of closed sets such that
// 1_{U_{j+1}} X - 1_{U_j} vanishes on the kernel of the envelope map.  Empty
// unless the system repeats its last relation and generator forever.
std::vector<std::vector<char>> persistent_cuts(const StageSystem& s);
void attach_cuts(StageSystem& s);

bool validate_limit_order(const StageSystem& s, const LimitElement& p, const LimitElement& q,
                          const LimitOrderVerdict& v, std::string* why = nullptr);

// ---- printed closed forms, evaluated literally

// block tails of b dominate those of a, totals equal
bool closed_form_4_1(const std::vector<int>& sizes, const IntVector& a, const IntVector& b);
// (a, b) S (c, d) iff a = c and b <= d
bool closed_form_4_4(const std::pair<Rational, Rational>& ab, const std::pair<Rational, Rational>& cd);
// (l, m, n) S (q, r, s) iff n = s, l + m = q + r, m <= r
bool closed_form_4_5(const IntVector& lmn, const IntVector& qrs);

// Coordinates for the stationary system with generator [[3,1],[1,3]]:
// v at stage k maps to ((v1 + v2) / (2 4^k), (v2 - v1) / (2 2^k)).
std::pair<Rational, Rational> trace_difference_coordinates(const LimitElement& e);

// ---- fibres of the envelope map

struct FiberReport {
    bool classes_in_fibers = true;  // every generated class inside one fibre
    bool fibers_connected = true;   // every sampled fibre a single class
    std::vector<std::vector<int>> classes;  // sample indices
    std::vector<std::vector<int>> fibers;
    std::vector<std::string> violations;
    bool ok() const { return classes_in_fibers && fibers_connected; }
};

FiberReport fiber_equivalence_check(const StageSystem& s, const InducedMap& induced, const std::vector<LimitElement>& sample,
                                    int depth = default_scan_depth);

// ---- the right-most germ of an ordered diagram

struct SpecialPointOptions {
    bool rightmost_only = true;  // false: every germ at the horizon is a candidate
};

struct SpecialPointResult {
    enum Kind { exists, none, inconclusive } kind = inconclusive;
    // witness germ: (vertex, position inside the summand) per level
    std::vector<std::pair<int, int>> path;
    int depth = 0;
    int candidates = 0;
    std::string reason;
};
std::string to_string(SpecialPointResult::Kind k);

SpecialPointResult special_point_exists(const OrderedBratteliDiagram& d, int depth,
                                        const SpecialPointOptions& opt = {});

// ---- realizing a finite relation by matrix units

struct RelationSpec {
    int nodes = 0;
    std::vector<IndexPair> pairs;        // (i, j): node-j units move onto node-i units
    std::vector<LimitElement> classes;   // one class per node
};

struct RealizationResult {
    SearchStatus status = SearchStatus::none;  // found, none = exhausted
    int stage = -1;
    std::optional<MatrixUnitEmbedding> embedding;  // A(R) tensor-copies into the stage algebra
    std::string reason;
};

// the stage algebra with one index per unit
PreorderAlgebra index_algebra(const StageSystem& s, int stage);

RealizationResult realize_relation(const StageSystem& s, const RelationSpec& r, int stage_budget,
                                   const SearchOptions& opt = {});

// ---- bounded intertwining search between nest systems

struct IsoStep {
    bool forward = true;  // first system to second
    int from_stage = 0, to_stage = 0;
    MatrixUnitEmbedding map;
};

struct IsoCertificate {
    std::vector<IsoStep> steps;  // alternating, starting with a forward map from stage 0
};

struct IsoOptions {
    int rounds = 2;  // forward/backward map pairs
    long node_budget = 20000000;
};

struct IsoResult {
    SearchStatus status = SearchStatus::none;  // found; none = exhausted
    std::optional<IsoCertificate> certificate;
    long nodes = 0;
    std::string reason;
};

// depth bounds the stages used on either side
IsoResult iso_search(const StageSystem& a, const StageSystem& b, int depth, const IsoOptions& opt = {});
bool validate_iso_certificate(const StageSystem& a, const StageSystem& b, const IsoCertificate& c, std::string* why = nullptr);

// composed connecting embedding of a nest system, stage from -> to
MatrixUnitEmbedding connecting(const NestSystem& n, int from, int to);
// same images and the same pairing for every related source pair
bool same_embedding(const MatrixUnitEmbedding& x, const MatrixUnitEmbedding& y);

}  // namespace limord
