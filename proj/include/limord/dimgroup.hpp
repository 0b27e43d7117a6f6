#pragma once

#include "limord/diagram.hpp"

#include <optional>
#include <string>
#include <vector>

namespace limord {

constexpr int default_scan_depth = 40;

struct LimitElement {
    int stage = 0;
    IntVector vector;
};

LimitElement push(const BratteliDiagram& d, const LimitElement& e, int to_stage);
// the order unit at a stage (level sizes, extended through the generator)
IntVector unit_at(const BratteliDiagram& d, int stage);

enum class Verdict { yes, no, inconclusive };
std::string to_string(Verdict v);

struct EqualityVerdict {
    Verdict verdict = Verdict::inconclusive;
    int stage = 0;  // stage where the comparison was decided
    std::string reason;
};
EqualityVerdict equal(const BratteliDiagram& d, const LimitElement& a, const LimitElement& b, int depth = default_scan_depth);

struct PositivityVerdict {
    enum Kind { positive, not_positive, zero, inconclusive } kind = inconclusive;
    std::string method;              // iteration, perron, eigenfunctional, cycle, kernel
    std::optional<int> stage;        // positive: stage where the pushed vector is >= 0; zero: where it vanishes
    std::optional<IntVector> pushed;
    int depth = 0;                   // iteration depth used
    std::string reason;
};
std::string to_string(PositivityVerdict::Kind k);

PositivityVerdict positive(const BratteliDiagram& d, const LimitElement& e, int depth = default_scan_depth);
// re-derives the certificate: the pushed vector at the stated stage
bool validate_positivity(const BratteliDiagram& d, const LimitElement& e, const PositivityVerdict& v, std::string* why = nullptr);

struct ScaleVerdict {
    Verdict verdict = Verdict::inconclusive;
    PositivityVerdict lower, upper;  // e >= 0, unit - e >= 0
};
ScaleVerdict in_scale(const BratteliDiagram& d, const LimitElement& e, int depth = default_scan_depth);

// Level maps between two presented systems with commuting squares
// target.step(k) * level(k) = level(k + 1) * source.step(k).
struct InducedMap {
    BratteliDiagram source, target;
    std::vector<IntMatrix> levels;
    std::optional<IntMatrix> stationary;  // used at every level when set

    const IntMatrix& at(int k) const;
};

// throws std::logic_error when a stored square fails to commute
InducedMap make_induced_map(BratteliDiagram source, BratteliDiagram target, std::vector<IntMatrix> levels);
InducedMap make_stationary_map(BratteliDiagram source, BratteliDiagram target, IntMatrix map);
LimitElement induced_map_apply(const InducedMap& m, const LimitElement& e);
// the map from a stage system's K0 to its envelope's K0
InducedMap envelope_induced_map(const StageSystem& s);

struct K0Report {
    std::string kind;          // free abelian, m-adic rationals, stationary non-unimodular, presented direct limit
    std::string description;
    int rank = 0;
    std::optional<BigInt> determinant;
    bool primitive = false;
    std::optional<PerronData> perron;
    std::vector<EigenFunctional> cone;  // nonnegative eigenfunctionals deciding the cone
};
K0Report k0_report(const BratteliDiagram& d);

}  // namespace limord
