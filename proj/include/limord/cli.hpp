#pragma once

#include "limord/statpair.hpp"

#include <json.hpp>

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace limord {

using Json = nlohmann::ordered_json;

// ---- specification files

enum class SpecKind { diagram, ordered_diagram, stationary, pair, fdcsl };
std::string to_string(SpecKind k);

// Parsed file contents, indices 0-based.  Ordered diagrams keep their order
// blocks as written: one block is repeated, several blocks are the first
// steps and the last one repeats.
struct SpecFile {
    SpecKind kind = SpecKind::diagram;
    std::optional<int> depth;
    std::optional<IntVector> unit;
    std::vector<int> partition;
    std::vector<IntMatrix> matrices;
    std::vector<std::vector<std::vector<int>>> orders;  // block, vertex, sources
    std::optional<int> size;                            // fdcsl
    std::vector<IndexPair> rel;

    bool operator==(const SpecFile& o) const;
};

struct ParseError : std::runtime_error {
    ParseError(int line, int column, std::vector<std::string> expected, const std::string& message);
    int line, column;  // 1-based
    std::vector<std::string> expected;
};

// semantic problems in a syntactically valid file
struct SpecError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

SpecFile parse_spec(const std::string& text);
std::string serialize(const SpecFile& s);

BratteliDiagram to_diagram(const SpecFile& s, int depth);
OrderedBratteliDiagram to_ordered(const SpecFile& s, int depth);
StageSystem to_stage_system(const SpecFile& s, int depth);
StationaryPair to_pair(const SpecFile& s);
PreorderAlgebra to_fdcsl(const SpecFile& s);

// "stage:v1,v2,..."
LimitElement parse_element(const std::string& text);

// ---- certificates as JSON (indices 1-based, stages 0-based)

Json to_json(const BigInt& x);
BigInt big_from_json(const Json& j);
Json to_json(const IntVector& v);
IntVector vector_from_json(const Json& j);
Json to_json(const OrderCertificate& c);
OrderCertificate order_certificate_from_json(const Json& j);
Json to_json(const LimitOrderVerdict& v);
LimitOrderVerdict limit_verdict_from_json(const Json& j);
Json to_json(const PositivityVerdict& v);
PositivityVerdict positivity_from_json(const Json& j);
// source and target are not stored
Json to_json(const MatrixUnitEmbedding& e);
MatrixUnitEmbedding embedding_from_json(const Json& j, const PreorderAlgebra& source, const PreorderAlgebra& target);
Json to_json(const IsoCertificate& c);
IsoCertificate iso_certificate_from_json(const Json& j, const StageSystem& a, const StageSystem& b);

std::string sha256_hex(const std::string& bytes);

// ---- commands

struct RunResult {
    int exit_code = 0;  // 0 decisive, 2 inconclusive or exhausted, 1 input error
    std::string out, err;
};

// arguments without the program name
RunResult run(const std::vector<std::string>& args);

}  // namespace limord
