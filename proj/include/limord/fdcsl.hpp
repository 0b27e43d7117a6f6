#pragma once

#include "limord/exact.hpp"

#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace limord {

// Indices are 0-based in the API and 1-based in text formats.
using IndexPair = std::pair<int, int>;

struct ScaleError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Unit types with multiplicities and a reflexive transitive relation between
// types; the type-level shadow of a stage algebra.  reach(s, t) means matrix
// units from type-t units to type-s units exist (e_ab with a of type s, b of
// type t).  Mutually reachable types form a class.
class BlockPreorder {
public:
    BlockPreorder() = default;
    // validates reflexivity and transitivity unless trusted
    BlockPreorder(std::vector<BigInt> sizes, std::vector<std::vector<char>> reach, bool trusted = false);

    int types() const { return static_cast<int>(sizes_.size()); }
    const BigInt& size(int t) const { return sizes_[static_cast<size_t>(t)]; }
    const std::vector<BigInt>& sizes() const { return sizes_; }
    bool reaches(int s, int t) const { return reach_[static_cast<size_t>(s)][static_cast<size_t>(t)] != 0; }
    const std::vector<std::vector<char>>& reach() const { return reach_; }

    int num_classes() const { return static_cast<int>(class_members_.size()); }
    int class_of(int t) const { return class_of_[static_cast<size_t>(t)]; }
    const std::vector<int>& class_members(int c) const { return class_members_[static_cast<size_t>(c)]; }
    bool class_reaches(int c, int d) const { return reaches(class_members(c)[0], class_members(d)[0]); }
    // classes per connected component, in a linear extension (upper first)
    const std::vector<std::vector<int>>& components() const { return components_; }
    int component_of_class(int c) const { return component_of_[static_cast<size_t>(c)]; }
    bool antisymmetric() const { return num_classes() == types(); }
    bool sum_of_nests() const;  // every component a chain of classes

    bool operator==(const BlockPreorder& o) const { return sizes_ == o.sizes_ && reach_ == o.reach_; }

private:
    std::vector<BigInt> sizes_;
    std::vector<std::vector<char>> reach_;
    std::vector<int> class_of_;
    std::vector<std::vector<int>> class_members_;
    std::vector<std::vector<int>> components_;
    std::vector<int> component_of_;
};

// A reflexive transitive relation on n diagonal indices, stored through its
// blocks (classes of rel ∩ rel⁻¹) and the reachability between blocks.
// (i, j) ∈ rel means the matrix unit e_ij belongs to the algebra.
class PreorderAlgebra {
public:
    PreorderAlgebra() = default;
    // throws std::invalid_argument when the closure would differ (see validate)
    static PreorderAlgebra from_relation(int n, const std::vector<IndexPair>& pairs);
    static PreorderAlgebra from_blocks(std::vector<int> block_of, std::vector<std::vector<char>> reach, bool trusted = false);
    static PreorderAlgebra diagonal(int n);
    static PreorderAlgebra full(int n);
    static PreorderAlgebra upper_triangular(int n);  // T_n
    // T(n_1, ..., n_r): block upper triangular, full blocks of the given sizes
    static PreorderAlgebra nest(const std::vector<int>& block_sizes);

    int size() const { return static_cast<int>(block_of_.size()); }
    int num_blocks() const { return static_cast<int>(block_size_.size()); }
    int block_of(int i) const { return block_of_[static_cast<size_t>(i)]; }
    int block_size(int b) const { return block_size_[static_cast<size_t>(b)]; }
    const std::vector<int>& block_sizes() const { return block_size_; }
    // indices of a block, increasing
    const std::vector<int>& block_members(int b) const { return members_[static_cast<size_t>(b)]; }
    bool block_reaches(int bi, int bj) const { return blocks_.reaches(bi, bj); }
    bool related(int i, int j) const { return block_reaches(block_of(i), block_of(j)); }

    bool triangular() const;         // antisymmetric
    bool total() const;              // any two indices comparable (a nest)
    bool sum_of_nests() const;       // every connected component total
    // connected components of the block graph, each a list of blocks in a
    // linear extension of the block order
    const std::vector<std::vector<int>>& components() const { return blocks_.components(); }
    int component_of_block(int b) const { return blocks_.component_of_class(b); }
    const BlockPreorder& blocks() const { return blocks_; }

    std::vector<IndexPair> pairs() const;
    std::string describe() const;

    bool operator==(const PreorderAlgebra& o) const { return block_of_ == o.block_of_ && blocks_.reach() == o.blocks_.reach(); }

    static PreorderAlgebra direct_sum(const PreorderAlgebra& a, const PreorderAlgebra& b);
    // indices (i, j) -> i * b.size() + j
    static PreorderAlgebra tensor(const PreorderAlgebra& a, const PreorderAlgebra& b);

private:
    void finish(std::vector<std::vector<char>> reach, bool trusted);
    std::vector<int> block_of_;
    std::vector<int> block_size_;
    std::vector<std::vector<int>> members_;
    BlockPreorder blocks_;
};

struct ValidationReport {
    bool ok = false;
    std::string message;
    std::optional<std::pair<IndexPair, IndexPair>> violation;  // (i,j), (j,k) with (i,k) missing; or (i,i) twice
    std::vector<std::vector<int>> blocks;
    bool triangular = false;
    bool nest = false;
};

ValidationReport validate(int n, const std::vector<IndexPair>& pairs);

// ---- scale

using ScaleVector = IntVector;  // per-block counts

void check_scale(const BlockPreorder& a, const ScaleVector& p);
void check_scale(const PreorderAlgebra& a, const ScaleVector& p);
std::vector<ScaleVector> scale_enumerate(const PreorderAlgebra& a, size_t limit = 1000000);

// ---- algebraic order

struct FlowEntry {
    int p_block;
    int q_block;
    BigInt amount;
    bool operator==(const FlowEntry&) const = default;
};

// Block-level transport plan: q units of block j are carried onto p units of
// block i.  Expands to a bijection of diagonal units.
struct OrderCertificate {
    std::vector<FlowEntry> flow;
};

struct OrderResult {
    bool holds = false;
    OrderCertificate certificate;
    std::string reason;
    explicit operator bool() const { return holds; }
};

enum class OrderMethod { automatic, max_flow };

// [p] S(a) [q]: some v in a with v*v = q and vv* = p.  Counts are per type
// (per block for a PreorderAlgebra); flow entries name types.
OrderResult order_holds(const BlockPreorder& a, const ScaleVector& p, const ScaleVector& q,
                        OrderMethod method = OrderMethod::automatic);
OrderResult order_holds(const PreorderAlgebra& a, const ScaleVector& p, const ScaleVector& q,
                        OrderMethod method = OrderMethod::automatic);
bool validate_certificate(const BlockPreorder& a, const ScaleVector& p, const ScaleVector& q,
                          const OrderCertificate& c, std::string* why = nullptr);
bool validate_certificate(const PreorderAlgebra& a, const ScaleVector& p, const ScaleVector& q,
                          const OrderCertificate& c, std::string* why = nullptr);
// unit-level matching (p index, q index) with p, q realised by the first
// members of each block
std::vector<IndexPair> expand_matching(const PreorderAlgebra& a, const OrderCertificate& c);

bool nest_order_formula(const std::vector<int>& sizes, const ScaleVector& a, const ScaleVector& b);

struct StrongOrderError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};
// positional matching of minimal subprojections in nest order
OrderResult strong_order_holds(const BlockPreorder& a, const ScaleVector& p, const ScaleVector& q);
OrderResult strong_order_holds(const PreorderAlgebra& a, const ScaleVector& p, const ScaleVector& q);

// ---- embeddings

// e_ij maps to the sum of e_{image[i][t], image[j][t]} over t unless an
// explicit pairing is supplied for (i, j).
struct MatrixUnitEmbedding {
    PreorderAlgebra source, target;
    std::vector<std::vector<int>> image;
    std::map<IndexPair, std::vector<IndexPair>> pairing_override;

    std::vector<IndexPair> pairing(int i, int j) const;
};

struct EmbeddingCheck {
    bool ok = false;
    std::string message;
    // for strong regularity: source unit (i, j) and target indices a, b in
    // image(j) whose relation status differs from that of their images
    std::optional<IndexPair> source_unit;
    std::optional<IndexPair> witness;
    std::optional<IndexPair> witness_image;
    explicit operator bool() const { return ok; }
};

EmbeddingCheck check_well_formed(const MatrixUnitEmbedding& e);
EmbeddingCheck check_star_extendible(const MatrixUnitEmbedding& e);
EmbeddingCheck check_strongly_regular(const MatrixUnitEmbedding& e);

MatrixUnitEmbedding refinement_embedding(int m, int n);  // T_m -> T_{nm}, i -> block of n
MatrixUnitEmbedding standard_embedding(int m, int n);    // T_m -> T_{nm}, i -> {i, i+m, ...}
MatrixUnitEmbedding compose(const MatrixUnitEmbedding& first, const MatrixUnitEmbedding& second);

// Given image sets, put them in the canonical ordered form used by searches.
using DiagonalMap = std::vector<std::vector<int>>;
// block_multiplicity(h, b): copies of source block b inside target block h
DiagonalMap allocate_diagonal(const PreorderAlgebra& src, const PreorderAlgebra& tgt, const IntMatrix& block_multiplicity);

enum class SearchStatus { found, none, inconclusive };
std::string to_string(SearchStatus s);

struct SearchOptions {
    long node_budget = 5000000;
    bool strongly_regular = false;
    // false: search all regular homomorphisms (pairings multiply), star-extendible or not
    bool star_extendible = true;
};

struct SearchResult {
    SearchStatus status = SearchStatus::none;
    std::optional<MatrixUnitEmbedding> embedding;
    long nodes = 0;
    std::string reason;
};

SearchResult search_regular_embedding(const PreorderAlgebra& src, const PreorderAlgebra& tgt, const DiagonalMap& diag,
                                      const SearchOptions& opt = {});

// permutation unitaries of the target's block diagonal fixing each image set
bool conjugate(const MatrixUnitEmbedding& a, const MatrixUnitEmbedding& b);

struct ConjugacyResult {
    SearchStatus status = SearchStatus::none;  // found = holds, none = counterexample
    long enumerated = 0;
    std::optional<std::pair<MatrixUnitEmbedding, MatrixUnitEmbedding>> counterexample;
    std::string reason;
    bool holds() const { return status == SearchStatus::found; }
};

ConjugacyResult conjugacy_check(const PreorderAlgebra& src, const PreorderAlgebra& tgt, const DiagonalMap& diag,
                                const SearchOptions& opt = {});

// all star-extendible embeddings over a diagonal map, lexicographic order
std::vector<MatrixUnitEmbedding> enumerate_embeddings(const PreorderAlgebra& src, const PreorderAlgebra& tgt,
                                                      const DiagonalMap& diag, const SearchOptions& opt,
                                                      bool* exhausted_budget = nullptr);

}  // namespace limord
