#include "limord/cli.hpp"

#include <sstream>

namespace limord {

namespace {

struct Token {
    std::string text;
    int column;  // 1-based
};

std::vector<Token> tokenize(const std::string& line)
{
    std::vector<Token> out;
    size_t i = 0;
    const size_t end = std::min(line.find('#'), line.size());
    while (i < end) {
        while (i < end && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
        if (i >= end) break;
        const size_t s = i;
        while (i < end && !std::isspace(static_cast<unsigned char>(line[i]))) ++i;
        out.push_back({line.substr(s, i - s), static_cast<int>(s) + 1});
    }
    return out;
}

const std::vector<std::string> keywords = {"kind", "depth", "unit", "partition", "matrix", "level", "order", "size", "rel"};

class Parser {
public:
    explicit Parser(const std::string& text)
    {
        std::istringstream in(text);
        std::string l;
        while (std::getline(in, l)) {
            if (!l.empty() && l.back() == '\r') l.pop_back();
            lines_.push_back(tokenize(l));
        }
    }

    SpecFile run()
    {
        SpecFile s;
        bool have_kind = false;
        for (line_ = 0; line_ < lines_.size(); ++line_) {
            const auto& t = lines_[line_];
            if (t.empty()) continue;
            const std::string& kw = t[0].text;
            if (!have_kind && kw != "kind") fail(t[0].column, {"kind"}, "the file must start with a kind line");
            if (kw == "kind") {
                if (have_kind) fail(t[0].column, {}, "second kind line");
                expect_count(t, 2);
                s.kind = kind(t[1]);
                have_kind = true;
            } else if (kw == "depth") {
                expect_count(t, 2);
                s.depth = small(t[1], 0);
            } else if (kw == "unit") {
                if (t.size() < 2) fail(end_column(t), {"integer"}, "unit needs entries");
                std::vector<long> v;
                for (size_t i = 1; i < t.size(); ++i) v.push_back(integer(t[i]));
                s.unit = int_vector(v);
            } else if (kw == "partition") {
                if (t.size() < 2) fail(end_column(t), {"integer"}, "partition needs parts");
                for (size_t i = 1; i < t.size(); ++i) s.partition.push_back(small(t[i], 1));
            } else if (kw == "matrix") {
                expect_count(t, 3);
                const int r = small(t[1], 1), c = small(t[2], 1);
                IntMatrix m(r, c);
                for (int i = 0; i < r; ++i) {
                    next_content_line("a matrix row");
                    const auto& row = lines_[line_];
                    if (static_cast<int>(row.size()) != c) {
                        if (static_cast<int>(row.size()) > c) fail(row[static_cast<size_t>(c)].column, {"end of row"}, "too many entries");
                        fail(end_column(row), {"integer"}, "matrix row needs " + std::to_string(c) + " entries");
                    }
                    for (int j = 0; j < c; ++j) m(i, j) = BigInt(integer(row[static_cast<size_t>(j)]));
                }
                s.matrices.push_back(std::move(m));
            } else if (kw == "level") {
                expect_count(t, 1);
                if (s.orders.empty() || !s.orders.back().empty()) s.orders.emplace_back();
            } else if (kw == "order") {
                if (t.size() < 2) fail(end_column(t), {"vertex"}, "order needs a vertex");
                std::string v = t[1].text;
                size_t first = 2;
                if (!v.empty() && v.back() == ':') {
                    v.pop_back();
                } else if (t.size() > 2 && t[2].text == ":") {
                    first = 3;
                } else {
                    fail(t[1].column + static_cast<int>(t[1].text.size()), {":"}, "order vertex must be followed by ':'");
                }
                const int vertex = small({v, t[1].column}, 1) - 1;
                if (s.orders.empty()) s.orders.emplace_back();
                auto& block = s.orders.back();
                if (vertex != static_cast<int>(block.size()))
                    fail(t[1].column, {std::to_string(block.size() + 1)}, "order lines must list vertices 1, 2, ... in turn");
                std::vector<int> src;
                for (size_t i = first; i < t.size(); ++i) src.push_back(small(t[i], 1) - 1);
                block.push_back(std::move(src));
            } else if (kw == "size") {
                expect_count(t, 2);
                s.size = small(t[1], 0);
            } else if (kw == "rel") {
                expect_count(t, 3);
                s.rel.emplace_back(small(t[1], 1) - 1, small(t[2], 1) - 1);
            } else {
                fail(t[0].column, keywords, "unknown keyword '" + kw + "'");
            }
        }
        if (!have_kind) throw ParseError(1, 1, {"kind"}, "empty specification");
        if (!s.orders.empty() && s.orders.back().empty()) s.orders.pop_back();
        return s;
    }

private:
    [[noreturn]] void fail(int column, std::vector<std::string> expected, const std::string& msg) const
    {
        throw ParseError(static_cast<int>(line_) + 1, column, std::move(expected), msg);
    }

    static int end_column(const std::vector<Token>& t) { return t.back().column + static_cast<int>(t.back().text.size()); }

    void expect_count(const std::vector<Token>& t, size_t n) const
    {
        if (t.size() > n) fail(t[n].column, {"end of line"}, "unexpected '" + t[n].text + "'");
        if (t.size() < n) fail(end_column(t), {t[0].text == "kind" ? "kind name" : "integer"}, "missing argument to " + t[0].text);
    }

    void next_content_line(const std::string& what)
    {
        while (++line_ < lines_.size())
            if (!lines_[line_].empty()) return;
        --line_;
        fail(1, {what}, "unexpected end of file, expected " + what);
    }

    long integer(const Token& t) const
    {
        size_t used = 0;
        long v = 0;
        try {
            v = std::stol(t.text, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used != t.text.size() || t.text.empty()) fail(t.column, {"integer"}, "'" + t.text + "' is not an integer");
        return v;
    }

    int small(const Token& t, long lo) const
    {
        const long v = integer(t);
        if (v < lo || v > 1000000) fail(t.column, {"integer >= " + std::to_string(lo)}, "'" + t.text + "' out of range");
        return static_cast<int>(v);
    }

    SpecKind kind(const Token& t) const
    {
        if (t.text == "diagram") return SpecKind::diagram;
        if (t.text == "ordered-diagram") return SpecKind::ordered_diagram;
        if (t.text == "stationary") return SpecKind::stationary;
        if (t.text == "pair") return SpecKind::pair;
        if (t.text == "fdcsl") return SpecKind::fdcsl;
        fail(t.column, {"diagram", "ordered-diagram", "stationary", "pair", "fdcsl"}, "unknown kind '" + t.text + "'");
    }

    std::vector<std::vector<Token>> lines_;
    size_t line_ = 0;
};

std::string join(const std::vector<std::string>& xs)
{
    std::string r;
    for (const auto& x : xs) r += (r.empty() ? "" : ", ") + x;
    return r;
}

void require(bool ok, const std::string& msg)
{
    if (!ok) throw SpecError(msg);
}

void check_rel(const SpecFile& s, int n)
{
    for (auto [a, b] : s.rel)
        require(a < n && b < n, "rel " + std::to_string(a + 1) + " " + std::to_string(b + 1) + ": vertex beyond " + std::to_string(n));
}

std::vector<std::vector<char>> relation(const SpecFile& s, int n)
{
    check_rel(s, n);
    ValidationReport v = validate(n, s.rel);
    require(v.ok, "rel lines: " + v.message);
    std::vector<std::vector<char>> r(static_cast<size_t>(n), std::vector<char>(static_cast<size_t>(n), 0));
    for (int i = 0; i < n; ++i) r[static_cast<size_t>(i)][static_cast<size_t>(i)] = 1;
    for (auto [a, b] : s.rel) r[static_cast<size_t>(a)][static_cast<size_t>(b)] = 1;
    return r;
}

StageSystem fixed_relation_system(const BratteliDiagram& d, const std::vector<std::vector<char>>& rel, bool stationary_tail)
{
    std::vector<BlockPreorder> stages;
    for (const auto& sz : d.level_sizes) {
        require(static_cast<size_t>(sz.size()) == rel.size(), "rel lines need the same number of vertices at every level");
        stages.emplace_back(std::vector<BigInt>(sz.data(), sz.data() + sz.size()), rel);
    }
    StageSystem s = make_stage_system(stages, d.multiplicities, stationary_tail ? d.generator : std::nullopt);
    attach_cuts(s);
    return s;
}

}  // namespace

std::string to_string(SpecKind k)
{
    switch (k) {
    case SpecKind::diagram: return "diagram";
    case SpecKind::ordered_diagram: return "ordered-diagram";
    case SpecKind::stationary: return "stationary";
    case SpecKind::pair: return "pair";
    default: return "fdcsl";
    }
}

bool SpecFile::operator==(const SpecFile& o) const
{
    if (kind != o.kind || depth != o.depth || partition != o.partition || orders != o.orders || size != o.size || rel != o.rel)
        return false;
    if (unit.has_value() != o.unit.has_value() || (unit && (unit->size() != o.unit->size() || !(*unit == *o.unit)))) return false;
    if (matrices.size() != o.matrices.size()) return false;
    for (size_t i = 0; i < matrices.size(); ++i) {
        const auto& a = matrices[i];
        const auto& b = o.matrices[i];
        if (a.rows() != b.rows() || a.cols() != b.cols() || !(a == b)) return false;
    }
    return true;
}

ParseError::ParseError(int l, int c, std::vector<std::string> e, const std::string& message)
    : std::runtime_error("line " + std::to_string(l) + ", column " + std::to_string(c) + ": " + message +
                         (e.empty() ? "" : " (expected " + join(e) + ")")),
      line(l), column(c), expected(std::move(e))
{
}

SpecFile parse_spec(const std::string& text) { return Parser(text).run(); }

std::string serialize(const SpecFile& s)
{
    std::ostringstream o;
    o << "kind " << to_string(s.kind) << "\n";
    if (s.depth) o << "depth " << *s.depth << "\n";
    if (s.size) o << "size " << *s.size << "\n";
    if (s.unit) {
        o << "unit";
        for (Eigen::Index i = 0; i < s.unit->size(); ++i) o << " " << (*s.unit)(i);
        o << "\n";
    }
    if (!s.partition.empty()) {
        o << "partition";
        for (int k : s.partition) o << " " << k;
        o << "\n";
    }
    for (const auto& m : s.matrices) {
        o << "matrix " << m.rows() << " " << m.cols() << "\n";
        for (Eigen::Index i = 0; i < m.rows(); ++i) {
            for (Eigen::Index j = 0; j < m.cols(); ++j) o << (j ? " " : "") << m(i, j);
            o << "\n";
        }
    }
    for (size_t b = 0; b < s.orders.size(); ++b) {
        if (b) o << "level\n";
        for (size_t v = 0; v < s.orders[b].size(); ++v) {
            o << "order " << v + 1 << ":";
            for (int src : s.orders[b][v]) o << " " << src + 1;
            o << "\n";
        }
    }
    for (auto [a, b] : s.rel) o << "rel " << a + 1 << " " << b + 1 << "\n";
    return o.str();
}

BratteliDiagram to_diagram(const SpecFile& s, int depth)
{
    switch (s.kind) {
    case SpecKind::diagram: {
        require(s.unit.has_value(), "diagram needs a unit line");
        require(!s.matrices.empty(), "diagram needs at least one matrix");
        BratteliDiagram d;
        d.level_sizes.push_back(*s.unit);
        for (const auto& m : s.matrices) {
            require(m.cols() == d.level_sizes.back().size(), "matrix " + std::to_string(d.multiplicities.size() + 1) + " has " +
                                                                  std::to_string(m.cols()) + " columns, previous level has " +
                                                                  std::to_string(d.level_sizes.back().size()) + " vertices");
            d.level_sizes.push_back(apply(m, d.level_sizes.back()));
            d.multiplicities.push_back(m);
        }
        DiagramCheck c = validate(d);
        require(c.ok, c.ok ? "" : c.violations.front());
        return d;
    }
    case SpecKind::stationary:
    case SpecKind::pair: {
        require(s.unit.has_value(), to_string(s.kind) + " needs a unit line");
        require(s.matrices.size() == 1, to_string(s.kind) + " needs exactly one matrix");
        const IntMatrix& x = s.matrices[0];
        require(x.rows() == x.cols(), "the matrix must be square");
        require(s.unit->size() == x.rows(), "unit has " + std::to_string(s.unit->size()) + " entries, matrix has size " + std::to_string(x.rows()));
        BratteliDiagram d = stationary(x, *s.unit, depth);
        DiagramCheck c = validate(d);
        require(c.ok, c.ok ? "" : c.violations.front());
        return d;
    }
    case SpecKind::ordered_diagram: return to_ordered(s, depth).underlying();
    default: throw SpecError("an fdcsl file has no Bratteli diagram");
    }
}

OrderedBratteliDiagram to_ordered(const SpecFile& s, int depth)
{
    require(s.kind == SpecKind::ordered_diagram, "expected an ordered-diagram file");
    require(s.unit.has_value(), "ordered diagram needs a unit line");
    require(!s.orders.empty(), "ordered diagram needs order lines");
    OrderedBratteliDiagram d;
    d.unit = *s.unit;
    d.orders = s.orders;
    const size_t steps = std::max<size_t>(s.orders.size(), static_cast<size_t>(std::max(depth - 1, 1)));
    d.orders.resize(steps, s.orders.back());
    DiagramCheck c = validate(d);
    require(c.ok, c.ok ? "" : c.violations.front());
    return d;
}

StageSystem to_stage_system(const SpecFile& s, int depth)
{
    switch (s.kind) {
    case SpecKind::ordered_diagram: return nest_stage_system(to_ordered(s, depth));
    case SpecKind::fdcsl: {
        StageSystem sys = make_stage_system({to_fdcsl(s).blocks()}, {});
        sys.complete = true;
        return sys;
    }
    case SpecKind::pair: {
        const StationaryPair p = to_pair(s);
        StageSystem sys = generated_system(p, intermediate_from_pairs(p, s.rel), depth);
        attach_cuts(sys);
        return sys;
    }
    default: {
        const BratteliDiagram d = to_diagram(s, depth);
        if (s.rel.empty()) return self_adjoint_system(d);
        return fixed_relation_system(d, relation(s, static_cast<int>(d.unit().size())), s.kind == SpecKind::stationary);
    }
    }
}

StationaryPair to_pair(const SpecFile& s)
{
    require(s.kind == SpecKind::pair, "expected a pair file");
    require(!s.partition.empty(), "pair needs a partition line");
    to_diagram(s, 1);  // shape checks
    try {
        return derive_pair(s.matrices[0], s.partition, *s.unit);
    } catch (const PairError&) {
        throw;
    } catch (const std::invalid_argument& e) {
        throw SpecError(e.what());
    }
}

PreorderAlgebra to_fdcsl(const SpecFile& s)
{
    require(s.kind == SpecKind::fdcsl, "expected an fdcsl file");
    require(s.size.has_value(), "fdcsl needs a size line");
    check_rel(s, *s.size);
    ValidationReport v = validate(*s.size, s.rel);
    require(v.ok, "rel lines: " + v.message);
    return PreorderAlgebra::from_relation(*s.size, s.rel);
}

LimitElement parse_element(const std::string& text)
{
    const size_t colon = text.find(':');
    if (colon == std::string::npos) throw std::invalid_argument("element '" + text + "': expected stage:v1,v2,...");
    auto number = [&](const std::string& t) {
        size_t used = 0;
        long v = 0;
        try {
            v = std::stol(t, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (t.empty() || used != t.size()) throw std::invalid_argument("element '" + text + "': '" + t + "' is not an integer");
        return v;
    };
    LimitElement e;
    const long st = number(text.substr(0, colon));
    if (st < 0) throw std::invalid_argument("element '" + text + "': negative stage");
    e.stage = static_cast<int>(st);
    std::vector<long> v;
    std::string rest = text.substr(colon + 1);
    size_t pos = 0;
    for (;;) {
        const size_t comma = rest.find(',', pos);
        v.push_back(number(rest.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos)));
        if (comma == std::string::npos) break;
        pos = comma + 1;
    }
    e.vector = int_vector(v);
    return e;
}

}  // namespace limord
