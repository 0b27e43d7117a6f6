#include "limord/cli.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <fstream>
#include <sstream>

namespace limord {

namespace {

struct InputError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct Options {
    std::vector<std::string> files;
    bool json = false, timing = false, list = false, strong = false;
    std::optional<int> depth;
    std::string element, a, b, diag;
    int group = 1;
    long budget = 0;
    int rounds = 2;
};

struct Input {
    std::string path, text;
    SpecFile spec;
};

struct Report {
    std::string verdict;
    int depth = 0;
    Json certificate;
    Json details = Json::object();
    std::vector<std::string> lines;
};

int exit_for(const std::string& verdict)
{
    if (verdict == "inconclusive" || verdict == "exhausted" || verdict == "not distinguished") return 2;
    return 0;
}

Input load(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError("cannot read " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    Input i{path, ss.str(), {}};
    try {
        i.spec = parse_spec(i.text);
    } catch (const ParseError& e) {
        throw InputError(path + ":" + std::to_string(e.line) + ":" + std::to_string(e.column) + ": " + e.what());
    }
    return i;
}

int depth_of(const Options& o, const Input& in, int fallback) { return o.depth ? *o.depth : in.spec.depth ? *in.spec.depth : fallback; }

// long vectors are cut in text output; --json has them whole
std::string vec(const IntVector& v)
{
    if (v.size() <= 24) return to_string(v);
    std::string r = "(";
    for (Eigen::Index i = 0; i < 8; ++i) r += v(i).str() + ",";
    return r + "... " + std::to_string(v.size() - 8) + " more)";
}

Json matrix_json(const IntMatrix& m)
{
    Json a = Json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) a.push_back(to_json(IntVector(m.row(i).transpose())));
    return a;
}

LimitElement element(const std::string& flag, const std::string& text)
{
    if (text.empty()) throw InputError("missing --" + flag);
    try {
        return parse_element(text);
    } catch (const std::invalid_argument& e) {
        throw InputError(std::string("--") + flag + ": " + e.what());
    }
}

void need_files(const std::vector<Input>& in, size_t n, const std::string& cmd)
{
    if (in.size() != n) throw InputError(cmd + " takes " + std::to_string(n) + " specification file" + (n > 1 ? "s" : ""));
}

// ---- commands

Report cmd_k0(const Options& o, const std::vector<Input>& in)
{
    need_files(in, 1, "k0");
    Report r;
    r.depth = depth_of(o, in[0], 12);
    if (in[0].spec.kind == SpecKind::fdcsl) {
        const PreorderAlgebra a = to_fdcsl(in[0].spec);
        r.verdict = "report";
        r.details = {{"kind", "free abelian"}, {"rank", a.num_blocks()}, {"block_sizes", a.block_sizes()}};
        r.lines.push_back("free abelian of rank " + std::to_string(a.num_blocks()) + " (one generator per block)");
        return r;
    }
    const K0Report k = k0_report(to_diagram(in[0].spec, r.depth));
    r.verdict = "report";
    r.details["kind"] = k.kind;
    r.details["description"] = k.description;
    r.details["rank"] = k.rank;
    r.details["determinant"] = k.determinant ? to_json(*k.determinant) : Json();
    r.details["primitive"] = k.primitive;
    r.lines.push_back(k.kind + ": " + k.description);
    r.lines.push_back("rank " + std::to_string(k.rank) + (k.determinant ? ", determinant " + k.determinant->str() : ""));
    if (k.perron) {
        Json w = Json::array();
        for (const auto& c : k.perron->left_eigenvector) w.push_back(to_string(c, "λ"));
        r.details["perron"] = {{"eigenvalue", k.perron->eigenvalue.describe()},
                               {"minimal_polynomial", to_string(k.perron->eigenvalue.poly, "t")},
                               {"left_eigenvector", w}};
        r.lines.push_back("Perron eigenvalue " + k.perron->eigenvalue.describe() + ", left eigenvector " + w.dump());
    }
    Json cone = Json::array();
    for (const auto& f : k.cone) {
        Json w = Json::array();
        for (const auto& c : f.vector) w.push_back(to_string(c, "λ"));
        cone.push_back({{"eigenvalue", f.eigenvalue.describe()}, {"functional", w}});
        r.lines.push_back("cone functional for " + f.eigenvalue.describe() + ": " + w.dump());
    }
    r.details["cone"] = cone;
    return r;
}

Report cmd_positive(const Options& o, const std::vector<Input>& in, bool scale)
{
    need_files(in, 1, scale ? "scale" : "positive");
    Report r;
    r.depth = depth_of(o, in[0], default_scan_depth);
    const LimitElement e = element("element", o.element);
    if (in[0].spec.kind == SpecKind::fdcsl) {
        const PreorderAlgebra a = to_fdcsl(in[0].spec);
        if (e.stage != 0 || e.vector.size() != a.num_blocks()) throw InputError("fdcsl elements are 0:<one count per block>");
        if (scale) {
            bool ok = true;
            for (int b = 0; b < a.num_blocks(); ++b) ok = ok && e.vector(b) >= 0 && e.vector(b) <= a.block_size(b);
            r.verdict = ok ? "yes" : "no";
        } else {
            r.verdict = is_zero(e.vector) ? "zero" : nonnegative(e.vector) ? "positive" : "not positive";
        }
        r.lines.push_back("block counts " + vec(e.vector));
        return r;
    }
    const BratteliDiagram d = to_diagram(in[0].spec, std::max(r.depth, e.stage + 1));
    if (scale) {
        const ScaleVerdict s = in_scale(d, e, r.depth);
        r.verdict = to_string(s.verdict);
        r.certificate = {{"lower", to_json(s.lower)}, {"upper", to_json(s.upper)}};
        r.lines.push_back("element >= 0: " + to_string(s.lower.kind) + " (" + s.lower.reason + ")");
        r.lines.push_back("unit - element >= 0: " + to_string(s.upper.kind) + " (" + s.upper.reason + ")");
        return r;
    }
    const PositivityVerdict p = positive(d, e, r.depth);
    r.verdict = p.kind == PositivityVerdict::not_positive ? "not positive" : to_string(p.kind);
    r.certificate = to_json(p);
    r.lines.push_back("method " + (p.method.empty() ? std::string("-") : p.method) + ": " + p.reason);
    if (p.stage && p.pushed) r.lines.push_back("pushed to stage " + std::to_string(*p.stage) + ": " + vec(*p.pushed));
    return r;
}

// nest systems store dense connecting matrices over every type; stop adding
// levels once the top algebra gets too large
constexpr long nest_dimension_cap = 1L << 12;

int affordable_levels(const SpecFile& spec, int levels, int at_least)
{
    if (spec.kind != SpecKind::ordered_diagram) return levels;
    const OrderedBratteliDiagram d = to_ordered(spec, levels);
    IntVector sizes = d.unit;
    for (int k = 1; k < levels; ++k) {
        sizes = apply(d.multiplicity(k - 1), sizes);
        if (k >= at_least && sizes.sum() > nest_dimension_cap) return k;
    }
    return levels;
}

Report cmd_order(const Options& o, const std::vector<Input>& in)
{
    need_files(in, 1, "order");
    Report r;
    r.depth = depth_of(o, in[0], 12);
    const LimitElement a = element("a", o.a), b = element("b", o.b);
    if (in[0].spec.kind == SpecKind::fdcsl) {
        const PreorderAlgebra alg = to_fdcsl(in[0].spec);
        if (a.stage != 0 || b.stage != 0) throw InputError("fdcsl elements live at stage 0");
        try {
            check_scale(alg, a.vector);
            check_scale(alg, b.vector);
        } catch (const std::exception& e) {
            throw InputError(e.what());
        }
        const OrderResult res = order_holds(alg, a.vector, b.vector);
        r.verdict = res.holds ? "yes" : "no";
        LimitOrderVerdict v;
        v.verdict = res.holds ? Verdict::yes : Verdict::no;
        v.p_at = a.vector;
        v.q_at = b.vector;
        v.certificate = res.certificate;
        v.method = res.holds ? "stage matching" : "hall";
        v.reason = res.reason;
        r.certificate = to_json(v);
        r.lines.push_back(res.holds ? "transport plan:" : "no transport: " + res.reason);
        for (const auto& f : res.certificate.flow)
            r.lines.push_back("  " + f.amount.str() + " unit(s) of block " + std::to_string(f.q_block + 1) + " onto block " +
                              std::to_string(f.p_block + 1));
        return r;
    }
    const int wanted = std::max(r.depth, std::max(a.stage, b.stage) + 1);
    const int levels = affordable_levels(in[0].spec, wanted, std::max(a.stage, b.stage) + 1);
    if (levels < wanted) {
        r.depth = levels;
        r.details["requested_depth"] = wanted;
    }
    const StageSystem sys = to_stage_system(in[0].spec, levels);
    LimitOrderVerdict v;
    try {
        v = limit_order_holds(sys, a, b, levels);
    } catch (const ShapeError& e) {
        throw InputError(e.what());
    }
    r.verdict = to_string(v.verdict);
    r.certificate = to_json(v);
    r.lines.push_back((v.method.empty() ? std::string("search") : v.method) + ": " + v.reason);
    r.lines.push_back("classes at stage " + std::to_string(v.stage) + ": " + vec(v.p_at) + " and " + vec(v.q_at));
    for (const auto& f : v.certificate.flow)
        r.lines.push_back("  " + f.amount.str() + " unit(s) of type " + std::to_string(f.q_block + 1) + " onto type " +
                          std::to_string(f.p_block + 1));
    if (levels < wanted)
        r.lines.push_back("depth lowered to " + std::to_string(levels) + " to keep the nest within " + std::to_string(nest_dimension_cap) +
                          " units");
    return r;
}

Report cmd_statpair(const Options& o, const std::vector<Input>& in)
{
    need_files(in, 1, "statpair");
    Report r;
    r.depth = depth_of(o, in[0], 12);
    const StationaryPair p = to_pair(in[0].spec);
    const UnimodularityReport u = unimodularity_check(p);
    const bool square = IntMatrix(p.summation * p.x) == IntMatrix(p.y * p.summation);
    r.verdict = "report";
    r.certificate = {{"y", matrix_json(p.y)}, {"summation", matrix_json(p.summation)}};
    r.details = {{"det_x", to_json(u.det_x)},   {"det_y", to_json(u.det_y)},          {"divides", u.divides},
                 {"x_unimodular", u.x_unimodular}, {"y_unimodular", u.y_unimodular}, {"commuting_square", square}};
    r.lines.push_back("Y = " + to_string(p.y));
    r.lines.push_back("summation = " + to_string(p.summation));
    r.lines.push_back("det X = " + u.det_x.str() + ", det Y = " + u.det_y.str() + ", det Y | det X: " + (u.divides ? "yes" : "no"));
    r.lines.push_back(std::string("unimodular: X ") + (u.x_unimodular ? "yes" : "no") + ", Y " + (u.y_unimodular ? "yes" : "no"));
    r.lines.push_back(std::string("S X = Y S: ") + (square ? "yes" : "no"));
    return r;
}

Report cmd_intermediates(const Options& o, const std::vector<Input>& in)
{
    need_files(in, 1, "intermediates");
    Report r;
    r.depth = depth_of(o, in[0], 4);
    const StationaryPair p = to_pair(in[0].spec);
    if (o.group < 1 || o.group > p.groups()) throw InputError("--group must lie in 1.." + std::to_string(p.groups()));
    std::vector<IntermediateSpec> specs;
    try {
        specs = enumerate_intermediates(p, o.group - 1);
    } catch (const std::length_error& e) {
        throw InputError(e.what());
    }
    const auto classes = collapse_detect(p, specs, r.depth);
    r.verdict = "report";
    Json js = Json::array();
    for (const auto& s : specs) {
        Json ps = Json::array();
        for (auto [a, b] : s.pairs()) ps.push_back({a + 1, b + 1});
        js.push_back(ps);
    }
    Json cs = Json::array();
    for (const auto& c : classes) {
        Json m = Json::array();
        for (int i : c) m.push_back(i + 1);
        cs.push_back(m);
    }
    r.details = {{"group", o.group}, {"count", specs.size()}, {"specs", js}, {"classes", cs}};
    r.lines.push_back(std::to_string(specs.size()) + " preorders on group " + std::to_string(o.group));
    r.lines.push_back(std::to_string(classes.size()) + " distinct generated algebras through stage " + std::to_string(r.depth) +
                      " (equality certified only to that stage)");
    if (o.list)
        for (size_t i = 0; i < specs.size(); ++i) r.lines.push_back("  " + std::to_string(i + 1) + ": " + specs[i].describe());
    return r;
}

Report cmd_iso(const Options& o, const std::vector<Input>& in)
{
    need_files(in, 2, "iso");
    Report r;
    r.depth = o.depth ? *o.depth : 4;
    const StageSystem a = to_stage_system(in[0].spec, r.depth + 1), b = to_stage_system(in[1].spec, r.depth + 1);
    if (!a.nest || !b.nest) throw InputError("iso takes two ordered-diagram files");
    IsoOptions opt;
    opt.rounds = o.rounds;
    if (o.budget > 0) opt.node_budget = o.budget;
    const IsoResult res = iso_search(a, b, r.depth, opt);
    r.verdict = res.status == SearchStatus::found ? "found" : res.status == SearchStatus::none ? "exhausted" : "inconclusive";
    r.details = {{"nodes", res.nodes}, {"rounds", opt.rounds}};
    r.lines.push_back(res.reason.empty() ? r.verdict : res.reason);
    r.lines.push_back("search nodes: " + std::to_string(res.nodes));
    if (res.certificate) {
        r.certificate = to_json(*res.certificate);
        for (const auto& s : res.certificate->steps)
            r.lines.push_back(std::string("  ") + (s.forward ? "first" : "second") + " stage " + std::to_string(s.from_stage) + " -> " +
                              (s.forward ? "second" : "first") + " stage " + std::to_string(s.to_stage));
    }
    return r;
}

Json path_json(const SpecialPointResult& s)
{
    Json a = Json::array();
    for (auto [v, p] : s.path) a.push_back({{"vertex", v + 1}, {"position", p + 1}});
    return a;
}

Report cmd_distinguish(const Options& o, const std::vector<Input>& in)
{
    need_files(in, 2, "distinguish");
    Report r;
    r.depth = o.depth ? *o.depth : 12;
    const SpecialPointResult x = special_point_exists(to_ordered(in[0].spec, r.depth + 1), r.depth);
    const SpecialPointResult y = special_point_exists(to_ordered(in[1].spec, r.depth + 1), r.depth);
    const bool decided = x.kind != SpecialPointResult::inconclusive && y.kind != SpecialPointResult::inconclusive;
    r.verdict = !decided ? "inconclusive" : x.kind != y.kind ? "distinguished" : "not distinguished";
    r.certificate = {{"first", {{"special_point", to_string(x.kind)}, {"witness", path_json(x)}}},
                     {"second", {{"special_point", to_string(y.kind)}, {"witness", path_json(y)}}}};
    r.lines.push_back("special point: " + to_string(x.kind) + " vs " + to_string(y.kind));
    for (const auto* s : {&x, &y})
        if (!s->reason.empty()) r.lines.push_back("  " + s->reason);
    return r;
}

std::vector<std::vector<int>> parse_diag(const std::string& text)
{
    if (text.empty()) throw InputError("missing --diag (image sets, e.g. 1,2;3,4)");
    std::vector<std::vector<int>> out;
    std::stringstream ss(text);
    std::string set;
    while (std::getline(ss, set, ';')) {
        std::vector<int> s;
        std::stringstream es(set);
        std::string x;
        while (std::getline(es, x, ',')) {
            try {
                size_t used = 0;
                const int v = std::stoi(x, &used);
                if (used != x.size() || v < 1) throw std::invalid_argument(x);
                s.push_back(v - 1);
            } catch (const std::exception&) {
                throw InputError("--diag: '" + x + "' is not a positive index");
            }
        }
        out.push_back(std::move(s));
    }
    return out;
}

Report cmd_embedsearch(const Options& o, const std::vector<Input>& in)
{
    need_files(in, 2, "embedsearch");
    Report r;
    const PreorderAlgebra src = to_fdcsl(in[0].spec), tgt = to_fdcsl(in[1].spec);
    const DiagonalMap diag = parse_diag(o.diag);
    if (static_cast<int>(diag.size()) != src.size())
        throw InputError("--diag needs " + std::to_string(src.size()) + " image sets, got " + std::to_string(diag.size()));
    for (const auto& s : diag)
        for (int t : s)
            if (t >= tgt.size()) throw InputError("--diag: index " + std::to_string(t + 1) + " beyond the target size");
    SearchOptions opt;
    opt.strongly_regular = o.strong;
    if (o.budget > 0) opt.node_budget = o.budget;
    SearchResult res;
    try {
        res = search_regular_embedding(src, tgt, diag, opt);
    } catch (const std::invalid_argument& e) {
        throw InputError(e.what());
    }
    r.verdict = to_string(res.status);
    r.details = {{"nodes", res.nodes}, {"strongly_regular", o.strong}};
    if (res.embedding) r.certificate = to_json(*res.embedding);
    r.lines.push_back(res.reason.empty() ? r.verdict : res.reason);
    r.lines.push_back("search nodes: " + std::to_string(res.nodes));
    return r;
}

}  // namespace

RunResult run(const std::vector<std::string>& args)
{
    RunResult out;
    Options o;
    CLI::App app{"limit algebra order computations", "limord"};
    app.require_subcommand(1);
    const std::vector<std::pair<std::string, std::string>> cmds = {
        {"k0", "ordered K0 of the presented system"},
        {"positive", "decide whether an element is positive"},
        {"order", "decide [a] S [b] in the limit algebra"},
        {"scale", "decide membership in the scale"},
        {"statpair", "derive Y and S for a stationary pair"},
        {"intermediates", "enumerate intermediate algebras"},
        {"iso", "bounded intertwining search between two ordered diagrams"},
        {"distinguish", "compare the special point invariant"},
        {"embedsearch", "search regular embeddings between two fdcsl files"}};
    std::vector<CLI::App*> subs;
    for (const auto& [name, help] : cmds) {
        CLI::App* s = app.add_subcommand(name, help);
        s->add_option("files", o.files, "specification files")->required();
        s->add_flag("--json", o.json, "machine-readable report");
        s->add_flag("--timing", o.timing, "record wall time in the report");
        s->add_option("--depth", o.depth, "stage depth");
        if (name == "positive" || name == "scale") s->add_option("--element", o.element, "stage:v1,v2,...");
        if (name == "order") {
            s->add_option("--a", o.a, "first element, stage:v1,v2,...");
            s->add_option("--b", o.b, "second element, stage:v1,v2,...");
        }
        if (name == "intermediates") {
            s->add_option("--group", o.group, "partition group (1-based)");
            s->add_flag("--list", o.list, "list every preorder");
        }
        if (name == "iso") s->add_option("--rounds", o.rounds, "forward/backward map pairs");
        if (name == "iso" || name == "embedsearch") s->add_option("--budget", o.budget, "search node budget");
        if (name == "embedsearch") {
            s->add_option("--diag", o.diag, "image sets of the source indices, 1-based: 1,2;3,4");
            s->add_flag("--strong", o.strong, "require strong regularity");
        }
        subs.push_back(s);
    }
    if (!args.empty() && !args[0].empty() && args[0][0] != '-') {
        bool known = false;
        for (const auto& c : cmds) known = known || c.first == args[0];
        if (!known) {
            out.exit_code = 1;
            out.err = "limord: unknown command '" + args[0] + "'\n";
            return out;
        }
    }
    std::vector<std::string> argv_store{"limord"};
    argv_store.insert(argv_store.end(), args.begin(), args.end());
    std::vector<char*> argv;
    for (auto& a : argv_store) argv.push_back(a.data());
    std::ostringstream so, se;
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, so, se);
        out.out = so.str();
        out.err = se.str();
        out.exit_code = code == 0 ? 0 : 1;
        return out;
    }
    std::string command;
    for (auto* s : subs)
        if (s->parsed()) command = s->get_name();

    const auto t0 = std::chrono::steady_clock::now();
    Report rep;
    std::vector<Input> inputs;
    try {
        for (const auto& f : o.files) inputs.push_back(load(f));
        if (command == "k0") rep = cmd_k0(o, inputs);
        else if (command == "positive") rep = cmd_positive(o, inputs, false);
        else if (command == "scale") rep = cmd_positive(o, inputs, true);
        else if (command == "order") rep = cmd_order(o, inputs);
        else if (command == "statpair") rep = cmd_statpair(o, inputs);
        else if (command == "intermediates") rep = cmd_intermediates(o, inputs);
        else if (command == "iso") rep = cmd_iso(o, inputs);
        else if (command == "distinguish") rep = cmd_distinguish(o, inputs);
        else rep = cmd_embedsearch(o, inputs);
    } catch (const std::exception& e) {
        out.exit_code = 1;
        out.err = "limord " + command + ": " + e.what() + "\n";
        return out;
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    std::string all;
    for (const auto& i : inputs) all += i.text + '\0';
    out.exit_code = exit_for(rep.verdict);
    if (o.json) {
        Json j;
        j["command"] = command;
        Json files = Json::array();
        for (const auto& i : inputs) files.push_back(i.path);
        j["inputs"] = files;
        j["input_digest"] = sha256_hex(all);
        j["depth"] = rep.depth;
        j["verdict"] = rep.verdict;
        j["certificate"] = rep.certificate;
        j["details"] = rep.details;
        j["wall_time"] = o.timing ? Json(secs) : Json();
        out.out = j.dump(2) + "\n";
    } else {
        std::ostringstream s;
        s << command << ": " << rep.verdict << "\n";
        for (const auto& l : rep.lines) s << l << "\n";
        if (o.timing) s << "wall time " << secs << " s\n";
        out.out = s.str();
    }
    return out;
}

}  // namespace limord
