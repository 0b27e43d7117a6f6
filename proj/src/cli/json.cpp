#include "limord/cli.hpp"

#include <openssl/evp.h>

#include <climits>

namespace limord {

Json to_json(const BigInt& x)
{
    if (x >= LONG_MIN && x <= LONG_MAX) return x.convert_to<long>();
    return x.str();
}

BigInt big_from_json(const Json& j)
{
    if (j.is_string()) return BigInt(j.get<std::string>());
    return BigInt(j.get<long>());
}

Json to_json(const IntVector& v)
{
    Json a = Json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(to_json(v(i)));
    return a;
}

IntVector vector_from_json(const Json& j)
{
    IntVector v(static_cast<Eigen::Index>(j.size()));
    for (size_t i = 0; i < j.size(); ++i) v(static_cast<Eigen::Index>(i)) = big_from_json(j[i]);
    return v;
}

Json to_json(const OrderCertificate& c)
{
    Json a = Json::array();
    for (const auto& f : c.flow) a.push_back({{"p_block", f.p_block + 1}, {"q_block", f.q_block + 1}, {"amount", to_json(f.amount)}});
    return a;
}

OrderCertificate order_certificate_from_json(const Json& j)
{
    OrderCertificate c;
    for (const auto& f : j) c.flow.push_back({f.at("p_block").get<int>() - 1, f.at("q_block").get<int>() - 1, big_from_json(f.at("amount"))});
    return c;
}

Json to_json(const LimitOrderVerdict& v)
{
    Json j;
    j["verdict"] = to_string(v.verdict);
    j["method"] = v.method;
    j["stage"] = v.stage;
    j["p_at"] = to_json(v.p_at);
    j["q_at"] = to_json(v.q_at);
    j["flow"] = to_json(v.certificate);
    j["reason"] = v.reason;
    return j;
}

LimitOrderVerdict limit_verdict_from_json(const Json& j)
{
    LimitOrderVerdict v;
    const std::string s = j.at("verdict").get<std::string>();
    v.verdict = s == "yes" ? Verdict::yes : s == "no" ? Verdict::no : Verdict::inconclusive;
    v.method = j.at("method").get<std::string>();
    v.stage = j.at("stage").get<int>();
    v.p_at = vector_from_json(j.at("p_at"));
    v.q_at = vector_from_json(j.at("q_at"));
    v.certificate = order_certificate_from_json(j.at("flow"));
    v.reason = j.value("reason", "");
    return v;
}

Json to_json(const PositivityVerdict& v)
{
    Json j;
    j["verdict"] = to_string(v.kind);
    j["method"] = v.method;
    j["stage"] = v.stage ? Json(*v.stage) : Json();
    j["pushed"] = v.pushed ? to_json(*v.pushed) : Json();
    j["depth"] = v.depth;
    j["reason"] = v.reason;
    return j;
}

PositivityVerdict positivity_from_json(const Json& j)
{
    PositivityVerdict v;
    const std::string k = j.at("verdict").get<std::string>();
    for (auto kind : {PositivityVerdict::positive, PositivityVerdict::not_positive, PositivityVerdict::zero, PositivityVerdict::inconclusive})
        if (to_string(kind) == k) v.kind = kind;
    v.method = j.at("method").get<std::string>();
    if (!j.at("stage").is_null()) v.stage = j.at("stage").get<int>();
    if (!j.at("pushed").is_null()) v.pushed = vector_from_json(j.at("pushed"));
    v.depth = j.at("depth").get<int>();
    v.reason = j.value("reason", "");
    return v;
}

Json to_json(const MatrixUnitEmbedding& e)
{
    Json img = Json::array();
    for (const auto& set : e.image) {
        Json s = Json::array();
        for (int t : set) s.push_back(t + 1);
        img.push_back(s);
    }
    Json over = Json::array();
    for (const auto& [unit, pairs] : e.pairing_override) {
        Json ps = Json::array();
        for (auto [a, b] : pairs) ps.push_back({a + 1, b + 1});
        over.push_back({{"unit", {unit.first + 1, unit.second + 1}}, {"pairs", ps}});
    }
    return {{"image", img}, {"pairings", over}};
}

MatrixUnitEmbedding embedding_from_json(const Json& j, const PreorderAlgebra& source, const PreorderAlgebra& target)
{
    MatrixUnitEmbedding e{source, target, {}, {}};
    for (const auto& set : j.at("image")) {
        std::vector<int> s;
        for (const auto& t : set) s.push_back(t.get<int>() - 1);
        e.image.push_back(std::move(s));
    }
    for (const auto& o : j.at("pairings")) {
        std::vector<IndexPair> ps;
        for (const auto& p : o.at("pairs")) ps.emplace_back(p[0].get<int>() - 1, p[1].get<int>() - 1);
        e.pairing_override[{o.at("unit")[0].get<int>() - 1, o.at("unit")[1].get<int>() - 1}] = std::move(ps);
    }
    return e;
}

Json to_json(const IsoCertificate& c)
{
    Json a = Json::array();
    for (const auto& s : c.steps)
        a.push_back({{"direction", s.forward ? "first to second" : "second to first"},
                     {"from_stage", s.from_stage},
                     {"to_stage", s.to_stage},
                     {"map", to_json(s.map)}});
    return a;
}

IsoCertificate iso_certificate_from_json(const Json& j, const StageSystem& a, const StageSystem& b)
{
    if (!a.nest || !b.nest) throw std::invalid_argument("intertwining certificates need nest systems");
    IsoCertificate c;
    for (const auto& s : j) {
        IsoStep st;
        st.forward = s.at("direction").get<std::string>() == "first to second";
        st.from_stage = s.at("from_stage").get<int>();
        st.to_stage = s.at("to_stage").get<int>();
        const NestSystem& from = st.forward ? *a.nest : *b.nest;
        const NestSystem& to = st.forward ? *b.nest : *a.nest;
        if (st.from_stage < 0 || st.to_stage < 0 || st.from_stage >= static_cast<int>(from.stages.size()) ||
            st.to_stage >= static_cast<int>(to.stages.size()))
            throw std::out_of_range("intertwining certificate: stage out of range");
        st.map = embedding_from_json(s.at("map"), from.stages[static_cast<size_t>(st.from_stage)],
                                     to.stages[static_cast<size_t>(st.to_stage)]);
        c.steps.push_back(std::move(st));
    }
    return c;
}

std::string sha256_hex(const std::string& bytes)
{
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    EVP_MD_CTX* ctx = EVP_MD_CTX_new();
    if (!ctx || EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr) != 1 || EVP_DigestUpdate(ctx, bytes.data(), bytes.size()) != 1 ||
        EVP_DigestFinal_ex(ctx, md, &len) != 1) {
        EVP_MD_CTX_free(ctx);
        throw std::runtime_error("sha256 failed");
    }
    EVP_MD_CTX_free(ctx);
    static const char* hex = "0123456789abcdef";
    std::string out;
    for (unsigned int i = 0; i < len; ++i) {
        out += hex[md[i] >> 4];
        out += hex[md[i] & 15];
    }
    return out;
}

}  // namespace limord
