#include "amazul/kg.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <future>
#include <numeric>
#include <set>
#include <sstream>
#include <tuple>

#include "amazul/text.hpp"

namespace amazul::kg {

namespace {

std::string join(const std::vector<std::string>& tokens, std::size_t from, std::size_t to)
{
    std::string out;
    for (std::size_t i = from; i < to; ++i) {
        if (i > from)
            out += ' ';
        out += tokens[i];
    }
    return out;
}

std::vector<std::string> split_clauses(std::string_view sentence)
{
    std::vector<std::string> out;
    std::string cur;
    for (char c : sentence) {
        if (c == ',' || c == ';' || c == ':' || c == '(' || c == ')') {
            out.push_back(std::move(cur));
            cur.clear();
        } else {
            cur += c;
        }
    }
    out.push_back(std::move(cur));
    return out;
}

bool phrase_at(const std::vector<std::string>& tokens, std::size_t pos, const std::vector<std::string>& phrase)
{
    if (phrase.empty() || pos + phrase.size() > tokens.size())
        return false;
    return std::equal(phrase.begin(), phrase.end(), tokens.begin() + static_cast<std::ptrdiff_t>(pos));
}

// Disjoint-set forest with path halving.
class UnionFind {
  public:
    explicit UnionFind(std::size_t n) : m_parent(n) { std::iota(m_parent.begin(), m_parent.end(), 0); }
    std::size_t find(std::size_t x)
    {
        while (m_parent[x] != x)
            x = m_parent[x] = m_parent[m_parent[x]];
        return x;
    }
    void unite(std::size_t a, std::size_t b)
    {
        a = find(a);
        b = find(b);
        if (a != b)
            m_parent[std::max(a, b)] = std::min(a, b);
    }

  private:
    std::vector<std::size_t> m_parent;
};

}  // namespace

// ---------------------------------------------------------------------------
// Extraction

ExtractionRules ExtractionRules::parse(std::string_view text)
{
    ExtractionRules rules;
    std::istringstream in{std::string(text)};
    std::string line;
    while (std::getline(in, line)) {
        if (auto hash = line.find('#'); hash != std::string::npos)
            line.erase(hash);
        std::string_view l = line;
        constexpr std::string_view opener = "opener:";
        if (l.substr(0, opener.size()) == opener) {
            for (auto& t : text::tokenize(l.substr(opener.size())))
                rules.clause_openers.push_back(std::move(t));
            continue;
        }
        auto tokens = text::tokenize(l);
        if (!tokens.empty())
            rules.verb_phrases.push_back(std::move(tokens));
    }
    return rules;
}

ExtractionRules ExtractionRules::load(const std::filesystem::path& file) { return parse(read_file(file)); }

std::vector<Triple> extract_triples(const lake::Document& document, const ExtractionRules& rules)
{
    std::vector<Triple> out;
    auto sentences = text::split_sentences(document.body);
    for (std::size_t si = 0; si < sentences.size(); ++si) {
        for (const auto& clause : split_clauses(sentences[si].text)) {
            auto tokens = text::tokenize(clause);
            std::size_t start = 0;
            while (start < tokens.size() &&
                   std::find(rules.clause_openers.begin(), rules.clause_openers.end(), tokens[start]) !=
                       rules.clause_openers.end())
                ++start;
            for (std::size_t i = start; i < tokens.size(); ++i) {
                const std::vector<std::string>* best = nullptr;
                for (const auto& v : rules.verb_phrases)
                    if (phrase_at(tokens, i, v) && (!best || v.size() > best->size()))
                        best = &v;
                if (!best)
                    continue;
                std::size_t obj = i + best->size();
                if (i > start && obj < tokens.size())
                    out.push_back({join(tokens, start, i), join(*best, 0, best->size()),
                                   join(tokens, obj, tokens.size()), document.id, si});
                break;
            }
        }
    }
    return out;
}

nlohmann::json to_json(const Triple& t)
{
    return {{"subject", t.subject},
            {"relation", t.relation},
            {"object", t.object},
            {"doc_id", t.doc_id},
            {"sentence_index", t.sentence_index}};
}

// ---------------------------------------------------------------------------
// Embeddings

void Embeddings::add(const std::string& entity, Vector vector)
{
    if (vector.empty())
        throw InvalidArgument("empty embedding for '" + entity + "'");
    if (m_dim != 0 && vector.size() != m_dim)
        throw InvalidArgument("embedding for '" + entity + "' has dimension " + std::to_string(vector.size()) +
                              ", expected " + std::to_string(m_dim));
    if (std::all_of(vector.begin(), vector.end(), [](double x) { return x == 0.0; }))
        throw InvalidArgument("zero embedding for '" + entity + "'");
    m_dim = vector.size();
    m_vectors[entity] = std::move(vector);
}

const Vector* Embeddings::find(const std::string& entity) const
{
    auto it = m_vectors.find(entity);
    return it == m_vectors.end() ? nullptr : &it->second;
}

Embeddings Embeddings::load(const std::filesystem::path& file)
{
    Embeddings e;
    std::istringstream in(read_file(file));
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty())
            continue;
        auto tab = line.find('\t');
        if (tab == std::string::npos)
            throw ParseError(line_no, "expected entity, TAB, vector");
        Vector v;
        std::istringstream vs(line.substr(tab + 1));
        std::string num;
        while (vs >> num) {
            try {
                v.push_back(std::stod(num));
            } catch (const std::exception&) {
                throw ParseError(line_no, "not a number: '" + num + "'");
            }
        }
        try {
            e.add(text::normalize_whitespace(line.substr(0, tab)), std::move(v));
        } catch (const InvalidArgument& err) {
            throw ParseError(line_no, err.what());
        }
    }
    return e;
}

void Embeddings::save(const std::filesystem::path& file) const
{
    std::ofstream out(file);
    if (!out)
        throw Error("cannot write " + file.string());
    out.precision(17);
    for (const auto& [entity, v] : m_vectors) {
        out << entity << '\t';
        for (std::size_t i = 0; i < v.size(); ++i)
            out << (i ? " " : "") << v[i];
        out << '\n';
    }
}

Embeddings cooccurrence_embeddings(std::span<const lake::Document> documents,
                                   const std::vector<std::string>& entities, std::size_t window)
{
    std::vector<text::TokenStream> streams;
    std::set<std::string> vocab_set;
    for (const auto& d : documents) {
        streams.push_back(text::tokenize(d.body));
        vocab_set.insert(streams.back().begin(), streams.back().end());
    }
    std::map<std::string, std::size_t> vocab;
    for (const auto& w : vocab_set)
        vocab.emplace(w, vocab.size());

    Embeddings out;
    if (vocab.empty())
        return out;
    for (const auto& entity : std::set<std::string>(entities.begin(), entities.end())) {
        auto phrase = text::tokenize(entity);
        if (phrase.empty())
            continue;
        Vector v(vocab.size(), 0.0);
        bool any = false;
        for (const auto& s : streams) {
            for (std::size_t i = 0; i + phrase.size() <= s.size(); ++i) {
                if (!phrase_at(s, i, phrase))
                    continue;
                std::size_t lo = i >= window ? i - window : 0;
                std::size_t hi = std::min(s.size(), i + phrase.size() + window);
                for (std::size_t j = lo; j < hi; ++j) {
                    if (j >= i && j < i + phrase.size())
                        continue;
                    v[vocab.at(s[j])] += 1.0;
                    any = true;
                }
            }
        }
        if (any)
            out.add(entity, std::move(v));
    }
    return out;
}

double cosine(const Vector& a, const Vector& b)
{
    if (a.size() != b.size())
        throw InvalidArgument("embedding dimension mismatch: " + std::to_string(a.size()) + " vs " +
                              std::to_string(b.size()));
    double dot = 0, na = 0, nb = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        dot += a[i] * b[i];
        na += a[i] * a[i];
        nb += b[i] * b[i];
    }
    if (na == 0 || nb == 0)
        return 0.0;
    return dot / (std::sqrt(na) * std::sqrt(nb));
}

// ---------------------------------------------------------------------------
// Merge, narrow, link

DocumentGraph merge_synonyms(std::vector<Triple> triples, const Embeddings& embeddings, double tau_syn)
{
    DocumentGraph g;
    if (!triples.empty())
        g.doc_id = triples.front().doc_id;
    for (const auto& t : triples) {
        if (t.doc_id != g.doc_id)
            throw InvalidArgument("merge_synonyms expects triples from one document");
        ++g.frequency[t.subject];
        ++g.frequency[t.object];
    }

    std::vector<std::string> entities;
    for (const auto& [e, _] : g.frequency)
        entities.push_back(e);

    UnionFind uf(entities.size());
    for (std::size_t i = 0; i < entities.size(); ++i) {
        const Vector* a = embeddings.find(entities[i]);
        if (!a)
            continue;
        for (std::size_t j = i + 1; j < entities.size(); ++j) {
            const Vector* b = embeddings.find(entities[j]);
            if (b && cosine(*a, *b) >= tau_syn)
                uf.unite(i, j);
        }
    }

    // Roots are the smallest index in their set, and entities are sorted, so
    // iterating in order yields groups ordered by first member.
    std::map<std::size_t, std::size_t> root_to_group;
    for (std::size_t i = 0; i < entities.size(); ++i) {
        auto root = uf.find(i);
        auto [it, inserted] = root_to_group.emplace(root, g.groups.size());
        if (inserted)
            g.groups.emplace_back();
        g.groups[it->second].push_back(entities[i]);
        g.group_of[entities[i]] = it->second;
    }

    for (std::size_t i = 0; i < triples.size(); ++i)
        g.edges.push_back({g.group_of.at(triples[i].subject), triples[i].relation, g.group_of.at(triples[i].object), i});
    g.triples = std::move(triples);
    return g;
}

NarrowGraph narrow_graph(const DocumentGraph& graph)
{
    NarrowGraph out;
    out.doc_id = graph.doc_id;
    std::vector<std::string> rep(graph.groups.size());
    for (std::size_t gi = 0; gi < graph.groups.size(); ++gi) {
        const std::string* best = nullptr;
        std::size_t best_freq = 0;
        for (const auto& m : graph.groups[gi]) {
            auto it = graph.frequency.find(m);
            std::size_t f = it == graph.frequency.end() ? 0 : it->second;
            if (!best || f > best_freq || (f == best_freq && m < *best)) {
                best = &m;
                best_freq = f;
            }
        }
        rep[gi] = *best;
        out.nodes.push_back(*best);
    }
    std::sort(out.nodes.begin(), out.nodes.end());

    std::map<std::tuple<std::string, std::string, std::string>, std::set<Provenance>> merged;
    for (const auto& e : graph.edges) {
        const auto& t = graph.triples.at(e.triple);
        merged[{rep[e.subject], e.relation, rep[e.object]}].insert({t.doc_id, t.sentence_index});
    }
    for (auto& [key, prov] : merged) {
        auto& [s, r, o] = key;
        out.edges.push_back({s, r, o, std::vector<Provenance>(prov.begin(), prov.end())});
    }
    return out;
}

KnowledgeGraph link_graphs(std::span<const NarrowGraph> graphs, const Embeddings& embeddings, double tau_link)
{
    KnowledgeGraph kg;
    std::set<std::string> seen_docs;
    std::vector<std::size_t> graph_of_node;
    for (std::size_t gi = 0; gi < graphs.size(); ++gi) {
        const auto& g = graphs[gi];
        if (!seen_docs.insert(g.doc_id).second)
            throw InvalidArgument("two graphs for document '" + g.doc_id + "'");
        std::map<std::string, std::size_t> index;
        for (const auto& n : g.nodes) {
            index[n] = kg.nodes.size();
            kg.nodes.push_back({g.doc_id, n});
            graph_of_node.push_back(gi);
        }
        for (const auto& e : g.edges)
            kg.edges.push_back({index.at(e.subject), e.relation, index.at(e.object), e.provenance});
    }
    for (std::size_t i = 0; i < kg.nodes.size(); ++i) {
        const Vector* a = embeddings.find(kg.nodes[i].entity);
        if (!a)
            continue;
        for (std::size_t j = i + 1; j < kg.nodes.size(); ++j) {
            if (graph_of_node[i] == graph_of_node[j])
                continue;
            const Vector* b = embeddings.find(kg.nodes[j].entity);
            if (!b)
                continue;
            double sim = cosine(*a, *b);
            if (sim >= tau_link)
                kg.bridges.push_back({i, j, sim});
        }
    }
    return kg;
}

KnowledgeGraph build_knowledge_graph(std::span<const lake::Document> documents, const ExtractionRules& rules,
                                     const KgConfig& config, const Embeddings* embeddings)
{
    // Extraction is per document and independent.
    std::vector<std::future<std::vector<Triple>>> jobs;
    for (const auto& d : documents)
        jobs.push_back(std::async(std::launch::async, [&d, &rules] { return extract_triples(d, rules); }));
    std::vector<std::vector<Triple>> per_doc;
    for (auto& j : jobs)
        per_doc.push_back(j.get());

    Embeddings owned;
    if (!embeddings) {
        std::vector<std::string> entities;
        for (const auto& ts : per_doc)
            for (const auto& t : ts) {
                entities.push_back(t.subject);
                entities.push_back(t.object);
            }
        owned = cooccurrence_embeddings(documents, entities, config.window);
        embeddings = &owned;
    }

    std::vector<NarrowGraph> graphs;
    for (std::size_t i = 0; i < per_doc.size(); ++i) {
        if (per_doc[i].empty())
            continue;
        graphs.push_back(narrow_graph(merge_synonyms(std::move(per_doc[i]), *embeddings, config.tau_syn)));
    }
    return link_graphs(graphs, *embeddings, config.tau_link);
}

// ---------------------------------------------------------------------------
// Serialization

std::string KnowledgeGraph::to_jsonl() const
{
    std::string out;
    auto emit = [&](const nlohmann::json& j) {
        out += j.dump();
        out += '\n';
    };
    for (const auto& n : nodes)
        emit({{"record", "node"}, {"id", n.key()}, {"doc_id", n.doc_id}, {"entity", n.entity}});
    for (const auto& e : edges) {
        nlohmann::json prov = nlohmann::json::array();
        for (const auto& p : e.provenance)
            prov.push_back({{"doc_id", p.doc_id}, {"sentence_index", p.sentence_index}});
        emit({{"record", "edge"},
              {"subject", nodes.at(e.subject).key()},
              {"relation", e.relation},
              {"object", nodes.at(e.object).key()},
              {"provenance", prov}});
    }
    for (const auto& b : bridges)
        emit({{"record", "bridge"}, {"a", nodes.at(b.a).key()}, {"b", nodes.at(b.b).key()}, {"similarity", b.similarity}});
    return out;
}

KnowledgeGraph KnowledgeGraph::from_jsonl(std::string_view text)
{
    KnowledgeGraph kg;
    std::map<std::string, std::size_t> index;
    std::istringstream in{std::string(text)};
    std::string line;
    std::size_t line_no = 0;
    auto node = [&](const nlohmann::json& j, const char* field) {
        auto it = index.find(j.at(field).get<std::string>());
        if (it == index.end())
            throw ParseError(line_no, std::string("unknown node in '") + field + "'");
        return it->second;
    };
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty())
            continue;
        try {
            auto j = nlohmann::json::parse(line);
            auto kind = j.at("record").get<std::string>();
            if (kind == "node") {
                Node n{j.at("doc_id").get<std::string>(), j.at("entity").get<std::string>()};
                index[n.key()] = kg.nodes.size();
                kg.nodes.push_back(std::move(n));
            } else if (kind == "edge") {
                GraphEdge e;
                e.subject = node(j, "subject");
                e.relation = j.at("relation").get<std::string>();
                e.object = node(j, "object");
                for (const auto& p : j.at("provenance"))
                    e.provenance.push_back({p.at("doc_id").get<std::string>(), p.at("sentence_index").get<std::size_t>()});
                kg.edges.push_back(std::move(e));
            } else if (kind == "bridge") {
                kg.bridges.push_back({node(j, "a"), node(j, "b"), j.at("similarity").get<double>()});
            } else {
                throw ParseError(line_no, "unknown record type '" + kind + "'");
            }
        } catch (const nlohmann::json::exception& e) {
            throw ParseError(line_no, e.what());
        }
    }
    return kg;
}

}  // namespace amazul::kg
