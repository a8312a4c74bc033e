#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "amazul/datalake.hpp"

namespace amazul::kg {

struct Triple {
    std::string subject;
    std::string relation;
    std::string object;
    std::string doc_id;
    std::size_t sentence_index = 0;

    bool operator==(const Triple&) const = default;
};

/// Verb phrases that separate subject from object, plus clause-initial words
/// (conjunctions) dropped before matching.
struct ExtractionRules {
    std::vector<std::vector<std::string>> verb_phrases;  ///< folded tokens
    std::vector<std::string> clause_openers;

    /// One verb phrase per line; `#` comments. Lines starting with `opener:`
    /// list clause openers instead.
    static ExtractionRules parse(std::string_view text);
    static ExtractionRules load(const std::filesystem::path& file);
};

/// One triple per clause: the leftmost verb phrase (longest match at that
/// position) splits the clause; both sides must be non-empty. Clauses are
/// delimited by sentence ends and `, ; : ( )`.
std::vector<Triple> extract_triples(const lake::Document& document, const ExtractionRules& rules);

using Vector = std::vector<double>;

/// Entity -> vector, one uniform dimension.
class Embeddings {
  public:
    Embeddings() = default;

    /// Throws InvalidArgument on dimension mismatch or a zero vector.
    void add(const std::string& entity, Vector vector);
    const Vector* find(const std::string& entity) const;
    std::size_t dimension() const { return m_dim; }
    std::size_t size() const { return m_vectors.size(); }
    const std::map<std::string, Vector>& all() const { return m_vectors; }

    /// Line format: entity, TAB, whitespace-separated reals.
    static Embeddings load(const std::filesystem::path& file);
    void save(const std::filesystem::path& file) const;

  private:
    std::size_t m_dim = 0;
    std::map<std::string, Vector> m_vectors;
};

/// Counts of context tokens within `window` positions of each occurrence of
/// the entity phrase, over all documents. Entities never seen in context are
/// left out.
Embeddings cooccurrence_embeddings(std::span<const lake::Document> documents,
                                   const std::vector<std::string>& entities, std::size_t window);

/// Throws InvalidArgument on a dimension mismatch.
double cosine(const Vector& a, const Vector& b);

struct GroupedEdge {
    std::size_t subject = 0;  ///< group index
    std::string relation;
    std::size_t object = 0;
    std::size_t triple = 0;  ///< index into DocumentGraph::triples
};

/// One document's triples with entities partitioned into synonym groups.
struct DocumentGraph {
    std::string doc_id;
    std::vector<Triple> triples;
    std::vector<std::vector<std::string>> groups;  ///< each sorted; groups ordered by first member
    std::map<std::string, std::size_t> group_of;
    std::map<std::string, std::size_t> frequency;  ///< occurrences as subject or object
    std::vector<GroupedEdge> edges;
};

/// Groups entities whose pairwise cosine is >= tau (transitive closure).
/// Entities without an embedding stay singletons. Triples must share a doc id.
DocumentGraph merge_synonyms(std::vector<Triple> triples, const Embeddings& embeddings, double tau_syn);

struct Provenance {
    std::string doc_id;
    std::size_t sentence_index = 0;

    auto operator<=>(const Provenance&) const = default;
};

struct Edge {
    std::string subject;
    std::string relation;
    std::string object;
    std::vector<Provenance> provenance;
};

/// Graph of one document after each synonym group collapsed to one entity.
struct NarrowGraph {
    std::string doc_id;
    std::vector<std::string> nodes;  ///< sorted
    std::vector<Edge> edges;         ///< sorted by (subject, relation, object)
};

/// Representative = most frequent member, ties to the lexicographically smallest.
NarrowGraph narrow_graph(const DocumentGraph& graph);

struct Node {
    std::string doc_id;
    std::string entity;

    std::string key() const { return doc_id + "/" + entity; }
    auto operator<=>(const Node&) const = default;
};

struct GraphEdge {
    std::size_t subject = 0;  ///< node index
    std::string relation;
    std::size_t object = 0;
    std::vector<Provenance> provenance;
};

struct Bridge {
    std::size_t a = 0;  ///< node index, a < b
    std::size_t b = 0;
    double similarity = 0.0;
};

struct KnowledgeGraph {
    std::vector<Node> nodes;
    std::vector<GraphEdge> edges;
    std::vector<Bridge> bridges;

    /// JSON lines: node, edge and bridge records.
    std::string to_jsonl() const;
    static KnowledgeGraph from_jsonl(std::string_view text);
};

/// Union of the per-document graphs plus bridges between nodes of distinct
/// documents whose cosine is >= tau. Nodes never merge across documents.
KnowledgeGraph link_graphs(std::span<const NarrowGraph> graphs, const Embeddings& embeddings, double tau_link);

struct KgConfig {
    double tau_syn = 0.85;
    double tau_link = 0.80;
    std::size_t window = 3;
};

/// Extract, merge, narrow and link. Uses co-occurrence embeddings from the
/// documents themselves unless `embeddings` is given.
KnowledgeGraph build_knowledge_graph(std::span<const lake::Document> documents, const ExtractionRules& rules,
                                     const KgConfig& config, const Embeddings* embeddings = nullptr);

nlohmann::json to_json(const Triple& t);

}  // namespace amazul::kg
