#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "amazul/common.hpp"

namespace amazul::nl2sql {

/// Question matches no grammar production; callers fall back to open QA.
class Untranslatable : public Error {
  public:
    using Error::Error;
};

enum class ColumnType { text, integer, real };

struct Column {
    std::string name;
    ColumnType type = ColumnType::text;
    std::vector<std::string> synonyms;
};

struct Table {
    std::string name;
    std::vector<std::string> synonyms;
    std::vector<Column> columns;

    const Column* column(std::string_view name) const;
};

/// Tables, columns and the surface forms that refer to them.
///
/// Text format, one declaration per line (`#` starts a comment):
///
///     table vessels : vessels, vessel, ships
///     column vessels.length_m real : length, comprimento
///
/// Table synonyms are unique across the schema; column synonyms are unique
/// within their table.
struct DomainSchema {
    std::vector<Table> tables;

    const Table* table(std::string_view name) const;

    static DomainSchema parse(std::string_view text);
    static DomainSchema load(const std::filesystem::path& file);
};

using Value = std::variant<std::monostate, std::int64_t, double, std::string>;

std::string value_to_string(const Value& value);

/// Rows per table, typed by the schema. Loaded from `<dir>/<table>.jsonl`.
class TableStore {
  public:
    explicit TableStore(DomainSchema schema);

    static TableStore load(const std::filesystem::path& dir, DomainSchema schema);

    /// Row given as column name -> JSON-ish value; missing columns become null.
    void insert(const std::string& table, const std::map<std::string, Value>& row);

    const DomainSchema& schema() const { return m_schema; }
    const std::vector<std::vector<Value>>& rows(const std::string& table) const;
    std::size_t total_rows() const;

  private:
    DomainSchema m_schema;
    std::map<std::string, std::vector<std::vector<Value>>> m_rows;
};

enum class QueryShape { count, select_where, aggregate, list };

std::string_view to_string(QueryShape shape);

struct SqlQuery {
    std::string text;
    QueryShape shape = QueryShape::list;
    std::string production;
};

/// One element of a question pattern.
struct PatternElement {
    enum class Kind { literal, wildcard, table, column, value };
    Kind kind = Kind::literal;
    std::vector<std::string> alternatives;  ///< folded literal tokens
    bool optional = false;
};

/// A question shape and the SQL it produces.
///
/// Grammar file lines read `name | shape | pattern | template`. Pattern words
/// are literal tokens (`a|b` for alternatives, `?a|b` when optional), `*` for
/// any run of tokens, and the slots `<table>`, `<column>`, `<value>`.
/// Templates may use `{table}`, `{column}`, `{display}` (the table's first
/// column), `{value}` and `{value_column}` (the text column holding the value).
struct Production {
    std::string name;
    QueryShape shape = QueryShape::list;
    std::vector<PatternElement> pattern;
    std::string sql_template;
};

struct Grammar {
    std::vector<Production> productions;

    static Grammar parse(std::string_view text);
    static Grammar load(const std::filesystem::path& file);
};

enum class QuestionType { sql, open };

std::string_view to_string(QuestionType type);

std::vector<std::string> default_cue_phrases();

/// sql iff the question has a cue phrase and mentions a table or column.
QuestionType classify_question(std::string_view question, const DomainSchema& schema,
                               const std::vector<std::string>& cue_phrases = default_cue_phrases());

/// First production (in grammar order) that matches the whole question and
/// whose slots resolve against the schema and stored values.
SqlQuery translate(std::string_view question, const Grammar& grammar, const TableStore& store);

// The SQL subset the translator emits:
//   SELECT ( * | COUNT(*) | AGG(col) | col {, col} ) FROM table [WHERE col = literal] [;]
struct SelectStatement {
    enum class Aggregate { none, count, max, min, avg, sum };
    Aggregate aggregate = Aggregate::none;
    std::vector<std::string> columns;  ///< empty with Aggregate::count means COUNT(*)
    bool star = false;
    std::string table;
    std::optional<std::pair<std::string, Value>> where;
};

/// Throws InvalidArgument on anything outside the subset.
SelectStatement parse_sql(std::string_view sql);

struct ResultTable {
    std::vector<std::string> columns;
    std::vector<std::vector<Value>> rows;
    bool null_aggregate = false;  ///< aggregate over zero rows
};

/// Rows ordered by the first column ascending. Unknown names throw NotFound.
ResultTable execute(std::string_view sql, const TableStore& store);
inline ResultTable execute(const SqlQuery& query, const TableStore& store)
{
    return execute(query.text, store);
}

std::string render_result(const ResultTable& result, Language language);

/// Schema, grammar, store and cue phrases loaded together.
class Engine {
  public:
    Engine(Grammar grammar, TableStore store, std::vector<std::string> cue_phrases = default_cue_phrases());

    /// Expects `schema.txt`, `grammar.txt` and `store/` under `dir`.
    static Engine load(const std::filesystem::path& dir);

    QuestionType classify(std::string_view question) const;
    SqlQuery translate(std::string_view question) const;
    ResultTable execute(const SqlQuery& query) const;

    const DomainSchema& schema() const { return m_store.schema(); }
    const Grammar& grammar() const { return m_grammar; }
    const TableStore& store() const { return m_store; }

  private:
    Grammar m_grammar;
    TableStore m_store;
    std::vector<std::string> m_cues;
};

}  // namespace amazul::nl2sql
