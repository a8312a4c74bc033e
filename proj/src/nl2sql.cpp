#include "amazul/nl2sql.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <functional>
#include <set>
#include <sstream>

#include <json.hpp>

#include "amazul/text.hpp"

namespace amazul::nl2sql {

namespace {

std::string_view trim(std::string_view s)
{
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front())))
        s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back())))
        s.remove_suffix(1);
    return s;
}

std::vector<std::string_view> split(std::string_view s, char sep)
{
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        auto pos = s.find(sep, start);
        out.push_back(trim(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start)));
        if (pos == std::string_view::npos)
            break;
        start = pos + 1;
    }
    return out;
}

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

std::string folded_phrase(std::string_view text)
{
    auto tokens = text::tokenize(text);
    return join(tokens, 0, tokens.size());
}

ColumnType parse_column_type(std::string_view s, std::size_t line)
{
    if (s == "text")
        return ColumnType::text;
    if (s == "integer")
        return ColumnType::integer;
    if (s == "real")
        return ColumnType::real;
    throw ParseError(line, "unknown column type '" + std::string(s) + "'");
}

QueryShape parse_shape(std::string_view s, std::size_t line)
{
    if (s == "count")
        return QueryShape::count;
    if (s == "select-where")
        return QueryShape::select_where;
    if (s == "aggregate")
        return QueryShape::aggregate;
    if (s == "list")
        return QueryShape::list;
    throw ParseError(line, "unknown query shape '" + std::string(s) + "'");
}

bool is_numeric(ColumnType t) { return t != ColumnType::text; }

}  // namespace

// ---------------------------------------------------------------------------
// Schema

const Column* Table::column(std::string_view name) const
{
    for (const auto& c : columns)
        if (c.name == name)
            return &c;
    return nullptr;
}

const Table* DomainSchema::table(std::string_view name) const
{
    for (const auto& t : tables)
        if (t.name == name)
            return &t;
    return nullptr;
}

DomainSchema DomainSchema::parse(std::string_view text)
{
    DomainSchema schema;
    std::set<std::string> table_synonyms;
    std::map<std::string, std::set<std::string>> column_synonyms;

    auto parse_synonyms = [](std::string_view list) {
        std::vector<std::string> out;
        for (auto s : split(list, ','))
            if (!s.empty())
                out.push_back(folded_phrase(s));
        return out;
    };

    std::size_t line_no = 0;
    std::istringstream in{std::string(text)};
    std::string raw;
    while (std::getline(in, raw)) {
        ++line_no;
        std::string_view line = raw;
        if (auto hash = line.find('#'); hash != std::string_view::npos)
            line = line.substr(0, hash);
        line = trim(line);
        if (line.empty())
            continue;

        auto colon = line.find(':');
        std::string_view head = trim(line.substr(0, colon));
        std::string_view syn_list = colon == std::string_view::npos ? std::string_view{} : line.substr(colon + 1);

        std::istringstream hs{std::string(head)};
        std::string keyword, name, type;
        hs >> keyword >> name >> type;

        if (keyword == "table") {
            if (name.empty() || !type.empty())
                throw ParseError(line_no, "expected 'table <name> : synonyms'");
            if (schema.table(name))
                throw ParseError(line_no, "duplicate table '" + name + "'");
            Table t;
            t.name = name;
            t.synonyms = parse_synonyms(syn_list);
            for (const auto& s : t.synonyms)
                if (!table_synonyms.insert(s).second)
                    throw ParseError(line_no, "table synonym '" + s + "' is ambiguous");
            schema.tables.push_back(std::move(t));
        } else if (keyword == "column") {
            auto dot = name.find('.');
            if (dot == std::string::npos || type.empty())
                throw ParseError(line_no, "expected 'column <table>.<name> <type> : synonyms'");
            std::string tname = name.substr(0, dot);
            auto it = std::find_if(schema.tables.begin(), schema.tables.end(),
                                   [&](const Table& t) { return t.name == tname; });
            if (it == schema.tables.end())
                throw ParseError(line_no, "column of undeclared table '" + tname + "'");
            Column c;
            c.name = name.substr(dot + 1);
            c.type = parse_column_type(type, line_no);
            c.synonyms = parse_synonyms(syn_list);
            if (it->column(c.name))
                throw ParseError(line_no, "duplicate column '" + name + "'");
            for (const auto& s : c.synonyms)
                if (!column_synonyms[tname].insert(s).second)
                    throw ParseError(line_no, "column synonym '" + s + "' is ambiguous in table '" + tname + "'");
            it->columns.push_back(std::move(c));
        } else {
            throw ParseError(line_no, "unknown declaration '" + keyword + "'");
        }
    }
    for (const auto& t : schema.tables)
        if (t.columns.empty())
            throw ParseError(line_no, "table '" + t.name + "' has no columns");
    return schema;
}

DomainSchema DomainSchema::load(const std::filesystem::path& file) { return parse(read_file(file)); }

// ---------------------------------------------------------------------------
// Store

std::string value_to_string(const Value& value)
{
    struct Visitor {
        std::string operator()(std::monostate) const { return "null"; }
        std::string operator()(std::int64_t v) const { return std::to_string(v); }
        std::string operator()(double v) const
        {
            char buf[64];
            auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
            std::string s(buf, end);
            if (s.find_first_of(".eEn") == std::string::npos)
                s += ".0";
            return s;
        }
        std::string operator()(const std::string& v) const { return v; }
    };
    return std::visit(Visitor{}, value);
}

TableStore::TableStore(DomainSchema schema) : m_schema(std::move(schema))
{
    for (const auto& t : m_schema.tables)
        m_rows[t.name];
}

namespace {

Value coerce(const Value& v, const Column& column, const std::string& table)
{
    auto fail = [&] {
        throw SchemaError(column.name, "value for " + table + "." + column.name + " has the wrong type");
    };
    if (std::holds_alternative<std::monostate>(v))
        return v;
    switch (column.type) {
    case ColumnType::text:
        if (!std::holds_alternative<std::string>(v))
            fail();
        return v;
    case ColumnType::integer:
        if (!std::holds_alternative<std::int64_t>(v))
            fail();
        return v;
    case ColumnType::real:
        if (auto i = std::get_if<std::int64_t>(&v))
            return static_cast<double>(*i);
        if (!std::holds_alternative<double>(v))
            fail();
        return v;
    }
    return v;
}

Value from_json(const nlohmann::json& j)
{
    if (j.is_null())
        return std::monostate{};
    if (j.is_number_integer())
        return j.get<std::int64_t>();
    if (j.is_number())
        return j.get<double>();
    if (j.is_string())
        return j.get<std::string>();
    throw InvalidArgument("unsupported JSON value in table row");
}

}  // namespace

void TableStore::insert(const std::string& table, const std::map<std::string, Value>& row)
{
    const Table* t = m_schema.table(table);
    if (!t)
        throw NotFound("unknown table '" + table + "'");
    for (const auto& [name, _] : row)
        if (!t->column(name))
            throw SchemaError(name, "unknown column '" + table + "." + name + "'");
    std::vector<Value> values;
    values.reserve(t->columns.size());
    for (const auto& c : t->columns) {
        auto it = row.find(c.name);
        values.push_back(it == row.end() ? Value{} : coerce(it->second, c, table));
    }
    m_rows[table].push_back(std::move(values));
}

TableStore TableStore::load(const std::filesystem::path& dir, DomainSchema schema)
{
    TableStore store(std::move(schema));
    for (const auto& t : store.m_schema.tables) {
        auto file = dir / (t.name + ".jsonl");
        if (!std::filesystem::exists(file))
            continue;
        std::istringstream in(read_file(file));
        std::string line;
        std::size_t line_no = 0;
        while (std::getline(in, line)) {
            ++line_no;
            if (trim(line).empty())
                continue;
            nlohmann::json j;
            try {
                j = nlohmann::json::parse(line);
            } catch (const nlohmann::json::parse_error& e) {
                throw ParseError(line_no, file.string() + ": " + e.what());
            }
            if (!j.is_object())
                throw ParseError(line_no, file.string() + ": row is not an object");
            std::map<std::string, Value> row;
            for (auto it = j.begin(); it != j.end(); ++it)
                row[it.key()] = from_json(it.value());
            store.insert(t.name, row);
        }
    }
    return store;
}

const std::vector<std::vector<Value>>& TableStore::rows(const std::string& table) const
{
    auto it = m_rows.find(table);
    if (it == m_rows.end())
        throw NotFound("unknown table '" + table + "'");
    return it->second;
}

std::size_t TableStore::total_rows() const
{
    std::size_t n = 0;
    for (const auto& [_, rows] : m_rows)
        n += rows.size();
    return n;
}

// ---------------------------------------------------------------------------
// Grammar

std::string_view to_string(QueryShape shape)
{
    switch (shape) {
    case QueryShape::count: return "count";
    case QueryShape::select_where: return "select-where";
    case QueryShape::aggregate: return "aggregate";
    case QueryShape::list: return "list";
    }
    return "list";
}

std::string_view to_string(QuestionType type) { return type == QuestionType::sql ? "sql-type" : "open-type"; }

Grammar Grammar::parse(std::string_view text)
{
    Grammar grammar;
    std::set<std::string> names;
    std::size_t line_no = 0;
    std::istringstream in{std::string(text)};
    std::string raw;
    while (std::getline(in, raw)) {
        ++line_no;
        std::string_view line = trim(raw);
        if (line.empty() || line.front() == '#')
            continue;
        auto parts = split(line, '|');
        if (parts.size() < 4)
            throw ParseError(line_no, "expected 'name | shape | pattern | template'");
        // Pattern alternatives also use '|': the pattern is everything between
        // the second separator and the last one.
        Production p;
        p.name = std::string(parts[0]);
        if (!names.insert(p.name).second)
            throw ParseError(line_no, "duplicate production '" + p.name + "'");
        p.shape = parse_shape(parts[1], line_no);
        p.sql_template = std::string(parts.back());

        std::string pattern;
        for (std::size_t i = 2; i + 1 < parts.size(); ++i) {
            if (i > 2)
                pattern += '|';
            pattern += parts[i];
        }
        std::istringstream ps(pattern);
        std::string word;
        while (ps >> word) {
            PatternElement e;
            if (word == "*") {
                e.kind = PatternElement::Kind::wildcard;
            } else if (word == "<table>") {
                e.kind = PatternElement::Kind::table;
            } else if (word == "<column>") {
                e.kind = PatternElement::Kind::column;
            } else if (word == "<value>") {
                e.kind = PatternElement::Kind::value;
            } else {
                std::string_view w = word;
                if (w.front() == '?') {
                    e.optional = true;
                    w.remove_prefix(1);
                }
                for (auto alt : split(w, '|')) {
                    auto folded = text::tokenize(alt);
                    if (folded.size() != 1)
                        throw ParseError(line_no, "pattern literal '" + std::string(alt) + "' is not a single token");
                    e.alternatives.push_back(folded.front());
                }
            }
            p.pattern.push_back(std::move(e));
        }
        if (p.pattern.empty())
            throw ParseError(line_no, "empty pattern in production '" + p.name + "'");
        grammar.productions.push_back(std::move(p));
    }
    return grammar;
}

Grammar Grammar::load(const std::filesystem::path& file) { return parse(read_file(file)); }

// ---------------------------------------------------------------------------
// Classification

std::vector<std::string> default_cue_phrases()
{
    return {"how many", "list",  "average", "maximum", "minimum", "total",  "quantos", "quantas",
            "liste",    "listar", "média",  "médio",   "máximo",  "máxima", "mínimo",  "mínima"};
}

namespace {

bool contains_phrase(const std::vector<std::string>& tokens, const std::vector<std::string>& phrase)
{
    if (phrase.empty() || phrase.size() > tokens.size())
        return false;
    return std::search(tokens.begin(), tokens.end(), phrase.begin(), phrase.end()) != tokens.end();
}

bool phrase_at(const std::vector<std::string>& tokens, std::size_t pos, const std::vector<std::string>& phrase)
{
    if (phrase.empty() || pos + phrase.size() > tokens.size())
        return false;
    return std::equal(phrase.begin(), phrase.end(), tokens.begin() + static_cast<std::ptrdiff_t>(pos));
}

std::vector<std::string> split_phrase(const std::string& folded)
{
    std::vector<std::string> out;
    std::istringstream s(folded);
    std::string w;
    while (s >> w)
        out.push_back(w);
    return out;
}

}  // namespace

QuestionType classify_question(std::string_view question, const DomainSchema& schema,
                               const std::vector<std::string>& cue_phrases)
{
    auto tokens = text::tokenize(question);
    bool cue = std::any_of(cue_phrases.begin(), cue_phrases.end(),
                           [&](const std::string& c) { return contains_phrase(tokens, text::tokenize(c)); });
    if (!cue)
        return QuestionType::open;
    for (const auto& t : schema.tables) {
        for (const auto& s : t.synonyms)
            if (contains_phrase(tokens, split_phrase(s)))
                return QuestionType::sql;
        for (const auto& c : t.columns)
            for (const auto& s : c.synonyms)
                if (contains_phrase(tokens, split_phrase(s)))
                    return QuestionType::sql;
    }
    return QuestionType::open;
}

// ---------------------------------------------------------------------------
// Translation

namespace {

struct Bindings {
    const Table* table = nullptr;
    const Table* column_table = nullptr;
    const Column* column = nullptr;
    std::optional<std::pair<std::size_t, std::size_t>> value_span;
};

struct Resolved {
    const Table* table = nullptr;
    const Column* column = nullptr;
    const Column* value_column = nullptr;
    std::string value;
};

std::string quote_sql(const std::string& s)
{
    std::string out = "'";
    for (char c : s) {
        out += c;
        if (c == '\'')
            out += '\'';
    }
    return out + "'";
}

// Canonical stored form of a folded phrase in the given text column, if any.
std::optional<std::string> lookup_value(const TableStore& store, const Table& table, const Column& column,
                                        const std::string& folded)
{
    std::size_t idx = static_cast<std::size_t>(&column - table.columns.data());
    for (const auto& row : store.rows(table.name))
        if (auto s = std::get_if<std::string>(&row[idx]); s && folded_phrase(*s) == folded)
            return *s;
    return std::nullopt;
}

bool uses(const std::string& tmpl, std::string_view placeholder) { return tmpl.find(placeholder) != std::string::npos; }

std::optional<Resolved> resolve(const Production& p, const Bindings& b, const std::vector<std::string>& tokens,
                                const TableStore& store)
{
    if (!b.table)
        return std::nullopt;
    Resolved r;
    r.table = b.table;
    if (b.column) {
        if (b.column_table != b.table)
            return std::nullopt;
        r.column = b.column;
        static const char* numeric_aggs[] = {"MAX({column})", "MIN({column})", "AVG({column})", "SUM({column})"};
        for (auto agg : numeric_aggs)
            if (uses(p.sql_template, agg) && !is_numeric(b.column->type))
                return std::nullopt;
    } else if (uses(p.sql_template, "{column}")) {
        return std::nullopt;
    }
    if (b.value_span) {
        auto folded = join(tokens, b.value_span->first, b.value_span->second);
        if (uses(p.sql_template, "{value_column}")) {
            for (const auto& c : b.table->columns) {
                if (c.type != ColumnType::text)
                    continue;
                if (auto v = lookup_value(store, *b.table, c, folded)) {
                    r.value_column = &c;
                    r.value = *v;
                    break;
                }
            }
            if (!r.value_column)
                return std::nullopt;
        } else {
            if (!r.column || r.column->type != ColumnType::text)
                return std::nullopt;
            auto v = lookup_value(store, *b.table, *r.column, folded);
            if (!v)
                return std::nullopt;
            r.value_column = r.column;
            r.value = *v;
        }
    } else if (uses(p.sql_template, "{value")) {
        return std::nullopt;
    }
    return r;
}

class Matcher {
  public:
    Matcher(const Production& p, const std::vector<std::string>& tokens, const TableStore& store)
        : m_p(p), m_tokens(tokens), m_store(store)
    {
        for (const auto& t : store.schema().tables) {
            for (const auto& s : t.synonyms)
                m_table_syn.push_back({split_phrase(s), &t});
            for (const auto& c : t.columns)
                for (const auto& s : c.synonyms)
                    m_column_syn.push_back({split_phrase(s), &t, &c});
        }
        // Longer surface forms first so "tide stations" wins over "stations".
        std::stable_sort(m_table_syn.begin(), m_table_syn.end(),
                         [](const auto& a, const auto& b) { return a.words.size() > b.words.size(); });
        std::stable_sort(m_column_syn.begin(), m_column_syn.end(),
                         [](const auto& a, const auto& b) { return a.words.size() > b.words.size(); });
    }

    std::optional<Resolved> run()
    {
        Bindings b;
        if (match(0, 0, b))
            return m_result;
        return std::nullopt;
    }

  private:
    struct TableSyn {
        std::vector<std::string> words;
        const Table* table;
    };
    struct ColumnSyn {
        std::vector<std::string> words;
        const Table* table;
        const Column* column;
    };

    bool match(std::size_t pi, std::size_t ti, Bindings& b)
    {
        const auto& pattern = m_p.pattern;
        if (pi == pattern.size()) {
            if (ti != m_tokens.size())
                return false;
            m_result = resolve(m_p, b, m_tokens, m_store);
            return m_result.has_value();
        }
        const auto& e = pattern[pi];
        switch (e.kind) {
        case PatternElement::Kind::literal:
            if (ti < m_tokens.size() &&
                std::find(e.alternatives.begin(), e.alternatives.end(), m_tokens[ti]) != e.alternatives.end() &&
                match(pi + 1, ti + 1, b))
                return true;
            return e.optional && match(pi + 1, ti, b);
        case PatternElement::Kind::wildcard:
            for (std::size_t j = ti; j <= m_tokens.size(); ++j)
                if (match(pi + 1, j, b))
                    return true;
            return false;
        case PatternElement::Kind::table:
            for (const auto& s : m_table_syn) {
                if (!phrase_at(m_tokens, ti, s.words))
                    continue;
                auto saved = b;
                b.table = s.table;
                if (match(pi + 1, ti + s.words.size(), b))
                    return true;
                b = saved;
            }
            return false;
        case PatternElement::Kind::column:
            for (const auto& s : m_column_syn) {
                if (!phrase_at(m_tokens, ti, s.words))
                    continue;
                auto saved = b;
                b.column_table = s.table;
                b.column = s.column;
                if (match(pi + 1, ti + s.words.size(), b))
                    return true;
                b = saved;
            }
            return false;
        case PatternElement::Kind::value:
            for (std::size_t j = ti + 1; j <= m_tokens.size(); ++j) {
                auto saved = b;
                b.value_span = std::pair{ti, j};
                if (match(pi + 1, j, b))
                    return true;
                b = saved;
            }
            return false;
        }
        return false;
    }

    const Production& m_p;
    const std::vector<std::string>& m_tokens;
    const TableStore& m_store;
    std::vector<TableSyn> m_table_syn;
    std::vector<ColumnSyn> m_column_syn;
    std::optional<Resolved> m_result;
};

std::string render_template(const std::string& tmpl, const Resolved& r)
{
    std::string out;
    for (std::size_t i = 0; i < tmpl.size();) {
        if (tmpl[i] != '{') {
            out += tmpl[i++];
            continue;
        }
        auto close = tmpl.find('}', i);
        if (close == std::string::npos)
            throw InvalidArgument("unterminated placeholder in SQL template");
        auto key = tmpl.substr(i + 1, close - i - 1);
        if (key == "table")
            out += r.table->name;
        else if (key == "column")
            out += r.column->name;
        else if (key == "display")
            out += r.table->columns.front().name;
        else if (key == "value_column")
            out += r.value_column->name;
        else if (key == "value")
            out += quote_sql(r.value);
        else
            throw InvalidArgument("unknown placeholder '{" + key + "}' in SQL template");
        i = close + 1;
    }
    return out;
}

}  // namespace

SqlQuery translate(std::string_view question, const Grammar& grammar, const TableStore& store)
{
    auto tokens = text::tokenize(question);
    for (const auto& p : grammar.productions) {
        Matcher m(p, tokens, store);
        if (auto r = m.run())
            return SqlQuery{render_template(p.sql_template, *r), p.shape, p.name};
    }
    throw Untranslatable("no grammar production matches: " + std::string(question));
}

// ---------------------------------------------------------------------------
// SQL subset

namespace {

struct SqlToken {
    enum class Kind { ident, string, number, punct, end };
    Kind kind;
    std::string text;
};

std::vector<SqlToken> lex_sql(std::string_view sql)
{
    std::vector<SqlToken> out;
    std::size_t i = 0;
    while (i < sql.size()) {
        char c = sql[i];
        if (std::isspace(static_cast<unsigned char>(c))) {
            ++i;
        } else if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            std::size_t j = i;
            while (j < sql.size() && (std::isalnum(static_cast<unsigned char>(sql[j])) || sql[j] == '_'))
                ++j;
            out.push_back({SqlToken::Kind::ident, std::string(sql.substr(i, j - i))});
            i = j;
        } else if (std::isdigit(static_cast<unsigned char>(c)) || (c == '-' && i + 1 < sql.size() &&
                                                                  std::isdigit(static_cast<unsigned char>(sql[i + 1])))) {
            std::size_t j = i + 1;
            while (j < sql.size() && (std::isdigit(static_cast<unsigned char>(sql[j])) || sql[j] == '.'))
                ++j;
            out.push_back({SqlToken::Kind::number, std::string(sql.substr(i, j - i))});
            i = j;
        } else if (c == '\'') {
            std::string s;
            std::size_t j = i + 1;
            while (true) {
                if (j >= sql.size())
                    throw InvalidArgument("unterminated string literal in SQL");
                if (sql[j] == '\'') {
                    if (j + 1 < sql.size() && sql[j + 1] == '\'') {
                        s += '\'';
                        j += 2;
                        continue;
                    }
                    break;
                }
                s += sql[j++];
            }
            out.push_back({SqlToken::Kind::string, std::move(s)});
            i = j + 1;
        } else if (c == '(' || c == ')' || c == ',' || c == '*' || c == '=' || c == ';') {
            out.push_back({SqlToken::Kind::punct, std::string(1, c)});
            ++i;
        } else {
            throw InvalidArgument(std::string("unexpected character '") + c + "' in SQL");
        }
    }
    out.push_back({SqlToken::Kind::end, ""});
    return out;
}

std::string upper(std::string s)
{
    for (auto& c : s)
        c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    return s;
}

class SqlParser {
  public:
    explicit SqlParser(std::string_view sql) : m_tokens(lex_sql(sql)) {}

    SelectStatement parse()
    {
        SelectStatement st;
        keyword("SELECT");
        if (accept_punct("*")) {
            st.star = true;
        } else if (peek_aggregate()) {
            auto agg = upper(next().text);
            punct("(");
            if (agg == "COUNT") {
                st.aggregate = SelectStatement::Aggregate::count;
                if (!accept_punct("*"))
                    st.columns.push_back(ident());
            } else {
                st.aggregate = agg == "MAX"   ? SelectStatement::Aggregate::max
                               : agg == "MIN" ? SelectStatement::Aggregate::min
                               : agg == "AVG" ? SelectStatement::Aggregate::avg
                                              : SelectStatement::Aggregate::sum;
                st.columns.push_back(ident());
            }
            punct(")");
        } else {
            st.columns.push_back(ident());
            while (accept_punct(","))
                st.columns.push_back(ident());
        }
        keyword("FROM");
        st.table = ident();
        if (accept_keyword("WHERE")) {
            auto col = ident();
            punct("=");
            const auto& t = next();
            Value v;
            if (t.kind == SqlToken::Kind::string) {
                v = t.text;
            } else if (t.kind == SqlToken::Kind::number) {
                if (t.text.find('.') != std::string::npos)
                    v = std::stod(t.text);
                else
                    v = static_cast<std::int64_t>(std::stoll(t.text));
            } else {
                throw InvalidArgument("expected a literal after '=' in SQL");
            }
            st.where = std::pair{col, v};
        }
        accept_punct(";");
        if (peek().kind != SqlToken::Kind::end)
            throw InvalidArgument("unexpected '" + peek().text + "' after end of SQL statement");
        return st;
    }

  private:
    const SqlToken& peek() const { return m_tokens[m_pos]; }
    const SqlToken& next() { return m_tokens[m_pos < m_tokens.size() - 1 ? m_pos++ : m_pos]; }

    bool is_keyword(const SqlToken& t, std::string_view kw) const
    {
        return t.kind == SqlToken::Kind::ident && upper(t.text) == kw;
    }
    bool peek_aggregate() const
    {
        if (m_pos + 1 >= m_tokens.size() || m_tokens[m_pos + 1].text != "(")
            return false;
        for (auto kw : {"COUNT", "MAX", "MIN", "AVG", "SUM"})
            if (is_keyword(peek(), kw))
                return true;
        return false;
    }
    void keyword(std::string_view kw)
    {
        if (!accept_keyword(kw))
            throw InvalidArgument("expected " + std::string(kw) + " in SQL");
    }
    bool accept_keyword(std::string_view kw)
    {
        if (!is_keyword(peek(), kw))
            return false;
        ++m_pos;
        return true;
    }
    void punct(std::string_view p)
    {
        if (!accept_punct(p))
            throw InvalidArgument("expected '" + std::string(p) + "' in SQL");
    }
    bool accept_punct(std::string_view p)
    {
        if (peek().kind != SqlToken::Kind::punct || peek().text != p)
            return false;
        ++m_pos;
        return true;
    }
    std::string ident()
    {
        if (peek().kind != SqlToken::Kind::ident)
            throw InvalidArgument("expected an identifier in SQL");
        for (auto kw : {"SELECT", "FROM", "WHERE"})
            if (is_keyword(peek(), kw))
                throw InvalidArgument("expected an identifier in SQL, got " + std::string(kw));
        return next().text;
    }

    std::vector<SqlToken> m_tokens;
    std::size_t m_pos = 0;
};

// Total order over values used for sorting and MAX/MIN: null < numbers < text.
int compare_values(const Value& a, const Value& b)
{
    auto rank = [](const Value& v) {
        if (std::holds_alternative<std::monostate>(v))
            return 0;
        if (std::holds_alternative<std::string>(v))
            return 2;
        return 1;
    };
    int ra = rank(a), rb = rank(b);
    if (ra != rb)
        return ra < rb ? -1 : 1;
    if (ra == 0)
        return 0;
    if (ra == 2) {
        int c = std::get<std::string>(a).compare(std::get<std::string>(b));
        return c < 0 ? -1 : c > 0;
    }
    auto num = [](const Value& v) {
        if (auto i = std::get_if<std::int64_t>(&v))
            return static_cast<double>(*i);
        return std::get<double>(v);
    };
    double x = num(a), y = num(b);
    return x < y ? -1 : x > y;
}

bool equal_values(const Value& a, const Value& b)
{
    if (std::holds_alternative<std::monostate>(a) || std::holds_alternative<std::monostate>(b))
        return false;
    return compare_values(a, b) == 0;
}

}  // namespace

SelectStatement parse_sql(std::string_view sql) { return SqlParser(sql).parse(); }

ResultTable execute(std::string_view sql, const TableStore& store)
{
    auto st = parse_sql(sql);
    const auto& schema = store.schema();
    const Table* table = schema.table(st.table);
    if (!table)
        throw NotFound("unknown table '" + st.table + "'");
    auto index_of = [&](const std::string& name) {
        const Column* c = table->column(name);
        if (!c)
            throw NotFound("unknown column '" + st.table + "." + name + "'");
        return static_cast<std::size_t>(c - table->columns.data());
    };
    std::vector<std::size_t> cols;
    for (const auto& c : st.columns)
        cols.push_back(index_of(c));

    std::vector<const std::vector<Value>*> selected;
    std::optional<std::size_t> where_col;
    if (st.where)
        where_col = index_of(st.where->first);
    for (const auto& row : store.rows(table->name))
        if (!where_col || equal_values(row[*where_col], st.where->second))
            selected.push_back(&row);

    ResultTable result;
    using Agg = SelectStatement::Aggregate;
    if (st.aggregate == Agg::none) {
        if (st.star) {
            for (std::size_t i = 0; i < table->columns.size(); ++i)
                cols.push_back(i);
        }
        for (auto i : cols)
            result.columns.push_back(table->columns[i].name);
        for (const auto* row : selected) {
            std::vector<Value> out;
            for (auto i : cols)
                out.push_back((*row)[i]);
            result.rows.push_back(std::move(out));
        }
        std::stable_sort(result.rows.begin(), result.rows.end(), [](const auto& a, const auto& b) {
            for (std::size_t i = 0; i < a.size(); ++i)
                if (int c = compare_values(a[i], b[i]); c != 0)
                    return c < 0;
            return false;
        });
        return result;
    }

    if (st.aggregate == Agg::count) {
        std::int64_t n = 0;
        for (const auto* row : selected)
            if (cols.empty() || !std::holds_alternative<std::monostate>((*row)[cols.front()]))
                ++n;
        result.columns.push_back(cols.empty() ? "COUNT(*)" : "COUNT(" + st.columns.front() + ")");
        result.rows.push_back({n});
        return result;
    }

    std::size_t col = cols.front();
    const Column& column = table->columns[col];
    static const char* names[] = {"", "COUNT", "MAX", "MIN", "AVG", "SUM"};
    result.columns.push_back(std::string(names[static_cast<int>(st.aggregate)]) + "(" + column.name + ")");

    std::vector<Value> values;
    for (const auto* row : selected)
        if (!std::holds_alternative<std::monostate>((*row)[col]))
            values.push_back((*row)[col]);
    if (values.empty()) {
        result.null_aggregate = true;
        result.rows.push_back({Value{}});
        return result;
    }
    if ((st.aggregate == Agg::avg || st.aggregate == Agg::sum) && !is_numeric(column.type))
        throw InvalidArgument("cannot aggregate text column '" + column.name + "'");

    Value out;
    switch (st.aggregate) {
    case Agg::max:
        out = *std::max_element(values.begin(), values.end(),
                                [](const Value& a, const Value& b) { return compare_values(a, b) < 0; });
        break;
    case Agg::min:
        out = *std::min_element(values.begin(), values.end(),
                                [](const Value& a, const Value& b) { return compare_values(a, b) < 0; });
        break;
    case Agg::sum:
    case Agg::avg: {
        if (column.type == ColumnType::integer && st.aggregate == Agg::sum) {
            std::int64_t s = 0;
            for (const auto& v : values)
                s += std::get<std::int64_t>(v);
            out = s;
            break;
        }
        double s = 0.0;
        for (const auto& v : values)
            s += std::holds_alternative<std::int64_t>(v) ? static_cast<double>(std::get<std::int64_t>(v))
                                                         : std::get<double>(v);
        out = st.aggregate == Agg::avg ? s / static_cast<double>(values.size()) : s;
        break;
    }
    default:
        break;
    }
    result.rows.push_back({out});
    return result;
}

std::string render_result(const ResultTable& result, Language language)
{
    if (result.null_aggregate)
        return language == Language::pt ? "Não há dados para calcular esse valor." : "There is no data to compute that.";
    if (result.rows.empty())
        return language == Language::pt ? "Nenhum resultado." : "No results.";
    std::string out;
    if (result.rows.size() == 1 && result.columns.size() == 1)
        return value_to_string(result.rows.front().front());
    for (std::size_t r = 0; r < result.rows.size(); ++r) {
        if (r > 0)
            out += result.columns.size() == 1 ? ", " : "; ";
        for (std::size_t c = 0; c < result.rows[r].size(); ++c) {
            if (c > 0)
                out += " | ";
            out += value_to_string(result.rows[r][c]);
        }
    }
    return out;
}

// ---------------------------------------------------------------------------

Engine::Engine(Grammar grammar, TableStore store, std::vector<std::string> cue_phrases)
    : m_grammar(std::move(grammar)), m_store(std::move(store)), m_cues(std::move(cue_phrases))
{
}

Engine Engine::load(const std::filesystem::path& dir)
{
    auto schema = DomainSchema::load(dir / "schema.txt");
    auto grammar = Grammar::load(dir / "grammar.txt");
    return Engine(std::move(grammar), TableStore::load(dir / "store", std::move(schema)));
}

QuestionType Engine::classify(std::string_view question) const
{
    return classify_question(question, m_store.schema(), m_cues);
}

SqlQuery Engine::translate(std::string_view question) const { return nl2sql::translate(question, m_grammar, m_store); }

ResultTable Engine::execute(const SqlQuery& query) const { return nl2sql::execute(query, m_store); }

}  // namespace amazul::nl2sql
