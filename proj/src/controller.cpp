#include "amazul/controller.hpp"

#include <random>
#include <sstream>

namespace amazul::controller {

using json = nlohmann::json;

namespace {

Timestamp now()
{
    return std::chrono::floor<std::chrono::seconds>(std::chrono::system_clock::now());
}

const std::string& unsupported_reply(Language lang)
{
    static const std::string en = "Sorry, I can only read text messages for now.";
    static const std::string pt = "Desculpe, por enquanto só consigo ler mensagens de texto.";
    return lang == Language::pt ? pt : en;
}

std::string join(const std::vector<std::string>& parts)
{
    std::string out;
    for (const auto& p : parts)
        out += (out.empty() ? "" : ", ") + p;
    return out;
}

std::string optional_str(const json& j, const char* key)
{
    if (!j.contains(key) || j[key].is_null())
        return {};
    if (!j[key].is_string())
        throw InvalidArgument(std::string("field '") + key + "' must be a string");
    return j[key].get<std::string>();
}

// Marks the caller's turn done on every exit path.
struct TurnGuard {
    std::unique_lock<std::mutex>& lock;
    std::uint64_t& serving;
    std::condition_variable& turn;
    ~TurnGuard()
    {
        if (!lock.owns_lock())
            lock.lock();
        ++serving;
        turn.notify_all();
    }
};

}  // namespace

std::string_view to_string(MessageType type)
{
    switch (type) {
    case MessageType::text: return "text";
    case MessageType::attachment_ref: return "attachment-ref";
    case MessageType::voice_ref: return "voice-ref";
    }
    return "?";
}

MessageType parse_message_type(std::string_view text)
{
    for (auto t : {MessageType::text, MessageType::attachment_ref, MessageType::voice_ref})
        if (to_string(t) == text)
            return t;
    throw InvalidArgument("unknown message type '" + std::string(text) + "'");
}

std::string_view to_string(Sender sender)
{
    return sender == Sender::user ? "user" : "bot";
}

Sender parse_sender(std::string_view text)
{
    if (text == "user")
        return Sender::user;
    if (text == "bot")
        return Sender::bot;
    throw InvalidArgument("unknown sender '" + std::string(text) + "'");
}

std::string_view to_string(Route route)
{
    switch (route) {
    case Route::sql: return "sql";
    case Route::qa: return "qa";
    case Route::unsupported: return "unsupported";
    }
    return "?";
}

json to_json(const ChatMessage& m)
{
    json j{{"session_id", m.session_id},
           {"message_id", m.message_id},
           {"timestamp", format_timestamp(m.timestamp)},
           {"type", std::string(to_string(m.type))},
           {"body", m.body},
           {"quoted_message_id", m.quoted_message_id ? json(*m.quoted_message_id) : json(nullptr)},
           {"sender", std::string(to_string(m.sender))}};
    if (m.sender == Sender::bot) {
        j["in_reply_to"] = m.in_reply_to ? json(*m.in_reply_to) : json(nullptr);
        j["route"] = m.route ? json(std::string(to_string(*m.route))) : json(nullptr);
        j["triggered"] = m.triggered;
        j["sources"] = json::array();
        for (const auto& s : m.sources)
            j["sources"].push_back(lake::to_json(s));
    }
    return j;
}

ChatMessage message_from_json(const json& j)
{
    if (!j.is_object())
        throw InvalidArgument("message must be an object");
    ChatMessage m;
    m.session_id = optional_str(j, "session_id");
    if (m.session_id.empty())
        throw InvalidArgument("field 'session_id' is required");
    m.message_id = optional_str(j, "message_id");
    if (auto ts = optional_str(j, "timestamp"); !ts.empty())
        m.timestamp = parse_timestamp(ts);
    if (auto type = optional_str(j, "type"); !type.empty())
        m.type = parse_message_type(type);
    if (!j.contains("body") || !j["body"].is_string())
        throw InvalidArgument("field 'body' must be a string");
    m.body = j["body"].get<std::string>();
    if (auto q = optional_str(j, "quoted_message_id"); !q.empty())
        m.quoted_message_id = q;
    if (auto s = optional_str(j, "sender"); !s.empty())
        m.sender = parse_sender(s);
    if (auto r = optional_str(j, "in_reply_to"); !r.empty())
        m.in_reply_to = r;
    if (auto r = optional_str(j, "route"); !r.empty()) {
        for (auto route : {Route::sql, Route::qa, Route::unsupported})
            if (to_string(route) == r)
                m.route = route;
        if (!m.route)
            throw InvalidArgument("unknown route '" + r + "'");
    }
    if (j.contains("triggered"))
        m.triggered = j["triggered"].get<bool>();
    if (j.contains("sources"))
        for (const auto& s : j["sources"])
            m.sources.push_back(lake::source_from_json(s));
    return m;
}

json to_json(const Health& h)
{
    return {{"ready", h.ready()},         {"index_built", h.index_built},     {"documents", h.documents},
            {"store_loaded", h.store_loaded}, {"tables", h.tables},           {"rows", h.rows},
            {"lake_attached", h.lake_attached}, {"sessions", h.sessions}};
}

// ---------------------------------------------------------------------------
// service

ChatService::ChatService(std::shared_ptr<const Snapshot> snapshot, const lake::DataLake* lake,
                         std::vector<std::string> locales)
    : m_snapshot(snapshot ? std::move(snapshot) : std::make_shared<const Snapshot>()),
      m_lake(lake),
      m_locales(std::move(locales)),
      m_session_salt(std::random_device{}())
{
    for (const auto& l : m_locales)
        if (!is_supported_language(l))
            throw InvalidArgument("unsupported locale '" + l + "'");
}

std::shared_ptr<const Snapshot> ChatService::build_snapshot(const lake::DataLake& lake, const Config& config)
{
    auto snap = std::make_shared<Snapshot>();
    auto docs = lake.list_documents();
    if (!docs.empty())
        snap->corpus = retrieval::Corpus::build(std::move(docs), config.analyzer());
    if (std::filesystem::exists(config.nl2sql_dir / "schema.txt"))
        snap->sql = std::make_shared<const nl2sql::Engine>(nl2sql::Engine::load(config.nl2sql_dir));
    snap->qa = config.qa;
    snap->loaded_at = now();
    return snap;
}

std::string ChatService::open_session(std::string_view locale)
{
    if (std::find(m_locales.begin(), m_locales.end(), locale) == m_locales.end())
        throw InvalidArgument("unsupported locale '" + std::string(locale) + "'; supported: " + join(m_locales));
    auto slot = std::make_shared<Slot>();
    slot->session.created_at = now();
    slot->session.locale = parse_language(locale);
    std::lock_guard lock(m_sessions_mutex);
    std::mt19937_64 mix(m_session_salt + m_session_counter);
    std::ostringstream id;
    id << "s" << ++m_session_counter << "-" << std::hex << (mix() & 0xffffffffULL);
    slot->session.session_id = id.str();
    m_sessions.emplace(slot->session.session_id, slot);
    return slot->session.session_id;
}

std::shared_ptr<ChatService::Slot> ChatService::slot(const std::string& session_id) const
{
    std::lock_guard lock(m_sessions_mutex);
    auto it = m_sessions.find(session_id);
    if (it == m_sessions.end())
        throw NotFound("unknown session '" + session_id + "'");
    return it->second;
}

ChatMessage ChatService::handle_message(ChatMessage message)
{
    return exchange(std::move(message)).bot;
}

ChatService::Exchange ChatService::exchange(ChatMessage message)
{
    auto s = slot(message.session_id);
    std::unique_lock lock(s->mutex);
    auto ticket = s->next_ticket++;
    s->turn.wait(lock, [&] { return s->serving == ticket; });
    TurnGuard guard{lock, s->serving, s->turn};

    if (message.sender != Sender::user)
        throw InvalidArgument("only user messages can be sent");
    if (message.message_id.empty()) {
        do
            message.message_id = "m" + std::to_string(s->next_id++);
        while (s->ids.count(message.message_id));
    } else if (s->ids.count(message.message_id)) {
        throw InvalidArgument("duplicate message id '" + message.message_id + "'");
    }
    if (message.quoted_message_id && !s->ids.count(*message.quoted_message_id))
        throw InvalidArgument("quoted message '" + *message.quoted_message_id + "' is not in this session");
    message.timestamp = now();
    message.in_reply_to.reset();
    message.route.reset();
    message.triggered = false;
    message.sources.clear();
    s->ids.insert(message.message_id);
    s->session.history.push_back(message);
    auto locale = s->session.locale;

    // Answer without holding the lock so history stays readable meanwhile;
    // the ticket keeps later messages of this session waiting.
    lock.unlock();
    ChatMessage bot;
    try {
        bot = answer(message, locale, *snapshot());
    } catch (const Error&) {
        // Every user message gets a reply; a failing backend reads as a refusal.
        bot = ChatMessage{message.session_id, {}, {}, MessageType::text, snapshot()->qa.refusal(locale),
                          message.quoted_message_id, Sender::bot, message.message_id, Route::qa, false, {}};
    }
    lock.lock();

    do
        bot.message_id = "m" + std::to_string(s->next_id++);
    while (s->ids.count(bot.message_id));
    bot.timestamp = now();
    s->ids.insert(bot.message_id);
    s->session.history.push_back(bot);
    return {std::move(message), std::move(bot)};
}

ChatMessage ChatService::answer(const ChatMessage& user, Language locale, const Snapshot& snap) const
{
    ChatMessage bot;
    bot.session_id = user.session_id;
    bot.sender = Sender::bot;
    bot.in_reply_to = user.message_id;
    bot.quoted_message_id = user.quoted_message_id;

    if (user.type != MessageType::text) {
        bot.route = Route::unsupported;
        bot.body = unsupported_reply(locale);
        return bot;
    }

    if (snap.sql && snap.sql->classify(user.body) == nl2sql::QuestionType::sql) {
        try {
            auto query = snap.sql->translate(user.body);
            auto result = snap.sql->execute(query);
            bot.route = Route::sql;
            bot.body = nl2sql::render_result(result, locale);
            bot.triggered = true;
            lake::SourceRef ref;
            ref.origin_name = "table " + nl2sql::parse_sql(query.text).table;
            ref.origin_url_or_citation = query.text;
            ref.retrieved_at = snap.loaded_at;
            bot.sources.push_back(std::move(ref));
            return bot;
        } catch (const Error&) {
            // Not expressible over the schema; the corpus may still answer.
        }
    }

    bot.route = Route::qa;
    if (!snap.corpus) {
        bot.body = snap.qa.refusal(locale);
        return bot;
    }
    auto ans = qa::answer_question(user.body, *snap.corpus, snap.qa, locale);
    bot.body = ans.text;
    bot.triggered = ans.triggered && !ans.sources.empty();
    if (bot.triggered)
        bot.sources = std::move(ans.sources);
    else
        bot.body = snap.qa.refusal(locale);
    return bot;
}

std::vector<ChatMessage> ChatService::history(const std::string& session_id) const
{
    auto s = slot(session_id);
    std::lock_guard lock(s->mutex);
    return s->session.history;
}

std::optional<Language> ChatService::locale(const std::string& session_id) const
{
    std::lock_guard lock(m_sessions_mutex);
    auto it = m_sessions.find(session_id);
    if (it == m_sessions.end())
        return std::nullopt;
    return it->second->session.locale;
}

lake::WikiEntry ChatService::get_wiki(const std::string& slug) const
{
    if (!m_lake)
        throw NotFound("wiki entry '" + slug + "' not found");
    return m_lake->get_wiki(slug);
}

std::vector<lake::WikiEntry> ChatService::list_wiki(std::optional<lake::WikiAxis> axis) const
{
    if (!m_lake)
        return {};
    return m_lake->list_wiki(axis);
}

Health ChatService::health() const
{
    auto snap = snapshot();
    Health h;
    h.index_built = snap->corpus != nullptr;
    h.documents = snap->corpus ? snap->corpus->documents().size() : 0;
    h.store_loaded = snap->sql != nullptr;
    h.tables = snap->sql ? snap->sql->schema().tables.size() : 0;
    h.rows = snap->sql ? snap->sql->store().total_rows() : 0;
    h.lake_attached = m_lake != nullptr;
    std::lock_guard lock(m_sessions_mutex);
    h.sessions = m_sessions.size();
    return h;
}

void ChatService::reload(std::shared_ptr<const Snapshot> snapshot)
{
    if (!snapshot)
        throw InvalidArgument("null snapshot");
    std::lock_guard lock(m_snapshot_mutex);
    m_snapshot = std::move(snapshot);
}

std::shared_ptr<const Snapshot> ChatService::snapshot() const
{
    std::lock_guard lock(m_snapshot_mutex);
    return m_snapshot;
}

// ---------------------------------------------------------------------------
// protocol

namespace {

json error_frame(const json& id, std::string_view kind, std::string_view message)
{
    json out{{"ok", false}, {"error", {{"kind", kind}, {"message", message}}}};
    if (!id.is_null())
        out["id"] = id;
    return out;
}

std::string require_str(const json& req, const char* key)
{
    auto v = optional_str(req, key);
    if (v.empty())
        throw InvalidArgument(std::string("field '") + key + "' is required");
    return v;
}

}  // namespace

json handle_frame(ChatService& service, const json& request)
{
    json id = request.is_object() && request.contains("id") ? request["id"] : json(nullptr);
    try {
        if (!request.is_object())
            throw InvalidArgument("request must be an object");
        auto op = require_str(request, "op");
        json result;
        if (op == "open-session") {
            auto locale = optional_str(request, "locale");
            auto sid = service.open_session(locale.empty() ? "en" : locale);
            result = {{"session_id", sid}, {"locale", locale.empty() ? "en" : locale}};
        } else if (op == "send-message") {
            if (!request.contains("message"))
                throw InvalidArgument("field 'message' is required");
            auto ex = service.exchange(message_from_json(request["message"]));
            result = {{"user", to_json(ex.user)}, {"bot", to_json(ex.bot)}};
        } else if (op == "fetch-history") {
            auto sid = require_str(request, "session_id");
            result = {{"session_id", sid}, {"history", json::array()}};
            for (const auto& m : service.history(sid))
                result["history"].push_back(to_json(m));
        } else if (op == "wiki-get") {
            result = lake::to_json(service.get_wiki(require_str(request, "slug")));
        } else if (op == "wiki-list") {
            std::optional<lake::WikiAxis> axis;
            if (auto a = optional_str(request, "axis"); !a.empty())
                axis = lake::parse_wiki_axis(a);
            result = json::array();
            for (const auto& e : service.list_wiki(axis))
                result.push_back(lake::to_json(e));
        } else if (op == "health") {
            result = to_json(service.health());
        } else {
            throw InvalidArgument("unknown op '" + op + "'");
        }
        json out{{"ok", true}, {"result", std::move(result)}};
        if (!id.is_null())
            out["id"] = id;
        return out;
    } catch (const NotFound& e) {
        return error_frame(id, "not-found", e.what());
    } catch (const InvalidArgument& e) {
        return error_frame(id, "invalid-argument", e.what());
    } catch (const json::exception& e) {
        return error_frame(id, "invalid-argument", e.what());
    } catch (const Error& e) {
        return error_frame(id, "error", e.what());
    }
}

std::string handle_line(ChatService& service, std::string_view line)
{
    auto request = json::parse(line, nullptr, false);
    if (request.is_discarded())
        return error_frame(nullptr, "parse-error", "request is not valid JSON").dump();
    return handle_frame(service, request).dump();
}

}  // namespace amazul::controller
