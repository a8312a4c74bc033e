#pragma once

#include <atomic>
#include <condition_variable>
#include <cstdint>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include <json.hpp>

#include "amazul/config.hpp"
#include "amazul/datalake.hpp"
#include "amazul/nl2sql.hpp"
#include "amazul/qa.hpp"
#include "amazul/retriever.hpp"

namespace amazul::controller {

enum class MessageType { text, attachment_ref, voice_ref };
enum class Sender { user, bot };

std::string_view to_string(MessageType type);
MessageType parse_message_type(std::string_view text);
std::string_view to_string(Sender sender);
Sender parse_sender(std::string_view text);

/// How a bot reply was produced.
enum class Route { sql, qa, unsupported };
std::string_view to_string(Route route);

struct ChatMessage {
    std::string session_id;
    std::string message_id;  ///< assigned by the service when empty
    Timestamp timestamp{};   ///< set by the service on arrival
    MessageType type = MessageType::text;
    std::string body;
    std::optional<std::string> quoted_message_id;
    Sender sender = Sender::user;

    // Bot replies only.
    std::optional<std::string> in_reply_to;
    std::optional<Route> route;
    bool triggered = false;
    std::vector<lake::SourceRef> sources;
};

nlohmann::json to_json(const ChatMessage& message);
/// Throws InvalidArgument on missing or malformed fields.
ChatMessage message_from_json(const nlohmann::json& j);

struct Session {
    std::string session_id;
    Timestamp created_at{};
    Language locale = Language::en;
    std::vector<ChatMessage> history;  ///< arrival order, append-only
};

/// Read-only answering resources, replaced as a whole on reload.
struct Snapshot {
    std::shared_ptr<const retrieval::Corpus> corpus;  ///< null when no documents are loaded
    std::shared_ptr<const nl2sql::Engine> sql;        ///< null when no store is loaded
    qa::QaConfig qa;
    Timestamp loaded_at{};
};

struct Health {
    bool index_built = false;
    std::size_t documents = 0;
    bool store_loaded = false;
    std::size_t tables = 0;
    std::size_t rows = 0;
    bool lake_attached = false;
    std::size_t sessions = 0;

    bool ready() const { return index_built && store_loaded; }
};

nlohmann::json to_json(const Health& health);

/// Chat sessions, routing and wiki access. Thread-safe: sessions are
/// independent and messages within one session are handled in arrival order.
class ChatService {
  public:
    /// `lake` backs the wiki endpoints and may be null.
    ChatService(std::shared_ptr<const Snapshot> snapshot, const lake::DataLake* lake = nullptr,
                std::vector<std::string> locales = {"pt", "en"});

    /// Documents from the lake, NL2SQL resources from the configured directory.
    /// A missing directory leaves the SQL route disabled.
    static std::shared_ptr<const Snapshot> build_snapshot(const lake::DataLake& lake, const Config& config);

    /// Throws InvalidArgument listing the supported tags.
    std::string open_session(std::string_view locale);

    /// Appends the user message and the bot reply to the session history and
    /// returns the reply. Throws NotFound for an unknown session and
    /// InvalidArgument for a duplicate id or a quote of an unknown message.
    ChatMessage handle_message(ChatMessage message);

    struct Exchange {
        ChatMessage user;  ///< as stored, with id and timestamp filled in
        ChatMessage bot;
    };
    Exchange exchange(ChatMessage message);

    /// Throws NotFound for an unknown session.
    std::vector<ChatMessage> history(const std::string& session_id) const;
    std::optional<Language> locale(const std::string& session_id) const;

    lake::WikiEntry get_wiki(const std::string& slug) const;
    std::vector<lake::WikiEntry> list_wiki(std::optional<lake::WikiAxis> axis = std::nullopt) const;

    Health health() const;

    /// Atomically replaces the answering resources; in-flight messages finish
    /// on the snapshot they started with.
    void reload(std::shared_ptr<const Snapshot> snapshot);
    std::shared_ptr<const Snapshot> snapshot() const;

  private:
    struct Slot {
        mutable std::mutex mutex;
        std::condition_variable turn;
        std::uint64_t next_ticket = 0;
        std::uint64_t serving = 0;
        std::uint64_t next_id = 1;
        std::unordered_set<std::string> ids;
        Session session;
    };

    std::shared_ptr<Slot> slot(const std::string& session_id) const;
    ChatMessage answer(const ChatMessage& user, Language locale, const Snapshot& snap) const;

    mutable std::mutex m_snapshot_mutex;
    std::shared_ptr<const Snapshot> m_snapshot;
    const lake::DataLake* m_lake;
    std::vector<std::string> m_locales;

    mutable std::mutex m_sessions_mutex;
    std::unordered_map<std::string, std::shared_ptr<Slot>> m_sessions;
    std::uint64_t m_session_counter = 0;
    std::uint64_t m_session_salt;
};

/// One protocol request in, one response out. Requests carry `op` (one of
/// open-session, send-message, fetch-history, wiki-get, wiki-list, health)
/// and an optional `id` echoed in the response. Responses are
/// `{"ok": true, "result": ...}` or `{"ok": false, "error": {"kind", "message"}}`.
nlohmann::json handle_frame(ChatService& service, const nlohmann::json& request);
/// Same, for one line of text; malformed JSON yields an error response.
std::string handle_line(ChatService& service, std::string_view line);

/// Persistent line-delimited JSON over TCP: one request per line, responses
/// written back in request order on the same connection.
class LineServer {
  public:
    LineServer(ChatService& service, std::string host, std::uint16_t port);
    ~LineServer();
    LineServer(const LineServer&) = delete;
    LineServer& operator=(const LineServer&) = delete;

    /// Binds and starts accepting; returns the bound port (useful with port 0).
    std::uint16_t start();
    void stop();

  private:
    void accept_loop();
    void serve(int fd);

    ChatService& m_service;
    std::string m_host;
    std::uint16_t m_port;
    int m_listen = -1;
    std::atomic<bool> m_running{false};
    std::thread m_acceptor;
    std::mutex m_clients_mutex;
    std::vector<std::thread> m_clients;
    std::vector<int> m_client_fds;
};

/// Request/response mirror: `POST /api/<op>` with the request frame as the
/// body, plus `GET /health`, `GET /wiki` and `GET /wiki/<slug>`.
class HttpServer {
  public:
    HttpServer(ChatService& service, std::string host, std::uint16_t port);
    ~HttpServer();
    HttpServer(const HttpServer&) = delete;
    HttpServer& operator=(const HttpServer&) = delete;

    std::uint16_t start();
    void stop();

  private:
    struct Impl;
    std::unique_ptr<Impl> m_impl;
};

}  // namespace amazul::controller
