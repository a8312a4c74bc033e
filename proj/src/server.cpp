#include "amazul/controller.hpp"

#include <arpa/inet.h>
#include <netinet/in.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>

#include <httplib.h>

namespace amazul::controller {

namespace {

constexpr std::size_t kMaxLine = 1 << 20;

bool write_all(int fd, std::string_view data)
{
    while (!data.empty()) {
        auto n = ::send(fd, data.data(), data.size(), MSG_NOSIGNAL);
        if (n < 0 && errno == EINTR)
            continue;
        if (n <= 0)
            return false;
        data.remove_prefix(static_cast<std::size_t>(n));
    }
    return true;
}

}  // namespace

// ---------------------------------------------------------------------------
// line protocol

LineServer::LineServer(ChatService& service, std::string host, std::uint16_t port)
    : m_service(service), m_host(std::move(host)), m_port(port)
{}

LineServer::~LineServer()
{
    stop();
}

std::uint16_t LineServer::start()
{
    if (m_running)
        throw InvalidArgument("server already running");
    m_listen = ::socket(AF_INET, SOCK_STREAM, 0);
    if (m_listen < 0)
        throw Error(std::string("socket: ") + std::strerror(errno));
    int one = 1;
    ::setsockopt(m_listen, SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);
    sockaddr_in addr{};
    addr.sin_family = AF_INET;
    addr.sin_port = htons(m_port);
    if (::inet_pton(AF_INET, m_host.c_str(), &addr.sin_addr) != 1) {
        ::close(m_listen);
        throw InvalidArgument("bad IPv4 address '" + m_host + "'");
    }
    if (::bind(m_listen, reinterpret_cast<sockaddr*>(&addr), sizeof addr) < 0 || ::listen(m_listen, 64) < 0) {
        auto msg = std::string("bind ") + m_host + ":" + std::to_string(m_port) + ": " + std::strerror(errno);
        ::close(m_listen);
        m_listen = -1;
        throw Error(msg);
    }
    socklen_t len = sizeof addr;
    ::getsockname(m_listen, reinterpret_cast<sockaddr*>(&addr), &len);
    m_port = ntohs(addr.sin_port);
    m_running = true;
    m_acceptor = std::thread([this] { accept_loop(); });
    return m_port;
}

void LineServer::stop()
{
    if (!m_running.exchange(false))
        return;
    m_acceptor.join();
    ::close(m_listen);
    m_listen = -1;
    std::vector<std::thread> clients;
    {
        std::lock_guard lock(m_clients_mutex);
        for (int fd : m_client_fds)
            ::shutdown(fd, SHUT_RDWR);
        clients.swap(m_clients);
    }
    for (auto& t : clients)
        t.join();
    std::lock_guard lock(m_clients_mutex);
    for (int fd : m_client_fds)
        ::close(fd);
    m_client_fds.clear();
}

void LineServer::accept_loop()
{
    while (m_running) {
        pollfd p{m_listen, POLLIN, 0};
        if (::poll(&p, 1, 100) <= 0)
            continue;
        int fd = ::accept(m_listen, nullptr, nullptr);
        if (fd < 0)
            continue;
        std::lock_guard lock(m_clients_mutex);
        m_client_fds.push_back(fd);
        m_clients.emplace_back([this, fd] { serve(fd); });
    }
}

void LineServer::serve(int fd)
{
    std::string buffer;
    char chunk[4096];
    for (;;) {
        auto n = ::recv(fd, chunk, sizeof chunk, 0);
        if (n < 0 && errno == EINTR)
            continue;
        if (n <= 0)
            break;
        buffer.append(chunk, static_cast<std::size_t>(n));
        std::size_t start = 0;
        for (auto nl = buffer.find('\n'); nl != std::string::npos; nl = buffer.find('\n', start)) {
            std::string_view line(buffer.data() + start, nl - start);
            start = nl + 1;
            if (!line.empty() && line.back() == '\r')
                line.remove_suffix(1);
            if (line.find_first_not_of(" \t") == std::string_view::npos)
                continue;
            if (!write_all(fd, handle_line(m_service, line) + "\n"))
                return;
        }
        buffer.erase(0, start);
        if (buffer.size() > kMaxLine) {
            write_all(fd, R"({"ok":false,"error":{"kind":"invalid-argument","message":"line too long"}})"
                          "\n");
            break;
        }
    }
    ::shutdown(fd, SHUT_RDWR);
}

// ---------------------------------------------------------------------------
// HTTP mirror

struct HttpServer::Impl {
    Impl(ChatService& s, std::string h, std::uint16_t p) : service(s), host(std::move(h)), port(p) {}

    ChatService& service;
    std::string host;
    std::uint16_t port;
    httplib::Server server;
    std::thread thread;

    void reply(httplib::Response& res, const nlohmann::json& frame, int ok_status = 200)
    {
        int status = ok_status;
        if (!frame.value("ok", false)) {
            auto kind = frame["error"].value("kind", "");
            status = kind == "not-found" ? 404 : kind == "error" ? 500 : 400;
        }
        res.status = status;
        res.set_content(frame.dump(), "application/json");
    }
};

HttpServer::HttpServer(ChatService& service, std::string host, std::uint16_t port)
    : m_impl(std::make_unique<Impl>(service, std::move(host), port))
{
    auto* impl = m_impl.get();
    impl->server.Post(R"(/api/([a-z-]+))", [impl](const httplib::Request& req, httplib::Response& res) {
        auto body = nlohmann::json::parse(req.body.empty() ? "{}" : req.body, nullptr, false);
        if (body.is_discarded() || !body.is_object()) {
            impl->reply(res, {{"ok", false}, {"error", {{"kind", "parse-error"}, {"message", "body is not a JSON object"}}}});
            return;
        }
        body["op"] = req.matches[1].str();
        impl->reply(res, handle_frame(impl->service, body));
    });
    impl->server.Get("/health", [impl](const httplib::Request&, httplib::Response& res) {
        auto frame = handle_frame(impl->service, {{"op", "health"}});
        impl->reply(res, frame, frame["result"]["ready"].get<bool>() ? 200 : 503);
    });
    impl->server.Get("/wiki", [impl](const httplib::Request& req, httplib::Response& res) {
        nlohmann::json frame{{"op", "wiki-list"}};
        if (req.has_param("axis"))
            frame["axis"] = req.get_param_value("axis");
        impl->reply(res, handle_frame(impl->service, frame));
    });
    impl->server.Get(R"(/wiki/([^/]+))", [impl](const httplib::Request& req, httplib::Response& res) {
        impl->reply(res, handle_frame(impl->service, {{"op", "wiki-get"}, {"slug", req.matches[1].str()}}));
    });
}

HttpServer::~HttpServer()
{
    stop();
}

std::uint16_t HttpServer::start()
{
    auto& s = m_impl->server;
    if (m_impl->port == 0) {
        int p = s.bind_to_any_port(m_impl->host);
        if (p < 0)
            throw Error("cannot bind HTTP server on " + m_impl->host);
        m_impl->port = static_cast<std::uint16_t>(p);
    } else if (!s.bind_to_port(m_impl->host, m_impl->port)) {
        throw Error("cannot bind HTTP server on " + m_impl->host + ":" + std::to_string(m_impl->port));
    }
    m_impl->thread = std::thread([&s] { s.listen_after_bind(); });
    s.wait_until_ready();
    return m_impl->port;
}

void HttpServer::stop()
{
    if (!m_impl || !m_impl->thread.joinable())
        return;
    m_impl->server.stop();
    m_impl->thread.join();
}

}  // namespace amazul::controller
