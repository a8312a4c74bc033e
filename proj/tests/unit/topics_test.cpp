#include <doctest.h>

#include <random>
#include <set>

#include "amazul/topics.hpp"
#include "oracles/ari.hpp"
#include "support/fixtures.hpp"

using namespace amazul;
using namespace amazul::topics;

namespace {

Eigen::MatrixXd block4()
{
    Eigen::MatrixXd X(4, 4);
    X << 1, 1, 0, 0, 1, 1, 0, 0, 0, 0, 1, 1, 0, 0, 1, 1;
    return X;
}

Eigen::MatrixXd random_matrix(Eigen::Index m, Eigen::Index n, std::uint64_t seed)
{
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(0, 1);
    Eigen::MatrixXd X(m, n);
    for (Eigen::Index i = 0; i < m; ++i)
        for (Eigen::Index j = 0; j < n; ++j)
            X(i, j) = u(rng);
    return X;
}

bool non_increasing(const std::vector<double>& trace)
{
    for (std::size_t i = 1; i < trace.size(); ++i)
        if (trace[i] > trace[i - 1] + 1e-9)
            return false;
    return true;
}

}  // namespace

TEST_CASE("ARI oracle sanity")
{
    CHECK(oracle::adjusted_rand_index({0, 0, 1, 1}, {1, 1, 0, 0}) == doctest::Approx(1.0));
    CHECK(oracle::adjusted_rand_index({0, 0, 1, 1}, {0, 1, 0, 1}) < 0.0);
}

TEST_CASE("block-diagonal fixture recovers the planted partition")
{
    std::vector<std::size_t> planted = {0, 0, 1, 1};
    int recovered = 0;
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        NmtfOptions o;
        o.seed = seed;
        auto model = factorize(block4(), o);
        if (oracle::adjusted_rand_index(assign_rows(model.F), planted) == doctest::Approx(1.0))
            ++recovered;
        CHECK(non_increasing(model.objective_trace));
    }
    CHECK(recovered >= 4);
}

TEST_CASE("single cluster")
{
    NmtfOptions o;
    o.k = o.l = 1;
    auto model = factorize(random_matrix(6, 5, 1), o);
    for (auto t : assign_rows(model.F))
        CHECK(t == 0);
}

TEST_CASE("objective is non-increasing over 200 iterations and factors stay nonnegative")
{
    auto X = random_matrix(50, 80, 11);
    for (std::uint64_t seed = 0; seed < 3; ++seed) {
        NmtfOptions o;
        o.k = 4;
        o.l = 5;
        o.seed = seed;
        o.tolerance = 0;
        auto model = factorize(X, o);
        CHECK(model.objective_trace.size() == 200);
        CHECK(non_increasing(model.objective_trace));
        CHECK((model.F.array() >= 0).all());
        CHECK((model.S.array() >= 0).all());
        CHECK((model.G.array() >= 0).all());
        CHECK(model.objective_trace.back() == doctest::Approx(objective(X, model.F, model.S, model.G)));
    }
}

TEST_CASE("each update step keeps nonnegativity (1-iteration runs)")
{
    auto X = random_matrix(10, 12, 3);
    for (std::size_t iters = 1; iters <= 10; ++iters) {
        NmtfOptions o;
        o.k = 3;
        o.l = 3;
        o.max_iter = iters;
        o.tolerance = 0;
        auto m = factorize(X, o);
        CHECK(m.F.minCoeff() >= 0);
        CHECK(m.S.minCoeff() >= 0);
        CHECK(m.G.minCoeff() >= 0);
    }
}

TEST_CASE("scaling X keeps assignments; same seed reproduces bit-identically")
{
    auto X = random_matrix(30, 40, 5);
    NmtfOptions o;
    o.k = 3;
    o.l = 4;
    o.seed = 9;
    auto a = factorize(X, o);
    auto b = factorize(X, o);
    CHECK(assign_rows(a.F) == assign_rows(b.F));
    CHECK(a.objective_trace == b.objective_trace);
    for (double alpha : {0.001, 3.0, 250.0}) {
        auto c = factorize(Eigen::MatrixXd(X * alpha), o);
        CHECK(assign_rows(c.F) == assign_rows(a.F));
    }
}

TEST_CASE("convergence stops early and restarts pick the best objective")
{
    auto X = block4();
    NmtfOptions o;
    o.max_iter = 5000;
    auto m = factorize(X, o);
    CHECK(m.objective_trace.size() < 5000);

    o.max_iter = 200;
    o.restarts = 5;
    auto best = factorize(random_matrix(20, 20, 2), o);
    o.restarts = 1;
    CHECK(best.objective_trace.size() >= 1);
}

TEST_CASE("argument errors")
{
    NmtfOptions o;
    o.k = 5;
    CHECK_THROWS_AS(factorize(block4(), o), InvalidArgument);
    o.k = 2;
    o.l = 0;
    CHECK_THROWS_AS(factorize(block4(), o), InvalidArgument);
    o.l = 2;
    auto X = block4();
    X(0, 0) = std::nan("");
    CHECK_THROWS_AS(factorize(X, o), InvalidArgument);
    X(0, 0) = -1;
    CHECK_THROWS_AS(factorize(X, o), InvalidArgument);

    DocTermMatrix d{block4(), {"a", "b", "c", "d"}, {"w", "x", "y", "z"}};
    d.X.row(2).setZero();
    CHECK_THROWS_AS(d.validate(), InvalidArgument);
}

TEST_CASE("assign_topics and top_words")
{
    CoClusteringModel m;
    m.F.resize(2, 2);
    m.F << 0.9, 0.1, 0.5, 0.5;
    m.row_ids = {"a", "b"};
    auto t = assign_topics(m);
    CHECK(t.at("a") == 0);
    CHECK(t.at("b") == 0);

    m.G.resize(4, 1);
    m.G << 0.1, 5.0, 0.1, 0.2;
    m.col_terms = {"zeta", "dominant", "alpha", "mid"};
    CHECK(top_words(m, 0, 2) == std::vector<std::string>{"dominant", "mid"});
    CHECK(top_words(m, 0, 0).empty());
    CHECK(top_words(m, 0, 99) == std::vector<std::string>{"dominant", "mid", "alpha", "zeta"});
    CHECK_THROWS_AS(top_words(m, 1, 1), InvalidArgument);
}

TEST_CASE("planted corpus: topics and top words follow the blocks")
{
    std::vector<lake::Document> docs;
    auto mk = [&](const std::string& id, const std::string& body) {
        lake::Document d;
        d.id = id;
        d.body = body;
        docs.push_back(d);
    };
    mk("a1", "whale dolphin whale dolphin reef");
    mk("a2", "dolphin whale reef whale");
    mk("a3", "reef dolphin whale reef");
    mk("b1", "oil platform drilling oil");
    mk("b2", "drilling oil platform platform");
    mk("b3", "platform drilling oil drilling");
    mk("empty", "   ");
    auto dtm = build_doc_term_matrix(docs);
    CHECK(dtm.row_ids.size() == 6);
    CHECK(dtm.col_terms.size() == 6);
    CHECK_NOTHROW(dtm.validate());

    NmtfOptions o;
    o.restarts = 5;
    auto model = factorize(dtm, o);
    auto topics = assign_topics(model);
    CHECK(topics.at("a1") == topics.at("a2"));
    CHECK(topics.at("a2") == topics.at("a3"));
    CHECK(topics.at("b1") == topics.at("b2"));
    CHECK(topics.at("b2") == topics.at("b3"));
    CHECK(topics.at("a1") != topics.at("b1"));

    std::set<std::set<std::string>> word_sets;
    for (std::size_t c = 0; c < 2; ++c) {
        auto w = top_words(model, c, 3);
        word_sets.insert({w.begin(), w.end()});
    }
    CHECK(word_sets == std::set<std::set<std::string>>{{"dolphin", "reef", "whale"}, {"drilling", "oil", "platform"}});
}
