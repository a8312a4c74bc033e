#include "amazul/topics.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <numeric>
#include <random>

#include "amazul/retriever.hpp"

namespace amazul::topics {

namespace {

constexpr double kEps = 1e-12;

Eigen::MatrixXd uniform(Eigen::Index rows, Eigen::Index cols, std::mt19937_64& rng, double scale)
{
    std::uniform_real_distribution<double> u(0.0, 1.0);
    Eigen::MatrixXd m(rows, cols);
    for (Eigen::Index j = 0; j < cols; ++j)
        for (Eigen::Index i = 0; i < rows; ++i)
            m(i, j) = u(rng) * scale;
    return m;
}

CoClusteringModel run_once(const Eigen::MatrixXd& X, const NmtfOptions& o, std::uint64_t seed)
{
    const auto m = X.rows(), n = X.cols();
    const auto k = static_cast<Eigen::Index>(o.k), l = static_cast<Eigen::Index>(o.l);
    std::mt19937_64 rng(seed);

    CoClusteringModel model;
    model.F = uniform(m, k, rng, 1.0);
    model.G = uniform(n, l, rng, 1.0);
    // E[F S G^T] = k l E[S] / 4 with uniform F, G; match the mean of X so the
    // result does not depend on the scale of X.
    double mean = X.mean();
    model.S = uniform(k, l, rng, 8.0 * mean / static_cast<double>(k * l));

    auto& F = model.F;
    auto& S = model.S;
    auto& G = model.G;
    double prev = objective(X, F, S, G);
    for (std::size_t it = 0; it < o.max_iter; ++it) {
        {
            Eigen::MatrixXd SGt = S * G.transpose();
            Eigen::MatrixXd num = X * SGt.transpose();
            Eigen::MatrixXd den = F * (SGt * SGt.transpose());
            F.array() *= num.array() / (den.array() + kEps);
        }
        {
            Eigen::MatrixXd FS = F * S;
            Eigen::MatrixXd num = X.transpose() * FS;
            Eigen::MatrixXd den = G * (FS.transpose() * FS);
            G.array() *= num.array() / (den.array() + kEps);
        }
        {
            Eigen::MatrixXd num = F.transpose() * X * G;
            Eigen::MatrixXd den = (F.transpose() * F) * S * (G.transpose() * G);
            S.array() *= num.array() / (den.array() + kEps);
        }
        double cur = objective(X, F, S, G);
        model.objective_trace.push_back(cur);
        if (o.tolerance > 0 && std::abs(prev - cur) <= o.tolerance * std::max(prev, kEps))
            break;
        prev = cur;
    }
    return model;
}

}  // namespace

void DocTermMatrix::validate() const
{
    if (static_cast<std::size_t>(X.rows()) != row_ids.size() || static_cast<std::size_t>(X.cols()) != col_terms.size())
        throw InvalidArgument("doc-term labels do not match the matrix shape");
    if (!X.allFinite())
        throw InvalidArgument("doc-term matrix has non-finite entries");
    if ((X.array() < 0).any())
        throw InvalidArgument("doc-term matrix has negative entries");
    for (Eigen::Index i = 0; i < X.rows(); ++i)
        if ((X.row(i).array() == 0).all())
            throw InvalidArgument("doc-term row " + std::to_string(i) + " is all zero");
}

DocTermMatrix build_doc_term_matrix(std::span<const lake::Document> documents, const text::Analyzer& analyzer)
{
    std::vector<retrieval::IndexInput> inputs;
    for (const auto& d : documents)
        if (!analyzer.analyze(d.body).empty())
            inputs.push_back({d.id, d.body});
    if (inputs.empty())
        throw InvalidArgument("no non-empty documents");
    auto index = retrieval::InvertedIndex::build(inputs, analyzer);

    DocTermMatrix out;
    std::map<std::string, Eigen::Index> col;
    for (const auto& [term, _] : index.all_postings())
        col.emplace(term, 0);
    for (auto& [term, c] : col) {
        c = static_cast<Eigen::Index>(out.col_terms.size());
        out.col_terms.push_back(term);
    }
    out.X = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(index.doc_count()), static_cast<Eigen::Index>(col.size()));
    for (std::size_t d = 0; d < index.doc_count(); ++d)
        out.row_ids.push_back(index.doc_id(static_cast<std::uint32_t>(d)));
    for (const auto& [term, postings] : index.all_postings()) {
        double idf = retrieval::tfidf_idf(index, term);
        for (const auto& p : postings)
            out.X(static_cast<Eigen::Index>(p.doc), col.at(term)) = static_cast<double>(p.tf) * idf;
    }
    return out;
}

double objective(const Eigen::MatrixXd& X, const Eigen::MatrixXd& F, const Eigen::MatrixXd& S,
                 const Eigen::MatrixXd& G)
{
    return (X - F * S * G.transpose()).squaredNorm();
}

CoClusteringModel factorize(const Eigen::MatrixXd& X, const NmtfOptions& o)
{
    if (o.k == 0 || o.k > static_cast<std::size_t>(X.rows()))
        throw InvalidArgument("k must be in 1.." + std::to_string(X.rows()));
    if (o.l == 0 || o.l > static_cast<std::size_t>(X.cols()))
        throw InvalidArgument("l must be in 1.." + std::to_string(X.cols()));
    if (!X.allFinite())
        throw InvalidArgument("matrix has non-finite entries");
    if ((X.array() < 0).any())
        throw InvalidArgument("matrix has negative entries");
    if (o.orthogonal)
        throw InvalidArgument("orthogonal NMTF is not implemented");

    std::size_t runs = std::max<std::size_t>(o.restarts, 1);
    if (runs == 1)
        return run_once(X, o, o.seed);

    // Restarts are independent; seeds derived from the base seed.
    std::seed_seq seq{o.seed};
    std::vector<std::uint32_t> seeds(runs);
    seq.generate(seeds.begin(), seeds.end());
    std::vector<std::future<CoClusteringModel>> jobs;
    for (std::size_t r = 0; r < runs; ++r)
        jobs.push_back(std::async(std::launch::async, [&X, &o, s = seeds[r]] { return run_once(X, o, s); }));
    CoClusteringModel best;
    bool have = false;
    for (auto& j : jobs) {
        auto model = j.get();
        if (!have || model.objective_trace.back() < best.objective_trace.back()) {
            best = std::move(model);
            have = true;
        }
    }
    return best;
}

CoClusteringModel factorize(const DocTermMatrix& matrix, const NmtfOptions& options)
{
    matrix.validate();
    auto model = factorize(matrix.X, options);
    model.row_ids = matrix.row_ids;
    model.col_terms = matrix.col_terms;
    return model;
}

std::vector<std::size_t> assign_rows(const Eigen::MatrixXd& F)
{
    std::vector<std::size_t> out(static_cast<std::size_t>(F.rows()), 0);
    for (Eigen::Index i = 0; i < F.rows(); ++i) {
        Eigen::Index best = 0;
        for (Eigen::Index j = 1; j < F.cols(); ++j)
            if (F(i, j) > F(i, best))
                best = j;
        out[static_cast<std::size_t>(i)] = static_cast<std::size_t>(best);
    }
    return out;
}

std::map<std::string, std::size_t> assign_topics(const CoClusteringModel& model)
{
    auto rows = assign_rows(model.F);
    std::map<std::string, std::size_t> out;
    for (std::size_t i = 0; i < rows.size(); ++i)
        out[i < model.row_ids.size() ? model.row_ids[i] : std::to_string(i)] = rows[i];
    return out;
}

std::vector<std::string> top_words(const CoClusteringModel& model, std::size_t topic, std::size_t t)
{
    if (topic >= static_cast<std::size_t>(model.G.cols()))
        throw InvalidArgument("topic " + std::to_string(topic) + " out of range");
    std::vector<std::size_t> order(static_cast<std::size_t>(model.G.rows()));
    std::iota(order.begin(), order.end(), 0);
    auto term = [&](std::size_t i) { return i < model.col_terms.size() ? model.col_terms[i] : std::to_string(i); };
    auto col = static_cast<Eigen::Index>(topic);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        double x = model.G(static_cast<Eigen::Index>(a), col), y = model.G(static_cast<Eigen::Index>(b), col);
        if (x != y)
            return x > y;
        return term(a) < term(b);
    });
    order.resize(std::min(t, order.size()));
    std::vector<std::string> out;
    for (auto i : order)
        out.push_back(term(i));
    return out;
}

}  // namespace amazul::topics
