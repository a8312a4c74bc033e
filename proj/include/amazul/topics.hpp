#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "amazul/datalake.hpp"
#include "amazul/text.hpp"

namespace amazul::topics {

/// Rows are documents, columns are vocabulary terms.
struct DocTermMatrix {
    Eigen::MatrixXd X;
    std::vector<std::string> row_ids;
    std::vector<std::string> col_terms;

    /// Throws InvalidArgument on negative or non-finite entries, all-zero rows,
    /// or labels that do not match the shape.
    void validate() const;
};

/// TF-IDF weights (raw counts times smoothed IDF). Documents with no tokens
/// are left out. Terms are sorted.
DocTermMatrix build_doc_term_matrix(std::span<const lake::Document> documents, const text::Analyzer& analyzer = {});

struct NmtfOptions {
    std::size_t k = 2;  ///< document clusters
    std::size_t l = 2;  ///< term clusters
    std::size_t max_iter = 200;
    std::uint64_t seed = 0;
    double tolerance = 1e-6;  ///< relative objective change; 0 runs all iterations
    std::size_t restarts = 1; ///< best final objective wins
    bool orthogonal = false;  ///< orthogonality penalty; not implemented, rejected when set
};

struct CoClusteringModel {
    Eigen::MatrixXd F;  ///< m x k
    Eigen::MatrixXd S;  ///< k x l
    Eigen::MatrixXd G;  ///< n x l
    std::vector<double> objective_trace;  ///< after each iteration
    std::vector<std::string> row_ids;
    std::vector<std::string> col_terms;
};

/// ||X - F S G^T||_F^2
double objective(const Eigen::MatrixXd& X, const Eigen::MatrixXd& F, const Eigen::MatrixXd& S,
                 const Eigen::MatrixXd& G);

/// Multiplicative updates with uniform random initialisation from the seed.
/// Throws InvalidArgument when k or l is 0 or exceeds the matrix shape.
CoClusteringModel factorize(const DocTermMatrix& matrix, const NmtfOptions& options);
CoClusteringModel factorize(const Eigen::MatrixXd& X, const NmtfOptions& options);

/// Row argmax of F, ties to the lowest index.
std::vector<std::size_t> assign_rows(const Eigen::MatrixXd& F);

/// Document id -> topic.
std::map<std::string, std::size_t> assign_topics(const CoClusteringModel& model);

/// The `t` terms with the largest G entries in column `topic`, descending,
/// ties lexicographic. Truncated to the vocabulary size.
std::vector<std::string> top_words(const CoClusteringModel& model, std::size_t topic, std::size_t t);

}  // namespace amazul::topics
