#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace fhire {

// Version tag of the built-in stopword list (data/stopwords_v1.txt).
std::string_view stopword_list_version();
const std::vector<std::string>& default_stopwords();

// Lowercase, split on non-alphanumerics, drop tokens shorter than two characters
// and stopwords.
std::vector<std::string> tokenize_titles(const std::vector<std::string>& titles);

struct Corpus {
    std::vector<std::string> document_ids;
    std::vector<std::vector<int>> documents;  // token indices
    std::vector<std::string> vocabulary;
    std::unordered_map<std::string, int> index;

    // Appends a document, growing the vocabulary as needed.
    void add_document(std::string id, const std::vector<std::string>& tokens);
    std::size_t token_count() const;
};

struct LdaParams {
    int topics = 10;
    double alpha = 5.0;
    double beta = 0.01;
    int iterations = 1000;
    std::uint64_t seed = 0;
};

struct TopicModel {
    int topics = 0;
    double alpha = 0.0;
    double beta = 0.0;
    std::vector<std::vector<double>> phi;    // topics x vocabulary
    std::vector<std::vector<double>> theta;  // documents x topics

    // Most probable words of one topic, best first.
    std::vector<std::pair<int, double>> top_words(int topic, std::size_t count) const;
};

// Collapsed Gibbs sampling; phi and theta are read from the final state.
TopicModel fit_lda(const Corpus& corpus, const LdaParams& params);

inline constexpr double kSigmaFloor = 1e-6;

struct SubfieldStats {
    std::vector<double> mu;
    std::vector<double> sigma;
    std::vector<double> weight;  // total topic mass per subfield

    // Sigma averaged with subfield mass as weights.
    double mean_sigma() const;
};

// Weighted mean and population std of paper counts per subfield.
// Throws DataError(EmptyInput) if some subfield carries no weight.
SubfieldStats subfield_count_stats(const std::vector<std::vector<double>>& theta,
                                   std::span<const double> counts);

double composite_z(std::span<const double> theta, double count, const SubfieldStats& stats);

}  // namespace fhire
