#include "fhire/productivity.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numeric>
#include <unordered_set>

#include "fhire/error.hpp"
#include "fhire/rng.hpp"
#include "stopwords_data.hpp"

namespace fhire {

std::string_view stopword_list_version() { return generated::kStopwordVersion; }

const std::vector<std::string>& default_stopwords() {
    static const std::vector<std::string> words(std::begin(generated::kStopwords), std::end(generated::kStopwords));
    return words;
}

std::vector<std::string> tokenize_titles(const std::vector<std::string>& titles) {
    static const std::unordered_set<std::string> stop(default_stopwords().begin(), default_stopwords().end());
    std::vector<std::string> tokens;
    for (const auto& title : titles) {
        std::string current;
        auto flush = [&] {
            if (current.size() >= 2 && !stop.contains(current)) tokens.push_back(current);
            current.clear();
        };
        for (unsigned char c : title) {
            if (std::isalnum(c)) {
                current.push_back(static_cast<char>(std::tolower(c)));
            } else {
                flush();
            }
        }
        flush();
    }
    return tokens;
}

void Corpus::add_document(std::string id, const std::vector<std::string>& tokens) {
    std::vector<int> doc;
    doc.reserve(tokens.size());
    for (const auto& t : tokens) {
        auto [it, inserted] = index.emplace(t, static_cast<int>(vocabulary.size()));
        if (inserted) vocabulary.push_back(t);
        doc.push_back(it->second);
    }
    document_ids.push_back(std::move(id));
    documents.push_back(std::move(doc));
}

std::size_t Corpus::token_count() const {
    std::size_t total = 0;
    for (const auto& d : documents) total += d.size();
    return total;
}

std::vector<std::pair<int, double>> TopicModel::top_words(int topic, std::size_t count) const {
    const auto& row = phi.at(static_cast<std::size_t>(topic));
    std::vector<std::pair<int, double>> words;
    words.reserve(row.size());
    for (std::size_t w = 0; w < row.size(); ++w) words.emplace_back(static_cast<int>(w), row[w]);
    count = std::min(count, words.size());
    std::partial_sort(words.begin(), words.begin() + static_cast<long>(count), words.end(),
                      [](const auto& a, const auto& b) { return a.second > b.second || (a.second == b.second && a.first < b.first); });
    words.resize(count);
    return words;
}

TopicModel fit_lda(const Corpus& corpus, const LdaParams& params) {
    if (corpus.documents.empty()) throw DataError(DataErrorKind::EmptyInput, "corpus has no documents");
    if (corpus.vocabulary.empty()) throw DataError(DataErrorKind::EmptyInput, "corpus vocabulary is empty");
    if (params.topics < 1 || params.alpha <= 0 || params.beta <= 0) {
        throw std::invalid_argument("LDA needs topics >= 1 and positive alpha, beta");
    }
    const std::size_t K = static_cast<std::size_t>(params.topics);
    const std::size_t V = corpus.vocabulary.size();
    const std::size_t D = corpus.documents.size();
    const double vbeta = static_cast<double>(V) * params.beta;

    Rng rng(params.seed);
    std::vector<std::vector<int>> z(D);
    std::vector<int> doc_topic(D * K, 0);
    std::vector<int> word_topic(V * K, 0);
    std::vector<int> topic_total(K, 0);

    for (std::size_t d = 0; d < D; ++d) {
        const auto& doc = corpus.documents[d];
        z[d].resize(doc.size());
        for (std::size_t i = 0; i < doc.size(); ++i) {
            const auto k = rng.below(K);
            z[d][i] = static_cast<int>(k);
            ++doc_topic[d * K + k];
            ++word_topic[static_cast<std::size_t>(doc[i]) * K + k];
            ++topic_total[k];
        }
    }

    std::vector<double> cumulative(K);
    for (int it = 0; it < params.iterations; ++it) {
        for (std::size_t d = 0; d < D; ++d) {
            const auto& doc = corpus.documents[d];
            int* dt = &doc_topic[d * K];
            for (std::size_t i = 0; i < doc.size(); ++i) {
                int* wt = &word_topic[static_cast<std::size_t>(doc[i]) * K];
                const auto old = static_cast<std::size_t>(z[d][i]);
                --dt[old];
                --wt[old];
                --topic_total[old];

                double total = 0.0;
                for (std::size_t k = 0; k < K; ++k) {
                    total += (wt[k] + params.beta) / (topic_total[k] + vbeta) * (dt[k] + params.alpha);
                    cumulative[k] = total;
                }
                const double u = rng.uniform01() * total;
                std::size_t k = 0;
                while (k + 1 < K && cumulative[k] <= u) ++k;

                z[d][i] = static_cast<int>(k);
                ++dt[k];
                ++wt[k];
                ++topic_total[k];
            }
        }
    }

    TopicModel model;
    model.topics = params.topics;
    model.alpha = params.alpha;
    model.beta = params.beta;
    model.phi.assign(K, std::vector<double>(V));
    for (std::size_t k = 0; k < K; ++k) {
        for (std::size_t w = 0; w < V; ++w) {
            model.phi[k][w] = (word_topic[w * K + k] + params.beta) / (topic_total[k] + vbeta);
        }
    }
    model.theta.assign(D, std::vector<double>(K));
    const double kalpha = static_cast<double>(K) * params.alpha;
    for (std::size_t d = 0; d < D; ++d) {
        const double len = static_cast<double>(corpus.documents[d].size());
        for (std::size_t k = 0; k < K; ++k) model.theta[d][k] = (doc_topic[d * K + k] + params.alpha) / (len + kalpha);
    }
    return model;
}

double SubfieldStats::mean_sigma() const {
    double num = 0.0;
    double den = 0.0;
    for (std::size_t k = 0; k < sigma.size(); ++k) {
        num += weight[k] * sigma[k];
        den += weight[k];
    }
    return den > 0 ? num / den : 0.0;
}

SubfieldStats subfield_count_stats(const std::vector<std::vector<double>>& theta, std::span<const double> counts) {
    if (theta.size() != counts.size()) throw std::invalid_argument("theta rows and counts differ in length");
    if (theta.empty()) throw DataError(DataErrorKind::EmptyInput, "no documents");
    const std::size_t K = theta.front().size();

    SubfieldStats stats;
    stats.mu.assign(K, 0.0);
    stats.sigma.assign(K, 0.0);
    stats.weight.assign(K, 0.0);
    for (std::size_t i = 0; i < theta.size(); ++i) {
        if (theta[i].size() != K) throw std::invalid_argument("ragged theta");
        for (std::size_t k = 0; k < K; ++k) {
            stats.weight[k] += theta[i][k];
            stats.mu[k] += theta[i][k] * counts[i];
        }
    }
    for (std::size_t k = 0; k < K; ++k) {
        if (stats.weight[k] <= 0.0) {
            throw DataError(DataErrorKind::EmptyInput, "subfield " + std::to_string(k) + " has zero total weight");
        }
        stats.mu[k] /= stats.weight[k];
    }
    for (std::size_t i = 0; i < theta.size(); ++i) {
        for (std::size_t k = 0; k < K; ++k) {
            const double d = counts[i] - stats.mu[k];
            stats.sigma[k] += theta[i][k] * d * d;
        }
    }
    for (std::size_t k = 0; k < K; ++k) {
        stats.sigma[k] = std::max(kSigmaFloor, std::sqrt(stats.sigma[k] / stats.weight[k]));
    }
    return stats;
}

double composite_z(std::span<const double> theta, double count, const SubfieldStats& stats) {
    if (theta.size() != stats.mu.size()) throw std::invalid_argument("theta length differs from subfield count");
    double z = 0.0;
    for (std::size_t k = 0; k < theta.size(); ++k) z += theta[k] * (count - stats.mu[k]) / stats.sigma[k];
    return z;
}

}  // namespace fhire
