#pragma once

#include <filesystem>
#include <string>
#include <unordered_map>
#include <vector>

namespace requery {

struct NameEmbedding {
    std::vector<double> vector;
    int known_token_count = 0;

    bool is_oov() const { return known_token_count == 0; }
};

// Plain-text word vectors: one token plus dim floats per line, optional
// "count dim" header. Immutable after load.
class VectorStore {
public:
    VectorStore() = default;

    std::size_t dim() const { return dim_; }
    std::size_t size() const { return vectors_.size(); }

    const std::vector<double>* lookup(const std::string& token) const;

    // Tokenize the identifier and average the vectors of in-vocabulary
    // tokens; out-of-vocabulary tokens are skipped. A name with no known
    // tokens yields the flagged zero embedding.
    NameEmbedding embed_name(const std::string& name) const;

    friend VectorStore load_vectors(const std::filesystem::path& path);

private:
    std::size_t dim_ = 0;
    std::unordered_map<std::string, std::vector<double>> vectors_;
};

VectorStore load_vectors(const std::filesystem::path& path);

// dot(a,b) / (|a||b|); 0 when either side is the zero/OOV embedding.
double cosine(const NameEmbedding& a, const NameEmbedding& b);

} // namespace requery
