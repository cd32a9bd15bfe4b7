#include "requery/embedkit.hpp"

#include "requery/errors.hpp"
#include "requery/sqlkit.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace requery {

namespace {

std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return s;
}

bool parse_double(const std::string& field, double& out) {
    const char* begin = field.c_str();
    char* end = nullptr;
    out = std::strtod(begin, &end);
    return end == begin + field.size() && std::isfinite(out);
}

} // namespace

const std::vector<double>* VectorStore::lookup(const std::string& token) const {
    auto it = vectors_.find(token);
    return it == vectors_.end() ? nullptr : &it->second;
}

NameEmbedding VectorStore::embed_name(const std::string& name) const {
    NameEmbedding out;
    out.vector.assign(dim_, 0.0);
    for (const std::string& token : tokenize_name(name)) {
        const std::vector<double>* vec = lookup(token);
        if (!vec) continue; // out-of-vocabulary tokens are skipped, not zeroed
        for (std::size_t i = 0; i < dim_; ++i) out.vector[i] += (*vec)[i];
        ++out.known_token_count;
    }
    if (out.known_token_count > 0) {
        for (double& v : out.vector) v /= out.known_token_count;
    }
    return out;
}

VectorStore load_vectors(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw EmbeddingError("cannot open vector file: " + path.string());

    VectorStore store;
    std::string line;
    std::size_t line_no = 0;
    bool first_content_line = true;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        std::istringstream fields(line);
        std::vector<std::string> parts;
        std::string part;
        while (fields >> part) parts.push_back(part);
        if (parts.empty()) continue;

        if (first_content_line && parts.size() == 2) {
            // optional "count dim" header
            double a, b;
            if (parse_double(parts[0], a) && parse_double(parts[1], b)) {
                first_content_line = false;
                continue;
            }
        }
        first_content_line = false;

        if (parts.size() < 2)
            throw EmbeddingError(path.string() + ":" + std::to_string(line_no) +
                                 ": expected token followed by vector components");
        std::vector<double> vec;
        vec.reserve(parts.size() - 1);
        for (std::size_t i = 1; i < parts.size(); ++i) {
            double v;
            if (!parse_double(parts[i], v))
                throw EmbeddingError(path.string() + ":" + std::to_string(line_no) +
                                     ": malformed vector component '" + parts[i] + "'");
            vec.push_back(v);
        }
        if (store.dim_ == 0) {
            store.dim_ = vec.size();
        } else if (vec.size() != store.dim_) {
            throw EmbeddingError(path.string() + ":" + std::to_string(line_no) +
                                 ": dimension mismatch, expected " + std::to_string(store.dim_) +
                                 " got " + std::to_string(vec.size()));
        }
        store.vectors_[lower(parts[0])] = std::move(vec);
    }
    return store;
}

double cosine(const NameEmbedding& a, const NameEmbedding& b) {
    if (a.is_oov() || b.is_oov()) return 0.0;
    if (a.vector == b.vector) return 1.0; // keeps self-similarity exact at threshold 1.0
    double dot = 0.0, norm_a = 0.0, norm_b = 0.0;
    const std::size_t n = std::min(a.vector.size(), b.vector.size());
    for (std::size_t i = 0; i < n; ++i) {
        dot += a.vector[i] * b.vector[i];
        norm_a += a.vector[i] * a.vector[i];
        norm_b += b.vector[i] * b.vector[i];
    }
    if (norm_a == 0.0 || norm_b == 0.0) return 0.0; // never NaN
    return dot / (std::sqrt(norm_a) * std::sqrt(norm_b));
}

} // namespace requery
