#include "vngender/error.hpp"
#include "vngender/lstm.hpp"
#include "vngender/names.hpp"
#include "vngender/rng.hpp"

#include <charconv>
#include <fstream>
#include <istream>
#include <sstream>

namespace vngender {

EmbeddingTable::EmbeddingTable(std::size_t dim, std::uint64_t oov_seed) : dim_(dim), oov_seed_(oov_seed) {
    if (dim == 0) throw ConfigError("embedding dimension must be at least 1");
}

bool EmbeddingTable::contains(std::string_view token) const {
    return vectors_.find(std::string(token)) != vectors_.end();
}

bool EmbeddingTable::insert(std::string token, Eigen::VectorXd vec) {
    if (static_cast<std::size_t>(vec.size()) != dim_) {
        throw FormatError("embedding_dim", "vector for '" + token + "' has " + std::to_string(vec.size()) +
                                               " components, expected " + std::to_string(dim_));
    }
    return vectors_.emplace(std::move(token), std::move(vec)).second;
}

const Eigen::VectorXd& EmbeddingTable::lookup(std::string_view token) const {
    std::string key(token);
    if (auto it = vectors_.find(key); it != vectors_.end()) return it->second;

    std::lock_guard lock(oov_mutex_);
    if (auto it = oov_cache_.find(key); it != oov_cache_.end()) return it->second;
    Rng rng(derive_seed(oov_seed_, fnv1a64(key)));
    Eigen::VectorXd vec(static_cast<Eigen::Index>(dim_));
    for (Eigen::Index i = 0; i < vec.size(); ++i) vec[i] = rng.uniform(-0.05, 0.05);
    return oov_cache_.emplace(std::move(key), std::move(vec)).first->second;
}

namespace {

std::vector<std::string_view> split_spaces(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t i = 0;
    while (i < line.size()) {
        while (i < line.size() && (line[i] == ' ' || line[i] == '\t')) ++i;
        std::size_t j = i;
        while (j < line.size() && line[j] != ' ' && line[j] != '\t') ++j;
        if (j > i) out.push_back(line.substr(i, j - i));
        i = j;
    }
    return out;
}

template <typename T>
bool parse_number(std::string_view s, T& out) {
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
    return ec == std::errc() && ptr == s.data() + s.size();
}

[[noreturn]] void fail(std::size_t line_no, const std::string& what) {
    throw FormatError("embedding_format", "embeddings line " + std::to_string(line_no) + ": " + what);
}

} // namespace

std::unique_ptr<EmbeddingTable> parse_embeddings(std::istream& in, std::size_t expected_dim,
                                                 std::uint64_t oov_seed, std::vector<std::string>* warnings) {
    std::string line;
    std::size_t line_no = 1;
    if (!std::getline(in, line)) fail(1, "missing '<count> <dim>' header");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    auto header = split_spaces(line);
    std::size_t count = 0, dim = 0;
    if (header.size() != 2 || !parse_number(header[0], count) || !parse_number(header[1], dim)) {
        fail(1, "header must be '<count> <dim>'");
    }
    if (dim != expected_dim) {
        fail(1, "header dimension " + std::to_string(dim) + " does not match expected " +
                    std::to_string(expected_dim));
    }

    auto table = std::make_unique<EmbeddingTable>(dim, oov_seed);
    std::size_t rows = 0;
    std::vector<std::string> aliases_from, aliases_to;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        auto fields = split_spaces(line);
        if (fields.empty()) continue;
        if (fields.size() != dim + 1) {
            fail(line_no, "expected token plus " + std::to_string(dim) + " values, found " +
                              std::to_string(fields.size() - 1) + " values");
        }
        Eigen::VectorXd vec(static_cast<Eigen::Index>(dim));
        for (std::size_t k = 0; k < dim; ++k) {
            double x = 0.0;
            if (!parse_number(fields[k + 1], x)) {
                fail(line_no, "non-numeric component '" + std::string(fields[k + 1]) + "'");
            }
            vec[static_cast<Eigen::Index>(k)] = x;
        }
        ++rows;
        std::string token(fields[0]);
        if (!table->insert(token, std::move(vec))) {
            if (warnings) {
                warnings->push_back("line " + std::to_string(line_no) + ": duplicate token '" + token +
                                    "', keeping the first vector");
            }
            continue;
        }
        // Model tokens are NFC lowercase; remember an alias when the file's
        // spelling differs. The file's own spelling wins over aliases.
        try {
            std::string norm = normalize(token);
            if (norm != token) {
                aliases_from.push_back(token);
                aliases_to.push_back(std::move(norm));
            }
        } catch (const EmptyNameError&) {
        }
    }
    for (std::size_t i = 0; i < aliases_from.size(); ++i) {
        if (!table->contains(aliases_to[i])) table->insert(aliases_to[i], table->lookup(aliases_from[i]));
    }
    if (warnings && rows != count) {
        warnings->push_back("header announces " + std::to_string(count) + " vectors, file has " +
                            std::to_string(rows));
    }
    return table;
}

std::uint64_t file_content_hash(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("missing_file", "cannot open '" + path.string() + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return fnv1a64(buf.str());
}

std::unique_ptr<EmbeddingTable> load_embeddings(const std::filesystem::path& path, std::size_t expected_dim,
                                                std::uint64_t oov_seed, std::vector<std::string>* warnings) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("missing_file", "cannot open embeddings file '" + path.string() + "'");
    auto table = parse_embeddings(in, expected_dim, oov_seed, warnings);
    table->source_path = path;
    table->content_hash = file_content_hash(path);
    return table;
}

} // namespace vngender
