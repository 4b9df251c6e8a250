#include "vngender/data_io.hpp"

#include "vngender/error.hpp"
#include "vngender/names.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>
#include <unordered_set>

namespace vngender {

std::pair<std::size_t, std::size_t> Dataset::label_counts() const {
    std::size_t male = 0;
    for (const auto& r : records) male += r.gender == 1;
    return {records.size() - male, male};
}

namespace {

std::string_view trim(std::string_view s) {
    auto ws = [](char c) { return c == ' ' || c == '\t' || c == '\r' || c == '\n'; };
    while (!s.empty() && ws(s.front())) s.remove_prefix(1);
    while (!s.empty() && ws(s.back())) s.remove_suffix(1);
    return s;
}

// Splits one CSV line, honouring double-quoted fields with "" escapes.
// Returns nullopt on an unterminated quote.
std::optional<std::vector<std::string>> split_csv_line(std::string_view line) {
    std::vector<std::string> fields;
    std::string field;
    bool quoted = false;
    bool was_quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        char c = line[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    field += '"';
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                field += c;
            }
        } else if (c == '"' && trim(field).empty() && !was_quoted) {
            field.clear();
            quoted = true;
            was_quoted = true;
        } else if (c == ',') {
            fields.push_back(std::move(field));
            field.clear();
            was_quoted = false;
        } else {
            field += c;
        }
    }
    if (quoted) return std::nullopt;
    fields.push_back(std::move(field));
    return fields;
}

std::optional<int> parse_label(std::string_view s) {
    s = trim(s);
    if (s == "0") return 0;
    if (s == "1") return 1;
    return std::nullopt;
}

} // namespace

LoadResult parse_dataset_csv(std::string_view content, std::string source_tag) {
    LoadResult result;
    result.dataset.source_tag = std::move(source_tag);

    if (content.starts_with("\xEF\xBB\xBF")) content.remove_prefix(3);

    std::size_t line_no = 0;
    bool first_data_line = true;
    std::size_t pos = 0;
    while (pos < content.size()) {
        std::size_t eol = content.find('\n', pos);
        std::string_view line =
            content.substr(pos, eol == std::string_view::npos ? std::string_view::npos : eol - pos);
        pos = eol == std::string_view::npos ? content.size() : eol + 1;
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        if (trim(line).empty()) continue;

        auto reject = [&](std::string reason) {
            result.rejects.push_back({line_no, std::move(reason)});
        };

        auto fields = split_csv_line(line);
        if (!fields) {
            reject("unterminated quoted field");
            first_data_line = false;
            continue;
        }
        const bool header_candidate = first_data_line;
        first_data_line = false;
        if (fields->size() != 2) {
            reject("expected 2 fields, found " + std::to_string(fields->size()));
            continue;
        }
        auto label = parse_label((*fields)[1]);
        if (!label) {
            if (header_candidate) {
                result.had_header = true;
                continue;
            }
            reject("label must be 0 or 1, got '" + std::string(trim((*fields)[1])) + "'");
            continue;
        }
        std::string_view name = trim((*fields)[0]);
        if (!is_valid_utf8(name)) {
            reject("name is not valid UTF-8");
            continue;
        }
        try {
            (void)normalize(name);
        } catch (const EmptyNameError&) {
            reject("empty name");
            continue;
        }
        result.dataset.records.push_back({std::string(name), *label});
    }

    if (result.dataset.records.empty()) {
        std::string msg = "dataset '" + result.dataset.source_tag + "' has no valid rows";
        if (!result.rejects.empty()) {
            msg += " (" + std::to_string(result.rejects.size()) + " rejected; first at line " +
                   std::to_string(result.rejects.front().row) + ": " + result.rejects.front().reason +
                   ")";
        }
        throw DataError("dataset_empty", msg);
    }
    return result;
}

LoadResult load_dataset(const std::filesystem::path& path, DatasetFormat format) {
    if (format != DatasetFormat::Csv) throw ConfigError("unsupported dataset format");
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("missing_file", "cannot open dataset file '" + path.string() + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_dataset_csv(buf.str(), path.filename().string());
}

void write_dataset_csv(const Dataset& d, std::ostream& out) {
    out << "full_name,gender\n";
    for (const auto& r : d.records) {
        const bool needs_quotes = r.full_name.find_first_of(",\"\n") != std::string::npos;
        if (needs_quotes) {
            out << '"';
            for (char c : r.full_name) {
                if (c == '"') out << '"';
                out << c;
            }
            out << '"';
        } else {
            out << r.full_name;
        }
        out << ',' << r.gender << '\n';
    }
}

void save_dataset(const Dataset& d, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("io_error", "cannot write dataset file '" + path.string() + "'");
    write_dataset_csv(d, out);
    if (!out) throw DataError("io_error", "write failed for '" + path.string() + "'");
}

namespace {

std::vector<TokenCount> top_tokens(const std::map<std::string, std::size_t>& counts, std::size_t k) {
    std::vector<TokenCount> ranked(counts.begin(), counts.end());
    // std::map iteration is already lexicographic, so a stable sort by count
    // keeps ascending token order among ties.
    std::stable_sort(ranked.begin(), ranked.end(),
                     [](const TokenCount& a, const TokenCount& b) { return a.second > b.second; });
    if (ranked.size() > k) ranked.resize(k);
    return ranked;
}

} // namespace

DatasetStats dataset_stats(const Dataset& d, std::size_t top_k) {
    if (d.empty()) throw DataError("dataset_empty", "cannot compute statistics of an empty dataset");
    if (top_k == 0) throw ConfigError("top_k must be at least 1");

    DatasetStats s;
    s.total = d.size();
    std::map<std::string, std::size_t> family[2], middle[2], given[2];
    std::unordered_set<std::string> seen;
    for (const auto& r : d.records) {
        (r.gender == 1 ? s.male : s.female)++;
        std::string norm;
        try {
            norm = normalize(r.full_name);
        } catch (const EmptyNameError&) {
            ++s.unparseable;
            continue;
        }
        if (!seen.insert(norm).second) ++s.duplicate_names;
        NameComponents c = segment(norm);
        const int g = r.gender == 1 ? 1 : 0;
        if (c.family) ++family[g][*c.family];
        for (const auto& m : c.middle) ++middle[g][m];
        ++given[g][c.given];
    }
    s.male_fraction = static_cast<double>(s.male) / static_cast<double>(s.total);
    s.female_fraction = static_cast<double>(s.female) / static_cast<double>(s.total);

    s.top_family_names = {top_tokens(family[1], top_k), top_tokens(family[0], top_k)};
    s.top_middle_tokens = {top_tokens(middle[1], top_k), top_tokens(middle[0], top_k)};
    s.top_given_names = {top_tokens(given[1], top_k), top_tokens(given[0], top_k)};
    return s;
}

void write_stats_tsv(const DatasetStats& s, std::ostream& out) {
    out << "metric\tvalue\n";
    out << "total\t" << s.total << '\n';
    out << "male\t" << s.male << '\n';
    out << "female\t" << s.female << '\n';
    out << "male_fraction\t" << s.male_fraction << '\n';
    out << "female_fraction\t" << s.female_fraction << '\n';
    out << "duplicate_names\t" << s.duplicate_names << '\n';
    if (s.unparseable) out << "unparseable\t" << s.unparseable << '\n';

    auto table = [&](const char* title, const ComponentTable& t) {
        out << '\n' << "component\tgender\trank\ttoken\tcount\n";
        auto rows = [&](const char* gender, const std::vector<TokenCount>& v) {
            for (std::size_t i = 0; i < v.size(); ++i) {
                out << title << '\t' << gender << '\t' << i + 1 << '\t' << v[i].first << '\t'
                    << v[i].second << '\n';
            }
        };
        rows("male", t.male);
        rows("female", t.female);
    };
    table("family", s.top_family_names);
    table("middle", s.top_middle_tokens);
    table("given", s.top_given_names);
}

} // namespace vngender
