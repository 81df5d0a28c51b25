#include "ragwatt/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <sstream>

#include <json.hpp>

#include "ragwatt/hashing.hpp"

namespace ragwatt {

using nlohmann::json;

std::string to_string(Lang lang) { return lang == Lang::java ? "java" : "python"; }
std::string to_string(Source source) { return source == Source::concode ? "concode" : "nl_python"; }

Lang lang_from_string(const std::string& s) {
    if (s == "java") return Lang::java;
    if (s == "python") return Lang::python;
    throw SchemaError("lang");
}

Source source_from_string(const std::string& s) {
    if (s == "concode") return Source::concode;
    if (s == "nl_python") return Source::nl_python;
    throw SchemaError("source");
}

CorpusFormat format_from_string(const std::string& s) {
    if (s == "concode") return CorpusFormat::concode;
    if (s == "nl_python") return CorpusFormat::nl_python;
    if (s == "canonical") return CorpusFormat::canonical;
    throw ConfigError("unknown corpus format '" + s + "'");
}

const CorpusExample* Corpus::find(long long id) const {
    auto it = std::lower_bound(examples.begin(), examples.end(), id,
                               [](const CorpusExample& e, long long v) { return e.id < v; });
    if (it == examples.end() || it->id != id) return nullptr;
    return &*it;
}

namespace {

std::string trim(const std::string& s) {
    size_t a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return {};
    size_t b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

// lang must agree with source: concode carries Java, nl_python carries Python.
void check_example(const CorpusExample& ex, size_t line_no) {
    if (ex.id < 0) throw SchemaError("id", line_no);
    if (ex.nl.empty()) throw SchemaError("nl", line_no);
    if (ex.code.empty()) throw SchemaError("code", line_no);
    if (ex.source == Source::concode && ex.lang != Lang::java) throw SchemaError("lang", line_no);
    if (ex.source == Source::nl_python && ex.lang != Lang::python) throw SchemaError("lang", line_no);
}

std::string json_string_field(const json& j, const char* key, size_t line_no) {
    auto it = j.find(key);
    if (it == j.end() || !it->is_string()) throw SchemaError(key, line_no);
    return it->get<std::string>();
}

}  // namespace

CorpusExample parse_concode_record(const std::string& line, size_t line_no) {
    json j = json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.is_object()) throw ParseError("malformed JSON record", line_no);
    CorpusExample ex;
    ex.nl = trim(json_string_field(j, "nl", line_no));
    ex.code = trim(json_string_field(j, "code", line_no));
    ex.lang = Lang::java;
    ex.source = Source::concode;
    check_example(ex, line_no);
    return ex;
}

NlPythonColumns resolve_nl_python_columns(const std::vector<std::string>& header) {
    auto match = [&](std::initializer_list<const char*> names) -> long {
        for (size_t i = 0; i < header.size(); ++i) {
            std::string h = trim(header[i]);
            std::transform(h.begin(), h.end(), h.begin(), [](unsigned char c) { return std::tolower(c); });
            for (const char* name : names)
                if (h == name) return static_cast<long>(i);
        }
        return -1;
    };
    long nl = match({"nl", "description", "problem", "question", "text", "prompt"});
    long code = match({"code", "solution", "python", "python code", "answer", "output"});
    if (nl < 0) throw SchemaError("nl");
    if (code < 0) throw SchemaError("code");
    return {static_cast<size_t>(nl), static_cast<size_t>(code)};
}

CorpusExample parse_nl_python_record(const std::vector<std::string>& row, const NlPythonColumns& cols,
                                     size_t line_no) {
    CorpusExample ex;
    ex.nl = cols.nl < row.size() ? trim(row[cols.nl]) : "";
    ex.code = cols.code < row.size() ? trim(row[cols.code]) : "";
    ex.lang = Lang::python;
    ex.source = Source::nl_python;
    check_example(ex, line_no);
    return ex;
}

std::string fingerprint_examples(const std::vector<CorpusExample>& examples) {
    uint64_t h = kFnvOffset;
    for (const auto& ex : examples) {
        h = fnv1a64(std::to_string(ex.id), h);
        h = fnv1a64("\x1f", h);
        h = fnv1a64(ex.nl, h);
        h = fnv1a64("\x1f", h);
        h = fnv1a64(ex.code, h);
        h = fnv1a64("\x1f", h);
        h = fnv1a64(to_string(ex.lang), h);
        h = fnv1a64("\x1f", h);
        h = fnv1a64(to_string(ex.source), h);
        h = fnv1a64("\x1e", h);
    }
    return hex64(h);
}

namespace {

CorpusExample parse_canonical_record(const std::string& line, size_t line_no) {
    json j = json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.is_object()) throw ParseError("malformed JSON record", line_no);
    CorpusExample ex;
    auto id_it = j.find("id");
    if (id_it == j.end() || !id_it->is_number_integer()) throw SchemaError("id", line_no);
    ex.id = id_it->get<long long>();
    ex.nl = trim(json_string_field(j, "nl", line_no));
    ex.code = trim(json_string_field(j, "code", line_no));
    ex.lang = lang_from_string(json_string_field(j, "lang", line_no));
    ex.source = source_from_string(json_string_field(j, "source", line_no));
    check_example(ex, line_no);
    return ex;
}

LoadResult load_jsonl(std::istream& in, CorpusFormat format, const std::string& tag) {
    LoadResult out;
    out.corpus.source_tag = tag;
    std::string line;
    size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        try {
            CorpusExample ex = format == CorpusFormat::canonical ? parse_canonical_record(line, line_no)
                                                                 : parse_concode_record(line, line_no);
            out.corpus.examples.push_back(std::move(ex));
            ++out.stats.parsed;
        } catch (const Error& e) {
            ++out.stats.dropped;
            out.stats.drops.emplace_back(line_no, e.what());
        }
    }
    return out;
}

LoadResult load_nl_python(std::istream& in) {
    LoadResult out;
    out.corpus.source_tag = "nl_python";
    csv::Reader reader(in);
    std::vector<std::string> row;
    // header row is a convention of the dataset, not an example
    if (!reader.next(row)) return out;
    NlPythonColumns cols;
    try {
        cols = resolve_nl_python_columns(row);
    } catch (const Error& e) {
        ++out.stats.dropped;
        out.stats.drops.emplace_back(reader.line(), std::string("header: ") + e.what());
        return out;
    }
    while (true) {
        try {
            if (!reader.next(row)) break;
            out.corpus.examples.push_back(parse_nl_python_record(row, cols, reader.line()));
            ++out.stats.parsed;
        } catch (const ParseError& e) {
            // bad quoting desynchronizes the stream; classify and stop
            ++out.stats.dropped;
            out.stats.drops.emplace_back(e.line, e.what());
            break;
        } catch (const Error& e) {
            ++out.stats.dropped;
            out.stats.drops.emplace_back(reader.line(), e.what());
        }
    }
    return out;
}

}  // namespace

LoadResult load_corpus(const std::filesystem::path& path, CorpusFormat format) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot read " + path.string());

    LoadResult out;
    switch (format) {
        case CorpusFormat::concode:
            out = load_jsonl(in, format, "concode");
            break;
        case CorpusFormat::canonical:
            out = load_jsonl(in, format, "canonical");
            break;
        case CorpusFormat::nl_python:
            out = load_nl_python(in);
            break;
    }
    if (out.corpus.examples.empty()) throw EmptyCorpus("no valid records in " + path.string());

    if (format == CorpusFormat::canonical) {
        std::sort(out.corpus.examples.begin(), out.corpus.examples.end(),
                  [](const CorpusExample& a, const CorpusExample& b) { return a.id < b.id; });
        for (size_t i = 1; i < out.corpus.examples.size(); ++i)
            if (out.corpus.examples[i].id == out.corpus.examples[i - 1].id)
                throw SchemaError("id");
    } else {
        for (size_t i = 0; i < out.corpus.examples.size(); ++i)
            out.corpus.examples[i].id = static_cast<long long>(i);
    }
    out.corpus.fingerprint = fingerprint_examples(out.corpus.examples);
    return out;
}

std::string corpus_to_jsonl(const Corpus& corpus) {
    std::ostringstream out;
    for (const auto& ex : corpus.examples) {
        json j{{"id", ex.id},
               {"nl", ex.nl},
               {"code", ex.code},
               {"lang", to_string(ex.lang)},
               {"source", to_string(ex.source)}};
        out << j.dump() << '\n';
    }
    return out.str();
}

void save_corpus_jsonl(const Corpus& corpus, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + path.string());
    out << corpus_to_jsonl(corpus);
    if (!out) throw IoError("short write to " + path.string());
}

CorpusSplit split_corpus(const Corpus& corpus, uint64_t seed, double pool_fraction) {
    if (!(pool_fraction > 0.0 && pool_fraction < 1.0))
        throw ConfigError("pool_fraction must be in (0,1), got " + std::to_string(pool_fraction));
    const size_t n = corpus.size();
    if (n < 2) throw ConfigError("corpus too small to split (need >= 2 examples)");

    std::vector<size_t> order(n);
    for (size_t i = 0; i < n; ++i) order[i] = i;
    std::mt19937_64 rng(seed);
    for (size_t i = n - 1; i > 0; --i) {
        size_t j = bounded_rand(rng, i + 1);
        std::swap(order[i], order[j]);
    }

    size_t pool_size = static_cast<size_t>(std::ceil(static_cast<double>(n) * pool_fraction));
    pool_size = std::clamp<size_t>(pool_size, 1, n - 1);

    CorpusSplit split;
    split.seed = seed;
    split.pool_fraction = pool_fraction;
    split.pool.source_tag = corpus.source_tag;
    split.queries.source_tag = corpus.source_tag;
    for (size_t i = 0; i < n; ++i)
        (i < pool_size ? split.pool : split.queries).examples.push_back(corpus.examples[order[i]]);

    auto by_id = [](const CorpusExample& a, const CorpusExample& b) { return a.id < b.id; };
    std::sort(split.pool.examples.begin(), split.pool.examples.end(), by_id);
    std::sort(split.queries.examples.begin(), split.queries.examples.end(), by_id);
    split.pool.fingerprint = fingerprint_examples(split.pool.examples);
    split.queries.fingerprint = fingerprint_examples(split.queries.examples);
    return split;
}

CorpusSplit provided_split(Corpus pool, Corpus queries) {
    if (pool.examples.empty()) throw EmptyCorpus("provided pool is empty");
    if (queries.examples.empty()) throw EmptyCorpus("provided query set is empty");
    CorpusSplit split;
    split.pool = std::move(pool);
    split.queries = std::move(queries);
    return split;
}

namespace csv {

bool Reader::next(std::vector<std::string>& row) {
    row.clear();
    int c = in_.get();
    if (c == EOF) return false;
    rec_line_ = cur_line_;

    std::string field;
    bool quoted = false;
    bool field_started_quoted = false;
    while (true) {
        if (quoted) {
            if (c == EOF) throw ParseError("unterminated quoted field", rec_line_);
            if (c == '"') {
                int peek = in_.get();
                if (peek == '"') {
                    field.push_back('"');
                } else {
                    quoted = false;
                    c = peek;
                    continue;  // reprocess the char after the closing quote
                }
            } else {
                if (c == '\n') ++cur_line_;
                field.push_back(static_cast<char>(c));
            }
        } else {
            if (c == '"') {
                if (!field.empty() || field_started_quoted)
                    throw ParseError("unescaped quote inside unquoted field", rec_line_);
                quoted = true;
                field_started_quoted = true;
            } else if (c == sep_) {
                row.push_back(std::move(field));
                field.clear();
                field_started_quoted = false;
            } else if (c == '\n' || c == EOF) {
                if (c == '\n') ++cur_line_;
                break;
            } else if (c == '\r') {
                int peek = in_.peek();
                if (peek == '\n' || peek == EOF) {
                    in_.get();
                    ++cur_line_;
                    break;
                }
                field.push_back('\r');
            } else {
                if (field_started_quoted)
                    throw ParseError("data after closing quote", rec_line_);
                field.push_back(static_cast<char>(c));
            }
        }
        c = in_.get();
    }
    row.push_back(std::move(field));
    return true;
}

}  // namespace csv

}  // namespace ragwatt
