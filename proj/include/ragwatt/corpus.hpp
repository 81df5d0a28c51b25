#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "ragwatt/errors.hpp"

namespace ragwatt {

enum class Lang { java, python };
enum class Source { concode, nl_python };

std::string to_string(Lang lang);
std::string to_string(Source source);
Lang lang_from_string(const std::string& s);
Source source_from_string(const std::string& s);

/// One natural-language description paired with its reference code.
struct CorpusExample {
    long long id = 0;
    std::string nl;
    std::string code;
    Lang lang = Lang::java;
    Source source = Source::concode;
};

struct Corpus {
    std::vector<CorpusExample> examples;  // ordered by id ascending
    std::string source_tag;
    std::string fingerprint;  // content hash over all records

    size_t size() const { return examples.size(); }
    const CorpusExample* find(long long id) const;
};

/// Retrieval pool vs evaluation queries, disjoint by id.
struct CorpusSplit {
    Corpus pool;
    Corpus queries;
    uint64_t seed = 0;
    double pool_fraction = 0.0;
};

enum class CorpusFormat { concode, nl_python, canonical };
CorpusFormat format_from_string(const std::string& s);

struct LoadStats {
    size_t parsed = 0;
    size_t dropped = 0;
    std::vector<std::pair<size_t, std::string>> drops;  // (line, reason)
};

struct LoadResult {
    Corpus corpus;
    LoadStats stats;
};

/// Parses one CONCODE-style JSONL line ({"nl": ..., "code": ...}).
CorpusExample parse_concode_record(const std::string& line, size_t line_no = 0);

/// Column indices resolved from the CSV header of the NL->Python dataset.
struct NlPythonColumns {
    size_t nl = 0;
    size_t code = 1;
};
NlPythonColumns resolve_nl_python_columns(const std::vector<std::string>& header);
CorpusExample parse_nl_python_record(const std::vector<std::string>& row, const NlPythonColumns& cols,
                                     size_t line_no = 0);

/// Reads a whole file. Malformed records are dropped and reported in the stats,
/// never silently; ids are assigned 0..n-1 in file order (canonical files keep theirs).
LoadResult load_corpus(const std::filesystem::path& path, CorpusFormat format);

std::string corpus_to_jsonl(const Corpus& corpus);
void save_corpus_jsonl(const Corpus& corpus, const std::filesystem::path& path);

std::string fingerprint_examples(const std::vector<CorpusExample>& examples);

/// Deterministic seeded shuffle; first ceil(n * pool_fraction) shuffled ids form the
/// pool (clamped so both sides stay non-empty), the rest the queries.
CorpusSplit split_corpus(const Corpus& corpus, uint64_t seed, double pool_fraction);

/// "Use provided split" path: pool and queries come from separate files.
CorpusSplit provided_split(Corpus pool, Corpus queries);

namespace csv {

/// Minimal RFC-4180 reader: quoted fields, embedded separators/newlines, "" escapes.
/// A quote opening mid-field or a dangling open quote raises ParseError.
class Reader {
  public:
    explicit Reader(std::istream& in, char sep = ',') : in_(in), sep_(sep) {}
    /// Reads one record; returns false on clean EOF.
    bool next(std::vector<std::string>& row);
    /// 1-based line on which the last record started.
    size_t line() const { return rec_line_; }

  private:
    std::istream& in_;
    char sep_;
    size_t cur_line_ = 1;
    size_t rec_line_ = 1;
};

}  // namespace csv

}  // namespace ragwatt
