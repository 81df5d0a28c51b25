#include "ragwatt/retrieval.hpp"

#include <algorithm>
#include <bit>
#include <cctype>
#include <cmath>
#include <cstring>
#include <fstream>
#include <future>

#include <httplib.h>
#include <json.hpp>

#include "ragwatt/hashing.hpp"

namespace ragwatt {

using nlohmann::json;

void l2_normalize(std::vector<float>& values) {
    double sq = 0.0;
    for (float v : values) sq += static_cast<double>(v) * v;
    if (sq == 0.0) {
        if (!values.empty()) values[0] = 1.0f;
        return;
    }
    const double inv = 1.0 / std::sqrt(sq);
    for (float& v : values) v = static_cast<float>(v * inv);
}

EmbeddingVector hash_embed(std::string_view text, size_t d) {
    std::string lowered;
    lowered.reserve(text.size());
    for (char c : text) {
        if (!std::isspace(static_cast<unsigned char>(c)) || !lowered.empty()) lowered.push_back(c);
    }
    while (!lowered.empty() && std::isspace(static_cast<unsigned char>(lowered.back()))) lowered.pop_back();
    if (lowered.empty()) throw EmptyInput("hash_embed: empty text");
    if (d < 8) throw DimensionError("hash_embed: dimension must be >= 8");
    for (char& c : lowered) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));

    std::vector<float> acc(d, 0.0f);
    const size_t gram = 3;
    const size_t n_grams = lowered.size() >= gram ? lowered.size() - gram + 1 : 1;
    const size_t width = lowered.size() >= gram ? gram : lowered.size();
    for (size_t i = 0; i < n_grams; ++i) {
        uint64_t h = fnv1a64(std::string_view(lowered).substr(i, width));
        const size_t bucket = static_cast<size_t>((h & 0x7fffffffffffffffull) % d);
        acc[bucket] += (h >> 63) ? -1.0f : 1.0f;
    }
    l2_normalize(acc);
    return EmbeddingVector{std::move(acc)};
}

double cosine(const EmbeddingVector& u, const EmbeddingVector& v) {
    if (u.dim() != v.dim())
        throw DimensionError("cosine: dimension mismatch " + std::to_string(u.dim()) + " vs " +
                             std::to_string(v.dim()));
    double dot = 0.0;
    for (size_t i = 0; i < u.values.size(); ++i)
        dot += static_cast<double>(u.values[i]) * static_cast<double>(v.values[i]);
    return dot;
}

namespace {

// score descending, then smaller id
bool hit_before(const RetrievalHit& a, const RetrievalHit& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.example_id < b.example_id;
}

}  // namespace

VectorIndex VectorIndex::build(const std::vector<EmbeddingVector>& vectors, std::vector<long long> ids) {
    if (vectors.empty()) throw EmptyIndex("cannot build an empty index");
    if (ids.size() != vectors.size()) throw DimensionError("ids and vectors must align");
    VectorIndex index;
    index.dim_ = vectors.front().dim();
    index.count_ = vectors.size();
    index.ids_ = std::move(ids);
    index.data_.reserve(index.count_ * index.dim_);
    for (const auto& v : vectors) {
        if (v.dim() != index.dim_) throw DimensionError("index vectors must share one dimension");
        index.data_.insert(index.data_.end(), v.values.begin(), v.values.end());
    }
    return index;
}

std::vector<RetrievalHit> VectorIndex::search(const EmbeddingVector& query, size_t k) const {
    if (count_ == 0) throw EmptyIndex("search on empty index");
    if (query.dim() != dim_)
        throw DimensionError("query dimension " + std::to_string(query.dim()) + " != index dimension " +
                             std::to_string(dim_));
    std::vector<RetrievalHit> hits(count_);
    const float* q = query.values.data();
    for (size_t i = 0; i < count_; ++i) {
        const float* r = data_.data() + i * dim_;
        double dot = 0.0;
        for (size_t j = 0; j < dim_; ++j) dot += static_cast<double>(r[j]) * static_cast<double>(q[j]);
        hits[i] = {ids_[i], dot};
    }
    const size_t take = std::min(k, count_);
    std::partial_sort(hits.begin(), hits.begin() + take, hits.end(), hit_before);
    hits.resize(take);
    return hits;
}

std::vector<RetrievalHit> brute_force_search(const std::vector<EmbeddingVector>& vectors,
                                             const EmbeddingVector& query, size_t k) {
    if (vectors.empty()) throw EmptyIndex("search on empty pool");
    std::vector<RetrievalHit> hits;
    hits.reserve(vectors.size());
    for (size_t i = 0; i < vectors.size(); ++i)
        hits.push_back({static_cast<long long>(i), cosine(query, vectors[i])});
    std::stable_sort(hits.begin(), hits.end(), hit_before);
    if (hits.size() > k) hits.resize(k);
    return hits;
}

namespace {

constexpr char kIndexMagic[4] = {'R', 'W', 'I', 'X'};
constexpr uint32_t kIndexVersion = 1;

template <class T>
void write_le(std::ostream& out, T v) {
    static_assert(std::is_integral_v<T>);
    for (size_t i = 0; i < sizeof(T); ++i) out.put(static_cast<char>((v >> (8 * i)) & 0xff));
}

template <class T>
T read_le(std::istream& in) {
    T v = 0;
    for (size_t i = 0; i < sizeof(T); ++i) {
        int c = in.get();
        if (c == EOF) throw IoError("truncated index file");
        v |= static_cast<T>(static_cast<unsigned char>(c)) << (8 * i);
    }
    return v;
}

std::filesystem::path sidecar_path(const std::filesystem::path& path) {
    return path.string() + ".meta.json";
}

}  // namespace

void VectorIndex::save(const std::filesystem::path& path, const IndexMeta& meta) const {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + path.string());
    out.write(kIndexMagic, 4);
    write_le<uint32_t>(out, kIndexVersion);
    write_le<uint32_t>(out, static_cast<uint32_t>(dim_));
    write_le<uint64_t>(out, static_cast<uint64_t>(count_));
    for (float f : data_) {
        uint32_t bits;
        std::memcpy(&bits, &f, 4);
        write_le<uint32_t>(out, bits);
    }
    if (!out) throw IoError("short write to " + path.string());

    json side{{"magic", "RWIX"},
              {"version", kIndexVersion},
              {"dim", dim_},
              {"count", count_},
              {"corpus_fingerprint", meta.corpus_fingerprint},
              {"provider", meta.provider},
              {"model", meta.model}};
    std::ofstream sout(sidecar_path(path), std::ios::binary | std::ios::trunc);
    if (!sout) throw IoError("cannot write " + sidecar_path(path).string());
    sout << side.dump(2) << '\n';
}

VectorIndex VectorIndex::load(const std::filesystem::path& path, const Corpus& pool, IndexMeta* meta) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot read " + path.string());
    char magic[4];
    in.read(magic, 4);
    if (in.gcount() != 4 || std::memcmp(magic, kIndexMagic, 4) != 0)
        throw IoError("not an index file: " + path.string());
    const uint32_t version = read_le<uint32_t>(in);
    if (version != kIndexVersion) throw IoError("unsupported index version " + std::to_string(version));
    const uint32_t dim = read_le<uint32_t>(in);
    const uint64_t count = read_le<uint64_t>(in);

    std::ifstream sin(sidecar_path(path), std::ios::binary);
    if (!sin) throw IoError("missing index sidecar " + sidecar_path(path).string());
    json side = json::parse(sin, nullptr, false);
    if (side.is_discarded()) throw IoError("malformed index sidecar");
    const std::string fp = side.value("corpus_fingerprint", "");
    if (fp != pool.fingerprint)
        throw IndexMismatch("index was built for corpus " + fp + ", got " + pool.fingerprint);
    if (count != pool.size()) throw IndexMismatch("index row count does not match pool size");
    if (meta) {
        meta->corpus_fingerprint = fp;
        meta->provider = side.value("provider", "");
        meta->model = side.value("model", "");
    }

    VectorIndex index;
    index.dim_ = dim;
    index.count_ = count;
    index.data_.resize(count * dim);
    for (auto& f : index.data_) {
        uint32_t bits = read_le<uint32_t>(in);
        std::memcpy(&f, &bits, 4);
    }
    index.ids_.reserve(count);
    for (const auto& ex : pool.examples) index.ids_.push_back(ex.id);
    return index;
}

EmbeddingVector EmbeddingProvider::embed_one(const std::string& text) {
    auto vs = embed({text});
    if (vs.size() != 1) throw EmbedServiceError("provider returned " + std::to_string(vs.size()) + " vectors for 1 text");
    return std::move(vs.front());
}

std::vector<EmbeddingVector> HashEmbeddingProvider::embed(const std::vector<std::string>& texts) {
    std::vector<EmbeddingVector> out;
    out.reserve(texts.size());
    for (const auto& t : texts) out.push_back(hash_embed(t, dim_));
    return out;
}

RemoteEmbeddingProvider::RemoteEmbeddingProvider(std::string endpoint, std::string model, size_t expected_dim,
                                                 size_t batch_size, size_t in_flight)
    : endpoint_(std::move(endpoint)),
      model_(std::move(model)),
      dim_(expected_dim),
      batch_size_(batch_size == 0 ? 1 : batch_size),
      in_flight_(in_flight == 0 ? 1 : in_flight) {}

std::vector<EmbeddingVector> RemoteEmbeddingProvider::embed_batch(const std::vector<std::string>& texts) const {
    httplib::Client client(endpoint_);
    client.set_read_timeout(60, 0);
    json body{{"model", model_}, {"input", texts}};
    auto res = client.Post("/v1/embeddings", body.dump(), "application/json");
    if (!res)
        throw EmbedServiceError("embedding service unreachable at " + endpoint_ + ": " + httplib::to_string(res.error()));
    if (res->status != 200)
        throw EmbedServiceError("embedding service returned HTTP " + std::to_string(res->status),
                                res->status >= 500);

    json j = json::parse(res->body, nullptr, false);
    if (j.is_discarded() || !j.contains("data") || !j["data"].is_array())
        throw EmbedServiceError("malformed embedding response", false);

    std::vector<EmbeddingVector> out(texts.size());
    std::vector<bool> seen(texts.size(), false);
    for (const auto& item : j["data"]) {
        const size_t idx = item.value("index", static_cast<size_t>(texts.size()));
        if (idx >= texts.size() || !item.contains("embedding"))
            throw EmbedServiceError("embedding response index out of range", false);
        std::vector<float> values = item["embedding"].get<std::vector<float>>();
        for (float v : values)
            if (!std::isfinite(v)) throw EmbedServiceError("non-finite embedding component", false);
        if (dim_ != 0 && values.size() != dim_)
            throw DimensionError("embedding service returned dim " + std::to_string(values.size()) +
                                 ", expected " + std::to_string(dim_));
        l2_normalize(values);
        out[idx].values = std::move(values);
        seen[idx] = true;
    }
    for (size_t i = 0; i < texts.size(); ++i)
        if (!seen[i]) throw EmbedServiceError("embedding response missing index " + std::to_string(i), false);
    return out;
}

std::vector<EmbeddingVector> RemoteEmbeddingProvider::embed(const std::vector<std::string>& texts) {
    if (texts.empty()) throw EmptyInput("remote_embed: empty batch");

    std::vector<std::vector<std::string>> batches;
    for (size_t i = 0; i < texts.size(); i += batch_size_) {
        const size_t end = std::min(i + batch_size_, texts.size());
        batches.emplace_back(texts.begin() + i, texts.begin() + end);
    }

    // bounded window of async batches; order restored by batch position
    std::vector<EmbeddingVector> out;
    out.reserve(texts.size());
    std::vector<std::future<std::vector<EmbeddingVector>>> window;
    size_t next = 0, drained = 0;
    while (drained < batches.size()) {
        while (next < batches.size() && window.size() < in_flight_) {
            window.push_back(std::async(std::launch::async,
                                        [this, &batches, next] { return embed_batch(batches[next]); }));
            ++next;
        }
        auto vectors = window.front().get();
        window.erase(window.begin());
        for (auto& v : vectors) out.push_back(std::move(v));
        ++drained;
    }
    return out;
}

VectorIndex build_index(const Corpus& pool, EmbeddingProvider& provider) {
    if (pool.examples.empty()) throw EmptyCorpus("cannot index an empty pool");
    std::vector<std::string> texts;
    std::vector<long long> ids;
    texts.reserve(pool.size());
    ids.reserve(pool.size());
    for (const auto& ex : pool.examples) {
        texts.push_back(ex.nl);
        ids.push_back(ex.id);
    }
    auto vectors = provider.embed(texts);
    return VectorIndex::build(vectors, std::move(ids));
}

}  // namespace ragwatt
