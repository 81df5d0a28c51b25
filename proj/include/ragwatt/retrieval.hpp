#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "ragwatt/corpus.hpp"
#include "ragwatt/errors.hpp"

namespace ragwatt {

/// Unit-norm dense vector (default width 384, matching common sentence embedders).
struct EmbeddingVector {
    std::vector<float> values;

    size_t dim() const { return values.size(); }
};

inline constexpr size_t kDefaultEmbeddingDim = 384;

/// Normalizes in place; an all-zero vector gets a deterministic unit fallback.
void l2_normalize(std::vector<float>& values);

/// Deterministic offline embedder: signed feature hashing of character 3-grams
/// of the lowercased text into d buckets, then L2 normalization. Same text and
/// d always produce the same vector, on any platform.
EmbeddingVector hash_embed(std::string_view text, size_t d = kDefaultEmbeddingDim);

/// Dot product of unit-norm vectors.
double cosine(const EmbeddingVector& u, const EmbeddingVector& v);

struct RetrievalHit {
    long long example_id = 0;
    double score = 0.0;  // cosine similarity in [-1, 1]
};

struct IndexMeta {
    std::string corpus_fingerprint;
    std::string provider;
    std::string model;
};

/// Exact flat index: every stored vector is scanned per query. Rows are kept in
/// pool order; row i answers for ids[i]. Ties in score resolve to the smaller id.
///
/// On-disk layout: header {magic "RWIX", version u32, dim u32, count u64}
/// followed by count*dim little-endian float32, plus a `<path>.meta.json`
/// sidecar carrying the pool fingerprint and provider tag.
class VectorIndex {
  public:
    VectorIndex() = default;

    static VectorIndex build(const std::vector<EmbeddingVector>& vectors, std::vector<long long> ids);

    size_t dim() const { return dim_; }
    size_t count() const { return count_; }
    long long id_at(size_t row) const { return ids_[row]; }
    const float* row(size_t i) const { return data_.data() + i * dim_; }

    std::vector<RetrievalHit> search(const EmbeddingVector& query, size_t k) const;

    void save(const std::filesystem::path& path, const IndexMeta& meta) const;
    /// Loads and verifies the sidecar fingerprint against `pool`; row ids come
    /// from the pool's example order.
    static VectorIndex load(const std::filesystem::path& path, const Corpus& pool, IndexMeta* meta = nullptr);

  private:
    std::vector<float> data_;  // count_ x dim_, row-major
    std::vector<long long> ids_;
    size_t dim_ = 0;
    size_t count_ = 0;
};

/// Reference semantics for search: every cosine computed, full sort, same tie rule.
std::vector<RetrievalHit> brute_force_search(const std::vector<EmbeddingVector>& vectors,
                                             const EmbeddingVector& query, size_t k);

/// Embedding source behind the index; experiments record which one produced it.
class EmbeddingProvider {
  public:
    virtual ~EmbeddingProvider() = default;
    virtual std::vector<EmbeddingVector> embed(const std::vector<std::string>& texts) = 0;
    virtual size_t dim() const = 0;
    virtual std::string tag() const = 0;

    EmbeddingVector embed_one(const std::string& text);
};

class HashEmbeddingProvider final : public EmbeddingProvider {
  public:
    explicit HashEmbeddingProvider(size_t d = kDefaultEmbeddingDim) : dim_(d) {}
    std::vector<EmbeddingVector> embed(const std::vector<std::string>& texts) override;
    size_t dim() const override { return dim_; }
    std::string tag() const override { return "hash"; }

  private:
    size_t dim_;
};

/// Client of an OpenAI-compatible embeddings endpoint:
/// POST /v1/embeddings {"model", "input": [...]} -> {"data": [{"index", "embedding"}]}.
/// Batches are issued with at most `in_flight` requests outstanding; results are
/// reassembled by position. Vectors are re-normalized on receipt.
class RemoteEmbeddingProvider final : public EmbeddingProvider {
  public:
    RemoteEmbeddingProvider(std::string endpoint, std::string model, size_t expected_dim = kDefaultEmbeddingDim,
                            size_t batch_size = 32, size_t in_flight = 1);
    std::vector<EmbeddingVector> embed(const std::vector<std::string>& texts) override;
    size_t dim() const override { return dim_; }
    std::string tag() const override { return "remote:" + model_; }

  private:
    std::vector<EmbeddingVector> embed_batch(const std::vector<std::string>& texts) const;

    std::string endpoint_;
    std::string model_;
    size_t dim_;
    size_t batch_size_;
    size_t in_flight_;
};

/// Embeds pool NL texts in corpus order and builds the flat index over them.
VectorIndex build_index(const Corpus& pool, EmbeddingProvider& provider);

}  // namespace ragwatt
