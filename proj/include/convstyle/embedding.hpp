#pragma once

#include "convstyle/dialogue.hpp"
#include "convstyle/http_client.hpp"

#include <map>
#include <memory>
#include <mutex>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace convstyle {

struct EmbeddingVector {
    std::vector<double> values;

    [[nodiscard]] std::size_t dimension() const noexcept { return values.size(); }
    bool operator==(const EmbeddingVector&) const = default;
};

/// Maps text to a fixed-width vector. Implementations must be deterministic and safe to call
/// from several threads at once.
class EmbeddingProvider {
public:
    virtual ~EmbeddingProvider() = default;

    [[nodiscard]] virtual std::string name() const = 0;
    [[nodiscard]] virtual std::size_t dimension() const = 0;

    /// `text` is already known to be non-blank.
    [[nodiscard]] virtual EmbeddingVector embed(std::string_view text) const = 0;

    [[nodiscard]] virtual std::vector<EmbeddingVector> embed_batch(
        std::span<const std::string> texts) const;
};

/// Lower-cased whitespace tokens hashed (FNV-1a) into a term-frequency vector.
/// Values are raw counts; cosine similarity makes normalisation unnecessary.
class HashedTfEmbedder final : public EmbeddingProvider {
public:
    static constexpr std::size_t kDefaultDimension = 4096;

    explicit HashedTfEmbedder(std::size_t dimension = kDefaultDimension);

    [[nodiscard]] std::string name() const override;
    [[nodiscard]] std::size_t dimension() const override { return dimension_; }
    [[nodiscard]] EmbeddingVector embed(std::string_view text) const override;

    /// Bucket a single (already lower-cased) token lands in.
    [[nodiscard]] std::size_t bucket(std::string_view token) const noexcept;

private:
    std::size_t dimension_;
};

struct RemoteEmbedderOptions {
    HttpOptions http;
    /// 0 means "learn from the first reply".
    std::size_t dimension = 0;
    std::size_t batch_size = 32;
    std::string model_name = "remote";
};

/// POST {endpoint}/embed {"texts": [...]} -> {"vectors": [[...]]}.
class RemoteEmbedder final : public EmbeddingProvider {
public:
    explicit RemoteEmbedder(RemoteEmbedderOptions options);

    [[nodiscard]] std::string name() const override;
    [[nodiscard]] std::size_t dimension() const override;
    [[nodiscard]] EmbeddingVector embed(std::string_view text) const override;
    [[nodiscard]] std::vector<EmbeddingVector> embed_batch(
        std::span<const std::string> texts) const override;

private:
    RemoteEmbedderOptions options_;
    JsonHttpClient http_;
    mutable std::mutex dim_mu_;
    mutable std::size_t dimension_;
};

/// Memoises another provider by (provider name, text).
class CachingEmbedder final : public EmbeddingProvider {
public:
    explicit CachingEmbedder(std::shared_ptr<const EmbeddingProvider> inner);

    [[nodiscard]] std::string name() const override { return inner_->name(); }
    [[nodiscard]] std::size_t dimension() const override { return inner_->dimension(); }
    [[nodiscard]] EmbeddingVector embed(std::string_view text) const override;

    [[nodiscard]] std::size_t cache_size() const;

private:
    std::shared_ptr<const EmbeddingProvider> inner_;
    mutable std::mutex mu_;
    mutable std::map<std::pair<std::string, std::string>, EmbeddingVector, std::less<>> cache_;
};

/// Validates input (EmptyInput) and output (finite, provider dimension) around provider.embed.
EmbeddingVector embed_text(const EmbeddingProvider& provider, std::string_view text);

/// Throws DimensionMismatch or ZeroVector.
double cosine_similarity(const EmbeddingVector& a, const EmbeddingVector& b);

/// Texts of `party`'s turns joined with single spaces. Throws NoSuchPartyTurns.
std::string concat_party_utterances(std::span<const Turn> turns, Speaker party);

}  // namespace convstyle
