#include "convstyle/embedding.hpp"

#include "convstyle/error.hpp"
#include "convstyle/util.hpp"

#include <cmath>

namespace convstyle {

std::vector<EmbeddingVector> EmbeddingProvider::embed_batch(std::span<const std::string> texts) const {
    std::vector<EmbeddingVector> out;
    out.reserve(texts.size());
    for (const auto& t : texts) out.push_back(embed(t));
    return out;
}

HashedTfEmbedder::HashedTfEmbedder(std::size_t dimension) : dimension_(dimension) {
    if (dimension_ == 0) throw Error(ErrorKind::InvalidConfig, "embedding dimension must be positive");
}

std::string HashedTfEmbedder::name() const {
    return "hashed-tf-" + std::to_string(dimension_);
}

std::size_t HashedTfEmbedder::bucket(std::string_view token) const noexcept {
    return static_cast<std::size_t>(stable_hash(token) % dimension_);
}

EmbeddingVector HashedTfEmbedder::embed(std::string_view text) const {
    EmbeddingVector v{std::vector<double>(dimension_, 0.0)};
    for (const auto& token : split_whitespace(to_lower_ascii(text))) {
        v.values[bucket(token)] += 1.0;
    }
    return v;
}

RemoteEmbedder::RemoteEmbedder(RemoteEmbedderOptions options)
    : options_(std::move(options)), http_(options_.http), dimension_(options_.dimension) {}

std::string RemoteEmbedder::name() const {
    return "remote:" + options_.model_name;
}

std::size_t RemoteEmbedder::dimension() const {
    std::lock_guard lock(dim_mu_);
    return dimension_;
}

EmbeddingVector RemoteEmbedder::embed(std::string_view text) const {
    const std::string one(text);
    return embed_batch(std::span<const std::string>(&one, 1)).front();
}

std::vector<EmbeddingVector> RemoteEmbedder::embed_batch(std::span<const std::string> texts) const {
    std::vector<EmbeddingVector> out;
    out.reserve(texts.size());
    const std::size_t batch = std::max<std::size_t>(1, options_.batch_size);
    for (std::size_t start = 0; start < texts.size(); start += batch) {
        const auto chunk = texts.subspan(start, std::min(batch, texts.size() - start));
        Json reply;
        try {
            reply = http_.post("/embed", Json{{"texts", Json(std::vector<std::string>(chunk.begin(), chunk.end()))}});
        } catch (const Error& e) {
            throw Error(ErrorKind::ProviderUnavailable, e.what());
        }
        const auto vectors = reply.find("vectors");
        if (vectors == reply.end() || !vectors->is_array() || vectors->size() != chunk.size()) {
            throw Error(ErrorKind::ProviderUnavailable, "embedding reply lacks one vector per text");
        }
        for (const auto& v : *vectors) {
            EmbeddingVector ev;
            try {
                ev.values = v.get<std::vector<double>>();
            } catch (const Json::exception& e) {
                throw Error(ErrorKind::ProviderUnavailable, e.what());
            }
            {
                std::lock_guard lock(dim_mu_);
                if (dimension_ == 0) dimension_ = ev.dimension();
                if (ev.dimension() != dimension_) {
                    throw Error(ErrorKind::DimensionMismatch, "remote embedder returned dimension " +
                                                                  std::to_string(ev.dimension()));
                }
            }
            out.push_back(std::move(ev));
        }
    }
    return out;
}

CachingEmbedder::CachingEmbedder(std::shared_ptr<const EmbeddingProvider> inner) : inner_(std::move(inner)) {}

EmbeddingVector CachingEmbedder::embed(std::string_view text) const {
    auto key = std::make_pair(inner_->name(), std::string(text));
    {
        std::lock_guard lock(mu_);
        if (auto it = cache_.find(key); it != cache_.end()) return it->second;
    }
    auto v = inner_->embed(text);
    std::lock_guard lock(mu_);
    return cache_.emplace(std::move(key), std::move(v)).first->second;
}

std::size_t CachingEmbedder::cache_size() const {
    std::lock_guard lock(mu_);
    return cache_.size();
}

EmbeddingVector embed_text(const EmbeddingProvider& provider, std::string_view text) {
    if (trim(text).empty()) throw Error(ErrorKind::EmptyInput, "cannot embed blank text");
    auto v = provider.embed(text);
    if (v.dimension() == 0 || v.dimension() != provider.dimension()) {
        throw Error(ErrorKind::DimensionMismatch, provider.name() + " returned a vector of the wrong size");
    }
    for (double x : v.values) {
        if (!std::isfinite(x)) throw Error(ErrorKind::ProviderUnavailable, "non-finite embedding component");
    }
    return v;
}

double cosine_similarity(const EmbeddingVector& a, const EmbeddingVector& b) {
    if (a.dimension() != b.dimension()) {
        throw Error(ErrorKind::DimensionMismatch,
                    std::to_string(a.dimension()) + " vs " + std::to_string(b.dimension()));
    }
    double dot = 0.0;
    double na = 0.0;
    double nb = 0.0;
    for (std::size_t i = 0; i < a.values.size(); ++i) {
        dot += a.values[i] * b.values[i];
        na += a.values[i] * a.values[i];
        nb += b.values[i] * b.values[i];
    }
    if (na == 0.0 || nb == 0.0) throw Error(ErrorKind::ZeroVector, "cosine of a zero vector");
    // Multiplying before the square root keeps cos(a, a) bit-exact at 1 for most inputs.
    const double c = dot / std::sqrt(na * nb);
    return std::clamp(c, -1.0, 1.0);
}

std::string concat_party_utterances(std::span<const Turn> turns, Speaker party) {
    std::string out;
    bool any = false;
    for (const auto& t : turns) {
        if (t.speaker != party) continue;
        if (any) out.push_back(' ');
        out += t.text;
        any = true;
    }
    if (!any) throw Error(ErrorKind::NoSuchPartyTurns, std::string("no ") + std::string(to_string(party)) + " turns");
    return out;
}

}  // namespace convstyle
