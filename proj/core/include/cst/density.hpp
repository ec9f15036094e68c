#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "cst/codec.hpp"
#include "cst/rng.hpp"
#include "json.hpp"

namespace cst {

// Categorical over one slot class, indexed by local token.
struct SlotDistribution {
    int class_id = 0;
    std::vector<double> probs;
};

// Density model over token sequences, queried one masked position at a time.
// Implementations must return a distribution whose support lies inside the
// masked position's slot class and sums to 1 (within 1e-9).
class MaskedSequenceModel {
public:
    virtual ~MaskedSequenceModel() = default;

    virtual SlotDistribution predict_distribution(const TokenSequence& seq,
                                                  std::size_t position) const = 0;

    std::vector<SlotDistribution> predict_distribution(
        const TokenSequence& seq, std::span<const std::size_t> positions) const;

    virtual const TokenSchema& schema() const = 0;
};

// Count-based conditional model with additive smoothing. Context keys:
//   weather/camera/asset-family slots: map index
//   asset-model slot: map index + the agent's family token
//   pose digit slots: map index + family + scalar role + earlier digits
// The digit-chain context is what lets joint most-significant-first
// resampling of one scalar reproduce the training distribution.
class ReferenceDensityModel : public MaskedSequenceModel {
public:
    ReferenceDensityModel(std::shared_ptr<const TokenSchema> schema, double alpha);

    SlotDistribution predict_distribution(const TokenSequence& seq,
                                          std::size_t position) const override;
    const TokenSchema& schema() const override { return *schema_; }

    double alpha() const { return alpha_; }
    void observe(const TokenSequence& seq);
    std::string context_key(const TokenSequence& seq, std::size_t position) const;
    double token_log_prob(const TokenSequence& seq, std::size_t position) const;

    nlohmann::json to_json() const;
    static ReferenceDensityModel from_json(const nlohmann::json& j,
                                           std::shared_ptr<const TokenSchema> schema);

private:
    struct ContextCounts {
        std::unordered_map<int, long> counts;  // local token -> count
        long total = 0;
    };

    std::shared_ptr<const TokenSchema> schema_;
    double alpha_;
    std::unordered_map<std::string, ContextCounts> table_;
};

// Builds the smoothed conditional tables; order-independent in the corpus.
ReferenceDensityModel train(const std::vector<TokenSequence>& corpus,
                            std::shared_ptr<const TokenSchema> schema, double alpha = 0.1);

// exp(-mean log-probability per token); finite because smoothing forbids zeros.
double perplexity(const ReferenceDensityModel& model, const std::vector<TokenSequence>& heldout);

// Perplexity of the alpha-only (uniform per slot class) model on the same data.
double uniform_perplexity(const TokenSchema& schema, const std::vector<TokenSequence>& heldout);

// Sum over positions of the log predicted probability of the actual token.
double sequence_log_likelihood(const ReferenceDensityModel& model, const TokenSequence& seq);

// Optional per-position veto applied on top of forbid_original; returning
// false removes the candidate token from the support before renormalizing.
using SupportFilter =
    std::function<bool(std::size_t position, int global_token, const TokenSequence& current)>;

// Re-samples the masked positions in ascending order, feeding each draw back
// into the sequence so later positions condition on earlier ones.
TokenSequence mask_and_resample(const MaskedSequenceModel& model, const TokenSequence& seq,
                                std::span<const std::size_t> positions, RandomStream& rng,
                                bool forbid_original, const SupportFilter& filter = nullptr);

// Model artifact IO; loading verifies the stored schema hash.
void save_model(const ReferenceDensityModel& model, const std::string& path);
ReferenceDensityModel load_model(const std::string& path,
                                 std::shared_ptr<const TokenSchema> schema);

}  // namespace cst
