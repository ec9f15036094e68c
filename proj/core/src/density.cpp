#include "cst/density.hpp"

#include <cmath>
#include <fstream>

#include "cst/io.hpp"

namespace cst {

std::vector<SlotDistribution> MaskedSequenceModel::predict_distribution(
    const TokenSequence& seq, std::span<const std::size_t> positions) const {
    std::vector<SlotDistribution> out;
    out.reserve(positions.size());
    for (std::size_t p : positions) out.push_back(predict_distribution(seq, p));
    return out;
}

ReferenceDensityModel::ReferenceDensityModel(std::shared_ptr<const TokenSchema> schema,
                                             double alpha)
    : schema_(std::move(schema)), alpha_(alpha) {
    if (!(alpha_ > 0.0)) throw std::invalid_argument("smoothing alpha must be > 0");
}

std::string ReferenceDensityModel::context_key(const TokenSequence& seq,
                                               std::size_t position) const {
    const SlotInfo slot = schema_->slot_at(position);
    std::string key = "c" + std::to_string(slot.class_id) + "|m" + std::to_string(seq.map_index);
    switch (slot.kind) {
        case SlotKind::weather_attr:
        case SlotKind::camera_attr:
        case SlotKind::asset_family:
            return key;
        case SlotKind::asset_model: {
            const std::size_t fam_pos = position - 1;
            key += "|f" + std::to_string(seq.tokens[fam_pos]);
            return key;
        }
        default:
            break;
    }
    // pose digit: family of the owning agent (ego uses its fixed family),
    // the scalar role, and the earlier digits of the same scalar
    int family;
    if (slot.agent_index < 0) {
        family = schema_->ego_family();
    } else {
        const std::size_t fam_pos =
            TokenSchema::kHeaderLen +
            static_cast<std::size_t>(slot.agent_index) * TokenSchema::kAgentBlockLen;
        family = schema_->local_token(15, seq.tokens[fam_pos]);
    }
    key += "|f" + std::to_string(family) + "|r" + std::to_string(static_cast<int>(slot.role));
    for (int d = 0; d < slot.digit; ++d)
        key += "|d" + std::to_string(seq.tokens[position - slot.digit + d]);
    return key;
}

void ReferenceDensityModel::observe(const TokenSequence& seq) {
    for (std::size_t p = 0; p < seq.tokens.size(); ++p) {
        const SlotInfo slot = schema_->slot_at(p);
        const int local = schema_->local_token(slot.class_id, seq.tokens[p]);
        ContextCounts& cc = table_[context_key(seq, p)];
        ++cc.counts[local];
        ++cc.total;
    }
}

SlotDistribution ReferenceDensityModel::predict_distribution(const TokenSequence& seq,
                                                             std::size_t position) const {
    const SlotInfo slot = schema_->slot_at(position);
    const SlotClass& cls = schema_->slot_class(slot.class_id);

    SlotDistribution dist;
    dist.class_id = slot.class_id;
    dist.probs.assign(cls.vocab_size, 0.0);

    const auto it = table_.find(context_key(seq, position));
    const ContextCounts* cc = it == table_.end() ? nullptr : &it->second;
    const double denom = (cc ? cc->total : 0) + alpha_ * cls.vocab_size;
    for (int local = 0; local < cls.vocab_size; ++local) {
        long count = 0;
        if (cc) {
            auto cit = cc->counts.find(local);
            if (cit != cc->counts.end()) count = cit->second;
        }
        dist.probs[local] = (count + alpha_) / denom;
    }
    return dist;
}

double ReferenceDensityModel::token_log_prob(const TokenSequence& seq,
                                             std::size_t position) const {
    const SlotInfo slot = schema_->slot_at(position);
    const SlotClass& cls = schema_->slot_class(slot.class_id);
    const int local = schema_->local_token(slot.class_id, seq.tokens[position]);

    const auto it = table_.find(context_key(seq, position));
    const ContextCounts* cc = it == table_.end() ? nullptr : &it->second;
    long count = 0;
    if (cc) {
        auto cit = cc->counts.find(local);
        if (cit != cc->counts.end()) count = cit->second;
    }
    const double denom = (cc ? cc->total : 0) + alpha_ * cls.vocab_size;
    return std::log((count + alpha_) / denom);
}

ReferenceDensityModel train(const std::vector<TokenSequence>& corpus,
                            std::shared_ptr<const TokenSchema> schema, double alpha) {
    if (corpus.empty()) throw DataError("training corpus is empty");
    for (const auto& seq : corpus) {
        if (!seq.schema || seq.schema->hash() != schema->hash())
            throw DataError("corpus sequence schema mismatch");
    }
    ReferenceDensityModel model(schema, alpha);
    for (const auto& seq : corpus) model.observe(seq);
    return model;
}

double perplexity(const ReferenceDensityModel& model, const std::vector<TokenSequence>& heldout) {
    if (heldout.empty()) throw DataError("held-out set is empty");
    double log_sum = 0.0;
    long tokens = 0;
    for (const auto& seq : heldout) {
        for (std::size_t p = 0; p < seq.tokens.size(); ++p) log_sum += model.token_log_prob(seq, p);
        tokens += static_cast<long>(seq.tokens.size());
    }
    return std::exp(-log_sum / static_cast<double>(tokens));
}

double uniform_perplexity(const TokenSchema& schema, const std::vector<TokenSequence>& heldout) {
    if (heldout.empty()) throw DataError("held-out set is empty");
    double log_sum = 0.0;
    long tokens = 0;
    for (const auto& seq : heldout) {
        for (std::size_t p = 0; p < seq.tokens.size(); ++p) {
            const SlotInfo slot = schema.slot_at(p);
            log_sum -= std::log(static_cast<double>(schema.slot_class(slot.class_id).vocab_size));
        }
        tokens += static_cast<long>(seq.tokens.size());
    }
    return std::exp(-log_sum / static_cast<double>(tokens));
}

double sequence_log_likelihood(const ReferenceDensityModel& model, const TokenSequence& seq) {
    double total = 0.0;
    for (std::size_t p = 0; p < seq.tokens.size(); ++p) total += model.token_log_prob(seq, p);
    return total;
}

TokenSequence mask_and_resample(const MaskedSequenceModel& model, const TokenSequence& seq,
                                std::span<const std::size_t> positions, RandomStream& rng,
                                bool forbid_original, const SupportFilter& filter) {
    TokenSequence out = seq;
    std::vector<std::size_t> order(positions.begin(), positions.end());
    std::sort(order.begin(), order.end());

    for (std::size_t pos : order) {
        if (pos >= out.tokens.size()) throw CodecError("mask position out of range");
        const SlotDistribution dist = model.predict_distribution(out, pos);
        const SlotClass& cls = model.schema().slot_class(dist.class_id);
        const int original = out.tokens[pos];

        std::vector<double> weights = dist.probs;
        for (int local = 0; local < cls.vocab_size; ++local) {
            const int global = cls.vocab_offset + local;
            if (forbid_original && global == original) weights[local] = 0.0;
            if (filter && !filter(pos, global, out)) weights[local] = 0.0;
        }
        double total = 0.0;
        for (double w : weights) total += w;
        if (!(total > 0.0)) throw DataError("empty support after exclusions at position " +
                                            std::to_string(pos));
        const int local = static_cast<int>(rng.categorical(weights));
        out.tokens[pos] = cls.vocab_offset + local;
    }
    return out;
}

void save_model(const ReferenceDensityModel& model, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot open for writing: " + path);
    out << model.to_json().dump() << "\n";
}

ReferenceDensityModel load_model(const std::string& path,
                                 std::shared_ptr<const TokenSchema> schema) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open: " + path);
    nlohmann::json j;
    in >> j;
    return ReferenceDensityModel::from_json(j, std::move(schema));
}

nlohmann::json ReferenceDensityModel::to_json() const {
    nlohmann::json contexts = nlohmann::json::object();
    for (const auto& [key, cc] : table_) {
        nlohmann::json counts = nlohmann::json::object();
        for (const auto& [local, n] : cc.counts) counts[std::to_string(local)] = n;
        contexts[key] = counts;
    }
    return nlohmann::json{{"_schema", "cst.density_model.v1"},
                          {"alpha", alpha_},
                          {"schema_hash", hash_hex(schema_->hash())},
                          {"contexts", contexts}};
}

ReferenceDensityModel ReferenceDensityModel::from_json(const nlohmann::json& j,
                                                       std::shared_ptr<const TokenSchema> schema) {
    if (j.value("_schema", "") != "cst.density_model.v1")
        throw DataError("not a density model artifact");
    if (j.at("schema_hash").get<std::string>() != hash_hex(schema->hash()))
        throw DataError("density model schema hash does not match the token schema");
    ReferenceDensityModel model(schema, j.at("alpha").get<double>());
    for (const auto& [key, counts] : j.at("contexts").items()) {
        ContextCounts cc;
        for (const auto& [local, n] : counts.items()) {
            cc.counts[std::stoi(local)] = n.get<long>();
            cc.total += n.get<long>();
        }
        model.table_[key] = std::move(cc);
    }
    return model;
}

}  // namespace cst
