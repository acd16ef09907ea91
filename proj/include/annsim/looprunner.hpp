#pragma once

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <map>
#include <numeric>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "annsim/annotator.hpp"
#include "annsim/cpd.hpp"
#include "annsim/io.hpp"
#include "annsim/protonet.hpp"
#include "annsim/synthgen.hpp"

namespace annsim {

struct LoopConfig {
    Strategy strategy = Strategy::acpd;
    std::size_t budget = 7;  // queries per recording (B)
    AnnotatorConfig annotator;
    std::uint64_t seed = 0;
    // smaller pretraining sets keep the prototype model responsive to the
    // labels gathered during the session instead of anchored to synthetic ones
    std::size_t pretrain_pos = 16;
    std::size_t pretrain_neg = 16;
    // When set, pretraining only positions the prototypes; in-loop updates
    // start from counts of 1 instead of the pretraining set sizes.
    bool reset_pretrain_counts = false;

    void validate() const {
        if (budget < 1) throw std::invalid_argument("loop: budget must be >= 1");
        annotator.validate();
    }
};

// One full pass over the dataset: every recording annotated exactly once.
struct SessionResult {
    std::vector<AnnotationList> annotations;  // indexed like the dataset
    std::vector<std::size_t> visit_order;     // permutation of recording indices
    std::optional<ProtoModel> final_model;    // adaptive strategy only
};

inline ProtoModel init_loop_model(const DatasetSpec& spec, const LoopConfig& cfg) {
    auto model = init_from_pretraining(
        std::span<const LabeledExample>(pretraining_set(spec, cfg.pretrain_pos, cfg.pretrain_neg)));
    if (cfg.reset_pretrain_counts) {
        model.count_pos = 1.0;
        model.count_neg = 1.0;
    }
    return model;
}

inline QuerySet build_queries(Strategy strategy, const Recording& rec, std::size_t budget,
                              const ProtoModel* model) {
    switch (strategy) {
        case Strategy::acpd:
            return acpd_queries(*model, rec.stream, budget);
        case Strategy::fcpd:
            return fcpd_queries(rec.stream, budget);
        case Strategy::fix:
            return fix_queries(rec.ground_truth.duration, budget);
        case Strategy::orc: {
            const std::size_t needed = sufficient_budget(rec.ground_truth);
            if (budget < needed)
                throw UnsupportedBudgetError("orc needs a budget of at least " +
                                             std::to_string(needed));
            return orc_queries(rec.ground_truth);
        }
    }
    throw std::logic_error("bad strategy");
}

// Annotation loop: visit recordings in a seeded random order, build queries,
// annotate, and (adaptive strategy only) fold the fresh annotations into the
// prediction model before the next recording.
inline SessionResult run_session(std::span<const Recording> data, const DatasetSpec& spec,
                                 const LoopConfig& cfg) {
    cfg.validate();
    if (data.empty()) throw std::invalid_argument("run_session: empty dataset");

    SessionResult result;
    result.visit_order.resize(data.size());
    std::iota(result.visit_order.begin(), result.visit_order.end(), std::size_t{0});
    auto perm_gen = rng::engine(rng::derive(cfg.seed, rng::Stream::permutation));
    std::shuffle(result.visit_order.begin(), result.visit_order.end(), perm_gen);

    std::optional<ProtoModel> model;
    if (cfg.strategy == Strategy::acpd) model = init_loop_model(spec, cfg);

    result.annotations.resize(data.size());
    std::vector<bool> labeled(data.size(), false);
    for (const std::size_t idx : result.visit_order) {
        const Recording& rec = data[idx];
        const auto queries =
            build_queries(cfg.strategy, rec, cfg.budget, model ? &*model : nullptr);
        auto ann_gen =
            rng::engine(rng::derive(cfg.annotator.seed, rng::Stream::annotator, rec.id));
        auto ann = annotate(queries, rec.ground_truth, cfg.annotator, ann_gen);
        if (model) *model = update(*model, ann, rec.stream);
        result.annotations[idx] = std::move(ann);
        labeled[idx] = true;
    }
    if (std::find(labeled.begin(), labeled.end(), false) != labeled.end())
        throw std::logic_error("run_session: a recording was never visited");
    result.final_model = std::move(model);
    return result;
}

// --- session persistence ---

inline void save_session(const std::filesystem::path& dir, const SessionResult& session,
                         const DatasetSpec& spec, const LoopConfig& cfg) {
    std::filesystem::create_directories(dir);
    std::map<std::string, std::string> meta{
        {"strategy", to_string(cfg.strategy)},
        {"budget", std::to_string(cfg.budget)},
        {"gamma", io::format_value(cfg.annotator.gamma)},
        {"beta", io::format_value(cfg.annotator.beta)},
        {"annotator_seed", std::to_string(cfg.annotator.seed)},
        {"seed", std::to_string(cfg.seed)},
        {"pretrain_pos", std::to_string(cfg.pretrain_pos)},
        {"pretrain_neg", std::to_string(cfg.pretrain_neg)},
        {"dataset_class", spec.class_id},
        {"dataset_seed", std::to_string(spec.seed)},
        {"n_recordings", std::to_string(session.annotations.size())},
    };
    io::write_keyvalue(dir / "session.meta", meta);
    for (std::size_t i = 0; i < session.annotations.size(); ++i) {
        const auto name = recording_name(static_cast<std::uint32_t>(i));
        io::write_annotations(dir / (name + ".ann"), session.annotations[i]);
    }
    if (session.final_model) save_model(dir / "model.proto", *session.final_model);
}

}  // namespace annsim
