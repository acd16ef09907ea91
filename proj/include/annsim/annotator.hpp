#pragma once

#include <cstdint>
#include <stdexcept>
#include <vector>

#include "annsim/cpd.hpp"
#include "annsim/rng.hpp"
#include "annsim/timeline.hpp"

namespace annsim {

// Simulated weak-label annotator: answers 1 when at least a gamma fraction
// of some event falls inside the query, then flips with probability beta.
struct AnnotatorConfig {
    double gamma = 0.5;
    double beta = 0.0;
    std::uint64_t seed = 0;

    void validate() const {
        if (!(gamma > 0.0 && gamma <= 1.0))
            throw std::invalid_argument("annotator: gamma must be in (0, 1]");
        if (!(beta >= 0.0 && beta <= 1.0))
            throw std::invalid_argument("annotator: beta must be in [0, 1]");
    }
};

// The overlap ratio divides by the EVENT length, and the test is boundary
// inclusive (>= gamma). One uniform draw is consumed per query regardless of
// beta, so runs at different noise levels see aligned random streams.
inline AnnotationList annotate(const QuerySet& q, const EventList& gt, const AnnotatorConfig& cfg,
                               rng::Engine& gen) {
    cfg.validate();
    std::uniform_real_distribution<double> uniform(0.0, 1.0);
    std::vector<Annotation> anns;
    anns.reserve(q.queries.size());
    for (const auto& query : q.queries) {
        int label = 0;
        for (const auto& e : gt.events) {
            if (e.duration() <= 0.0) continue;
            if (intersect(query, e) / e.duration() >= cfg.gamma) {
                label = 1;
                break;
            }
        }
        if (uniform(gen) < cfg.beta) label = 1 - label;
        anns.emplace_back(query, label);
    }
    return AnnotationList(std::move(anns), gt.duration);
}

}  // namespace annsim
