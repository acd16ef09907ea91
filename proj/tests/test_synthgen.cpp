#include <catch2/catch_amalgamated.hpp>

#include "annsim/synthgen.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <numeric>
#include <stdexcept>
#include <vector>

using annsim::DatasetSpec;
using annsim::EventList;
using annsim::Interval;

namespace {

double dot(const std::vector<double>& a, const std::vector<double>& b) {
    return std::inner_product(a.begin(), a.end(), b.begin(), 0.0);
}

double norm(const std::vector<double>& a) { return std::sqrt(dot(a, a)); }

// spec small enough for fast per-test generation
DatasetSpec small_spec() {
    DatasetSpec spec;
    spec.n_recordings = 12;
    spec.duration = 30.0;
    spec.events_per_recording = 3;
    spec.event_duration_min = 0.5;
    spec.event_duration_max = 4.0;
    spec.seed = 7;
    return spec;
}

}  // namespace

TEST_CASE("window_count on the default grid", "[synthgen]") {
    CHECK(annsim::window_count(30.0, 1.0, 0.25) == 117);
    CHECK(annsim::window_count(1.0, 1.0, 0.25) == 1);
    CHECK(annsim::window_count(0.5, 1.0, 0.25) == 0);  // window does not fit
    CHECK(annsim::window_count(2.0, 1.0, 0.25) == 5);
}

TEST_CASE("builtin presets validate and unknown names are rejected",
          "[synthgen]") {
    for (const char* name : {"classA", "classB", "classC"}) {
        DatasetSpec spec = annsim::preset(name);
        CHECK_NOTHROW(spec.validate());
        CHECK(spec.class_id == name);
    }
    CHECK_THROWS_AS(annsim::preset("classZ"), std::invalid_argument);
    CHECK_THROWS_AS(annsim::preset(""), std::invalid_argument);
}

TEST_CASE("spec validation enforces the window grid and feasibility",
          "[synthgen]") {
    DatasetSpec spec = small_spec();
    CHECK_NOTHROW(spec.validate());

    DatasetSpec bad_hop = spec;
    bad_hop.hop = 0.3;  // must be window_len / 4
    CHECK_THROWS_AS(bad_hop.validate(), std::invalid_argument);

    DatasetSpec too_short = spec;
    too_short.duration = 10.0;  // 3 events up to 4 s plus gaps cannot fit
    CHECK_THROWS_AS(too_short.validate(), std::invalid_argument);

    DatasetSpec no_noise = spec;
    no_noise.noise_sigma = 0.0;
    CHECK_THROWS_AS(no_noise.validate(), std::invalid_argument);

    DatasetSpec bad_range = spec;
    bad_range.event_duration_min = 3.0;
    bad_range.event_duration_max = 2.0;
    CHECK_THROWS_AS(bad_range.validate(), std::invalid_argument);
}

TEST_CASE("a fully packed recording pins the event placement", "[synthgen]") {
    // one 5 s event in a 7 s recording with 1 s gaps leaves zero slack
    DatasetSpec spec = small_spec();
    spec.n_recordings = 1;
    spec.events_per_recording = 1;
    spec.event_duration_min = 5.0;
    spec.event_duration_max = 5.0;
    spec.duration = 7.0;
    spec.min_event_gap = 1.0;
    for (std::uint64_t seed : {1ull, 42ull, 999ull}) {
        spec.seed = seed;
        auto recs = annsim::generate_dataset(spec);
        REQUIRE(recs.size() == 1);
        REQUIRE(recs[0].ground_truth.size() == 1);
        CHECK(recs[0].ground_truth.events[0].start == Catch::Approx(1.0));
        CHECK(recs[0].ground_truth.events[0].end == Catch::Approx(6.0));
    }
}

TEST_CASE("generation is deterministic and respects placement rules",
          "[synthgen]") {
    DatasetSpec spec = small_spec();
    auto a = annsim::generate_dataset(spec);
    auto b = annsim::generate_dataset(spec);
    REQUIRE(a.size() == spec.n_recordings);
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i].id == i);
        REQUIRE(a[i].ground_truth.size() == b[i].ground_truth.size());
        CHECK(a[i].stream.values == b[i].stream.values);  // bit identical
        CHECK(a[i].stream.timestamps == b[i].stream.timestamps);

        const auto& gt = a[i].ground_truth;
        REQUIRE(gt.size() == spec.events_per_recording);
        // boundary clearance and pairwise gaps
        CHECK(gt.events.front().start >= spec.min_event_gap - 1e-9);
        CHECK(gt.events.back().end <= spec.duration - spec.min_event_gap + 1e-9);
        for (std::size_t j = 0; j + 1 < gt.size(); ++j)
            CHECK(gt.events[j + 1].start - gt.events[j].end >=
                  spec.min_event_gap - 1e-9);
        for (const auto& e : gt.events) {
            CHECK(e.duration() >= spec.event_duration_min - 1e-9);
            CHECK(e.duration() <= spec.event_duration_max + 1e-9);
        }
    }

    DatasetSpec other = spec;
    other.seed = spec.seed + 1;
    auto c = annsim::generate_dataset(other);
    CHECK(a[0].stream.values != c[0].stream.values);
}

TEST_CASE("stream timestamps are window centers on the hop grid",
          "[synthgen]") {
    DatasetSpec spec = small_spec();
    spec.n_recordings = 1;
    auto recs = annsim::generate_dataset(spec);
    const auto& s = recs[0].stream;
    REQUIRE(s.size() == annsim::window_count(30.0, 1.0, 0.25));
    CHECK(s.dim == spec.embedding_dim);
    for (std::size_t i = 0; i < s.size(); ++i)
        CHECK(s.timestamps[i] == Catch::Approx(0.5 + 0.25 * double(i)));
    CHECK(s.row(0).size() == spec.embedding_dim);
    CHECK(s.values.size() == s.size() * s.dim);
}

TEST_CASE("class directions are unit, orthogonal, and tied to the class id",
          "[synthgen]") {
    DatasetSpec spec = small_spec();
    auto dirs = annsim::dataset_directions(spec);
    CHECK(norm(dirs.mu_bg) == Catch::Approx(1.0).epsilon(1e-12));
    CHECK(norm(dirs.mu_class) == Catch::Approx(1.0).epsilon(1e-12));
    CHECK(std::abs(dot(dirs.mu_bg, dirs.mu_class)) < 1e-12);

    // same class id, different dataset seed: identical geometry
    DatasetSpec other_seed = spec;
    other_seed.seed = 9999;
    auto dirs2 = annsim::dataset_directions(other_seed);
    CHECK(dirs2.mu_bg == dirs.mu_bg);
    CHECK(dirs2.mu_class == dirs.mu_class);

    // different class id: different geometry
    DatasetSpec other_class = spec;
    other_class.class_id = "classB";
    auto dirs3 = annsim::dataset_directions(other_class);
    CHECK(dirs3.mu_class != dirs.mu_class);
}

TEST_CASE("disjoint pretraining direction avoids the dataset class",
          "[synthgen]") {
    DatasetSpec spec = small_spec();
    auto dirs = annsim::dataset_directions(spec);
    auto mu_disjoint = annsim::disjoint_direction(spec);
    CHECK(norm(mu_disjoint) == Catch::Approx(1.0).epsilon(1e-12));
    CHECK(std::abs(dot(mu_disjoint, dirs.mu_bg)) < 1e-12);
    // independent draw, not the class direction itself
    CHECK(std::abs(dot(mu_disjoint, dirs.mu_class)) < 0.999);

    // across many class ids the two directions are uncorrelated on average
    double sum = 0.0;
    const int trials = 200;
    for (int i = 0; i < trials; ++i) {
        DatasetSpec s = spec;
        s.class_id = "mc_" + std::to_string(i);
        sum += dot(annsim::dataset_directions(s).mu_class,
                   annsim::disjoint_direction(s));
    }
    CHECK(std::abs(sum / trials) < 0.1);
}

TEST_CASE("window embedding mean interpolates with event coverage",
          "[synthgen]") {
    DatasetSpec spec = small_spec();
    spec.noise_sigma = 1e-12;  // isolate the mean structure
    const auto dirs = annsim::dataset_directions(spec);
    EventList gt({{10.0, 12.0}}, 30.0);
    auto gen = annsim::rng::engine(3);

    auto coverage = [&](double t_center) {
        auto v = annsim::embed_window(t_center, gt, spec, dirs, gen);
        // project out the known structure: rho = (v - mu_bg) . mu_class / sep
        double proj = 0.0;
        for (std::size_t k = 0; k < v.size(); ++k)
            proj += (v[k] - dirs.mu_bg[k]) * dirs.mu_class[k];
        return proj / spec.separation;
    };

    CHECK(coverage(11.0) == Catch::Approx(1.0).margin(1e-9));   // fully inside
    CHECK(coverage(5.0) == Catch::Approx(0.0).margin(1e-9));    // fully outside
    CHECK(coverage(10.0) == Catch::Approx(0.5).margin(1e-9));   // half covered
    CHECK(coverage(12.25) == Catch::Approx(0.25).margin(1e-9)); // quarter

    // windows must stay inside the recording
    CHECK_THROWS_AS(annsim::embed_window(0.25, gt, spec, dirs, gen),
                    std::invalid_argument);
    CHECK_THROWS_AS(annsim::embed_window(29.8, gt, spec, dirs, gen),
                    std::invalid_argument);
    CHECK_NOTHROW(annsim::embed_window(0.5, gt, spec, dirs, gen));
    CHECK_NOTHROW(annsim::embed_window(29.5, gt, spec, dirs, gen));
}

TEST_CASE("coverage projection matches a sampled overlap oracle",
          "[synthgen]") {
    DatasetSpec spec = small_spec();
    spec.noise_sigma = 1e-12;
    const auto dirs = annsim::dataset_directions(spec);
    EventList gt({{3.0, 4.2}, {8.7, 9.35}, {20.0, 24.0}}, 30.0);
    auto gen = annsim::rng::engine(11);
    auto place = annsim::rng::engine(17);
    std::uniform_real_distribution<double> u(0.5, 29.5);
    for (int trial = 0; trial < 40; ++trial) {
        const double t = u(place);
        auto v = annsim::embed_window(t, gt, spec, dirs, gen);
        double proj = 0.0;
        for (std::size_t k = 0; k < v.size(); ++k)
            proj += (v[k] - dirs.mu_bg[k]) * dirs.mu_class[k];
        const double rho_impl = proj / spec.separation;
        // oracle: dense sampling of the window span
        const int n = 20000;
        int inside = 0;
        for (int j = 0; j < n; ++j) {
            const double x = t - 0.5 + (j + 0.5) * (1.0 / n);
            for (const auto& e : gt.events)
                if (x >= e.start && x < e.end) {
                    ++inside;
                    break;
                }
        }
        CHECK(rho_impl ==
              Catch::Approx(double(inside) / n).margin(2e-4));
    }
}

TEST_CASE("event and background windows separate cleanly at high contrast",
          "[synthgen]") {
    // separation of six noise sigmas leaves a three-sigma margin on each side
    // of the midpoint threshold, so the nearest-direction rule is >99% right
    DatasetSpec spec = small_spec();
    spec.noise_sigma = 0.25;
    spec.separation = 6.0 * spec.noise_sigma;
    const auto dirs = annsim::dataset_directions(spec);
    EventList gt({{10.0, 14.0}}, 30.0);
    auto gen = annsim::rng::engine(29);

    int errors = 0;
    const int trials = 2000;
    for (int i = 0; i < trials; ++i) {
        auto pos = annsim::embed_window(12.0, gt, spec, dirs, gen);
        auto neg = annsim::embed_window(4.0, gt, spec, dirs, gen);
        auto classify = [&](const std::vector<double>& v) {
            double proj = 0.0;
            for (std::size_t k = 0; k < v.size(); ++k)
                proj += (v[k] - dirs.mu_bg[k]) * dirs.mu_class[k];
            return proj > spec.separation / 2.0 ? 1 : 0;
        };
        errors += (classify(pos) != 1) + (classify(neg) != 0);
    }
    CHECK(errors < trials * 2 / 100);  // accuracy above 99%
}

TEST_CASE("pretraining set layout, labels, and geometry", "[synthgen]") {
    DatasetSpec spec = small_spec();
    spec.noise_sigma = 0.1;
    auto set = annsim::pretraining_set(spec, 40, 24);
    REQUIRE(set.size() == 64);
    for (std::size_t i = 0; i < set.size(); ++i) {
        CHECK(set[i].label == (i < 40 ? 1 : 0));
        CHECK(set[i].features.size() == spec.embedding_dim);
    }

    // positives sit along the disjoint direction, negatives on background
    const auto mu_disjoint = annsim::disjoint_direction(spec);
    const auto dirs = annsim::dataset_directions(spec);
    double pos_proj = 0.0, neg_proj = 0.0;
    for (std::size_t i = 0; i < set.size(); ++i) {
        double proj = 0.0;
        for (std::size_t k = 0; k < spec.embedding_dim; ++k)
            proj += (set[i].features[k] - dirs.mu_bg[k]) * mu_disjoint[k];
        (set[i].label == 1 ? pos_proj : neg_proj) += proj;
    }
    CHECK(pos_proj / 40.0 ==
          Catch::Approx(spec.separation).margin(4.0 * 0.1 / std::sqrt(40.0)));
    CHECK(neg_proj / 24.0 == Catch::Approx(0.0).margin(4.0 * 0.1 / std::sqrt(24.0)));

    // deterministic in the dataset seed
    auto again = annsim::pretraining_set(spec, 40, 24);
    CHECK(again[0].features == set[0].features);

    CHECK_THROWS_AS(annsim::pretraining_set(spec, 0, 10), std::invalid_argument);
    CHECK_THROWS_AS(annsim::pretraining_set(spec, 10, 0), std::invalid_argument);
}

TEST_CASE("spec round-trips through key=value metadata", "[synthgen]") {
    DatasetSpec spec = annsim::preset("classB");
    spec.seed = 1234567890123ull;
    spec.n_recordings = 77;
    auto kv = annsim::spec_to_keyvalue(spec);
    DatasetSpec back = annsim::spec_from_keyvalue(kv);
    CHECK(back.n_recordings == spec.n_recordings);
    CHECK(back.duration == spec.duration);
    CHECK(back.events_per_recording == spec.events_per_recording);
    CHECK(back.event_duration_min == spec.event_duration_min);
    CHECK(back.event_duration_max == spec.event_duration_max);
    CHECK(back.min_event_gap == spec.min_event_gap);
    CHECK(back.embedding_dim == spec.embedding_dim);
    CHECK(back.window_len == spec.window_len);
    CHECK(back.hop == spec.hop);
    CHECK(back.class_id == spec.class_id);
    CHECK(back.separation == spec.separation);
    CHECK(back.noise_sigma == spec.noise_sigma);
    CHECK(back.seed == spec.seed);
}

TEST_CASE("dataset directory round-trip and overwrite protection",
          "[synthgen]") {
    namespace fs = std::filesystem;
    const fs::path dir = fs::temp_directory_path() / "annsim_synthgen_ds";
    fs::remove_all(dir);

    DatasetSpec spec = small_spec();
    spec.n_recordings = 3;
    auto recs = annsim::generate_dataset(spec);
    annsim::save_dataset(dir, spec, recs);
    CHECK_THROWS_AS(annsim::save_dataset(dir, spec, recs), std::runtime_error);
    CHECK_NOTHROW(annsim::save_dataset(dir, spec, recs, /*force=*/true));

    auto [spec2, recs2] = annsim::load_dataset(dir);
    CHECK(spec2.class_id == spec.class_id);
    CHECK(spec2.seed == spec.seed);
    REQUIRE(recs2.size() == recs.size());
    for (std::size_t i = 0; i < recs.size(); ++i) {
        REQUIRE(recs2[i].ground_truth.size() == recs[i].ground_truth.size());
        for (std::size_t j = 0; j < recs[i].ground_truth.size(); ++j) {
            // events pass through a six-decimal text format
            CHECK(recs2[i].ground_truth.events[j].start ==
                  Catch::Approx(recs[i].ground_truth.events[j].start)
                      .margin(1e-6));
            CHECK(recs2[i].ground_truth.events[j].end ==
                  Catch::Approx(recs[i].ground_truth.events[j].end)
                      .margin(1e-6));
        }
        // embeddings are stored as 32-bit floats
        REQUIRE(recs2[i].stream.values.size() == recs[i].stream.values.size());
        for (std::size_t k = 0; k < recs[i].stream.values.size(); ++k)
            CHECK(recs2[i].stream.values[k] ==
                  double(float(recs[i].stream.values[k])));
        CHECK(recs2[i].stream.timestamps == recs[i].stream.timestamps);
    }
    fs::remove_all(dir);
}
