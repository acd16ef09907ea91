#include <catch2/catch_amalgamated.hpp>

#include "annsim/timeline.hpp"
#include "annsim/rng.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>
#include <vector>

using annsim::Annotation;
using annsim::AnnotationList;
using annsim::EventList;
using annsim::Interval;

TEST_CASE("interval validation rejects malformed bounds", "[timeline]") {
    CHECK_THROWS_AS(Interval(5.0, 4.0), std::invalid_argument);
    CHECK_THROWS_AS(Interval(-1.0, 2.0), std::invalid_argument);
    CHECK_THROWS_AS(Interval(0.0, std::numeric_limits<double>::infinity()),
                    std::invalid_argument);
    CHECK_THROWS_AS(Interval(std::numeric_limits<double>::quiet_NaN(), 1.0),
                    std::invalid_argument);
    CHECK_NOTHROW(Interval(2.0, 2.0));
}

TEST_CASE("interval intersection lengths", "[timeline]") {
    CHECK(annsim::intersect({10.0, 12.0}, {9.0, 11.0}) == Catch::Approx(1.0));
    CHECK(annsim::intersect({0.0, 5.0}, {5.0, 10.0}) == 0.0);
    CHECK(annsim::intersect({2.0, 4.0}, {1.0, 6.0}) == Catch::Approx(2.0));
    CHECK(annsim::intersect({0.0, 1.0}, {3.0, 4.0}) == 0.0);
}

TEST_CASE("intersection is symmetric and bounded by shorter interval",
          "[timeline]") {
    auto gen = annsim::rng::engine(77);
    std::uniform_real_distribution<double> u(0.0, 20.0);
    for (int k = 0; k < 200; ++k) {
        double a0 = u(gen), a1 = u(gen), b0 = u(gen), b1 = u(gen);
        Interval a(std::min(a0, a1), std::max(a0, a1));
        Interval b(std::min(b0, b1), std::max(b0, b1));
        double ab = annsim::intersect(a, b);
        CHECK(ab == Catch::Approx(annsim::intersect(b, a)).margin(1e-15));
        CHECK(ab <= std::min(a.duration(), b.duration()) + 1e-15);
        CHECK(ab >= 0.0);
    }
}

TEST_CASE("event list enforces sorted non-overlapping events within bounds",
          "[timeline]") {
    CHECK_NOTHROW(EventList({{1.0, 2.0}, {3.0, 4.0}}, 10.0));
    // overlap
    CHECK_THROWS_AS(EventList({{1.0, 3.0}, {2.0, 4.0}}, 10.0),
                    std::invalid_argument);
    // out of order
    CHECK_THROWS_AS(EventList({{3.0, 4.0}, {1.0, 2.0}}, 10.0),
                    std::invalid_argument);
    // exceeds duration
    CHECK_THROWS_AS(EventList({{1.0, 11.0}}, 10.0), std::invalid_argument);
    // touching events are legal, empty list is a valid all-negative recording
    CHECK_NOTHROW(EventList({{1.0, 2.0}, {2.0, 3.0}}, 10.0));
    CHECK_NOTHROW(EventList({}, 10.0));
}

TEST_CASE("annotation list must partition the full timeline", "[timeline]") {
    CHECK_NOTHROW(AnnotationList({{{0.0, 4.0}, 0}, {{4.0, 10.0}, 1}}, 10.0));
    // gap between segments
    CHECK_THROWS_AS(AnnotationList({{{0.0, 4.0}, 0}, {{5.0, 10.0}, 1}}, 10.0),
                    std::invalid_argument);
    // does not start at zero
    CHECK_THROWS_AS(AnnotationList({{{1.0, 10.0}, 1}}, 10.0),
                    std::invalid_argument);
    // does not end at duration
    CHECK_THROWS_AS(AnnotationList({{{0.0, 9.0}, 1}}, 10.0),
                    std::invalid_argument);
    // zero-length segment
    CHECK_THROWS_AS(
        AnnotationList({{{0.0, 4.0}, 0}, {{4.0, 4.0}, 1}, {{4.0, 10.0}, 0}},
                       10.0),
        std::invalid_argument);
    // labels restricted to 0/1
    CHECK_THROWS_AS(Annotation({0.0, 10.0}, 2), std::invalid_argument);
    CHECK_THROWS_AS(Annotation({0.0, 10.0}, -1), std::invalid_argument);
    CHECK_THROWS_AS(AnnotationList({}, 10.0), std::invalid_argument);
}

TEST_CASE("merge_positive collapses weak labels into events", "[timeline]") {
    // adjacent positive runs merge into one event
    AnnotationList a(
        {{{0.0, 2.0}, 0}, {{2.0, 3.0}, 1}, {{3.0, 5.0}, 1}, {{5.0, 8.0}, 0}},
        8.0);
    EventList ea = annsim::merge_positive(a);
    REQUIRE(ea.size() == 1);
    CHECK(ea.events[0].start == Catch::Approx(2.0));
    CHECK(ea.events[0].end == Catch::Approx(5.0));

    // separated positives stay separate
    AnnotationList b({{{0.0, 1.0}, 1}, {{1.0, 2.0}, 0}, {{2.0, 4.0}, 1}}, 4.0);
    EventList eb = annsim::merge_positive(b);
    REQUIRE(eb.size() == 2);
    CHECK(eb.events[0].end == Catch::Approx(1.0));
    CHECK(eb.events[1].start == Catch::Approx(2.0));

    // all-negative timeline yields no events
    AnnotationList c({{{0.0, 6.0}, 0}}, 6.0);
    CHECK(annsim::merge_positive(c).empty());

    // all-positive timeline yields one full-length event
    AnnotationList d({{{0.0, 3.0}, 1}, {{3.0, 6.0}, 1}}, 6.0);
    EventList ed = annsim::merge_positive(d);
    REQUIRE(ed.size() == 1);
    CHECK(ed.events[0].start == 0.0);
    CHECK(ed.events[0].end == Catch::Approx(6.0));
}

TEST_CASE("merge_positive is idempotent through re-annotation", "[timeline]") {
    auto gen = annsim::rng::engine(123);
    std::uniform_real_distribution<double> u(0.1, 2.0);
    for (int trial = 0; trial < 50; ++trial) {
        // random alternating partition of [0, T]
        std::vector<Annotation> segs;
        double t = 0.0;
        int label = static_cast<int>(gen() % 2);
        while (segs.size() < 8) {
            double w = u(gen);
            segs.push_back(Annotation({t, t + w}, label));
            t += w;
            label = 1 - label;
        }
        AnnotationList ann(segs, t);
        EventList ev = annsim::merge_positive(ann);
        // rebuild an annotation list from the merged events and merge again
        std::vector<Annotation> rebuilt;
        double cur = 0.0;
        for (const auto& e : ev.events) {
            if (e.start > cur) rebuilt.push_back(Annotation({cur, e.start}, 0));
            rebuilt.push_back(Annotation({e.start, e.end}, 1));
            cur = e.end;
        }
        if (cur < t) rebuilt.push_back(Annotation({cur, t}, 0));
        EventList ev2 = annsim::merge_positive(AnnotationList(rebuilt, t));
        REQUIRE(ev2.size() == ev.size());
        for (std::size_t i = 0; i < ev.size(); ++i) {
            CHECK(ev2.events[i].start ==
                  Catch::Approx(ev.events[i].start).margin(1e-12));
            CHECK(ev2.events[i].end ==
                  Catch::Approx(ev.events[i].end).margin(1e-12));
        }
    }
}

TEST_CASE("frame_labels rasterizes events onto fixed frames", "[timeline]") {
    EventList ev({{0.10, 0.20}}, 0.30);
    auto frames = annsim::frame_labels(ev, 0.05);
    CHECK(frames == std::vector<std::uint8_t>{0, 0, 1, 1, 0, 0});

    EventList none({}, 1.0);
    auto zeros = annsim::frame_labels(none, 0.05);
    REQUIRE(zeros.size() == 20);
    CHECK(std::count(zeros.begin(), zeros.end(), 0) == 20);

    EventList all({{0.0, 0.30}}, 0.30);
    auto ones = annsim::frame_labels(all, 0.05);
    REQUIRE(ones.size() == 6);
    CHECK(std::count(ones.begin(), ones.end(), 1) == 6);

    // an event touching a frame boundary does not bleed into the next frame
    EventList touch({{0.0, 0.05}}, 0.20);
    CHECK(annsim::frame_labels(touch, 0.05) ==
          std::vector<std::uint8_t>{1, 0, 0, 0});

    CHECK_THROWS_AS(annsim::frame_labels(ev, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(annsim::frame_labels(ev, -0.1), std::invalid_argument);
}

TEST_CASE("frame count covers a partial trailing frame", "[timeline]") {
    EventList ev({}, 0.27);
    CHECK(annsim::frame_labels(ev, 0.05).size() == 6);  // ceil(0.27 / 0.05)
    EventList exact({}, 0.25);
    CHECK(annsim::frame_labels(exact, 0.05).size() == 5);
}

TEST_CASE("frame_labels of merged events matches direct rasterization",
          "[timeline]") {
    auto gen = annsim::rng::engine(9);
    std::uniform_real_distribution<double> u(0.05, 1.5);
    const double frame = 0.05;
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<Annotation> segs;
        double t = 0.0;
        int label = static_cast<int>(gen() % 2);
        for (int i = 0; i < 6; ++i) {
            double w = u(gen);
            segs.push_back(Annotation({t, t + w}, label));
            t += w;
            label = 1 - label;
        }
        AnnotationList ann(segs, t);
        auto merged = annsim::frame_labels(annsim::merge_positive(ann), frame);
        // independent rasterization straight from the weak labels
        std::vector<std::uint8_t> direct(merged.size(), 0);
        for (std::size_t i = 0; i < direct.size(); ++i) {
            Interval f(static_cast<double>(i) * frame,
                       static_cast<double>(i + 1) * frame);
            for (const auto& a : ann.annotations)
                if (a.label == 1 && annsim::intersect(f, a.segment) > 0.0)
                    direct[i] = 1;
        }
        CHECK(direct == merged);
    }
}
