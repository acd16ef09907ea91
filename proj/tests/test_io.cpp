#include <catch2/catch_amalgamated.hpp>

#include "annsim/io.hpp"

#include <cstdio>
#include <filesystem>
#include <map>
#include <sstream>
#include <string>

using annsim::AnnotationList;
using annsim::EventList;
using annsim::Interval;

TEST_CASE("timestamps and values print with six decimals", "[io]") {
    CHECK(annsim::io::format_seconds(1.5) == "1.500000");
    CHECK(annsim::io::format_seconds(0.0) == "0.000000");
    CHECK(annsim::io::format_seconds(12.3456789) == "12.345679");  // rounded
    CHECK(annsim::io::format_value(0.333333333) == "0.333333");
}

TEST_CASE("events round-trip through the tab-separated format", "[io]") {
    EventList ev({{1.25, 2.5}, {10.0, 12.75}}, 30.0);
    std::stringstream ss;
    annsim::io::write_events(ss, ev);
    CHECK(ss.str() == "1.250000\t2.500000\t1\n10.000000\t12.750000\t1\n");

    EventList back = annsim::io::read_events(ss, 30.0);
    REQUIRE(back.size() == 2);
    CHECK(back.events[0].start == Catch::Approx(1.25));
    CHECK(back.events[1].end == Catch::Approx(12.75));
    CHECK(back.duration == 30.0);
}

TEST_CASE("empty event stream reads as an all-negative recording", "[io]") {
    std::stringstream ss;
    EventList back = annsim::io::read_events(ss, 5.0);
    CHECK(back.empty());
    CHECK(back.duration == 5.0);
}

TEST_CASE("malformed event rows are rejected", "[io]") {
    std::stringstream two_fields("1.0\t2.0\n");
    CHECK_THROWS_AS(annsim::io::read_events(two_fields, 10.0),
                    std::runtime_error);
    std::stringstream bad_number("a\t2.0\t1\n");
    CHECK_THROWS_AS(annsim::io::read_events(bad_number, 10.0),
                    std::runtime_error);
    std::stringstream trailing_junk("1.0x\t2.0\t1\n");
    CHECK_THROWS_AS(annsim::io::read_events(trailing_junk, 10.0),
                    std::runtime_error);
}

TEST_CASE("annotations round-trip including labels", "[io]") {
    AnnotationList ann({{{0.0, 4.0}, 0}, {{4.0, 7.5}, 1}, {{7.5, 10.0}, 0}},
                       10.0);
    std::stringstream ss;
    annsim::io::write_annotations(ss, ann);
    CHECK(ss.str() ==
          "0.000000\t4.000000\t0\n4.000000\t7.500000\t1\n7.500000\t10.000000\t0\n");

    AnnotationList back = annsim::io::read_annotations(ss, 10.0);
    REQUIRE(back.size() == 3);
    CHECK(back.annotations[1].label == 1);
    CHECK(back.annotations[2].label == 0);
    CHECK(back.annotations[1].segment.start == Catch::Approx(4.0));
}

TEST_CASE("annotation reader enforces the partition contract", "[io]") {
    // rows that do not partition [0, duration] must fail on construction
    std::stringstream gap("0.000000\t4.000000\t0\n5.000000\t10.000000\t1\n");
    CHECK_THROWS_AS(annsim::io::read_annotations(gap, 10.0),
                    std::invalid_argument);
    std::stringstream bad_label("0.000000\t10.000000\t3\n");
    CHECK_THROWS_AS(annsim::io::read_annotations(bad_label, 10.0),
                    std::invalid_argument);
}

TEST_CASE("query intervals round-trip through the two-column format", "[io]") {
    std::vector<Interval> qs = {{0.0, 3.25}, {3.25, 30.0}};
    std::stringstream ss;
    annsim::io::write_intervals(ss, qs);
    CHECK(ss.str() == "0.000000\t3.250000\n3.250000\t30.000000\n");
    auto back = annsim::io::read_intervals(ss);
    REQUIRE(back.size() == 2);
    CHECK(back[0].end == Catch::Approx(3.25));
    CHECK(back[1].end == Catch::Approx(30.0));

    std::stringstream three("1.0\t2.0\t1\n");
    CHECK_THROWS_AS(annsim::io::read_intervals(three), std::runtime_error);
}

TEST_CASE("little-endian scalar encodings", "[io]") {
    std::stringstream ss(std::ios::in | std::ios::out | std::ios::binary);
    annsim::io::detail::put_u32_le(ss, 0x01020304u);
    const std::string bytes = ss.str();
    REQUIRE(bytes.size() == 4);
    CHECK(static_cast<unsigned char>(bytes[0]) == 0x04);
    CHECK(static_cast<unsigned char>(bytes[1]) == 0x03);
    CHECK(static_cast<unsigned char>(bytes[2]) == 0x02);
    CHECK(static_cast<unsigned char>(bytes[3]) == 0x01);
    CHECK(annsim::io::detail::get_u32_le(ss) == 0x01020304u);
}

TEST_CASE("binary float round-trips preserve exact values", "[io]") {
    std::stringstream ss(std::ios::in | std::ios::out | std::ios::binary);
    annsim::io::detail::put_f32_le(ss, 3.14159f);
    annsim::io::detail::put_f64_le(ss, -2.718281828459045);
    annsim::io::detail::put_f64_le(ss, 0.1);
    CHECK(annsim::io::detail::get_f32_le(ss) == 3.14159f);
    CHECK(annsim::io::detail::get_f64_le(ss) == -2.718281828459045);
    CHECK(annsim::io::detail::get_f64_le(ss) == 0.1);
}

TEST_CASE("key=value files round-trip and tolerate comments", "[io]") {
    namespace fs = std::filesystem;
    const fs::path dir = fs::temp_directory_path() / "annsim_io_test";
    fs::create_directories(dir);
    const fs::path file = dir / "meta.txt";

    std::map<std::string, std::string> kv = {
        {"strategy", "acpd"}, {"budget", "7"}, {"gamma", "0.5"}};
    annsim::io::write_keyvalue(file, kv);
    CHECK(annsim::io::read_keyvalue(file) == kv);

    // hand-edited file: comments, blank lines, loose spacing
    {
        auto out = annsim::io::detail::open_out(file);
        out << "# generated\n\nname =  classA \n  count=3\n";
    }
    auto parsed = annsim::io::read_keyvalue(file);
    CHECK(parsed.at("name") == "classA");
    CHECK(parsed.at("count") == "3");
    CHECK(parsed.size() == 2);

    {
        auto out = annsim::io::detail::open_out(file);
        out << "no separator here\n";
    }
    CHECK_THROWS_AS(annsim::io::read_keyvalue(file), std::runtime_error);
    fs::remove_all(dir);
}

TEST_CASE("file round-trips for events and annotations", "[io]") {
    namespace fs = std::filesystem;
    const fs::path dir = fs::temp_directory_path() / "annsim_io_files";
    fs::create_directories(dir);

    EventList ev({{2.0, 3.5}}, 10.0);
    annsim::io::write_events(dir / "gt.txt", ev);
    EventList ev_back = annsim::io::read_events(dir / "gt.txt", 10.0);
    REQUIRE(ev_back.size() == 1);
    CHECK(ev_back.events[0].start == Catch::Approx(2.0));

    AnnotationList ann({{{0.0, 5.0}, 1}, {{5.0, 10.0}, 0}}, 10.0);
    annsim::io::write_annotations(dir / "weak.ann", ann);
    AnnotationList ann_back =
        annsim::io::read_annotations(dir / "weak.ann", 10.0);
    REQUIRE(ann_back.size() == 2);
    CHECK(ann_back.annotations[0].label == 1);

    CHECK_THROWS_AS(annsim::io::read_events(dir / "missing.txt", 10.0),
                    std::runtime_error);
    fs::remove_all(dir);
}
