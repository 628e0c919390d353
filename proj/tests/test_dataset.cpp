#include <doctest.h>

#include <cmath>

#include "cbpf/dataset.hpp"
#include "helpers.hpp"

using namespace cbpf;

namespace {

DatasetSchema two_factor_schema() {
    DatasetSchema s;
    s.factors = {{"time", {"day", "night"}}, {"mood", {"happy", "sad"}}};
    s.item_attributes = {"genre"};
    s.user_attributes = {"age"};
    s.finalize();
    return s;
}

} // namespace

TEST_SUITE("dataset") {

TEST_CASE("schema finalize builds the condition index") {
    DatasetSchema s;
    s.factors = {{"time", {"morning", "evening"}}, {"mood", {"happy", "sad", "neutral"}}};
    s.finalize();

    CHECK(s.factor_count() == 2);
    CHECK(s.condition_count() == 5);
    CHECK(s.condition_offset(0) == 0);
    CHECK(s.condition_offset(1) == 2);
    CHECK(s.condition_index(0, "evening") == 1);
    CHECK(s.condition_index(1, "sad") == 3);
    CHECK(s.condition_index(1, "bored") == -1);
    CHECK(s.factor_of(3) == std::pair<int, int>{1, 1});
    CHECK(s.condition_name(4) == "neutral");
    CHECK(s.factor_index("mood") == 1);
    CHECK(s.factor_index("weather") == -1);
}

TEST_CASE("schema finalize rejects malformed schemas") {
    DatasetSchema s;
    s.rating_scale = {5.0, 1.0};
    CHECK_THROWS_AS(s.finalize(), ValidationError);

    s = DatasetSchema{};
    s.user_column.clear();
    CHECK_THROWS_AS(s.finalize(), ValidationError);

    s = DatasetSchema{};
    s.item_column = s.user_column;
    CHECK_THROWS_AS(s.finalize(), ValidationError);

    s = DatasetSchema{};
    s.factors = {{"rating", {"a"}}}; // collides with the rating column
    CHECK_THROWS_AS(s.finalize(), ValidationError);

    s = DatasetSchema{};
    s.factors = {{"time", {}}};
    CHECK_THROWS_AS(s.finalize(), ValidationError);

    s = DatasetSchema{};
    s.factors = {{"time", {"day"}}, {"time", {"night"}}};
    CHECK_THROWS_AS(s.finalize(), ValidationError);

    s = DatasetSchema{};
    s.factors = {{"time", {"day", "day"}}};
    CHECK_THROWS_AS(s.finalize(), ValidationError);
}

TEST_CASE("load_dataset parses rows, trims fields and skips blank lines") {
    auto dir = testutil::scratch_dir("dataset_load");
    auto path = testutil::write_file(dir / "r.csv",
        "user,item,rating,time,mood,genre,age\n"
        "u1, i1 ,4,day,happy,comedy,30\n"
        "\n"
        "u2,i1,3,night,NA,drama,25\n"
        "u1,i2,5,,sad,comedy,NA\n"
        "u2,i2,2,day,sad,,40\n");

    Dataset d = load_dataset(path, two_factor_schema());
    REQUIRE(d.size() == 4);
    CHECK(d.users.size() == 2);
    CHECK(d.items.size() == 2);
    CHECK(d.users.names[0] == "u1");
    CHECK(d.items.names[1] == "i2");
    CHECK(d.users.find("u2") == 1);
    CHECK(d.users.find("nobody") == -1);

    const auto& o0 = d.observations[0];
    CHECK(o0.user == 0);
    CHECK(o0.item == 0); // " i1 " trimmed to "i1"
    CHECK(o0.rating == 4.0);
    CHECK(o0.conditions == std::vector<uint8_t>{1, 0, 1, 0});
    CHECK(o0.known_factors == std::vector<int32_t>{0, 1});

    // NA mood and empty time both decode as unknown factors
    CHECK(d.observations[1].conditions == std::vector<uint8_t>{0, 1, 0, 0});
    CHECK(d.observations[1].known_factors == std::vector<int32_t>{0});
    CHECK(d.observations[2].known_factors == std::vector<int32_t>{1});

    REQUIRE(d.situation_keys.size() == 4);
    CHECK(d.situation_keys[0] == SituationKey{0, 0});
    CHECK(d.situation_keys[1] == SituationKey{1, -1});
    CHECK(d.situation_keys[2] == SituationKey{-1, 1});
    CHECK(d.situation_keys[3] == SituationKey{0, 1});

    // first non-missing attribute value wins
    CHECK(d.item_attributes[0].at("genre") == "comedy");
    CHECK(d.item_attributes[1].at("genre") == "comedy");
    CHECK(d.user_attributes[0].at("age") == "30");
    CHECK(d.user_attributes[1].at("age") == "25");

    auto idx = all_indices(d);
    REQUIRE(idx.size() == 4);
    CHECK(idx.front() == 0);
    CHECK(idx.back() == 3);
}

TEST_CASE("load_dataset reorders columns by header name") {
    auto dir = testutil::scratch_dir("dataset_reorder");
    auto path = testutil::write_file(dir / "r.csv",
        "mood,rating,item,user,time,age,genre\n"
        "sad,2,i9,u7,night,55,horror\n");

    Dataset d = load_dataset(path, two_factor_schema());
    REQUIRE(d.size() == 1);
    CHECK(d.users.names[0] == "u7");
    CHECK(d.items.names[0] == "i9");
    CHECK(d.observations[0].rating == 2.0);
    CHECK(d.observations[0].conditions == std::vector<uint8_t>{0, 1, 0, 1});
    CHECK(d.item_attributes[0].at("genre") == "horror");
}

TEST_CASE("load_dataset reports file position in parse errors") {
    auto dir = testutil::scratch_dir("dataset_errors");
    DatasetSchema s = two_factor_schema();

    CHECK_THROWS_WITH_AS(load_dataset((dir / "absent.csv").string(), s),
                         doctest::Contains("cannot open file"), ParseError);

    auto no_header = testutil::write_file(dir / "empty.csv", "");
    CHECK_THROWS_WITH_AS(load_dataset(no_header, s),
                         doctest::Contains("missing header row"), ParseError);

    auto bad_header = testutil::write_file(dir / "header.csv", "user,item,score\nu,i,3\n");
    CHECK_THROWS_WITH_AS(load_dataset(bad_header, s),
                         doctest::Contains("missing column 'rating'"), ParseError);

    auto short_row = testutil::write_file(dir / "short.csv",
        "user,item,rating,time,mood,genre,age\n"
        "u1,i1,4,day,happy,c,30\n"
        "u1,i2,5,day\n");
    try {
        load_dataset(short_row, s);
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(e.line() == 3);
        CHECK(std::string(e.what()) == short_row + ":3: expected 7 fields, got 4");
    }

    auto bad_rating = testutil::write_file(dir / "rating.csv",
        "user,item,rating,time,mood,genre,age\n"
        "u1,i1,four,day,happy,c,30\n");
    CHECK_THROWS_WITH_AS(load_dataset(bad_rating, s),
                         doctest::Contains("unparseable rating 'four'"), ParseError);
}

TEST_CASE("load_dataset validates ratings and condition values") {
    auto dir = testutil::scratch_dir("dataset_validate");
    DatasetSchema s = two_factor_schema();

    auto out_of_scale = testutil::write_file(dir / "scale.csv",
        "user,item,rating,time,mood,genre,age\n"
        "u1,i1,6,day,happy,c,30\n");
    CHECK_THROWS_WITH_AS(load_dataset(out_of_scale, s),
                         doctest::Contains(":2: rating 6 outside scale"), ValidationError);

    auto bad_condition = testutil::write_file(dir / "cond.csv",
        "user,item,rating,time,mood,genre,age\n"
        "u1,i1,4,noon,happy,c,30\n");
    CHECK_THROWS_WITH_AS(load_dataset(bad_condition, s),
                         doctest::Contains("factor 'time' has no condition 'noon'"),
                         ValidationError);
}

TEST_CASE("binarize_situation round-trips through decode_situation") {
    DatasetSchema s = two_factor_schema();

    auto [bits, known] = binarize_situation({{"time", "night"}, {"mood", "happy"}}, s);
    CHECK(bits == std::vector<uint8_t>{0, 1, 1, 0});
    CHECK(known == std::vector<int32_t>{0, 1});
    auto back = decode_situation(bits, known, s);
    CHECK(back.at("time") == "night");
    CHECK(back.at("mood") == "happy");

    auto [partial, known1] = binarize_situation({{"mood", "sad"}, {"time", "NA"}}, s);
    CHECK(partial == std::vector<uint8_t>{0, 0, 0, 1});
    CHECK(known1 == std::vector<int32_t>{1});
    CHECK(decode_situation(partial, known1, s).count("time") == 0);

    CHECK(binarize_situation({}, s).second.empty());
    CHECK_THROWS_WITH_AS(binarize_situation({{"weather", "rain"}}, s),
                         doctest::Contains("unknown factor 'weather'"), ValidationError);
    CHECK_THROWS_AS(binarize_situation({{"time", "noon"}}, s), ValidationError);
}

TEST_CASE("situation keys convert to bits and strings") {
    DatasetSchema s = two_factor_schema();

    SituationKey key{1, -1};
    auto [bits, known] = key_to_bits(key, s);
    CHECK(bits == std::vector<uint8_t>{0, 1, 0, 0});
    CHECK(known == std::vector<int32_t>{0});
    CHECK(key_to_string(key, s) == "time=night|mood=unknown");
    CHECK(key_to_string(SituationKey{0, 1}, s) == "time=day|mood=sad");

    ContextualObservation obs;
    obs.conditions = {0, 1, 1, 0};
    obs.known_factors = {0, 1};
    CHECK(key_of(obs, s) == SituationKey{1, 0});
}

TEST_CASE("dataset_stats computes summary values") {
    auto dir = testutil::scratch_dir("dataset_stats");
    auto path = testutil::write_file(dir / "r.csv",
        "user,item,rating,time,mood,genre,age\n"
        "u1,i1,4,day,happy,c,30\n"
        "u2,i1,3,night,NA,d,25\n"
        "u1,i2,5,,sad,c,NA\n"
        "u2,i2,2,day,sad,,40\n"
        "u3,i1,1,day,happy,c,20\n");

    Dataset d = load_dataset(path, two_factor_schema());
    StatsReport r = dataset_stats(d);
    CHECK(r.ratings == 5);
    CHECK(r.users == 3);
    CHECK(r.items == 2);
    CHECK(*r.rating_mean == doctest::Approx(3.0).epsilon(1e-12));
    CHECK(*r.rating_median == doctest::Approx(3.0).epsilon(1e-12));
    // sample stddev of {1,2,3,4,5} is sqrt(2.5)
    CHECK(*r.rating_stddev == doctest::Approx(std::sqrt(2.5)).epsilon(1e-12));
    CHECK(r.sparsity == doctest::Approx(1.0 - 5.0 / 6.0).epsilon(1e-12));
    CHECK(r.context_factors == 2);
    CHECK(r.context_conditions == 4);
    CHECK(r.item_attribute_count == 1);
    CHECK(r.user_attribute_count == 1);

    std::string text = r.to_text();
    CHECK(text.find("#ratings                    5\n") != std::string::npos);
    CHECK(text.find("rating stddev               1.58\n") != std::string::npos);
    CHECK(text.find("sparsity                    16.67%\n") != std::string::npos);

    std::string csv = r.to_csv();
    CHECK(csv.find("ratings,users,items,") == 0);
    CHECK(csv.find("\n5,3,2,3.000000,3.000000,1.581139,0.166667,2,4,1,1\n") !=
          std::string::npos);
}

TEST_CASE("empty dataset reports no rating moments") {
    auto dir = testutil::scratch_dir("dataset_empty");
    auto path = testutil::write_file(dir / "r.csv", "user,item,rating,time,mood,genre,age\n");
    Dataset d = load_dataset(path, two_factor_schema());
    CHECK(d.size() == 0);
    StatsReport r = dataset_stats(d);
    CHECK(r.ratings == 0);
    CHECK(!r.rating_mean.has_value());
    CHECK(r.to_text().find("rating mean                 -\n") != std::string::npos);
}

} // TEST_SUITE
