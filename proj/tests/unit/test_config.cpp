#include "guardscan/config.hpp"
#include "guardscan/dataset.hpp"

#include "support.hpp"

#include <doctest.h>

using namespace guardscan;
using nlohmann::json;

namespace {

std::string message_of(const json& doc)
{
    try {
        config_from_json(doc);
    } catch (const std::invalid_argument& e) {
        return e.what();
    }
    return "";
}

}  // namespace

TEST_CASE("defaults survive a round trip")
{
    const json d = config_to_json(PipelineConfig{});
    CHECK(config_to_json(config_from_json(d)) == d);
    CHECK(config_to_json(config_from_json(json::object())) == d);
}

TEST_CASE("unknown keys are rejected by path")
{
    CHECK(message_of({{"scan", {{"stride_z", 3}}}}).find("scan.stride_z") != std::string::npos);
    CHECK(message_of({{"detector", json::object()}}).find("detector") != std::string::npos);
}

TEST_CASE("types are checked")
{
    CHECK(message_of({{"scan", {{"stride_x", "wide"}}}}).find("scan.stride_x") != std::string::npos);
    CHECK(message_of({{"scan", {{"stride_x", 2.5}}}}).find("scan.stride_x") != std::string::npos);
    CHECK(message_of({{"scan", 4}}).find("scan") != std::string::npos);
    // Integers are fine where reals are expected.
    CHECK(config_from_json({{"scan", {{"nms_iou", 1}}}}).scan.nms_iou == 1.0);
}

TEST_CASE("the spacing penalty is optional")
{
    CHECK(!config_from_json(json::object()).spacing.ubiquity.tau);
    const PipelineConfig set = config_from_json({{"spacing", {{"tau", 0.05}}}});
    REQUIRE(set.spacing.ubiquity.tau);
    CHECK(*set.spacing.ubiquity.tau == 0.05);
    CHECK(!config_from_json({{"spacing", {{"tau", nullptr}}}}).spacing.ubiquity.tau);
    CHECK(config_to_json(set)["spacing"]["tau"] == 0.05);
}

TEST_CASE("values are validated after merging")
{
    CHECK(!message_of({{"scan", {{"nms_iou", 0.0}}}}).empty());
    CHECK(!message_of({{"spacing", {{"k_min", 4}, {"k_max", 2}}}}).empty());
    CHECK(!message_of({{"svm", {{"c_grid", json::array()}}}}).empty());
    CHECK(!message_of({{"hog", {{"cell_size", 7}}}}).empty());
    CHECK(!message_of({{"jobs", 0}}).empty());
    CHECK(!message_of({{"eval", {{"iou_threshold", 1.5}}}}).empty());
}

TEST_CASE("overrides parse JSON values and replace arrays whole")
{
    json doc = config_to_json(PipelineConfig{});
    apply_override(doc, "svm.c_grid=[1,10]");
    apply_override(doc, "floors.k=4");
    apply_override(doc, "synth.rail=true");
    const PipelineConfig cfg = config_from_json(doc);
    CHECK(cfg.svm.c_grid == std::vector<double>{1.0, 10.0});
    CHECK(cfg.floors.k == 4);
    CHECK(cfg.synth.rail);

    CHECK_THROWS_AS(apply_override(doc, "no_equals_sign"), std::invalid_argument);
    CHECK_THROWS_AS(apply_override(doc, "floors.nope=1"), std::invalid_argument);
    CHECK_THROWS_AS(apply_override(doc, "floors.k=many"), std::invalid_argument);
}

TEST_CASE("flags beat the file and the file beats defaults")
{
    testing::TempDir dir("config");
    const auto file = dir / "cfg.json";
    write_file_atomic(file, R"({"scan": {"stride_x": 3, "stride_y": 6}, "floors": {"k": 5}})");

    CHECK(resolve_config(nullptr, {}).scan.stride_x == 2);
    const PipelineConfig from_file = resolve_config(&file, {});
    CHECK(from_file.scan.stride_x == 3);
    CHECK(from_file.scan.stride_y == 6);
    CHECK(from_file.floors.k == 5);
    const PipelineConfig both = resolve_config(&file, {"scan.stride_x=5"});
    CHECK(both.scan.stride_x == 5);
    CHECK(both.scan.stride_y == 6);
    CHECK(resolve_config(&file, {"scan.stride_x=5", "scan.stride_x=7"}).scan.stride_x == 7);

    const auto missing = dir / "missing.json";
    try {
        resolve_config(&missing, {});
        FAIL("missing file accepted");
    } catch (const std::runtime_error& e) {
        CHECK(std::string(e.what()).find("missing.json") != std::string::npos);
    }

    write_file_atomic(file, "{not json");
    CHECK_THROWS_AS(resolve_config(&file, {}), std::invalid_argument);
}
