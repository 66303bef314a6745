#include <doctest.h>

#include "gazeintent/scenario.hpp"
#include "gazeintent/scene.hpp"
#include "support.hpp"

using namespace gazeintent;

namespace {

AnnotatedScene small_scene() {
  AnnotatedScene s;
  s.view = View::Robot;
  s.intrinsics = {900, 900, 640, 360, 1280, 720};
  s.objects.push_back({"r_apple", "apple", AnnotationKind::Object, {10, 10, 50, 50}, std::nullopt, std::nullopt, std::nullopt});
  s.objects.push_back({"r_cup", "Cup", AnnotationKind::Object, {100, 10, 150, 60}, std::nullopt, std::nullopt, std::nullopt});
  s.objects.push_back({"r_table", "table", AnnotationKind::Region, {0, 400, 600, 700}, std::nullopt, std::nullopt, std::nullopt});
  return s;
}

}  // namespace

TEST_SUITE("scene") {

TEST_CASE("bbox membership is edge inclusive") {
  BBox b{10, 20, 30, 40};
  CHECK(b.contains(Point2(10, 20)));
  CHECK(b.contains(Point2(30, 40)));
  CHECK_FALSE(b.contains(Point2(30.0001, 40)));
  CHECK(b.midpoint() == Point2(20, 30));
  CHECK(b.area() == 400);
  CHECK_FALSE((BBox{5, 0, 4, 1}.valid()));
}

TEST_CASE("mask from column-major RLE") {
  // 3 wide, 2 high; column-major bits 0,1 | 1,0 | 0,1
  const Mask m = Mask::from_rle(3, 2, {1, 2, 2, 1});
  CHECK_FALSE(m.at(0, 0));
  CHECK(m.at(0, 1));
  CHECK(m.at(1, 0));
  CHECK_FALSE(m.at(1, 1));
  CHECK_FALSE(m.at(2, 0));
  CHECK(m.at(2, 1));
  CHECK(m.area() == 3);
  CHECK(m.contains(Point2(0.9, 1.9)));
  CHECK_FALSE(m.contains(Point2(-0.1, 1.0)));
  CHECK_FALSE(m.contains(Point2(3.0, 1.0)));
  CHECK_CODE(Mask::from_rle(3, 2, {1, 2}), ErrorCode::InvalidObservation);
  CHECK_CODE(Mask::from_rle(3, 2, {4, 4}), ErrorCode::InvalidObservation);
  CHECK_CODE(Mask(2, 2, {1, 0, 1}), ErrorCode::InvalidObservation);
}

TEST_CASE("observation position is the bbox midpoint") {
  ObjectObservation o("a", {0, 0, 10, 4});
  CHECK(o.position() == Point2(5, 2));
  CHECK_CODE(ObjectObservation("b", {10, 0, 0, 4}), ErrorCode::InvalidObservation);
}

TEST_CASE("observe filters by category and property") {
  const auto s = small_scene();
  auto cups = observe(s, "cup", View::Robot);
  REQUIRE(cups.objects.size() == 1);
  CHECK(cups.objects[0].id() == "r_cup");
  CHECK(observe(s, "stuff", View::Robot).objects.size() == 2);
  CHECK(observe(s, TargetQuery{TargetProperty::Position, "position"}, View::Robot).objects.size() == 1);
  CHECK(observe(s, TargetQuery{TargetProperty::Position, "table"}, View::Robot).objects[0].id() == "r_table");
  CHECK_CODE(observe(s, "banana", View::Robot), ErrorCode::NoObjectsDetected);
  CHECK_CODE(observe(s, TargetQuery{TargetProperty::Position, "shelf"}, View::Robot), ErrorCode::NoObjectsDetected);
  CHECK_CODE(observe(s, "cup", View::Human), ErrorCode::InvalidObservation);
}

TEST_CASE("observe rejects bad annotations") {
  auto s = small_scene();
  s.objects[0].bbox = {-1, 0, 10, 10};
  CHECK_CODE(observe(s, "apple", View::Robot), ErrorCode::InvalidObservation);
  s = small_scene();
  s.objects[1].id = "r_apple";
  CHECK_CODE(observe(s, "stuff", View::Robot), ErrorCode::InvalidObservation);
}

TEST_CASE("target property text") {
  CHECK(target_property_from("Object") == TargetProperty::Object);
  CHECK(target_property_from("position") == TargetProperty::Position);
  CHECK_FALSE(target_property_from("place").has_value());
}

TEST_CASE("pawn board holds nine generic objects") {
  const Scenario s = load_scenario(testing::scenario_path("s1_pawns.json"));
  const auto human = observe(s.human_scene, "stuff", View::Human);
  CHECK(human.objects.size() == 9);
  const auto robot = observe(s.robot_scene, "stuff", View::Robot);
  CHECK(robot.objects.size() == 9);
  CHECK(human.find("h_pawn_4") != nullptr);
}

}  // TEST_SUITE
