#include "semcast/scene/constraints.hpp"
#include "semcast/scene/corpus.hpp"
#include "semcast/scene/markup.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace semcast;
using namespace semcast::scene;

namespace {

Errc parse_error(std::string_view text) {
  try {
    parse_scene_markup(text);
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "expected a parse error for: " << text;
  return Errc::InvalidArgument;
}

const ConstraintProfile kDefault = ConstraintProfile::prompt_default();

}  // namespace

TEST(ParseSceneMarkup, SceneWithSky) {
  auto g = parse_scene_markup(R"(<a-scene><a-sky color="#87CEEB"></a-sky></a-scene>)");
  ASSERT_EQ(g.roots.size(), 1u);
  EXPECT_EQ(g.roots[0].tag, "a-scene");
  ASSERT_EQ(g.roots[0].children.size(), 1u);
  ASSERT_TRUE(g.declared_sky.has_value());
  EXPECT_EQ(g.declared_sky->color, "#87CEEB");
  EXPECT_EQ(g.declared_sky->path, "/a-scene[0]/a-sky[0]");
  EXPECT_EQ(scene_stats(g).node_count, 2u);
}

TEST(ParseSceneMarkup, ErrorPaths) {
  EXPECT_EQ(parse_error(""), Errc::EmptyInput);
  EXPECT_EQ(parse_error("  \n\t"), Errc::EmptyInput);
  EXPECT_EQ(parse_error(R"(<a-box color="red">)"), Errc::UnbalancedTag);
  EXPECT_EQ(parse_error("<a-box></a-sphere>"), Errc::UnbalancedTag);
  EXPECT_EQ(parse_error("</a-box>"), Errc::UnbalancedTag);
  EXPECT_EQ(parse_error("<div></div>"), Errc::NonPrefixedTag);
  EXPECT_EQ(parse_error("<a-box color=red></a-box>"), Errc::MalformedAttribute);
  EXPECT_EQ(parse_error(R"(<a-box color="red" color="blue"></a-box>)"), Errc::MalformedAttribute);
  EXPECT_EQ(parse_error(R"(<a-box color="a<b"></a-box>)"), Errc::MalformedAttribute);
  EXPECT_EQ(parse_error(R"(<a-box color="&nbsp;"></a-box>)"), Errc::MalformedAttribute);
  EXPECT_EQ(parse_error(R"(<a-box animation="rotation"></a-box>)"), Errc::MalformedAttribute);
  EXPECT_EQ(parse_error("<a-box>hello</a-box>"), Errc::MalformedMarkup);
  EXPECT_EQ(parse_error("<x:a-box></x:a-box>"), Errc::MalformedMarkup);
  EXPECT_EQ(parse_error("<!DOCTYPE html><a-box></a-box>"), Errc::MalformedMarkup);
  EXPECT_EQ(parse_error("```html\n<a-box></a-box>\n```\n```html\n<a-box></a-box>\n```"), Errc::MultipleCodeBlocks);
  EXPECT_EQ(parse_error("```html\n<a-box></a-box>\n"), Errc::MalformedMarkup);
  EXPECT_EQ(parse_error("```\n\n```"), Errc::EmptyInput);
}

TEST(ParseSceneMarkup, ExtractsSingleFencedBlock) {
  const std::string reply =
      "Here is the scene:\n```html\n<a-scene>\n  <a-box position=\"0 1 -3\"></a-box>\n</a-scene>\n```\nEnjoy!";
  auto g = parse_scene_markup(reply);
  EXPECT_EQ(serialize_scene(g), R"(<a-scene><a-box position="0 1 -3"></a-box></a-scene>)");
  EXPECT_EQ(g.source_bytes, reply.size());
}

TEST(ParseSceneMarkup, PreservesAttributeOrderAndDecodesEntities) {
  auto g = parse_scene_markup(R"(<a-text value="a &amp; b &lt;3 &#65;&#x42;" position='0 0 0' align="center"/>)");
  const auto& n = g.roots[0];
  ASSERT_EQ(n.attributes.size(), 3u);
  EXPECT_EQ(n.attributes[0].name, "value");
  EXPECT_EQ(n.attributes[0].value, "a & b <3 AB");
  EXPECT_EQ(n.attributes[1].name, "position");
  EXPECT_EQ(n.attributes[2].name, "align");
}

TEST(ParseSceneMarkup, AnimationComponentsParsed) {
  auto g = parse_scene_markup(
      R"(<a-box animation="property: rotation; to: 0 360 0; loop: true" animation__fade="property: material.opacity;to: 0;"></a-box>)");
  const auto& n = g.roots[0];
  ASSERT_EQ(n.animation_components.size(), 2u);
  EXPECT_EQ(n.animation_components[0].name, "animation");
  EXPECT_EQ(*n.animation_components[0].property("to"), "0 360 0");
  EXPECT_EQ(*n.animation_components[1].property("property"), "material.opacity");
  EXPECT_TRUE(n.animated());
}

TEST(ParseSceneMarkup, CommentsAndValuelessAttributesAccepted) {
  auto g = parse_scene_markup("<!-- scene --><a-scene embedded>\n<!-- ground -->\n<a-plane></a-plane></a-scene>");
  EXPECT_EQ(serialize_scene(g), R"(<a-scene embedded=""><a-plane></a-plane></a-scene>)");
}

TEST(SerializeScene, NormalizesSelfClosingAndSpacing) {
  auto g = parse_scene_markup(R"(<a-sky   color="#87CEEB"/>)");
  EXPECT_EQ(serialize_scene(g), R"(<a-sky color="#87CEEB"></a-sky>)");
}

TEST(SerializeScene, EmptyGraphRejected) {
  SceneGraph empty;
  try {
    serialize_scene(empty);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::EmptyGraph);
  }
}

TEST(SerializeScene, EscapesSpecialCharacters) {
  SceneGraph g;
  g.roots.push_back({"a-text", {{"value", "\"x\" & <y>"}}, {}, {}});
  const std::string text = serialize_scene(g);
  EXPECT_EQ(text, R"(<a-text value="&quot;x&quot; &amp; &lt;y&gt;"></a-text>)");
  EXPECT_TRUE(structurally_equal(parse_scene_markup(text), g));
}

TEST(SceneStats, Counts) {
  auto sky = parse_scene_markup(R"(<a-sky color="#fff"></a-sky>)");
  auto s = scene_stats(sky);
  EXPECT_EQ(s.node_count, 1u);
  EXPECT_EQ(s.animated_node_count, 0u);
  EXPECT_EQ(s.max_depth, 1u);

  auto two = parse_scene_markup(R"(<a-scene><a-sky color="#87CEEB"></a-sky></a-scene>)");
  auto s2 = scene_stats(two);
  EXPECT_EQ(s2.node_count, 2u);
  EXPECT_EQ(s2.max_depth, 2u);
  EXPECT_EQ(s2.payload_bytes, serialize_scene(two).size());
  EXPECT_EQ(s2.distinct_tag_histogram.at("a-sky"), 1u);
}

TEST(ValidateConstraints, ForbiddenConstructs) {
  auto assets = validate_constraints(
      parse_scene_markup(R"(<a-scene><a-assets></a-assets><a-box animation="property: x"></a-box></a-scene>)"), kDefault);
  EXPECT_EQ(assets.verdict(), Verdict::Fail);
  ASSERT_EQ(assets.violations.size(), 1u);
  EXPECT_EQ(assets.violations[0].rule, rule::kForbiddenTag);
  EXPECT_EQ(assets.violations[0].path, "/a-scene[0]/a-assets[0]");

  auto gltf = validate_constraints(
      parse_scene_markup(R"(<a-entity gltf-model="#tree" animation="property: rotation"></a-entity>)"), kDefault);
  ASSERT_EQ(gltf.violations.size(), 1u);
  EXPECT_EQ(gltf.violations[0].rule, rule::kForbiddenAttribute);
  EXPECT_EQ(gltf.violations[0].attribute, "gltf-model");

  auto anim = validate_constraints(
      parse_scene_markup(R"(<a-box animation="property: x"><a-animation attribute="rotation"></a-animation></a-box>)"),
      kDefault);
  ASSERT_EQ(anim.violations.size(), 1u);
  EXPECT_EQ(anim.violations[0].rule, rule::kDeprecatedAnimation);
}

TEST(ValidateConstraints, SkyPlusAnimatedBoxPasses) {
  // Manual walk of the default profile: no forbidden tags, no model/script/
  // link attributes, one animated node, no background component, well under
  // the payload cap.
  auto g = parse_scene_markup(
      R"(<a-sky color="#87CEEB"></a-sky><a-box position="0 1 -3" animation="property: rotation; to: 0 360 0; loop: true; dur: 4000"></a-box>)");
  auto report = validate_constraints(g, kDefault);
  EXPECT_EQ(report.verdict(), Verdict::Pass);
  EXPECT_TRUE(report.violations.empty());
  EXPECT_EQ(report.stats.animated_node_count, 1u);
  // Two nodes is below the detail threshold: advisory only.
  EXPECT_EQ(report.advisories.size(), 1u);
}

TEST(ValidateConstraints, OtherRules) {
  auto still = validate_constraints(parse_scene_markup(R"(<a-box></a-box>)"), kDefault);
  EXPECT_TRUE(still.has_rule(rule::kMissingAnimation));

  auto link = validate_constraints(
      parse_scene_markup(R"(<a-box src="https://cdn.example.com/t.png" animation="property: x"></a-box>)"), kDefault);
  EXPECT_TRUE(link.has_rule(rule::kExternalLink));
  EXPECT_EQ(link.violations.size(), 1u);

  auto bg = validate_constraints(
      parse_scene_markup(R"(<a-scene background="color: red"><a-box animation="property: x"></a-box></a-scene>)"),
      kDefault);
  EXPECT_TRUE(bg.has_rule(rule::kBackgroundComponent));

  auto script = validate_constraints(
      parse_scene_markup(R"X(<a-box onclick="go()" animation="property: x"></a-box>)X"), kDefault);
  EXPECT_TRUE(script.has_rule(rule::kScript));

  auto big = kDefault;
  big.max_payload_bytes = 10;
  auto too_big = validate_constraints(parse_scene_markup(R"(<a-box animation="property: x"></a-box>)"), big);
  EXPECT_TRUE(too_big.has_rule(rule::kPayloadTooLarge));

  auto sky = kDefault;
  sky.require_sky_element = true;
  EXPECT_TRUE(validate_constraints(parse_scene_markup(R"(<a-box animation="property: x"></a-box>)"), sky)
                  .has_rule(rule::kMissingSky));
}

TEST(CheckMarkup, ParseFailuresBecomeViolations) {
  auto script = check_markup("<a-scene><script>alert(1)</script></a-scene>", kDefault);
  ASSERT_FALSE(script.graph);
  EXPECT_TRUE(script.report.has_rule(rule::kScript));

  auto two = check_markup("```\n<a-box></a-box>\n```\n```\n<a-box></a-box>\n```", kDefault);
  EXPECT_TRUE(two.report.has_rule(rule::kMultipleCodeBlocks));

  auto div = check_markup("<div></div>", kDefault);
  EXPECT_TRUE(div.report.has_rule(rule::kNonPrefixedTag));
}

TEST(ValidationReportJson, VerdictMatchesViolations) {
  auto r = validate_constraints(parse_scene_markup("<a-light></a-light>"), kDefault);
  auto j = to_json(r);
  EXPECT_EQ(j["verdict"], "fail");
  EXPECT_EQ(j["violations"].size(), r.violations.size());
  EXPECT_EQ(j["stats"]["payload_bytes"], r.stats.payload_bytes);
}

TEST(ConstraintProfileJson, RoundTripAndStrictKeys) {
  auto p = ConstraintProfile::prompt_default();
  p.max_payload_bytes = 1234;
  nlohmann::json j = p;
  EXPECT_EQ(j.get<ConstraintProfile>(), p);
  j["surprise"] = 1;
  EXPECT_THROW(j.get<ConstraintProfile>(), Error);
}

TEST(NodePaths, RemoveNodeAndAttribute) {
  auto g = parse_scene_markup(R"(<a-scene><a-sky color="#000"></a-sky><a-box color="red"></a-box></a-scene>)");
  auto without_sky = remove_node(g, "/a-scene[0]/a-sky[0]");
  EXPECT_FALSE(without_sky.declared_sky);
  EXPECT_EQ(scene_stats(without_sky).node_count, 2u);
  auto plain = remove_attribute(g, "/a-scene[0]/a-box[1]", "color");
  EXPECT_EQ(serialize_scene(plain), R"(<a-scene><a-sky color="#000"></a-sky><a-box></a-box></a-scene>)");
  EXPECT_THROW(remove_node(g, "/a-scene[0]/a-box[0]"), Error);
  EXPECT_THROW(remove_node(g, "a-scene"), Error);
}

// Random trees built directly as graphs: serialize -> parse must reproduce
// the tree, and serialization must be a fixed point after one pass.
TEST(SceneRoundTripProperty, RandomTrees) {
  std::mt19937 rng(7);
  const std::vector<std::string> tags = {"a-box", "a-sphere", "a-entity", "a-cylinder", "a-plane", "a-text"};
  const std::vector<std::string> values = {"0 1 -3", "#FFAA00", "a & b", "say \"hi\"", "", "x<y>z", "property: rotation; to: 0 360 0"};
  auto make = [&](auto&& self, int depth) -> SceneNode {
    SceneNode n;
    n.tag = tags[rng() % tags.size()];
    const int attrs = static_cast<int>(rng() % 4);
    for (int i = 0; i < attrs; ++i) {
      std::string name = i == 0 && rng() % 3 == 0 ? "animation" : "attr" + std::to_string(i);
      std::string value = name == "animation" ? values.back() : values[rng() % (values.size() - 1)];
      n.attributes.push_back({name, value});
    }
    n.animation_components = parse_animation_components(n.attributes);
    if (depth < 4) {
      const int kids = static_cast<int>(rng() % 3);
      for (int i = 0; i < kids; ++i) n.children.push_back(self(self, depth + 1));
    }
    return n;
  };
  for (int trial = 0; trial < 300; ++trial) {
    SceneGraph g;
    const int roots = 1 + static_cast<int>(rng() % 3);
    for (int i = 0; i < roots; ++i) g.roots.push_back(make(make, 1));
    refresh_sky(g);
    const std::string once = serialize_scene(g);
    const SceneGraph back = parse_scene_markup(once);
    ASSERT_TRUE(structurally_equal(back, g)) << once;
    ASSERT_EQ(serialize_scene(back), once);
    ASSERT_EQ(scene_stats(back).payload_bytes, once.size());
  }
}

// ---- bundled corpora ---------------------------------------------------------------

TEST(SceneCorpus, SizesMeetTheFloor) {
  const auto c = load_corpus(std::filesystem::path(SEMCAST_DATA_DIR) / "scenes");
  EXPECT_GE(c.adversarial.size(), 50u);
  EXPECT_GE(c.compliant.size(), 20u);
}

TEST(SceneCorpus, AdversarialScenesFailOnExactlyTheirRule) {
  for (const auto& s : load_corpus(std::filesystem::path(SEMCAST_DATA_DIR) / "scenes").adversarial) {
    const auto check = check_markup(s.text, kDefault);
    EXPECT_FALSE(check.report.passed()) << s.file;
    EXPECT_EQ(violated_rules(check.report), std::set<std::string>{*s.expected_rule}) << s.file;
  }
}

TEST(SceneCorpus, CompliantScenesPass) {
  for (const auto& s : load_corpus(std::filesystem::path(SEMCAST_DATA_DIR) / "scenes").compliant) {
    const auto check = check_markup(s.text, kDefault);
    EXPECT_TRUE(check.report.passed()) << s.file << " " << to_json(check.report).dump();
  }
}

TEST(SceneCorpus, EveryFileRoundTrips) {
  const auto c = load_corpus(std::filesystem::path(SEMCAST_DATA_DIR) / "scenes");
  for (const auto* set : {&c.compliant, &c.adversarial})
    for (const auto& s : *set) EXPECT_TRUE(round_trips(s.text)) << s.file;
}

TEST(SplitCodeBlocks, FencedAndBare) {
  EXPECT_EQ(split_code_blocks("<a-scene></a-scene>").size(), 1u);
  const auto two = split_code_blocks("```html\n<a-scene></a-scene>\n```\ntext\n```\n<a-scene>\n</a-scene>\n```\n");
  ASSERT_EQ(two.size(), 2u);
  EXPECT_EQ(two[0], "<a-scene></a-scene>\n");
  EXPECT_EQ(two[1], "<a-scene>\n</a-scene>\n");
  EXPECT_TRUE(split_code_blocks("```\n<a-scene>").empty());
}

TEST(ExternalLinks, ProtocolRelativeForms) {
  EXPECT_TRUE(detail::has_external_url("//cdn.example.net/a.png"));
  EXPECT_TRUE(detail::has_external_url("src: //cdn.example.net/a.png"));
  EXPECT_TRUE(detail::has_external_url("shader: flat; src:  //h/x.png"));
  EXPECT_TRUE(detail::has_external_url("src: url(//h/x.png)"));
  EXPECT_FALSE(detail::has_external_url("property: rotation; to: 0 360 0; dur: 8000"));
  EXPECT_FALSE(detail::has_external_url("Scene // caption"));
}
