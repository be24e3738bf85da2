#include <fstream>
#include <sstream>

#include "doctest.h"
#include "json.hpp"
#include "safecards/content.hpp"

using namespace safecards;
using nlohmann::json;

namespace {

json default_doc() { return json::parse(serialize_pack(default_pack())); }

std::vector<Violation> violations_of(const json& doc) {
  try {
    load_pack(doc.dump());
  } catch (const Error& e) {
    if (e.code() == ErrorCode::kValidation) return e.violations();
    throw;
  }
  return {};
}

bool has_code(const std::vector<Violation>& vs, const std::string& code) {
  for (const auto& v : vs) {
    if (v.code == code) return true;
  }
  return false;
}

std::string read_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("default pack counts") {
  const auto& p = default_pack();
  CHECK(p.categories.size() == 4);
  CHECK(p.advice.size() == 32);
  CHECK(p.misconceptions.size() == 8);
  CHECK(p.change_cards.size() == 8);
  CHECK(p.challenges.size() == 16);
  CHECK(p.palettes.size() >= 2);
  CHECK(validate_pack(p).empty());
  for (const auto& c : p.categories) {
    int minus = 0;
    for (const auto& m : p.misconceptions) minus += m.category == c.id;
    CHECK(minus == 2);
  }
}

TEST_CASE("default pack texts spot checks") {
  const auto& p = default_pack();
  CHECK(p.find_advice("scams", 7)->text == "Check links before you click (check.cyberskills.ie)");
  CHECK(p.find_advice("cyber-attacks", 7)->text == "Go to your local Garda station and request a PULSE ID");
  CHECK(p.change_cards[1].lines[0] == "2FA makes it more difficult for hackers to access your account.");
  CHECK(p.find_advice("privacy", 9) == nullptr);
}

TEST_CASE("change card 6 on passphrases links password management") {
  const auto& links = default_pack().change_cards[5].linked_categories;
  CHECK(std::find(links.begin(), links.end(), "passwords") != links.end());
}

TEST_CASE("every scenario reference resolves to an advice entry") {
  for (const auto& c : default_pack().challenges) {
    for (const auto& r : c.relevant_cards) CHECK(default_pack().find_advice(r.category, r.rank) != nullptr);
  }
}

TEST_CASE("round trip through serialize_pack") {
  CHECK(load_pack(serialize_pack(default_pack())) == default_pack());
  CHECK(load_pack(serialize_pack(five_category_pack())) == five_category_pack());
}

TEST_CASE("shipped pack files load and equal the embedded packs") {
  CHECK(load_pack_file(SAFECARDS_SOURCE_DIR "/data/packs/default.json") == default_pack());
  CHECK(load_pack_file(SAFECARDS_SOURCE_DIR "/data/packs/five_category_example.json") == five_category_pack());
}

TEST_CASE("five-category pack is accepted and marks its placeholders") {
  const auto& p = five_category_pack();
  CHECK(p.categories.size() == 5);
  CHECK(p.advice.size() == 40);
  CHECK(validate_pack(p).empty());
  for (const auto& a : p.advice) {
    if (a.category == "shopping") CHECK(a.provenance == std::optional<std::string>("placeholder"));
  }
}

TEST_CASE("duplicate (category, rank) names both entries") {
  auto doc = default_doc();
  // Turn (scams, 4) into a second (scams, 3).
  for (auto& a : doc["advice"]) {
    if (a["category"] == "scams" && a["rank"] == 4) a["rank"] = 3;
  }
  const auto vs = violations_of(doc);
  REQUIRE(has_code(vs, "DUPLICATE_ADVICE"));
  for (const auto& v : vs) {
    if (v.code != "DUPLICATE_ADVICE") continue;
    CHECK(v.message.find("advice[2]") != std::string::npos);
    CHECK(v.message.find("advice[3]") != std::string::npos);
  }
}

TEST_CASE("missing rank 5 in passwords gives one GAP_IN_RANKS") {
  auto doc = default_doc();
  auto& adv = doc["advice"];
  for (std::size_t i = 0; i < adv.size(); ++i) {
    if (adv[i]["category"] == "passwords" && adv[i]["rank"] == 5) {
      adv.erase(i);
      break;
    }
  }
  const auto vs = violations_of(doc);
  REQUIRE(vs.size() == 1);
  CHECK(vs[0].code == "GAP_IN_RANKS");
}

TEST_CASE("scenario referencing (privacy, 9) gives one DANGLING_CARD_REF") {
  auto doc = default_doc();
  for (auto& c : doc["challenges"]) {
    if (c["kind"] == "Scenario") {
      c["relevant_cards"].push_back({{"category", "privacy"}, {"rank", 9}});
      break;
    }
  }
  const auto vs = violations_of(doc);
  REQUIRE(vs.size() == 1);
  CHECK(vs[0].code == "DANGLING_CARD_REF");
}

TEST_CASE("load errors are classified") {
  CHECK_THROWS_AS(load_pack("{not json"), Error);
  try {
    load_pack("{not json");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kParse);
  }

  auto doc = default_doc();
  doc["surprise"] = 1;
  try {
    load_pack(doc.dump());
    FAIL("expected SchemaError");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kSchema);
  }
  const auto lenient = load_pack_with_warnings(doc.dump(), {true});
  CHECK(lenient.warnings.size() == 1);
  CHECK(lenient.pack == default_pack());

  auto missing = default_doc();
  missing.erase("palettes");
  try {
    load_pack(missing.dump());
    FAIL("expected SchemaError");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kSchema);
  }
}

TEST_CASE("structural violations") {
  SUBCASE("truthy misconception") {
    auto doc = default_doc();
    doc["misconceptions"][0]["truth_value"] = true;
    CHECK(has_code(violations_of(doc), "MISCONCEPTION_TRUTH"));
  }
  SUBCASE("dangling change link") {
    auto doc = default_doc();
    doc["change_cards"][0]["linked_categories"] = {"nowhere"};
    CHECK(has_code(violations_of(doc), "DANGLING_CATEGORY_REF"));
  }
  SUBCASE("empty advice text") {
    auto doc = default_doc();
    doc["advice"][0]["text"] = "";
    CHECK(has_code(violations_of(doc), "EMPTY_TEXT"));
  }
  SUBCASE("palette colors must be distinct") {
    auto doc = default_doc();
    doc["palettes"][0]["colors"][1] = doc["palettes"][0]["colors"][0];
    CHECK(has_code(violations_of(doc), "PALETTE_DUPLICATE_COLOR"));
  }
  SUBCASE("true/false entry with relevant cards") {
    auto doc = default_doc();
    doc["challenges"][0]["relevant_cards"] = json::array({{{"category", "scams"}, {"rank", 1}}});
    CHECK(has_code(violations_of(doc), "CHALLENGE_SHAPE"));
  }
  SUBCASE("duplicate category id") {
    auto doc = default_doc();
    doc["categories"][1]["id"] = "scams";
    CHECK(has_code(violations_of(doc), "DUPLICATE_CATEGORY"));
  }
}

TEST_CASE("violations are ordered by entry path") {
  auto doc = default_doc();
  doc["advice"][5]["text"] = "";
  doc["advice"][1]["text"] = "";
  const auto vs = violations_of(doc);
  REQUIRE(vs.size() == 2);
  CHECK(vs[0].path < vs[1].path);
}

TEST_CASE("card prefixes") {
  CHECK(category_prefix(default_pack().categories[0]) == "HS");
  CHECK(category_prefix(default_pack().categories[1]) == "PM");
  CHECK(category_prefix(default_pack().categories[2]) == "RCA");
  CHECK(category_prefix(default_pack().categories[3]) == "SP");
}

// Every advice, minus and change text equals the transcription of the
// published card tables kept in tests/fixtures.
TEST_CASE("content fidelity against the golden fixture") {
  std::istringstream in(read_file(SAFECARDS_SOURCE_DIR "/tests/fixtures/card_texts.tsv"));
  const auto& p = default_pack();
  std::string line;
  int advice = 0, minus = 0, change = 0;
  while (std::getline(in, line)) {
    std::vector<std::string> f;
    std::stringstream ls(line);
    std::string part;
    for (int i = 0; i < 3 && std::getline(ls, part, '\t'); ++i) f.push_back(part);
    std::getline(ls, part);
    f.push_back(part);
    REQUIRE(f.size() == 4);
    if (f[0] == "advice") {
      const auto* a = p.find_advice(f[1], std::stoi(f[2]));
      REQUIRE(a != nullptr);
      CHECK(a->text == f[3]);
      ++advice;
    } else if (f[0] == "minus") {
      bool found = false;
      for (const auto& m : p.misconceptions) found = found || (m.category == f[1] && m.text == f[3]);
      CHECK_MESSAGE(found, f[3]);
      ++minus;
    } else if (f[0] == "change") {
      const auto& cc = p.change_cards.at(std::stoul(f[1]) - 1);
      CHECK(cc.ordinal == std::stoi(f[1]));
      CHECK(cc.lines.at(std::stoul(f[2]) - 1) == f[3]);
      ++change;
    }
  }
  CHECK(advice == 32);
  CHECK(minus == 8);
  CHECK(change == 16);
}
