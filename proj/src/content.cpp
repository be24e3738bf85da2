#include "safecards/content.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <tuple>

#include "json.hpp"

namespace safecards {

using nlohmann::json;

// Defined in the generated embedded_packs.cpp.
extern const char* const kEmbeddedDefaultPack;
extern const char* const kEmbeddedFiveCategoryPack;

int ContentPack::category_index(const std::string& id) const {
  for (std::size_t i = 0; i < categories.size(); ++i) {
    if (categories[i].id == id) return static_cast<int>(i);
  }
  return -1;
}

const AdviceEntry* ContentPack::find_advice(const std::string& category, int rank) const {
  for (const auto& a : advice) {
    if (a.category == category && a.rank == rank) return &a;
  }
  return nullptr;
}

std::string category_prefix(const Category& category) {
  std::string out;
  bool word_start = true;
  for (char c : category.display_name) {
    const auto uc = static_cast<unsigned char>(c);
    if (std::isspace(uc) || c == '-') {
      word_start = true;
      continue;
    }
    if (word_start && std::isupper(uc)) out.push_back(c);
    word_start = false;
  }
  if (out.empty()) {
    for (char c : category.id) {
      if (std::isalnum(static_cast<unsigned char>(c))) {
        out.push_back(static_cast<char>(std::toupper(static_cast<unsigned char>(c))));
      }
      if (out.size() == 3) break;
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Parsing

namespace {

class Reader {
 public:
  Reader(const LoadOptions& options, std::vector<std::string>& warnings)
      : options_(options), warnings_(warnings) {}

  void expect_keys(const json& obj, const std::string& path,
                   std::initializer_list<const char*> required,
                   std::initializer_list<const char*> optional = {}) {
    if (!obj.is_object()) schema(path, "expected an object");
    for (const char* k : required) {
      if (!obj.contains(k)) schema(path, std::string("missing field '") + k + "'");
    }
    for (const auto& [key, _] : obj.items()) {
      const bool known =
          std::any_of(required.begin(), required.end(), [&](const char* k) { return key == k; }) ||
          std::any_of(optional.begin(), optional.end(), [&](const char* k) { return key == k; });
      if (known) continue;
      const std::string msg = path + ": unknown field '" + key + "'";
      if (options_.lenient) {
        warnings_.push_back(msg);
      } else {
        throw Error(ErrorCode::kSchema, msg);
      }
    }
  }

  [[noreturn]] static void schema(const std::string& path, const std::string& what) {
    throw Error(ErrorCode::kSchema, (path.empty() ? std::string("<root>") : path) + ": " + what);
  }

  static std::string str(const json& obj, const char* key, const std::string& path) {
    const auto& v = obj.at(key);
    if (!v.is_string()) schema(path + "." + key, "expected a string");
    return v.get<std::string>();
  }

  static int integer(const json& obj, const char* key, const std::string& path) {
    const auto& v = obj.at(key);
    if (!v.is_number_integer()) schema(path + "." + key, "expected an integer");
    const auto n = v.get<int64_t>();
    if (n < INT32_MIN || n > INT32_MAX) schema(path + "." + key, "integer out of range");
    return static_cast<int>(n);
  }

  static bool boolean(const json& obj, const char* key, const std::string& path) {
    const auto& v = obj.at(key);
    if (!v.is_boolean()) schema(path + "." + key, "expected a boolean");
    return v.get<bool>();
  }

  static const json& array(const json& obj, const char* key, const std::string& path) {
    const auto& v = obj.at(key);
    if (!v.is_array()) schema(path.empty() ? key : path + "." + key, "expected an array");
    return v;
  }

  static std::vector<std::string> strings(const json& obj, const char* key, const std::string& path) {
    std::vector<std::string> out;
    const auto& arr = array(obj, key, path);
    for (std::size_t i = 0; i < arr.size(); ++i) {
      if (!arr[i].is_string()) {
        schema(path + "." + key + "[" + std::to_string(i) + "]", "expected a string");
      }
      out.push_back(arr[i].get<std::string>());
    }
    return out;
  }

  static std::optional<std::string> opt_str(const json& obj, const char* key, const std::string& path) {
    if (!obj.contains(key)) return std::nullopt;
    return str(obj, key, path);
  }

 private:
  const LoadOptions& options_;
  std::vector<std::string>& warnings_;
};

std::string idx(const char* section, std::size_t i) {
  return std::string(section) + "[" + std::to_string(i) + "]";
}

ContentPack parse_pack(const json& doc, Reader& r) {
  ContentPack pack;
  r.expect_keys(doc, "",
                {"schema_version", "categories", "advice", "misconceptions", "change_cards",
                 "challenges", "palettes"});
  pack.schema_version = Reader::integer(doc, "schema_version", "");
  if (pack.schema_version != kPackSchemaVersion) {
    throw Error(ErrorCode::kSchema,
                "schema_version " + std::to_string(pack.schema_version) + " is not supported");
  }

  const auto& cats = Reader::array(doc, "categories", "");
  for (std::size_t i = 0; i < cats.size(); ++i) {
    const auto p = idx("categories", i);
    r.expect_keys(cats[i], p, {"id", "display_name", "color"});
    pack.categories.push_back({Reader::str(cats[i], "id", p), Reader::str(cats[i], "display_name", p),
                               Reader::integer(cats[i], "color", p)});
  }

  const auto& adv = Reader::array(doc, "advice", "");
  for (std::size_t i = 0; i < adv.size(); ++i) {
    const auto p = idx("advice", i);
    r.expect_keys(adv[i], p, {"category", "rank", "text"}, {"provenance"});
    pack.advice.push_back({Reader::str(adv[i], "category", p), Reader::integer(adv[i], "rank", p),
                           Reader::str(adv[i], "text", p), Reader::opt_str(adv[i], "provenance", p)});
  }

  const auto& mis = Reader::array(doc, "misconceptions", "");
  for (std::size_t i = 0; i < mis.size(); ++i) {
    const auto p = idx("misconceptions", i);
    r.expect_keys(mis[i], p, {"category", "text", "truth_value"});
    pack.misconceptions.push_back({Reader::str(mis[i], "category", p), Reader::str(mis[i], "text", p),
                                   Reader::boolean(mis[i], "truth_value", p)});
  }

  const auto& chg = Reader::array(doc, "change_cards", "");
  for (std::size_t i = 0; i < chg.size(); ++i) {
    const auto p = idx("change_cards", i);
    r.expect_keys(chg[i], p, {"ordinal", "lines", "linked_categories"});
    pack.change_cards.push_back({Reader::integer(chg[i], "ordinal", p), Reader::strings(chg[i], "lines", p),
                                 Reader::strings(chg[i], "linked_categories", p)});
  }

  const auto& chl = Reader::array(doc, "challenges", "");
  for (std::size_t i = 0; i < chl.size(); ++i) {
    const auto p = idx("challenges", i);
    r.expect_keys(chl[i], p, {"kind", "statement"},
                  {"answer", "relevant_cards", "max_defenses", "provenance"});
    ChallengeEntry e;
    const auto kind = Reader::str(chl[i], "kind", p);
    if (kind == "TrueFalse") {
      e.kind = ChallengeKind::kTrueFalse;
    } else if (kind == "Scenario") {
      e.kind = ChallengeKind::kScenario;
    } else {
      Reader::schema(p + ".kind", "expected \"TrueFalse\" or \"Scenario\"");
    }
    e.statement = Reader::str(chl[i], "statement", p);
    if (chl[i].contains("answer")) e.answer = Reader::boolean(chl[i], "answer", p);
    if (chl[i].contains("relevant_cards")) {
      const auto& refs = Reader::array(chl[i], "relevant_cards", p);
      for (std::size_t j = 0; j < refs.size(); ++j) {
        const auto rp = p + ".relevant_cards[" + std::to_string(j) + "]";
        r.expect_keys(refs[j], rp, {"category", "rank"});
        e.relevant_cards.push_back({Reader::str(refs[j], "category", rp), Reader::integer(refs[j], "rank", rp)});
      }
    }
    if (chl[i].contains("max_defenses")) e.max_defenses = Reader::integer(chl[i], "max_defenses", p);
    e.provenance = Reader::opt_str(chl[i], "provenance", p);
    pack.challenges.push_back(std::move(e));
  }

  const auto& pal = Reader::array(doc, "palettes", "");
  for (std::size_t i = 0; i < pal.size(); ++i) {
    const auto p = idx("palettes", i);
    r.expect_keys(pal[i], p, {"name", "colors"});
    pack.palettes.push_back({Reader::str(pal[i], "name", p), Reader::strings(pal[i], "colors", p)});
  }
  return pack;
}

}  // namespace

LoadResult load_pack_with_warnings(const std::string& document, const LoadOptions& options) {
  json doc;
  try {
    doc = json::parse(document);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::kParse, std::string("malformed pack document: ") + e.what());
  }
  LoadResult result;
  Reader reader(options, result.warnings);
  result.pack = parse_pack(doc, reader);
  auto violations = validate_pack(result.pack);
  if (!violations.empty()) {
    std::string msg = "pack failed validation:";
    for (const auto& v : violations) msg += "\n  " + v.path + " " + v.code + ": " + v.message;
    throw Error(ErrorCode::kValidation, msg, {}, std::move(violations));
  }
  return result;
}

ContentPack load_pack(const std::string& document, const LoadOptions& options) {
  return load_pack_with_warnings(document, options).pack;
}

ContentPack load_pack_file(const std::string& path, const LoadOptions& options) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot read pack file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return load_pack(ss.str(), options);
}

// ---------------------------------------------------------------------------
// Serialization

std::string serialize_pack(const ContentPack& pack) {
  // Key order follows the documented schema, not alphabetical order.
  nlohmann::ordered_json doc;
  doc["schema_version"] = pack.schema_version;
  auto& cats = doc["categories"] = nlohmann::ordered_json::array();
  for (const auto& c : pack.categories) {
    cats.push_back({{"id", c.id}, {"display_name", c.display_name}, {"color", c.color}});
  }
  auto& adv = doc["advice"] = nlohmann::ordered_json::array();
  for (const auto& a : pack.advice) {
    nlohmann::ordered_json e = {{"category", a.category}, {"rank", a.rank}, {"text", a.text}};
    if (a.provenance) e["provenance"] = *a.provenance;
    adv.push_back(std::move(e));
  }
  auto& mis = doc["misconceptions"] = nlohmann::ordered_json::array();
  for (const auto& m : pack.misconceptions) {
    mis.push_back({{"category", m.category}, {"text", m.text}, {"truth_value", m.truth_value}});
  }
  auto& chg = doc["change_cards"] = nlohmann::ordered_json::array();
  for (const auto& c : pack.change_cards) {
    chg.push_back({{"ordinal", c.ordinal}, {"lines", c.lines}, {"linked_categories", c.linked_categories}});
  }
  auto& chl = doc["challenges"] = nlohmann::ordered_json::array();
  for (const auto& c : pack.challenges) {
    nlohmann::ordered_json e;
    e["kind"] = c.kind == ChallengeKind::kTrueFalse ? "TrueFalse" : "Scenario";
    e["statement"] = c.statement;
    if (c.answer) e["answer"] = *c.answer;
    if (!c.relevant_cards.empty()) {
      auto& refs = e["relevant_cards"] = nlohmann::ordered_json::array();
      for (const auto& r : c.relevant_cards) refs.push_back({{"category", r.category}, {"rank", r.rank}});
    }
    if (c.max_defenses) e["max_defenses"] = *c.max_defenses;
    if (c.provenance) e["provenance"] = *c.provenance;
    chl.push_back(std::move(e));
  }
  auto& pal = doc["palettes"] = nlohmann::ordered_json::array();
  for (const auto& p : pack.palettes) pal.push_back({{"name", p.name}, {"colors", p.colors}});
  return doc.dump(2);
}

// ---------------------------------------------------------------------------
// Validation

namespace {

enum Section { kSecRoot, kSecCategories, kSecAdvice, kSecMisconceptions, kSecChange, kSecChallenges, kSecPalettes };

struct Collector {
  struct Keyed {
    std::tuple<int, std::size_t, std::size_t> key;
    Violation v;
  };
  std::vector<Keyed> items;

  void add(Section sec, std::size_t i, std::size_t sub, std::string path, const char* code, std::string msg) {
    items.push_back({{sec, i, sub}, {code, std::move(path), std::move(msg)}});
  }

  std::vector<Violation> finish() {
    std::stable_sort(items.begin(), items.end(), [](const Keyed& a, const Keyed& b) { return a.key < b.key; });
    std::vector<Violation> out;
    out.reserve(items.size());
    for (auto& k : items) out.push_back(std::move(k.v));
    return out;
  }
};

bool is_hex_color(const std::string& s) {
  if (s.size() != 7 || s[0] != '#') return false;
  return std::all_of(s.begin() + 1, s.end(), [](char c) { return std::isxdigit(static_cast<unsigned char>(c)) != 0; });
}

bool blank(const std::string& s) {
  return std::all_of(s.begin(), s.end(), [](char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; });
}

std::string upper(std::string s) {
  for (auto& c : s) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  return s;
}

}  // namespace

std::vector<Violation> validate_pack(const ContentPack& pack) {
  Collector out;

  if (pack.schema_version != kPackSchemaVersion) {
    out.add(kSecRoot, 0, 0, "schema_version", "SCHEMA_VERSION",
            "unsupported schema_version " + std::to_string(pack.schema_version));
  }

  const auto n_cat = static_cast<int>(pack.categories.size());
  if (n_cat < kMinCategories || n_cat > kMaxCategories) {
    out.add(kSecRoot, 0, 1, "categories", "CATEGORY_COUNT",
            "category count " + std::to_string(n_cat) + " outside " + std::to_string(kMinCategories) + ".." +
                std::to_string(kMaxCategories));
  }

  std::set<std::string> cat_ids;
  std::map<std::string, std::size_t> first_id, first_prefix;
  std::map<int, std::size_t> first_slot;
  for (std::size_t i = 0; i < pack.categories.size(); ++i) {
    const auto& c = pack.categories[i];
    const auto p = idx("categories", i);
    if (blank(c.id)) out.add(kSecCategories, i, 0, p + ".id", "EMPTY_TEXT", "category id is empty");
    if (blank(c.display_name)) {
      out.add(kSecCategories, i, 1, p + ".display_name", "EMPTY_TEXT", "display_name is empty");
    }
    if (auto [it, fresh] = first_id.emplace(c.id, i); !fresh) {
      out.add(kSecCategories, i, 2, p, "DUPLICATE_CATEGORY",
              "category id '" + c.id + "' already used by " + idx("categories", it->second));
    }
    const auto prefix = category_prefix(c);
    if (prefix.empty()) {
      out.add(kSecCategories, i, 3, p, "CARD_PREFIX_CONFLICT", "cannot derive a card-id prefix");
    } else if (prefix == "CHG" || prefix == "TF" || prefix == "SC") {
      out.add(kSecCategories, i, 3, p, "CARD_PREFIX_CONFLICT", "card-id prefix '" + prefix + "' is reserved");
    } else if (auto [it, fresh] = first_prefix.emplace(prefix, i); !fresh) {
      out.add(kSecCategories, i, 3, p, "CARD_PREFIX_CONFLICT",
              "card-id prefix '" + prefix + "' already used by " + idx("categories", it->second));
    }
    if (c.color < 0) {
      out.add(kSecCategories, i, 4, p + ".color", "PALETTE_SLOT", "negative palette slot");
    } else if (auto [it, fresh] = first_slot.emplace(c.color, i); !fresh) {
      out.add(kSecCategories, i, 4, p + ".color", "DUPLICATE_COLOR_SLOT",
              "palette slot " + std::to_string(c.color) + " already used by " + idx("categories", it->second));
    }
    cat_ids.insert(c.id);
  }

  // Advice: per (category, rank) uniqueness and contiguous ranks.
  std::map<std::pair<std::string, int>, std::size_t> seen;
  std::map<std::string, std::set<int>> ranks_by_cat;
  for (std::size_t i = 0; i < pack.advice.size(); ++i) {
    const auto& a = pack.advice[i];
    const auto p = idx("advice", i);
    if (!cat_ids.count(a.category)) {
      out.add(kSecAdvice, i, 0, p + ".category", "DANGLING_CATEGORY_REF", "unknown category '" + a.category + "'");
      continue;
    }
    if (a.rank < 1 || a.rank > kRanksPerCategory) {
      out.add(kSecAdvice, i, 1, p + ".rank", "RANK_OUT_OF_RANGE",
              "rank " + std::to_string(a.rank) + " outside 1.." + std::to_string(kRanksPerCategory));
    } else if (auto [it, fresh] = seen.emplace(std::make_pair(a.category, a.rank), i); !fresh) {
      out.add(kSecAdvice, i, 1, p, "DUPLICATE_ADVICE",
              "(" + a.category + ", " + std::to_string(a.rank) + ") appears at both " +
                  idx("advice", it->second) + " and " + p);
    } else {
      ranks_by_cat[a.category].insert(a.rank);
    }
    if (blank(a.text)) out.add(kSecAdvice, i, 2, p + ".text", "EMPTY_TEXT", "advice text is empty");
  }
  for (std::size_t ci = 0; ci < pack.categories.size(); ++ci) {
    const auto& cat = pack.categories[ci];
    const auto& present = ranks_by_cat[cat.id];
    std::vector<int> missing;
    for (int r = 1; r <= kRanksPerCategory; ++r) {
      if (!present.count(r)) missing.push_back(r);
    }
    if (missing.empty()) continue;
    std::string list;
    for (int r : missing) list += (list.empty() ? "" : ", ") + std::to_string(r);
    out.add(kSecCategories, ci, 5, idx("categories", ci), "GAP_IN_RANKS",
            "category '" + cat.id + "' is missing rank(s) " + list);
  }

  for (std::size_t i = 0; i < pack.misconceptions.size(); ++i) {
    const auto& m = pack.misconceptions[i];
    const auto p = idx("misconceptions", i);
    if (!cat_ids.count(m.category)) {
      out.add(kSecMisconceptions, i, 0, p + ".category", "DANGLING_CATEGORY_REF",
              "unknown category '" + m.category + "'");
    }
    if (blank(m.text)) out.add(kSecMisconceptions, i, 1, p + ".text", "EMPTY_TEXT", "misconception text is empty");
    if (m.truth_value) {
      out.add(kSecMisconceptions, i, 2, p + ".truth_value", "MISCONCEPTION_TRUTH", "truth_value must be false");
    }
  }

  std::map<int, std::size_t> ordinals;
  for (std::size_t i = 0; i < pack.change_cards.size(); ++i) {
    const auto& c = pack.change_cards[i];
    const auto p = idx("change_cards", i);
    if (c.ordinal < 1) {
      out.add(kSecChange, i, 0, p + ".ordinal", "CHANGE_ORDINAL", "ordinal must be >= 1");
    } else if (auto [it, fresh] = ordinals.emplace(c.ordinal, i); !fresh) {
      out.add(kSecChange, i, 0, p + ".ordinal", "CHANGE_ORDINAL",
              "ordinal " + std::to_string(c.ordinal) + " already used by " + idx("change_cards", it->second));
    }
    if (c.lines.empty() || std::any_of(c.lines.begin(), c.lines.end(), blank)) {
      out.add(kSecChange, i, 1, p + ".lines", "EMPTY_TEXT", "change card needs non-empty info lines");
    }
    if (c.linked_categories.empty()) {
      out.add(kSecChange, i, 2, p + ".linked_categories", "CHANGE_NO_LINKS", "linked_categories is empty");
    }
    std::set<std::string> dup;
    for (std::size_t j = 0; j < c.linked_categories.size(); ++j) {
      const auto& id = c.linked_categories[j];
      const auto lp = p + ".linked_categories[" + std::to_string(j) + "]";
      if (!cat_ids.count(id)) {
        out.add(kSecChange, i, 3 + j, lp, "DANGLING_CATEGORY_REF", "unknown category '" + id + "'");
      } else if (!dup.insert(id).second) {
        out.add(kSecChange, i, 3 + j, lp, "DUPLICATE_LINK", "category '" + id + "' linked twice");
      }
    }
  }

  for (std::size_t i = 0; i < pack.challenges.size(); ++i) {
    const auto& c = pack.challenges[i];
    const auto p = idx("challenges", i);
    if (blank(c.statement)) out.add(kSecChallenges, i, 0, p + ".statement", "EMPTY_TEXT", "statement is empty");
    if (c.kind == ChallengeKind::kTrueFalse) {
      if (!c.answer) out.add(kSecChallenges, i, 1, p + ".answer", "CHALLENGE_SHAPE", "TrueFalse entry needs an answer");
      if (!c.relevant_cards.empty() || c.max_defenses) {
        out.add(kSecChallenges, i, 2, p, "CHALLENGE_SHAPE", "TrueFalse entry must not carry scenario fields");
      }
      continue;
    }
    if (c.answer) out.add(kSecChallenges, i, 1, p + ".answer", "CHALLENGE_SHAPE", "Scenario entry must not carry an answer");
    if (c.relevant_cards.empty()) {
      out.add(kSecChallenges, i, 2, p + ".relevant_cards", "CHALLENGE_SHAPE", "Scenario entry needs relevant_cards");
    }
    if (c.max_defenses && *c.max_defenses < 0) {
      out.add(kSecChallenges, i, 3, p + ".max_defenses", "BAD_MAX_DEFENSES", "max_defenses must be >= 0");
    }
    std::set<std::pair<std::string, int>> refs;
    for (std::size_t j = 0; j < c.relevant_cards.size(); ++j) {
      const auto& r = c.relevant_cards[j];
      const auto rp = p + ".relevant_cards[" + std::to_string(j) + "]";
      if (!pack.find_advice(r.category, r.rank)) {
        out.add(kSecChallenges, i, 4 + j, rp, "DANGLING_CARD_REF",
                "(" + r.category + ", " + std::to_string(r.rank) + ") is not an advice card in this pack");
      } else if (!refs.emplace(r.category, r.rank).second) {
        out.add(kSecChallenges, i, 4 + j, rp, "DUPLICATE_CARD_REF",
                "(" + r.category + ", " + std::to_string(r.rank) + ") listed twice");
      }
    }
  }

  if (pack.palettes.empty()) {
    out.add(kSecPalettes, 0, 0, "palettes", "PALETTE_MISSING", "pack has no palette");
  }
  std::set<std::string> names;
  for (std::size_t i = 0; i < pack.palettes.size(); ++i) {
    const auto& pal = pack.palettes[i];
    const auto p = idx("palettes", i);
    if (blank(pal.name)) out.add(kSecPalettes, i, 0, p + ".name", "EMPTY_TEXT", "palette name is empty");
    if (!names.insert(pal.name).second) {
      out.add(kSecPalettes, i, 0, p + ".name", "DUPLICATE_PALETTE", "palette '" + pal.name + "' defined twice");
    }
    for (std::size_t j = 0; j < pal.colors.size(); ++j) {
      if (!is_hex_color(pal.colors[j])) {
        out.add(kSecPalettes, i, 1 + j, p + ".colors[" + std::to_string(j) + "]", "PALETTE_COLOR_FORMAT",
                "'" + pal.colors[j] + "' is not #RRGGBB");
      }
    }
    std::map<std::string, std::string> used;
    for (const auto& cat : pack.categories) {
      if (cat.color < 0) continue;
      if (static_cast<std::size_t>(cat.color) >= pal.colors.size()) {
        out.add(kSecPalettes, i, 1000, p + ".colors", "PALETTE_SLOT",
                "no color for slot " + std::to_string(cat.color) + " (category '" + cat.id + "')");
        continue;
      }
      const auto color = upper(pal.colors[cat.color]);
      if (auto [it, fresh] = used.emplace(color, cat.id); !fresh) {
        out.add(kSecPalettes, i, 1001, p + ".colors", "PALETTE_DUPLICATE_COLOR",
                "categories '" + it->second + "' and '" + cat.id + "' share color " + color);
      }
    }
  }

  return out.finish();
}

// ---------------------------------------------------------------------------
// Shipped packs

const ContentPack& default_pack() { return *default_pack_ptr(); }

PackPtr default_pack_ptr() {
  static const PackPtr pack = std::make_shared<const ContentPack>(load_pack(kEmbeddedDefaultPack));
  return pack;
}

const ContentPack& five_category_pack() {
  static const ContentPack pack = load_pack(kEmbeddedFiveCategoryPack);
  return pack;
}

}  // namespace safecards
