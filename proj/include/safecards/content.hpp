#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "safecards/errors.hpp"

namespace safecards {

inline constexpr int kPackSchemaVersion = 1;
inline constexpr int kRanksPerCategory = 8;
inline constexpr int kMinCategories = 2;
inline constexpr int kMaxCategories = 8;
inline constexpr int kDefaultMaxDefenses = 3;

struct Category {
  std::string id;            // short key, e.g. "scams"
  std::string display_name;  // e.g. "Handling Scams"
  int color = 0;             // palette slot

  friend bool operator==(const Category&, const Category&) = default;
};

struct AdviceEntry {
  std::string category;
  int rank = 0;  // 1 (good) .. 8 (best)
  std::string text;
  std::optional<std::string> provenance;

  friend bool operator==(const AdviceEntry&, const AdviceEntry&) = default;
};

struct MisconceptionEntry {
  std::string category;
  std::string text;
  bool truth_value = false;  // always false in a valid pack

  friend bool operator==(const MisconceptionEntry&, const MisconceptionEntry&) = default;
};

struct ChangeInfo {
  int ordinal = 0;
  std::vector<std::string> lines;
  std::vector<std::string> linked_categories;

  friend bool operator==(const ChangeInfo&, const ChangeInfo&) = default;
};

struct CardRef {
  std::string category;
  int rank = 0;

  friend bool operator==(const CardRef&, const CardRef&) = default;
};

enum class ChallengeKind { kTrueFalse, kScenario };

struct ChallengeEntry {
  ChallengeKind kind = ChallengeKind::kTrueFalse;
  std::string statement;
  std::optional<bool> answer;             // TrueFalse only
  std::vector<CardRef> relevant_cards;    // Scenario only
  std::optional<int> max_defenses;        // Scenario only
  std::optional<std::string> provenance;

  int defense_limit() const { return max_defenses.value_or(kDefaultMaxDefenses); }

  friend bool operator==(const ChallengeEntry&, const ChallengeEntry&) = default;
};

struct Palette {
  std::string name;
  std::vector<std::string> colors;  // "#RRGGBB", indexed by Category::color

  friend bool operator==(const Palette&, const Palette&) = default;
};

struct ContentPack {
  int schema_version = kPackSchemaVersion;
  std::vector<Category> categories;
  std::vector<AdviceEntry> advice;
  std::vector<MisconceptionEntry> misconceptions;
  std::vector<ChangeInfo> change_cards;
  std::vector<ChallengeEntry> challenges;
  std::vector<Palette> palettes;

  // Index of category `id`, or -1.
  int category_index(const std::string& id) const;
  const AdviceEntry* find_advice(const std::string& category, int rank) const;

  friend bool operator==(const ContentPack&, const ContentPack&) = default;
};

using PackPtr = std::shared_ptr<const ContentPack>;

// Card-id prefix of a category: the initials of its capitalised display-name
// words ("Responding to Cyber Attacks" -> "RCA").
std::string category_prefix(const Category& category);

struct LoadOptions {
  // Unknown keys become warnings instead of SchemaError.
  bool lenient = false;
};

struct LoadResult {
  ContentPack pack;
  std::vector<std::string> warnings;
};

// Parses and validates a pack document. Throws Error with kParse, kSchema or
// kValidation (the latter carrying the violation list).
LoadResult load_pack_with_warnings(const std::string& document, const LoadOptions& options = {});
ContentPack load_pack(const std::string& document, const LoadOptions& options = {});
ContentPack load_pack_file(const std::string& path, const LoadOptions& options = {});

// Canonical JSON text of a pack; load_pack(serialize_pack(p)) == p.
std::string serialize_pack(const ContentPack& pack);

// Every invariant breach, ordered by entry path. Empty means valid.
std::vector<Violation> validate_pack(const ContentPack& pack);

// The shipped four-category pack.
const ContentPack& default_pack();
PackPtr default_pack_ptr();

// Five-category example pack; its shopping texts are placeholders.
const ContentPack& five_category_pack();

}  // namespace safecards
