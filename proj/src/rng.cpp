#include "safecards/rng.hpp"

#include <cstdio>
#include <stdexcept>

#include "safecards/errors.hpp"

namespace safecards {

namespace {
constexpr uint64_t kMultiplier = 6364136223846793005ull;
}

Pcg32::Pcg32(uint64_t seed, uint64_t stream_tag) {
  const uint64_t init_state = splitmix64(seed);
  const uint64_t init_seq = splitmix64(seed ^ stream_tag ^ 0xDA3E39CB94B95BDBull);
  state_ = 0;
  inc_ = (init_seq << 1u) | 1u;
  next_u32();
  state_ += init_state;
  next_u32();
}

uint32_t Pcg32::next_u32() {
  const uint64_t old = state_;
  state_ = old * kMultiplier + inc_;
  const auto xorshifted = static_cast<uint32_t>(((old >> 18u) ^ old) >> 27u);
  const auto rot = static_cast<uint32_t>(old >> 59u);
  return (xorshifted >> rot) | (xorshifted << ((-rot) & 31u));
}

uint32_t Pcg32::bounded(uint32_t bound) {
  const uint32_t threshold = (-bound) % bound;
  for (;;) {
    const uint32_t r = next_u32();
    if (r >= threshold) return r % bound;
  }
}

double Pcg32::next_unit() {
  const uint64_t hi = next_u32() >> 5;  // 27 bits
  const uint64_t lo = next_u32() >> 6;  // 26 bits
  return static_cast<double>((hi << 26) | lo) * (1.0 / 9007199254740992.0);
}

std::string Pcg32::to_hex() const {
  char buf[33];
  std::snprintf(buf, sizeof buf, "%016llx%016llx",
                static_cast<unsigned long long>(state_),
                static_cast<unsigned long long>(inc_));
  return std::string(buf, 32);
}

Pcg32 Pcg32::from_hex(const std::string& hex) {
  if (hex.size() != 32) {
    throw Error(ErrorCode::kParse, "rng_state must be 32 hex digits");
  }
  auto parse = [&](std::size_t off) {
    uint64_t v = 0;
    for (std::size_t i = off; i < off + 16; ++i) {
      const char c = hex[i];
      uint64_t d;
      if (c >= '0' && c <= '9') d = c - '0';
      else if (c >= 'a' && c <= 'f') d = c - 'a' + 10;
      else if (c >= 'A' && c <= 'F') d = c - 'A' + 10;
      else throw Error(ErrorCode::kParse, "rng_state has a non-hex digit");
      v = (v << 4) | d;
    }
    return v;
  };
  const uint64_t inc = parse(16);
  if ((inc & 1u) == 0) throw Error(ErrorCode::kParse, "rng_state increment must be odd");
  return from_raw(parse(0), inc);
}

std::string_view error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::kParse: return "ParseError";
    case ErrorCode::kSchema: return "SchemaError";
    case ErrorCode::kValidation: return "ValidationError";
    case ErrorCode::kVersion: return "VersionError";
    case ErrorCode::kConfig: return "ConfigError";
    case ErrorCode::kPackRulesetMismatch: return "PackRulesetMismatch";
    case ErrorCode::kNotYourTurn: return "NotYourTurn";
    case ErrorCode::kIllegalMove: return "IllegalMove";
    case ErrorCode::kWrongPhase: return "WrongPhase";
    case ErrorCode::kEmptyMoveSet: return "EmptyMoveSet";
    case ErrorCode::kReplayMismatch: return "ReplayMismatch";
    case ErrorCode::kNotFound: return "NotFound";
    case ErrorCode::kUnauthorized: return "Unauthorized";
    case ErrorCode::kIo: return "IoError";
  }
  return "Error";
}

}  // namespace safecards
