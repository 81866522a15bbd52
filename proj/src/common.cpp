#include "common.hpp"

namespace specmine {

const char* err_name(Err code) {
  switch (code) {
    case Err::Config: return "Config";
    case Err::Io: return "Io";
    case Err::Parse: return "Parse";
    case Err::BackendUnavailable: return "BackendUnavailable";
    case Err::ParseFailure: return "ParseFailure";
    case Err::SpanConflict: return "SpanConflict";
    case Err::TooLong: return "TooLong";
    case Err::SequenceTooLong: return "SequenceTooLong";
    case Err::EmptySplit: return "EmptySplit";
    case Err::ShapeMismatch: return "ShapeMismatch";
    case Err::AllIgnored: return "AllIgnored";
    case Err::EmptyBatch: return "EmptyBatch";
    case Err::Divergence: return "Divergence";
    case Err::State: return "State";
    case Err::Internal: return "Internal";
  }
  return "Unknown";
}

std::string to_hex(std::uint64_t value) {
  static const char digits[] = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i) {
    out[i] = digits[value & 0xf];
    value >>= 4;
  }
  return out;
}

}  // namespace specmine
