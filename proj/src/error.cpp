#include "typegate/error.hpp"

namespace typegate {

const char* error_code_name(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::InvalidArgument: return "invalid-argument";
    case ErrorCode::Io: return "io";
    case ErrorCode::Lex: return "lex";
    case ErrorCode::Parse: return "parse";
    case ErrorCode::UnsupportedSyntax: return "unsupported-syntax";
    case ErrorCode::Schema: return "schema";
    case ErrorCode::NoSite: return "no-site";
    case ErrorCode::NoReplacementPool: return "no-replacement-pool";
    case ErrorCode::UnlabeledSample: return "unlabeled-sample";
    case ErrorCode::MissingOutcome: return "missing-outcome";
    case ErrorCode::Protocol: return "protocol";
    case ErrorCode::DetectorCrashed: return "detector-crashed";
    case ErrorCode::Timeout: return "timeout";
    case ErrorCode::NoCrossover: return "no-crossover";
    case ErrorCode::Internal: return "internal";
  }
  return "unknown";
}

}  // namespace typegate
