#include "pcc/error.hpp"

namespace pcc {

std::string_view error_kind_name(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::DegenerateCloud: return "DegenerateCloud";
    case ErrorKind::BadCount: return "BadCount";
    case ErrorKind::EmptyCloud: return "EmptyCloud";
    case ErrorKind::ShapeMismatch: return "ShapeMismatch";
    case ErrorKind::DegenerateBatch: return "DegenerateBatch";
    case ErrorKind::NonScalarLoss: return "NonScalarLoss";
    case ErrorKind::NonFinite: return "NonFinite";
    case ErrorKind::LayerCountMismatch: return "LayerCountMismatch";
    case ErrorKind::CountMismatch: return "CountMismatch";
    case ErrorKind::BadSpec: return "BadSpec";
    case ErrorKind::EmptyScan: return "EmptyScan";
    case ErrorKind::InsufficientPoints: return "InsufficientPoints";
    case ErrorKind::BadMagic: return "BadMagic";
    case ErrorKind::TruncatedFile: return "TruncatedFile";
    case ErrorKind::ParseError: return "ParseError";
    case ErrorKind::IoError: return "IoError";
    case ErrorKind::DatasetMissing: return "DatasetMissing";
    case ErrorKind::DivergedLoss: return "DivergedLoss";
    case ErrorKind::ConfigMismatch: return "ConfigMismatch";
    case ErrorKind::TooFewPoints: return "TooFewPoints";
    case ErrorKind::BadArgument: return "BadArgument";
  }
  return "Unknown";
}

}  // namespace pcc
