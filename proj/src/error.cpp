#include "anoma/error.hpp"

namespace anoma {

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::format: return "format";
    case ErrorKind::config: return "config";
    case ErrorKind::shape: return "shape";
    case ErrorKind::fit: return "fit";
    case ErrorKind::metric: return "metric";
    case ErrorKind::threshold: return "threshold";
    case ErrorKind::layout: return "layout";
    case ErrorKind::pairing: return "pairing";
    case ErrorKind::contract: return "contract";
    case ErrorKind::io: return "io";
    case ErrorKind::usage: return "usage";
  }
  return "unknown";
}

}  // namespace anoma
