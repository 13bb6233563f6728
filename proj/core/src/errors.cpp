#include "geoaug/errors.hpp"

namespace geoaug {

const char* to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::data: return "data error";
    case ErrorKind::config: return "config error";
    case ErrorKind::numeric: return "numeric error";
    case ErrorKind::provider: return "provider error";
  }
  return "error";
}

}  // namespace geoaug
