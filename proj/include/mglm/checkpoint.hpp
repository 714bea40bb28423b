#pragma once

#include <string>

#include "mglm/model.hpp"

namespace mglm {

// Versioned binary container: model config and seed, then every parameter as
// (name, shape, raw little-endian float64 data) in layout order. The format
// round-trips bit-exactly: save -> load -> save produces identical bytes.
void save_checkpoint(const std::string& path, const ModelParams& mp);
ModelParams load_checkpoint(const std::string& path);

}  // namespace mglm
