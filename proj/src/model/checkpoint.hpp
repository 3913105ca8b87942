#pragma once

#include <memory>
#include <string>
#include <vector>

#include "model/encoder.hpp"

namespace ewclab {

// Checkpoint file layout: a text manifest (key-value lines: format version,
// model config, vocabulary, slice table, parameter content hash, provenance),
// a "---" separator line, then the raw little-endian f32 parameter blob.
// The hash is recomputed on load and a mismatch is an error, never a silent
// reinterpretation.

using Provenance = std::vector<std::pair<std::string, std::string>>;

void save_checkpoint(const std::string& path, const Model& model, const Provenance& prov);

struct LoadedCheckpoint {
    std::unique_ptr<Model> model;
    Provenance provenance;
    uint64_t param_hash = 0;
};

LoadedCheckpoint load_checkpoint(const std::string& path);

} // namespace ewclab
