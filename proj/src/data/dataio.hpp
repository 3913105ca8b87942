#pragma once

#include <string>
#include <vector>

#include "data/gen.hpp"

namespace ewclab {

// Dataset file: one canonical example per line, UTF-8, plus a ".manifest"
// sidecar (text key-value) with the generation config, label, count and the
// dataset file's content hash.
struct DatasetManifest {
    std::string label;
    GenConfig config;
    long long count = 0;
    uint64_t content_hash = 0;
};

void write_dataset(const std::string& path, const std::string& label,
                   const std::vector<ArithmeticExample>& examples, const GenConfig& cfg);

struct LoadedDataset {
    DatasetManifest manifest;
    std::vector<ArithmeticExample> examples;
};

// Verifies the content hash and that every line parses canonically.
LoadedDataset load_dataset(const std::string& path);

} // namespace ewclab
