#include "data/dataio.hpp"

#include <sstream>

#include "util/fmt.hpp"
#include "util/fs.hpp"
#include "util/hash.hpp"
#include "util/status.hpp"

namespace ewclab {

static std::string render_body(const std::vector<ArithmeticExample>& examples) {
    std::string body;
    for (const auto& ex : examples) {
        body += ex.text;
        body += '\n';
    }
    return body;
}

void write_dataset(const std::string& path, const std::string& label,
                   const std::vector<ArithmeticExample>& examples, const GenConfig& cfg) {
    const std::string body = render_body(examples);
    const uint64_t h = fnv1a64(body.data(), body.size());

    std::string man;
    man += "ewclab_dataset 1\n";
    man += "label " + label + "\n";
    man += "range_lo " + cfg.range.lo.render() + "\n";
    man += "range_hi " + cfg.range.hi.render() + "\n";
    man += "operators " + cfg.operators + "\n";
    man += strf("decimal_places %d\n", cfg.decimal_places);
    man += strf("count %lld\n", (long long)examples.size());
    man += strf("seed %llu\n", (unsigned long long)cfg.seed);
    man += "content_hash " + hash_hex(h) + "\n";

    write_file(path, body);
    write_file(path + ".manifest", man);
}

LoadedDataset load_dataset(const std::string& path) {
    const std::string body = read_file(path);
    const std::string man = read_file(path + ".manifest");

    LoadedDataset out;
    GenConfig& cfg = out.manifest.config;
    uint64_t stored_hash = 0;
    bool saw_hash = false, saw_magic = false;
    std::string pending_lo, pending_hi;

    std::istringstream ms(man);
    std::string line;
    while (std::getline(ms, line)) {
        if (line.empty()) continue;
        const auto sp = line.find(' ');
        require(sp != std::string::npos, Status::io, "dataset manifest: malformed line '" + line + "'");
        const std::string key = line.substr(0, sp);
        const std::string val = line.substr(sp + 1);
        if (key == "ewclab_dataset") {
            require(val == "1", Status::io, "dataset manifest: unsupported version " + val);
            saw_magic = true;
        } else if (key == "label") {
            out.manifest.label = val;
        } else if (key == "range_lo") {
            pending_lo = val;
        } else if (key == "range_hi") {
            pending_hi = val;
        } else if (key == "operators") {
            cfg.operators = val;
        } else if (key == "decimal_places") {
            cfg.decimal_places = std::stoi(val);
        } else if (key == "count") {
            out.manifest.count = std::stoll(val);
        } else if (key == "seed") {
            cfg.seed = std::stoull(val);
        } else if (key == "content_hash") {
            stored_hash = std::stoull(val, nullptr, 16);
            saw_hash = true;
        } else {
            throw Error(Status::io, "dataset manifest: unknown key '" + key + "'");
        }
    }
    require(saw_magic, Status::io, "dataset manifest: missing ewclab_dataset header");
    require(saw_hash, Status::io, "dataset manifest: missing content_hash");

    auto lo = parse_canonical(pending_lo, cfg.decimal_places);
    auto hi = parse_canonical(pending_hi, cfg.decimal_places);
    require(lo && hi, Status::io, "dataset manifest: malformed range bounds");
    cfg.range.lo = *lo;
    cfg.range.hi = *hi;

    const uint64_t actual = fnv1a64(body.data(), body.size());
    require(actual == stored_hash, Status::hash_mismatch,
            "dataset content hash mismatch for " + path);
    out.manifest.content_hash = actual;

    std::istringstream bs(body);
    while (std::getline(bs, line)) {
        if (line.empty()) continue;
        auto ex = parse_example(line, cfg.decimal_places);
        require(ex.has_value(), Status::io, "dataset " + path + ": malformed line '" + line + "'");
        out.examples.push_back(*ex);
    }
    require((long long)out.examples.size() == out.manifest.count, Status::io,
            strf("dataset %s: manifest count %lld but file has %lld lines", path.c_str(),
                 out.manifest.count, (long long)out.examples.size()));
    return out;
}

} // namespace ewclab
