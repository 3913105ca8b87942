#include "model/checkpoint.hpp"

#include <cstring>
#include <sstream>

#include "util/fmt.hpp"
#include "util/fs.hpp"
#include "util/hash.hpp"

namespace ewclab {

static std::string to_hex(const std::string& s) {
    static const char* digits = "0123456789abcdef";
    std::string out;
    out.reserve(s.size() * 2);
    for (unsigned char c : s) {
        out.push_back(digits[c >> 4]);
        out.push_back(digits[c & 0xf]);
    }
    return out;
}

static std::string from_hex(const std::string& s) {
    require(s.size() % 2 == 0, Status::io, "manifest: odd-length hex field");
    auto nib = [](char c) -> int {
        if (c >= '0' && c <= '9') return c - '0';
        if (c >= 'a' && c <= 'f') return c - 'a' + 10;
        throw Error(Status::io, strf("manifest: bad hex character '%c'", c));
    };
    std::string out;
    out.reserve(s.size() / 2);
    for (size_t i = 0; i < s.size(); i += 2)
        out.push_back(static_cast<char>(nib(s[i]) * 16 + nib(s[i + 1])));
    return out;
}

void save_checkpoint(const std::string& path, const Model& model, const Provenance& prov) {
    const ModelConfig& c = model.config();
    const ParameterVector& p = model.params();
    std::string head;
    head += "ewclab_checkpoint 1\n";
    head += strf("vocab_size %d\n", c.vocab_size);
    head += strf("d_model %d\n", c.d_model);
    head += strf("n_layers %d\n", c.n_layers);
    head += strf("n_heads %d\n", c.n_heads);
    head += strf("d_ff %d\n", c.d_ff);
    head += strf("max_seq_len %d\n", c.max_seq_len);
    head += strf("seed %llu\n", static_cast<unsigned long long>(c.seed));
    head += "vocab_chars_hex " + to_hex(model.vocab().chars()) + "\n";
    for (const SliceInfo& s : p.manifest())
        head += strf("slice %s %zu %zu\n", s.name.c_str(), s.offset, s.length);
    head += "param_hash " + hash_hex(p.value_hash()) + "\n";
    for (const auto& [k, v] : prov) {
        require(k.find_first_of(" \n") == std::string::npos && v.find('\n') == std::string::npos,
                Status::internal, "provenance entries must be single-line");
        head += "prov " + k + " " + v + "\n";
    }
    head += strf("blob_bytes %zu\n", p.count() * sizeof(float));
    head += "---\n";

    std::string blob(reinterpret_cast<const char*>(p.values()), p.count() * sizeof(float));
    write_file(path, head + blob);
}

LoadedCheckpoint load_checkpoint(const std::string& path) {
    std::string data = read_file(path);
    size_t pos = 0;
    auto next_line = [&](bool required) -> std::string {
        if (pos >= data.size()) {
            require(!required, Status::io, "checkpoint truncated (no blob separator): " + path);
            return "";
        }
        size_t nl = data.find('\n', pos);
        require(nl != std::string::npos, Status::io,
                "checkpoint truncated (unterminated manifest line): " + path);
        std::string line = data.substr(pos, nl - pos);
        pos = nl + 1;
        return line;
    };

    require(next_line(true) == "ewclab_checkpoint 1", Status::io,
            "not an ewclab checkpoint (bad format line): " + path);

    ModelConfig cfg;
    std::string vocab_chars;
    std::vector<SliceInfo> slices;
    std::string stored_hash;
    Provenance prov;
    size_t blob_bytes = SIZE_MAX;
    for (;;) {
        std::string line = next_line(true);
        if (line == "---") break;
        std::istringstream ss(line);
        std::string key;
        ss >> key;
        if (key == "vocab_size") ss >> cfg.vocab_size;
        else if (key == "d_model") ss >> cfg.d_model;
        else if (key == "n_layers") ss >> cfg.n_layers;
        else if (key == "n_heads") ss >> cfg.n_heads;
        else if (key == "d_ff") ss >> cfg.d_ff;
        else if (key == "max_seq_len") ss >> cfg.max_seq_len;
        else if (key == "seed") ss >> cfg.seed;
        else if (key == "vocab_chars_hex") {
            std::string hex;
            ss >> hex;
            vocab_chars = from_hex(hex);
        } else if (key == "slice") {
            SliceInfo s;
            ss >> s.name >> s.offset >> s.length;
            slices.push_back(s);
        } else if (key == "param_hash") {
            ss >> stored_hash;
        } else if (key == "prov") {
            std::string k;
            ss >> k;
            std::string v;
            std::getline(ss, v);
            if (!v.empty() && v[0] == ' ') v.erase(0, 1);
            prov.emplace_back(k, v);
        } else if (key == "blob_bytes") {
            ss >> blob_bytes;
        } else {
            throw Error(Status::io, "checkpoint manifest: unknown key '" + key + "' in " + path);
        }
        require(!ss.fail(), Status::io, "checkpoint manifest: malformed line '" + line + "'");
    }
    require(blob_bytes != SIZE_MAX, Status::io, "checkpoint manifest missing blob_bytes: " + path);
    require(data.size() - pos == blob_bytes, Status::io,
            strf("checkpoint truncated: blob has %zu of %zu bytes in %s", data.size() - pos,
                 blob_bytes, path.c_str()));

    LoadedCheckpoint out;
    Vocabulary vocab = Vocabulary::from_chars(vocab_chars);
    out.model = std::make_unique<Model>(cfg, vocab);
    ParameterVector& p = out.model->params();
    require(p.count() * sizeof(float) == blob_bytes, Status::io,
            strf("checkpoint blob holds %zu parameters but the config implies %zu",
                 blob_bytes / sizeof(float), p.count()));
    std::string expect_manifest;
    for (const SliceInfo& s : slices)
        expect_manifest += strf("%s %zu %zu\n", s.name.c_str(), s.offset, s.length);
    require(expect_manifest == p.manifest_text(), Status::io,
            "checkpoint slice table does not match its model config: " + path);
    std::memcpy(p.values(), data.data() + pos, blob_bytes);

    out.param_hash = p.value_hash();
    require(hash_hex(out.param_hash) == stored_hash, Status::hash_mismatch,
            strf("checkpoint hash mismatch: stored %s, computed %s in %s", stored_hash.c_str(),
                 hash_hex(out.param_hash).c_str(), path.c_str()));
    out.provenance = std::move(prov);
    return out;
}

} // namespace ewclab
