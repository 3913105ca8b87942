#include "train/config.hpp"

#include <cstdlib>
#include <sstream>

#include "util/fmt.hpp"
#include "util/fs.hpp"
#include "util/status.hpp"

namespace ewclab {

const std::map<std::string, std::string>& Config::schema() {
    static const std::map<std::string, std::string> s = {
        {"model.d_model", "64"},
        {"model.n_layers", "2"},
        {"model.n_heads", "2"},
        {"model.d_ff", "128"},
        {"model.max_seq_len", "64"},
        {"model.seed", "1"},

        {"data.range_lo", "1.00"},
        {"data.range_hi", "8000.00"},
        {"data.operators", "+-"},
        {"data.decimal_places", "2"},
        {"data.count", "12000"},
        {"data.ood_count", "500"},
        {"data.val_fraction", "0.02"},
        {"data.subsample_fraction", "0.25"},
        {"data.seed", "7"},

        {"corpus.path", "assets/corpus.txt"},
        {"corpus.window_len", "64"},
        {"corpus.mask_fraction", "0.15"},
        {"corpus.heldout_fraction", "0.1"},

        {"pretrain.epochs", "4"},
        {"pretrain.batch_size", "32"},

        {"train.epochs", "30"},
        {"train.batch_size", "32"},
        {"train.learning_rate", "1e-3"},
        {"train.clip_norm", "1.0"},
        {"train.lambda1.mode", "ema"},
        {"train.lambda1.value", "1e-4"},
        {"train.lambda1.w_prev", "0.99"},
        {"train.lambda1.w_curr", "0.01"},
        {"train.lambda2", "0"},
        {"train.reg_mode", "euclidean"},
        {"train.reg_cap", "0"},
        {"train.loss_stack", "full"},
        {"train.seed", "1"},

        {"fisher.sample_cap", "2048"},

        {"sweep.grid", "1e-3,1e-5,1e-7,1e-9"},
        {"sweep.converge_ce", "0.5"},

        {"eval.qualitative_count", "12"},
    };
    return s;
}

Config Config::defaults() {
    Config c;
    c.kv_ = schema();
    return c;
}

static std::string trim(const std::string& s) {
    size_t b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    size_t e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

Config Config::from_file(const std::string& path) {
    Config c = defaults();
    std::string text = read_file(path);
    std::istringstream in(text);
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        size_t hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        size_t eq = line.find('=');
        require(eq != std::string::npos, Status::bad_config,
                strf("config: line %d of %s has no '='", line_no, path.c_str()));
        c.set(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    }
    return c;
}

void Config::set(const std::string& key, const std::string& value) {
    auto it = kv_.find(key);
    require(it != kv_.end(), Status::bad_config,
            strf("config: unknown key \"%s\"", key.c_str()));
    it->second = value;
}

void Config::apply_override(const std::string& assignment) {
    size_t eq = assignment.find('=');
    require(eq != std::string::npos, Status::bad_config,
            strf("config: override \"%s\" is not key=value", assignment.c_str()));
    set(trim(assignment.substr(0, eq)), trim(assignment.substr(eq + 1)));
}

const std::string& Config::get(const std::string& key) const {
    auto it = kv_.find(key);
    require(it != kv_.end(), Status::bad_config,
            strf("config: unknown key \"%s\"", key.c_str()));
    return it->second;
}

long long Config::get_int(const std::string& key) const {
    const std::string& v = get(key);
    char* end = nullptr;
    long long out = std::strtoll(v.c_str(), &end, 10);
    require(end && *end == '\0' && !v.empty(), Status::bad_config,
            strf("config: %s = \"%s\" is not an integer", key.c_str(), v.c_str()));
    return out;
}

double Config::get_double(const std::string& key) const {
    const std::string& v = get(key);
    char* end = nullptr;
    double out = std::strtod(v.c_str(), &end);
    require(end && *end == '\0' && !v.empty(), Status::bad_config,
            strf("config: %s = \"%s\" is not a number", key.c_str(), v.c_str()));
    return out;
}

uint64_t Config::get_seed(const std::string& key) const {
    const std::string& v = get(key);
    char* end = nullptr;
    unsigned long long out = std::strtoull(v.c_str(), &end, 10);
    require(end && *end == '\0' && !v.empty(), Status::bad_config,
            strf("config: %s = \"%s\" is not a seed", key.c_str(), v.c_str()));
    return static_cast<uint64_t>(out);
}

bool Config::get_bool(const std::string& key) const {
    const std::string& v = get(key);
    if (v == "true" || v == "1") return true;
    if (v == "false" || v == "0") return false;
    throw Error(Status::bad_config,
                strf("config: %s = \"%s\" is not a bool", key.c_str(), v.c_str()));
}

std::vector<double> Config::get_grid(const std::string& key) const {
    const std::string& v = get(key);
    std::vector<double> out;
    std::istringstream in(v);
    std::string part;
    while (std::getline(in, part, ',')) {
        part = trim(part);
        if (part.empty()) continue;
        char* end = nullptr;
        double x = std::strtod(part.c_str(), &end);
        require(end && *end == '\0', Status::bad_config,
                strf("config: %s entry \"%s\" is not a number", key.c_str(), part.c_str()));
        out.push_back(x);
    }
    require(!out.empty(), Status::bad_config,
            strf("config: %s is empty", key.c_str()));
    return out;
}

std::string Config::render() const {
    std::string out;
    for (const auto& [k, v] : kv_) out += k + " = " + v + "\n";
    return out;
}

} // namespace ewclab
