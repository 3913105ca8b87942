#include "fisher/fisher.hpp"

#include <algorithm>
#include <cstring>
#include <sstream>

#include "loss/losses.hpp"
#include "util/fmt.hpp"
#include "util/fs.hpp"
#include "util/hash.hpp"

namespace ewclab {

static constexpr int kPartitions = 8;

FisherScores estimate_fisher_core(
    size_t param_count, long long n_samples,
    const std::function<void(long long sample, float* grad)>& grad_fn) {
    require(param_count > 0, Status::internal, "fisher: no parameters");
    require(n_samples > 0, Status::bad_config, "fisher: no samples");

    FisherScores f;
    f.values.assign(param_count, 0.0);
    f.n_samples = n_samples;

    std::vector<float> grad(param_count);
    std::vector<double> partial(param_count);
    for (int p = 0; p < kPartitions; ++p) {
        long long begin = n_samples * p / kPartitions;
        long long end = n_samples * (p + 1) / kPartitions;
        if (begin == end) continue;
        std::fill(partial.begin(), partial.end(), 0.0);
        for (long long s = begin; s < end; ++s) {
            std::fill(grad.begin(), grad.end(), 0.0f);
            grad_fn(s, grad.data());
            for (size_t i = 0; i < param_count; ++i) {
                double g = static_cast<double>(grad[i]);
                partial[i] += g * g;
            }
        }
        for (size_t i = 0; i < param_count; ++i) f.values[i] += partial[i];
    }
    double inv = 1.0 / static_cast<double>(n_samples);
    for (auto& v : f.values) v *= inv;
    return f;
}

FisherScores estimate_fisher(Model& model, const std::vector<MaskedInstance>& dataset,
                             long long sample_cap, const std::string& task_id) {
    require(!dataset.empty(), Status::bad_config, "fisher: empty dataset");
    require(sample_cap > 0, Status::bad_config, "fisher: sample cap must be positive");
    long long n = std::min<long long>(static_cast<long long>(dataset.size()), sample_cap);
    for (long long s = 0; s < n; ++s)
        require(!dataset[static_cast<size_t>(s)].positions.empty(), Status::bad_config,
                strf("fisher: sample %lld has no masked positions", s));

    FisherScores f = estimate_fisher_core(
        model.params().count(), n, [&](long long s, float* grad) {
            const MaskedInstance& mi = dataset[static_cast<size_t>(s)];
            Tape tape;
            BoundParams b = model.bind(grad);
            Tensor logits = model.forward(&tape, b, mi.input_ids);
            FusedLoss ce = masked_ce(&tape, logits, mi.positions, mi.target_ids);
            tape.backward_seeded({{ce.node, 1.0 / static_cast<double>(mi.positions.size())}});
        });
    f.manifest = model.params().manifest_text();
    f.task_id = task_id;
    f.model_hash = model.params().value_hash();
    return f;
}

std::vector<size_t> top_n(const std::vector<double>& scores, size_t n) {
    require(n >= 1 && n <= scores.size(), Status::bad_config,
            strf("top_n: n=%zu outside [1, %zu]", n, scores.size()));
    std::vector<size_t> idx(scores.size());
    for (size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    std::partial_sort(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(n), idx.end(),
                      [&](size_t a, size_t b) {
                          if (scores[a] != scores[b]) return scores[a] > scores[b];
                          return a < b;
                      });
    idx.resize(n);
    std::sort(idx.begin(), idx.end());
    return idx;
}

static OverlapReport::Layer::Stats stats_of(std::vector<double> v) {
    OverlapReport::Layer::Stats s;
    s.max = v[0];
    double sum = 0.0;
    for (double x : v) {
        sum += x;
        s.max = std::max(s.max, x);
    }
    s.mean = sum / static_cast<double>(v.size());
    std::sort(v.begin(), v.end());
    size_t m = v.size() / 2;
    s.median = v.size() % 2 == 1 ? v[m] : 0.5 * (v[m - 1] + v[m]);
    return s;
}

OverlapReport cross_task_overlap(const FisherScores& base,
                                 const std::vector<FisherScores>& others, size_t n,
                                 const std::vector<LayerGroup>& layers) {
    require(n >= 1, Status::bad_config, "overlap: n must be positive");
    require(!layers.empty(), Status::internal, "overlap: no layers");
    size_t covered = 0;
    for (const auto& l : layers) covered += l.length;
    require(covered == base.values.size(), Status::internal,
            "overlap: layer groups do not cover the parameter vector");
    for (const auto& o : others) {
        require(o.manifest == base.manifest, Status::bad_config,
                strf("overlap: task '%s' has a different slice manifest than '%s'",
                     o.task_id.c_str(), base.task_id.c_str()));
        require(o.values.size() == base.values.size(), Status::bad_config,
                "overlap: score length mismatch");
    }

    OverlapReport report;
    report.base_task = base.task_id;
    report.n = n;
    for (const auto& o : others) report.task_ids.push_back(o.task_id);

    for (const auto& lg : layers) {
        OverlapReport::Layer layer;
        layer.name = lg.name;
        size_t n_layer = std::min(n, lg.length);

        std::vector<double> local(base.values.begin() + static_cast<std::ptrdiff_t>(lg.offset),
                                  base.values.begin() +
                                      static_cast<std::ptrdiff_t>(lg.offset + lg.length));
        std::vector<size_t> sel = top_n(local, n_layer);
        for (auto& i : sel) i += lg.offset;
        // Rank order: descending base score, ties to the lower index.
        std::sort(sel.begin(), sel.end(), [&](size_t a, size_t b) {
            if (base.values[a] != base.values[b]) return base.values[a] > base.values[b];
            return a < b;
        });

        layer.indices = sel;
        for (size_t i : sel) layer.base_scores.push_back(base.values[i]);
        for (const auto& o : others) {
            std::vector<double> row;
            for (size_t i : sel) row.push_back(o.values[i]);
            layer.stats.push_back(stats_of(row));
            layer.scores.push_back(std::move(row));
        }
        report.layers.push_back(std::move(layer));
    }
    return report;
}

std::string overlap_csv(const OverlapReport& report) {
    std::string out = "layer,rank,param_index,base_score";
    for (size_t t = 0; t < report.task_ids.size(); ++t)
        out += strf(",score_task_%zu", t + 1);
    out += "\n";
    for (const auto& layer : report.layers) {
        for (size_t r = 0; r < layer.indices.size(); ++r) {
            out += layer.name + strf(",%zu,%zu,", r + 1, layer.indices[r]);
            out += fmt_double(layer.base_scores[r]);
            for (const auto& row : layer.scores) out += "," + fmt_double(row[r]);
            out += "\n";
        }
    }
    return out;
}

void save_fisher(const std::string& path, const FisherScores& f) {
    std::string blob(f.values.size() * sizeof(double), '\0');
    std::memcpy(blob.data(), f.values.data(), blob.size());

    std::string head;
    head += "ewclab_fisher 1\n";
    head += "task " + f.task_id + "\n";
    head += strf("n_samples %lld\n", f.n_samples);
    head += "model_hash " + hash_hex(f.model_hash) + "\n";
    head += strf("param_count %zu\n", f.values.size());
    {
        std::istringstream ms(f.manifest);
        std::string line;
        while (std::getline(ms, line))
            if (!line.empty()) head += "slice " + line + "\n";
    }
    head += "values_hash " + hash_hex(fnv1a64(blob.data(), blob.size())) + "\n";
    head += strf("blob_bytes %zu\n", blob.size());
    head += "---\n";
    write_file(path, head + blob);
}

FisherScores load_fisher(const std::string& path) {
    std::string raw = read_file(path);
    size_t cut = raw.find("\n---\n");
    require(cut != std::string::npos, Status::io, "fisher file: missing blob separator: " + path);
    std::string head = raw.substr(0, cut + 1);
    std::string blob = raw.substr(cut + 5);

    FisherScores f;
    size_t param_count = 0, blob_bytes = 0;
    uint64_t values_hash = 0;
    bool saw_magic = false, saw_hash = false;

    std::istringstream hs(head);
    std::string line;
    while (std::getline(hs, line)) {
        if (line.empty()) continue;
        size_t sp = line.find(' ');
        require(sp != std::string::npos, Status::io,
                "fisher file: malformed line '" + line + "'");
        std::string key = line.substr(0, sp);
        std::string val = line.substr(sp + 1);
        if (key == "ewclab_fisher") {
            require(val == "1", Status::io, "fisher file: unsupported version " + val);
            saw_magic = true;
        } else if (key == "task") {
            f.task_id = val;
        } else if (key == "n_samples") {
            f.n_samples = std::stoll(val);
        } else if (key == "model_hash") {
            f.model_hash = std::stoull(val, nullptr, 16);
        } else if (key == "param_count") {
            param_count = std::stoull(val);
        } else if (key == "slice") {
            f.manifest += val + "\n";
        } else if (key == "values_hash") {
            values_hash = std::stoull(val, nullptr, 16);
            saw_hash = true;
        } else if (key == "blob_bytes") {
            blob_bytes = std::stoull(val);
        } else {
            throw Error(Status::io, "fisher file: unknown key '" + key + "'");
        }
    }
    require(saw_magic, Status::io, "fisher file: missing header: " + path);
    require(saw_hash, Status::io, "fisher file: missing values hash: " + path);
    require(blob.size() == blob_bytes && blob_bytes == param_count * sizeof(double),
            Status::io, "fisher file: truncated blob: " + path);
    require(fnv1a64(blob.data(), blob.size()) == values_hash, Status::hash_mismatch,
            "fisher values hash mismatch for " + path);

    f.values.resize(param_count);
    std::memcpy(f.values.data(), blob.data(), blob.size());
    return f;
}

} // namespace ewclab
