#include "ewclab.h"

#include <cstdio>
#include <new>
#include <string>

#include "pipeline/pipeline.hpp"
#include "train/config.hpp"
#include "util/status.hpp"

struct ewclab_session {
    ewclab::PipelineContext ctx;
    std::string last_error;
};

namespace {

template <typename Fn>
ewclab_status guarded(ewclab_session* s, Fn&& fn) {
    if (s == nullptr) return EWCLAB_BAD_CONFIG;
    try {
        fn();
        s->last_error.clear();
        return EWCLAB_OK;
    } catch (const ewclab::Error& e) {
        s->last_error = e.what();
        return static_cast<ewclab_status>(static_cast<int>(e.status()));
    } catch (const std::exception& e) {
        s->last_error = e.what();
        return EWCLAB_INTERNAL;
    } catch (...) {
        s->last_error = "unknown error";
        return EWCLAB_INTERNAL;
    }
}

void need_out(const ewclab_session* s) {
    ewclab::require(!s->ctx.out_root.empty(), ewclab::Status::bad_config,
                    "no output directory set");
}

void need_text(const char* p, const char* what) {
    ewclab::require(p != nullptr, ewclab::Status::bad_config, std::string(what) + " is null");
}

}  // namespace

extern "C" {

ewclab_session* ewclab_session_new(void) {
    ewclab_session* s = new (std::nothrow) ewclab_session;
    if (s != nullptr) {
        try {
            s->ctx.config = ewclab::Config::defaults();
        } catch (...) {
            delete s;
            return nullptr;
        }
    }
    return s;
}

void ewclab_session_free(ewclab_session* s) { delete s; }

ewclab_status ewclab_config_load(ewclab_session* s, const char* path) {
    return guarded(s, [&] {
        need_text(path, "config path");
        s->ctx.config = ewclab::Config::from_file(path);
    });
}

ewclab_status ewclab_config_set(ewclab_session* s, const char* key, const char* value) {
    return guarded(s, [&] {
        need_text(key, "config key");
        need_text(value, "config value");
        s->ctx.config.set(key, value);
    });
}

ewclab_status ewclab_config_override(ewclab_session* s, const char* assignment) {
    return guarded(s, [&] {
        need_text(assignment, "config override");
        s->ctx.config.apply_override(assignment);
    });
}

ewclab_status ewclab_config_get(ewclab_session* s, const char* key, char* buf, size_t buf_len) {
    return guarded(s, [&] {
        need_text(key, "config key");
        ewclab::require(buf != nullptr && buf_len > 0, ewclab::Status::bad_config,
                        "output buffer is empty");
        const std::string value = s->ctx.config.get(key);
        std::snprintf(buf, buf_len, "%s", value.c_str());
    });
}

ewclab_status ewclab_set_out_dir(ewclab_session* s, const char* path) {
    return guarded(s, [&] {
        need_text(path, "output directory");
        ewclab::require(path[0] != '\0', ewclab::Status::bad_config,
                        "output directory is empty");
        s->ctx.out_root = path;
    });
}

void ewclab_set_quiet(ewclab_session* s, int quiet) {
    if (s != nullptr) s->ctx.quiet = quiet != 0;
}

ewclab_status ewclab_gen_data(ewclab_session* s) {
    return guarded(s, [&] {
        need_out(s);
        ewclab::run_gen_data(s->ctx);
    });
}

ewclab_status ewclab_pretrain(ewclab_session* s) {
    return guarded(s, [&] {
        need_out(s);
        ewclab::run_pretrain(s->ctx);
    });
}

ewclab_status ewclab_fisher(ewclab_session* s) {
    return guarded(s, [&] {
        need_out(s);
        ewclab::run_fisher(s->ctx);
    });
}

ewclab_status ewclab_inject(ewclab_session* s) {
    return guarded(s, [&] {
        need_out(s);
        ewclab::run_inject(s->ctx);
    });
}

ewclab_status ewclab_sweep(ewclab_session* s) {
    return guarded(s, [&] {
        need_out(s);
        ewclab::run_sweep(s->ctx);
    });
}

ewclab_status ewclab_eval(ewclab_session* s, const char* checkpoint_path) {
    return guarded(s, [&] {
        need_out(s);
        ewclab::run_eval(s->ctx, checkpoint_path == nullptr ? "" : checkpoint_path);
    });
}

ewclab_status ewclab_overlap(ewclab_session* s, long long top_n) {
    return guarded(s, [&] {
        need_out(s);
        ewclab::run_overlap(s->ctx, top_n <= 0 ? size_t{800} : static_cast<size_t>(top_n));
    });
}

ewclab_status ewclab_reproduce(ewclab_session* s) {
    return guarded(s, [&] {
        need_out(s);
        ewclab::run_reproduce(s->ctx);
    });
}

const char* ewclab_last_error(const ewclab_session* s) {
    return s == nullptr ? "" : s->last_error.c_str();
}

const char* ewclab_version(void) { return ewclab::kEwclabVersion; }

}  // extern "C"
