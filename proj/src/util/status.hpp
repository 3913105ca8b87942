#pragma once

#include <stdexcept>
#include <string>

namespace ewclab {

// Process-level outcome codes. The CLI exits with the numeric value, the C API
// returns it, so the two must stay aligned.
enum class Status : int {
    ok = 0,
    internal = 1,
    bad_config = 2,
    io = 3,
    hash_mismatch = 4,
    non_finite = 5,
};

class Error : public std::runtime_error {
  public:
    Error(Status s, const std::string& msg) : std::runtime_error(msg), status_(s) {}
    Status status() const { return status_; }

  private:
    Status status_;
};

inline void require(bool cond, Status s, const std::string& msg) {
    if (!cond) throw Error(s, msg);
}

} // namespace ewclab
