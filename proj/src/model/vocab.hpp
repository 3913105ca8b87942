#pragma once

#include <string>
#include <unordered_map>
#include <vector>

#include "util/status.hpp"

namespace ewclab {

// Character vocabulary with three control symbols at fixed ids. Symbols are
// single characters except the named controls.
class Vocabulary {
  public:
    static constexpr int kPad = 0;
    static constexpr int kMask = 1;
    static constexpr int kUnk = 2;

    // Controls plus the given characters, ids assigned in order.
    static Vocabulary from_chars(const std::string& chars);
    // Digits, '.', '+', '-', '=', space: enough for the arithmetic task.
    static Vocabulary arithmetic();
    // The 95 printable ASCII characters: shared corpus + arithmetic alphabet.
    static Vocabulary printable_ascii();

    int size() const { return static_cast<int>(chars_.size()) + 3; }
    // Characters in id order (id = index + 3).
    const std::string& chars() const { return chars_; }

    int id_of(char c) const {
        auto it = map_.find(c);
        return it == map_.end() ? kUnk : it->second;
    }
    bool contains(char c) const { return map_.count(c) > 0; }

    bool is_control(int id) const { return id < 3; }
    // Character for a non-control id.
    char char_of(int id) const;
    // Display name for any id ("[PAD]", "[MASK]", "[UNK]" or the character).
    std::string name_of(int id) const;

    std::vector<int> encode(const std::string& text) const;
    // Digits '0'..'9' as vocabulary ids.
    std::vector<int> digit_ids() const;

    bool operator==(const Vocabulary& o) const { return chars_ == o.chars_; }

  private:
    std::string chars_;
    std::unordered_map<char, int> map_;
};

} // namespace ewclab
