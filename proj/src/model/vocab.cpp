#include "model/vocab.hpp"

#include "util/fmt.hpp"

namespace ewclab {

Vocabulary Vocabulary::from_chars(const std::string& chars) {
    Vocabulary v;
    v.chars_ = chars;
    for (size_t i = 0; i < chars.size(); ++i) {
        require(v.map_.emplace(chars[i], static_cast<int>(i) + 3).second, Status::bad_config,
                strf("vocabulary: duplicate symbol '%c'", chars[i]));
    }
    return v;
}

Vocabulary Vocabulary::arithmetic() {
    return from_chars("0123456789.+-= ");
}

Vocabulary Vocabulary::printable_ascii() {
    std::string chars;
    for (char c = 0x20; c < 0x7f; ++c) chars.push_back(c);
    return from_chars(chars);
}

char Vocabulary::char_of(int id) const {
    require(id >= 3 && id < size(), Status::internal,
            strf("vocabulary: id %d has no character (size %d)", id, size()));
    return chars_[static_cast<size_t>(id) - 3];
}

std::string Vocabulary::name_of(int id) const {
    switch (id) {
        case kPad: return "[PAD]";
        case kMask: return "[MASK]";
        case kUnk: return "[UNK]";
        default: return std::string(1, char_of(id));
    }
}

std::vector<int> Vocabulary::encode(const std::string& text) const {
    std::vector<int> ids;
    ids.reserve(text.size());
    for (char c : text) ids.push_back(id_of(c));
    return ids;
}

std::vector<int> Vocabulary::digit_ids() const {
    std::vector<int> ids;
    for (char c = '0'; c <= '9'; ++c) {
        require(contains(c), Status::internal, strf("vocabulary: missing digit '%c'", c));
        ids.push_back(id_of(c));
    }
    return ids;
}

} // namespace ewclab
