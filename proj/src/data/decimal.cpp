#include "data/decimal.hpp"

#include "util/fmt.hpp"

namespace ewclab {

long long pow10ll(int n) {
    require(n >= 0 && n <= 17, Status::internal, strf("pow10: exponent %d out of range", n));
    long long p = 1;
    for (int i = 0; i < n; ++i) p *= 10;
    return p;
}

double Decimal::to_double() const {
    return static_cast<double>(units) / static_cast<double>(pow10ll(places));
}

std::string Decimal::render() const {
    require(units >= 0, Status::internal, "decimal: negative value has no canonical rendering");
    long long scale = pow10ll(places);
    long long ip = units / scale;
    long long fp = units % scale;
    if (places == 0) return strf("%lld", ip);
    return strf("%lld.%0*lld", ip, places, fp);
}

std::optional<Decimal> parse_canonical(const std::string& s, int places) {
    size_t dot = s.find('.');
    std::string ipart, fpart;
    if (places == 0) {
        if (dot != std::string::npos) return std::nullopt;
        ipart = s;
    } else {
        if (dot == std::string::npos) return std::nullopt;
        ipart = s.substr(0, dot);
        fpart = s.substr(dot + 1);
        if (fpart.size() != static_cast<size_t>(places)) return std::nullopt;
    }
    if (ipart.empty() || ipart.size() > 15) return std::nullopt;
    if (ipart.size() > 1 && ipart[0] == '0') return std::nullopt;
    for (char c : ipart)
        if (c < '0' || c > '9') return std::nullopt;
    for (char c : fpart)
        if (c < '0' || c > '9') return std::nullopt;
    long long units = 0;
    for (char c : ipart) units = units * 10 + (c - '0');
    for (char c : fpart) units = units * 10 + (c - '0');
    return Decimal{units, places};
}

std::optional<LenientValue> parse_lenient(const std::string& s) {
    size_t dot = s.find('.');
    std::string ipart = dot == std::string::npos ? s : s.substr(0, dot);
    std::string fpart = dot == std::string::npos ? "" : s.substr(dot + 1);
    if (fpart.find('.') != std::string::npos) return std::nullopt;
    if (ipart.empty() && fpart.empty()) return std::nullopt;
    if (ipart.size() + fpart.size() > 17) return std::nullopt;
    for (char c : ipart + fpart)
        if (c < '0' || c > '9') return std::nullopt;

    double value = 0.0;
    for (char c : ipart) value = value * 10 + (c - '0');
    double place = 0.1;
    for (char c : fpart) {
        value += (c - '0') * place;
        place *= 0.1;
    }

    // Decade from the digits: index of the leading nonzero digit relative to
    // the decimal point, floored at -2.
    size_t lead = ipart.find_first_not_of('0');
    int decade;
    if (lead != std::string::npos) {
        decade = static_cast<int>(ipart.size() - lead) - 1;
    } else {
        size_t frac_lead = fpart.find_first_not_of('0');
        if (frac_lead == std::string::npos)
            decade = -2;  // value is zero, floor guard
        else
            decade = -static_cast<int>(frac_lead) - 1;
    }
    if (decade < -2) decade = -2;
    return LenientValue{value, decade};
}

int decade_of(const Decimal& d) {
    require(d.units >= 0, Status::internal, "decade: negative decimal");
    if (d.units == 0) return -2;
    int digits = 0;
    for (long long u = d.units; u > 0; u /= 10) ++digits;
    int decade = digits - 1 - d.places;
    return decade < -2 ? -2 : decade;
}

} // namespace ewclab
