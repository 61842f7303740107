#include "evolve/rational.hpp"

#include <numeric>

namespace evolve::ctmc {

Rational::Rational(std::int64_t num, std::int64_t den) : num_(num), den_(den) {
    if (den_ == 0) throw std::invalid_argument("rational with zero denominator");
    if (den_ < 0) {
        num_ = -num_;
        den_ = -den_;
    }
    std::int64_t g = std::gcd(num_ < 0 ? -num_ : num_, den_);
    if (g > 1) {
        num_ /= g;
        den_ /= g;
    }
}

Rational Rational::parse(const std::string& text) {
    auto bad = [&] {
        throw std::invalid_argument("cannot parse rational '" + text + "'");
    };
    if (text.empty()) bad();

    auto parse_int = [&](const std::string& s) -> std::int64_t {
        if (s.empty()) bad();
        std::size_t i = s[0] == '-' ? 1 : 0;
        if (i == s.size()) bad();
        for (; i < s.size(); ++i)
            if (s[i] < '0' || s[i] > '9') bad();
        return std::stoll(s);
    };

    if (auto slash = text.find('/'); slash != std::string::npos) {
        return Rational(parse_int(text.substr(0, slash)),
                        parse_int(text.substr(slash + 1)));
    }
    if (auto dot = text.find('.'); dot != std::string::npos) {
        std::string whole = text.substr(0, dot), frac = text.substr(dot + 1);
        if (frac.empty() || frac.size() > 9) bad();
        for (char c : frac)
            if (c < '0' || c > '9') bad();
        bool neg = !whole.empty() && whole[0] == '-';
        std::int64_t w = whole.empty() || whole == "-" ? 0 : parse_int(whole);
        std::int64_t den = 1;
        for (std::size_t i = 0; i < frac.size(); ++i) den *= 10;
        std::int64_t f = frac.empty() ? 0 : std::stoll(frac);
        std::int64_t num = (neg ? -w : w) * den + (neg ? -f : f);
        return Rational(num, den);
    }
    return Rational(parse_int(text));
}

Rational Rational::operator*(const Rational& o) const {
    // Cross-reduce before multiplying to keep intermediates small.
    std::int64_t a = num_, b = den_, c = o.num_, d = o.den_;
    std::int64_t g1 = std::gcd(a < 0 ? -a : a, d);
    std::int64_t g2 = std::gcd(c < 0 ? -c : c, b);
    return Rational((a / g1) * (c / g2), (b / g2) * (d / g1));
}

Rational Rational::operator+(const Rational& o) const {
    std::int64_t g = std::gcd(den_, o.den_);
    std::int64_t lcm = den_ / g * o.den_;
    return Rational(num_ * (lcm / den_) + o.num_ * (lcm / o.den_), lcm);
}

std::strong_ordering Rational::operator<=>(const Rational& o) const {
    __int128 lhs = static_cast<__int128>(num_) * o.den_;
    __int128 rhs = static_cast<__int128>(o.num_) * den_;
    if (lhs < rhs) return std::strong_ordering::less;
    if (lhs > rhs) return std::strong_ordering::greater;
    return std::strong_ordering::equal;
}

std::string Rational::str() const {
    return den_ == 1 ? std::to_string(num_)
                     : std::to_string(num_) + "/" + std::to_string(den_);
}

}  // namespace evolve::ctmc
