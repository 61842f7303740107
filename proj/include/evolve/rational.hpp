// Exact rational arithmetic for rate constants. Rates stay exact through
// model construction; floating point enters only at matrix assembly.
#pragma once

#include <compare>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace evolve::ctmc {

class Rational {
public:
    Rational() = default;
    Rational(std::int64_t num, std::int64_t den);
    // Whole numbers.
    explicit Rational(std::int64_t num) : Rational(num, 1) {}

    // "3", "1/4", "0.25" (decimals with up to 9 fractional digits).
    static Rational parse(const std::string& text);

    std::int64_t num() const { return num_; }
    std::int64_t den() const { return den_; }
    double value() const { return static_cast<double>(num_) / static_cast<double>(den_); }

    Rational operator*(const Rational& o) const;
    Rational operator+(const Rational& o) const;
    bool operator==(const Rational& o) const = default;
    std::strong_ordering operator<=>(const Rational& o) const;

    bool positive() const { return num_ > 0; }
    std::string str() const;

private:
    std::int64_t num_ = 0;
    std::int64_t den_ = 1;  // always > 0; gcd(num, den) == 1
};

}  // namespace evolve::ctmc
