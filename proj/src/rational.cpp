#include "dstab/rational.hpp"

#include <cctype>
#include <cstdlib>

namespace dstab {

Rational Rational::parse(const std::string& s) {
    if (s.empty()) throw std::invalid_argument("empty rational literal");

    auto slash = s.find('/');
    if (slash != std::string::npos) {
        Rational n = parse(s.substr(0, slash));
        Rational d = parse(s.substr(slash + 1));
        return n / d;
    }

    std::size_t i = 0;
    bool neg = false;
    if (s[i] == '+' || s[i] == '-') neg = s[i++] == '-';

    std::int64_t num = 0, den = 1;
    bool saw_digit = false, saw_dot = false;
    for (; i < s.size(); ++i) {
        char c = s[i];
        if (c == '.') {
            if (saw_dot) throw std::invalid_argument("bad rational literal: " + s);
            saw_dot = true;
            continue;
        }
        if (!std::isdigit(static_cast<unsigned char>(c)))
            throw std::invalid_argument("bad rational literal: " + s);
        saw_digit = true;
        if (num > (INT64_MAX - 9) / 10 || (saw_dot && den > INT64_MAX / 10))
            throw std::out_of_range("rational literal overflows: " + s);
        num = num * 10 + (c - '0');
        if (saw_dot) den *= 10;
    }
    if (!saw_digit) throw std::invalid_argument("bad rational literal: " + s);
    return Rational(neg ? -num : num, den);
}

}  // namespace dstab
