#include "ratobs/rational.hpp"

#include "ratobs/errors.hpp"

namespace ratobs {

BigRational parse_rational(const std::string &text) {
    if (text.empty()) throw Error("empty rational literal");
    auto dot = text.find('.');
    try {
        if (dot == std::string::npos) return BigRational(text);
        // decimal literal: digits.digits -> exact fraction
        std::string sign;
        std::string body = text;
        if (body[0] == '+' || body[0] == '-') {
            if (body[0] == '-') sign = "-";
            body = body.substr(1);
            dot -= 1;
        }
        std::string intpart = body.substr(0, dot);
        std::string fracpart = body.substr(dot + 1);
        if (intpart.empty()) intpart = "0";
        if (fracpart.empty()) throw Error("bad decimal literal: " + text);
        BigInt scale = 1;
        for (size_t i = 0; i < fracpart.size(); ++i) scale *= 10;
        BigInt num = BigInt(intpart) * scale + BigInt(fracpart);
        if (!sign.empty()) num = -num;
        return BigRational(num, scale);
    } catch (const std::exception &) {
        throw Error("bad rational literal: " + text);
    }
}

} // namespace ratobs
