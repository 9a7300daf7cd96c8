#include "pdeform/rational.hpp"

#include "pdeform/error.hpp"

namespace pdeform {

std::string rational_to_string(const Rational& r) {
    if (denominator(r) == 1) return numerator(r).str();
    return numerator(r).str() + "/" + denominator(r).str();
}

Rational rational_from_string(const std::string& s) {
    if (s.empty()) fail(Errc::SyntaxError, "empty rational literal");
    auto slash = s.find('/');
    try {
        if (slash == std::string::npos) return Rational(Integer(s));
        Integer num(s.substr(0, slash));
        Integer den(s.substr(slash + 1));
        if (den == 0) fail(Errc::SyntaxError, "zero denominator in '" + s + "'");
        return Rational(num, den);
    } catch (const std::exception&) {
        fail(Errc::SyntaxError, "bad rational literal '" + s + "'");
    }
}

} // namespace pdeform
