#include "minkflow/polynomial.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <map>
#include <sstream>

#include "minkflow/error.hpp"

namespace minkflow {

namespace {

double ipow(double x, int k) {
  double r = 1.0;
  for (int i = 0; i < k; ++i) r *= x;
  return r;
}

class Parser {
 public:
  explicit Parser(std::string_view text) : s_(text) {}

  std::vector<SpherePolynomial::Term> parse() {
    std::vector<SpherePolynomial::Term> out;
    skip();
    double sign = 1.0;
    if (peek() == '+' || peek() == '-') {
      sign = get() == '-' ? -1.0 : 1.0;
    }
    out.push_back(term(sign));
    for (skip(); pos_ < s_.size(); skip()) {
      const char op = get();
      if (op != '+' && op != '-') fail("expected '+' or '-'");
      out.push_back(term(op == '-' ? -1.0 : 1.0));
    }
    return out;
  }

 private:
  SpherePolynomial::Term term(double sign) {
    SpherePolynomial::Term t{sign, {0, 0, 0}};
    factor(t);
    for (skip(); peek() == '*' || peek() == '/'; skip()) {
      if (get() == '*') {
        factor(t);
        continue;
      }
      const double d = number();
      if (d == 0.0) fail("division by zero");
      t.coef /= d;
    }
    return t;
  }

  void factor(SpherePolynomial::Term& t) {
    skip();
    const char c = peek();
    if (c == 'x' || c == 'y' || c == 'z') {
      get();
      int axis = c == 'y' ? 1 : (c == 'z' ? 2 : -1);
      if (axis < 0) {
        if (peek() >= '1' && peek() <= '3') {
          axis = get() - '1';
        } else {
          axis = 0;
        }
      }
      int power = 1;
      skip();
      if (peek() == '^') {
        get();
        skip();
        power = static_cast<int>(number());
        if (power < 0) fail("negative exponent");
      }
      t.pow[static_cast<std::size_t>(axis)] += power;
      return;
    }
    t.coef *= number();
  }

  double number() {
    skip();
    const char* first = s_.data() + pos_;
    const char* last = s_.data() + s_.size();
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc() || ptr == first) fail("expected a number");
    pos_ += static_cast<std::size_t>(ptr - first);
    return v;
  }

  void skip() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }
  char peek() const { return pos_ < s_.size() ? s_[pos_] : '\0'; }
  char get() { return pos_ < s_.size() ? s_[pos_++] : '\0'; }
  [[noreturn]] void fail(const std::string& why) const {
    throw Error(ErrorCode::config,
                "polynomial '" + std::string(s_) + "' at column " + std::to_string(pos_ + 1) + ": " + why);
  }

  std::string_view s_;
  std::size_t pos_ = 0;
};

}  // namespace

SpherePolynomial::SpherePolynomial(std::vector<Term> terms) {
  std::map<std::array<int, 3>, double> merged;
  for (const auto& t : terms) merged[t.pow] += t.coef;
  for (const auto& [pow, coef] : merged) {
    if (coef != 0.0) terms_.push_back({coef, pow});
  }
}

SpherePolynomial SpherePolynomial::constant(double c) { return SpherePolynomial(std::vector<Term>{Term{c, {0, 0, 0}}}); }

SpherePolynomial SpherePolynomial::parse(std::string_view text) { return SpherePolynomial(Parser(text).parse()); }

double SpherePolynomial::operator()(const Vec3& x) const {
  double sum = 0.0;
  for (const auto& t : terms_) sum += t.coef * ipow(x[0], t.pow[0]) * ipow(x[1], t.pow[1]) * ipow(x[2], t.pow[2]);
  return sum;
}

bool SpherePolynomial::even() const {
  return std::all_of(terms_.begin(), terms_.end(),
                     [](const Term& t) { return (t.pow[0] + t.pow[1] + t.pow[2]) % 2 == 0; });
}

int SpherePolynomial::degree() const {
  int d = 0;
  for (const auto& t : terms_) d = std::max(d, t.pow[0] + t.pow[1] + t.pow[2]);
  return d;
}

std::string SpherePolynomial::to_string() const {
  if (terms_.empty()) return "0";
  std::ostringstream os;
  os.precision(17);
  bool first = true;
  for (const auto& t : terms_) {
    if (!first) os << " + ";
    first = false;
    os << t.coef;
    for (int a = 0; a < 3; ++a) {
      if (t.pow[static_cast<std::size_t>(a)] > 0) {
        os << "*x" << (a + 1);
        if (t.pow[static_cast<std::size_t>(a)] > 1) os << '^' << t.pow[static_cast<std::size_t>(a)];
      }
    }
  }
  return os.str();
}

}  // namespace minkflow
