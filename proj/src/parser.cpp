#include "unlinking/parser.hpp"

#include <cctype>
#include <fstream>
#include <sstream>

namespace unlinking {

namespace {

class ExpressionParser {
 public:
  ExpressionParser(std::string_view text, std::size_t arity) : text_(text), arity_(arity) {}

  Polynomial parse() {
    Polynomial result(arity_);
    skip_space();
    bool negative = false;
    if (peek() == '+' || peek() == '-') {
      negative = peek() == '-';
      ++pos_;
    }
    Polynomial t = parse_term();
    result += negative ? -t : t;
    for (;;) {
      skip_space();
      if (at_end()) break;
      const char op = peek();
      if (op != '+' && op != '-') throw ParseError("expected '+', '-' or '*'", pos_);
      ++pos_;
      Polynomial next = parse_term();
      if (op == '+') result += next;
      else result -= next;
    }
    return result;
  }

 private:
  bool at_end() const { return pos_ >= text_.size(); }
  char peek() const { return at_end() ? '\0' : text_[pos_]; }

  void skip_space() {
    while (!at_end() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  Polynomial parse_term() {
    Rational coeff(1);
    Exponent e(arity_, 0);
    parse_factor(coeff, e);
    for (;;) {
      skip_space();
      if (peek() != '*') break;
      ++pos_;
      parse_factor(coeff, e);
    }
    Polynomial t(arity_);
    t.add_term(e, coeff);
    return t;
  }

  void parse_factor(Rational& coeff, Exponent& e) {
    skip_space();
    const std::size_t start = pos_;
    if (peek() == 'x') {
      ++pos_;
      const std::size_t index_pos = pos_;
      const mpz_class index = parse_digits("expected variable index after 'x'");
      if (index < 1 || index > mpz_class(static_cast<unsigned long>(arity_))) {
        throw ParseError("variable index out of range (arity " + std::to_string(arity_) + ")", index_pos);
      }
      unsigned power = 1;
      skip_space();
      if (peek() == '^') {
        ++pos_;
        skip_space();
        const std::size_t power_pos = pos_;
        const mpz_class k = parse_digits("expected exponent after '^'");
        if (k < 1) throw ParseError("exponent must be a positive integer", power_pos);
        if (!k.fits_uint_p()) throw ParseError("exponent too large", power_pos);
        power = static_cast<unsigned>(k.get_ui());
      }
      e[index.get_ui() - 1] += power;
      return;
    }
    if (std::isdigit(static_cast<unsigned char>(peek()))) {
      const mpz_class num = parse_digits("expected integer");
      mpz_class den = 1;
      skip_space();
      if (peek() == '/') {
        ++pos_;
        skip_space();
        const std::size_t den_pos = pos_;
        den = parse_digits("expected denominator after '/'");
        if (den == 0) throw ParseError("zero denominator in coefficient", den_pos);
      }
      Rational q(num, den);
      q.canonicalize();
      coeff *= q;
      return;
    }
    if (at_end()) throw ParseError("unexpected end of input", start);
    throw ParseError(std::string("unexpected character '") + peek() + "'", start);
  }

  mpz_class parse_digits(const char* message) {
    const std::size_t start = pos_;
    while (!at_end() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    if (pos_ == start) throw ParseError(message, start);
    return mpz_class(std::string(text_.substr(start, pos_ - start)), 10);
  }

  std::string_view text_;
  std::size_t arity_;
  std::size_t pos_ = 0;
};

std::string monomial_text(const Exponent& e) {
  std::string out;
  for (std::size_t i = 0; i < e.size(); ++i) {
    if (e[i] == 0) continue;
    if (!out.empty()) out += '*';
    out += 'x' + std::to_string(i + 1);
    if (e[i] > 1) out += '^' + std::to_string(e[i]);
  }
  return out;
}

}  // namespace

Polynomial parse_expression(std::string_view text, std::size_t arity) {
  return ExpressionParser(text, arity).parse();
}

std::string to_expression(const Polynomial& p) {
  if (p.is_zero()) return "0";
  std::string out;
  bool first = true;
  for (const auto& [e, c] : p.terms()) {
    const bool negative = sgn(c) < 0;
    if (first) {
      if (negative) out += '-';
    } else {
      out += negative ? " - " : " + ";
    }
    first = false;
    const Rational magnitude = abs(c);
    const std::string mono = monomial_text(e);
    if (mono.empty()) {
      out += to_string(magnitude);
    } else {
      if (magnitude != 1) out += to_string(magnitude) + '*';
      out += mono;
    }
  }
  return out;
}

nlohmann::ordered_json to_json(const Polynomial& p) {
  nlohmann::ordered_json j;
  j["n"] = p.arity();
  auto terms = nlohmann::ordered_json::array();
  for (const auto& [e, c] : p.terms()) {
    nlohmann::ordered_json t;
    t["c"] = to_string(c);
    t["e"] = e;
    terms.push_back(std::move(t));
  }
  j["terms"] = std::move(terms);
  return j;
}

Polynomial polynomial_from_json(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("n") || !j.contains("terms")) {
    throw FormatError("polynomial JSON must be an object with \"n\" and \"terms\"");
  }
  if (!j["n"].is_number_integer() || j["n"].get<long long>() < 1) {
    throw FormatError("polynomial JSON field \"n\" must be a positive integer");
  }
  const auto n = j["n"].get<std::size_t>();
  if (!j["terms"].is_array()) throw FormatError("polynomial JSON field \"terms\" must be an array");
  Polynomial p(n);
  for (const auto& t : j["terms"]) {
    if (!t.is_object() || !t.contains("c") || !t.contains("e") || !t["c"].is_string() || !t["e"].is_array()) {
      throw FormatError("each term must be {\"c\": string, \"e\": [ints]}");
    }
    Exponent e;
    for (const auto& k : t["e"]) {
      if (!k.is_number_integer() || k.get<long long>() < 0) throw FormatError("exponents must be nonnegative integers");
      e.push_back(k.get<unsigned>());
    }
    if (e.size() != n) throw FormatError("exponent tuple length does not match \"n\"");
    p.add_term(e, parse_rational(t["c"].get<std::string>()));
  }
  return p;
}

Polynomial parse_poly_document(std::string_view text) {
  std::size_t pos = 0;
  std::string header;
  while (pos < text.size()) {
    const std::size_t eol = std::min(text.find('\n', pos), text.size());
    std::string_view line = text.substr(pos, eol - pos);
    pos = eol + 1;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) continue;
    header = std::string(line.substr(first));
    break;
  }
  while (!header.empty() && std::isspace(static_cast<unsigned char>(header.back()))) header.pop_back();
  if (header.rfind("n=", 0) != 0) throw FormatError("polynomial document must start with a line \"n=<int>\"");
  const std::string count = header.substr(2);
  if (count.empty() || count.find_first_not_of("0123456789") != std::string::npos || std::stoul(count) == 0) {
    throw FormatError("invalid arity header \"" + header + "\"");
  }
  const std::size_t arity = std::stoul(count);
  const std::string_view body = pos < text.size() ? text.substr(pos) : std::string_view{};
  try {
    return parse_expression(body, arity);
  } catch (const ParseError& e) {
    // Re-anchor the offset to the whole document.
    throw ParseError(e.message(), e.position() + pos);
  }
}

Polynomial read_polynomial_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  const std::string text = buffer.str();
  if (path.extension() == ".json") {
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
      throw ParseError(std::string("invalid JSON: ") + e.what(), e.byte == 0 ? 0 : e.byte - 1);
    }
    return polynomial_from_json(j);
  }
  return parse_poly_document(text);
}

}  // namespace unlinking
