#include "inls/config.hpp"

#include <charconv>
#include <cmath>
#include <map>
#include <set>
#include <sstream>

namespace inls {

namespace {

std::string trim(std::string_view s) {
  std::size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a])))
    ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1])))
    --b;
  return std::string(s.substr(a, b - a));
}

std::vector<std::string> split_list(const std::string &s) {
  std::vector<std::string> out;
  if (trim(s).empty())
    return out;
  std::size_t start = 0;
  while (true) {
    std::size_t comma = s.find(',', start);
    out.push_back(trim(std::string_view(s).substr(
        start, comma == std::string::npos ? std::string::npos : comma - start)));
    if (comma == std::string::npos)
      break;
    start = comma + 1;
  }
  return out;
}

struct Entry {
  std::string value;
  int line = 0;
};

class Reader {
public:
  Reader(int line, std::string key) : line_(line), key_(std::move(key)) {}

  [[noreturn]] void fail(const std::string &why) const {
    throw ValidationError("config line " + std::to_string(line_) + ": key '" +
                          key_ + "': " + why);
  }

  double real(const std::string &v) const {
    std::string s = trim(v);
    if (s == "inf" || s == "+inf")
      return std::numeric_limits<double>::infinity();
    double out = 0.0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
    if (ec != std::errc() || ptr != s.data() + s.size()) {
      // Accept exact rationals such as 1/16 for real-valued keys too.
      try {
        ExtRational q = ExtRational::parse(s);
        return q.to_double();
      } catch (const ValidationError &) {
        fail("expected a real number, got '" + s + "'");
      }
    }
    return out;
  }

  long integer(const std::string &v) const {
    std::string s = trim(v);
    long out = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
    if (ec != std::errc() || ptr != s.data() + s.size())
      fail("expected an integer, got '" + s + "'");
    return out;
  }

  std::uint64_t unsigned_integer(const std::string &v) const {
    std::string s = trim(v);
    std::uint64_t out = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
    if (ec != std::errc() || ptr != s.data() + s.size())
      fail("expected a nonnegative integer, got '" + s + "'");
    return out;
  }

  bool boolean(const std::string &v) const {
    std::string s = trim(v);
    if (s == "true" || s == "1" || s == "yes")
      return true;
    if (s == "false" || s == "0" || s == "no")
      return false;
    fail("expected true or false, got '" + s + "'");
  }

  ExtRational rational(const std::string &v) const {
    try {
      return ExtRational::parse(trim(v));
    } catch (const ValidationError &e) {
      fail(e.what());
    }
  }

private:
  int line_;
  std::string key_;
};

using Section = std::map<std::string, Entry>;

const std::map<std::string, std::set<std::string>> &schema() {
  static const std::map<std::string, std::set<std::string>> s{
      {"params", {"d", "b", "alpha", "mu", "free_evolution"}},
      {"grid", {"L", "n", "offset"}},
      {"time",
       {"dt", "t_end", "sample_every", "direction", "checkpoint_every",
        "checkpoint_t_max"}},
      {"initial", {"kind", "amplitude", "width", "velocity", "seed", "cutoff"}},
      {"diagnostics", {"groups", "lq", "pairs", "morawetz_delta"}},
      {"window", {"t_transient", "wrap_tol", "wrap_slab"}},
  };
  return s;
}

std::map<std::string, Section> tokenize(std::string_view text) {
  std::map<std::string, Section> sections;
  std::string current;
  std::istringstream in{std::string(text)};
  std::string raw;
  int line = 0;
  while (std::getline(in, raw)) {
    ++line;
    std::string s = raw;
    if (auto hash = s.find('#'); hash != std::string::npos)
      s.resize(hash);
    s = trim(s);
    if (s.empty())
      continue;
    auto where = [&] { return "config line " + std::to_string(line) + ": "; };
    if (s.front() == '[') {
      if (s.back() != ']')
        throw ValidationError(where() + "malformed section header '" + s + "'");
      current = trim(std::string_view(s).substr(1, s.size() - 2));
      if (!schema().count(current))
        throw ValidationError(where() + "unknown section [" + current + "]");
      sections[current];
      continue;
    }
    auto eq = s.find('=');
    if (eq == std::string::npos)
      throw ValidationError(where() + "expected 'key = value', got '" + s + "'");
    std::string key = trim(std::string_view(s).substr(0, eq));
    std::string value = trim(std::string_view(s).substr(eq + 1));
    if (current.empty())
      throw ValidationError(where() + "key '" + key +
                            "' appears before any section header");
    if (!schema().at(current).count(key))
      throw ValidationError(where() + "unknown key '" + key + "' in [" +
                            current + "]");
    if (sections[current].count(key))
      throw ValidationError(where() + "repeated key '" + key + "' in [" +
                            current + "]");
    sections[current][key] = Entry{value, line};
  }
  return sections;
}

} // namespace

RunConfig parse_config(std::string_view text) {
  auto sections = tokenize(text);
  RunConfig c;
  auto each = [&](const std::string &name, auto &&fn) {
    auto it = sections.find(name);
    if (it == sections.end())
      return;
    for (const auto &[key, entry] : it->second)
      fn(key, entry.value, Reader(entry.line, key));
  };

  each("params", [&](const std::string &k, const std::string &v, Reader r) {
    if (k == "d")
      c.params.d = static_cast<int>(r.integer(v));
    else if (k == "b")
      c.params.b = r.rational(v);
    else if (k == "alpha")
      c.params.alpha = r.rational(v);
    else if (k == "mu")
      c.params.mu = static_cast<int>(r.integer(v));
    else if (k == "free_evolution")
      c.free_evolution = r.boolean(v);
  });
  c.grid.d = c.params.d;
  c.grid.L = 30.0;
  c.grid.n = 256;
  each("grid", [&](const std::string &k, const std::string &v, Reader r) {
    if (k == "L")
      c.grid.L = r.real(v);
    else if (k == "n")
      c.grid.n = static_cast<int>(r.integer(v));
    else if (k == "offset")
      c.grid.offset = r.boolean(v);
  });
  each("time", [&](const std::string &k, const std::string &v, Reader r) {
    if (k == "dt")
      c.dt = r.real(v);
    else if (k == "t_end")
      c.t_end = r.real(v);
    else if (k == "sample_every")
      c.sample_every = static_cast<int>(r.integer(v));
    else if (k == "direction")
      c.direction = static_cast<int>(r.integer(v));
    else if (k == "checkpoint_every")
      c.checkpoint_every = static_cast<int>(r.integer(v));
    else if (k == "checkpoint_t_max")
      c.checkpoint_t_max = r.real(v);
  });
  each("initial", [&](const std::string &k, const std::string &v, Reader r) {
    if (k == "kind") {
      try {
        c.initial.kind = parse_initial_kind(trim(v));
      } catch (const ValidationError &e) {
        r.fail(e.what());
      }
    } else if (k == "amplitude") {
      c.initial.amplitude = r.real(v);
    } else if (k == "width") {
      c.initial.width = r.real(v);
    } else if (k == "velocity") {
      auto parts = split_list(v);
      if (parts.size() > 3)
        r.fail("at most three velocity components");
      c.initial.velocity = {0.0, 0.0, 0.0};
      for (std::size_t i = 0; i < parts.size(); ++i)
        c.initial.velocity[i] = r.real(parts[i]);
    } else if (k == "seed") {
      c.initial.seed = r.unsigned_integer(v);
    } else if (k == "cutoff") {
      c.initial.cutoff = r.real(v);
    }
  });
  each("diagnostics", [&](const std::string &k, const std::string &v, Reader r) {
    if (k == "groups") {
      c.diagnostics.clear();
      if (trim(v) == "all")
        return;
      for (const std::string &g : split_list(v)) {
        if (std::find(diagnostic_groups().begin(), diagnostic_groups().end(),
                      g) == diagnostic_groups().end())
          r.fail("unknown diagnostic group '" + g + "'");
        c.diagnostics.push_back(g);
      }
      if (c.diagnostics.empty())
        r.fail("empty group list (use 'all')");
    } else if (k == "lq") {
      c.lq.clear();
      for (const std::string &q : split_list(v))
        c.lq.push_back(r.rational(q));
    } else if (k == "pairs") {
      c.pairs.clear();
      for (const std::string &p : split_list(v)) {
        auto colon = p.find(':');
        if (colon == std::string::npos)
          r.fail("Strichartz pair must be written p:q, got '" + p + "'");
        c.pairs.push_back(
            {r.rational(p.substr(0, colon)), r.rational(p.substr(colon + 1))});
      }
    } else if (k == "morawetz_delta") {
      c.morawetz_delta = r.real(v);
    }
  });
  each("window", [&](const std::string &k, const std::string &v, Reader r) {
    if (k == "t_transient")
      c.t_transient = r.real(v);
    else if (k == "wrap_tol")
      c.wrap_tol = r.real(v);
    else if (k == "wrap_slab")
      c.wrap_slab = r.real(v);
  });
  c.validate();
  return c;
}

std::string format_double(double v) {
  if (std::isnan(v))
    return "nan";
  if (std::isinf(v))
    return v > 0 ? "inf" : "-inf";
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

std::string format_config(const RunConfig &c) {
  std::ostringstream o;
  auto join = [](const auto &items, auto &&fmt) {
    std::string s;
    for (const auto &x : items) {
      if (!s.empty())
        s += ", ";
      s += fmt(x);
    }
    return s;
  };
  o << "[params]\n"
    << "d = " << c.params.d << "\n"
    << "b = " << c.params.b.str() << "\n"
    << "alpha = " << c.params.alpha.str() << "\n"
    << "mu = " << c.params.mu << "\n"
    << "free_evolution = " << (c.free_evolution ? "true" : "false") << "\n\n"
    << "[grid]\n"
    << "L = " << format_double(c.grid.L) << "\n"
    << "n = " << c.grid.n << "\n"
    << "offset = " << (c.grid.offset ? "true" : "false") << "\n\n"
    << "[time]\n"
    << "dt = " << format_double(c.dt) << "\n"
    << "t_end = " << format_double(c.t_end) << "\n"
    << "sample_every = " << c.sample_every << "\n"
    << "direction = " << c.direction << "\n"
    << "checkpoint_every = " << c.checkpoint_every << "\n"
    << "checkpoint_t_max = " << format_double(c.checkpoint_t_max) << "\n\n"
    << "[initial]\n"
    << "kind = " << initial_kind_name(c.initial.kind) << "\n"
    << "amplitude = " << format_double(c.initial.amplitude) << "\n"
    << "width = " << format_double(c.initial.width) << "\n"
    << "velocity = "
    << join(c.initial.velocity, [](double x) { return format_double(x); })
    << "\n"
    << "seed = " << c.initial.seed << "\n"
    << "cutoff = " << format_double(c.initial.cutoff) << "\n\n"
    << "[diagnostics]\n"
    << "groups = "
    << (c.diagnostics.empty()
            ? std::string("all")
            : join(c.diagnostics, [](const std::string &s) { return s; }))
    << "\n"
    << "lq = " << join(c.lq, [](const ExtRational &q) { return q.str(); })
    << "\n"
    << "pairs = "
    << join(c.pairs,
            [](const StrichartzPair &p) { return p.p.str() + ":" + p.q.str(); })
    << "\n"
    << "morawetz_delta = " << format_double(c.morawetz_delta) << "\n\n"
    << "[window]\n"
    << "t_transient = " << format_double(c.t_transient) << "\n"
    << "wrap_tol = " << format_double(c.wrap_tol) << "\n"
    << "wrap_slab = " << format_double(c.wrap_slab) << "\n";
  return o.str();
}

} // namespace inls
