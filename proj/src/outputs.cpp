#include "inls/outputs.hpp"

#include "inls/config.hpp"

#include <fftw3.h>
#include <gmp.h>
#include <openssl/crypto.h>
#include <openssl/evp.h>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <mutex>
#include <sstream>
#include <thread>

namespace inls {

std::string git_blob_sha1(std::string_view content) {
  std::string header = "blob " + std::to_string(content.size());
  header.push_back('\0');
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_MD_CTX *ctx = EVP_MD_CTX_new();
  if (!ctx)
    throw Error(ExitCode::internal, "cannot allocate a digest context");
  bool ok = EVP_DigestInit_ex(ctx, EVP_sha1(), nullptr) == 1 &&
            EVP_DigestUpdate(ctx, header.data(), header.size()) == 1 &&
            EVP_DigestUpdate(ctx, content.data(), content.size()) == 1 &&
            EVP_DigestFinal_ex(ctx, md, &len) == 1;
  EVP_MD_CTX_free(ctx);
  if (!ok)
    throw Error(ExitCode::internal, "SHA-1 digest failed");
  static const char *hex = "0123456789abcdef";
  std::string out;
  for (unsigned i = 0; i < len; ++i) {
    out.push_back(hex[md[i] >> 4]);
    out.push_back(hex[md[i] & 15]);
  }
  return out;
}

std::string read_text_file(const fs::path &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw IoError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad())
    throw IoError("read failed for " + path.string());
  return ss.str();
}

void write_text_file(const fs::path &path, std::string_view content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out)
    throw IoError("cannot create " + path.string());
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out)
    throw IoError("write failed for " + path.string());
}

// ---------------------------------------------------------------------------
// Exponent reports

json report_json(const ExponentReport &r) {
  json j;
  j["d"] = r.d;
  j["b"] = r.b.str();
  j["alpha"] = r.alpha ? json(r.alpha->str()) : json(nullptr);
  j["alpha_star"] = r.alpha_star.str();
  j["alpha_sup"] = r.alpha_sup.str();
  j["two_star"] = r.two_star.str();
  j["gamma_c"] = r.gamma_c ? json(r.gamma_c->str()) : json(nullptr);
  j["tilde_alpha"] = r.tilde_alpha.str();
  j["tilde_b"] = r.tilde_b.str();
  const RegimeFlags &f = r.flags;
  j["flags"] = {{"simulable", f.simulable},
                {"defocusing", f.defocusing},
                {"mass_subcritical", f.mass_subcritical},
                {"intercritical", f.intercritical},
                {"genoud_stuart_lwp", f.genoud_stuart_lwp},
                {"guzman_lwp", f.guzman_lwp},
                {"dinh_lwp", f.dinh_lwp},
                {"decay", f.decay},
                {"scattering", f.scattering}};
  return j;
}

json certificate_json(const ExponentCertificate &c) {
  json j;
  j["d"] = c.d;
  j["epsilon"] = c.epsilon.str();
  j["tau"] = c.tau.str();
  j["q1"] = c.q1.str();
  j["p1"] = c.p1.str();
  j["theta1"] = c.theta1.str();
  j["q2"] = c.q2.str();
  j["p2"] = c.p2.str();
  j["theta2"] = c.theta2.str();
  json log = json::array();
  for (const ConstraintRecord &r : c.constraint_log)
    log.push_back({{"name", r.name},
                   {"lhs", r.lhs.str()},
                   {"relation", relation_symbol(r.relation)},
                   {"rhs", r.rhs.str()},
                   {"holds", r.holds()}});
  j["constraint_log"] = log;
  j["all_hold"] = c.all_hold();
  return j;
}

namespace {

std::string aligned(const std::vector<std::pair<std::string, std::string>> &rows) {
  std::size_t w = 0;
  for (const auto &r : rows)
    w = std::max(w, r.first.size());
  std::string out;
  for (const auto &[k, v] : rows)
    out += k + std::string(w - k.size() + 2, ' ') + v + "\n";
  return out;
}

const char *yes_no(bool b) { return b ? "yes" : "no"; }

} // namespace

std::string report_table(const ExponentReport &r, const ExponentCertificate *c) {
  std::vector<std::pair<std::string, std::string>> rows{
      {"d", std::to_string(r.d)},
      {"b", r.b.str()},
      {"alpha", r.alpha ? r.alpha->str() : "-"},
      {"alpha_star", r.alpha_star.str()},
      {"alpha_sup", r.alpha_sup.str()},
      {"two_star", r.two_star.str()},
      {"gamma_c", r.gamma_c ? r.gamma_c->str() : "-"},
      {"tilde_alpha", r.tilde_alpha.str()},
      {"tilde_b", r.tilde_b.str()},
      {"simulable", yes_no(r.flags.simulable)},
      {"defocusing", yes_no(r.flags.defocusing)},
      {"mass_subcritical", yes_no(r.flags.mass_subcritical)},
      {"intercritical", yes_no(r.flags.intercritical)},
      {"genoud_stuart_lwp", yes_no(r.flags.genoud_stuart_lwp)},
      {"guzman_lwp", yes_no(r.flags.guzman_lwp)},
      {"dinh_lwp", yes_no(r.flags.dinh_lwp)},
      {"decay", yes_no(r.flags.decay)},
      {"scattering", yes_no(r.flags.scattering)},
  };
  std::string out = aligned(rows);
  if (c) {
    out += "\ncertificate\n";
    out += aligned({{"epsilon", c->epsilon.str()},
                    {"tau", c->tau.str()},
                    {"q1", c->q1.str()},
                    {"p1", c->p1.str()},
                    {"theta1", c->theta1.str()},
                    {"q2", c->q2.str()},
                    {"p2", c->p2.str()},
                    {"theta2", c->theta2.str()}});
    std::size_t w = 0;
    for (const ConstraintRecord &rec : c->constraint_log)
      w = std::max(w, rec.name.size());
    out += "\nconstraints\n";
    for (const ConstraintRecord &rec : c->constraint_log)
      out += rec.name + std::string(w - rec.name.size() + 2, ' ') +
             rec.lhs.str() + " " + relation_symbol(rec.relation) + " " +
             rec.rhs.str() + "  " + (rec.holds() ? "ok" : "FAIL") + "\n";
  }
  return out;
}

// ---------------------------------------------------------------------------
// Series

std::string series_csv(const RunConfig &config,
                       const std::vector<DiagnosticSample> &series) {
  std::string out;
  auto cols = series_columns(config);
  for (std::size_t i = 0; i < cols.size(); ++i)
    out += (i ? "," : "") + cols[i];
  out += "\n";
  for (const DiagnosticSample &s : series) {
    auto row = series_row(config, s);
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i)
        out += ",";
      out += i == 1 ? std::to_string(s.step) : format_double(row[i]);
    }
    out += "\n";
  }
  return out;
}

json series_json(const RunConfig &config,
                 const std::vector<DiagnosticSample> &series) {
  json j;
  j["columns"] = series_columns(config);
  json rows = json::array();
  for (const DiagnosticSample &s : series) {
    json row = json::array();
    auto values = series_row(config, s);
    for (std::size_t i = 0; i < values.size(); ++i) {
      if (i == 1)
        row.push_back(s.step);
      else if (std::isfinite(values[i]))
        row.push_back(values[i]);
      else
        row.push_back(nullptr);
    }
    rows.push_back(std::move(row));
  }
  j["rows"] = std::move(rows);
  return j;
}

namespace {

std::vector<std::string> split(const std::string &s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == sep) {
      out.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur.push_back(c);
    }
  }
  out.push_back(cur);
  return out;
}

double parse_cell(const std::string &s) {
  if (s == "nan")
    return kNaN;
  if (s == "inf")
    return std::numeric_limits<double>::infinity();
  if (s == "-inf")
    return -std::numeric_limits<double>::infinity();
  char *end = nullptr;
  double v = std::strtod(s.c_str(), &end);
  if (s.empty() || *end != '\0')
    throw ValidationError("series.csv: malformed number '" + s + "'");
  return v;
}

// Header and numeric rows of a CSV document.
std::pair<std::vector<std::string>, std::vector<std::vector<double>>>
read_csv(std::string_view text, const std::string &name) {
  std::istringstream in{std::string(text)};
  std::string line;
  if (!std::getline(in, line))
    throw ValidationError(name + " is empty");
  auto header = split(line, ',');
  std::vector<std::vector<double>> rows;
  while (std::getline(in, line)) {
    if (line.empty())
      continue;
    auto cells = split(line, ',');
    if (cells.size() != header.size())
      throw ValidationError(name + ": row with " + std::to_string(cells.size()) +
                            " cells, header has " +
                            std::to_string(header.size()));
    std::vector<double> row;
    for (const auto &c : cells)
      row.push_back(parse_cell(c));
    rows.push_back(std::move(row));
  }
  return {header, rows};
}

} // namespace

std::vector<DiagnosticSample> parse_series_csv(const RunConfig &config,
                                               std::string_view text) {
  auto [header, rows] = read_csv(text, "series.csv");
  auto cols = series_columns(config);
  std::vector<std::size_t> where(cols.size());
  for (std::size_t i = 0; i < cols.size(); ++i) {
    auto it = std::find(header.begin(), header.end(), cols[i]);
    if (it == header.end())
      throw ValidationError("series.csv lacks column '" + cols[i] + "'");
    where[i] = static_cast<std::size_t>(it - header.begin());
  }
  std::vector<DiagnosticSample> out;
  const std::size_t nq = config.lq.size();
  for (const auto &row : rows) {
    auto v = [&](std::size_t i) { return row[where[i]]; };
    DiagnosticSample s;
    std::size_t i = 0;
    s.t = v(i++);
    s.step = static_cast<long>(v(i++));
    s.mass = v(i++);
    s.energy = v(i++);
    s.kinetic = v(i++);
    s.potential_term = v(i++);
    s.h1 = v(i++);
    for (std::size_t k = 0; k < nq; ++k)
      s.lq_norms.push_back(v(i++));
    s.morawetz_abs = v(i++);
    s.morawetz_quadratic = v(i++);
    s.morawetz_smoothed = v(i++);
    s.rhs_quadratic = v(i++);
    s.rhs_smoothed = v(i++);
    s.fd_quadratic = v(i++);
    s.fd_smoothed = v(i++);
    s.morawetz_integrand = v(i++);
    s.nakanishi_integrand = v(i++);
    s.gn_ratio = v(i++);
    s.edge_mass = v(i++);
    for (std::size_t k = 0; k < config.pairs.size(); ++k)
      s.strichartz.push_back(v(i++));
    out.push_back(std::move(s));
  }
  return out;
}

// ---------------------------------------------------------------------------
// SVG

namespace {

std::string fmt(const char *f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

std::string escape(const std::string &s) {
  std::string out;
  for (char c : s) {
    switch (c) {
    case '<':
      out += "&lt;";
      break;
    case '>':
      out += "&gt;";
      break;
    case '&':
      out += "&amp;";
      break;
    default:
      out.push_back(c);
    }
  }
  return out;
}

const char *kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                          "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f"};

} // namespace

std::string svg_plot(const std::string &title, const std::string &xlabel,
                     const std::string &ylabel, const std::vector<Curve> &curves,
                     bool log_x, bool log_y) {
  const double W = 720, H = 440, ml = 80, mr = 170, mt = 40, mb = 55;
  auto tx = [&](double x) { return log_x ? std::log10(x) : x; };
  auto ty = [&](double y) { return log_y ? std::log10(y) : y; };
  auto usable = [&](double x, double y) {
    return std::isfinite(x) && std::isfinite(y) && (!log_x || x > 0) &&
           (!log_y || y > 0);
  };
  double x0 = INFINITY, x1 = -INFINITY, y0 = INFINITY, y1 = -INFINITY;
  for (const Curve &c : curves)
    for (std::size_t i = 0; i < c.x.size() && i < c.y.size(); ++i)
      if (usable(c.x[i], c.y[i])) {
        x0 = std::min(x0, tx(c.x[i]));
        x1 = std::max(x1, tx(c.x[i]));
        y0 = std::min(y0, ty(c.y[i]));
        y1 = std::max(y1, ty(c.y[i]));
      }
  if (!std::isfinite(x0)) {
    x0 = 0;
    x1 = 1;
    y0 = 0;
    y1 = 1;
  }
  if (x1 - x0 <= 0) {
    x0 -= 0.5;
    x1 += 0.5;
  }
  if (y1 - y0 <= 1e-300 * std::max(1.0, std::abs(y0))) {
    double pad = std::max(std::abs(y0) * 1e-3, 1e-12);
    y0 -= pad;
    y1 += pad;
  }
  double pad = 0.04 * (y1 - y0);
  y0 -= pad;
  y1 += pad;
  const double pw = W - ml - mr, ph = H - mt - mb;
  auto px = [&](double v) { return ml + (v - x0) / (x1 - x0) * pw; };
  auto py = [&](double v) { return mt + ph - (v - y0) / (y1 - y0) * ph; };

  std::ostringstream o;
  o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W
    << "\" height=\"" << H << "\" viewBox=\"0 0 " << W << " " << H << "\">\n";
  o << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  o << "<text x=\"" << W / 2 << "\" y=\"24\" text-anchor=\"middle\" "
    << "font-family=\"sans-serif\" font-size=\"15\">" << escape(title)
    << "</text>\n";
  o << "<rect x=\"" << ml << "\" y=\"" << mt << "\" width=\"" << pw
    << "\" height=\"" << ph << "\" fill=\"none\" stroke=\"black\"/>\n";
  for (int i = 0; i <= 4; ++i) {
    double vx = x0 + (x1 - x0) * i / 4.0, vy = y0 + (y1 - y0) * i / 4.0;
    double lx = log_x ? std::pow(10.0, vx) : vx;
    double ly = log_y ? std::pow(10.0, vy) : vy;
    o << "<line x1=\"" << fmt("%.2f", px(vx)) << "\" y1=\"" << mt + ph
      << "\" x2=\"" << fmt("%.2f", px(vx)) << "\" y2=\"" << mt + ph + 5
      << "\" stroke=\"black\"/>\n";
    o << "<text x=\"" << fmt("%.2f", px(vx)) << "\" y=\"" << mt + ph + 20
      << "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
         "font-size=\"11\">"
      << fmt("%.3g", lx) << "</text>\n";
    o << "<line x1=\"" << ml - 5 << "\" y1=\"" << fmt("%.2f", py(vy))
      << "\" x2=\"" << ml << "\" y2=\"" << fmt("%.2f", py(vy))
      << "\" stroke=\"black\"/>\n";
    o << "<text x=\"" << ml - 8 << "\" y=\"" << fmt("%.2f", py(vy) + 4)
      << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">"
      << fmt("%.4g", ly) << "</text>\n";
  }
  o << "<text x=\"" << ml + pw / 2 << "\" y=\"" << H - 12
    << "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
       "font-size=\"12\">"
    << escape(xlabel) << "</text>\n";
  o << "<text x=\"16\" y=\"" << mt + ph / 2
    << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\" "
       "transform=\"rotate(-90 16 "
    << mt + ph / 2 << ")\">" << escape(ylabel) << "</text>\n";
  for (std::size_t c = 0; c < curves.size(); ++c) {
    const Curve &cv = curves[c];
    const char *color = kPalette[c % 8];
    std::string pts;
    for (std::size_t i = 0; i < cv.x.size() && i < cv.y.size(); ++i)
      if (usable(cv.x[i], cv.y[i]))
        pts += fmt("%.2f", px(tx(cv.x[i]))) + "," +
               fmt("%.2f", py(ty(cv.y[i]))) + " ";
    if (!pts.empty())
      pts.pop_back();
    o << "<polyline fill=\"none\" stroke=\"" << color
      << "\" stroke-width=\"1.5\"" << (cv.dashed ? " stroke-dasharray=\"6 4\"" : "")
      << " points=\"" << pts << "\"/>\n";
    double ly = mt + 14 + 18.0 * c;
    o << "<line x1=\"" << ml + pw + 10 << "\" y1=\"" << ly << "\" x2=\""
      << ml + pw + 34 << "\" y2=\"" << ly << "\" stroke=\"" << color
      << "\" stroke-width=\"2\"" << (cv.dashed ? " stroke-dasharray=\"6 4\"" : "")
      << "/>\n";
    o << "<text x=\"" << ml + pw + 40 << "\" y=\"" << ly + 4
      << "\" font-family=\"sans-serif\" font-size=\"11\">" << escape(cv.label)
      << "</text>\n";
  }
  o << "</svg>\n";
  return o.str();
}

namespace {

std::string exponent_label(const ExtRational &q) {
  std::string s = q.str();
  if (s.size() > 2 && s.substr(s.size() - 2) == "/1")
    s.resize(s.size() - 2);
  return s;
}

struct PlotInput {
  RunConfig config;
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;

  std::vector<double> column(const std::string &name) const {
    auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end())
      throw ValidationError("series.csv lacks column '" + name + "'");
    std::size_t k = static_cast<std::size_t>(it - header.begin());
    std::vector<double> out;
    for (const auto &r : rows)
      out.push_back(r[k]);
    return out;
  }
};

// q used by the decay plot: 4 when tracked and admissible, else the first
// tracked exponent in (2, 2*).
std::optional<std::size_t> decay_exponent(const RunConfig &c) {
  ExponentReport crit = critical_exponents(c.grid.d, ExtRational(1));
  std::optional<std::size_t> best;
  for (std::size_t i = 0; i < c.lq.size(); ++i) {
    const ExtRational &q = c.lq[i];
    if (!(q > ExtRational(2) && q < crit.two_star))
      continue;
    if (q == ExtRational(4))
      return i;
    if (!best)
      best = i;
  }
  return best;
}

std::vector<std::string> write_plots(const PlotInput &in, const fs::path &dir) {
  if (in.rows.empty())
    throw ValidationError("series is empty; nothing to plot");
  const RunConfig &c = in.config;
  auto t = in.column("t");
  std::vector<std::string> names;

  std::vector<Curve> norms{{"mass", t, in.column("mass")},
                           {"H1 norm", t, in.column("h1")}};
  const auto cols = series_columns(c);
  for (std::size_t i = 0; i < c.lq.size(); ++i)
    norms.push_back(
        {"L^" + exponent_label(c.lq[i]) + " norm", t, in.column(cols[7 + i])});
  write_text_file(dir / "norms.svg",
                  svg_plot("Norms", "t", "value", norms));
  names.push_back("norms.svg");

  auto e = in.column("energy");
  std::vector<double> drift(e.size());
  for (std::size_t i = 0; i < e.size(); ++i)
    drift[i] = e[0] != 0.0 ? (e[i] - e[0]) / std::abs(e[0]) : e[i] - e[0];
  write_text_file(dir / "energy_drift.svg",
                  svg_plot("Energy drift", "t", "(E(t) - E(0)) / |E(0)|",
                           {{"energy drift", t, drift}}));
  names.push_back("energy_drift.svg");

  write_text_file(
      dir / "morawetz.svg",
      svg_plot("Morawetz action", "t", "M_a(t)",
               {{"a = |x|^2", t, in.column("morawetz_quadratic")},
                {"a = sqrt(delta^2 + |x|^2)", t, in.column("morawetz_smoothed")},
                {"a = |x|", t, in.column("morawetz_abs")}}));
  names.push_back("morawetz.svg");

  std::vector<Curve> decay;
  std::string title = "Decay of the L^q norm";
  if (auto qi = decay_exponent(c)) {
    const ExtRational &q = c.lq[*qi];
    ExtRational slope = -(ExtRational(c.grid.d) *
                          (ExtRational::fraction(1, 2) - reciprocal(q)));
    auto y = in.column(cols[7 + *qi]);
    std::vector<double> at(t.size());
    for (std::size_t i = 0; i < t.size(); ++i)
      at[i] = std::abs(t[i]);
    decay.push_back({"L^" + exponent_label(q) + " norm", at, y});
    // Reference line through the first sample with |t| >= max(t_transient, dt).
    double t_ref = std::max(c.t_transient, c.dt);
    std::size_t k = 0;
    while (k < at.size() && at[k] < t_ref)
      ++k;
    if (k < at.size() && y[k] > 0) {
      double s = slope.to_double();
      Curve ref{"reference slope " + exponent_label(slope), {}, {}, true};
      for (std::size_t i = k; i < at.size(); ++i) {
        ref.x.push_back(at[i]);
        ref.y.push_back(y[k] * std::pow(at[i] / at[k], s));
      }
      decay.push_back(std::move(ref));
    }
    title = "Decay of the L^" + exponent_label(q) + " norm";
  }
  write_text_file(dir / "decay.svg",
                  svg_plot(title, "|t|", "norm", decay, true, true));
  names.push_back("decay.svg");
  return names;
}

PlotInput load_plot_input(const fs::path &run_dir) {
  PlotInput in;
  in.config = parse_config(read_text_file(run_dir / "config.ini"));
  auto [header, rows] =
      read_csv(read_text_file(run_dir / "series.csv"), "series.csv");
  in.header = std::move(header);
  in.rows = std::move(rows);
  return in;
}

} // namespace

std::vector<std::string> emit_plots(const fs::path &run_dir) {
  return write_plots(load_plot_input(run_dir), run_dir);
}

// ---------------------------------------------------------------------------
// Run directories

namespace {

json versions_json() {
  json j;
  j["inls"] = INLS_VERSION;
  j["fftw"] = std::string(fftw_version);
  j["gmp"] = std::string(gmp_version);
  j["openssl"] = std::string(OpenSSL_version(OPENSSL_VERSION));
  return j;
}

std::string checkpoint_name(long step) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "checkpoints/step_%08ld.field", step);
  return buf;
}

} // namespace

RunFiles write_run(const RunOutput &run, const fs::path &dir,
                   const std::string &status) {
  std::error_code ec;
  fs::create_directories(dir / "checkpoints", ec);
  if (ec)
    throw IoError("cannot create " + dir.string() + ": " + ec.message());
  const RunConfig &c = run.config;
  RunFiles files{dir, {}, status};
  json hashes = json::object();
  auto put = [&](const std::string &name, const std::string &content) {
    write_text_file(dir / name, content);
    hashes[name] = {{"sha1", git_blob_sha1(content)}, {"bytes", content.size()}};
    files.files.push_back(name);
  };

  std::string config_text = format_config(c);
  put("config.ini", config_text);
  std::string csv = series_csv(c, run.series);
  put("series.csv", csv);
  put("series.json", series_json(c, run.series).dump(1) + "\n");

  json checkpoints = json::array();
  for (const Checkpoint &cp : run.checkpoints) {
    std::string name = checkpoint_name(cp.step);
    std::string bytes = encode_field(cp.field);
    write_text_file(dir / name, bytes);
    checkpoints.push_back({{"t", cp.t},
                           {"step", cp.step},
                           {"path", name},
                           {"sha1", git_blob_sha1(bytes)}});
    files.files.push_back(name);
  }
  if (run.final_field) {
    std::string bytes = encode_field(*run.final_field);
    put("final.field", bytes);
  }

  if (!run.series.empty()) {
    PlotInput in;
    in.config = c;
    auto [header, rows] = read_csv(csv, "series.csv");
    in.header = std::move(header);
    in.rows = std::move(rows);
    for (const std::string &name : write_plots(in, dir)) {
      std::string svg = read_text_file(dir / name);
      hashes[name] = {{"sha1", git_blob_sha1(svg)}, {"bytes", svg.size()}};
      files.files.push_back(name);
    }
  }

  // Wall-clock timing is kept apart: it is the only nondeterministic output.
  std::string timing = "step,seconds\n";
  for (std::size_t i = 0; i < run.step_seconds.size(); ++i)
    timing += std::to_string(i + 1) + "," + format_double(run.step_seconds[i]) +
              "\n";
  write_text_file(dir / "timing.csv", timing);
  files.files.push_back("timing.csv");

  json m;
  m["tool"] = "inls";
  m["status"] = status;
  m["versions"] = versions_json();
  m["config_text"] = config_text;
  m["seed"] = c.initial.seed;
  m["regime"] = report_json(run.regime);
  m["steps"] = c.steps();
  m["samples"] = run.series.size();
  m["t_wrap"] = run.t_wrap;
  m["wrap_reached"] = run.wrap_reached;
  m["trusted_window"] = {run.trusted_begin(), run.trusted_end()};
  m["morawetz_abs_initial"] = run.morawetz_abs_initial;
  m["checkpoints"] = checkpoints;
  m["files"] = hashes;
  write_text_file(dir / "manifest.json", m.dump(2) + "\n");
  files.files.push_back("manifest.json");
  return files;
}

RunFiles run_to_directory(const RunConfig &config, const fs::path &dir) {
  try {
    RunOutput out = evolve(config);
    return write_run(out, dir, "ok");
  } catch (const StepBlowup &e) {
    if (e.partial())
      write_run(*e.partial(), dir, "blowup");
    throw;
  }
}

RunOutput load_run(const fs::path &run_dir) {
  RunOutput run;
  run.config = parse_config(read_text_file(run_dir / "config.ini"));
  json m;
  try {
    m = json::parse(read_text_file(run_dir / "manifest.json"));
  } catch (const json::exception &e) {
    throw ValidationError("manifest.json: " + std::string(e.what()));
  }
  std::string csv = read_text_file(run_dir / "series.csv");
  if (m.contains("files") && m["files"].contains("series.csv") &&
      m["files"]["series.csv"]["sha1"].get<std::string>() != git_blob_sha1(csv))
    throw ValidationError("series.csv does not match its manifest hash");
  run.series = parse_series_csv(run.config, csv);
  run.regime = classify_regime(run.config.params);
  run.t_wrap = m.value("t_wrap", 0.0);
  run.wrap_reached = m.value("wrap_reached", false);
  run.morawetz_abs_initial = m.value("morawetz_abs_initial", 0.0);
  for (const auto &cp : m.value("checkpoints", json::array())) {
    fs::path p = run_dir / cp.at("path").get<std::string>();
    if (!fs::exists(p))
      throw IoError("checkpoint listed in the manifest is missing: " +
                    p.string());
    run.checkpoints.push_back(Checkpoint{cp.at("t").get<double>(),
                                         cp.at("step").get<long>(),
                                         read_field(p)});
  }
  if (fs::exists(run_dir / "final.field"))
    run.final_field = read_field(run_dir / "final.field");
  return run;
}

// ---------------------------------------------------------------------------
// Verification

bool VerifyTable::ok() const {
  return std::all_of(rows.begin(), rows.end(),
                     [](const VerifyRow &r) { return r.pass || !r.asserted; });
}

json VerifyTable::to_json() const {
  json checks = json::array();
  for (const VerifyRow &r : rows)
    checks.push_back({{"name", r.name},
                      {"value", std::isfinite(r.value) ? json(r.value) : json(nullptr)},
                      {"tolerance", r.tolerance},
                      {"asserted", r.asserted},
                      {"pass", r.pass},
                      {"note", r.note}});
  return {{"ok", ok()}, {"checks", checks}};
}

std::string VerifyTable::to_text() const {
  std::size_t w = 4;
  for (const VerifyRow &r : rows)
    w = std::max(w, r.name.size());
  std::ostringstream o;
  o << std::left << std::setw(static_cast<int>(w) + 2) << "check"
    << std::setw(14) << "value" << std::setw(12) << "tolerance" << "result\n";
  for (const VerifyRow &r : rows) {
    std::string res = r.pass ? "pass" : (r.asserted ? "FAIL" : "fail (report)");
    o << std::left << std::setw(static_cast<int>(w) + 2) << r.name
      << std::setw(14) << fmt("%.4g", r.value) << std::setw(12)
      << fmt("%.3g", r.tolerance) << res;
    if (!r.note.empty())
      o << "  " << r.note;
    o << "\n";
  }
  return o.str();
}

VerifyTable verify_run(const RunOutput &run) {
  VerifyTable table;
  const RunConfig &c = run.config;
  const auto &s = run.series;
  const int d = c.grid.d;
  auto add = [&](std::string name, double value, double tol, bool asserted,
                 bool pass, std::string note = "") {
    table.rows.push_back({std::move(name), value, tol, asserted, pass,
                          std::move(note)});
  };
  if (s.empty())
    throw ValidationError("run has no samples");

  double m0 = s.front().mass, e0 = s.front().energy;
  double mass_drift = 0.0, energy_drift = 0.0, grad_excess = -INFINITY;
  for (const DiagnosticSample &x : s) {
    mass_drift = std::max(mass_drift, std::abs(x.mass - m0) / m0);
    energy_drift = std::max(energy_drift,
                            std::abs(x.energy - e0) / std::max(std::abs(e0), 1e-300));
    grad_excess = std::max(grad_excess, 2.0 * x.kinetic - 2.0 * e0);
  }
  add("mass_drift", mass_drift, 1e-10, true, mass_drift < 1e-10);
  add("energy_drift", energy_drift, 1e-5, false, energy_drift < 1e-5);
  if (c.params.mu == -1) {
    double rel = grad_excess / std::max(2.0 * std::abs(e0), 1e-300);
    add("gradient_below_2E0", rel, 1e-5, true, rel <= 1e-5,
        "max (||grad u||^2 - 2E(0)) / 2E(0)");
  }

  // Localized identities only hold before mass reaches the box edge.
  const double horizon = run.t_wrap * (1.0 + 1e-12);
  std::vector<DiagnosticSample> box;
  for (const DiagnosticSample &x : s)
    if (std::abs(x.t) <= horizon)
      box.push_back(x);
  const std::string box_note = "|t| <= t_wrap = " + fmt("%.6g", run.t_wrap);

  if (c.wants("morawetz") && c.wants("morawetz_fd")) {
    double eq = 0.0, es = 0.0;
    int used = 0;
    for (const DiagnosticSample &x : box) {
      if (std::isnan(x.fd_quadratic))
        continue;
      ++used;
      eq = std::max(eq, std::abs(x.fd_quadratic - x.rhs_quadratic) /
                            std::abs(x.rhs_quadratic));
      es = std::max(es, std::abs(x.fd_smoothed - x.rhs_smoothed) /
                            std::abs(x.rhs_smoothed));
    }
    if (used > 0) {
      add("morawetz_identity_quadratic", eq, 1e-3, d <= 2, eq < 1e-3,
          "max relative gap, " + box_note);
      add("morawetz_identity_smoothed", es, 1e-3, false, es < 1e-3, box_note);
    }
  }

  if (c.wants("morawetz")) {
    double min_integrand = INFINITY;
    for (const DiagnosticSample &x : box)
      min_integrand = std::min(min_integrand, x.morawetz_integrand);
    add("morawetz_integrand_nonnegative", min_integrand, 0.0, true,
        min_integrand >= 0.0);
    if (d >= 2) {
      SpacetimeIntegral si =
          morawetz_spacetime_integral(box, c.params, run.morawetz_abs_initial);
      double worst = -INFINITY;
      for (std::size_t i = 0; i < si.running.size(); ++i)
        worst = std::max(worst, si.running[i] / si.running_ceiling[i]);
      add("spacetime_integral_below_ceiling", worst, 1.0, d == 3, worst <= 1.0,
          "max running integral / ceiling, " + box_note);
    }
    double scale = 0.0, worst_drop = 0.0;
    for (const DiagnosticSample &x : box)
      scale = std::max(scale, std::abs(x.morawetz_smoothed));
    for (std::size_t i = 1; i < box.size(); ++i) {
      double change = (box[i].morawetz_smoothed - box[i - 1].morawetz_smoothed) *
                      (c.direction > 0 ? 1.0 : -1.0);
      worst_drop = std::max(worst_drop, -change);
    }
    double rel = scale > 0 ? worst_drop / scale : 0.0;
    add("smoothed_action_monotone", rel, 1e-6, d == 3, rel <= 1e-6,
        "largest decrease / max |M|, " + box_note);
  }

  if (auto qi = decay_exponent(c); qi && c.wants("lq")) {
    try {
      DecayFit fit = decay_fit(s, c.lq[*qi], *qi, d, run.trusted_begin(),
                               run.trusted_end());
      double rel = std::abs(fit.fitted - fit.theoretical) / std::abs(fit.theoretical);
      add("decay_exponent_q" + exponent_label(c.lq[*qi]), fit.fitted, 0.15,
          c.free_evolution, rel <= 0.15,
          "theoretical " + fmt("%.4g", fit.theoretical) + ", relative gap " +
              fmt("%.3g", rel));
    } catch (const WindowTooShort &e) {
      add("decay_exponent", kNaN, 0.15, false, false, e.what());
    }
  }

  if (run.final_field) {
    SingularWeight w = run.config.free_evolution
                           ? SingularWeight::zero(c.grid)
                           : SingularWeight::build(c.grid, c.params.b_value());
    double peak = lq_norm(*run.final_field, INFINITY);
    double res = momentum_bracket_residual(*run.final_field, c.params, w);
    double scaled = peak > 0 ? res / std::pow(peak, c.params.alpha_value() + 2.0)
                             : 0.0;
    add("momentum_bracket_final", scaled, 1e-8, false, scaled < 1e-8,
        "scaled by peak^(alpha+2)");
  }
  return table;
}

// ---------------------------------------------------------------------------
// Scattering artifacts

json ScatterSummary::to_json() const {
  json d = json::array(), r = json::array();
  for (const CauchyDelta &x : deltas)
    d.push_back({{"t", x.t}, {"delta", x.delta}});
  for (const auto &[t, v] : residuals)
    r.push_back({{"t", t}, {"residual", v}});
  return {{"t_extract", t_extract},
          {"trusted_checkpoints", trusted_checkpoints},
          {"cauchy_deltas", d},
          {"residuals", r}};
}

ScatterSummary scatter_run_dir(const fs::path &run_dir) {
  RunOutput run = load_run(run_dir);
  ScatteringState st = extract_scattering_state(
      run.checkpoints, run.trusted_begin(), run.trusted_end());
  write_field(run_dir / "u_plus.field", st.u_plus);

  ScatterSummary sum;
  sum.t_extract = st.t_extract;
  sum.deltas = st.trusted_deltas;
  sum.trusted_checkpoints = st.trusted_deltas.size() + 1;
  std::string cauchy = "t,delta\n";
  for (const CauchyDelta &x : st.trusted_deltas)
    cauchy += format_double(x.t) + "," + format_double(x.delta) + "\n";
  write_text_file(run_dir / "cauchy.csv", cauchy);
  std::string res = "t,h1_delta_prev,residual\n";
  Curve dcurve{"Cauchy delta", {}, {}}, rcurve{"residual", {}, {}};
  for (const ScatteringRecord &r : st.records) {
    res += format_double(r.t) + "," + format_double(r.h1_delta_prev) + "," +
           format_double(r.residual) + "\n";
    sum.residuals.emplace_back(r.t, r.residual);
    rcurve.x.push_back(std::abs(r.t));
    rcurve.y.push_back(r.residual);
  }
  for (const CauchyDelta &x : st.trusted_deltas) {
    dcurve.x.push_back(std::abs(x.t));
    dcurve.y.push_back(x.delta);
  }
  write_text_file(run_dir / "residuals.csv", res);
  write_text_file(run_dir / "scatter.svg",
                  svg_plot("Scattering state", "|t|", "H1 distance",
                           {dcurve, rcurve}, false, true));
  return sum;
}

// ---------------------------------------------------------------------------
// Sweeps

fs::path resolve_output(const fs::path &p) {
  if (p.is_absolute())
    return p;
  if (const char *root = std::getenv("INLS_OUTPUT_ROOT"); root && *root)
    return fs::path(root) / p;
  return p;
}

std::vector<SweepResult> sweep(const std::vector<fs::path> &configs,
                               const fs::path &root, int threads,
                               std::optional<std::uint64_t> seed_override) {
  if (threads < 1)
    throw ValidationError("sweep needs at least one worker thread");
  std::vector<SweepResult> results(configs.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    while (true) {
      std::size_t i = next.fetch_add(1);
      if (i >= configs.size())
        return;
      SweepResult &r = results[i];
      r.config = configs[i].string();
      r.dir = root / configs[i].stem();
      try {
        RunConfig c = parse_config(read_text_file(configs[i]));
        if (seed_override)
          c.initial.seed = *seed_override;
        run_to_directory(c, r.dir);
        r.message = "ok";
      } catch (const Error &e) {
        r.exit_code = static_cast<int>(e.code());
        r.message = e.what();
      } catch (const std::exception &e) {
        r.exit_code = static_cast<int>(ExitCode::internal);
        r.message = e.what();
      }
    }
  };
  std::vector<std::thread> pool;
  int n = std::min<int>(threads, static_cast<int>(std::max<std::size_t>(1, configs.size())));
  for (int k = 0; k < n; ++k)
    pool.emplace_back(worker);
  for (auto &t : pool)
    t.join();
  return results;
}

} // namespace inls
