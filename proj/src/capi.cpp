#include "inls/inls.h"

#include "inls/config.hpp"
#include "inls/outputs.hpp"

#include <cstring>

struct inls_field {
  inls::Field field;
};

namespace {

thread_local std::string g_last_error;

char *dup(const std::string &s) {
  char *p = static_cast<char *>(std::malloc(s.size() + 1));
  if (!p)
    throw std::bad_alloc();
  std::memcpy(p, s.c_str(), s.size() + 1);
  return p;
}

void put(char **out, const std::string &s) {
  if (out)
    *out = dup(s);
}

template <class F> inls_status guard(F &&fn) {
  try {
    g_last_error.clear();
    fn();
    return INLS_OK;
  } catch (const inls::Error &e) {
    g_last_error = e.what();
    return static_cast<inls_status>(e.code());
  } catch (const std::bad_alloc &) {
    g_last_error = "out of memory";
  } catch (const std::exception &e) {
    g_last_error = e.what();
  } catch (...) {
    g_last_error = "unknown error";
  }
  return INLS_ERR_INTERNAL;
}

void require(const void *p, const char *what) {
  if (!p)
    throw inls::ValidationError(std::string(what) + " must not be NULL");
}

std::optional<inls::ExtRational> optional_rational(const char *s) {
  if (!s || !*s)
    return std::nullopt;
  return inls::ExtRational::parse(s);
}

inls::Params make_params(int d, const char *b, const char *alpha, int mu) {
  require(b, "b");
  require(alpha, "alpha");
  inls::Params p;
  p.d = d;
  p.b = inls::ExtRational::parse(b);
  p.alpha = inls::ExtRational::parse(alpha);
  p.mu = mu;
  p.validate();
  return p;
}

} // namespace

extern "C" {

const char *inls_version(void) { return INLS_VERSION; }

const char *inls_last_error(void) { return g_last_error.c_str(); }

void inls_string_free(char *s) { std::free(s); }

inls_status inls_regimes(int d, const char *b, const char *alpha, int mu,
                         int with_certificate, const char *epsilon_hint,
                         const char *tau_hint, char **json_out,
                         char **table_out) {
  return guard([&] {
    require(b, "b");
    inls::json j;
    std::string table;
    if (!alpha || !*alpha) {
      inls::ExtRational bq = inls::ExtRational::parse(b);
      if (!(bq > inls::ExtRational(0)) || bq.is_infinite())
        throw inls::ValidationError("b must be a positive finite rational");
      auto rep = inls::critical_exponents(d, bq);
      j["report"] = inls::report_json(rep);
      table = inls::report_table(rep, nullptr);
    } else {
      inls::Params p = make_params(d, b, alpha, mu);
      auto rep = inls::classify_regime(p);
      j["report"] = inls::report_json(rep);
      std::optional<inls::ExponentCertificate> cert;
      if (with_certificate && rep.flags.scattering) {
        cert = inls::scattering_certificate(p, optional_rational(epsilon_hint),
                                            optional_rational(tau_hint));
        j["certificate"] = inls::certificate_json(*cert);
      } else if (with_certificate) {
        j["certificate"] = nullptr;
      }
      table = inls::report_table(rep, cert ? &*cert : nullptr);
    }
    put(json_out, j.dump(2) + "\n");
    put(table_out, table);
  });
}

inls_status inls_certificate(int d, const char *b, const char *alpha,
                             const char *epsilon_hint, const char *tau_hint,
                             char **json_out, char **table_out) {
  return guard([&] {
    inls::Params p = make_params(d, b, alpha, -1);
    auto cert = inls::scattering_certificate(p, optional_rational(epsilon_hint),
                                             optional_rational(tau_hint));
    auto rep = inls::classify_regime(p);
    put(json_out, inls::certificate_json(cert).dump(2) + "\n");
    put(table_out, inls::report_table(rep, &cert));
  });
}

inls_status inls_config_check(const char *config_text, char **canonical_out) {
  return guard([&] {
    require(config_text, "config text");
    put(canonical_out, inls::format_config(inls::parse_config(config_text)));
  });
}

inls_status inls_run(const char *config_text, const char *out_dir,
                     const uint64_t *seed, char **summary_out) {
  return guard([&] {
    require(config_text, "config text");
    require(out_dir, "output directory");
    inls::RunConfig c = inls::parse_config(config_text);
    if (seed)
      c.initial.seed = *seed;
    inls::fs::path dir = inls::resolve_output(out_dir);
    inls::RunFiles files = inls::run_to_directory(c, dir);
    inls::json s{{"dir", files.dir.string()},
                 {"status", files.status},
                 {"files", files.files}};
    put(summary_out, s.dump(2) + "\n");
  });
}

inls_status inls_verify(const char *run_dir, char **json_out,
                        char **table_out) {
  bool ok = true;
  inls_status st = guard([&] {
    require(run_dir, "run directory");
    inls::fs::path dir = inls::resolve_output(run_dir);
    inls::VerifyTable t = inls::verify_run(inls::load_run(dir));
    std::string text = t.to_json().dump(2) + "\n";
    inls::write_text_file(dir / "verify.json", text);
    put(json_out, text);
    put(table_out, t.to_text());
    ok = t.ok();
  });
  if (st == INLS_OK && !ok) {
    g_last_error = "an asserted identity check failed";
    return INLS_ERR_VALIDATION;
  }
  return st;
}

inls_status inls_scatter(const char *run_dir, char **json_out) {
  return guard([&] {
    require(run_dir, "run directory");
    auto sum = inls::scatter_run_dir(inls::resolve_output(run_dir));
    put(json_out, sum.to_json().dump(2) + "\n");
  });
}

inls_status inls_plot(const char *run_dir) {
  return guard([&] {
    require(run_dir, "run directory");
    inls::emit_plots(inls::resolve_output(run_dir));
  });
}

inls_status inls_sweep(const char *const *config_paths, size_t count,
                       const char *root, int threads, const uint64_t *seed,
                       char **summary_out) {
  int worst = 0;
  inls_status st = guard([&] {
    require(root, "sweep root");
    if (count > 0)
      require(config_paths, "config paths");
    std::vector<inls::fs::path> paths;
    for (size_t i = 0; i < count; ++i) {
      require(config_paths[i], "config path");
      paths.emplace_back(config_paths[i]);
    }
    std::optional<std::uint64_t> s;
    if (seed)
      s = *seed;
    auto results = inls::sweep(paths, inls::resolve_output(root), threads, s);
    inls::json j = inls::json::array();
    for (const auto &r : results) {
      j.push_back({{"config", r.config},
                   {"dir", r.dir.string()},
                   {"exit_code", r.exit_code},
                   {"message", r.message}});
      worst = std::max(worst, r.exit_code);
    }
    put(summary_out, j.dump(2) + "\n");
  });
  if (st == INLS_OK && worst != 0) {
    g_last_error = "one or more sweep runs failed";
    return static_cast<inls_status>(worst);
  }
  return st;
}

inls_status inls_field_read(const char *path, inls_field **out) {
  return guard([&] {
    require(path, "path");
    require(out, "output handle");
    *out = new inls_field{inls::read_field(path)};
  });
}

inls_status inls_field_write(const inls_field *f, const char *path) {
  return guard([&] {
    require(f, "field");
    require(path, "path");
    inls::write_field(path, f->field);
  });
}

void inls_field_free(inls_field *f) { delete f; }

inls_status inls_field_info(const inls_field *f, int *d, int *n, double *L,
                            int *offset) {
  return guard([&] {
    require(f, "field");
    const inls::GridSpec &g = f->field.grid();
    if (d)
      *d = g.d;
    if (n)
      *n = g.n;
    if (L)
      *L = g.L;
    if (offset)
      *offset = g.offset ? 1 : 0;
  });
}

inls_status inls_field_mass(const inls_field *f, double *out) {
  return guard([&] {
    require(f, "field");
    require(out, "output");
    *out = inls::mass(f->field);
  });
}

inls_status inls_field_h1(const inls_field *f, double *out) {
  return guard([&] {
    require(f, "field");
    require(out, "output");
    *out = inls::h1_norm(f->field);
  });
}

inls_status inls_field_lq(const inls_field *f, double q, double *out) {
  return guard([&] {
    require(f, "field");
    require(out, "output");
    *out = inls::lq_norm(f->field, q);
  });
}

inls_status inls_field_free_propagate(const inls_field *f, double t,
                                      inls_field **out) {
  return guard([&] {
    require(f, "field");
    require(out, "output handle");
    *out = new inls_field{inls::free_propagate(f->field, t)};
  });
}

} // extern "C"
