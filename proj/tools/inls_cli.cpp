// Command-line front end over the inls C interface.
#include "inls/inls.h"

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace {

struct Owned {
  char *p = nullptr;
  ~Owned() { inls_string_free(p); }
  std::string str() const { return p ? p : ""; }
};

int report(inls_status st) {
  if (st != INLS_OK)
    std::cerr << "inls: " << inls_last_error() << "\n";
  return static_cast<int>(st);
}

std::optional<std::string> slurp(const std::string &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    return std::nullopt;
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string stem(const std::string &path) {
  std::string base = path.substr(path.find_last_of('/') + 1);
  auto dot = base.find_last_of('.');
  return dot == std::string::npos || dot == 0 ? base : base.substr(0, dot);
}

} // namespace

int main(int argc, char **argv) {
  CLI::App app{"Pseudospectral simulator and verification lab for the "
               "defocusing inhomogeneous NLS"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(inls_version()));

  std::optional<std::uint64_t> seed;
  int threads = 1;
  auto add_common = [&](CLI::App *sub) {
    sub->add_option("--seed", seed, "override the initial-data seed");
    sub->add_option("--threads", threads, "worker threads")
        ->check(CLI::PositiveNumber);
  };

  int d = 3, mu = -1;
  std::string b, alpha, eps, tau, format = "both";
  bool with_cert = false;
  auto add_exponents = [&](CLI::App *sub, bool need_alpha) {
    sub->add_option("--d", d, "dimension")->required();
    sub->add_option("--b", b, "weight exponent (rational)")->required();
    auto *a = sub->add_option("--alpha", alpha, "nonlinearity power (rational)");
    if (need_alpha)
      a->required();
    sub->add_option("--epsilon", eps, "epsilon hint (rational)");
    sub->add_option("--tau", tau, "tau hint (rational, d = 3)");
    sub->add_option("--format", format, "json, table or both")
        ->check(CLI::IsMember({"json", "table", "both"}));
  };

  auto *regimes = app.add_subcommand("regimes", "exponent report");
  add_exponents(regimes, false);
  regimes->add_option("--mu", mu, "sign of the nonlinearity (+1 or -1)");
  regimes->add_flag("--certificate", with_cert, "also search a certificate");

  auto *certificate =
      app.add_subcommand("certificate", "scattering exponent certificate");
  add_exponents(certificate, true);

  std::string config_path, out_dir, run_dir, root = "sweep";
  std::vector<std::string> configs;
  auto *run = app.add_subcommand("run", "evolve a config into a directory");
  run->add_option("config", config_path, "config file")->required();
  run->add_option("out_dir", out_dir, "output directory (default: config stem)");
  add_common(run);

  auto *verify = app.add_subcommand("verify", "identity checks of a run");
  verify->add_option("run_dir", run_dir)->required();
  verify->add_option("--format", format, "json, table or both")
      ->check(CLI::IsMember({"json", "table", "both"}));

  auto *scatter = app.add_subcommand("scatter", "extract the scattering state");
  scatter->add_option("run_dir", run_dir)->required();

  auto *plot = app.add_subcommand("plot", "regenerate the SVG plots of a run");
  plot->add_option("run_dir", run_dir)->required();

  auto *sweep = app.add_subcommand("sweep", "run several configs");
  sweep->add_option("configs", configs, "config files")->required();
  sweep->add_option("--root", root, "output root directory");
  add_common(sweep);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError &e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  const std::uint64_t *seed_ptr = seed ? &*seed : nullptr;
  auto emit = [&](const Owned &json, const Owned &table) {
    if (format != "table")
      std::cout << json.str();
    if (format == "both")
      std::cout << "\n";
    if (format != "json")
      std::cout << table.str();
  };

  if (*regimes) {
    Owned json, table;
    inls_status st = inls_regimes(d, b.c_str(), alpha.empty() ? nullptr : alpha.c_str(),
                                  mu, with_cert ? 1 : 0,
                                  eps.empty() ? nullptr : eps.c_str(),
                                  tau.empty() ? nullptr : tau.c_str(), &json.p,
                                  &table.p);
    if (st == INLS_OK)
      emit(json, table);
    return report(st);
  }
  if (*certificate) {
    Owned json, table;
    inls_status st = inls_certificate(d, b.c_str(), alpha.c_str(),
                                      eps.empty() ? nullptr : eps.c_str(),
                                      tau.empty() ? nullptr : tau.c_str(),
                                      &json.p, &table.p);
    if (st == INLS_OK)
      emit(json, table);
    return report(st);
  }
  if (*run) {
    auto text = slurp(config_path);
    if (!text) {
      std::cerr << "inls: cannot read " << config_path << "\n";
      return INLS_ERR_IO;
    }
    if (out_dir.empty())
      out_dir = stem(config_path);
    Owned summary;
    inls_status st = inls_run(text->c_str(), out_dir.c_str(), seed_ptr, &summary.p);
    std::cout << summary.str();
    return report(st);
  }
  if (*verify) {
    Owned json, table;
    inls_status st = inls_verify(run_dir.c_str(), &json.p, &table.p);
    emit(json, table);
    return report(st);
  }
  if (*scatter) {
    Owned json;
    inls_status st = inls_scatter(run_dir.c_str(), &json.p);
    std::cout << json.str();
    return report(st);
  }
  if (*plot)
    return report(inls_plot(run_dir.c_str()));
  if (*sweep) {
    std::vector<const char *> ptrs;
    for (const auto &c : configs)
      ptrs.push_back(c.c_str());
    Owned summary;
    inls_status st = inls_sweep(ptrs.data(), ptrs.size(), root.c_str(), threads,
                                seed_ptr, &summary.p);
    std::cout << summary.str();
    return report(st);
  }
  return 0;
}
