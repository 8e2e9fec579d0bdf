#include <algorithm>
#include <fstream>
#include <iostream>
#include <memory>

#include "CLI11.hpp"
#include "qff/commands.hpp"

namespace {

enum Exit { kPass = 0, kVerifyFail = 1, kCap = 2, kBadConfig = 3 };

void add_common(CLI::App* sub, qff::RunConfig& cfg, std::string& config_path) {
  // a flag given twice (config file, then command line) keeps the later value
  sub->option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  sub->add_option("--q", cfg.q, "field size (prime power)");
  sub->add_option("--p", cfg.p, "characteristic");
  sub->add_option("--r", cfg.r, "extension degree, q = p^r");
  sub->add_option("--m", cfg.m, "genus (start of the sweep)");
  sub->add_option("--m-max", cfg.m_max, "last genus of the sweep");
  sub->add_option("--kind", cfg.kind, "LL, Lq, invLL, L, invL (moment); sigma1..3, cor1 (sigma)");
  sub->add_option("--s", cfg.s, "complex s, e.g. 2 or 1.5+0.3i");
  sub->add_option("--t", cfg.t, "complex t");
  sub->add_option("--epsilon", cfg.epsilon, "epsilon in the error exponents");
  sub->add_option("--tol", cfg.tol, "Euler product tail tolerance");
  sub->add_option("--cap", cfg.cap, "enumeration cap");
  sub->add_option("--threads", cfg.threads, "worker count");
  sub->add_option("--format", cfg.format, "csv or json");
  sub->add_option("--out", cfg.out, "output path (default stdout)");
  sub->add_option("--cache-dir", cfg.cache_dir, "directory for cached families");
  sub->add_option("--config", config_path, "key=value config file; flags override it");
}

// Config entries become flags placed right after the subcommand, so later
// command-line flags win.
std::vector<std::string> expand_config(int argc, char** argv) {
  std::vector<std::string> args(argv, argv + argc);
  std::string path;
  for (std::size_t i = 1; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) path = args[i + 1];
    if (args[i].rfind("--config=", 0) == 0) path = args[i].substr(9);
  }
  if (path.empty() || args.size() < 2) return args;
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read config file " + path);
  std::vector<std::string> flags;
  std::string line;
  while (std::getline(in, line)) {
    auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    auto eq = line.find('=');
    auto trim = [](std::string x) {
      auto b = x.find_first_not_of(" \t\r");
      auto e = x.find_last_not_of(" \t\r");
      return b == std::string::npos ? std::string() : x.substr(b, e - b + 1);
    };
    if (trim(line).empty()) continue;
    if (eq == std::string::npos) throw std::runtime_error("config line without '=': " + line);
    std::string key = trim(line.substr(0, eq)), value = trim(line.substr(eq + 1));
    for (auto& ch : key)
      if (ch == '_') ch = '-';
    if (key == "config") continue;
    flags.push_back("--" + key + "=" + value);
  }
  args.insert(args.begin() + 2, flags.begin(), flags.end());
  return args;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Quadratic extensions of F_q(x): enumeration, L-functions, moments"};
  app.require_subcommand(1);
  qff::RunConfig cfg;
  std::string config_path;
  for (const char* name : {"enumerate", "lpoly", "moment", "verify", "charsum", "sigma"}) {
    auto* sub = app.add_subcommand(name);
    add_common(sub, cfg, config_path);
    sub->callback([&cfg, name] { cfg.command = name; });
  }
  try {
    auto args = expand_config(argc, argv);
    std::reverse(args.begin(), args.end());
    args.pop_back();
    app.parse(args);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? kPass : kBadConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kBadConfig;
  }

  std::unique_ptr<std::ofstream> file;
  if (!cfg.out.empty()) {
    file = std::make_unique<std::ofstream>(cfg.out);
    if (!*file) {
      std::cerr << "error: cannot open " << cfg.out << '\n';
      return kBadConfig;
    }
  }
  std::ostream& table = file ? static_cast<std::ostream&>(*file) : std::cout;

  try {
    const std::string& c = cfg.command;
    if (c == "enumerate") return qff::cmd_enumerate(cfg, file.get(), std::cout);
    if (c == "lpoly") return qff::cmd_lpoly(cfg, table);
    if (c == "moment") return qff::cmd_moment(cfg, table);
    if (c == "verify") return qff::cmd_verify(cfg, table);
    if (c == "charsum") return qff::cmd_charsum(cfg, table, std::cerr);
    if (c == "sigma") return qff::cmd_sigma(cfg, table);
  } catch (const qff::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return e.code() == qff::Errc::CapExceeded ? kCap : kBadConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kBadConfig;
  }
  return kBadConfig;
}
