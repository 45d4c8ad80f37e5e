// Copyright 2026 The attestkit Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0

// Command line front end. One binary, subcommand per operation:
//
//   attestkit [--config <file>] [--print-config] <command> [args]
//
// All diagnostic chatter goes to stderr; stdout carries machine readable
// "KEY: value" lines only. Exit codes: 0 success, 1 operational failure,
// 2 usage error.

#include <algorithm>
#include <cctype>
#include <csignal>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "attestkit/attestkit.hpp"

namespace attestkit {
namespace cli {

constexpr const char* kUsage =
    "usage: attestkit [--config <file>] [--print-config] <command> [args]\n"
    "\n"
    "commands:\n"
    "  take-ownership <ownerPwd> <srkPwd> | --fixed\n"
    "  clear-ownership <ownerPwd> | --fixed\n"
    "  create-server-keypair <tag> [algorithm] [bits]\n"
    "  manage-khl [append <imaFile> | overwrite <imaFile>]\n"
    "  pca-server [--oneshot]\n"
    "  ra-server [--oneshot]\n"
    "  pca-client <ownerPwd> <srkPwd> <aikPwd> <aikLabel> <host> <port> | "
    "--fixed\n"
    "  ra-client <srkPwd> <aikPwd> <aikLabel> <host> <port> | --fixed\n"
    "  demo <good|evil>\n";

int usage(const std::string& message) {
  if (!message.empty()) {
    std::cerr << "attestkit: " << message << "\n";
  }
  std::cerr << kUsage;
  return 2;
}

int fail(const std::string& message) {
  std::cerr << "attestkit: " << message << "\n";
  return 1;
}

bool is_fixed_flag(const std::string& arg) {
  return arg == "--fixed" || arg == "/f";
}

// Extracts --config/--print-config from anywhere on the line; everything
// else stays in order as command plus positionals.
struct CommandLine {
  Config cfg;
  bool print_config = false;
  std::vector<std::string> args;
};

std::optional<CommandLine> parse_command_line(int argc, char** argv,
                                              int& exit_code) {
  CommandLine cl;
  std::optional<std::filesystem::path> cfg_path;
  for (int i = 1; i < argc; ++i) {
    std::string arg = argv[i];
    if (arg == "--config") {
      if (i + 1 >= argc) {
        exit_code = usage("--config needs a file argument");
        return std::nullopt;
      }
      cfg_path = argv[++i];
    } else if (arg == "--print-config") {
      cl.print_config = true;
    } else {
      cl.args.push_back(std::move(arg));
    }
  }
  if (cfg_path) {
    cl.cfg = Config::load(*cfg_path);
  }
  return cl;
}

std::optional<uint16_t> parse_port(const std::string& text) {
  if (text.empty() || text.size() > 5 ||
      !std::all_of(text.begin(), text.end(),
                   [](unsigned char c) { return std::isdigit(c); })) {
    return std::nullopt;
  }
  unsigned long value = std::stoul(text);
  if (value < 1 || value > 65535) {
    return std::nullopt;
  }
  return static_cast<uint16_t>(value);
}

KeyStorage open_key_storage(const Config& cfg) {
  return KeyStorage(cfg.path("KeyStorageBaseDir"), cfg.path("KeyStorageDB"));
}

// Loads a full keypair stored by create-server-keypair, or explains how to
// make one.
std::optional<RsaKeyPair> load_server_keys(const Config& cfg,
                                           const std::string& tag) {
  KeyStorage keys = open_key_storage(cfg);
  if (!keys.has_tag(tag)) {
    std::cerr << "attestkit: no server keypair stored under tag `" << tag
              << "`; run `attestkit create-server-keypair " << tag
              << "` first\n";
    return std::nullopt;
  }
  RsaKeyPair pair;
  pair.public_part = keys.get_public(tag);
  pair.private_part = keys.get_private(tag);
  return pair;
}

int cmd_take_ownership(const CommandLine& cl) {
  std::string owner_pwd;
  std::string srk_pwd;
  if (cl.args.size() == 2 && is_fixed_flag(cl.args[1])) {
    owner_pwd = cl.cfg.get("OwnerPwd");
    srk_pwd = cl.cfg.get("SRKPwd");
  } else if (cl.args.size() == 3 && !is_fixed_flag(cl.args[1]) &&
             !is_fixed_flag(cl.args[2])) {
    owner_pwd = cl.args[1];
    srk_pwd = cl.args[2];
  } else {
    return usage("take-ownership needs <ownerPwd> <srkPwd> or --fixed");
  }
  SoftTpm tpm = SoftTpm::open(cl.cfg);
  tpm.take_ownership(owner_pwd, srk_pwd);
  std::cout << "OWNED: yes\n";
  return 0;
}

int cmd_clear_ownership(const CommandLine& cl) {
  std::string owner_pwd;
  if (cl.args.size() == 2 && is_fixed_flag(cl.args[1])) {
    owner_pwd = cl.cfg.get("OwnerPwd");
  } else if (cl.args.size() == 2) {
    owner_pwd = cl.args[1];
  } else {
    return usage("clear-ownership needs <ownerPwd> or --fixed");
  }
  SoftTpm tpm = SoftTpm::load(cl.cfg);
  tpm.clear_ownership(owner_pwd);
  std::cout << "OWNED: no\n";
  return 0;
}

int cmd_create_server_keypair(const CommandLine& cl) {
  if (cl.args.size() < 2 || cl.args.size() > 4) {
    return usage("create-server-keypair needs <tag> [algorithm] [bits]");
  }
  const std::string& tag = cl.args[1];
  std::string algorithm = cl.args.size() >= 3 ? cl.args[2]
                                              : cl.cfg.get("ServerKeyAlgorithm");
  std::string upper = algorithm;
  std::transform(upper.begin(), upper.end(), upper.begin(),
                 [](unsigned char c) { return std::toupper(c); });
  if (upper != "RSA") {
    return usage("unsupported key algorithm `" + algorithm +
                 "`; only RSA is available");
  }
  uint64_t bits = 0;
  if (cl.args.size() == 4) {
    try {
      bits = std::stoull(cl.args[3]);
    } catch (const std::exception&) {
      return usage("key size `" + cl.args[3] + "` is not a number");
    }
  } else {
    bits = cl.cfg.integer("ServerKeySize");
  }
  if (bits < 512 || bits > 8192) {
    return usage("key size must lie between 512 and 8192 bits");
  }

  RsaKeyPair pair = rsa_generate(static_cast<int>(bits));
  KeyStorage keys = open_key_storage(cl.cfg);
  std::vector<std::string> displaced =
      keys.put(tag, tag + ".pub", pair.public_part, tag + ".priv",
               pair.private_part);
  for (const std::string& name : displaced) {
    std::cout << "DISPLACED: " << name << "\n";
  }
  std::cout << "KEY-TAG: " << tag << "\n";
  std::cout << "KEY-BITS: " << bits << "\n";
  return 0;
}

// --- known hashes list maintenance ----------------------------------------

void save_khl(const KnownHashesList& khl, const std::filesystem::path& path) {
  if (path.has_parent_path()) {
    std::filesystem::create_directories(path.parent_path());
  }
  khl.save(path);
}

void khl_print_entry(const std::string& hash, const std::string& path) {
  std::cout << hash << "\t" << path << "\n";
}

// Pages through the whole list, ten entries at a time. Between pages a line
// is read from `in`; "q" stops early.
void khl_view(const KnownHashesList& khl, std::istream& in) {
  size_t shown = 0;
  for (const auto& [hash, path] : khl.entries()) {
    khl_print_entry(hash, path);
    ++shown;
    if (shown % 10 == 0 && shown < khl.size()) {
      std::cout << "-- more --\n" << std::flush;
      std::string line;
      if (!std::getline(in, line) || line == "q") {
        return;
      }
    }
  }
  std::cout << "TOTAL: " << khl.size() << "\n";
}

void khl_search(const KnownHashesList& khl, const std::string& needle) {
  size_t matches = 0;
  for (const auto& [hash, path] : khl.entries()) {
    if (hash.find(needle) != std::string::npos ||
        path.find(needle) != std::string::npos) {
      khl_print_entry(hash, path);
      ++matches;
    }
  }
  std::cout << "MATCHES: " << matches << "\n";
}

int khl_console(const Config& cfg) {
  std::filesystem::path path = cfg.path("RAServer_KnownHashesList");
  KnownHashesList khl;
  if (std::filesystem::exists(path)) {
    khl = KnownHashesList::load(path);
  }
  bool dirty = false;
  std::string line;
  std::cerr << "khl> " << std::flush;
  while (std::getline(std::cin, line)) {
    if (line == "quit" || line == "q") {
      break;
    }
    if (line == "view") {
      khl_view(khl, std::cin);
    } else if (line.rfind("search ", 0) == 0) {
      khl_search(khl, line.substr(7));
    } else if (line.rfind("remove ", 0) == 0) {
      size_t removed = khl.remove_where_tag_contains(line.substr(7));
      dirty = dirty || removed > 0;
      std::cout << "REMOVED: " << removed << "\n";
    } else if (!line.empty()) {
      std::cout << "commands: view | search <s> | remove <s> | quit\n";
    }
    std::cerr << "khl> " << std::flush;
  }
  if (dirty) {
    save_khl(khl, path);
    std::cout << "SAVED: " << path.string() << "\n";
  }
  return 0;
}

int cmd_manage_khl(const CommandLine& cl) {
  if (cl.args.size() == 1) {
    return khl_console(cl.cfg);
  }
  if (cl.args.size() != 3) {
    return usage("manage-khl takes no arguments (console) or "
                 "`append <imaFile>` / `overwrite <imaFile>`");
  }
  std::string mode = cl.args[1];
  if (mode == "/a") {
    mode = "append";
  } else if (mode == "/o") {
    mode = "overwrite";
  }
  if (mode != "append" && mode != "overwrite") {
    return usage("unknown manage-khl mode `" + cl.args[1] + "`");
  }
  std::filesystem::path path = cl.cfg.path("RAServer_KnownHashesList");
  KnownHashesList khl;
  if (mode == "append" && std::filesystem::exists(path)) {
    khl = KnownHashesList::load(path);
  }
  khl.add_measurements(measurement_list_from_file(cl.args[2]));
  save_khl(khl, path);
  std::cout << "KHL-FILE: " << path.string() << "\n";
  std::cout << "KHL-SIZE: " << khl.size() << "\n";
  return 0;
}

// --- servers ---------------------------------------------------------------

// Reads the configured port but, unlike client-side lookups, lets 0 through
// so a harness can bind an ephemeral port and learn it from the PORT line.
uint16_t server_port(const Config& cfg, const std::string& key) {
  uint64_t value = cfg.integer(key);
  if (value > 65535) {
    throw ParseError("config key " + key + " is not a port: " +
                     cfg.get(key));
  }
  return static_cast<uint16_t>(value);
}

const char* pca_outcome_name(PcaOutcome outcome) {
  switch (outcome) {
    case PcaOutcome::kIssued:
      return "issued";
    case PcaOutcome::kBadRequest:
      return "bad-request";
    case PcaOutcome::kRejectedEk:
      return "rejected-ek";
    case PcaOutcome::kRejectedNonce:
      return "rejected-nonce";
  }
  return "unknown";
}

int cmd_pca_server(const CommandLine& cl) {
  bool oneshot = false;
  if (cl.args.size() == 2 && cl.args[1] == "--oneshot") {
    oneshot = true;
  } else if (cl.args.size() != 1) {
    return usage("pca-server takes only --oneshot");
  }
  std::optional<RsaKeyPair> keys =
      load_server_keys(cl.cfg, cl.cfg.get("PCAServer_KeyTag"));
  if (!keys) {
    return 1;
  }
  PcaServerConfig sc = pca_server_config(cl.cfg, *keys);
  Listener listener(server_port(cl.cfg, "PCAServerPort"));
  std::cout << "PORT: " << listener.local_port() << "\n" << std::flush;
  for (;;) {
    Endpoint peer = listener.accept();
    try {
      PcaOutcome outcome = pca_server_handle(peer, sc);
      std::cout << "SESSION: " << pca_outcome_name(outcome) << "\n"
                << std::flush;
    } catch (const Error& e) {
      std::cerr << "attestkit: session failed: " << e.what() << "\n";
      if (oneshot) {
        return 1;
      }
    }
    if (oneshot) {
      return 0;
    }
  }
}

int cmd_ra_server(const CommandLine& cl) {
  bool oneshot = false;
  if (cl.args.size() == 2 && cl.args[1] == "--oneshot") {
    oneshot = true;
  } else if (cl.args.size() != 1) {
    return usage("ra-server takes only --oneshot");
  }
  std::optional<RsaKeyPair> keys =
      load_server_keys(cl.cfg, cl.cfg.get("RAServer_KeyTag"));
  if (!keys) {
    return 1;
  }
  std::string pca_tag = cl.cfg.get("PCAServer_KeyTag");
  KeyStorage storage = open_key_storage(cl.cfg);
  if (!storage.has_tag(pca_tag)) {
    return fail("no trusted certifier key under tag `" + pca_tag +
                "`; run `attestkit create-server-keypair " + pca_tag +
                "` first");
  }
  std::filesystem::path khl_path = cl.cfg.path("RAServer_KnownHashesList");
  if (!std::filesystem::exists(khl_path)) {
    return fail("known hashes list " + khl_path.string() +
                " is missing; populate it with `attestkit manage-khl`");
  }
  RaServerConfig sc = ra_server_config(cl.cfg, *keys,
                                       KnownHashesList::load(khl_path),
                                       storage.get_public(pca_tag));
  Listener listener(server_port(cl.cfg, "RAServerPort"));
  std::cout << "PORT: " << listener.local_port() << "\n" << std::flush;
  for (;;) {
    Endpoint peer = listener.accept();
    try {
      RaVerdict verdict = ra_server_handle(peer, sc);
      if (verdict.ok) {
        std::cout << "VERDICT: trusted\n" << std::flush;
      } else {
        std::cout << "VERDICT: untrusted ("
                  << ra_failure_reason(*verdict.failure) << ")\n"
                  << std::flush;
      }
    } catch (const Error& e) {
      std::cerr << "attestkit: session failed: " << e.what() << "\n";
      if (oneshot) {
        return 1;
      }
    }
    if (oneshot) {
      return 0;
    }
  }
}

// --- clients ---------------------------------------------------------------

int cmd_pca_client(const CommandLine& cl) {
  PcaClientParams params;
  if (cl.args.size() == 2 && is_fixed_flag(cl.args[1])) {
    params.host = cl.cfg.get("PCAServerIP");
    params.port = cl.cfg.port("PCAServerPort");
    params.aik_label = cl.cfg.get("PCAdefault_AIKtag");
    params.srk_pwd = cl.cfg.get("SRKPwd");
    params.aik_pwd = cl.cfg.get("AIKPwd");
  } else if (cl.args.size() == 7) {
    for (size_t i = 1; i < cl.args.size(); ++i) {
      if (is_fixed_flag(cl.args[i])) {
        return usage("--fixed replaces the positional parameters");
      }
    }
    std::optional<uint16_t> port = parse_port(cl.args[6]);
    if (!port) {
      return usage("`" + cl.args[6] + "` is not a port number");
    }
    params.host = cl.args[5];
    params.port = *port;
    params.srk_pwd = cl.args[2];
    params.aik_pwd = cl.args[3];
    params.aik_label = cl.args[4];
  } else {
    return usage(
        "pca-client needs <ownerPwd> <srkPwd> <aikPwd> <aikLabel> <host> "
        "<port> or --fixed");
  }

  KeyStorage storage = open_key_storage(cl.cfg);
  std::string pca_tag = cl.cfg.get("PCAServer_KeyTag");
  if (!storage.has_tag(pca_tag)) {
    return fail("no certifier public key under tag `" + pca_tag +
                "`; run `attestkit create-server-keypair " + pca_tag +
                "` first");
  }
  params.pca_pub = storage.get_public(pca_tag);

  SoftTpm tpm = SoftTpm::load(cl.cfg);
  TpmKeyDb keydb(cl.cfg.path("TpmKeyDBfile"));
  CertDb certdb(cl.cfg.path("CertDBfile"));
  PcaClientResult result = pca_client_run(tpm, keydb, certdb, params);
  std::cout << "AIK-UUID: " << result.aik_uuid.text() << "\n";
  std::cout << "AIK-CERT-SUBJECT: " << result.aik_cert.subject_label << "\n";
  return 0;
}

int cmd_ra_client(const CommandLine& cl) {
  RaClientParams params;
  if (cl.args.size() == 2 && is_fixed_flag(cl.args[1])) {
    params.host = cl.cfg.get("RAServerIP");
    params.port = cl.cfg.port("RAServerPort");
    params.aik_label = cl.cfg.get("RAdefault_AIKtag");
    params.srk_pwd = cl.cfg.get("SRKPwd");
    params.aik_pwd = cl.cfg.get("AIKPwd");
  } else if (cl.args.size() == 6) {
    for (size_t i = 1; i < cl.args.size(); ++i) {
      if (is_fixed_flag(cl.args[i])) {
        return usage("--fixed replaces the positional parameters");
      }
    }
    std::optional<uint16_t> port = parse_port(cl.args[5]);
    if (!port) {
      return usage("`" + cl.args[5] + "` is not a port number");
    }
    params.host = cl.args[4];
    params.port = *port;
    params.srk_pwd = cl.args[1];
    params.aik_pwd = cl.args[2];
    params.aik_label = cl.args[3];
  } else {
    return usage(
        "ra-client needs <srkPwd> <aikPwd> <aikLabel> <host> <port> or "
        "--fixed");
  }
  params.ima_log = cl.cfg.path("IMAruntimeFile");

  SoftTpm tpm = SoftTpm::load(cl.cfg);
  TpmKeyDb keydb(cl.cfg.path("TpmKeyDBfile"));
  CertDb certdb(cl.cfg.path("CertDBfile"));
  Uuid uuid = ra_client_run(tpm, keydb, certdb, params);
  std::cout << "ATTESTATION-UUID: " << uuid.text() << "\n";
  return 0;
}

int cmd_demo(const CommandLine& cl) {
  if (cl.args.size() != 2 ||
      (cl.args[1] != "good" && cl.args[1] != "evil")) {
    return usage("demo needs `good` or `evil`");
  }
  DemoVariant variant =
      cl.args[1] == "good" ? DemoVariant::kGood : DemoVariant::kEvil;
  return run_demo(variant, cl.cfg, std::cout);
}

int dispatch(const CommandLine& cl) {
  const std::string& command = cl.args[0];
  if (command == "take-ownership") {
    return cmd_take_ownership(cl);
  }
  if (command == "clear-ownership") {
    return cmd_clear_ownership(cl);
  }
  if (command == "create-server-keypair") {
    return cmd_create_server_keypair(cl);
  }
  if (command == "manage-khl") {
    return cmd_manage_khl(cl);
  }
  if (command == "pca-server") {
    return cmd_pca_server(cl);
  }
  if (command == "ra-server") {
    return cmd_ra_server(cl);
  }
  if (command == "pca-client") {
    return cmd_pca_client(cl);
  }
  if (command == "ra-client") {
    return cmd_ra_client(cl);
  }
  if (command == "demo") {
    return cmd_demo(cl);
  }
  return usage("unknown command `" + command + "`");
}

}  // namespace cli
}  // namespace attestkit

int main(int argc, char** argv) {
  using namespace attestkit;
  std::signal(SIGPIPE, SIG_IGN);
  int exit_code = 0;
  std::optional<cli::CommandLine> cl;
  try {
    cl = cli::parse_command_line(argc, argv, exit_code);
  } catch (const Error& e) {
    return cli::fail(e.what());
  }
  if (!cl) {
    return exit_code;
  }
  if (cl->print_config) {
    std::cout << cl->cfg.print();
    return 0;
  }
  if (cl->args.empty()) {
    return cli::usage("");
  }
  try {
    return cli::dispatch(*cl);
  } catch (const Error& e) {
    return cli::fail(e.what());
  } catch (const std::exception& e) {
    return cli::fail(e.what());
  }
}
