#include "colf/cli.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <iterator>
#include <sstream>
#include <variant>
#include <vector>

#include <unistd.h>

#include "CLI11.hpp"
#include "json.hpp"

#include "colf/diagnostics.hpp"
#include "colf/substitution.hpp"
#include "colf/surface.hpp"
#include "colf/typecheck.hpp"
#include "colf/unfolding.hpp"
#include "colf/validity.hpp"

namespace colf {

namespace {

bool read_file(const std::string& path, std::string& out) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return false;
  std::ostringstream ss;
  ss << in.rdbuf();
  out = ss.str();
  return true;
}

// Text mode stays silent when there is nothing to report; JSON consumers get
// a document either way.
void emit(const CliConfig& cfg, std::vector<Diagnostic>& diags, std::ostream& out) {
  sort_diagnostics(diags);
  if (diags.empty() && !cfg.json) return;
  if (cfg.json)
    out << render_json(diags, cfg.path);
  else
    out << render_text(diags, cfg.path, cfg.color);
}

void append(std::vector<Diagnostic>& into, std::vector<Diagnostic> more) {
  into.insert(into.end(), std::make_move_iterator(more.begin()),
              std::make_move_iterator(more.end()));
}

int load(const CliConfig& cfg, std::ostream& err, std::string& src) {
  if (read_file(cfg.path, src)) return 0;
  err << "error: cannot read '" << cfg.path << "'\n";
  return 2;
}

int cmd_check(const CliConfig& cfg, std::ostream& out, std::ostream& err) {
  std::string src;
  if (int rc = load(cfg, err, src)) return rc;
  std::vector<Diagnostic> diags;
  Signature sig = parse_and_elaborate(src, diags);
  append(diags, validity_diagnostics(validity_report(sig)));
  append(diags, check_signature(sig, cfg.depth, cfg.max_memo_entries));
  emit(cfg, diags, out);
  return any_errors(diags) ? 1 : 0;
}

int cmd_unfold(const CliConfig& cfg, std::ostream& out, std::ostream& err) {
  std::string src;
  if (int rc = load(cfg, err, src)) return rc;
  std::vector<Diagnostic> diags;
  Signature sig = parse_and_elaborate(src, diags);
  if (any_errors(diags)) {
    emit(cfg, diags, out);
    return 1;
  }
  const DefDecl* def = sig.find_definition(cfg.name);
  if (!def) {
    err << "error: unknown definition '" << cfg.name << "'\n";
    return 1;
  }
  try {
    Expander ex(sig, cfg.max_memo_entries);
    // Expanding the body equals expanding a reference (contraction costs no
    // depth) and also covers definitions of function type, whose bare
    // references are not eta-long.
    std::string shown = print_term(sig, ex.expand_term(def->body, cfg.depth), cfg.show_implicit);
    if (cfg.json) {
      nlohmann::json doc{{"version", 1},
                         {"file", cfg.path},
                         {"name", cfg.name},
                         {"depth", cfg.depth},
                         {"term", shown}};
      out << doc.dump(2) << "\n";
    } else {
      out << shown << "\n";
    }
    return 0;
  } catch (const ExpandError& e) {
    std::vector<Diagnostic> ds{Diagnostic::error(e.code, e.what())};
    emit(cfg, ds, out);
    return 1;
  }
}

int cmd_validity(const CliConfig& cfg, std::ostream& out, std::ostream& err) {
  std::string src;
  if (int rc = load(cfg, err, src)) return rc;
  std::vector<Diagnostic> diags;
  Signature sig = parse_and_elaborate(src, diags);
  if (any_errors(diags)) {
    emit(cfg, diags, out);
    return 1;
  }
  ValidityReport rep = validity_report(sig);
  out << (cfg.json ? render_validity_json(rep, cfg.path) : render_validity_text(rep));
  return rep.ok ? 0 : 1;
}

int cmd_erase(const CliConfig& cfg, std::ostream& out, std::ostream& err) {
  std::string src;
  if (int rc = load(cfg, err, src)) return rc;
  std::vector<Diagnostic> diags;
  Signature sig = parse_and_elaborate(src, diags);
  if (any_errors(diags)) {
    emit(cfg, diags, out);
    return 1;
  }
  const Declaration* d = sig.find(cfg.name);
  if (!d) {
    err << "error: unknown declaration '" << cfg.name << "'\n";
    return 1;
  }
  if (std::holds_alternative<KindDecl>(d->decl)) {
    err << "error: '" << cfg.name << "' is a type family and has a kind, not a type\n";
    return 2;
  }
  CanType ty = std::holds_alternative<ConstDecl>(d->decl) ? std::get<ConstDecl>(d->decl).type
                                                          : std::get<DefDecl>(d->decl).type;
  if (!cfg.show_implicit)
    for (std::uint32_t i = d->implicits(); i > 0 && ty.is_pi(); --i) ty = ty.codomain();
  std::string shown = erase(ty).show();
  if (cfg.json) {
    nlohmann::json doc{{"version", 1}, {"file", cfg.path}, {"name", cfg.name}, {"type", shown}};
    out << doc.dump(2) << "\n";
  } else {
    out << shown << "\n";
  }
  return 0;
}

int cmd_parse(const CliConfig& cfg, std::ostream& out, std::ostream& err) {
  std::string src;
  if (int rc = load(cfg, err, src)) return rc;
  std::vector<Diagnostic> diags;
  Signature sig = parse_and_elaborate(src, diags);
  if (cfg.json) {
    emit(cfg, diags, out);
  } else if (any_errors(diags)) {
    emit(cfg, diags, out);
  } else {
    out << print_signature(sig, cfg.show_implicit);
  }
  return any_errors(diags) ? 1 : 0;
}

}  // namespace

int run_command(const CliConfig& cfg, std::ostream& out, std::ostream& err) {
  if (cfg.command == "check") return cmd_check(cfg, out, err);
  if (cfg.command == "unfold") return cmd_unfold(cfg, out, err);
  if (cfg.command == "validity") return cmd_validity(cfg, out, err);
  if (cfg.command == "erase") return cmd_erase(cfg, out, err);
  if (cfg.command == "parse") return cmd_parse(cfg, out, err);
  err << "error: unknown command '" << cfg.command << "'\n";
  return 2;
}

int run_cli(int argc, char** argv) {
  CliConfig cfg;
  CLI::App app{"depth-indexed checker for coinductive LF signatures"};
  app.require_subcommand(1);

  auto add_common = [&cfg](CLI::App* sub, bool with_depth) {
    sub->add_option("path", cfg.path, "input .colf file")->required();
    if (with_depth)
      sub->add_option("--depth", cfg.depth, "observation depth")->capture_default_str();
    sub->add_flag("--json", cfg.json, "machine-readable output");
    sub->add_flag("--show-implicit", cfg.show_implicit, "print inferred implicit arguments");
    sub->add_option("--max-memo-entries", cfg.max_memo_entries, "expansion memo bound");
  };

  CLI::App* check = app.add_subcommand("check", "type-check every declaration at a depth");
  add_common(check, true);
  CLI::App* unfold = app.add_subcommand("unfold", "expand a recursive definition to a depth");
  add_common(unfold, true);
  unfold->add_option("name", cfg.name, "definition to expand")->required();
  CLI::App* validity = app.add_subcommand("validity", "report productivity of definitions");
  add_common(validity, false);
  CLI::App* erase_cmd = app.add_subcommand("erase", "print a declaration's simple type");
  add_common(erase_cmd, false);
  erase_cmd->add_option("name", cfg.name, "constant or definition")->required();
  CLI::App* parse_cmd = app.add_subcommand("parse", "parse and elaborate, print the result");
  add_common(parse_cmd, false);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  const char* mode = std::getenv("COLFW_COLOR");
  bool never = mode && std::string(mode) == "never";
  cfg.color = !never && isatty(fileno(stdout)) != 0;

  cfg.command = app.get_subcommands().front()->get_name();
  return run_command(cfg, std::cout, std::cerr);
}

}  // namespace colf
