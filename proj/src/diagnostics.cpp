#include "colf/diagnostics.hpp"

#include <algorithm>
#include <sstream>
#include <tuple>

#include "json.hpp"

namespace colf {

const char* severity_label(Severity s) {
  switch (s) {
    case Severity::Error: return "error";
    case Severity::Warning: return "warning";
    case Severity::Note: return "note";
  }
  return "?";
}

bool any_errors(const std::vector<Diagnostic>& diags) {
  return std::any_of(diags.begin(), diags.end(),
                     [](const Diagnostic& d) { return d.severity == Severity::Error; });
}

void sort_diagnostics(std::vector<Diagnostic>& diags) {
  std::stable_sort(diags.begin(), diags.end(), [](const Diagnostic& a, const Diagnostic& b) {
    return std::tie(a.span.line, a.span.col, a.severity, a.code, a.message) <
           std::tie(b.span.line, b.span.col, b.severity, b.code, b.message);
  });
}

std::string render_text(const std::vector<Diagnostic>& diags, const std::string& file,
                        bool color) {
  std::ostringstream out;
  for (const Diagnostic& d : diags) {
    out << file << ":";
    if (d.span.known()) out << d.span.line << ":" << d.span.col << ":";
    out << " ";
    if (color) {
      const char* tint = d.severity == Severity::Error     ? "\x1b[31m"
                         : d.severity == Severity::Warning ? "\x1b[33m"
                                                           : "\x1b[36m";
      out << tint << severity_label(d.severity) << "\x1b[0m";
    } else {
      out << severity_label(d.severity);
    }
    out << ": " << d.message << " [" << d.code << "]";
    if (!d.judgments.empty()) out << "\n  in " << d.judgments.back();
    out << "\n";
  }
  return out.str();
}

std::string render_json(const std::vector<Diagnostic>& diags, const std::string& file) {
  nlohmann::json items = nlohmann::json::array();
  for (const Diagnostic& d : diags) {
    nlohmann::json item{
        {"severity", severity_label(d.severity)}, {"code", d.code},
        {"line", d.span.line},                    {"col", d.span.col},
        {"endLine", d.span.end_line},             {"endCol", d.span.end_col},
        {"message", d.message},
    };
    if (!d.judgments.empty()) item["judgment"] = d.judgments.back();
    items.push_back(std::move(item));
  }
  nlohmann::json doc{{"version", 1}, {"file", file}, {"items", std::move(items)}};
  return doc.dump(2) + "\n";
}

}  // namespace colf
