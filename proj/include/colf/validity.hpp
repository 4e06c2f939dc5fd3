#pragma once

// Productivity analysis over finitary definition bodies. References between
// definitions form a graph whose edges are labeled with the constructors
// guarding them; a cycle is rejected when it is never guarded at all, or when
// its outermost guard belongs to an inductive family. Definitions that can
// reach a rejected cycle are invalid too: some observation of them runs into
// the unproductive loop.

#include <cstddef>
#include <string>
#include <vector>

#include "colf/diagnostics.hpp"
#include "colf/syntax.hpp"

namespace colf {

// Families ranked by declaration order; a later family outranks an earlier
// one. Constructors inherit the rank and polarity of their target family.
struct FamilyPriority {
  Name fam;
  std::size_t priority = 0;
  bool inductive = true;  // kind target is `type` rather than `cotype`
};

std::vector<FamilyPriority> assign_priorities(const Signature& sig);

// One edge per occurrence of a definition inside another definition's body.
// `labels` holds the priorities of the constants on the path from the body
// root to the occurrence, sorted and deduplicated; empty means unguarded.
struct TraceEdge {
  std::size_t from = 0;
  std::size_t to = 0;
  std::vector<std::size_t> labels;
};

struct TraceGraph {
  std::vector<Name> defs;  // index order follows declaration order
  std::vector<TraceEdge> edges;
};

TraceGraph build_trace_graph(const Signature& sig);

struct DefVerdict {
  Name name;
  SourceSpan span;
  bool contractive = true;  // body head (under the lambda prefix) is a constant
  bool prepattern = true;   // definition occurrences applied only to bound variables
  bool valid = true;
  std::vector<Name> cycle;  // witness: first rejected cycle reachable from here
};

struct ValidityReport {
  std::vector<DefVerdict> defs;
  bool ok = true;
};

ValidityReport validity_report(const Signature& sig);

// One error per invalid definition, suitable for the standard diagnostic
// sinks; empty iff the report is clean.
std::vector<Diagnostic> validity_diagnostics(const ValidityReport& report);

std::string render_validity_text(const ValidityReport& report);
std::string render_validity_json(const ValidityReport& report, const std::string& file);

}  // namespace colf
