#pragma once

#include <map>
#include <string>

#include "pipeopt/formulation.hpp"
#include "pipeopt/network.hpp"

namespace pipeopt {

/// Provenance of a case parameter.
enum class Provenance { PaperTable, FigureDigitized, AssumedDefault };

const char* to_string(Provenance p);

/// The bundled Seaway-style crude pipeline case: 23 nodes, 13 pipes and 9
/// series pumps, with bound and pump parameters from published tables and
/// geometry digitized from a profile plot. Regeneration is byte-identical.
struct CaseManifest {
  std::string case_id;
  Network network;
  std::map<std::string, FixedAllocation> fixed_allocation;  ///< for MinOperatingCost
  std::map<std::string, Provenance> provenance;             ///< field path -> tag

  std::string network_document() const;     ///< network file format
  std::string allocation_document() const;  ///< fixed-allocation file format
  std::string provenance_document() const;  ///< sidecar JSON
};

CaseManifest generate_seaway();

/// Parses the fixed-allocation document (m^3/h in file, SI out).
std::map<std::string, FixedAllocation> parse_allocation(const std::string& document);

std::string serialize_allocation(const std::map<std::string, FixedAllocation>& alloc);

}  // namespace pipeopt
