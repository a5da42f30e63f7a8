#pragma once

#include "pdms/loss.hpp"
#include "pdms/propagation.hpp"
#include "pdms/simulator.hpp"

#include <nlohmann/json.hpp>

namespace pdms {

// Stable JSON shapes for reports. Disjunct indices refer to the canonical
// form of the query they describe; discriminator positions are 0-based.
nlohmann::json to_json(const LossReport& report);
nlohmann::json to_json(const ComplementSpec& spec);
nlohmann::json to_json(const NeighborOutcome& outcome);
nlohmann::json to_json(const PropagationTrace& trace, const PeerNetwork& net);
nlohmann::json to_json(const Metrics& metrics);
nlohmann::json to_json(const Diagnostic& diagnostic);

}  // namespace pdms
