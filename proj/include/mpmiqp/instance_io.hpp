#pragma once

#include <iosfwd>
#include <string>
#include <variant>

#include "mpmiqp/casestudies.hpp"
#include "mpmiqp/projection.hpp"

namespace mpmiqp {

// Instance file, schema "mpmiqp-instance/1". The "kind" field selects the
// payload: calcium, hev, raw-projected or raw-multiperiod. Arrays are
// 1-based in meaning (entry 0 is period 1), matrices nested row-major.
using Instance = std::variant<CalciumInstance, HevInstance, ProjectedMIQP, MultiPeriodProblem>;

const char* instance_kind(const Instance& inst);
std::size_t instance_n(const Instance& inst);

// Canonical JSON: sorted keys, compact, shortest round-trip numbers, trailing LF.
std::string instance_to_json(const Instance& inst);
Instance instance_from_json(const std::string& text);
void write_instance(const Instance& inst, std::ostream& out);
Instance read_instance(std::istream& in);
Instance read_instance_file(const std::string& path);

// Projected form of any instance kind.
ProjectedMIQP to_projected(const Instance& inst);

std::string spec_to_json(const CostSpec& spec);
CostSpec spec_from_json(const std::string& text);

}  // namespace mpmiqp
