// io.hpp: JSON and CSV exchange formats (schemas in docs/schemas.md)

#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "hopdyn/fock.hpp"
#include "hopdyn/gns.hpp"
#include "hopdyn/jumps.hpp"
#include "hopdyn/kmc.hpp"
#include "hopdyn/model.hpp"
#include "hopdyn/mott.hpp"
#include "hopdyn/spectra.hpp"

namespace hopdyn {

using json = nlohmann::ordered_json;

inline constexpr const char* kParamsSchema = "hopdyn.params/1";
inline constexpr const char* kRealizationSchema = "hopdyn.realization/1";
inline constexpr const char* kOperatorSchema = "hopdyn.operator/1";
inline constexpr const char* kGnsSchema = "hopdyn.gns/1";

/// Throws ConfigError when the modulation has no closed-form profile.
json params_to_json(const ModelParams& p);
/// Missing keys keep their defaults; unknown keys and bad values throw ConfigError.
ModelParams params_from_json(const json& j, ModelParams base = {});

json realization_to_json(const DisorderRealization& omega);
DisorderRealization realization_from_json(const json& j);

/// Nonzero entries as [row, col, re, im].
json operator_dump(const FockOperator& a);

/// One object per line: kind, sites, rate, energy.
void write_catalogue_jsonl(std::ostream& os, const JumpCatalogue& cat);

void write_eigenvalues_csv(std::ostream& os, const Eigen::VectorXd& values, double tol);
json gap_report_json(const GapReport& g, double tol);

/// Elements as [X, Y, Z] bitmask triples over the canonical site order.
json gns_basis_json(const GnsBasis& basis);
/// Coefficients as [re, im] pairs.
json gns_vector_json(const GnsVector& v);

json kmc_stats_json(const KmcTrajectory& traj, const ClassicalGenerator& gen, std::uint64_t seed);
/// time,kind,x,y with sites written as colon-joined coordinates.
void write_events_csv(std::ostream& os, const KmcTrajectory& traj, const ClassicalGenerator& gen);

void write_mott_csv(std::ostream& os, const std::vector<MottRow>& rows, double tol);

json point_json(const Point& p);
std::string point_string(const Point& p);

} // namespace hopdyn
