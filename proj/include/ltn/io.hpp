#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "ltn/dynamics.hpp"
#include "ltn/ensemble.hpp"
#include "ltn/equilibria.hpp"
#include "ltn/inhibition.hpp"
#include "ltn/matclass.hpp"
#include "ltn/model.hpp"
#include "ltn/wilsoncowan.hpp"

namespace ltn {

/// Optional bilayer block of a network file.
struct PartitionSpec {
  std::vector<std::size_t> irrelevant;
  /// Always the sorted complement of `irrelevant` after parsing.
  std::vector<std::size_t> relevant;
  /// r x p, nonpositive. Required for inhibition design.
  std::optional<Matrix> b_minus;
  /// Drive of the relevant nodes; when absent, d restricted to them is used.
  std::optional<Vector> d_relevant;

  friend bool operator==(const PartitionSpec&, const PartitionSpec&) = default;
};

/// In-memory form of a network file (JSON; schema in docs/network-format.md).
struct NetworkDocument {
  NetworkSpec net;
  std::optional<Vector> d;
  std::optional<PartitionSpec> partition;

  friend bool operator==(const NetworkDocument&, const NetworkDocument&) = default;
};

/// Throws ParseError naming the offending field.
NetworkDocument parse_network(std::string_view text);
/// Throws ParseError (field "<file>" when unreadable).
NetworkDocument read_network_file(const std::string& path);
/// Shortest round-trip decimal for every number; parse_network inverts it exactly.
std::string write_network(const NetworkDocument& doc);

/// d from the file, or ParseError("d") when missing and no default is given.
Vector document_input(const NetworkDocument& doc, std::optional<Vector> fallback = std::nullopt);

/// Builds the bilayer partition. Throws ParseError("partition...") when the
/// block or B_minus is missing or inconsistent.
BilayerPartition document_partition(const NetworkDocument& doc);

/// Versioned CSV exports. Each starts with a "# ltnet <kind> v1" comment line.
std::string trajectory_csv(const Trajectory& traj);
std::string equilibria_csv(const std::vector<Equilibrium>& eqs);
std::string ensemble_csv(const EnsembleReport& rep);

std::string certificate_text(const ClassCertificate& cert);
std::string equilibria_text(const EquilibriumSet& set);
std::string inhibition_text(const NetworkSpec& net, const BilayerPartition& part,
                            const InhibitionDesign& design, const EquivalenceReport* equivalences);
std::string wilson_cowan_text(const WilsonCowanParams& p, const WilsonCowanReport& rep);
std::string scaling_fit_text(const ScalingFit& fit);

/// Formats a double the way every report does (shortest round-trip).
std::string format_number(double v);

}  // namespace ltn
