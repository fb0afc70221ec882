#pragma once

#include <memory>
#include <string>

#include "hullspace/geometry.hpp"

namespace hullspace {

struct FlowConditions {
  double froude_number = 0.28;
  double gravity = 9.81;
  double reference_length = 1.0;

  double speed() const;
  /// Reference length from waterline_extent (falls back to the station
  /// extent for a hull with no waterplane).
  static FlowConditions for_hull(const OffsetTable& offsets, double froude_number = 0.28,
                                 double gravity = 9.81);
};

/// Quadrature settings for the Michell integral over the wavenumber
/// parameter lambda in [1, lambda_max]. The near range [1, lambda_split] is
/// mapped through lambda = cosh(t) to remove the inverse square-root
/// singularity; both ranges use composite Gauss-Legendre panels.
/// Uniform axes are refined `refinement` times by cubic interpolation of the
/// offsets before the hat-function integrals; 1 keeps the linear surface.
struct ThinShipSettings {
  double lambda_max = 40.0;
  double lambda_split = 3.0;
  int near_panels = 24;
  int far_panels = 111;
  int refinement = 2;
  double water_density = 1025.0;
};

struct CwResult {
  double cw = 0.0;
  bool degenerate = false;
  double resistance = 0.0;      // N
  double wetted_surface = 0.0;  // m^2
};

/// Length of the top waterline between the stations where it closes to zero
/// breadth (or the table ends). Unlike the principal-dimension waterline
/// length this does not shrink by a station spacing on a coarser grid.
double waterline_extent(const OffsetTable& offsets);

/// Wetted surface of the full hull: both sides as bilinear patches, the flat
/// keel strip and any end faces (transom). The waterplane is not wetted.
double wetted_surface(const OffsetTable& offsets);

/// Thin-ship (Michell) wave-making resistance coefficient, normalized by
/// 0.5 rho U^2 S. The hull is closed at its first and last stations, so a
/// transom contributes a line source.
CwResult evaluate_cw(const OffsetTable& offsets, const FlowConditions& conditions,
                     const ThinShipSettings& settings = {});

/// Pluggable direct solver.
class CwEvaluator {
 public:
  virtual ~CwEvaluator() = default;
  virtual double evaluate(const OffsetTable& offsets) const = 0;
  virtual std::string name() const = 0;
};

class ThinShipEvaluator final : public CwEvaluator {
 public:
  explicit ThinShipEvaluator(double froude_number = 0.28, ThinShipSettings settings = {})
      : froude_(froude_number), settings_(settings) {}
  double evaluate(const OffsetTable& offsets) const override;
  std::string name() const override { return "thin-ship"; }

 private:
  double froude_;
  ThinShipSettings settings_;
};

/// Runs `command` through the shell with the offset table on stdin and reads
/// a single decimal Cw from its stdout.
class ExternalCommandEvaluator final : public CwEvaluator {
 public:
  explicit ExternalCommandEvaluator(std::string command) : command_(std::move(command)) {}
  double evaluate(const OffsetTable& offsets) const override;
  std::string name() const override { return "external-command"; }

 private:
  std::string command_;
};

struct EvaluatorConfig {
  std::string kind = "thin-ship";  // thin-ship | external-command
  std::string command;
  double froude_number = 0.28;
  ThinShipSettings thin_ship{};
};

std::unique_ptr<CwEvaluator> make_evaluator(const EvaluatorConfig& config);

}  // namespace hullspace
