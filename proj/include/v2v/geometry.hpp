#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "v2v/rng.hpp"

namespace v2v {

enum class Direction { kNorth, kSouth, kEast, kWest };

struct Point {
  double x = 0.0;
  double y = 0.0;
  bool operator==(const Point&) const = default;
};

double distance(Point a, Point b);

// Manhattan road grid on a torus: block_cols vertical streets and block_rows
// horizontal streets (the outer edge wraps onto the first street). Lanes of
// each direction are spread round-robin over the streets of their axis.
struct RoadGrid {
  int block_rows = 3;
  int block_cols = 3;
  double block_width_m = 250.0;   // x extent of one block
  double block_height_m = 433.0;  // y extent of one block
  int lanes_per_direction = 3;
  double lane_width_m = 3.5;

  bool operator==(const RoadGrid&) const = default;

  void validate() const;
  int lane_count() const { return 4 * lanes_per_direction; }
  double width() const { return block_cols * block_width_m; }
  double height() const { return block_rows * block_height_m; }
  // Lanes of one direction sharing a street.
  int lanes_per_street_x() const;  // N/S lanes on a vertical street
  int lanes_per_street_y() const;  // E/W lanes on a horizontal street
  double vertical_corridor_width() const { return 2.0 * lanes_per_street_x() * lane_width_m; }
  double horizontal_corridor_width() const { return 2.0 * lanes_per_street_y() * lane_width_m; }
  // Center lines of the streets; vehicles decide turns when crossing them.
  double vertical_street_center(int col) const;
  double horizontal_street_center(int row) const;
  // Street index whose corridor contains the coordinate, or -1.
  int vertical_street_at(double x) const;
  int horizontal_street_at(double y) const;
};

struct Lane {
  Direction direction = Direction::kNorth;
  int street = 0;        // column for N/S lanes, row for E/W lanes
  int slot = 0;          // index among same-direction lanes on that street
  double coordinate = 0; // fixed x for N/S lanes, fixed y for E/W lanes
  double length = 0;
};

std::vector<Lane> build_lanes(const RoadGrid& grid);
double total_lane_length(const RoadGrid& grid);

struct Vehicle {
  int id = 0;
  Point position;
  Direction direction = Direction::kNorth;
  double speed_mps = 10.0;
  int lane = 0;  // index into build_lanes(grid)

  bool operator==(const Vehicle&) const = default;
};

// Default speed is 36 km/h.
inline constexpr double kDefaultSpeedMps = 36.0 / 3.6;

// Poisson drop per lane with mean density * lane_length; positions uniform along the lane.
std::vector<Vehicle> spawn_vehicles(const RoadGrid& grid, double density_per_m, std::uint64_t seed,
                                    double speed_mps = kDefaultSpeedMps);

// Places exactly `count` vehicles, lanes chosen proportional to length. This is the
// Poisson drop conditioned on its total count.
std::vector<Vehicle> place_vehicles(const RoadGrid& grid, int count, Rng& rng,
                                    double speed_mps = kDefaultSpeedMps);

struct TurnProbabilities {
  double left = 0.25;
  double right = 0.25;
  double straight = 0.5;
  bool operator==(const TurnProbabilities&) const = default;
  void validate() const;
};

std::vector<Vehicle> step_mobility(std::vector<Vehicle> vehicles, const RoadGrid& grid, double dt_s,
                                   const TurnProbabilities& turns, Rng& rng);

// True when the vehicle sits exactly on a lane of its travel direction inside the grid.
bool on_valid_lane(const Vehicle& vehicle, const RoadGrid& grid);

// Both points inside the same street corridor (same row or same column).
bool share_street(Point a, Point b, const RoadGrid& grid);

struct V2VLink {
  int tx = 0;  // vehicle index
  int rx = 0;
  bool operator==(const V2VLink&) const = default;
};

struct V2VTopology {
  std::vector<V2VLink> links;
};

inline constexpr int kNeighborsPerVehicle = 3;

// Each vehicle transmits to its min(3, N-1) nearest vehicles; ties go to the lower id.
V2VTopology build_topology(std::span<const Vehicle> vehicles);

}  // namespace v2v
