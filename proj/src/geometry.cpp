#include "v2v/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <tuple>

#include "v2v/errors.hpp"

namespace v2v {

double distance(Point a, Point b) { return std::hypot(a.x - b.x, a.y - b.y); }

void RoadGrid::validate() const {
  if (block_rows < 1 || block_cols < 1) throw ConfigError("grid needs at least one block row and column");
  if (!(block_width_m > 0.0) || !(block_height_m > 0.0)) throw ConfigError("block sizes must be positive");
  if (lanes_per_direction < 1) throw ConfigError("lanes_per_direction must be >= 1");
  if (!(lane_width_m > 0.0)) throw ConfigError("lane_width_m must be positive");
  if (vertical_corridor_width() >= block_width_m || horizontal_corridor_width() >= block_height_m)
    throw ConfigError("street corridors do not fit inside the blocks");
}

int RoadGrid::lanes_per_street_x() const { return (lanes_per_direction + block_cols - 1) / block_cols; }
int RoadGrid::lanes_per_street_y() const { return (lanes_per_direction + block_rows - 1) / block_rows; }

double RoadGrid::vertical_street_center(int col) const {
  return col * block_width_m + 0.5 * vertical_corridor_width();
}

double RoadGrid::horizontal_street_center(int row) const {
  return row * block_height_m + 0.5 * horizontal_corridor_width();
}

int RoadGrid::vertical_street_at(double x) const {
  const int col = static_cast<int>(std::floor(x / block_width_m));
  if (col < 0 || col >= block_cols) return -1;
  return (x - col * block_width_m) <= vertical_corridor_width() ? col : -1;
}

int RoadGrid::horizontal_street_at(double y) const {
  const int row = static_cast<int>(std::floor(y / block_height_m));
  if (row < 0 || row >= block_rows) return -1;
  return (y - row * block_height_m) <= horizontal_corridor_width() ? row : -1;
}

std::vector<Lane> build_lanes(const RoadGrid& grid) {
  grid.validate();
  std::vector<Lane> lanes;
  lanes.reserve(static_cast<std::size_t>(grid.lane_count()));
  const int per_x = grid.lanes_per_street_x();
  const int per_y = grid.lanes_per_street_y();
  for (Direction dir : {Direction::kNorth, Direction::kSouth, Direction::kEast, Direction::kWest}) {
    const bool vertical = dir == Direction::kNorth || dir == Direction::kSouth;
    const int streets = vertical ? grid.block_cols : grid.block_rows;
    for (int j = 0; j < grid.lanes_per_direction; ++j) {
      Lane lane;
      lane.direction = dir;
      lane.street = j % streets;
      lane.slot = j / streets;
      // Southbound/eastbound lanes take the first half of a corridor.
      if (vertical) {
        const int offset = dir == Direction::kSouth ? 0 : per_x;
        lane.coordinate = lane.street * grid.block_width_m + (offset + lane.slot + 0.5) * grid.lane_width_m;
        lane.length = grid.height();
      } else {
        const int offset = dir == Direction::kEast ? 0 : per_y;
        lane.coordinate = lane.street * grid.block_height_m + (offset + lane.slot + 0.5) * grid.lane_width_m;
        lane.length = grid.width();
      }
      lanes.push_back(lane);
    }
  }
  return lanes;
}

double total_lane_length(const RoadGrid& grid) {
  double total = 0.0;
  for (const Lane& lane : build_lanes(grid)) total += lane.length;
  return total;
}

namespace {

bool is_vertical(Direction d) { return d == Direction::kNorth || d == Direction::kSouth; }

Vehicle vehicle_on_lane(const std::vector<Lane>& lanes, int lane_index, double along, int id, double speed) {
  const Lane& lane = lanes[static_cast<std::size_t>(lane_index)];
  Vehicle v;
  v.id = id;
  v.direction = lane.direction;
  v.speed_mps = speed;
  v.lane = lane_index;
  v.position = is_vertical(lane.direction) ? Point{lane.coordinate, along} : Point{along, lane.coordinate};
  return v;
}

}  // namespace

std::vector<Vehicle> spawn_vehicles(const RoadGrid& grid, double density_per_m, std::uint64_t seed,
                                    double speed_mps) {
  if (!(density_per_m >= 0.0) || !std::isfinite(density_per_m))
    throw ConfigError("vehicle density must be a finite non-negative number");
  const auto lanes = build_lanes(grid);
  Rng rng(derive_seed(seed, Stream::kDrop));
  std::vector<Vehicle> out;
  for (std::size_t i = 0; i < lanes.size(); ++i) {
    const double mean = density_per_m * lanes[i].length;
    if (mean <= 0.0) continue;
    std::poisson_distribution<int> count_dist(mean);
    const int n = count_dist(rng);
    std::uniform_real_distribution<double> along(0.0, lanes[i].length);
    for (int c = 0; c < n; ++c) {
      out.push_back(vehicle_on_lane(lanes, static_cast<int>(i), along(rng), static_cast<int>(out.size()), speed_mps));
    }
  }
  return out;
}

std::vector<Vehicle> place_vehicles(const RoadGrid& grid, int count, Rng& rng, double speed_mps) {
  if (count < 0) throw ConfigError("vehicle count must be non-negative");
  const auto lanes = build_lanes(grid);
  std::vector<double> weights;
  for (const Lane& lane : lanes) weights.push_back(lane.length);
  std::discrete_distribution<int> pick(weights.begin(), weights.end());
  std::vector<Vehicle> out;
  out.reserve(static_cast<std::size_t>(count));
  for (int c = 0; c < count; ++c) {
    const int lane = pick(rng);
    std::uniform_real_distribution<double> along(0.0, lanes[static_cast<std::size_t>(lane)].length);
    out.push_back(vehicle_on_lane(lanes, lane, along(rng), c, speed_mps));
  }
  return out;
}

void TurnProbabilities::validate() const {
  if (left < 0.0 || right < 0.0 || straight < 0.0) throw ConfigError("turn probabilities must be non-negative");
  if (std::abs(left + right + straight - 1.0) > 1e-9) throw ConfigError("turn probabilities must sum to 1");
}

namespace {

Direction turn_left(Direction d) {
  switch (d) {
    case Direction::kNorth: return Direction::kWest;
    case Direction::kWest: return Direction::kSouth;
    case Direction::kSouth: return Direction::kEast;
    case Direction::kEast: return Direction::kNorth;
  }
  return d;
}

Direction turn_right(Direction d) { return turn_left(turn_left(turn_left(d))); }

// Lane of `dir` on `street` with the given slot (clamped); -1 when the street has none.
int find_lane(const std::vector<Lane>& lanes, Direction dir, int street, int slot) {
  int best = -1;
  for (std::size_t i = 0; i < lanes.size(); ++i) {
    const Lane& lane = lanes[i];
    if (lane.direction != dir || lane.street != street) continue;
    if (lane.slot == slot) return static_cast<int>(i);
    if (best < 0 || lane.slot > lanes[static_cast<std::size_t>(best)].slot) best = static_cast<int>(i);
  }
  return best;
}

}  // namespace

std::vector<Vehicle> step_mobility(std::vector<Vehicle> vehicles, const RoadGrid& grid, double dt_s,
                                   const TurnProbabilities& turns, Rng& rng) {
  if (!(dt_s >= 0.0)) throw ConfigError("mobility time step must be non-negative");
  if (dt_s == 0.0) return vehicles;
  const auto lanes = build_lanes(grid);
  std::vector<double> x_centers, y_centers;
  for (int c = 0; c < grid.block_cols; ++c) x_centers.push_back(grid.vertical_street_center(c));
  for (int r = 0; r < grid.block_rows; ++r) y_centers.push_back(grid.horizontal_street_center(r));
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  for (Vehicle& v : vehicles) {
    double remaining = v.speed_mps * dt_s;
    for (int guard = 0; guard < 10000 && remaining > 0.0; ++guard) {
      const bool vertical = is_vertical(v.direction);
      const bool forward = v.direction == Direction::kNorth || v.direction == Direction::kEast;
      const double extent = vertical ? grid.height() : grid.width();
      const auto& centers = vertical ? y_centers : x_centers;
      double& along = vertical ? v.position.y : v.position.x;

      // Next street center strictly ahead, allowing one wrap.
      int crossing = -1;
      double gap = 0.0;
      if (forward) {
        auto it = std::upper_bound(centers.begin(), centers.end(), along);
        crossing = it == centers.end() ? 0 : static_cast<int>(it - centers.begin());
        const double target = it == centers.end() ? centers.front() + extent : *it;
        gap = target - along;
      } else {
        auto it = std::lower_bound(centers.begin(), centers.end(), along);
        crossing = it == centers.begin() ? static_cast<int>(centers.size()) - 1 : static_cast<int>(it - centers.begin()) - 1;
        const double target = it == centers.begin() ? centers.back() - extent : *(it - 1);
        gap = along - target;
      }

      if (remaining < gap) {
        along += forward ? remaining : -remaining;
        along = std::fmod(along, extent);
        if (along < 0.0) along += extent;
        remaining = 0.0;
        break;
      }
      remaining -= gap;
      along = centers[static_cast<std::size_t>(crossing)];

      const double draw = unit(rng);
      Direction next = v.direction;
      if (draw < turns.left) {
        next = turn_left(v.direction);
      } else if (draw < turns.left + turns.right) {
        next = turn_right(v.direction);
      }
      if (next == v.direction) continue;
      const int slot = lanes[static_cast<std::size_t>(v.lane)].slot;
      const int target_lane = find_lane(lanes, next, crossing, slot);
      if (target_lane < 0) continue;
      // Snap to the center of the street being left so the new lane starts at the intersection.
      const Lane& current = lanes[static_cast<std::size_t>(v.lane)];
      const double street_center = vertical ? grid.vertical_street_center(current.street)
                                            : grid.horizontal_street_center(current.street);
      const Lane& lane = lanes[static_cast<std::size_t>(target_lane)];
      if (vertical) {
        v.position = Point{street_center, lane.coordinate};
      } else {
        v.position = Point{lane.coordinate, street_center};
      }
      v.direction = next;
      v.lane = target_lane;
    }
  }
  return vehicles;
}

bool on_valid_lane(const Vehicle& vehicle, const RoadGrid& grid) {
  const auto lanes = build_lanes(grid);
  if (vehicle.lane < 0 || vehicle.lane >= static_cast<int>(lanes.size())) return false;
  const Lane& lane = lanes[static_cast<std::size_t>(vehicle.lane)];
  if (lane.direction != vehicle.direction) return false;
  const Point p = vehicle.position;
  if (p.x < 0.0 || p.x >= grid.width() || p.y < 0.0 || p.y >= grid.height()) return false;
  const double fixed = is_vertical(lane.direction) ? p.x : p.y;
  return std::abs(fixed - lane.coordinate) < 1e-9;
}

bool share_street(Point a, Point b, const RoadGrid& grid) {
  const int ca = grid.vertical_street_at(a.x);
  if (ca >= 0 && ca == grid.vertical_street_at(b.x)) return true;
  const int ra = grid.horizontal_street_at(a.y);
  return ra >= 0 && ra == grid.horizontal_street_at(b.y);
}

V2VTopology build_topology(std::span<const Vehicle> vehicles) {
  const std::size_t n = vehicles.size();
  if (n < 2) throw TopologyError("building V2V links needs at least 2 vehicles");
  const std::size_t per_vehicle = std::min<std::size_t>(kNeighborsPerVehicle, n - 1);
  V2VTopology topo;
  topo.links.reserve(n * per_vehicle);
  std::vector<std::tuple<double, int, int>> candidates;
  for (std::size_t i = 0; i < n; ++i) {
    candidates.clear();
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      candidates.emplace_back(distance(vehicles[i].position, vehicles[j].position), vehicles[j].id,
                              static_cast<int>(j));
    }
    std::partial_sort(candidates.begin(), candidates.begin() + static_cast<std::ptrdiff_t>(per_vehicle),
                      candidates.end());
    for (std::size_t c = 0; c < per_vehicle; ++c) {
      topo.links.push_back(V2VLink{static_cast<int>(i), std::get<2>(candidates[c])});
    }
  }
  return topo;
}

}  // namespace v2v
