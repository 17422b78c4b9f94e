#pragma once

#include <Eigen/Core>
#include <vector>

#include "dmimo/rng.hpp"

namespace dmimo {

struct Point {
  double x = 0.0;
  double y = 0.0;
};

double distance(Point a, Point b);

struct RadioHead {
  int id = 0;
  Point location;
  int antennas = 1;
  double tx_power_dbm = 15.0;
};

struct DMimoGroup {
  int id = 0;
  std::vector<int> members;  // RH ids
};

struct User {
  int id = 0;
  Point location;
};

struct Interferer {
  int id = 0;
  Point location;
  int channel = 1;  // 1-based, like group channels
  double tx_power_dbm = 15.0;
};

// Propagation and receiver constants. Every value is exposed in the harness config.
struct RadioConfig {
  double frequency_ghz = 5.25;
  double path_loss_exponent = 3.5;
  double rh_tx_power_dbm = 15.0;
  double interferer_tx_power_dbm = 15.0;
  double bandwidth_mhz = 80.0;
  double noise_figure_db = 7.0;
  double cca_threshold_dbm = -82.0;
  double shadowing_sigma_db = 5.0;
  bool shadowing = false;

  double noise_floor_dbm() const;
};

// Immutable floor plan. `groups` holds the deployment's default (adjacent) grouping;
// scenarios that regroup RHs pass a Grouping explicitly.
struct Topology {
  double floor_width = 0.0;
  double floor_height = 0.0;
  int grid_cols = 0;  // RH grid
  int grid_rows = 0;
  double spacing = 10.0;
  int block_cols = 2;  // RHs per adjacent group along x
  int block_rows = 2;
  int channels = 4;
  std::vector<RadioHead> rhs;
  std::vector<DMimoGroup> groups;
  std::vector<User> users;
  std::vector<Interferer> interferers;

  int group_grid_cols() const { return grid_cols / block_cols; }
  int group_grid_rows() const { return grid_rows / block_rows; }
  bool inside_floor(Point p) const;
  bool inside_border_zone(Point p, double margin) const;
};

struct GridSpec {
  int cols = 8;
  int rows = 8;
  double spacing = 10.0;
  int block_cols = 2;
  int block_rows = 2;
  int channels = 4;
};

// RHs at cell centres of a cols x rows grid, ids row-major; groups are the
// block_cols x block_rows spatial blocks, also row-major.
Topology make_grid_topology(const GridSpec& spec, const RadioConfig& radio);

// RH -> group assignment. Group sizes are not enforced here; the grouping
// environment keeps them at four.
class Grouping {
 public:
  Grouping() = default;
  Grouping(std::vector<int> rh_to_group, int group_count);

  static Grouping from_groups(const std::vector<DMimoGroup>& groups, int rh_count);

  int group_of(int rh) const { return rh_to_group_[static_cast<std::size_t>(rh)]; }
  const std::vector<int>& members(int group) const {
    return members_[static_cast<std::size_t>(group)];
  }
  int group_count() const { return static_cast<int>(members_.size()); }
  int rh_count() const { return static_cast<int>(rh_to_group_.size()); }
  const std::vector<int>& assignment() const { return rh_to_group_; }

  void swap_rhs(int a, int b);
  std::vector<DMimoGroup> groups() const;

  friend bool operator==(const Grouping& a, const Grouping& b) {
    return a.rh_to_group_ == b.rh_to_group_;
  }

 private:
  void rebuild_members();

  std::vector<int> rh_to_group_;
  std::vector<std::vector<int>> members_;
};

// Linear power gains (path loss, optional shadowing and small-scale fading).
// Received power in mW = tx power in mW * gain.
struct LinkGains {
  Eigen::MatrixXd rh_user;    // [rh][user]
  Eigen::MatrixXd rh_rh;      // [rh][rh], symmetric, reciprocal links
  Eigen::MatrixXd intf_user;  // [interferer][user]
  Eigen::MatrixXd intf_rh;    // [interferer][rh]
};

double dbm_to_mw(double dbm);
double mw_to_dbm(double mw);

// Log-distance path loss with a free-space reference at 1 m.
double path_loss_db(double distance_m, double frequency_ghz, double exponent = 3.5);

double rx_power_dbm(double tx_power_dbm, Point tx, Point rx, double fading,
                    const RadioConfig& radio, double shadowing_db = 0.0);

// Unit-mean exponential fading on every link (Rayleigh envelope power), plus
// lognormal shadowing when enabled.
LinkGains sample_link_gains(const Topology& topology, const RadioConfig& radio, Rng& rng);

// Path loss only; fading fixed to 1. Used for worked examples and tests.
LinkGains mean_link_gains(const Topology& topology, const RadioConfig& radio);

struct Association {
  std::vector<int> user_rh;
  std::vector<int> user_group;
};

// Strongest received RH wins, ties to the lowest RH id.
Association associate_users(const Topology& topology, const LinkGains& gains,
                            const Grouping& grouping);

// Strongest RH-pair coupling between two groups in mW, max over both directions.
double group_coupling_mw(const Topology& topology, const LinkGains& gains,
                         const Grouping& grouping, int a, int b);

// Strongest coupling between an interferer and any member of a group in mW,
// max over both directions.
double interferer_coupling_mw(const Topology& topology, const LinkGains& gains,
                              const Grouping& grouping, int interferer, int group);

std::vector<int> hearing_set_of_group(const Topology& topology, const LinkGains& gains,
                                      const Grouping& grouping, int group,
                                      double cca_threshold_dbm);

std::vector<int> hearing_set_of_interferer(const Topology& topology, const LinkGains& gains,
                                           const Grouping& grouping, int interferer,
                                           double cca_threshold_dbm);

}  // namespace dmimo
