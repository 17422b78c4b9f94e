#include "dmimo/radio.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace dmimo {

namespace {

constexpr double kReferenceDistanceM = 1.0;

void require_finite(double v, const char* what) {
  if (!std::isfinite(v)) throw std::invalid_argument(std::string(what) + " must be finite");
}

}  // namespace

double distance(Point a, Point b) { return std::hypot(a.x - b.x, a.y - b.y); }

double RadioConfig::noise_floor_dbm() const {
  return -174.0 + 10.0 * std::log10(bandwidth_mhz * 1e6) + noise_figure_db;
}

bool Topology::inside_floor(Point p) const {
  return p.x >= 0.0 && p.x <= floor_width && p.y >= 0.0 && p.y <= floor_height;
}

bool Topology::inside_border_zone(Point p, double margin) const {
  const bool in_outer = p.x >= -margin && p.x <= floor_width + margin && p.y >= -margin &&
                        p.y <= floor_height + margin;
  const bool strictly_inside = p.x > 0.0 && p.x < floor_width && p.y > 0.0 && p.y < floor_height;
  return in_outer && !strictly_inside;
}

Topology make_grid_topology(const GridSpec& spec, const RadioConfig& radio) {
  if (spec.cols < 1 || spec.rows < 1 || spec.block_cols < 1 || spec.block_rows < 1)
    throw std::invalid_argument("grid dimensions must be positive");
  if (spec.cols % spec.block_cols != 0 || spec.rows % spec.block_rows != 0)
    throw std::invalid_argument("grid must be divisible into group blocks");
  if (spec.channels < 1) throw std::invalid_argument("need at least one channel");

  Topology t;
  t.grid_cols = spec.cols;
  t.grid_rows = spec.rows;
  t.spacing = spec.spacing;
  t.block_cols = spec.block_cols;
  t.block_rows = spec.block_rows;
  t.channels = spec.channels;
  t.floor_width = spec.cols * spec.spacing;
  t.floor_height = spec.rows * spec.spacing;

  for (int r = 0; r < spec.rows; ++r) {
    for (int c = 0; c < spec.cols; ++c) {
      RadioHead rh;
      rh.id = r * spec.cols + c;
      rh.location = {(c + 0.5) * spec.spacing, (r + 0.5) * spec.spacing};
      rh.tx_power_dbm = radio.rh_tx_power_dbm;
      t.rhs.push_back(rh);
    }
  }

  const int gcols = spec.cols / spec.block_cols;
  const int grows = spec.rows / spec.block_rows;
  for (int gr = 0; gr < grows; ++gr) {
    for (int gc = 0; gc < gcols; ++gc) {
      DMimoGroup g;
      g.id = gr * gcols + gc;
      for (int dr = 0; dr < spec.block_rows; ++dr)
        for (int dc = 0; dc < spec.block_cols; ++dc)
          g.members.push_back((gr * spec.block_rows + dr) * spec.cols + gc * spec.block_cols + dc);
      t.groups.push_back(std::move(g));
    }
  }
  return t;
}

Grouping::Grouping(std::vector<int> rh_to_group, int group_count)
    : rh_to_group_(std::move(rh_to_group)), members_(static_cast<std::size_t>(group_count)) {
  for (int g : rh_to_group_)
    if (g < 0 || g >= group_count) throw std::invalid_argument("group index out of range");
  rebuild_members();
}

Grouping Grouping::from_groups(const std::vector<DMimoGroup>& groups, int rh_count) {
  std::vector<int> assignment(static_cast<std::size_t>(rh_count), -1);
  for (std::size_t g = 0; g < groups.size(); ++g) {
    for (int rh : groups[g].members) {
      if (rh < 0 || rh >= rh_count) throw std::invalid_argument("RH id out of range");
      if (assignment[static_cast<std::size_t>(rh)] != -1)
        throw std::invalid_argument("groups must partition the RHs");
      assignment[static_cast<std::size_t>(rh)] = static_cast<int>(g);
    }
  }
  if (std::find(assignment.begin(), assignment.end(), -1) != assignment.end())
    throw std::invalid_argument("groups must cover every RH");
  return Grouping(std::move(assignment), static_cast<int>(groups.size()));
}

void Grouping::rebuild_members() {
  for (auto& m : members_) m.clear();
  for (std::size_t rh = 0; rh < rh_to_group_.size(); ++rh)
    members_[static_cast<std::size_t>(rh_to_group_[rh])].push_back(static_cast<int>(rh));
}

void Grouping::swap_rhs(int a, int b) {
  std::swap(rh_to_group_[static_cast<std::size_t>(a)], rh_to_group_[static_cast<std::size_t>(b)]);
  rebuild_members();
}

std::vector<DMimoGroup> Grouping::groups() const {
  std::vector<DMimoGroup> out;
  for (std::size_t g = 0; g < members_.size(); ++g)
    out.push_back(DMimoGroup{static_cast<int>(g), members_[g]});
  return out;
}

double dbm_to_mw(double dbm) { return std::pow(10.0, dbm / 10.0); }
double mw_to_dbm(double mw) { return 10.0 * std::log10(mw); }

double path_loss_db(double distance_m, double frequency_ghz, double exponent) {
  require_finite(distance_m, "distance");
  require_finite(frequency_ghz, "frequency");
  require_finite(exponent, "path loss exponent");
  if (distance_m < 0.0) throw std::invalid_argument("distance must be non-negative");
  if (frequency_ghz <= 0.0) throw std::invalid_argument("frequency must be positive");
  // Free-space loss at 1 m: 32.44 + 20 log10(f_MHz) + 20 log10(d_km).
  const double reference = 32.44 + 20.0 * std::log10(frequency_ghz * 1000.0) - 60.0;
  if (distance_m <= kReferenceDistanceM) return reference;
  return reference + 10.0 * exponent * std::log10(distance_m / kReferenceDistanceM);
}

double rx_power_dbm(double tx_power_dbm, Point tx, Point rx, double fading,
                    const RadioConfig& radio, double shadowing_db) {
  require_finite(tx_power_dbm, "tx power");
  require_finite(fading, "fading");
  require_finite(shadowing_db, "shadowing");
  if (fading <= 0.0) throw std::invalid_argument("fading gain must be positive");
  return tx_power_dbm -
         path_loss_db(distance(tx, rx), radio.frequency_ghz, radio.path_loss_exponent) +
         10.0 * std::log10(fading) + shadowing_db;
}

namespace {

double large_scale_gain(Point a, Point b, const RadioConfig& radio) {
  return dbm_to_mw(-path_loss_db(distance(a, b), radio.frequency_ghz, radio.path_loss_exponent));
}

template <class Draw>
LinkGains build_gains(const Topology& t, const RadioConfig& radio, Draw&& draw) {
  const auto nr = static_cast<Eigen::Index>(t.rhs.size());
  const auto nu = static_cast<Eigen::Index>(t.users.size());
  const auto ni = static_cast<Eigen::Index>(t.interferers.size());
  LinkGains g;
  g.rh_user.resize(nr, nu);
  g.rh_rh.setOnes(nr, nr);
  g.intf_user.resize(ni, nu);
  g.intf_rh.resize(ni, nr);

  for (Eigen::Index r = 0; r < nr; ++r)
    for (Eigen::Index u = 0; u < nu; ++u)
      g.rh_user(r, u) = large_scale_gain(t.rhs[r].location, t.users[u].location, radio) * draw();
  for (Eigen::Index a = 0; a < nr; ++a) {
    for (Eigen::Index b = a + 1; b < nr; ++b) {
      const double v = large_scale_gain(t.rhs[a].location, t.rhs[b].location, radio) * draw();
      g.rh_rh(a, b) = v;
      g.rh_rh(b, a) = v;
    }
  }
  for (Eigen::Index i = 0; i < ni; ++i) {
    for (Eigen::Index u = 0; u < nu; ++u)
      g.intf_user(i, u) =
          large_scale_gain(t.interferers[i].location, t.users[u].location, radio) * draw();
    for (Eigen::Index r = 0; r < nr; ++r)
      g.intf_rh(i, r) =
          large_scale_gain(t.interferers[i].location, t.rhs[r].location, radio) * draw();
  }
  return g;
}

}  // namespace

LinkGains sample_link_gains(const Topology& topology, const RadioConfig& radio, Rng& rng) {
  std::exponential_distribution<double> fading(1.0);
  std::normal_distribution<double> shadow(0.0, radio.shadowing_sigma_db);
  return build_gains(topology, radio, [&] {
    double f = fading(rng);
    // The exponential distribution can return exactly 0 only with probability ~2^-53;
    // keep gains strictly positive regardless.
    if (f <= 0.0) f = std::numeric_limits<double>::min();
    if (radio.shadowing) f *= dbm_to_mw(shadow(rng));
    return f;
  });
}

LinkGains mean_link_gains(const Topology& topology, const RadioConfig& radio) {
  return build_gains(topology, radio, [] { return 1.0; });
}

Association associate_users(const Topology& topology, const LinkGains& gains,
                            const Grouping& grouping) {
  Association a;
  const std::size_t nu = topology.users.size();
  a.user_rh.resize(nu);
  a.user_group.resize(nu);
  for (std::size_t u = 0; u < nu; ++u) {
    int best = 0;
    double best_mw = -1.0;
    for (std::size_t r = 0; r < topology.rhs.size(); ++r) {
      const double p = dbm_to_mw(topology.rhs[r].tx_power_dbm) *
                       gains.rh_user(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(u));
      if (p > best_mw) {  // strict: ties keep the lower id
        best_mw = p;
        best = static_cast<int>(r);
      }
    }
    a.user_rh[u] = best;
    a.user_group[u] = grouping.group_of(best);
  }
  return a;
}

double group_coupling_mw(const Topology& topology, const LinkGains& gains,
                         const Grouping& grouping, int a, int b) {
  double best = 0.0;
  for (int ra : grouping.members(a)) {
    for (int rb : grouping.members(b)) {
      if (ra == rb) continue;
      const double g = gains.rh_rh(ra, rb);
      const double p = std::max(dbm_to_mw(topology.rhs[static_cast<std::size_t>(ra)].tx_power_dbm),
                                dbm_to_mw(topology.rhs[static_cast<std::size_t>(rb)].tx_power_dbm)) *
                       g;
      best = std::max(best, p);
    }
  }
  return best;
}

double interferer_coupling_mw(const Topology& topology, const LinkGains& gains,
                              const Grouping& grouping, int interferer, int group) {
  const double intf_mw =
      dbm_to_mw(topology.interferers[static_cast<std::size_t>(interferer)].tx_power_dbm);
  double best = 0.0;
  for (int r : grouping.members(group)) {
    const double tx = std::max(intf_mw, dbm_to_mw(topology.rhs[static_cast<std::size_t>(r)].tx_power_dbm));
    best = std::max(best, tx * gains.intf_rh(interferer, r));
  }
  return best;
}

std::vector<int> hearing_set_of_group(const Topology& topology, const LinkGains& gains,
                                      const Grouping& grouping, int group,
                                      double cca_threshold_dbm) {
  const double threshold = dbm_to_mw(cca_threshold_dbm);
  std::vector<int> out;
  for (int g = 0; g < grouping.group_count(); ++g) {
    if (g == group) continue;
    if (group_coupling_mw(topology, gains, grouping, group, g) >= threshold) out.push_back(g);
  }
  return out;
}

std::vector<int> hearing_set_of_interferer(const Topology& topology, const LinkGains& gains,
                                           const Grouping& grouping, int interferer,
                                           double cca_threshold_dbm) {
  const double threshold = dbm_to_mw(cca_threshold_dbm);
  std::vector<int> out;
  for (int g = 0; g < grouping.group_count(); ++g)
    if (interferer_coupling_mw(topology, gains, grouping, interferer, g) >= threshold)
      out.push_back(g);
  return out;
}

}  // namespace dmimo
