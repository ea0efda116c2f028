#pragma once

// Subsystem catalog, bus selection, fraction/architecture construction and
// enumeration of every allocation of subsystems into fractions.

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "fracval/error.hpp"
#include "fracval/stochastic.hpp"

namespace fracval {

using KiloDollars = double;
using Kilograms = double;

enum class Role { payload, processor, downlink, comms, techpackage, bus };

inline std::string_view to_string(Role r) {
  switch (r) {
    case Role::payload: return "payload";
    case Role::processor: return "processor";
    case Role::downlink: return "downlink";
    case Role::comms: return "comms";
    case Role::techpackage: return "techpackage";
    case Role::bus: return "bus";
  }
  return "?";
}

inline std::optional<Role> role_from_string(std::string_view s) {
  for (Role r : {Role::payload, Role::processor, Role::downlink, Role::comms, Role::techpackage,
                 Role::bus}) {
    if (to_string(r) == s) return r;
  }
  return std::nullopt;
}

/// A replaceable unit: one row of the component table.
struct SubsystemSpec {
  std::string id;
  std::string name;
  KiloDollars build_cost = 0.0;
  Kilograms mass = 0.0;
  ReplacementLaw replacement;
  Role role = Role::payload;
};

struct BusCatalogEntry {
  std::string name;
  Kilograms capacity = 0.0;  // largest hosted mass (members + tech package)
  KiloDollars build_cost = 0.0;
  Kilograms mass = 0.0;
  ReplacementLaw replacement;
};

/// A bus pinned to one exact member set; wins over capacity selection.
struct BusOverride {
  std::vector<std::string> members;
  std::string name;
  KiloDollars build_cost = 0.0;
  Kilograms mass = 0.0;
  ReplacementLaw replacement;
};

struct Catalog {
  std::vector<SubsystemSpec> subsystems;  // main subsystems, in canonical order
  std::optional<SubsystemSpec> techpackage;
  std::vector<BusCatalogEntry> buses;
  std::vector<BusOverride> bus_overrides;

  [[nodiscard]] std::optional<std::size_t> index_of(std::string_view id) const {
    for (std::size_t i = 0; i < subsystems.size(); ++i) {
      if (subsystems[i].id == id) return i;
    }
    return std::nullopt;
  }

  [[nodiscard]] const SubsystemSpec& at(std::string_view id) const {
    if (auto i = index_of(id)) return subsystems[*i];
    throw ConfigError("unknown subsystem id \"" + std::string(id) + "\"");
  }

  [[nodiscard]] std::vector<std::string> ids() const {
    std::vector<std::string> out;
    out.reserve(subsystems.size());
    for (const auto& s : subsystems) out.push_back(s.id);
    return out;
  }

  /// Sorts `members` into catalog order; throws on unknown or repeated ids.
  [[nodiscard]] std::vector<std::string> canonical(std::vector<std::string> members) const {
    std::vector<std::size_t> idx;
    idx.reserve(members.size());
    for (const auto& m : members) {
      auto i = index_of(m);
      if (!i) throw ConfigError("unknown subsystem id \"" + m + "\"");
      idx.push_back(*i);
    }
    std::sort(idx.begin(), idx.end());
    if (std::adjacent_find(idx.begin(), idx.end()) != idx.end()) {
      throw ConfigError("subsystem listed twice in member set");
    }
    std::vector<std::string> out;
    out.reserve(idx.size());
    for (auto i : idx) out.push_back(subsystems[i].id);
    return out;
  }

  void validate() const {
    if (subsystems.empty()) throw ConfigError("catalog has no subsystems");
    std::set<std::string> seen;
    auto check_unit = [&](const SubsystemSpec& s) {
      if (s.id.empty()) throw ConfigError("subsystem with empty id");
      if (!seen.insert(s.id).second) throw ConfigError("duplicate subsystem id \"" + s.id + "\"");
      if (!(s.build_cost >= 0.0)) throw ConfigError("subsystem \"" + s.id + "\": negative cost");
      if (!(s.mass >= 0.0)) throw ConfigError("subsystem \"" + s.id + "\": negative mass");
    };
    for (const auto& s : subsystems) {
      check_unit(s);
      if (s.role == Role::bus || s.role == Role::techpackage) {
        throw ConfigError("subsystem \"" + s.id + "\": main subsystems cannot have role " +
                          std::string(to_string(s.role)));
      }
    }
    if (techpackage) {
      check_unit(*techpackage);
      if (techpackage->role != Role::techpackage) {
        throw ConfigError("techpackage \"" + techpackage->id + "\" must have role techpackage");
      }
    }
    std::vector<Kilograms> caps;
    for (const auto& b : buses) {
      if (!(b.capacity > 0.0)) throw ConfigError("bus \"" + b.name + "\": capacity must be > 0");
      if (!(b.build_cost >= 0.0) || !(b.mass >= 0.0)) {
        throw ConfigError("bus \"" + b.name + "\": negative cost or mass");
      }
      if (b.replacement.obsolescence) {
        throw ConfigError("bus \"" + b.name + "\": buses do not become obsolete");
      }
      caps.push_back(b.capacity);
    }
    std::sort(caps.begin(), caps.end());
    if (std::adjacent_find(caps.begin(), caps.end()) != caps.end()) {
      throw ConfigError("bus catalog capacities must be distinct");
    }
    std::set<std::vector<std::string>> override_sets;
    for (const auto& o : bus_overrides) {
      if (o.members.empty()) throw ConfigError("bus override \"" + o.name + "\" has no members");
      auto key = canonical(o.members);
      if (!override_sets.insert(key).second) {
        throw ConfigError("bus override \"" + o.name + "\" duplicates another member set");
      }
      if (!(o.build_cost >= 0.0) || !(o.mass >= 0.0)) {
        throw ConfigError("bus override \"" + o.name + "\": negative cost or mass");
      }
      if (o.replacement.obsolescence) {
        throw ConfigError("bus override \"" + o.name + "\": buses do not become obsolete");
      }
    }
  }
};

/// Set partition of subsystem ids. Blocks are disjoint, nonempty and cover
/// the catalog.
struct Partition {
  std::vector<std::vector<std::string>> blocks;

  /// e.g. "PL+PR|CM+DL"
  [[nodiscard]] std::string label() const {
    std::string out;
    for (std::size_t b = 0; b < blocks.size(); ++b) {
      if (b) out += '|';
      for (std::size_t i = 0; i < blocks[b].size(); ++i) {
        if (i) out += '+';
        out += blocks[b][i];
      }
    }
    return out;
  }

  friend bool operator==(const Partition&, const Partition&) = default;
};

inline constexpr std::size_t kMaxEnumeratedSubsystems = 12;

/// Bell numbers by the triangle recurrence (B_0 = 1).
inline std::uint64_t bell_number(std::size_t n) {
  std::vector<std::uint64_t> row{1};
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<std::uint64_t> next{row.back()};
    for (auto v : row) next.push_back(next.back() + v);
    row = std::move(next);
  }
  return row.front();
}

/// All set partitions of `ids`, in lexicographic order of their
/// restricted-growth strings. Block b holds the elements labelled b, so
/// blocks come out sorted by their first member in input order.
inline std::vector<Partition> enumerate_partitions(std::span<const std::string> ids) {
  const std::size_t n = ids.size();
  if (n == 0) throw ConfigError("cannot enumerate partitions of an empty subsystem set");
  if (n > kMaxEnumeratedSubsystems) {
    throw ConfigError("enumeration limited to " + std::to_string(kMaxEnumeratedSubsystems) +
                      " subsystems (got " + std::to_string(n) + ")");
  }
  {
    std::set<std::string> uniq(ids.begin(), ids.end());
    if (uniq.size() != n) throw ConfigError("duplicate id in enumeration set");
  }

  std::vector<Partition> out;
  std::vector<std::size_t> rgs(n, 0);
  std::vector<std::size_t> prefix_max(n, 0);  // max of rgs[0..i]
  for (;;) {
    Partition p;
    p.blocks.resize(prefix_max[n - 1] + 1);
    for (std::size_t i = 0; i < n; ++i) p.blocks[rgs[i]].push_back(ids[i]);
    out.push_back(std::move(p));

    // Increment the rightmost position that may still grow: a_i <= 1 + max(a_0..a_{i-1}).
    std::size_t i = n - 1;
    while (i > 0 && rgs[i] == prefix_max[i - 1] + 1) --i;
    if (i == 0) break;
    ++rgs[i];
    prefix_max[i] = std::max(prefix_max[i - 1], rgs[i]);
    for (std::size_t j = i + 1; j < n; ++j) {
      rgs[j] = 0;
      prefix_max[j] = prefix_max[i];
    }
  }
  return out;
}

/// Least-capacity entry able to host `total_member_mass`.
inline const BusCatalogEntry& select_bus(Kilograms total_member_mass,
                                         std::span<const BusCatalogEntry> catalog,
                                         std::string_view fraction_label = {}) {
  if (catalog.empty()) {
    throw ConfigError("no bus catalog available for fraction \"" + std::string(fraction_label) +
                      "\"");
  }
  const BusCatalogEntry* best = nullptr;
  for (const auto& entry : catalog) {
    if (entry.capacity >= total_member_mass && (!best || entry.capacity < best->capacity)) {
      best = &entry;
    }
  }
  if (!best) {
    throw ConfigError("no bus can host " + std::to_string(total_member_mass) +
                      " kg for fraction \"" + std::string(fraction_label) + "\"");
  }
  return *best;
}

enum class ModularityLevel { M2, M3 };

inline std::string_view to_string(ModularityLevel l) { return l == ModularityLevel::M2 ? "M2" : "M3"; }

struct Fraction {
  std::vector<SubsystemSpec> members;
  SubsystemSpec bus;
  std::optional<SubsystemSpec> techpackage;

  [[nodiscard]] KiloDollars build_cost() const {
    KiloDollars c = bus.build_cost + (techpackage ? techpackage->build_cost : 0.0);
    for (const auto& m : members) c += m.build_cost;
    return c;
  }

  [[nodiscard]] Kilograms mass() const {
    Kilograms w = bus.mass + (techpackage ? techpackage->mass : 0.0);
    for (const auto& m : members) w += m.mass;
    return w;
  }

  [[nodiscard]] std::vector<std::string> member_ids() const {
    std::vector<std::string> ids;
    for (const auto& m : members) ids.push_back(m.id);
    return ids;
  }

  /// Every unit that can trigger a replacement: members, bus, tech package.
  [[nodiscard]] std::vector<const SubsystemSpec*> units() const {
    std::vector<const SubsystemSpec*> out;
    for (const auto& m : members) out.push_back(&m);
    out.push_back(&bus);
    if (techpackage) out.push_back(&*techpackage);
    return out;
  }
};

/// Cost of building and launching one instance of the fraction.
inline KiloDollars fraction_deploy_cost(const Fraction& f, double launch_rate) {
  if (!(launch_rate >= 0.0)) throw ConfigError("launch rate must be >= 0");
  return f.build_cost() + f.mass() * launch_rate;
}

struct Architecture {
  std::string label;
  ModularityLevel level = ModularityLevel::M2;
  std::vector<Fraction> fractions;

  [[nodiscard]] Partition partition() const {
    Partition p;
    for (const auto& f : fractions) p.blocks.push_back(f.member_ids());
    return p;
  }

  [[nodiscard]] KiloDollars deploy_cost(double launch_rate) const {
    KiloDollars c = 0.0;
    for (const auto& f : fractions) c += fraction_deploy_cost(f, launch_rate);
    return c;
  }

  [[nodiscard]] std::set<std::string> main_ids() const {
    std::set<std::string> ids;
    for (const auto& f : fractions) {
      for (const auto& m : f.members) ids.insert(m.id);
    }
    return ids;
  }
};

namespace detail {

inline std::string join(const std::vector<std::string>& ids, char sep) {
  std::string out;
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (i) out += sep;
    out += ids[i];
  }
  return out;
}

}  // namespace detail

/// Checks that `p` partitions the catalog's main subsystems and returns it
/// with every block in catalog order (block order is kept).
inline Partition validate_partition(const Partition& p, const Catalog& catalog) {
  if (p.blocks.empty()) throw ConfigError("partition has no blocks");
  Partition out;
  std::set<std::string> seen;
  for (const auto& block : p.blocks) {
    if (block.empty()) throw ConfigError("partition has an empty block");
    for (const auto& id : block) {
      if (!catalog.index_of(id)) throw ConfigError("unknown subsystem id \"" + id + "\"");
      if (!seen.insert(id).second) {
        throw ConfigError("subsystem \"" + id + "\" appears in more than one fraction");
      }
    }
    out.blocks.push_back(catalog.canonical(block));
  }
  for (const auto& s : catalog.subsystems) {
    if (!seen.count(s.id)) throw ConfigError("subsystem \"" + s.id + "\" is not allocated");
  }
  return out;
}

/// Validated partition with blocks ordered by their first member, the order
/// enumerate_partitions produces. Equal sets of blocks map to equal results.
inline Partition canonical_partition(const Partition& p, const Catalog& catalog) {
  Partition out = validate_partition(p, catalog);
  std::sort(out.blocks.begin(), out.blocks.end(), [&](const auto& a, const auto& b) {
    return *catalog.index_of(a.front()) < *catalog.index_of(b.front());
  });
  return out;
}

/// Bus for a fraction with the given members: an override keyed by the exact
/// member set wins; otherwise the least sufficient catalog entry.
inline SubsystemSpec resolve_bus(const std::vector<std::string>& members, Kilograms hosted_mass,
                                 const Catalog& catalog) {
  const auto key = catalog.canonical(members);
  const std::string label = detail::join(key, '+');
  SubsystemSpec bus;
  bus.id = "bus:" + label;
  bus.role = Role::bus;
  for (const auto& o : catalog.bus_overrides) {
    if (catalog.canonical(o.members) == key) {
      bus.name = o.name;
      bus.build_cost = o.build_cost;
      bus.mass = o.mass;
      bus.replacement = o.replacement;
      return bus;
    }
  }
  const auto& entry = select_bus(hosted_mass, catalog.buses, label);
  bus.name = entry.name;
  bus.build_cost = entry.build_cost;
  bus.mass = entry.mass;
  bus.replacement = entry.replacement;
  return bus;
}

/// One fraction per block. A tech package is attached to every fraction iff
/// there is more than one block; a single block is the monolithic (M2) case.
inline Architecture build_architecture(const Partition& partition, const Catalog& catalog,
                                       std::string label = {}) {
  const Partition p = validate_partition(partition, catalog);
  const bool fractionated = p.blocks.size() > 1;
  if (fractionated && !catalog.techpackage) {
    throw ConfigError("fractionated architecture \"" + p.label() +
                      "\" needs a techpackage in the catalog");
  }
  Architecture arch;
  arch.label = label.empty() ? p.label() : std::move(label);
  arch.level = fractionated ? ModularityLevel::M3 : ModularityLevel::M2;
  for (const auto& block : p.blocks) {
    Fraction f;
    Kilograms hosted = 0.0;
    for (const auto& id : block) {
      f.members.push_back(catalog.at(id));
      hosted += f.members.back().mass;
    }
    if (fractionated) {
      f.techpackage = *catalog.techpackage;
      f.techpackage->id = catalog.techpackage->id + ":" + detail::join(block, '+');
      hosted += f.techpackage->mass;
    }
    f.bus = resolve_bus(block, hosted, catalog);
    arch.fractions.push_back(std::move(f));
  }
  return arch;
}

/// Structural checks on a hand-assembled architecture.
inline void validate_architecture(const Architecture& arch) {
  if (arch.fractions.empty()) throw ConfigError("architecture \"" + arch.label + "\" is empty");
  std::set<std::string> seen;
  for (const auto& f : arch.fractions) {
    if (f.members.empty()) {
      throw ConfigError("architecture \"" + arch.label + "\" has an empty fraction");
    }
    for (const auto& m : f.members) {
      if (!seen.insert(m.id).second) {
        throw ConfigError("architecture \"" + arch.label + "\": \"" + m.id +
                          "\" in more than one fraction");
      }
    }
  }
}

}  // namespace fracval
