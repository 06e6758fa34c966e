#pragma once

#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "macdoall/adversary.hpp"
#include "macdoall/engine.hpp"
#include "macdoall/harness.hpp"

namespace macdoall {

using Json = nlohmann::json;

/// A single simulation as described by a config file.
struct RunConfig {
  RunSetup setup;
  AdversarySpec adversary;
  StrategyConfig strategy;
};

namespace detail {

template <typename T>
T get_or(const Json& j, const char* key, T fallback) {
  return j.contains(key) ? j.at(key).get<T>() : fallback;
}

inline std::vector<StationId> id_list(const Json& j) {
  std::vector<StationId> out;
  for (const auto& v : j) out.push_back(v.get<StationId>());
  return out;
}

inline std::vector<std::uint32_t> lengths_of(const Json& j) {
  std::vector<std::uint32_t> out;
  for (const auto& v : j) out.push_back(v.get<std::uint32_t>());
  return out;
}

/// A number or an expression in p, as a string.
inline std::string expression_of(const Json& j) {
  if (j.is_number_integer()) return std::to_string(j.get<std::int64_t>());
  if (j.is_string()) return j.get<std::string>();
  throw ConfigInvalid("expected an integer or an expression in p");
}

inline EchoSemantics parse_echo(std::string_view s) {
  if (s == "prose") return EchoSemantics::Prose;
  if (s == "algorithm") return EchoSemantics::Algorithm;
  throw ConfigInvalid("unknown echo semantics '" + std::string(s) + "'");
}

}  // namespace detail

/// Either an explicit order
///   {"elements": [1, 2, 3], "covers": [[1, 2], [2, 3]]}
/// or a generated family
///   {"family": "chain", "size": 5}
///   {"family": "antichain", "size": 5}
///   {"family": "k_chains", "lengths": [3, 2]}  or  {"family": "k_chains", "k": 2, "size": 5}
///   {"family": "random", "size": 6, "density": 0.3, "seed": 7}
/// Ids start at "first" (default 1).
inline Poset parse_poset(const Json& j) {
  if (j.contains("elements")) {
    std::vector<Relation> rel;
    if (j.contains("covers")) {
      for (const auto& c : j.at("covers")) {
        if (!c.is_array() || c.size() != 2) throw ConfigInvalid("each cover is a pair [lower, upper]");
        rel.emplace_back(c[0].get<StationId>(), c[1].get<StationId>());
      }
    }
    return Poset::build(detail::id_list(j.at("elements")), rel);
  }
  const auto family = j.at("family").get<std::string>();
  const auto first = detail::get_or<StationId>(j, "first", 1);
  if (family == "chain") return generate::chain(j.at("size").get<std::uint32_t>(), first);
  if (family == "antichain") return generate::antichain(j.at("size").get<std::uint32_t>(), first);
  if (family == "k_chains") {
    if (j.contains("lengths")) return generate::chains_of(detail::lengths_of(j.at("lengths")), first);
    const auto size = j.at("size").get<std::uint32_t>();
    return generate::k_chains(generate::balanced_lengths(size, j.at("k").get<std::uint32_t>()), size, first);
  }
  if (family == "random") {
    return generate::random(j.at("size").get<std::uint32_t>(), detail::get_or<double>(j, "density", 0.3),
                            detail::get_or<std::uint64_t>(j, "seed", 0), first);
  }
  throw ConfigInvalid("unknown poset family '" + family + "'");
}

inline StrategyConfig parse_strategy(const Json& j) {
  StrategyConfig s;
  if (j.is_string()) {
    s.name = j.get<std::string>();
  } else {
    s.name = detail::get_or<std::string>(j, "name", "noop");
    s.seed = detail::get_or<std::uint64_t>(j, "seed", 0);
    s.rate = detail::get_or<double>(j, "rate", s.rate);
    s.round = detail::get_or<Round>(j, "round", s.round);
    if (j.contains("schedule")) {
      for (const auto& [round, ids] : j.at("schedule").items()) {
        s.schedule[std::stoll(round)] = detail::id_list(ids);
      }
    }
  }
  make_strategy(s);  // unknown names fail here
  return s;
}

/// {"label": "k_chain_ordered", "f": 4, "k": 2, "delay": 0, "order": {...}}
/// Without "order" the label's default order is used.
inline AdversarySpec parse_adversary(const Json& j, std::uint32_t p) {
  AdversaryTemplate tpl;
  tpl.label = parse_label(detail::get_or<std::string>(j, "label", "weakly_adaptive"));
  tpl.delay = detail::get_or<std::uint32_t>(j, "delay", 0);
  if (j.contains("order")) tpl.order = AdversarySpec::share(parse_poset(j.at("order")));
  const auto f = static_cast<std::uint32_t>(
      eval_expression(detail::expression_of(j.contains("f") ? j.at("f") : Json(0)), p));
  return tpl.instantiate(p, f, detail::get_or<std::uint32_t>(j, "k", 0));
}

inline ProtocolOptions parse_protocol_options(const Json& j) {
  ProtocolOptions o;
  if (j.contains("echo")) o.echo = detail::parse_echo(j.at("echo").get<std::string>());
  o.robal_force_main_loop = detail::get_or<bool>(j, "robal_force_main_loop", false);
  return o;
}

/// Wraps JSON access errors as ConfigInvalid.
template <typename F>
auto config_guard(F&& body) -> decltype(body()) {
  try {
    return body();
  } catch (const nlohmann::json::exception& e) {
    throw ConfigInvalid(e.what());
  } catch (const std::invalid_argument& e) {
    throw ConfigInvalid(e.what());
  }
}

inline RunConfig parse_run_config(const Json& j) {
  return config_guard([&] {
    RunConfig rc;
    auto& s = rc.setup;
    s.protocol = parse_protocol(detail::get_or<std::string>(j, "protocol", "two_lists"));
    s.channel = parse_channel(detail::get_or<std::string>(j, "channel", "nocd"));
    s.p = j.at("p").get<std::uint32_t>();
    s.t = j.at("t").get<std::uint32_t>();
    s.seed = detail::get_or<std::uint64_t>(j, "seed", 0);
    s.round_cap = detail::get_or<Round>(j, "round_cap", 0);
    s.protocol_options = parse_protocol_options(j);
    rc.adversary = j.contains("adversary") ? parse_adversary(j.at("adversary"), s.p) : AdversarySpec::none();
    if (j.contains("strategy")) rc.strategy = parse_strategy(j.at("strategy"));
    rc.adversary.validate(s.p);
    return rc;
  });
}

/// {"protocol": "grubtech", "channel": "nocd",
///  "adversary": {"label": "weakly_adaptive", "delay": 0, "order": {...}},
///  "strategy": {"name": "leader_hunter"},
///  "grid": {"p": [64, 128], "t": ["p"], "f": ["p/2", "p-p/8"], "k": [4]},
///  "seeds_per_cell": 100, "master_seed": 1, "bound": "grubtech"}
inline SweepConfig parse_sweep_config(const Json& j) {
  return config_guard([&] {
    SweepConfig c;
    c.protocol = parse_protocol(detail::get_or<std::string>(j, "protocol", "two_lists"));
    c.channel = parse_channel(detail::get_or<std::string>(j, "channel", "nocd"));
    c.protocol_options = parse_protocol_options(j);
    if (j.contains("adversary")) {
      const auto& a = j.at("adversary");
      c.adversary.label = parse_label(detail::get_or<std::string>(a, "label", "weakly_adaptive"));
      c.adversary.delay = detail::get_or<std::uint32_t>(a, "delay", 0);
      if (a.contains("order")) c.adversary.order = AdversarySpec::share(parse_poset(a.at("order")));
    }
    if (j.contains("strategy")) c.strategy = parse_strategy(j.at("strategy"));
    const auto& g = j.at("grid");
    c.ps = g.at("p").get<std::vector<std::uint32_t>>();
    if (g.contains("t")) {
      c.ts.clear();
      for (const auto& v : g.at("t")) c.ts.push_back(detail::expression_of(v));
    }
    if (g.contains("f")) {
      c.fs.clear();
      for (const auto& v : g.at("f")) c.fs.push_back(detail::expression_of(v));
    }
    if (g.contains("k")) c.ks = g.at("k").get<std::vector<std::uint32_t>>();
    c.seeds_per_cell = detail::get_or<std::uint32_t>(j, "seeds_per_cell", c.seeds_per_cell);
    c.master_seed = detail::get_or<std::uint64_t>(j, "master_seed", c.master_seed);
    c.bound = detail::get_or<std::string>(j, "bound", "");
    c.round_cap = detail::get_or<Round>(j, "round_cap", 0);
    expand_grid(c);  // surfaces bad cells before any run starts
    return c;
  });
}

inline Json load_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigInvalid("cannot open " + path);
  try {
    return Json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigInvalid(path + ": " + e.what());
  }
}

}  // namespace macdoall
