#include "hearsay/scenario.hpp"

#include <charconv>
#include <set>
#include <type_traits>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace hearsay {

namespace {

using nlohmann::json;

const std::set<std::string> kTopKeys = {
    "n",         "t",         "epsilon",           "initial_balance", "seed",   "seeds", "seed_range",
    "d_min",     "d_max",     "fifo_channels",     "condition3_strict", "msg_cost_c", "agents", "script",
    "max_steps", "description",
};

template <typename T>
T get_number(const json& obj, const char* key, T fallback) {
  if (!obj.contains(key)) return fallback;
  const json& v = obj.at(key);
  if constexpr (std::is_unsigned_v<T>) {
    if (!v.is_number_integer() || v.get<std::int64_t>() < 0) {
      throw ConfigError(std::string(key) + " must be a non-negative integer");
    }
  } else {
    if (!v.is_number_integer()) throw ConfigError(std::string(key) + " must be an integer");
  }
  return v.get<T>();
}

bool get_bool(const json& obj, const char* key, bool fallback) {
  if (!obj.contains(key)) return fallback;
  if (!obj.at(key).is_boolean()) throw ConfigError(std::string(key) + " must be a boolean");
  return obj.at(key).get<bool>();
}

AgentId get_agent(const json& obj, const char* key) {
  if (!obj.contains(key)) throw ConfigError(std::string("missing ") + key);
  return AgentId{get_number<std::uint32_t>(obj, key, 0)};
}

std::uint64_t to_u64(std::string_view s) {
  std::uint64_t v = 0;
  auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || end != s.data() + s.size()) throw ConfigError("bad number: " + std::string(s));
  return v;
}

StrategyParams parse_params(const json& p) {
  StrategyParams out;
  if (p.is_null()) return out;
  if (!p.is_object()) throw ConfigError("agent params must be an object");
  if (p.contains("channels")) {
    for (const auto& c : p.at("channels")) out.channels.insert(AgentId{c.get<std::uint32_t>()});
  }
  if (p.contains("seqs")) {
    for (const auto& s : p.at("seqs")) out.seqs.insert(s.get<Seq>());
  }
  if (p.contains("skip_probability")) {
    if (!p.at("skip_probability").is_number()) throw ConfigError("skip_probability must be a number");
    out.skip_probability = p.at("skip_probability").get<double>();
  }
  out.excess = get_number<Money>(p, "excess", out.excess);
  return out;
}

Action parse_action(const json& a) {
  if (!a.is_object() || a.size() != 1) throw ConfigError("action must be an object with exactly one key");
  if (a.contains("pay")) {
    const json& p = a.at("pay");
    PayAction pay;
    pay.to = get_agent(p, "to");
    if (!p.contains("amount")) throw ConfigError("pay action needs an amount");
    pay.amount = get_number<Money>(p, "amount", 0);
    pay.convert_fees = get_bool(p, "convert_fees", false);
    return pay;
  }
  if (a.contains("backfill")) return BackfillAction{};
  throw ConfigError("unknown action: " + a.begin().key());
}

}  // namespace

std::vector<std::uint64_t> parse_seed_range(const std::string& text) {
  const auto dots = text.find("..");
  if (dots == std::string::npos) return {to_u64(text)};
  const auto lo = to_u64(std::string_view(text).substr(0, dots));
  const auto hi = to_u64(std::string_view(text).substr(dots + 2));
  if (hi < lo) throw ConfigError("empty seed range: " + text);
  std::vector<std::uint64_t> out;
  out.reserve(hi - lo + 1);
  for (auto s = lo; s <= hi; ++s) out.push_back(s);
  return out;
}

double parse_cost(const std::string& text) {
  std::size_t used = 0;
  try {
    const auto slash = text.find('/');
    if (slash == std::string::npos) {
      const double v = std::stod(text, &used);
      if (used != text.size()) throw ConfigError("bad cost: " + text);
      return v;
    }
    const double p = std::stod(text.substr(0, slash));
    const double q = std::stod(text.substr(slash + 1));
    if (q == 0) throw ConfigError("bad cost: " + text);
    return p / q;
  } catch (const std::logic_error&) {
    throw ConfigError("bad cost: " + text);
  }
}

Scenario parse_scenario(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("scenario is not valid JSON: ") + e.what());
  }
  if (!doc.is_object()) throw ConfigError("scenario must be an object");
  for (const auto& [key, _] : doc.items()) {
    if (!kTopKeys.contains(key)) throw ConfigError("unknown scenario key: " + key);
  }

  Scenario sc;
  SimConfig& c = sc.config;
  try {
    c.n = get_number<std::uint32_t>(doc, "n", c.n);
    c.t = get_number<std::uint32_t>(doc, "t", c.t);
    c.epsilon = get_number<Money>(doc, "epsilon", c.epsilon);
    c.initial_balance = get_number<Money>(doc, "initial_balance", c.initial_balance);
    c.d_min = get_number<Tick>(doc, "d_min", c.d_min);
    c.d_max = get_number<Tick>(doc, "d_max", c.d_max);
    c.fifo_channels = get_bool(doc, "fifo_channels", c.fifo_channels);
    c.condition3_strict = get_bool(doc, "condition3_strict", c.condition3_strict);
    c.max_steps = get_number<std::uint64_t>(doc, "max_steps", c.max_steps);

    const int seed_keys = doc.contains("seed") + doc.contains("seeds") + doc.contains("seed_range");
    if (seed_keys > 1) throw ConfigError("give only one of seed, seeds, seed_range");
    if (doc.contains("seeds")) {
      for (const auto& s : doc.at("seeds")) sc.seeds.push_back(s.get<std::uint64_t>());
      if (sc.seeds.empty()) throw ConfigError("seeds must not be empty");
    } else if (doc.contains("seed_range")) {
      const json& r = doc.at("seed_range");
      if (r.is_string()) {
        sc.seeds = parse_seed_range(r.get<std::string>());
      } else if (r.is_array() && r.size() == 2) {
        sc.seeds = parse_seed_range(std::to_string(r[0].get<std::uint64_t>()) + ".." +
                                    std::to_string(r[1].get<std::uint64_t>()));
      } else {
        throw ConfigError("seed_range must be \"a..b\" or [a, b]");
      }
    } else {
      sc.seeds.push_back(get_number<std::uint64_t>(doc, "seed", c.seed));
    }
    c.seed = sc.seeds.front();

    if (doc.contains("msg_cost_c")) {
      const json& m = doc.at("msg_cost_c");
      if (m.is_number()) {
        sc.msg_cost_c = m.get<double>();
      } else if (m.is_string()) {
        sc.msg_cost_c = parse_cost(m.get<std::string>());
      } else {
        throw ConfigError("msg_cost_c must be a number or a fraction string");
      }
      if (sc.msg_cost_c < 0) throw ConfigError("msg_cost_c must be non-negative");
    }

    if (doc.contains("agents")) {
      for (const auto& a : doc.at("agents")) {
        AgentSpec spec;
        spec.id = get_agent(a, "id");
        if (!a.contains("kind") || !a.at("kind").is_string()) throw ConfigError("agent needs a kind");
        try {
          spec.strategy.kind = strategy_kind_from_string(a.at("kind").get<std::string>());
        } catch (const std::invalid_argument& e) {
          throw ConfigError(e.what());
        }
        spec.strategy.params = parse_params(a.value("params", json()));
        c.agents.push_back(std::move(spec));
      }
    }

    if (doc.contains("script")) {
      for (const auto& s : doc.at("script")) {
        ScriptAction step;
        step.tick = get_number<Tick>(s, "tick", 0);
        step.agent = get_agent(s, "agent");
        if (!s.contains("action")) throw ConfigError("script entry needs an action");
        step.action = parse_action(s.at("action"));
        c.script.push_back(std::move(step));
      }
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed scenario: ") + e.what());
  }

  validate(c);
  return sc;
}

Scenario load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_scenario(buf.str());
}

}  // namespace hearsay
