#include "medn/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"
#include "medn/environment.hpp"
#include "medn/errors.hpp"

namespace medn {
namespace {

using nlohmann::json;

// Reads typed fields out of a JSON object, collecting violations instead of
// stopping at the first one.
class FieldReader {
public:
    FieldReader(const json& object, std::string prefix, std::vector<std::string>& violations)
        : object_(object), prefix_(std::move(prefix)), violations_(violations) {
        if (!object_.is_object()) {
            violations_.push_back(where("") + "must be an object");
        }
    }

    ~FieldReader() {
        if (!object_.is_object()) {
            return;
        }
        for (const auto& [key, value] : object_.items()) {
            if (!seen_.contains(key)) {
                violations_.push_back(where(key) + "is not a recognized setting");
            }
        }
    }

    FieldReader(const FieldReader&) = delete;
    FieldReader& operator=(const FieldReader&) = delete;

    template <typename T>
    void read(const std::string& key, T& out) {
        const json* v = find(key);
        if (v == nullptr) {
            return;
        }
        bool ok = true;
        if constexpr (std::is_floating_point_v<T>) {
            ok = v->is_number();
        } else if constexpr (std::is_integral_v<T>) {
            ok = v->is_number_unsigned();
        }
        if (ok) {
            try {
                out = v->get<T>();
                return;
            } catch (const json::exception&) {
            }
        }
        violations_.push_back(where(key) + "has the wrong type (" + v->dump() + ")");
    }

    template <typename Parse, typename T>
    void read_enum(const std::string& key, T& out, Parse parse) {
        std::string name;
        const std::size_t before = violations_.size();
        read(key, name);
        if (name.empty() || violations_.size() != before) {
            return;
        }
        try {
            out = parse(name);
        } catch (const ContractError& e) {
            violations_.push_back(where(key) + e.what());
        }
    }

    const json* child(const std::string& key) { return find(key); }

    std::string where(const std::string& key) const {
        std::string path = prefix_;
        if (!key.empty()) {
            path += path.empty() ? key : "." + key;
        }
        return path.empty() ? "" : path + " ";
    }

private:
    const json* find(const std::string& key) {
        seen_.insert(key);
        if (!object_.is_object()) {
            return nullptr;
        }
        const auto it = object_.find(key);
        return it == object_.end() ? nullptr : &*it;
    }

    const json& object_;
    std::string prefix_;
    std::vector<std::string>& violations_;
    std::set<std::string> seen_;
};

void read_agent(const json& j, AgentConfig& agent, std::vector<std::string>& violations) {
    FieldReader r(j, "agent", violations);
    r.read("epsilon_start", agent.epsilon_start);
    r.read("epsilon_end", agent.epsilon_end);
    r.read("epsilon_decay_steps", agent.epsilon_decay_steps);
    r.read("target_sync_period", agent.target_sync_period);
    r.read("batch_size", agent.batch_size);
    r.read("warmup_steps", agent.warmup_steps);
    r.read("gamma", agent.gamma);
    r.read("replay_capacity", agent.replay_capacity);
    r.read_enum("loss", agent.loss, loss_kind_from_string);
    if (const json* h = r.child("huber_delta"); h != nullptr && !h->is_null()) {
        if (h->is_number()) {
            agent.huber_delta = h->get<double>();
        } else {
            violations.push_back(r.where("huber_delta") + "must be a number or null");
        }
    }
    if (const json* e = r.child("entropy")) {
        FieldReader er(*e, "agent.entropy", violations);
        er.read("alpha", agent.entropy.alpha);
        er.read("temperature", agent.entropy.temperature);
        er.read("anneal_steps", agent.entropy_anneal_steps);
    }
}

json agent_json(const AgentConfig& a) {
    return json{
        {"epsilon_start", a.epsilon_start},
        {"epsilon_end", a.epsilon_end},
        {"epsilon_decay_steps", a.epsilon_decay_steps},
        {"target_sync_period", a.target_sync_period},
        {"batch_size", a.batch_size},
        {"warmup_steps", a.warmup_steps},
        {"gamma", a.gamma},
        {"replay_capacity", a.replay_capacity},
        {"loss", to_string(a.loss)},
        {"huber_delta", a.huber_delta ? json(*a.huber_delta) : json(nullptr)},
        {"entropy",
         {{"alpha", a.entropy.alpha},
          {"temperature", a.entropy.temperature},
          {"anneal_steps", a.entropy_anneal_steps}}},
    };
}

} // namespace

std::vector<std::string> RunConfig::violations() const {
    std::vector<std::string> v = agent.violations();
    const auto names = registered_environments();
    auto check_env = [&](const std::string& name, const std::string& field) {
        if (std::find(names.begin(), names.end(), name) == names.end()) {
            std::string known;
            for (const auto& n : names) {
                known += known.empty() ? n : ", " + n;
            }
            v.push_back(field + " '" + name + "' is not registered (registered: " + known + ")");
        }
    };
    check_env(env_name, "env");
    for (const auto& e : compare_envs) {
        check_env(e, "compare.envs entry");
    }
    if (seeds.empty()) {
        v.emplace_back("seeds must not be empty");
    }
    if (total_steps <= agent.warmup_steps) {
        v.push_back("total_steps (" + std::to_string(total_steps) +
                    ") must exceed agent.warmup_steps (" + std::to_string(agent.warmup_steps) + ")");
    }
    if (eval_episodes == 0) {
        v.emplace_back("eval.episodes must be at least 1");
    }
    if (!(eval_epsilon >= 0.0 && eval_epsilon <= 1.0)) {
        v.emplace_back("eval.epsilon must lie in [0, 1]");
    }
    for (std::size_t w : network.hidden) {
        if (w == 0) {
            v.emplace_back("network.hidden widths must be positive");
            break;
        }
    }
    if (!(optimizer.learning_rate > 0.0)) {
        v.emplace_back("optimizer.learning_rate must be > 0");
    }
    if (!(optimizer.decay >= 0.0 && optimizer.decay < 1.0)) {
        v.emplace_back("optimizer.decay must lie in [0, 1)");
    }
    if (!(optimizer.epsilon > 0.0)) {
        v.emplace_back("optimizer.epsilon must be > 0");
    }
    for (const auto& m : compare_methods) {
        if (m != "ME" && m != "DN") {
            v.push_back("compare.methods entry '" + m + "' is not a known method (ME, DN)");
        }
    }
    if (output_dir.empty()) {
        v.emplace_back("output_dir must not be empty");
    }
    return v;
}

void RunConfig::validate() const {
    if (auto v = violations(); !v.empty()) {
        throw ConfigError(std::move(v));
    }
}

RunConfig parse_run_config(const std::string& json_text) {
    json root;
    try {
        root = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw ConfigError({std::string("config is not valid JSON: ") + e.what()});
    }
    RunConfig c;
    std::vector<std::string> violations;
    {
        FieldReader r(root, "", violations);
        r.read("env", c.env_name);
        r.read("total_steps", c.total_steps);
        r.read("seeds", c.seeds);
        std::string out = c.output_dir.string();
        r.read("output_dir", out);
        c.output_dir = out;
        if (const json* e = r.child("eval")) {
            FieldReader er(*e, "eval", violations);
            er.read("episodes", c.eval_episodes);
            er.read("epsilon", c.eval_epsilon);
        }
        if (const json* a = r.child("agent")) {
            read_agent(*a, c.agent, violations);
        }
        if (const json* n = r.child("network")) {
            FieldReader nr(*n, "network", violations);
            nr.read_enum("architecture", c.network.architecture, architecture_from_string);
            nr.read_enum("aggregator", c.network.aggregator, aggregator_from_string);
            nr.read("hidden", c.network.hidden);
        }
        if (const json* o = r.child("optimizer")) {
            FieldReader orr(*o, "optimizer", violations);
            orr.read_enum("kind", c.optimizer.kind, optimizer_kind_from_string);
            orr.read("learning_rate", c.optimizer.learning_rate);
            orr.read("decay", c.optimizer.decay);
            orr.read("epsilon", c.optimizer.epsilon);
        }
        if (const json* m = r.child("compare")) {
            FieldReader mr(*m, "compare", violations);
            mr.read("methods", c.compare_methods);
            mr.read("envs", c.compare_envs);
        }
    }
    for (auto& v : c.violations()) {
        violations.push_back(std::move(v));
    }
    if (!violations.empty()) {
        throw ConfigError(std::move(violations));
    }
    return c;
}

RunConfig load_run_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot read config '" + path.string() + "'");
    }
    std::ostringstream text;
    text << in.rdbuf();
    return parse_run_config(text.str());
}

std::string dump_run_config(const RunConfig& c) {
    const json root{
        {"env", c.env_name},
        {"total_steps", c.total_steps},
        {"seeds", c.seeds},
        {"output_dir", c.output_dir.string()},
        {"eval", {{"episodes", c.eval_episodes}, {"epsilon", c.eval_epsilon}}},
        {"agent", agent_json(c.agent)},
        {"network",
         {{"architecture", to_string(c.network.architecture)},
          {"aggregator", to_string(c.network.aggregator)},
          {"hidden", c.network.hidden}}},
        {"optimizer",
         {{"kind", to_string(c.optimizer.kind)},
          {"learning_rate", c.optimizer.learning_rate},
          {"decay", c.optimizer.decay},
          {"epsilon", c.optimizer.epsilon}}},
        {"compare", {{"methods", c.compare_methods}, {"envs", c.compare_envs}}},
    };
    return root.dump(2) + "\n";
}

} // namespace medn
