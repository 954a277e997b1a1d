#include "pinn/config.hpp"

#include "pinn/error.hpp"

#include <json.hpp>

#include <fstream>
#include <set>
#include <sstream>

namespace pinn {

using nlohmann::json;

namespace {

void reject_unknown(const json& obj, const std::string& section, const std::set<std::string>& allowed)
{
    for (const auto& [key, value] : obj.items()) {
        if (!allowed.contains(key)) {
            throw ConfigError("unknown config key '" + section + key + "'");
        }
    }
}

const json& section_of(const json& root, const std::string& name)
{
    static const json empty = json::object();
    if (!root.contains(name)) {
        return empty;
    }
    const json& s = root.at(name);
    if (!s.is_object()) {
        throw ConfigError("config section '" + name + "' must be an object");
    }
    return s;
}

template <typename T>
T read(const json& obj, const std::string& path, const std::string& key)
{
    try {
        return obj.at(key).get<T>();
    } catch (const json::exception&) {
        throw ConfigError("config key '" + path + key + "' has the wrong type");
    }
}

double read_number(const json& obj, const std::string& path, const std::string& key)
{
    if (!obj.at(key).is_number()) {
        throw ConfigError("config key '" + path + key + "' must be a number");
    }
    return obj.at(key).get<double>();
}

template <typename T>
void optional(const json& obj, const std::string& path, const std::string& key, T& dest)
{
    if (!obj.contains(key)) {
        return;
    }
    if constexpr (std::is_same_v<T, double>) {
        dest = read_number(obj, path, key);
    } else if constexpr (std::is_same_v<T, bool>) {
        if (!obj.at(key).is_boolean()) {
            throw ConfigError("config key '" + path + key + "' must be true or false");
        }
        dest = obj.at(key).get<bool>();
    } else if constexpr (std::is_integral_v<T>) {
        const json& v = obj.at(key);
        if (!v.is_number_integer()) {
            throw ConfigError("config key '" + path + key + "' must be an integer");
        }
        if constexpr (std::is_unsigned_v<T>) {
            if (v.is_number_unsigned()) {
                dest = v.get<T>();
            } else if (v.get<std::int64_t>() >= 0) {
                dest = static_cast<T>(v.get<std::int64_t>());
            } else {
                throw ConfigError("config key '" + path + key + "' must be non-negative");
            }
        } else {
            dest = static_cast<T>(v.get<std::int64_t>());
        }
    } else {
        dest = read<T>(obj, path, key);
    }
}

double required_number(const json& obj, const std::string& path, const std::string& key)
{
    if (!obj.contains(key)) {
        throw ConfigError("missing required config key '" + path + key + "'");
    }
    return read_number(obj, path, key);
}

void apply_override(json& root, const std::string& spec)
{
    const auto eq = spec.find('=');
    if (eq == std::string::npos || eq == 0) {
        throw ConfigError("override '" + spec + "' must look like key.path=value");
    }
    const std::string path = spec.substr(0, eq);
    const std::string raw = spec.substr(eq + 1);
    json value = json::parse(raw, nullptr, false);
    if (value.is_discarded()) {
        value = raw;
    }
    json* node = &root;
    std::size_t start = 0;
    while (true) {
        const auto dot = path.find('.', start);
        const std::string key = path.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
        if (key.empty()) {
            throw ConfigError("override '" + spec + "' has an empty key segment");
        }
        if (dot == std::string::npos) {
            (*node)[key] = value;
            return;
        }
        if (!node->contains(key)) {
            (*node)[key] = json::object();
        }
        node = &(*node)[key];
        if (!node->is_object()) {
            throw ConfigError("override '" + spec + "': '" + key + "' is not a section");
        }
        start = dot + 1;
    }
}

}  // namespace

void RunConfig::validate() const
{
    try {
        option.validate();
        network.validate();
        train.validate();
    } catch (const DomainError& e) {
        throw ConfigError(std::string("invalid config: ") + e.what());
    }
    if (output_dir.empty()) {
        throw ConfigError("config key 'output_dir' must be non-empty");
    }
}

RunConfig parse_run_config(const std::string& json_text, const std::vector<std::string>& overrides)
{
    json root = json::parse(json_text, nullptr, false, true);
    if (root.is_discarded() || !root.is_object()) {
        throw ConfigError("config is not a valid JSON object");
    }
    for (const auto& o : overrides) {
        apply_override(root, o);
    }
    reject_unknown(root, "", {"option", "network", "train", "sampler", "output_dir"});

    RunConfig cfg;
    if (!root.contains("option")) {
        throw ConfigError("missing required config section 'option'");
    }
    const json& opt = section_of(root, "option");
    reject_unknown(opt, "option.", {"style", "strike", "rate", "sigma", "maturity", "s_min", "s_max"});
    if (!opt.contains("style")) {
        throw ConfigError("missing required config key 'option.style'");
    }
    try {
        cfg.option.style = parse_option_style(read<std::string>(opt, "option.", "style"));
    } catch (const DomainError& e) {
        throw ConfigError(std::string("config key 'option.style': ") + e.what());
    }
    cfg.option.strike = required_number(opt, "option.", "strike");
    cfg.option.rate = required_number(opt, "option.", "rate");
    cfg.option.sigma = required_number(opt, "option.", "sigma");
    cfg.option.maturity = required_number(opt, "option.", "maturity");
    cfg.option.s_min = required_number(opt, "option.", "s_min");
    cfg.option.s_max = required_number(opt, "option.", "s_max");

    const json& net = section_of(root, "network");
    reject_unknown(net, "network.",
                   {"width", "deep_layers", "shallow_layers", "residual_connections", "s_shift", "s_scale", "t_scale",
                    "output_scale", "seed"});
    cfg.network.s_shift = cfg.option.strike;
    cfg.network.s_scale = cfg.option.strike;
    cfg.network.t_scale = cfg.option.maturity;
    cfg.network.output_scale = cfg.option.strike;
    optional(net, "network.", "width", cfg.network.width);
    optional(net, "network.", "deep_layers", cfg.network.deep_layers);
    optional(net, "network.", "shallow_layers", cfg.network.shallow_layers);
    optional(net, "network.", "residual_connections", cfg.network.residual_connections);
    optional(net, "network.", "s_shift", cfg.network.s_shift);
    optional(net, "network.", "s_scale", cfg.network.s_scale);
    optional(net, "network.", "t_scale", cfg.network.t_scale);
    optional(net, "network.", "output_scale", cfg.network.output_scale);
    optional(net, "network.", "seed", cfg.network.seed);

    const json& tr = section_of(root, "train");
    reject_unknown(tr, "train.",
                   {"epochs", "learning_rate", "adam_beta1", "adam_beta2", "adam_eps", "beta_pde", "checkpoint_every",
                    "seed", "penalty"});
    optional(tr, "train.", "epochs", cfg.train.epochs);
    optional(tr, "train.", "learning_rate", cfg.train.learning_rate);
    optional(tr, "train.", "adam_beta1", cfg.train.adam_beta1);
    optional(tr, "train.", "adam_beta2", cfg.train.adam_beta2);
    optional(tr, "train.", "adam_eps", cfg.train.adam_eps);
    optional(tr, "train.", "beta_pde", cfg.train.beta_pde);
    optional(tr, "train.", "checkpoint_every", cfg.train.checkpoint_every);
    optional(tr, "train.", "seed", cfg.train.seed);
    if (tr.contains("penalty")) {
        const json& pen = tr.at("penalty");
        if (!pen.is_object()) {
            throw ConfigError("config section 'train.penalty' must be an object");
        }
        reject_unknown(pen, "train.penalty.", {"complementarity", "hinge_f", "hinge_v"});
        optional(pen, "train.penalty.", "complementarity", cfg.train.penalty.complementarity);
        optional(pen, "train.penalty.", "hinge_f", cfg.train.penalty.hinge_f);
        optional(pen, "train.penalty.", "hinge_v", cfg.train.penalty.hinge_v);
    }

    const json& smp = section_of(root, "sampler");
    reject_unknown(smp, "sampler.", {"n_interior", "n_boundary", "n_terminal", "seed"});
    optional(smp, "sampler.", "n_interior", cfg.train.sampler.n_interior);
    optional(smp, "sampler.", "n_boundary", cfg.train.sampler.n_boundary);
    optional(smp, "sampler.", "n_terminal", cfg.train.sampler.n_terminal);
    optional(smp, "sampler.", "seed", cfg.train.sampler.seed);

    if (root.contains("output_dir")) {
        if (!root.at("output_dir").is_string()) {
            throw ConfigError("config key 'output_dir' must be a string");
        }
        cfg.output_dir = root.at("output_dir").get<std::string>();
    }
    cfg.validate();
    return cfg;
}

RunConfig load_run_config(const std::string& path, const std::vector<std::string>& overrides)
{
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("cannot open config file '" + path + "'");
    }
    std::ostringstream text;
    text << in.rdbuf();
    return parse_run_config(text.str(), overrides);
}

std::string to_json(const RunConfig& c)
{
    json root;
    root["option"] = {{"style", to_string(c.option.style)}, {"strike", c.option.strike}, {"rate", c.option.rate},
                      {"sigma", c.option.sigma},           {"maturity", c.option.maturity},
                      {"s_min", c.option.s_min},           {"s_max", c.option.s_max}};
    root["network"] = {{"width", c.network.width},
                       {"deep_layers", c.network.deep_layers},
                       {"shallow_layers", c.network.shallow_layers},
                       {"residual_connections", c.network.residual_connections},
                       {"s_shift", c.network.s_shift},
                       {"s_scale", c.network.s_scale},
                       {"t_scale", c.network.t_scale},
                       {"output_scale", c.network.output_scale},
                       {"seed", c.network.seed}};
    root["train"] = {{"epochs", c.train.epochs},
                     {"learning_rate", c.train.learning_rate},
                     {"adam_beta1", c.train.adam_beta1},
                     {"adam_beta2", c.train.adam_beta2},
                     {"adam_eps", c.train.adam_eps},
                     {"beta_pde", c.train.beta_pde},
                     {"checkpoint_every", c.train.checkpoint_every},
                     {"seed", c.train.seed},
                     {"penalty",
                      {{"complementarity", c.train.penalty.complementarity},
                       {"hinge_f", c.train.penalty.hinge_f},
                       {"hinge_v", c.train.penalty.hinge_v}}}};
    root["sampler"] = {{"n_interior", c.train.sampler.n_interior},
                       {"n_boundary", c.train.sampler.n_boundary},
                       {"n_terminal", c.train.sampler.n_terminal},
                       {"seed", c.train.sampler.seed}};
    root["output_dir"] = c.output_dir;
    return root.dump(2) + "\n";
}

}  // namespace pinn
