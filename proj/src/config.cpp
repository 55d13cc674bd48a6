#include "pipenet/config.h"

#include "pipenet/io.h"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <functional>
#include <sstream>
#include <type_traits>

namespace pipenet {

namespace pt = boost::property_tree;

namespace {

double to_double(const std::string& key, const std::string& value)
{
    double v = 0.0;
    if (!parse_double(trim(value), v)) {
        throw ConfigError("config key '" + key + "': '" + value + "' is not a number");
    }
    return v;
}

long long to_integer(const std::string& key, const std::string& value)
{
    const double v = to_double(key, value);
    if (v != static_cast<double>(static_cast<long long>(v))) {
        throw ConfigError("config key '" + key + "': '" + value + "' is not an integer");
    }
    return static_cast<long long>(v);
}

std::size_t to_count(const std::string& key, const std::string& value)
{
    const long long v = to_integer(key, value);
    if (v < 0) {
        throw ConfigError("config key '" + key + "' must not be negative");
    }
    return static_cast<std::size_t>(v);
}

bool to_bool(const std::string& key, const std::string& value)
{
    const auto v = trim(value);
    if (v == "true" || v == "yes" || v == "on" || v == "1") {
        return true;
    }
    if (v == "false" || v == "no" || v == "off" || v == "0") {
        return false;
    }
    throw ConfigError("config key '" + key + "': '" + value + "' is not a boolean");
}

using Setter = std::function<void(Config&, const std::string& key, const std::string& value)>;
using Getter = std::function<std::string(const Config&)>;

struct Key {
    Setter set;
    Getter get;
};

// Ordered table of every recognised key.
const std::vector<std::pair<std::string, Key>>& keys()
{
    static const std::vector<std::pair<std::string, Key>> table = [] {
        std::vector<std::pair<std::string, Key>> t;
        auto number = [&t](const std::string& name, auto access) {
            t.push_back({name,
                         {[access](Config& c, const std::string& k, const std::string& v) {
                              access(c) = to_double(k, v);
                          },
                          [access](const Config& c) {
                              return format_exact(access(const_cast<Config&>(c)));
                          }}});
        };
        auto integer = [&t](const std::string& name, auto access) {
            t.push_back({name,
                         {[access](Config& c, const std::string& k, const std::string& v) {
                              using T = std::remove_reference_t<decltype(access(c))>;
                              if constexpr (std::is_unsigned_v<T>) {
                                  access(c) = static_cast<T>(to_count(k, v));
                              } else {
                                  access(c) = static_cast<T>(to_integer(k, v));
                              }
                          },
                          [access](const Config& c) {
                              return std::to_string(access(const_cast<Config&>(c)));
                          }}});
        };
        auto text = [&t](const std::string& name, auto access) {
            t.push_back({name,
                         {[access](Config& c, const std::string&, const std::string& v) {
                              access(c) = std::string(trim(v));
                          },
                          [access](const Config& c) { return access(const_cast<Config&>(c)); }}});
        };

        number("solver.flow_tolerance", [](Config& c) -> double& { return c.solver.flow_tolerance; });
        number("solver.head_tolerance", [](Config& c) -> double& { return c.solver.head_tolerance; });
        integer("solver.max_iterations", [](Config& c) -> int& { return c.solver.max_iterations; });
        number("solver.viscosity", [](Config& c) -> double& { return c.solver.viscosity; });
        number("solver.gravity", [](Config& c) -> double& { return c.solver.gravity; });
        number("solver.laminar_reynolds", [](Config& c) -> double& { return c.solver.laminar_reynolds; });
        number("solver.turbulent_reynolds", [](Config& c) -> double& { return c.solver.turbulent_reynolds; });
        number("solver.min_flow", [](Config& c) -> double& { return c.solver.min_flow; });

        number("energy.efficiency", [](Config& c) -> double& { return c.energy.efficiency; });
        number("energy.density", [](Config& c) -> double& { return c.energy.density; });
        t.push_back({"energy.suction_head",
                     {[](Config& c, const std::string& k, const std::string& v) {
                          if (trim(v) == "station") {
                              c.energy.suction_head.reset();
                          } else {
                              c.energy.suction_head = to_double(k, v);
                          }
                      },
                      [](const Config& c) {
                          return c.energy.suction_head ? format_exact(*c.energy.suction_head)
                                                       : std::string("station");
                      }}});
        number("energy.tariff", [](Config& c) -> double& { return c.energy.tariff; });
        number("energy.emission_factor", [](Config& c) -> double& { return c.energy.emission_factor; });

        number("setpoint.service_head", [](Config& c) -> double& { return c.setpoint.service_head; });
        number("setpoint.min_setpoint", [](Config& c) -> double& { return c.setpoint.min_setpoint; });
        number("setpoint.max_setpoint", [](Config& c) -> double& { return c.setpoint.max_setpoint; });
        number("setpoint.relaxation", [](Config& c) -> double& { return c.setpoint.relaxation; });

        number("preprocess.step", [](Config& c) -> double& { return c.preprocess.step; });
        t.push_back({"preprocess.method",
                     {[](Config& c, const std::string& k, const std::string& v) {
                          const auto m = parse_resample_method(trim(v));
                          if (!m) {
                              throw ConfigError("config key '" + k + "': unknown resample method '" + v + "'");
                          }
                          c.preprocess.method = *m;
                      },
                      [](const Config& c) { return std::string(resample_method_name(c.preprocess.method)); }}});
        integer("preprocess.max_gap", [](Config& c) -> std::size_t& { return c.preprocess.max_gap; });
        number("preprocess.static_threshold", [](Config& c) -> double& { return c.preprocess.static_threshold; });
        number("preprocess.static_min_duration",
               [](Config& c) -> double& { return c.preprocess.static_min_duration; });
        text("preprocess.reference", [](Config& c) -> std::string& { return c.preprocess.reference; });
        text("preprocess.flow_column", [](Config& c) -> std::string& { return c.preprocess.flow_column; });
        integer("preprocess.min_windows", [](Config& c) -> std::size_t& { return c.preprocess.rules.min_windows; });
        number("preprocess.max_stddev", [](Config& c) -> double& { return c.preprocess.rules.max_stddev; });

        integer("calibration.max_iterations",
                [](Config& c) -> int& { return c.calibration.options.max_iterations; });
        number("calibration.relative_tolerance",
               [](Config& c) -> double& { return c.calibration.options.relative_tolerance; });
        number("calibration.absolute_tolerance",
               [](Config& c) -> double& { return c.calibration.options.absolute_tolerance; });
        number("calibration.gradient_tolerance",
               [](Config& c) -> double& { return c.calibration.options.gradient_tolerance; });
        integer("calibration.patience", [](Config& c) -> int& { return c.calibration.options.patience; });
        integer("calibration.multistart", [](Config& c) -> int& { return c.calibration.options.multistart; });
        integer("calibration.seed", [](Config& c) -> std::uint64_t& { return c.calibration.options.seed; });
        number("calibration.fd_step", [](Config& c) -> double& { return c.calibration.options.fd_step; });
        number("calibration.min_roughness", [](Config& c) -> double& { return c.calibration.min_roughness; });
        number("calibration.max_roughness", [](Config& c) -> double& { return c.calibration.max_roughness; });
        t.push_back({"calibration.parallel",
                     {[](Config& c, const std::string& k, const std::string& v) {
                          c.calibration.options.execution =
                              to_bool(k, v) ? kernels::Execution::Parallel : kernels::Execution::Serial;
                      },
                      [](const Config& c) {
                          return std::string(c.calibration.options.execution == kernels::Execution::Parallel
                                                 ? "true"
                                                 : "false");
                      }}});
        return t;
    }();
    return table;
}

const Key* find_key(const std::string& name)
{
    for (const auto& [k, v] : keys()) {
        if (k == name) {
            return &v;
        }
    }
    return nullptr;
}

void apply(Config& cfg, const std::string& name, const std::string& value)
{
    const Key* key = find_key(name);
    if (!key) {
        throw ConfigError("unknown config key '" + name + "'");
    }
    key->set(cfg, name, value);
}

}  // namespace

void Config::validate() const
{
    try {
        solver.validate();
        energy.validate();
        setpoint.validate();
        calibration.options.solver.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
    if (!(preprocess.step > 0.0) || !(preprocess.static_min_duration >= 0.0) ||
        !(preprocess.static_threshold >= 0.0) || !(preprocess.rules.max_stddev >= 0.0)) {
        throw ConfigError("preprocess settings must be positive");
    }
    if (!(calibration.min_roughness > 0.0 && calibration.min_roughness <= calibration.max_roughness)) {
        throw ConfigError("calibration roughness bounds must satisfy 0 < min <= max");
    }
    if (calibration.options.max_iterations < 1 || calibration.options.multistart < 0 ||
        calibration.options.patience < 1 || !(calibration.options.fd_step > 0.0)) {
        throw ConfigError("calibration settings out of range");
    }
}

Config parse_config(std::string_view text, const std::vector<std::string>& overrides)
{
    pt::ptree tree;
    std::istringstream in{std::string(text)};
    try {
        pt::read_ini(in, tree);
    } catch (const pt::ini_parser_error& e) {
        throw ConfigError("config line " + std::to_string(e.line()) + ": " + e.message());
    }
    Config cfg;
    for (const auto& [section, body] : tree) {
        if (body.empty()) {
            throw ConfigError("config key '" + section + "' is outside any section");
        }
        for (const auto& [key, value] : body) {
            apply(cfg, section + "." + key, value.data());
        }
    }
    for (const std::string& o : overrides) {
        const auto eq = o.find('=');
        if (eq == std::string::npos) {
            throw ConfigError("override '" + o + "' is not of the form section.key=value");
        }
        apply(cfg, std::string(trim(std::string_view(o).substr(0, eq))), o.substr(eq + 1));
    }
    cfg.setpoint.solver = cfg.solver;
    cfg.calibration.options.solver = cfg.solver;
    cfg.validate();
    return cfg;
}

Config load_config(const std::string& path, const std::vector<std::string>& overrides)
{
    const std::string text = read_text_file(path);
    try {
        return parse_config(text, overrides);
    } catch (const ConfigError& e) {
        throw ConfigError(path + ": " + e.what());
    }
}

std::string write_config(const Config& cfg)
{
    std::ostringstream out;
    std::string current;
    for (const auto& [name, key] : keys()) {
        const auto dot = name.find('.');
        const std::string section = name.substr(0, dot);
        if (section != current) {
            out << (current.empty() ? "" : "\n") << '[' << section << "]\n";
            current = section;
        }
        out << name.substr(dot + 1) << " = " << key.get(cfg) << '\n';
    }
    return out.str();
}

}  // namespace pipenet
