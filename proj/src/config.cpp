#include "sve/config.hpp"

#include <cerrno>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "sve/errors.hpp"

namespace sve {

namespace {

std::string trim(const std::string& s) {
    const char* ws = " \t\r\n";
    auto b = s.find_first_not_of(ws);
    if (b == std::string::npos) return "";
    auto e = s.find_last_not_of(ws);
    return s.substr(b, e - b + 1);
}

[[noreturn]] void fail(const std::string& origin, int line, const std::string& what) {
    std::ostringstream os;
    os << origin << ":" << line << ": " << what;
    throw ConfigError(os.str());
}

}  // namespace

Config Config::parse_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_text(buf.str(), path);
}

Config Config::parse_text(const std::string& text, const std::string& origin) {
    Config cfg;
    cfg.origin_ = origin;
    std::istringstream in(text);
    std::string raw;
    int line_no = 0;
    while (std::getline(in, raw)) {
        ++line_no;
        auto hash = raw.find('#');
        std::string line = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
        if (line.empty()) continue;
        auto eq = line.find('=');
        if (eq == std::string::npos)
            fail(origin, line_no, "expected key=value, got \"" + line + "\"");
        std::string key = trim(line.substr(0, eq));
        std::string value = trim(line.substr(eq + 1));
        if (key.empty()) fail(origin, line_no, "empty key before '='");
        if (value.empty()) fail(origin, line_no, "empty value for key \"" + key + "\"");
        auto it = cfg.entries_.find(key);
        if (it != cfg.entries_.end()) {
            std::ostringstream os;
            os << "duplicate key \"" << key << "\" (first defined at line "
               << it->second.line << ")";
            fail(origin, line_no, os.str());
        }
        cfg.entries_[key] = Entry{value, line_no};
    }
    return cfg;
}

bool Config::has(const std::string& key) const {
    return entries_.count(key) != 0;
}

std::string Config::get_string(const std::string& key) const {
    auto it = entries_.find(key);
    if (it == entries_.end())
        throw ConfigError(origin_ + ": missing required key \"" + key + "\"");
    consumed_.insert(key);
    return it->second.value;
}

double Config::get_double(const std::string& key) const {
    std::string v = get_string(key);
    errno = 0;
    char* end = nullptr;
    double x = std::strtod(v.c_str(), &end);
    if (end == v.c_str() || *end != '\0' || errno == ERANGE)
        throw ConfigError(origin_ + ": key \"" + key + "\": not a number: \"" + v + "\"");
    return x;
}

long Config::get_long(const std::string& key) const {
    std::string v = get_string(key);
    errno = 0;
    char* end = nullptr;
    long x = std::strtol(v.c_str(), &end, 10);
    if (end == v.c_str() || *end != '\0' || errno == ERANGE)
        throw ConfigError(origin_ + ": key \"" + key + "\": not an integer: \"" + v + "\"");
    return x;
}

bool Config::get_bool(const std::string& key) const {
    std::string v = get_string(key);
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    throw ConfigError(origin_ + ": key \"" + key + "\": not a boolean: \"" + v + "\"");
}

std::string Config::get_string_or(const std::string& key, const std::string& fallback) const {
    return has(key) ? get_string(key) : fallback;
}

double Config::get_double_or(const std::string& key, double fallback) const {
    return has(key) ? get_double(key) : fallback;
}

long Config::get_long_or(const std::string& key, long fallback) const {
    return has(key) ? get_long(key) : fallback;
}

bool Config::get_bool_or(const std::string& key, bool fallback) const {
    return has(key) ? get_bool(key) : fallback;
}

void Config::override_value(const std::string& key, const std::string& value) {
    entries_[key] = Entry{value, 0};
}

std::vector<std::string> Config::unconsumed_keys() const {
    std::vector<std::string> out;
    for (const auto& kv : entries_)
        if (!consumed_.count(kv.first)) out.push_back(kv.first);
    return out;
}

void Config::require_all_consumed() const {
    auto stray = unconsumed_keys();
    if (stray.empty()) return;
    std::ostringstream os;
    os << origin_ << ": unknown key(s):";
    for (const auto& k : stray) {
        os << " \"" << k << "\"";
        auto it = entries_.find(k);
        if (it != entries_.end() && it->second.line > 0) os << " (line " << it->second.line << ")";
    }
    throw ConfigError(os.str());
}

std::string Config::resolved_dump() const {
    std::ostringstream os;
    for (const auto& kv : entries_) os << kv.first << "=" << kv.second.value << "\n";
    return os.str();
}

KernelSpec kernel_from_config(const Config& config) {
    std::string kind = config.get_string("kernel.kind");
    if (kind == "exponential")
        return KernelSpec::exponential(config.get_double("kernel.c"),
                                       config.get_double("kernel.rate"));
    if (kind == "fractional")
        return KernelSpec::fractional(config.get_double("kernel.H"),
                                      config.get_double_or("kernel.scale", 1.0));
    if (kind == "gamma_fractional")
        return KernelSpec::gamma_fractional(config.get_double("kernel.H"),
                                            config.get_double("kernel.damping"),
                                            config.get_double_or("kernel.scale", 1.0));
    if (kind == "log_modulated")
        return KernelSpec::log_modulated(config.get_double("kernel.H"));
    if (kind == "constant")
        return KernelSpec::constant(config.get_double("kernel.c"));
    if (kind == "exotic")
        return KernelSpec::exotic_exponential_decay(
            config.get_double_or("kernel.t_max", 1.5),
            static_cast<int>(config.get_long_or("kernel.n_points", 3001)));
    throw ConfigError("unknown kernel.kind: \"" + kind + "\"");
}

ModelSpec model_from_config(const Config& config) {
    ModelSpec m;
    m.x = config.get_double("model.x");
    m.lambda = config.get_double_or("model.lambda", 0.0);
    m.b0 = config.get_double_or("model.b0", 0.0);
    m.beta = config.get_double_or("model.beta", 0.0);
    std::string diff = config.get_string_or("model.diffusion", "constant");
    if (diff == "constant")
        m.diffusion = DiffusionKind::ConstantVol;
    else if (diff == "sqrt")
        m.diffusion = DiffusionKind::SqrtVol;
    else if (diff == "linear")
        m.diffusion = DiffusionKind::LinearVol;
    else if (diff == "jacobi")
        m.diffusion = DiffusionKind::Jacobi;
    else
        throw ConfigError("unknown model.diffusion: \"" + diff + "\"");
    m.sigma0 = config.get_double_or("model.sigma0", 1.0);
    if (m.diffusion == DiffusionKind::Jacobi) {
        m.alpha1 = config.get_double("model.alpha1");
        m.alpha2 = config.get_double("model.alpha2");
    } else {
        m.alpha1 = config.get_double_or("model.alpha1", 0.0);
        m.alpha2 = config.get_double_or("model.alpha2", 1.0);
    }
    std::string default_space = "all";
    if (m.diffusion == DiffusionKind::SqrtVol) default_space = "nonnegative";
    if (m.diffusion == DiffusionKind::Jacobi) default_space = "interval";
    std::string space = config.get_string_or("model.state_space", default_space);
    if (space == "all")
        m.state_space = StateSpace::AllReals;
    else if (space == "nonnegative")
        m.state_space = StateSpace::NonnegativeReals;
    else if (space == "interval")
        m.state_space = StateSpace::Interval;
    else
        throw ConfigError("unknown model.state_space: \"" + space + "\"");
    m.chi_b = config.get_double_or("model.chi_b", 1.0);
    m.chi_sigma = config.get_double_or("model.chi_sigma", 0.5);
    m.validate();
    return m;
}

Grid grid_from_config(const Config& config) {
    Grid g;
    g.T = config.get_double("grid.T");
    g.N = static_cast<int>(config.get_long("grid.N"));
    g.validate();
    return g;
}

}  // namespace sve
