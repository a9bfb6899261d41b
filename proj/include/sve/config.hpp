#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include "sve/affine_moments.hpp"
#include "sve/kernels.hpp"
#include "sve/volterra.hpp"

namespace sve {

// Strict key=value configuration: '#' comments, one pair per line, duplicate
// and malformed lines rejected with line diagnostics. Reads are tracked so a
// run can reject keys nothing consumed (catches typos).
class Config {
public:
    static Config parse_file(const std::string& path);
    static Config parse_text(const std::string& text, const std::string& origin);

    bool has(const std::string& key) const;
    // All getters mark the key consumed and throw ConfigError on a missing
    // key or an unparseable value.
    std::string get_string(const std::string& key) const;
    double get_double(const std::string& key) const;
    long get_long(const std::string& key) const;
    bool get_bool(const std::string& key) const;
    std::string get_string_or(const std::string& key, const std::string& fallback) const;
    double get_double_or(const std::string& key, double fallback) const;
    long get_long_or(const std::string& key, long fallback) const;
    bool get_bool_or(const std::string& key, bool fallback) const;

    // Flag overrides (applied after parsing; replaces or adds the key).
    void override_value(const std::string& key, const std::string& value);

    std::vector<std::string> unconsumed_keys() const;
    void require_all_consumed() const;  // ConfigError listing stragglers

    // Canonical "key=value" lines (sorted), reflecting all overrides.
    std::string resolved_dump() const;

private:
    struct Entry {
        std::string value;
        int line = 0;
    };
    std::string origin_;
    std::map<std::string, Entry> entries_;
    mutable std::set<std::string> consumed_;
};

// Builders for the common config blocks. Kernel keys:
//   kernel.kind = exponential | fractional | gamma_fractional | log_modulated
//                 | constant | exotic
// plus kind-specific kernel.c / kernel.rate / kernel.H / kernel.scale /
// kernel.damping (exotic: kernel.t_max, kernel.n_points).
KernelSpec kernel_from_config(const Config& config);

// Model keys: model.x, model.lambda, model.b0, model.beta, model.diffusion
// (constant|sqrt|linear|jacobi), model.sigma0, model.alpha1, model.alpha2,
// model.state_space (all|nonnegative|interval; defaulted per diffusion),
// model.chi_b, model.chi_sigma.
ModelSpec model_from_config(const Config& config);

// Grid keys: grid.T, grid.N.
Grid grid_from_config(const Config& config);

}  // namespace sve
