#pragma once

#include "scg/green.hpp"

#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <vector>

namespace scg::cli {

// Line-oriented "key = value" text. Dotted keys nest; "[section]" prefixes the keys below it;
// repeating a key appends to its list; '#' starts a comment.
class ConfigFile {
public:
    static ConfigFile parse(const std::string& text, const std::string& origin = "config");
    static ConfigFile load(const std::filesystem::path& path);

    const std::string& text() const { return text_; }
    bool has(const std::string& key) const;

    double number(const std::string& key, double fallback);
    int integer(const std::string& key, int fallback);
    std::string word(const std::string& key, const std::string& fallback);
    bool flag(const std::string& key, bool fallback);
    std::vector<double> numbers(const std::string& key);                 // all values, whitespace-separated
    std::vector<std::vector<double>> number_rows(const std::string& key); // one row per repeated value
    std::vector<std::string> words(const std::string& key);

    // Keys under the prefix (without it); marks them read.
    std::map<std::string, std::string> section(const std::string& prefix);
    // Throws ConfigError naming the first key that nothing read.
    void reject_unused() const;

private:
    const std::vector<std::string>& values(const std::string& key);
    std::string where(const std::string& key) const;

    std::string text_, origin_;
    std::map<std::string, std::vector<std::string>> entries_;
    std::map<std::string, int> lines_;
    std::set<std::string> used_;
};

struct SourceConfig {
    std::string kind = "point";  // point | window
    Vec x0;
    std::string profile = "bump";  // point sources: bump | gaussian
    std::vector<double> bump{0.4, 0.8, 1.2, 1.6};
    double width = 0.5;
    std::vector<std::vector<double>> windows;  // window sources: a b c d per axis
    SourceSpec::Normalization normalization = SourceSpec::Normalization::star;
};

struct RunConfig {
    std::string hamiltonian = "free";
    ParamSet hamiltonian_params;
    SourceConfig source;
    GreenOptions green;
    CutoffSpec cutoffs;
    bool auto_horizon = true;
    double escape_radius = 2.0;
    double horizon_factor = 2.2;
    double horizon_limit = 50.0;

    GridSpec grid;
    std::vector<double> hs;
    std::vector<Vec> points;
    int ray_samples = 64;
    bool check_escape = false;
    std::string flowout_lagrangian = "source";  // source | conormal | bessel_cone
    double wavefront_tol = 0.05;
    bool binary = false;

    std::vector<std::string> validate_only;
    std::vector<double> shrink_widths{0.2, 0.1, 0.05, 0.025};

    std::filesystem::path out_dir = "scg_out";
    int workers = 0;
    std::string text;  // the raw config, hashed into the manifest
};

// Reads and validates every key; unknown keys and bad values raise ConfigError.
RunConfig read_run_config(ConfigFile& file);

Hamiltonian build_hamiltonian(const RunConfig& cfg);
SourceSpec build_source(const RunConfig& cfg);
LevelOptions level_options(const RunConfig& cfg);
// Explicit horizon, or horizon_factor times the escape time of the ball of escape_radius.
double resolve_horizon(const RunConfig& cfg, const Hamiltonian& H, const SourceSpec& src);
GreenSetup build_setup(const RunConfig& cfg, double t_width_override = 0);

}  // namespace scg::cli
