#pragma once

#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "permlim/bridge.hpp"
#include "permlim/cost.hpp"
#include "permlim/permanent.hpp"

namespace permlim {

// INI-style text: [section] headers, key = value lines, '#' or ';' comments.
class IniFile {
public:
    static IniFile parse(std::istream& in, const std::string& origin = "<config>");
    static IniFile load(const std::filesystem::path& path);

    bool has_section(const std::string& section) const;
    std::optional<std::string> get(const std::string& section, const std::string& key) const;
    const std::map<std::string, std::string>& section(const std::string& section) const;
    std::vector<std::string> sections() const;
    const std::string& origin() const noexcept { return origin_; }

private:
    std::string origin_;
    std::map<std::string, std::map<std::string, std::string>> data_;
};

struct CostBlock {
    std::string family;  // quadratic | absolute | tabulated | expression | zero
    std::vector<double> params;
    std::filesystem::path table;
    std::string expression;
    Smoothness smoothness = Smoothness::C2;
};

struct KernelBlock {
    std::string kind;  // constant | cosine | tabulated
    double epsilon = 0.5;
    std::filesystem::path table;
};

struct StudyBlock {
    std::vector<int> n_list;
    int permanent_cap = 26;
    PermanentMethod permanent_method = PermanentMethod::glynn;
    double balance_tol = 1e-12;
    int balance_max_iter = 500;
    int nystrom_m = 256;
    double eig_cutoff = 1e-12;
    double refinement_tol = 1e-5;
    unsigned workers = 1;
    int validate_grid = 50;
    double validate_tol = 1e-12;
};

struct OutputBlock {
    std::filesystem::path csv_path;
    bool eigen_dump = false;
    std::filesystem::path eigen_dump_path;
};

struct RunConfig {
    std::optional<CostBlock> cost;
    std::optional<KernelBlock> kernel;
    BridgeOptions bridge;
    StudyBlock study;
    OutputBlock output;
};

// Throws ConfigError on unknown sections or keys, malformed values, or a non-increasing n_list.
// Relative paths are resolved against base_dir.
RunConfig read_run_config(const IniFile& ini, const std::filesystem::path& base_dir = {});
RunConfig load_run_config(const std::filesystem::path& path);

CostFunction make_cost(const CostBlock& block);
DensitySource make_kernel_source(const KernelBlock& block);

}  // namespace permlim
