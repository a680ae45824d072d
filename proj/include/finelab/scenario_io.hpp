#pragma once

#include <map>
#include <string>
#include <vector>

#include "finelab/scenario.hpp"

namespace finelab::scenario {

// ---- scenario files (flat key/value text with [sections]) -----------------------

struct scenario_file {
    struct entry {
        std::string value;
        int line;
    };
    std::string path;
    std::map<std::string, std::map<std::string, entry>> sections;

    bool has(const std::string& section, const std::string& key) const;
    std::string get_string(const std::string& section, const std::string& key) const;
    std::string get_string_or(const std::string& section, const std::string& key,
                              const std::string& fallback) const;
    double get_double(const std::string& section, const std::string& key) const;
    double get_double_or(const std::string& section, const std::string& key,
                         double fallback) const;
    long get_long(const std::string& section, const std::string& key) const;
    long get_long_or(const std::string& section, const std::string& key, long fallback) const;
    // semicolon-separated tuples of doubles, e.g. "1 0 0.5; -1 0 0.25"
    std::vector<std::vector<double>> get_tuples(const std::string& section,
                                                const std::string& key) const;

  private:
    const entry& require(const std::string& section, const std::string& key) const;
};

scenario_file parse_scenario_text(const std::string& text, const std::string& name);
scenario_file parse_scenario_path(const std::string& path);

// command-line overrides applied after parsing
struct run_overrides {
    std::string out_dir = "out";
    std::optional<long> samples;
    std::optional<std::uint64_t> seed;
    std::optional<int> resolution;
    std::optional<std::string> tolerance_profile;
};

// materialize the typed scenario (builds thin unions, functions, exhaustions)
scenario_def build_scenario(const scenario_file& file, const run_overrides& overrides = {});

// ---- artifacts ----------------------------------------------------------------------

// header + rows, '.' decimal, no locale
void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& rows);

std::string certificate_to_json(const hull_certificate& cert);
hull_certificate certificate_from_json(const std::string& text);

struct run_result {
    int exit_code = 0;  // 0 pass, 1 check failed, 2 input error, 3 reliability flag
    std::string summary;
    std::vector<std::string> artifacts;
};

// executes the pipeline named in the file and writes report + tables into the
// override's output directory
run_result run_scenario_file(const std::string& path, const run_overrides& overrides = {});

}  // namespace finelab::scenario
