// orbit-shift: run scenario files describing shift maps along vector-field
// orbits.  Exit codes: 0 success, 2 validation failure, 3 numeric failure.

#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "orbitshift/scenario.hpp"

int main(int argc, char** argv) {
    CLI::App app{"shift maps along orbits of vector fields"};
    app.require_subcommand(1);

    auto* run = app.add_subcommand("run", "execute a scenario file");
    std::string scenario_path;
    std::string out_path;
    std::string format;
    run->add_option("scenario", scenario_path, "scenario JSON file")->required();
    run->add_option("--out", out_path, "write the report to this file instead of stdout");
    run->add_option("--format", format, "report format (overrides the default json)")
        ->check(CLI::IsMember({"json", "csv"}));

    CLI11_PARSE(app, argc, argv);

    const orbitshift::run_result result =
        orbitshift::run_scenario_file(scenario_path, format);

    if (out_path.empty()) {
        std::cout << result.output;
    } else {
        std::ofstream out(out_path, std::ios::binary);
        if (!out) {
            std::cerr << "cannot write to '" << out_path << "'\n";
            return orbitshift::exit_validation;
        }
        out << result.output;
    }
    return result.exit_code;
}
