#include "mqsbt/errors.hpp"
#include "mqsbt/io/config.hpp"
#include "mqsbt/io/pipeline.hpp"
#include "mqsbt/version.hpp"

#include <CLI11.hpp>

#include <cstdint>
#include <iostream>
#include <string>

namespace {

constexpr int kExitValidation = 2;
constexpr int kExitNumerical = 3;

std::string footer() {
    std::string keys;
    for (const auto& k : mqsbt::io::config_keys()) keys += "  " + k + "\n";
    return "Stages run in the order mesh, assemble, regularize, reduce, freqresp, simulate,\n"
           "verify. A stage reuses earlier artifacts found in the output directory when\n"
           "they were produced under the same configuration and reruns them otherwise.\n"
           "\n"
           "CSV files:\n"
           "  residuals.csv   iteration,residual\n"
           "  frequency.csv   omega,abs_H,abs_H_reduced,abs_error\n"
           "  simulation.csv  t,u,y,y_reduced,relerr (per-port columns u_j,y_j,y_reduced_j when m > 1)\n"
           "Matrices are Matrix Market coordinate files; reports and the manifest are\n"
           "'key = value' text.\n"
           "\n"
           "Exit codes: 0 success, 2 invalid input or unwritable output, 3 numerical failure.\n"
           "\n"
           "Config keys ('section.key = value', '#' comments):\n" +
           keys;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Balanced truncation of a 3D magneto-quasistatic model"};
    app.footer(footer());
    app.set_version_flag("--version", std::string(mqsbt::kVersion));

    std::string stage_name, config_path, out_dir;
    std::uint64_t seed = 1;
    std::string stages;
    for (const auto& s : mqsbt::io::stage_names()) stages += (stages.empty() ? "" : ", ") + s;
    app.add_option("stage", stage_name, "One of: " + stages)->required();
    app.add_option("--config", config_path, "Configuration file")->required();
    app.add_option("--out", out_dir, "Output directory (overrides output.dir)");
    app.add_option("--seed", seed, "Seed for randomized checks");

    try {
        app.parse(argc, argv);
    } catch (const CLI::Success& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitValidation;
    }

    try {
        const mqsbt::io::Stage stage = mqsbt::io::parse_stage(stage_name);
        const mqsbt::io::RunConfig cfg = mqsbt::io::parse_config(config_path);
        mqsbt::io::PipelineOptions opt;
        opt.out_dir = out_dir;
        opt.seed = seed;
        opt.log = &std::cerr;
        mqsbt::io::run_pipeline(cfg, stage, opt);
    } catch (const mqsbt::NumericalError& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return kExitNumerical;
    } catch (const mqsbt::ValidationError& e) {
        std::cerr << "invalid input: " << e.what() << "\n";
        return kExitValidation;
    } catch (const mqsbt::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitValidation;
    } catch (const std::exception& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return kExitNumerical;
    }
    return 0;
}
