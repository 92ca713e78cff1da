#pragma once

#include "mqsbt/io/config.hpp"
#include "mqsbt/io/manifest.hpp"

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace mqsbt::io {

enum class Stage { Mesh, Assemble, Regularize, Reduce, FreqResp, Simulate, Verify, All };

const char* stage_name(Stage s);
// Throws ValidationError for an unknown name.
Stage parse_stage(const std::string& name);
std::vector<std::string> stage_names();

struct PipelineOptions {
    std::string out_dir;  // empty: cfg.output_dir
    std::uint64_t seed = 1;
    std::ostream* log = nullptr;
};

// Runs the requested stage (every stage for All). Earlier stages are rerun
// only when their artifacts are missing or were produced under a different
// configuration. The manifest is written to <out>/manifest.txt after every
// stage and returned.
Manifest run_pipeline(const RunConfig& cfg, Stage stage, const PipelineOptions& opt = {});

}  // namespace mqsbt::io
