#pragma once

#include <filesystem>
#include <random>
#include <string>

#include "cst/engine.hpp"
#include "cst/generator.hpp"

namespace testutil {

// Scratch directory unique to the test binary run.
inline std::filesystem::path temp_dir(const std::string& tag) {
    auto dir = std::filesystem::temp_directory_path() /
               ("cst_test_" + tag + "_" + std::to_string(::getpid()));
    std::filesystem::create_directories(dir);
    return dir;
}

inline std::vector<cst::SceneGraph> sample_scenes(const cst::GeneratorConfig& cfg,
                                                  std::uint64_t base_seed, int count) {
    std::vector<cst::SceneGraph> scenes;
    scenes.reserve(count);
    for (int i = 0; i < count; ++i)
        scenes.push_back(cst::sample_scene(cfg, base_seed + static_cast<std::uint64_t>(i)));
    return scenes;
}

inline std::vector<cst::TokenSequence> encode_all(const std::vector<cst::SceneGraph>& scenes,
                                                  const cst::PipelineContext& ctx) {
    std::vector<cst::TokenSequence> out;
    out.reserve(scenes.size());
    for (const auto& s : scenes) out.push_back(cst::encode_scene(s, ctx.config, ctx.schema));
    return out;
}

}  // namespace testutil
