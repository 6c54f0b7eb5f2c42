/**
 * @file config.hpp
 * @brief Tool run configuration: a flat key = value file with a schema
 *        version; command-line flags override file values.
 */
#ifndef ROIDIFF_CONFIG_HPP
#define ROIDIFF_CONFIG_HPP

#include <cstdint>
#include <string>

#include "roidiff/pipeline.hpp"

namespace roidiff {

struct RunConfig {
    int schema_version = 1;
    pipeline::PipelineConfig pipeline;
    std::uint32_t seed = 1;
    std::string model_path; // empty: bare-bones comparison
    int threads = 0;        // 0: use ROIDIFF_THREADS or hardware concurrency

    static RunConfig load(const std::string& path);
    void save(const std::string& path) const;
};

} // namespace roidiff

#endif
