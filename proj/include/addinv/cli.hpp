#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>

namespace addinv::cli {

enum ExitCode : int
{
  ok = 0,
  malformed_input = 2,
  pipeline_failure = 3,
  too_many_failures = 4
};

//! Environment variable overriding the worker thread count.
inline constexpr const char* kThreadsVariable = "ADDINV_THREADS";

//! Parses kThreadsVariable; empty when unset. Throws on a malformed value.
std::optional<std::size_t> threads_from_environment();

int cmd_fit(const std::filesystem::path& dataset,
            const std::filesystem::path& config,
            const std::filesystem::path& out,
            std::ostream& err);

int cmd_simulate(const std::filesystem::path& config,
                 const std::filesystem::path& out,
                 std::ostream& err,
                 std::optional<std::size_t> threads = std::nullopt);

int cmd_table1(const std::filesystem::path& out,
               std::size_t runs,
               std::uint64_t seed,
               std::ostream& err,
               std::optional<std::size_t> threads = std::nullopt);

} // namespace addinv::cli
