/*
 * model_io.hpp
 *
 * Versioned binary container for symbolic models and synthesis artifacts.
 * The header embeds a digest of everything that determines the model
 * content, so stale files are rejected against a mismatched configuration.
 * All fields are little-endian and written in a fixed order; two builds of
 * the same model serialize to identical bytes.
 */

#ifndef SIRSYNTH_MODEL_IO_HPP_
#define SIRSYNTH_MODEL_IO_HPP_

#include <string>

#include "sirsynth/games.hpp"

namespace sirsynth {

void save_model(const SymbolicModel& model, const std::string& path);
SymbolicModel load_model(const std::string& path);

/* Loads and rejects the file when its digest differs from expected_digest. */
SymbolicModel load_model_checked(const std::string& path, std::uint64_t expected_digest);

void save_synthesis(const SynthesisResult& synth, std::uint64_t model_digest,
                    const std::string& path);
SynthesisResult load_synthesis(const std::string& path, std::uint64_t model_digest,
                               std::size_t n_states);

struct StaleModelError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct CorruptFileError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace sirsynth

#endif  // SIRSYNTH_MODEL_IO_HPP_
