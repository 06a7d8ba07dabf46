#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "sigverify/verifier.hpp"

namespace sigverify {

inline constexpr int kModelStoreSchemaVersion = 1;

/// JSON knowledge base. Reals are written as shortest round-trip decimal
/// strings, so a reload reproduces every double bit for bit. Feature indices
/// are 1-based in the file, matching the f1..fm dataset columns.
std::string serialize_models(std::span<const WriterModel> models);

/// Throws StoreError naming the offending field (e.g. "models[0].theta").
std::vector<WriterModel> deserialize_models(std::string_view json_text);

/// Writes to a temporary sibling and renames it over `path`.
void save_models(std::span<const WriterModel> models, const std::filesystem::path& path);
std::vector<WriterModel> load_models(const std::filesystem::path& path);

/// Throws UnknownWriterError when absent.
const WriterModel& find_model(std::span<const WriterModel> models,
                              std::string_view writer_id);

}  // namespace sigverify
