#pragma once

#include <string>
#include <vector>

#include "inkscore/record.hpp"

namespace inkscore {

// Column order of the corpus manifest. All must be present in the header;
// cells may be empty where a field does not apply.
extern const std::vector<std::string> kManifestColumns;

// Reads and validates the manifest CSV. Every violation is reported with its
// file row number; the whole batch of problems is raised as one
// ValidationError. Relative image paths are resolved against the manifest's
// directory. Set check_files=false to skip the image-existence check (the
// records then carry paths as resolved, verified by the caller later).
std::vector<DrawingRecord> ingest_manifest(const std::string& path,
                                           bool check_files = true);

// Same, from in-memory content; `base_dir` anchors relative image paths.
std::vector<DrawingRecord> ingest_manifest_content(const std::string& content,
                                                   const std::string& base_dir,
                                                   bool check_files = true);

} // namespace inkscore
