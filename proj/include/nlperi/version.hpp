#pragma once

#define NLPERI_VERSION_MAJOR 1
#define NLPERI_VERSION_MINOR 0
#define NLPERI_VERSION_PATCH 0

namespace nlperi {

inline constexpr const char* version_string = "1.0.0";

// JSON reports carry this tag; bump when report layout changes.
inline constexpr const char* report_schema = "nlperi-report/1";

} // namespace nlperi
