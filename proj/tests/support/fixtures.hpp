#pragma once

#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "spook/lang.hpp"

inline std::string fixture_path(const std::string& name) { return std::string(SPOOK_FIXTURE_DIR) + "/" + name; }

inline spook::SourceKB fixture(const std::string& name) {
    std::ifstream f(fixture_path(name));
    std::stringstream ss;
    ss << f.rdbuf();
    return {ss.str(), name};
}

inline spook::KbHandle fixture_index(const std::string& name) { return spook::KbIndex::build(spook::parse_kb(fixture(name))); }

inline const std::vector<std::string>& fixture_names() {
    static const std::vector<std::string> names{"battalion.spook",       "diamond.spook",  "inverse_ring.spook", "number.spook",
                                                "quantifier.spook", "reference.spook", "shared_location.spook"};
    return names;
}
