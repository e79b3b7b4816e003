#include "spook/query_result.hpp"

#include <algorithm>

#include "spook/error.hpp"

namespace spook {

std::vector<double> QueryResult::marginal(size_t target) const {
    const auto& r = ranges.at(target);
    size_t after = 1;
    for (size_t i = target + 1; i < ranges.size(); ++i) after *= ranges[i].size();
    std::vector<double> out(r.size(), 0.0);
    for (size_t i = 0; i < joint.size(); ++i) out[(i / after) % r.size()] += joint[i];
    return out;
}

double QueryResult::probability(size_t target, const std::string& value) const {
    const auto& r = ranges.at(target);
    auto it = std::find(r.begin(), r.end(), value);
    if (it == r.end()) throw Error(ErrorCode::BadValue, "'" + value + "' is not a value of " + targets.at(target).str());
    return marginal(target)[static_cast<size_t>(it - r.begin())];
}

}  // namespace spook
