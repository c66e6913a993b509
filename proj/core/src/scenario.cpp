#include "roadsearch/scenario.hpp"

#include <cstdio>
#include <stdexcept>

namespace roadsearch {

void TestScenario::check() const {
  if (!(tolerance_threshold > 0.0 && tolerance_threshold <= 1.0)) {
    throw std::invalid_argument("tolerance_threshold must lie in (0, 1]");
  }
  if (driving.speed_limit_kmh && !(*driving.speed_limit_kmh > 0.0)) {
    throw std::invalid_argument("speed limit must be positive when set");
  }
}

std::string IdSource::next() {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%06llu", static_cast<unsigned long long>(counter_++));
  return prefix_ + buf;
}

TestScenario new_scenario(ControlPolyline road, const ScenarioSettings& settings, IdSource& ids) {
  TestScenario s;
  s.id = ids.next();
  s.road = std::move(road);
  s.spec = settings.spec;
  s.driving.speed_limit_kmh = settings.speed_limit_kmh;
  s.tolerance_threshold = settings.tolerance_threshold;
  return s;
}

}  // namespace roadsearch
