#pragma once

#include <worksim/protocol.hpp>

#include <memory>
#include <string>
#include <vector>

namespace worksim {

// Every name make_protocol accepts, in documentation order.
const std::vector<std::string>& protocol_names();

// Builds the named protocol. n counts work units, except for the agreement
// family where it counts processes. Throws ConfigError on unknown names or
// shape violations.
std::unique_ptr<Protocol> make_protocol(const std::string& name, long long n,
                                        int t);

// Largest number of crashes an adversary may inject by default: the work
// protocols need one survivor among their t processes, the phased and
// agreement protocols tolerate t outright.
int default_crash_budget(const std::string& name, int t);

}  // namespace worksim
