#include "worksim/protocols.hpp"

#include "worksim/baselines.hpp"
#include "worksim/byzantine.hpp"
#include "worksim/proto_ab.hpp"
#include "worksim/proto_c.hpp"
#include "worksim/proto_d.hpp"

namespace worksim {

const std::vector<std::string>& protocol_names() {
  static const std::vector<std::string> names = {
      "a",    "b",    "c",    "c-batched",  "d",
      "ba-a", "ba-b", "ba-c", "naive-all",  "naive-leader"};
  return names;
}

std::unique_ptr<Protocol> make_protocol(const std::string& name, long long n,
                                        int t) {
  if (name == "a") return std::make_unique<ProtoA>(n, t);
  if (name == "b") return std::make_unique<ProtoB>(n, t);
  if (name == "c") return std::make_unique<ProtoC>(n, t, false);
  if (name == "c-batched") return std::make_unique<ProtoC>(n, t, true);
  if (name == "d") return std::make_unique<ProtoD>(n, t);
  if (name == "naive-all") return std::make_unique<NaiveAll>(n, t);
  if (name == "naive-leader") return std::make_unique<NaiveLeader>(n, t);
  if (name.rfind("ba-", 0) == 0) {
    if (n > 1'000'000) throw ConfigError("agreement process count too large");
    return std::make_unique<ByzAgreement>(static_cast<int>(n), t,
                                          name.substr(3));
  }
  throw ConfigError("unknown protocol: " + name);
}

int default_crash_budget(const std::string& name, int t) {
  if (name == "d" || name.rfind("ba-", 0) == 0) return t;
  return t > 0 ? t - 1 : 0;
}

}  // namespace worksim
