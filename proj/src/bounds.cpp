#include "worksim/bounds.hpp"

#include <algorithm>
#include <cmath>

namespace worksim {

namespace {

long long isqrt_ll(long long v) {
  auto r = static_cast<long long>(std::llround(std::sqrt(static_cast<double>(v))));
  while (r > 0 && r * r > v) --r;
  while ((r + 1) * (r + 1) <= v) ++r;
  return r;
}

int floor_log2(int v) {
  int h = 0;
  while ((1 << (h + 1)) <= v) ++h;
  return h;
}

long long ceil_div(long long a, long long b) { return (a + b - 1) / b; }

Bounds engine_bounds(const std::string& engine, long long n, int t) {
  long long rt = isqrt_ll(t);
  int lg = floor_log2(t);
  if (engine == "a")
    return {3 * n, 9 * t * rt, Round(n) * t + Round(3) * t * t};
  if (engine == "b")
    return {3 * n, 10 * t * rt, Round(3) * n + Round(8) * t};
  if (engine == "c")
    return {n + 2 * t, n + 8LL * t * lg,
            (Round(t) * (5 * t + 2 * lg) * (n + t)) << static_cast<int>(n + t)};
  if (engine == "c-batched")
    return {n + 2 * t * ceil_div(n, t), n + 8LL * t * lg,
            (Round(t) * (2 * n + 3 * t + 2 * lg) * (n + t))
                << static_cast<int>(n + t)};
  throw ConfigError("unknown engine: " + engine);
}

}  // namespace

Round engine_round_bound(const std::string& engine, long long n, int t) {
  return engine_bounds(engine, n, t).rounds;
}

AgreementShape agreement_shape(const std::string& engine, long long n_procs,
                               int t) {
  AgreementShape shape;
  int want = t + 1;
  if (engine == "c") {
    int k = 1;
    while (k < want) k *= 2;
    shape.workers = k;
    shape.units = n_procs;
  } else if (engine == "a" || engine == "b") {
    int k = 1;
    while (k * k < want) ++k;
    shape.workers = k * k;
    shape.units =
        ceil_div(std::max<long long>(n_procs, shape.workers), shape.workers) *
        shape.workers;
  } else {
    throw ConfigError("unknown agreement engine: " + engine);
  }
  if (shape.workers > n_procs)
    throw ConfigError("agreement with fault budget " + std::to_string(t) +
                      " needs at least " + std::to_string(shape.workers) +
                      " processes");
  return shape;
}

Bounds bound_for(const std::string& protocol, long long n, int t,
                 long long failures, bool fallback) {
  long long f = failures;
  if (protocol == "a" || protocol == "b" || protocol == "c" ||
      protocol == "c-batched")
    return engine_bounds(protocol, n, t);
  if (protocol == "d") {
    Bounds b;
    b.work = 2 * n;
    b.messages = (4 * f + 2) * static_cast<long long>(t) * t;
    b.rounds = Round((f + 1) * ceil_div(n, t) + 4 * f + 2);
    if (fallback) {
      // Embedded-engine tail: at most n+t leftover units across at most t
      // workers, plus the phase that triggered the handoff.
      b.work += 3 * (n + t);
      b.messages += static_cast<long long>(
          std::ceil(9.0 * t * std::sqrt(static_cast<double>(t))));
      b.rounds += Round(n + t) * t + Round(3) * t * t;
    }
    return b;
  }
  if (protocol == "naive-all") return {t * n, 0, Round(n)};
  if (protocol == "naive-leader")
    return {(f + 1) * n, (f + 1) * n * (t - 1), Round(t) * (2 * n + 2)};
  if (protocol.rfind("ba-", 0) == 0) {
    std::string engine = protocol.substr(3);
    AgreementShape shape = agreement_shape(engine, n, t);
    Bounds inner = engine_bounds(engine, shape.units, shape.workers);
    Bounds b;
    b.work = inner.work;
    // One inform rides on every work action, plus the general's opening
    // broadcast to processes 1..t.
    b.messages = t + inner.messages + inner.work;
    b.rounds = inner.rounds + 2;
    return b;
  }
  throw ConfigError("unknown protocol: " + protocol);
}

}  // namespace worksim
