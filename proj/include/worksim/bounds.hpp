#pragma once

#include <worksim/types.hpp>

#include <string>

namespace worksim {

// Worst-case guarantees for one run. Work and message counts fit in 64 bits
// for any configuration the simulator accepts; round bounds do not (the
// sequential-knowledge protocol is exponential in n+t), hence Round.
struct Bounds {
  long long work = 0;
  long long messages = 0;
  Round rounds = 0;
};

// Latest round by which every process of the named engine has retired,
// counting from round 1 of the engine itself.
Round engine_round_bound(const std::string& engine, long long n, int t);

// How an agreement run embeds a work engine: the worker count is t+1 rounded
// up to the engine's shape requirement (perfect square, or power of two for
// the knowledge engine), and the unit count covers one inform per process,
// padded so the engine's plan divides evenly. Throws ConfigError when fewer
// than `workers` processes exist.
struct AgreementShape {
  int workers = 0;
  long long units = 0;
};
AgreementShape agreement_shape(const std::string& engine, long long n_procs,
                               int t);

// Guarantees for a full run of the named protocol with n units, fault budget
// t, `failures` injected crashes, and (for the phased protocol) whether the
// run fell back to its embedded engine. Baselines take the same shape so the
// checker can treat every protocol uniformly.
Bounds bound_for(const std::string& protocol, long long n, int t,
                 long long failures, bool fallback);

}  // namespace worksim
