#pragma once

#include <atomic>
#include <map>
#include <unordered_map>
#include <memory>
#include <mutex>
#include <string>

#include "dstab/interval.hpp"
#include "dstab/term.hpp"

namespace dstab {

class SystemRegistry;

class FlowTube;

// Memoizes flow trajectories across atom evaluations from the same initial
// box.  Keys are exact endpoint bit patterns, so cached results are pure
// values and the cache never affects verdicts.
class FlowCache {
public:
    std::shared_ptr<const FlowTube> lookup(const std::string& key) const;
    void store(const std::string& key, std::shared_ptr<const FlowTube> tube);

private:
    mutable std::mutex mu_;
    std::unordered_map<std::string, std::shared_ptr<const FlowTube>> entries_;
};

struct EvalContext {
    const SystemRegistry* systems = nullptr;
    FlowCache* flow_cache = nullptr;
    double flow_tol = 1e-4;
    std::atomic<long long>* flow_evals = nullptr;  // counts integrator runs
};

// Guaranteed enclosure of {t(p) : p in b}.  Throws EvalDomainError on domain
// guard violations, FlowEscapeError when a flow value leaves the state
// bounds, std::out_of_range for variables missing from the box.
Interval eval_term(const TermPtr& t, const Box& b, const EvalContext& ctx);

// Convenience overload for flow-free terms.
Interval eval_term(const TermPtr& t, const Box& b);

}  // namespace dstab
