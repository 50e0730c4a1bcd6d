#pragma once

#include <map>
#include <optional>
#include <string>

#include "dstab/eval.hpp"
#include "dstab/formula.hpp"
#include "dstab/interval.hpp"

namespace dstab {

// Three-valued truth of a subformula over a box environment.
enum class Truth3 { True_delta, False_exact, Unknown };

enum class DecideResult { DeltaTrue, ExactFalse };

struct SolverConfig {
    double delta = 0.01;      // perturbation bound, must be > 0 for quantified input
    double flow_tol = 1e-3;   // enclosure tolerance handed to the integrator
    int workers = 1;          // threads used for the top-level split
    bool deterministic = true;  // fixed top-level split, all pieces evaluated
    int top_pieces = 16;      // top-level split count under deterministic mode
    int start_floor = 14;     // initial per-variable refinement bits
    int floor_step = 4;
    int max_floor = 30;
    long long node_budget = 400'000'000;
    bool trace = false;
};

struct SolverStats {
    long long nodes = 0;
    long long atom_evals = 0;
    long long splits = 0;
    long long flow_evals = 0;
    int rounds = 0;
    int deepest_floor = 0;
};

struct SolverVerdict {
    DecideResult result;
    std::map<std::string, double> witness;  // sample values for certified existentials
    SolverStats stats;
};

// Decides "phi^delta true" (DeltaTrue) versus "phi false" (ExactFalse) for a
// bounded sentence by interval branch-and-prune with iterative deepening.
SolverVerdict decide(const FormulaPtr& phi, const SolverConfig& cfg,
                     const SystemRegistry* systems = nullptr);

// Evaluates a quantifier-free formula over a fixed box environment.
Truth3 decide_on_box(const FormulaPtr& phi, const Box& env, double delta,
                     const SystemRegistry* systems = nullptr,
                     double flow_tol = 1e-3);

std::string truth3_name(Truth3 t);
std::string result_name(DecideResult r);

}  // namespace dstab
