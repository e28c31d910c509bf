#pragma once

#include "cvqit/core.hpp"

namespace cvqit {

enum class TripartiteClass { FullyInseparable, OneModeBiseparable, TwoModeBiseparable, BoundOrSeparable };

const char* to_string(TripartiteClass c);

// symplectic spectrum of the partial transpose on split.subsets[0]
std::vector<double> pt_spectrum(const GaussianState& s, const ModePartition& split);

bool is_nppt(const GaussianState& s, const ModePartition& split, double tol = kPhysTol);
double log_negativity(const GaussianState& s, const ModePartition& split);
double negativity(const GaussianState& s, const ModePartition& split);
double entropy_of_entanglement(const GaussianState& s, const ModePartition& split);

struct CriterionResult {
    double lhs = 0;
    double bound = 0;
    bool violated = false;
};

CriterionResult duan_test(const GaussianState& s, double a);

struct DuanOptimal {
    CriterionResult result;
    double a0 = 1;
    bool closed_form = true;  // false when the golden-section fallback was used
};

// Duan test at the optimal a0 after bringing the state to standard form II
DuanOptimal duan_optimal(const GaussianState& s);

TripartiteClass classify_tripartite(const GaussianState& s);

// bipartition split = ({m} u I | {n} u I'); every mode must appear
CriterionResult van_loock_furusawa(const GaussianState& s, const std::vector<double>& h,
                                   const std::vector<double>& g, const ModePartition& split,
                                   double tol = 1e-12);

}  // namespace cvqit
