#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace polyens {

struct VerifyCase {
    std::string name;
    double metric = 0.0;  // +inf when the computation itself failed
    double threshold = 0.0;
    bool upper_bound = true;  // pass needs metric <= threshold, else metric >= threshold
    bool pass = false;
};

struct VerifyReport {
    std::string suite;
    std::string metric_name;  // what every case metric measures
    double max_metric = 0.0;  // over the upper-bound cases
    std::vector<VerifyCase> cases;
    bool pass = false;
    double seconds = 0.0;
};

struct VerifyOptions {
    int n = 0;  // biorthogonality: restrict to this n (0 selects 4 and 8)
    int samples = 100000;  // Monte Carlo draws per batch
    std::uint64_t seed = 20140617;
    int threads = 0;  // 0 selects default_thread_count()
};

/// gamma, mellin, meijer_identities, biorthogonality, kernel_routes,
/// telescoping, hard_edge_convergence, bessel, borodin, monte_carlo, determinism.
const std::vector<std::string>& verify_suite_names();

/// Runs one suite; DomainError for an unknown name.
VerifyReport run_verify_suite(const std::string& suite, const VerifyOptions& opts = {});

}  // namespace polyens
