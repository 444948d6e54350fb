#pragma once

namespace xtomo {

/// Caps the worker count used by the OpenMP kernels; 0 restores all cores.
void set_num_threads(int n);
int max_threads();
int num_procs();

/// Selects the OpenMP kernels or the serial reference implementation.
enum class Execution { Parallel, Reference };

}  // namespace xtomo
