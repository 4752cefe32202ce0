#pragma once

#include <cstdlib>
#include <cstring>
#include <string>

#include <dlfcn.h>
#include <unistd.h>

namespace tachibana {

/// OpenBLAS 0.3.20 selects its Cooperlake kernels on some AVX-512 hosts and they return
/// wrong eigenvectors from the symmetric drivers. When that core is active and the user has not
/// chosen one, restart the process with the SkylakeX kernels. Returns without effect otherwise.
inline void ensure_reliable_blas(char** argv) {
  if (std::getenv("OPENBLAS_CORETYPE") != nullptr) return;
  using CoreName = char* (*)();
  auto corename = reinterpret_cast<CoreName>(dlsym(RTLD_DEFAULT, "openblas_get_corename"));
  if (corename == nullptr) return;
  const char* core = corename();
  if (core == nullptr || std::strcmp(core, "Cooperlake") != 0) return;
  setenv("OPENBLAS_CORETYPE", "SkylakeX", 1);
  execv("/proc/self/exe", argv);
}

}  // namespace tachibana
