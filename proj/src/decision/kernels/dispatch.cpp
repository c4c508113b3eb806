#include <cstdlib>
#include <string_view>

#include "dlacb/decision/kernels.hpp"
#include "dlacb/util/error.hpp"

namespace dlacb::decision::kernels {

std::vector<const KernelTable*> available() {
  std::vector<const KernelTable*> out{&scalar()};
  if (auto* t = avx2()) out.push_back(t);
  if (auto* t = neon()) out.push_back(t);
  return out;
}

namespace {

const KernelTable& select() {
  if (const char* env = std::getenv("DLACB_KERNELS"); env && *env) {
    std::string_view want(env);
    for (auto* t : available()) {
      if (t->name == want) return *t;
    }
    if (want != "auto") {
      throw ConfigError("DLACB_KERNELS=" + std::string(want) + " is not available on this CPU");
    }
  }
  return *available().back();
}

}  // namespace

const KernelTable& active() {
  static const KernelTable& table = select();
  return table;
}

}  // namespace dlacb::decision::kernels
