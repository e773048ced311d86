#ifndef PERISOLVE_VERSION_HPP
#define PERISOLVE_VERSION_HPP

namespace perisolve {
inline constexpr const char* kVersion = "0.1.0";
}

#endif
