#pragma once

#include <cstddef>
#include <type_traits>

namespace bees::detail {

// Calls f(std::integral_constant<std::size_t, K>) for common action counts so
// the per-action loops unroll; any other K gets K = 0, meaning "read it at run
// time".
template <class F>
decltype(auto) dispatch_actions(std::size_t k, F&& f) {
  switch (k) {
    case 2: return f(std::integral_constant<std::size_t, 2>{});
    case 3: return f(std::integral_constant<std::size_t, 3>{});
    case 4: return f(std::integral_constant<std::size_t, 4>{});
    case 5: return f(std::integral_constant<std::size_t, 5>{});
    case 8: return f(std::integral_constant<std::size_t, 8>{});
    case 10: return f(std::integral_constant<std::size_t, 10>{});
    default: return f(std::integral_constant<std::size_t, 0>{});
  }
}

}  // namespace bees::detail
