#pragma once

namespace consensus {

// Exact products of two 64-bit amounts.
__extension__ using Int128 = __int128;

}  // namespace consensus
