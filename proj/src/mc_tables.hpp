#pragma once

#include <cstdint>

namespace stereoshape {

// Cube corners: bit m of the case index corresponds to corner m with offsets
//   0:(0,0,0) 1:(1,0,0) 2:(1,1,0) 3:(0,1,0) 4:(0,0,1) 5:(1,0,1) 6:(1,1,1) 7:(0,1,1)
// Edges 0..11 connect 0-1, 1-2, 3-2, 0-3, 4-5, 5-6, 7-6, 4-7, 0-4, 1-5, 2-6, 3-7.
extern const std::uint16_t kMcEdgeTable[256];
extern const std::int8_t kMcTriangleTable[256][16];

}  // namespace stereoshape
