#pragma once

#include <compare>

namespace latticewalk {

// One basis state |x1,x2,c1,c2> of the walker: two lattice coordinates and
// a two-sided coin with values in {-1,+1}. Ordered so sparse maps iterate
// deterministically.
struct BasisLabel {
  int x1 = 0;
  int x2 = 0;
  int c1 = -1;
  int c2 = -1;

  friend auto operator<=>(const BasisLabel&, const BasisLabel&) = default;
};

}  // namespace latticewalk
