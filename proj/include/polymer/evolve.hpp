#pragma once

#include "polymer/disorder.hpp"
#include "polymer/lattice.hpp"

namespace polymer {

// Multipliers applied after a diffusion step: the pin value of `field` at
// absolute cell (origin + u, time). A null field means pure diffusion.
struct SlabWeights {
  const DisorderField* field = nullptr;
  Point origin;
  int time = 0;
  Pin pin = Pin::kWeight;
};

// next(u) = m(u) * (2d)^{-1} * sum_{|e|=1} prev(u - e) for u in the cone
// (clipped to the cube); cells of `next` outside the cone are left untouched.
// prev and next share dimension and radius and have opposite parity.
void diffuse_step(const ParityGrid& prev, ParityGrid& next, const Cone& cone,
                  const SlabWeights* weights = nullptr);

// g(u) = pin value of the field at (origin + u, time) for u in the cone.
void fill_pin(ParityGrid& g, const Cone& cone, const SlabWeights& weights);

// Zeroes every stored cell of g outside the cone.
void clear_outside(ParityGrid& g, const Cone& cone);

// Sum of the stored cells inside the cone.
double cone_sum(const ParityGrid& g, const Cone& cone);
double cone_sum_squares(const ParityGrid& g, const Cone& cone);

}  // namespace polymer
