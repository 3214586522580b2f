// Copyright pgdir contributors. All Rights Reserved.
// SPDX-License-Identifier: Apache-2.0

#ifndef PGDIR_COMPRESSION_HPP
#define PGDIR_COMPRESSION_HPP

#include "pgdir/separated_tensor.hpp"

namespace pgdir
{

struct CompressionOptions
{
  double tol = 1.0e-5;       // relative discrete-L2 residual target
  Index max_terms = 64;
  int max_sweeps = 200;      // alternating least-squares sweeps per refinement
  double sweep_tol = 1.0e-7; // relative decrease of the squared residual between sweeps
  unsigned seed = 20240611;  // fallback initialization when the all-ones start stalls
};

struct CompressionReport
{
  Index input_terms = 0;
  Index output_terms = 0;
  double relative_residual = 0.0;
  int sweeps = 0;
  bool converged = true;     // false when max_terms was hit before reaching tol
};

//
// L2 re-projection onto fewer rank-one terms. Terms are added greedily, each one fitted
// to the current residual, and after every addition all terms are refined jointly by
// alternating least squares. Output spatial factors are linear combinations of the input
// ones, so every computation runs on factor-wise inner products. Returns the input in
// normalized form when compression would not reduce the term count.
//
template <typename S>
SeparatedTensor<S> SepCompress(const SeparatedTensor<S> &x, const CompressionOptions &options,
                               CompressionReport *report = nullptr);

extern template SepVector SepCompress(const SepVector &, const CompressionOptions &,
                                      CompressionReport *);
extern template SepSparse SepCompress(const SepSparse &, const CompressionOptions &,
                                      CompressionReport *);
extern template SepDense SepCompress(const SepDense &, const CompressionOptions &,
                                     CompressionReport *);

}  // namespace pgdir

#endif  // PGDIR_COMPRESSION_HPP
