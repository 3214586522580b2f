// Copyright pgdir contributors. All Rights Reserved.
// SPDX-License-Identifier: Apache-2.0

#ifndef PGDIR_TENSOR_IO_HPP
#define PGDIR_TENSOR_IO_HPP

#include <filesystem>
#include <json.hpp>
#include "pgdir/separated_tensor.hpp"

namespace pgdir
{

using Json = nlohmann::json;

// Container version written by this build. Readers accept any minor revision of the same
// major version and reject everything else.
inline constexpr int kFormatMajor = 1;
inline constexpr int kFormatMinor = 0;
std::string FormatVersion();
void CheckFormatVersion(const Json &j, const std::string &what);

Json GridToJson(const ParametricGrid &grid);
ParametricGrid GridFromJson(const Json &j);

Json SpatialToJson(const Eigen::VectorXd &v);
Json SpatialToJson(const Eigen::MatrixXd &m);
Json SpatialToJson(const SparseMatrix &m);

//
// JSON container of a separated tensor:
//   {format, format_version, spatial_kind, n_d, m, n_p, grids, terms: [{beta, spatial,
//   factors}]}
// Doubles are written in shortest round-trip form, so write -> read is lossless.
//
template <typename S>
Json TensorToJson(const SeparatedTensor<S> &x);

// The grid is taken from the container; pass `grid` to share an existing equal grid.
template <typename S>
SeparatedTensor<S> TensorFromJson(const Json &j, GridPtr grid = nullptr);

template <typename S>
void WriteTensor(const SeparatedTensor<S> &x, const std::filesystem::path &path);
template <typename S>
SeparatedTensor<S> ReadTensor(const std::filesystem::path &path);

Json ReadJsonFile(const std::filesystem::path &path);
// Compact single-line dump followed by a newline.
void WriteJsonFile(const Json &j, const std::filesystem::path &path);

}  // namespace pgdir

#endif  // PGDIR_TENSOR_IO_HPP
