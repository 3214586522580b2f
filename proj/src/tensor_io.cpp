// Copyright pgdir contributors. All Rights Reserved.
// SPDX-License-Identifier: Apache-2.0

#include "pgdir/tensor_io.hpp"

#include <fstream>
#include <sstream>
#include "pgdir/error.hpp"

namespace pgdir
{

namespace
{

const char *kTensorFormat = "pgdir-separated-tensor";

template <typename T>
T Get(const Json &j, const char *key, const std::string &what)
{
  if (!j.is_object() || !j.contains(key))
  {
    throw ParseError(what + ": missing field '" + key + "'");
  }
  try
  {
    return j.at(key).get<T>();
  }
  catch (const Json::exception &e)
  {
    throw ParseError(what + ": bad field '" + key + "': " + e.what());
  }
}

Eigen::VectorXd VectorFromJson(const Json &j, const std::string &what)
{
  if (!j.is_array())
  {
    throw ParseError(what + ": expected an array of numbers");
  }
  Eigen::VectorXd v(static_cast<Index>(j.size()));
  for (std::size_t k = 0; k < j.size(); k++)
  {
    if (!j[k].is_number())
    {
      throw ParseError(what + ": non-numeric entry at position " + std::to_string(k));
    }
    v(static_cast<Index>(k)) = j[k].get<double>();
  }
  return v;
}

Json VectorToJson(const Eigen::VectorXd &v)
{
  Json a = Json::array();
  for (Index k = 0; k < v.size(); k++)
  {
    a.push_back(v(k));
  }
  return a;
}

template <typename S>
S SpatialFromJson(const Json &j, Index rows, Index cols, const std::string &what);

template <>
Eigen::VectorXd SpatialFromJson<Eigen::VectorXd>(const Json &j, Index rows, Index,
                                                 const std::string &what)
{
  Eigen::VectorXd v = VectorFromJson(j, what);
  if (v.size() != rows)
  {
    throw ParseError(what + ": vector factor has length " + std::to_string(v.size()) +
                     ", expected " + std::to_string(rows));
  }
  return v;
}

template <>
Eigen::MatrixXd SpatialFromJson<Eigen::MatrixXd>(const Json &j, Index rows, Index cols,
                                                 const std::string &what)
{
  const Eigen::VectorXd data = VectorFromJson(j.at("data"), what);
  if (Get<Index>(j, "rows", what) != rows || Get<Index>(j, "cols", what) != cols ||
      data.size() != rows * cols)
  {
    throw ParseError(what + ": dense factor shape mismatch");
  }
  return Eigen::Map<const Eigen::MatrixXd>(data.data(), rows, cols);
}

template <>
SparseMatrix SpatialFromJson<SparseMatrix>(const Json &j, Index rows, Index cols,
                                           const std::string &what)
{
  if (Get<Index>(j, "rows", what) != rows || Get<Index>(j, "cols", what) != cols)
  {
    throw ParseError(what + ": sparse factor shape mismatch");
  }
  const auto colptr = Get<std::vector<Index>>(j, "col_ptr", what);
  const auto rowidx = Get<std::vector<Index>>(j, "row_idx", what);
  const Eigen::VectorXd values = VectorFromJson(j.at("values"), what);
  if (static_cast<Index>(colptr.size()) != cols + 1 || colptr.front() != 0 ||
      colptr.back() != static_cast<Index>(rowidx.size()) ||
      values.size() != static_cast<Index>(rowidx.size()))
  {
    throw ParseError(what + ": inconsistent compressed-column arrays");
  }
  std::vector<Eigen::Triplet<double, Index>> triplets;
  triplets.reserve(rowidx.size());
  for (Index c = 0; c < cols; c++)
  {
    for (Index k = colptr[static_cast<std::size_t>(c)];
         k < colptr[static_cast<std::size_t>(c + 1)]; k++)
    {
      const Index r = rowidx[static_cast<std::size_t>(k)];
      if (r < 0 || r >= rows)
      {
        throw ParseError(what + ": sparse row index out of range");
      }
      triplets.emplace_back(r, c, values(k));
    }
  }
  SparseMatrix m(rows, cols);
  m.setFromTriplets(triplets.begin(), triplets.end());
  m.makeCompressed();
  return m;
}

}  // namespace

std::string FormatVersion()
{
  return std::to_string(kFormatMajor) + "." + std::to_string(kFormatMinor);
}

void CheckFormatVersion(const Json &j, const std::string &what)
{
  const auto version = Get<std::string>(j, "format_version", what);
  const auto dot = version.find('.');
  int major = -1;
  try
  {
    major = std::stoi(version.substr(0, dot));
  }
  catch (const std::exception &)
  {
    throw ParseError(what + ": malformed format_version '" + version + "'");
  }
  if (major != kFormatMajor)
  {
    throw ParseError(what + ": unsupported format_version " + version + " (this build reads " +
                     std::to_string(kFormatMajor) + ".x)");
  }
}

Json GridToJson(const ParametricGrid &grid)
{
  Json axes = Json::array();
  for (const auto &a : grid.Axes())
  {
    axes.push_back({{"name", a.name}, {"lower", a.lower}, {"upper", a.upper}, {"nodes", a.nodes}});
  }
  return axes;
}

ParametricGrid GridFromJson(const Json &j)
{
  if (!j.is_array())
  {
    throw ParseError("grids: expected an array of axes");
  }
  std::vector<ParameterAxis> axes;
  for (const auto &a : j)
  {
    ParameterAxis axis;
    axis.name = Get<std::string>(a, "name", "grid axis");
    axis.lower = Get<double>(a, "lower", "grid axis");
    axis.upper = Get<double>(a, "upper", "grid axis");
    axis.nodes = Get<std::vector<double>>(a, "nodes", "grid axis");
    axes.push_back(std::move(axis));
  }
  try
  {
    return ParametricGrid(std::move(axes));
  }
  catch (const RangeError &e)
  {
    throw ParseError(std::string("grids: ") + e.what());
  }
}

Json SpatialToJson(const Eigen::VectorXd &v)
{
  return VectorToJson(v);
}

Json SpatialToJson(const Eigen::MatrixXd &m)
{
  return {{"rows", m.rows()},
          {"cols", m.cols()},
          {"data", VectorToJson(Eigen::Map<const Eigen::VectorXd>(m.data(), m.size()))}};
}

Json SpatialToJson(const SparseMatrix &m)
{
  SparseMatrix c = m;
  c.makeCompressed();
  std::vector<Index> colptr(c.outerIndexPtr(), c.outerIndexPtr() + c.outerSize() + 1);
  std::vector<Index> rowidx(c.innerIndexPtr(), c.innerIndexPtr() + c.nonZeros());
  return {{"rows", c.rows()},
          {"cols", c.cols()},
          {"col_ptr", colptr},
          {"row_idx", rowidx},
          {"values", VectorToJson(Eigen::Map<const Eigen::VectorXd>(c.valuePtr(), c.nonZeros()))}};
}

template <typename S>
Json TensorToJson(const SeparatedTensor<S> &x)
{
  Json terms = Json::array();
  for (const auto &t : x.Terms())
  {
    Json factors = Json::array();
    for (const auto &f : t.factors)
    {
      factors.push_back(VectorToJson(f));
    }
    terms.push_back({{"beta", t.amplitude}, {"spatial", SpatialToJson(t.spatial)},
                     {"factors", std::move(factors)}});
  }
  return {{"format", kTensorFormat},
          {"format_version", FormatVersion()},
          {"spatial_kind", KindName(KindOf<S>())},
          {"n_d", x.Rows()},
          {"m", x.Cols()},
          {"n_p", x.NumParams()},
          {"grids", GridToJson(*x.Grid())},
          {"terms", std::move(terms)}};
}

template <typename S>
SeparatedTensor<S> TensorFromJson(const Json &j, GridPtr grid)
{
  const std::string what = "separated tensor";
  if (Get<std::string>(j, "format", what) != kTensorFormat)
  {
    throw ParseError(what + ": not a " + std::string(kTensorFormat) + " container");
  }
  CheckFormatVersion(j, what);
  const auto kind = Get<std::string>(j, "spatial_kind", what);
  if (kind != KindName(KindOf<S>()))
  {
    throw ParseError(what + ": spatial_kind is '" + kind + "', expected '" +
                     KindName(KindOf<S>()) + "'");
  }
  ParametricGrid stored = GridFromJson(j.at("grids"));
  if (!grid)
  {
    grid = std::make_shared<const ParametricGrid>(std::move(stored));
  }
  else if (!(*grid == stored))
  {
    throw ParseError(what + ": stored grid differs from the expected one");
  }
  if (Get<int>(j, "n_p", what) != grid->NumParams())
  {
    throw ParseError(what + ": n_p does not match the grid");
  }
  const auto rows = Get<Index>(j, "n_d", what), cols = Get<Index>(j, "m", what);
  SeparatedTensor<S> x(grid, rows, cols);
  const Json &terms = j.at("terms");
  for (std::size_t i = 0; i < terms.size(); i++)
  {
    const std::string tw = what + " term " + std::to_string(i);
    std::vector<Eigen::VectorXd> factors;
    for (const auto &f : terms[i].at("factors"))
    {
      factors.push_back(VectorFromJson(f, tw));
    }
    try
    {
      x.AddTerm(Get<double>(terms[i], "beta", tw),
                SpatialFromJson<S>(terms[i].at("spatial"), rows, cols, tw), std::move(factors));
    }
    catch (const ShapeError &e)
    {
      throw ParseError(tw + ": " + e.what());
    }
  }
  return x;
}

Json ReadJsonFile(const std::filesystem::path &path)
{
  std::ifstream in(path);
  if (!in)
  {
    throw MissingInput("cannot open " + path.string());
  }
  try
  {
    return Json::parse(in);
  }
  catch (const Json::parse_error &e)
  {
    throw ParseError(path.string() + ": " + e.what());
  }
}

void WriteJsonFile(const Json &j, const std::filesystem::path &path)
{
  if (path.has_parent_path())
  {
    std::filesystem::create_directories(path.parent_path());
  }
  std::ofstream out(path);
  if (!out)
  {
    throw Error("cannot write " + path.string());
  }
  out << j.dump() << '\n';
  if (!out)
  {
    throw Error("error while writing " + path.string());
  }
}

template <typename S>
void WriteTensor(const SeparatedTensor<S> &x, const std::filesystem::path &path)
{
  WriteJsonFile(TensorToJson(x), path);
}

template <typename S>
SeparatedTensor<S> ReadTensor(const std::filesystem::path &path)
{
  return TensorFromJson<S>(ReadJsonFile(path));
}

template Json TensorToJson(const SepVector &);
template Json TensorToJson(const SepSparse &);
template Json TensorToJson(const SepDense &);
template SepVector TensorFromJson(const Json &, GridPtr);
template SepSparse TensorFromJson(const Json &, GridPtr);
template SepDense TensorFromJson(const Json &, GridPtr);
template void WriteTensor(const SepVector &, const std::filesystem::path &);
template void WriteTensor(const SepSparse &, const std::filesystem::path &);
template void WriteTensor(const SepDense &, const std::filesystem::path &);
template SepVector ReadTensor(const std::filesystem::path &);
template SepSparse ReadTensor(const std::filesystem::path &);
template SepDense ReadTensor(const std::filesystem::path &);

}  // namespace pgdir
