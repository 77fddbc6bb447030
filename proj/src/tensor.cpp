#include "adnet/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <iomanip>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>

#include "adnet/error.hpp"

namespace adnet {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::MissingParticipantTier: return "MissingParticipantTier";
    case ErrorCode::MalformedTier: return "MalformedTier";
    case ErrorCode::BadDemographics: return "BadDemographics";
    case ErrorCode::MissingLabel: return "MissingLabel";
    case ErrorCode::EmptyCorpus: return "EmptyCorpus";
    case ErrorCode::EmptyText: return "EmptyText";
    case ErrorCode::UnknownTag: return "UnknownTag";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::EmptyFile: return "EmptyFile";
    case ErrorCode::MissingLexicon: return "MissingLexicon";
    case ErrorCode::BadLexicon: return "BadLexicon";
    case ErrorCode::ShapeMismatch: return "ShapeMismatch";
    case ErrorCode::NonFiniteValue: return "NonFiniteValue";
    case ErrorCode::NotScalarLoss: return "NotScalarLoss";
    case ErrorCode::ZeroClass: return "ZeroClass";
    case ErrorCode::Diverged: return "Diverged";
    case ErrorCode::VersionMismatch: return "VersionMismatch";
    case ErrorCode::CorruptFile: return "CorruptFile";
    case ErrorCode::LengthMismatch: return "LengthMismatch";
    case ErrorCode::TooSmall: return "TooSmall";
    case ErrorCode::Io: return "Io";
    case ErrorCode::BadConfig: return "BadConfig";
  }
  return "Unknown";
}

std::size_t shape_size(const Shape& shape) {
  return std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>());
}

std::string shape_string(const Shape& shape) {
  std::string s = "[";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) s += "x";
    s += std::to_string(shape[i]);
  }
  return s + "]";
}

namespace {

void check_shape(const Shape& shape) {
  if (shape.empty() || std::any_of(shape.begin(), shape.end(), [](std::size_t d) { return d == 0; }))
    throw Error(ErrorCode::ShapeMismatch, "tensor dimensions must be positive, got " + shape_string(shape));
}

}  // namespace

Tensor::Tensor(Shape shape, double fill) : shape_(std::move(shape)) {
  check_shape(shape_);
  data_.assign(shape_size(shape_), fill);
}

Tensor::Tensor(Shape shape, std::vector<double> data) : shape_(std::move(shape)), data_(std::move(data)) {
  check_shape(shape_);
  if (data_.size() != shape_size(shape_))
    throw Error(ErrorCode::ShapeMismatch, "data length " + std::to_string(data_.size()) +
                                              " does not match shape " + shape_string(shape_));
}

Tensor Tensor::matrix(std::size_t rows, std::size_t cols, std::initializer_list<double> values) {
  return Tensor({rows, cols}, std::vector<double>(values));
}

Tensor Tensor::row(std::span<const double> values) {
  return Tensor({1, values.size()}, std::vector<double>(values.begin(), values.end()));
}

std::size_t Tensor::rows() const {
  if (rank() != 2) throw Error(ErrorCode::ShapeMismatch, "expected a matrix, got " + shape_string(shape_));
  return shape_[0];
}

std::size_t Tensor::cols() const {
  if (rank() != 2) throw Error(ErrorCode::ShapeMismatch, "expected a matrix, got " + shape_string(shape_));
  return shape_[1];
}

double Tensor::item() const {
  if (size() != 1) throw Error(ErrorCode::NotScalarLoss, "item() on tensor " + shape_string(shape_));
  return data_[0];
}

void Tensor::fill(double value) { std::fill(data_.begin(), data_.end(), value); }

bool Tensor::all_finite() const noexcept {
  return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
}

void dump(const Tensor& t, std::ostream& out) {
  out << "shape";
  for (auto d : t.shape()) out << ' ' << d;
  out << '\n' << std::setprecision(17);
  for (std::size_t i = 0; i < t.size(); ++i) out << (i ? " " : "") << t[i];
  out << '\n';
}

Tensor read_dump(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw Error(ErrorCode::CorruptFile, "missing tensor header");
  std::istringstream header(line);
  std::string tag;
  header >> tag;
  if (tag != "shape") throw Error(ErrorCode::CorruptFile, "tensor header must start with 'shape'");
  Shape shape;
  for (std::size_t d; header >> d;) shape.push_back(d);
  std::vector<double> values(shape_size(shape));
  for (auto& v : values)
    if (!(in >> v)) throw Error(ErrorCode::CorruptFile, "truncated tensor values");
  return Tensor(std::move(shape), std::move(values));
}

}  // namespace adnet
