#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace sarship {

// Dense row-major float tensor.
struct Tensor {
  std::vector<int> shape;
  std::vector<float> values;

  Tensor() = default;
  explicit Tensor(std::vector<int> dims, float fill = 0.0f);
  Tensor(std::vector<int> dims, std::vector<float> data);

  std::size_t element_count() const;
  int dim(std::size_t axis) const { return shape.at(axis); }

  bool operator==(const Tensor&) const = default;
};

struct NamedTensor {
  std::string name;
  Tensor tensor;
};

// Text grammar, repeated per tensor:
//   name <identifier>
//   tensor <ndim> <d1> ... <dn>
//   <d1*...*dn whitespace-separated decimal reals, row-major>
// Floats are printed in shortest round-trip form, so write/read is exact.
std::string format_tensors(const std::vector<NamedTensor>& tensors);
std::vector<NamedTensor> parse_tensors(std::string_view text);

void save_tensors(const std::vector<NamedTensor>& tensors, const std::filesystem::path& path);
std::vector<NamedTensor> load_tensors(const std::filesystem::path& path);

// Lookup by name; FormatError if absent or if the shape differs from `expected_shape`.
const Tensor& require_tensor(const std::vector<NamedTensor>& tensors, std::string_view name,
                             const std::vector<int>& expected_shape);
const Tensor* find_tensor(const std::vector<NamedTensor>& tensors, std::string_view name);

}  // namespace sarship
