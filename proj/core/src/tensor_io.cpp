#include "sarship/tensor_io.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iterator>
#include <numeric>
#include <system_error>

#include "sarship/errors.hpp"
#include "sarship/imagery.hpp"

namespace sarship {

namespace {

std::size_t product(const std::vector<int>& dims) {
  std::size_t n = 1;
  for (int d : dims) {
    if (d < 0) throw DimensionError("negative tensor extent");
    n *= static_cast<std::size_t>(d);
  }
  return n;
}

std::string shape_string(const std::vector<int>& dims) {
  std::string s = "[";
  for (std::size_t i = 0; i < dims.size(); ++i) {
    if (i) s += ",";
    s += std::to_string(dims[i]);
  }
  return s + "]";
}

class Tokenizer {
 public:
  explicit Tokenizer(std::string_view text) : text_(text) {}

  bool at_end() {
    skip_space();
    return pos_ >= text_.size();
  }

  std::string_view word() {
    skip_space();
    const std::size_t start = pos_;
    while (pos_ < text_.size() && !std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    if (start == pos_) throw FormatError("unexpected end of tensor file");
    return text_.substr(start, pos_ - start);
  }

  template <typename T>
  T number() {
    const auto w = word();
    T value{};
    auto [ptr, ec] = std::from_chars(w.data(), w.data() + w.size(), value);
    if (ec != std::errc{} || ptr != w.data() + w.size()) {
      throw FormatError("bad number '" + std::string(w) + "' in tensor file");
    }
    return value;
  }

 private:
  void skip_space() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  std::string_view text_;
  std::size_t pos_ = 0;
};

}  // namespace

Tensor::Tensor(std::vector<int> dims, float fill) : shape(std::move(dims)), values(product(shape), fill) {}

Tensor::Tensor(std::vector<int> dims, std::vector<float> data) : shape(std::move(dims)), values(std::move(data)) {
  if (values.size() != product(shape)) {
    throw DimensionError("tensor data does not match shape " + shape_string(shape));
  }
}

std::size_t Tensor::element_count() const { return product(shape); }

std::string format_tensors(const std::vector<NamedTensor>& tensors) {
  std::string out;
  char buf[64];
  for (const auto& [name, tensor] : tensors) {
    out += "name " + name + "\n";
    out += "tensor " + std::to_string(tensor.shape.size());
    for (int d : tensor.shape) out += " " + std::to_string(d);
    out += "\n";
    const std::size_t row = tensor.shape.empty() || tensor.shape.back() == 0
                                ? 1
                                : static_cast<std::size_t>(tensor.shape.back());
    for (std::size_t i = 0; i < tensor.values.size(); ++i) {
      auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), tensor.values[i]);
      out.append(buf, ptr);
      out += (i + 1) % row == 0 ? '\n' : ' ';
    }
  }
  return out;
}

std::vector<NamedTensor> parse_tensors(std::string_view text) {
  std::vector<NamedTensor> tensors;
  Tokenizer tok(text);
  while (!tok.at_end()) {
    if (tok.word() != "name") throw FormatError("expected 'name' line in tensor file");
    NamedTensor nt;
    nt.name = std::string(tok.word());
    if (tok.word() != "tensor") throw FormatError("expected 'tensor' line after name " + nt.name);
    const int ndim = tok.number<int>();
    if (ndim < 0 || ndim > 8) throw FormatError("bad tensor rank for " + nt.name);
    std::vector<int> dims(static_cast<std::size_t>(ndim));
    for (auto& d : dims) {
      d = tok.number<int>();
      if (d < 0) throw FormatError("negative extent for " + nt.name);
    }
    std::vector<float> data(product(dims));
    for (auto& v : data) {
      v = tok.number<float>();
      if (!std::isfinite(v)) throw FormatError("non-finite value in " + nt.name);
    }
    nt.tensor = Tensor(std::move(dims), std::move(data));
    tensors.push_back(std::move(nt));
  }
  return tensors;
}

void save_tensors(const std::vector<NamedTensor>& tensors, const std::filesystem::path& path) {
  write_file_atomic(path, format_tensors(tensors));
}

std::vector<NamedTensor> load_tensors(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open weights file " + path.string());
  const std::string text{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
  return parse_tensors(text);
}

const Tensor* find_tensor(const std::vector<NamedTensor>& tensors, std::string_view name) {
  for (const auto& nt : tensors) {
    if (nt.name == name) return &nt.tensor;
  }
  return nullptr;
}

const Tensor& require_tensor(const std::vector<NamedTensor>& tensors, std::string_view name,
                             const std::vector<int>& expected_shape) {
  const Tensor* t = find_tensor(tensors, name);
  if (t == nullptr) throw FormatError("missing tensor '" + std::string(name) + "'");
  if (t->shape != expected_shape) {
    throw FormatError("tensor '" + std::string(name) + "' has shape " + shape_string(t->shape) +
                      ", expected " + shape_string(expected_shape));
  }
  return *t;
}

}  // namespace sarship
