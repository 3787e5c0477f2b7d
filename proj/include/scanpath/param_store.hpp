#pragma once

#include <Eigen/Core>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace scanpath {

using MatRM = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vec = Eigen::VectorXd;

using ParamId = std::size_t;

/// Flat storage for named parameter tensors. Registration happens first,
/// then allocate() pins the layout; gradients live in caller-owned flat
/// buffers of the same size so evaluation can run on worker threads.
class ParamStore {
 public:
  struct Entry {
    std::string name;
    std::vector<std::size_t> shape;
    std::size_t offset = 0;
    std::size_t size = 0;
  };

  ParamId add(std::string name, std::vector<std::size_t> shape) {
    if (allocated_) throw std::logic_error("ParamStore: add after allocate");
    std::size_t size = 1;
    for (std::size_t d : shape) size *= d;
    entries_.push_back({std::move(name), std::move(shape), total_, size});
    total_ += size;
    return entries_.size() - 1;
  }

  void allocate() {
    values_.assign(total_, 0.0);
    allocated_ = true;
  }

  std::size_t size() const { return total_; }
  const std::vector<Entry>& entries() const { return entries_; }
  const Entry& entry(ParamId id) const { return entries_[id]; }

  ParamId id_of(const std::string& name) const {
    for (std::size_t i = 0; i < entries_.size(); ++i) {
      if (entries_[i].name == name) return i;
    }
    throw std::out_of_range("ParamStore: no parameter named " + name);
  }

  std::span<double> values() { return values_; }
  std::span<const double> values() const { return values_; }

  double* data(ParamId id) { return values_.data() + entries_[id].offset; }
  const double* data(ParamId id) const { return values_.data() + entries_[id].offset; }

  Eigen::Map<MatRM> mat(ParamId id) {
    const Entry& e = entries_[id];
    return {values_.data() + e.offset, static_cast<Eigen::Index>(e.shape[0]),
            static_cast<Eigen::Index>(e.shape[1])};
  }
  Eigen::Map<const MatRM> mat(ParamId id) const {
    const Entry& e = entries_[id];
    return {values_.data() + e.offset, static_cast<Eigen::Index>(e.shape[0]),
            static_cast<Eigen::Index>(e.shape[1])};
  }
  Eigen::Map<Vec> vec(ParamId id) {
    const Entry& e = entries_[id];
    return {values_.data() + e.offset, static_cast<Eigen::Index>(e.size)};
  }
  Eigen::Map<const Vec> vec(ParamId id) const {
    const Entry& e = entries_[id];
    return {values_.data() + e.offset, static_cast<Eigen::Index>(e.size)};
  }

  /// Gradient views into an external flat buffer.
  Eigen::Map<MatRM> grad_mat(ParamId id, std::span<double> grads) const {
    const Entry& e = entries_[id];
    return {grads.data() + e.offset, static_cast<Eigen::Index>(e.shape[0]),
            static_cast<Eigen::Index>(e.shape[1])};
  }
  Eigen::Map<Vec> grad_vec(ParamId id, std::span<double> grads) const {
    const Entry& e = entries_[id];
    return {grads.data() + e.offset, static_cast<Eigen::Index>(e.size)};
  }

 private:
  std::vector<Entry> entries_;
  std::vector<double> values_;
  std::size_t total_ = 0;
  bool allocated_ = false;
};

}  // namespace scanpath
