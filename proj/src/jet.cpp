#include "mkropina/jet.hpp"

#include <map>
#include <mutex>
#include <string>

namespace mkropina {

void JetConfig::validate() const {
  if (num_vars < 2) throw ConfigError("jet configuration needs at least 2 variables");
  if (order < 1 || order > kMaxJetOrder) {
    throw ConfigError("jet order must be in [1, " + std::to_string(kMaxJetOrder) + "], got " +
                      std::to_string(order));
  }
}

std::shared_ptr<const JetSpace> JetSpace::get(const JetConfig& config) {
  config.validate();
  static std::mutex mutex;
  static std::map<std::pair<int, int>, std::shared_ptr<const JetSpace>> cache;
  std::lock_guard<std::mutex> lock(mutex);
  auto& slot = cache[{config.num_vars, config.order}];
  if (!slot) slot = std::shared_ptr<const JetSpace>(new JetSpace(config.num_vars, config.order));
  return slot;
}

namespace {

// Exponent vectors of total degree `degree` over `nv` variables, in
// lexicographically decreasing order of the leading exponents.
void enumerate_degree(int nv, int degree, int var, std::vector<std::uint8_t>& current,
                      std::vector<std::vector<std::uint8_t>>& out) {
  if (var == nv - 1) {
    current[static_cast<std::size_t>(var)] = static_cast<std::uint8_t>(degree);
    out.push_back(current);
    return;
  }
  for (int e = degree; e >= 0; --e) {
    current[static_cast<std::size_t>(var)] = static_cast<std::uint8_t>(e);
    enumerate_degree(nv, degree - e, var + 1, current, out);
  }
  current[static_cast<std::size_t>(var)] = 0;
}

}  // namespace

JetSpace::JetSpace(int num_vars, int order) : num_vars_(num_vars), max_order_(order) {
  std::vector<std::vector<std::uint8_t>> monomials;
  degree_offsets_.push_back(0);
  for (int d = 0; d <= order; ++d) {
    std::vector<std::uint8_t> current(static_cast<std::size_t>(num_vars), 0);
    enumerate_degree(num_vars, d, 0, current, monomials);
    degree_offsets_.push_back(monomials.size());
  }
  const std::size_t n = monomials.size();
  std::map<std::vector<std::uint8_t>, std::uint32_t> index;
  exponents_.reserve(n * static_cast<std::size_t>(num_vars));
  for (std::size_t i = 0; i < n; ++i) {
    index[monomials[i]] = static_cast<std::uint32_t>(i);
    int deg = 0;
    double fact = 1.0;
    for (auto e : monomials[i]) {
      exponents_.push_back(e);
      deg += e;
      for (int k = 2; k <= e; ++k) fact *= k;
    }
    degrees_.push_back(deg);
    factorials_.push_back(fact);
  }

  raise_.assign(static_cast<std::size_t>(num_vars) * n, -1);
  for (int v = 0; v < num_vars; ++v) {
    for (std::size_t i = 0; i < n; ++i) {
      if (degrees_[i] == order) continue;
      auto m = monomials[i];
      ++m[static_cast<std::size_t>(v)];
      raise_[static_cast<std::size_t>(v) * n + i] = static_cast<std::int32_t>(index.at(m));
    }
  }

  for (std::size_t a = 0; a < n; ++a) {
    const int room = order - degrees_[a];
    for (std::size_t b = 0; b < size(room); ++b) {
      auto m = monomials[a];
      for (std::size_t k = 0; k < m.size(); ++k) m[k] = static_cast<std::uint8_t>(m[k] + monomials[b][k]);
      products_.push_back({static_cast<std::uint32_t>(a), static_cast<std::uint32_t>(b), index.at(m)});
    }
  }
  std::stable_sort(products_.begin(), products_.end(),
                   [](const Product& x, const Product& y) { return x.out < y.out; });
  product_offsets_.push_back(0);
  for (int d = 0; d <= order; ++d) {
    const std::size_t limit = degree_offsets_[static_cast<std::size_t>(d) + 1];
    const auto it = std::partition_point(products_.begin(), products_.end(),
                                         [limit](const Product& p) { return p.out < limit; });
    product_offsets_.push_back(static_cast<std::size_t>(it - products_.begin()));
  }
}

std::size_t JetSpace::index_of(std::span<const int> vars) const {
  if (static_cast<int>(vars.size()) > max_order_) {
    throw OrderExceededError("multi-index of degree " + std::to_string(vars.size()) + " exceeds jet order " +
                             std::to_string(max_order_));
  }
  std::size_t idx = 0;
  for (int v : vars) {
    if (v < 0 || v >= num_vars_) throw ConfigError("multi-index variable " + std::to_string(v) + " out of range");
    idx = static_cast<std::size_t>(raise(v, idx));
  }
  return idx;
}

Jet seed_variable(int index, double value, const JetConfig& config) {
  const auto space = JetSpace::get(config);
  if (index < 0 || index >= config.num_vars) {
    throw ConfigError("seed index " + std::to_string(index) + " out of range for " +
                      std::to_string(config.num_vars) + " variables");
  }
  return Jet::variable(space, index, value);
}

double extract_partial(const Jet& j, std::span<const int> vars) { return partial(j, vars); }

}  // namespace mkropina
