#include "vmrd/problem.hpp"

#include <cmath>
#include <sstream>

#include "vmrd/errors.hpp"

namespace vmrd {

namespace {

std::string fmt_double(double v) {
  std::ostringstream os;
  os.precision(15);
  os << v;
  return os.str();
}

void check_sizes(const std::vector<int>& sizes, const char* name, int L,
                 std::vector<std::string>& out) {
  if (static_cast<int>(sizes.size()) != L) {
    out.push_back(std::string("alphabet_sizes.") + name + ": length " +
                  std::to_string(sizes.size()) + ", expected " + std::to_string(L));
    return;
  }
  for (std::size_t i = 0; i < sizes.size(); ++i) {
    if (sizes[i] < 1) {
      out.push_back(std::string("alphabet_sizes.") + name + "[" + std::to_string(i) +
                    "]: cardinality " + std::to_string(sizes[i]) + " < 1");
    }
  }
}

std::vector<std::string> alphabet_violations(const BlockAlphabets& ab) {
  std::vector<std::string> out;
  if (ab.L < 1) {
    out.push_back("L: " + std::to_string(ab.L) + " < 1");
    return out;
  }
  check_sizes(ab.sizes_x, "X", ab.L, out);
  check_sizes(ab.sizes_a, "A", ab.L, out);
  check_sizes(ab.sizes_y, "Y", ab.L, out);
  check_sizes(ab.sizes_xhat, "Xhat", ab.L, out);
  if (!out.empty()) return out;
  try {
    const auto nx = checked_product(ab.sizes_x, kMaxTableSize);
    const auto na = checked_product(ab.sizes_a, kMaxTableSize);
    checked_product(ab.sizes_y, kMaxTableSize);
    const auto nxh = checked_product(ab.sizes_xhat, kMaxTableSize);
    checked_mul(nx, nxh, kMaxTableSize);
    checked_mul(na, nx, kMaxTableSize);
    for (int i = 0; i < ab.L; ++i) {
      checked_mul(checked_mul(checked_product(std::span(ab.sizes_a).first(i + 1), kMaxTableSize),
                              nx, kMaxTableSize),
                  static_cast<std::uint64_t>(ab.sizes_y[i]), kMaxTableSize);
    }
  } catch (const CapExceeded& e) {
    out.push_back(std::string("alphabet_sizes: product alphabet too large (") + e.what() + ")");
  }
  return out;
}

// Entries finite and >= 0; optionally <= 1 and summing to one.
void check_table(const Eigen::VectorXd& t, std::size_t expected, const std::string& name,
                 bool probability, std::vector<std::string>& out) {
  if (static_cast<std::size_t>(t.size()) != expected) {
    out.push_back(name + ": length " + std::to_string(t.size()) + ", expected " +
                  std::to_string(expected));
    return;
  }
  for (Eigen::Index k = 0; k < t.size(); ++k) {
    if (!std::isfinite(t[k]) || t[k] < 0.0 || (probability && t[k] > 1.0 + kInputTolerance)) {
      out.push_back(name + "[" + std::to_string(k) + "]: entry " + fmt_double(t[k]) +
                    " out of range");
      return;
    }
  }
  if (probability && std::abs(t.sum() - 1.0) > kInputTolerance) {
    out.push_back(name + ": sums to " + fmt_double(t.sum()) + ", expected 1");
  }
}

void check_map(const std::vector<int>& m, std::size_t expected, int alphabet,
               const std::string& name, std::vector<std::string>& out) {
  if (m.size() != expected) {
    out.push_back(name + ": length " + std::to_string(m.size()) + ", expected " +
                  std::to_string(expected));
    return;
  }
  for (std::size_t k = 0; k < m.size(); ++k) {
    if (m[k] < 0 || m[k] >= alphabet) {
      out.push_back(name + "[" + std::to_string(k) + "]: symbol " + std::to_string(m[k]) +
                    " outside alphabet of size " + std::to_string(alphabet));
      return;
    }
  }
}

Eigen::VectorXd push_forward(const Eigen::VectorXd& pz, const std::vector<std::vector<int>>& f,
                             const BlockAlphabets& ab) {
  const MixedRadix xr = ab.x_radix();
  Eigen::VectorXd px = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(xr.size()));
  std::vector<int> digits(static_cast<std::size_t>(ab.L));
  for (Eigen::Index z = 0; z < pz.size(); ++z) {
    for (int i = 0; i < ab.L; ++i) digits[i] = f[i][z];
    px[static_cast<Eigen::Index>(xr.encode(digits))] += pz[z];
  }
  return px;
}

}  // namespace

void BlockAlphabets::check() const {
  auto v = alphabet_violations(*this);
  if (!v.empty()) throw ValidationError(std::move(v));
}

std::size_t BlockAlphabets::num_x() const { return checked_product(sizes_x); }
std::size_t BlockAlphabets::num_a() const { return checked_product(sizes_a); }
std::size_t BlockAlphabets::num_y() const { return checked_product(sizes_y); }
std::size_t BlockAlphabets::num_xhat() const { return checked_product(sizes_xhat); }

std::size_t BlockAlphabets::y_prefix_count(int i) const {
  return checked_product(std::span(sizes_y).first(static_cast<std::size_t>(i)));
}

std::size_t BlockAlphabets::a_prefix_count(int i) const {
  return checked_product(std::span(sizes_a).first(static_cast<std::size_t>(i)));
}

double ProblemSpec::kernel_prob(int slot, std::size_t a_prefix, std::size_t x, int y) const {
  const auto& t = kernel().tables[static_cast<std::size_t>(slot)];
  const std::size_t idx =
      (a_prefix * alphabets.num_x() + x) * static_cast<std::size_t>(alphabets.sizes_y[slot]) +
      static_cast<std::size_t>(y);
  return t[static_cast<Eigen::Index>(idx)];
}

CompiledFunctional compile_functional(const Eigen::VectorXd& pz,
                                      const std::vector<std::vector<int>>& f,
                                      const std::vector<std::vector<int>>& g,
                                      const BlockAlphabets& alphabets) {
  alphabets.check();
  std::vector<std::string> violations;
  const int zs = static_cast<int>(pz.size());
  if (zs < 1) violations.push_back("vending.z_size: must be >= 1");
  check_table(pz, static_cast<std::size_t>(zs), "vending.pz", true, violations);
  if (static_cast<int>(f.size()) != alphabets.L) {
    violations.push_back("vending.f: expected " + std::to_string(alphabets.L) + " maps");
  } else {
    for (int i = 0; i < alphabets.L; ++i) {
      check_map(f[i], static_cast<std::size_t>(zs), alphabets.sizes_x[i],
                "vending.f[" + std::to_string(i) + "]", violations);
    }
  }
  if (static_cast<int>(g.size()) != alphabets.L) {
    violations.push_back("vending.g: expected " + std::to_string(alphabets.L) + " maps");
  } else {
    for (int i = 0; i < alphabets.L; ++i) {
      check_map(g[i], alphabets.a_prefix_count(i + 1) * static_cast<std::size_t>(zs),
                alphabets.sizes_y[i], "vending.g[" + std::to_string(i) + "]", violations);
    }
  }
  if (!violations.empty()) throw ValidationError(std::move(violations));

  CompiledFunctional out;
  out.side_info = FunctionalSideInfo{zs, pz, f, g};
  out.source.px = push_forward(pz, f, alphabets);

  const MixedRadix xr = alphabets.x_radix();
  out.posterior = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(xr.size()), zs);
  std::vector<int> digits(static_cast<std::size_t>(alphabets.L));
  for (int z = 0; z < zs; ++z) {
    for (int i = 0; i < alphabets.L; ++i) digits[i] = f[i][z];
    const auto x = static_cast<Eigen::Index>(xr.encode(digits));
    out.posterior(x, z) = pz[z];
  }
  for (Eigen::Index x = 0; x < out.posterior.rows(); ++x) {
    const double p = out.source.px[x];
    if (p > 0.0) {
      out.posterior.row(x) /= p;
    } else {
      out.zero_probability.push_back(static_cast<std::size_t>(x));
    }
  }
  return out;
}

Eigen::VectorXd functional_posterior(const ProblemSpec& spec, std::size_t x) {
  const auto& fn = spec.functional();
  const auto digits = spec.alphabets.x_radix().decode(x);
  Eigen::VectorXd w = Eigen::VectorXd::Zero(fn.z_size);
  for (int z = 0; z < fn.z_size; ++z) {
    bool match = true;
    for (int i = 0; i < spec.alphabets.L && match; ++i) match = fn.f[i][z] == digits[i];
    if (match) w[z] = fn.pz[z];
  }
  const double total = w.sum();
  if (total <= 0.0) throw std::domain_error("posterior undefined for zero-probability x^L");
  return w / total;
}

std::vector<std::string> validate(const ProblemSpec& spec) {
  const auto& ab = spec.alphabets;
  std::vector<std::string> out = alphabet_violations(ab);
  if (!out.empty()) return out;

  const std::size_t nx = ab.num_x();
  check_table(spec.source.px, nx, "source.px", true, out);

  if (const auto* k = std::get_if<KernelSideInfo>(&spec.side_info)) {
    if (static_cast<int>(k->tables.size()) != ab.L) {
      out.push_back("vending.kernels: " + std::to_string(k->tables.size()) +
                    " tables, expected " + std::to_string(ab.L));
    } else {
      for (int i = 0; i < ab.L; ++i) {
        const std::string name = "vending.kernels[" + std::to_string(i) + "]";
        const auto& t = k->tables[i];
        const std::size_t ny = static_cast<std::size_t>(ab.sizes_y[i]);
        const std::size_t slices = ab.a_prefix_count(i + 1) * nx;
        std::vector<std::string> local;
        check_table(t, slices * ny, name, false, local);
        if (local.empty()) {
          for (std::size_t s = 0; s < slices; ++s) {
            const auto seg = t.segment(static_cast<Eigen::Index>(s * ny),
                                       static_cast<Eigen::Index>(ny));
            if (seg.maxCoeff() > 1.0) {
              local.push_back(name + " slice " + std::to_string(s) + ": entry above 1");
            } else if (std::abs(seg.sum() - 1.0) > kInputTolerance) {
              local.push_back(name + " slice " + std::to_string(s) + ": sums to " +
                              fmt_double(seg.sum()) + ", expected 1");
            }
          }
        }
        out.insert(out.end(), local.begin(), local.end());
      }
    }
  } else {
    const auto& fn = spec.functional();
    try {
      auto compiled = compile_functional(fn.pz, fn.f, fn.g, ab);
      if (static_cast<std::size_t>(spec.source.px.size()) == nx &&
          (compiled.source.px - spec.source.px).cwiseAbs().maxCoeff() > kDerivedTolerance) {
        out.push_back("source.px: differs from the law induced by (pz, f)");
      }
    } catch (const ValidationError& e) {
      out.insert(out.end(), e.violations().begin(), e.violations().end());
    }
    if (fn.z_size != fn.pz.size()) {
      out.push_back("vending.z_size: " + std::to_string(fn.z_size) + " does not match pz length " +
                    std::to_string(fn.pz.size()));
    }
  }

  check_table(spec.metrics.d, nx * ab.num_xhat(), "distortion", false, out);
  check_table(spec.metrics.gamma, ab.num_a() * nx, "cost", false, out);
  return out;
}

void require_valid(const ProblemSpec& spec) {
  auto v = validate(spec);
  if (!v.empty()) throw ValidationError(std::move(v));
}

std::vector<std::size_t> support_x(const ProblemSpec& spec) {
  std::vector<std::size_t> s;
  for (Eigen::Index x = 0; x < spec.source.px.size(); ++x) {
    if (spec.source.px[x] > 0.0) s.push_back(static_cast<std::size_t>(x));
  }
  return s;
}

}  // namespace vmrd
