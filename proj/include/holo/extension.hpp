#pragma once

// f1(x, y, z) = h(x) + (y - delta(x)) g(x) + phi(x, y, z)(0, 0, z) near the
// deformed cube, with g chosen so that df1 = phi on the normal bundle of
// A_delta.

#include "holo/jetmodel.hpp"

#include <memory>
#include <string>
#include <vector>

namespace holo {

/// g(x) = (dh(x) grad delta(x) - phi(x, delta(x), 0)(grad delta(x) - d_y)) / (1 + |grad delta(x)|^2).
Vec extension_field(const JetSection& sigma, const HolonomicPair& pair, std::span<const double> x);

/// Value and differential of f1 at one point of R^m x R x R^k.
struct ExtensionJet {
  Vec value;         ///< n
  Mat differential;  ///< n x (m+1+k)
};

/// Everything f1 needs along the fiber over x, except the z-term.
struct FiberData {
  Vec x;
  double delta = 0.0;
  Vec grad_delta;  ///< m
  Vec h;           ///< n
  Mat dh;          ///< n x m
  Vec g;           ///< n
  Mat dg;          ///< n x m
};

class Extension {
 public:
  Extension(std::shared_ptr<const JetSection> sigma, HolonomicPair pair)
      : sigma_(std::move(sigma)), pair_(std::move(pair)) {}

  const JetSection& section() const { return *sigma_; }
  const HolonomicPair& pair() const { return pair_; }

  /// f1 expanded to `order` in all m+1+k variables at `point`.
  std::vector<Taylor> expand(std::span<const double> point, int order) const;
  Vec value(std::span<const double> point) const;
  ExtensionJet jet(std::span<const double> point) const;
  /// g expanded to `order` in x.
  std::vector<Taylor> field(std::span<const double> x, int order) const;

  /// Fiber data at x; jet(fiber(x), p) equals jet(p) for p over x.
  FiberData fiber(std::span<const double> x) const;
  ExtensionJet jet(const FiberData& fiber, std::span<const double> point) const;

 private:
  std::vector<Taylor> field_from(const std::vector<Taylor>& pair_jet, std::span<const double> x, int order) const;

  std::shared_ptr<const JetSection> sigma_;
  HolonomicPair pair_;
};

Extension extend(std::shared_ptr<const JetSection> sigma, HolonomicPair pair);

struct JetDistance {
  double value = 0.0;       ///< |f1 - f|_sup
  double derivative = 0.0;  ///< max_j |row_j(df1 - phi)|_2
  double total() const { return value > derivative ? value : derivative; }
};

/// Distance between j^1 f1 and sigma at `point`: sup norm on values and the
/// Euclidean-to-sup operator norm on differentials.
JetDistance jet_distance_on_fiber(const JetSection& sigma, const ExtensionJet& jet, std::span<const double> point);
JetDistance jet_distance_on_fiber(const Extension& ext, std::span<const double> point);

/// (delta, h) given by closed-form expressions in x1..xm.
HolonomicPair expression_pair(int m, const std::string& delta, const std::vector<std::string>& h);

}  // namespace holo
