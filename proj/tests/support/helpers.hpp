#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "oracles.hpp"
#include "sdae/autoencoder.hpp"
#include "sdae/data.hpp"
#include "sdae/nn.hpp"
#include "sdae/rng.hpp"

namespace testing_support {

inline oracle::Act to_oracle(sdae::Activation a) {
  switch (a) {
    case sdae::Activation::Sigmoid: return oracle::Act::Sigmoid;
    case sdae::Activation::Tanh: return oracle::Act::Tanh;
    case sdae::Activation::Relu: return oracle::Act::Relu;
    case sdae::Activation::Softmax: return oracle::Act::Softmax;
    case sdae::Activation::Linear: return oracle::Act::Linear;
  }
  return oracle::Act::Linear;
}

inline oracle::Vec vec(std::span<const double> v) { return {v.begin(), v.end()}; }

inline oracle::Mat mat(const sdae::Matrix& m) {
  oracle::Mat out;
  for (std::size_t r = 0; r < m.rows(); ++r) out.push_back(vec(m.row(r)));
  return out;
}

inline std::vector<oracle::Layer> net(std::span<const sdae::DenseLayer> layers) {
  std::vector<oracle::Layer> out;
  for (const auto& l : layers) out.push_back({mat(l.weights), vec(l.bias), to_oracle(l.activation)});
  return out;
}

inline oracle::TiedAe tied(const sdae::DenoisingAutoencoder& da) {
  return {mat(da.encoder.weights), vec(da.encoder.bias), vec(da.decoder_bias),
          to_oracle(da.encoder.activation), to_oracle(da.decoder_activation)};
}

inline sdae::Vector random_vector(std::size_t n, sdae::Rng& rng, double lo = -1.0,
                                  double hi = 1.0) {
  sdae::Vector v(n);
  for (auto& x : v) x = rng.uniform(lo, hi);
  return v;
}

inline sdae::Matrix random_matrix(std::size_t r, std::size_t c, sdae::Rng& rng, double lo = -1.0,
                                  double hi = 1.0) {
  sdae::Matrix m(r, c);
  for (auto& x : m.span()) x = rng.uniform(lo, hi);
  return m;
}

}  // namespace testing_support
