#pragma once

#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "estimators.hpp"
#include "initial.hpp"
#include "state.hpp"
#include "triplet_engine.hpp"

namespace unravel {

using nlohmann::json;

// ---- model files -----------------------------------------------------------
//
// {
//   "dim": 3,
//   "hbar": 1.0,
//   "free_energies": [e0, e1, e2],
//   "interaction": [[row, col, re, im], ...]   // nonzero entries only
// }

inline SplitHamiltonian model_from_json(const json& j) {
  if (!j.is_object() || !j.contains("dim") || !j.contains("free_energies") ||
      !j.contains("interaction")) {
    throw ConfigError("model needs dim, free_energies and interaction fields");
  }
  const int dim = j.at("dim").get<int>();
  if (dim < 1) {
    throw ConfigError("model dim must be >= 1");
  }
  const double hbar = j.value("hbar", 1.0);

  const auto& fe = j.at("free_energies");
  if (!fe.is_array() || static_cast<int>(fe.size()) != dim) {
    throw ConfigError("free_energies must list exactly dim energies");
  }
  RealVector free(dim);
  for (int i = 0; i < dim; ++i) free(i) = fe.at(i).get<double>();

  ComplexMatrix h = ComplexMatrix::Zero(dim, dim);
  Eigen::MatrixXi seen = Eigen::MatrixXi::Zero(dim, dim);
  for (const auto& entry : j.at("interaction")) {
    if (!entry.is_array() || entry.size() != 4) {
      throw ConfigError("interaction entries must be [row, col, re, im]");
    }
    const int r = entry.at(0).get<int>();
    const int c = entry.at(1).get<int>();
    if (r < 0 || r >= dim || c < 0 || c >= dim) {
      throw ConfigError("interaction coordinate (" + std::to_string(r) + "," +
                        std::to_string(c) + ") out of range");
    }
    if (seen(r, c)) {
      throw ConfigError("duplicate interaction coordinate (" +
                        std::to_string(r) + "," + std::to_string(c) + ")");
    }
    seen(r, c) = 1;
    h(r, c) = Complex(entry.at(2).get<double>(), entry.at(3).get<double>());
  }
  // validate_hamiltonian also enforces the Hermitian closure of the entries.
  return validate_hamiltonian(dim, std::move(free), std::move(h), hbar);
}

inline json model_to_json(const SplitHamiltonian& H) {
  json j;
  j["dim"] = H.dim;
  j["hbar"] = H.hbar;
  j["free_energies"] = std::vector<double>(
      H.free_energies.data(), H.free_energies.data() + H.dim);
  json entries = json::array();
  for (int r = 0; r < H.dim; ++r) {
    for (int c = 0; c < H.dim; ++c) {
      const Complex v = H.interaction(r, c);
      if (v != Complex(0.0)) {
        entries.push_back({r, c, v.real(), v.imag()});
      }
    }
  }
  j["interaction"] = std::move(entries);
  return j;
}

inline SplitHamiltonian load_model_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw ConfigError("cannot open model file " + path);
  }
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    throw ConfigError("model file " + path + ": " + e.what());
  }
  return model_from_json(j);
}

// ---- initial-state specs ---------------------------------------------------
//
// {"basis": k} | {"pure": [[re,im], ...]} | {"mixture": [{"w": 0.5, "pure": [...]}, ...]}

namespace detail {

inline ComplexVector amplitudes_from_json(const json& arr) {
  if (!arr.is_array() || arr.empty()) {
    throw ConfigError("pure state must be a nonempty array of [re,im] pairs");
  }
  ComplexVector a(arr.size());
  for (std::size_t i = 0; i < arr.size(); ++i) {
    const auto& c = arr.at(i);
    if (!c.is_array() || c.size() != 2) {
      throw ConfigError("amplitudes must be [re, im] pairs");
    }
    a(static_cast<Eigen::Index>(i)) =
        Complex(c.at(0).get<double>(), c.at(1).get<double>());
  }
  return a;
}

inline json amplitudes_to_json(const ComplexVector& a) {
  json arr = json::array();
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    arr.push_back({a(i).real(), a(i).imag()});
  }
  return arr;
}

}  // namespace detail

inline InitialSpec initial_from_json(const json& j) {
  if (j.is_object() && j.contains("basis")) {
    return BasisPure{j.at("basis").get<int>()};
  }
  if (j.is_object() && j.contains("pure")) {
    return PureAmplitudes{detail::amplitudes_from_json(j.at("pure"))};
  }
  if (j.is_object() && j.contains("mixture")) {
    Mixture mix;
    for (const auto& br : j.at("mixture")) {
      if (!br.is_object() || !br.contains("w") || !br.contains("pure")) {
        throw ConfigError("mixture branches need fields w and pure");
      }
      mix.branches.push_back(
          {br.at("w").get<double>(),
           PureAmplitudes{detail::amplitudes_from_json(br.at("pure"))}});
    }
    return mix;
  }
  throw ConfigError("initial spec must contain basis, pure or mixture");
}

inline json initial_to_json(const InitialSpec& spec) {
  json j;
  if (const auto* b = std::get_if<BasisPure>(&spec)) {
    j["basis"] = b->index;
  } else if (const auto* p = std::get_if<PureAmplitudes>(&spec)) {
    j["pure"] = detail::amplitudes_to_json(p->amplitudes);
  } else {
    json branches = json::array();
    for (const auto& br : std::get<Mixture>(spec).branches) {
      branches.push_back(
          {{"w", br.weight},
           {"pure", detail::amplitudes_to_json(br.state.amplitudes)}});
    }
    j["mixture"] = std::move(branches);
  }
  return j;
}

// ---- compressed triplet ensembles ------------------------------------------
//
// {"t": ..., "M": ..., "rate": ..., "hbar": ..., "entries": [[phi, psi, re, im], ...]}

inline json ensemble_to_json(const TripletEnsemble& e) {
  json j;
  j["t"] = e.t;
  j["M"] = e.meta.trajectories;
  j["rate"] = e.meta.rate;
  j["hbar"] = e.meta.hbar;
  json entries = json::array();
  for (const Triplet& tr : e.entries) {
    entries.push_back(
        {tr.phi_index, tr.psi_index, tr.weight.real(), tr.weight.imag()});
  }
  j["entries"] = std::move(entries);
  return j;
}

inline TripletEnsemble ensemble_from_json(const json& j) {
  TripletEnsemble e;
  e.t = j.at("t").get<double>();
  e.meta.trajectories = j.at("M").get<std::size_t>();
  e.meta.rate = j.value("rate", 0.0);
  e.meta.hbar = j.value("hbar", 1.0);
  for (const auto& entry : j.at("entries")) {
    if (!entry.is_array() || entry.size() != 4) {
      throw ConfigError("ensemble entries must be [phi, psi, re, im]");
    }
    e.entries.push_back(Triplet{
        Complex(entry.at(2).get<double>(), entry.at(3).get<double>()),
        entry.at(0).get<int>(), entry.at(1).get<int>()});
  }
  return e;
}

// ---- estimator output ------------------------------------------------------

namespace detail {

inline json matrix_to_json(const ComplexMatrix& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      row.push_back({m(i, j).real(), m(i, j).imag()});
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

inline json real_matrix_to_json(const RealMatrix& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      row.push_back(m(i, j));
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace detail

inline json slices_to_json(const std::vector<double>& times,
                           const std::vector<EstimateSlice>& slices) {
  json arr = json::array();
  for (std::size_t k = 0; k < slices.size(); ++k) {
    json row;
    row["t"] = times[k];
    row["mean"] = detail::matrix_to_json(slices[k].mean);
    row["se_re"] = detail::real_matrix_to_json(slices[k].se_re);
    row["se_im"] = detail::real_matrix_to_json(slices[k].se_im);
    arr.push_back(std::move(row));
  }
  return arr;
}

// One row per time and matrix entry: t,row,col,re,im,se_re,se_im.
inline void write_slices_csv(std::ostream& out,
                             const std::vector<double>& times,
                             const std::vector<EstimateSlice>& slices) {
  out << "t,row,col,re,im,se_re,se_im\n";
  out << std::setprecision(17);
  for (std::size_t k = 0; k < slices.size(); ++k) {
    const auto& s = slices[k];
    for (Eigen::Index i = 0; i < s.mean.rows(); ++i) {
      for (Eigen::Index j = 0; j < s.mean.cols(); ++j) {
        out << times[k] << ',' << i << ',' << j << ',' << s.mean(i, j).real()
            << ',' << s.mean(i, j).imag() << ',' << s.se_re(i, j) << ','
            << s.se_im(i, j) << '\n';
      }
    }
  }
}

}  // namespace unravel
