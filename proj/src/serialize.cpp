#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include <json.hpp>

#include "prdl/scenario.hpp"

namespace prdl {

namespace {

using nlohmann::json;

json encode(const CMatrix& M) {
  json data = json::array();
  for (Index r = 0; r < M.rows(); ++r) {
    for (Index c = 0; c < M.cols(); ++c) {
      data.push_back(M(r, c).real());
      data.push_back(M(r, c).imag());
    }
  }
  return {{"rows", M.rows()}, {"cols", M.cols()}, {"complex", true}, {"data", std::move(data)}};
}

json encode(const RMatrix& M) {
  json data = json::array();
  for (Index r = 0; r < M.rows(); ++r) {
    for (Index c = 0; c < M.cols(); ++c) {
      data.push_back(M(r, c));
    }
  }
  return {{"rows", M.rows()}, {"cols", M.cols()}, {"complex", false}, {"data", std::move(data)}};
}

CMatrix decode_complex(const json& j) {
  const Index rows = j.at("rows").get<Index>();
  const Index cols = j.at("cols").get<Index>();
  const auto& data = j.at("data");
  if (!j.value("complex", false) || data.size() != static_cast<size_t>(2 * rows * cols)) {
    throw ParameterError("malformed complex matrix in scenario file");
  }
  CMatrix M(rows, cols);
  size_t k = 0;
  for (Index r = 0; r < rows; ++r) {
    for (Index c = 0; c < cols; ++c, k += 2) {
      M(r, c) = Complex(data[k].get<double>(), data[k + 1].get<double>());
    }
  }
  return M;
}

RMatrix decode_real(const json& j) {
  const Index rows = j.at("rows").get<Index>();
  const Index cols = j.at("cols").get<Index>();
  const auto& data = j.at("data");
  if (j.value("complex", true) || data.size() != static_cast<size_t>(rows * cols)) {
    throw ParameterError("malformed real matrix in scenario file");
  }
  RMatrix M(rows, cols);
  size_t k = 0;
  for (Index r = 0; r < rows; ++r) {
    for (Index c = 0; c < cols; ++c) {
      M(r, c) = data[k++].get<double>();
    }
  }
  return M;
}

json encode_operator(const MixingOperator& op) {
  json j;
  j["case"] = to_string(op.mixing_case());
  json comps = json::array();
  switch (op.mixing_case()) {
    case MixingCase::TimeInvariant:
      if (op.temporal_is_identity()) {
        comps.push_back({{"A", encode(op.spatial(0))}, {"B_identity", op.snapshots()}});
      } else {
        comps.push_back({{"A", encode(op.spatial(0))}, {"B", encode(op.temporal(0))}});
      }
      break;
    case MixingCase::SnapshotSelectors:
      for (Index k = 0; k < op.diversity(); ++k) {
        comps.push_back({{"A", encode(op.spatial(k))}});
      }
      break;
    case MixingCase::General:
      for (Index k = 0; k < op.diversity(); ++k) {
        comps.push_back({{"A", encode(op.spatial(k))}, {"B", encode(op.temporal(k))}});
      }
      break;
  }
  j["components"] = std::move(comps);
  return j;
}

MixingOperator decode_operator(const json& j) {
  const std::string tag = j.at("case").get<std::string>();
  const auto& comps = j.at("components");
  if (tag == to_string(MixingCase::TimeInvariant)) {
    const auto& c = comps.at(0);
    CMatrix A = decode_complex(c.at("A"));
    CMatrix B = c.contains("B_identity")
                    ? CMatrix(CMatrix::Identity(c["B_identity"].get<Index>(),
                                                c["B_identity"].get<Index>()))
                    : decode_complex(c.at("B"));
    return MixingOperator::time_invariant(std::move(A), std::move(B));
  }
  if (tag == to_string(MixingCase::SnapshotSelectors)) {
    std::vector<CMatrix> A;
    for (const auto& c : comps) {
      A.push_back(decode_complex(c.at("A")));
    }
    return MixingOperator::snapshot_selectors(std::move(A));
  }
  if (tag == to_string(MixingCase::General)) {
    std::vector<MixingComponent> parts;
    for (const auto& c : comps) {
      parts.push_back({decode_complex(c.at("A")), decode_complex(c.at("B"))});
    }
    return MixingOperator::general(std::move(parts));
  }
  throw ParameterError("unknown operator case '" + tag + "'");
}

}  // namespace

std::string scenario_to_json(const Scenario& s) {
  const ScenarioParams& p = s.params;
  json j;
  j["format"] = "prdl-scenario";
  j["version"] = 1;
  j["params"] = {{"case", p.mixing_case},
                 {"N", p.N},
                 {"P", p.P},
                 {"I", p.I},
                 {"M1", p.M1},
                 {"L", p.L},
                 {"snr_db", std::isfinite(p.snr_db) ? json(p.snr_db) : json("inf")},
                 {"seed", p.seed},
                 {"normalize_dictionary", p.normalize_dictionary}};
  j["operator"] = encode_operator(s.inst.op());
  j["Y"] = encode(s.inst.measurements());
  j["D_true"] = encode(s.D_true);
  j["Z_true"] = encode(s.Z_true);
  j["X_true"] = encode(s.X_true);
  j["noise"] = encode(s.noise);
  return j.dump();
}

Scenario scenario_from_json(const std::string& text) {
  const json j = json::parse(text);
  if (j.value("format", "") != "prdl-scenario") {
    throw ParameterError("not a scenario file");
  }
  const auto& jp = j.at("params");
  ScenarioParams p;
  p.mixing_case = jp.at("case").get<int>();
  p.N = jp.at("N").get<Index>();
  p.P = jp.at("P").get<Index>();
  p.I = jp.at("I").get<Index>();
  p.M1 = jp.at("M1").get<Index>();
  p.L = jp.at("L").get<Index>();
  p.snr_db = jp.at("snr_db").is_string() ? std::numeric_limits<double>::infinity()
                                         : jp.at("snr_db").get<double>();
  p.seed = jp.at("seed").get<std::uint64_t>();
  p.normalize_dictionary = jp.value("normalize_dictionary", false);
  auto op = std::make_shared<MixingOperator>(decode_operator(j.at("operator")));
  ProblemInstance inst(decode_real(j.at("Y")), std::move(op), p.P);
  return Scenario{p, std::move(inst), decode_complex(j.at("D_true")),
                  decode_complex(j.at("Z_true")), decode_complex(j.at("X_true")),
                  decode_real(j.at("noise"))};
}

void save_scenario(const Scenario& s, const std::string& path) {
  std::ofstream out(path);
  if (!out) {
    throw std::runtime_error("cannot open '" + path + "' for writing");
  }
  out << scenario_to_json(s);
  if (!out) {
    throw std::runtime_error("write failed for '" + path + "'");
  }
}

Scenario load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error("cannot open '" + path + "'");
  }
  std::stringstream ss;
  ss << in.rdbuf();
  return scenario_from_json(ss.str());
}

}  // namespace prdl
