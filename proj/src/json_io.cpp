#include "maxprob/json_io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include "maxprob/error.hpp"

namespace maxprob {

namespace {

void write(const Json& j, std::string& out) {
  switch (j.type()) {
    case Json::value_t::null:
      out += "null";
      break;
    case Json::value_t::boolean:
      out += j.get<bool>() ? "true" : "false";
      break;
    case Json::value_t::number_integer:
      out += std::to_string(j.get<std::int64_t>());
      break;
    case Json::value_t::number_unsigned:
      out += std::to_string(j.get<std::uint64_t>());
      break;
    case Json::value_t::number_float: {
      const double x = j.get<double>();
      out += std::isfinite(x) ? format_real(x) : "null";
      break;
    }
    case Json::value_t::string:
      out += Json(j.get<std::string>()).dump();
      break;
    case Json::value_t::array: {
      out += '[';
      bool first = true;
      for (const auto& e : j) {
        if (!first) out += ", ";
        first = false;
        write(e, out);
      }
      out += ']';
      break;
    }
    case Json::value_t::object: {
      out += '{';
      bool first = true;
      for (auto it = j.begin(); it != j.end(); ++it) {
        if (!first) out += ", ";
        first = false;
        out += Json(it.key()).dump();
        out += ": ";
        write(it.value(), out);
      }
      out += '}';
      break;
    }
    default:
      throw Error(ErrorCode::InvalidArgument, "unsupported JSON value type");
  }
}

std::string label_string(const Json& j) {
  if (j.is_string()) return j.get<std::string>();
  if (j.is_number_integer() || j.is_number_unsigned()) return j.dump();
  throw Error(ErrorCode::ParseError, "outcome labels must be strings or integers");
}

const Json& field(const Json& j, const char* key) {
  if (!j.is_object() || !j.contains(key))
    throw Error(ErrorCode::ParseError, std::string("missing field '") + key + "'");
  return j.at(key);
}

std::vector<double> real_array(const Json& j, const char* what) {
  if (!j.is_array()) throw Error(ErrorCode::ParseError, std::string(what) + " must be an array");
  std::vector<double> out;
  out.reserve(j.size());
  for (const auto& e : j) {
    if (!e.is_number()) throw Error(ErrorCode::ParseError, std::string(what) + " must hold numbers");
    out.push_back(e.get<double>());
  }
  return out;
}

}  // namespace

std::string format_real(double x) {
  if (x == 0.0) return "0";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string dump_json(const Json& j) {
  std::string out;
  write(j, out);
  return out;
}

Json to_json(const OutcomeRange& range) {
  Json arr = Json::array();
  for (const auto& l : range.labels()) arr.push_back(l);
  return arr;
}

Json to_json(const FiniteDistribution& dist) {
  Json probs = Json::array();
  for (double p : dist.probs()) probs.push_back(p);
  return Json{{"range", to_json(dist.range())}, {"probs", probs}};
}

Json to_json(const Refinement& r) {
  Json proj = Json::array();
  for (std::size_t c : r.projection()) proj.push_back(c);
  return Json{{"fine", to_json(r.fine_range())},
              {"coarse", to_json(r.coarse_range())},
              {"projection", proj}};
}

Json to_json(const Parameterization& p) {
  return Json{{"kind", p.kind() == ParamKind::SigmoidBernoulli ? "sigmoid-bernoulli"
                                                               : "softmax-logits"},
              {"range", to_json(p.range())}};
}

Json to_json(const EventModel& m) {
  Json j{{"conditional", to_json(m.conditional())}};
  if (m.params()) {
    Json params = Json::array();
    for (double t : *m.params()) params.push_back(t);
    j["params"] = params;
    j["parameterization"] = to_json(*m.parameterization());
  }
  return j;
}

OutcomeRange range_from_json(const Json& j) {
  if (!j.is_array()) throw Error(ErrorCode::ParseError, "range must be an array of labels");
  std::vector<std::string> labels;
  for (const auto& e : j) labels.push_back(label_string(e));
  return OutcomeRange(std::move(labels));
}

FiniteDistribution distribution_from_json(const Json& j) {
  OutcomeRange range = range_from_json(field(j, "range"));
  const std::vector<double> probs = real_array(field(j, "probs"), "probs");
  return make_distribution(std::move(range), probs);
}

Refinement refinement_from_json(const Json& j) {
  OutcomeRange fine = range_from_json(field(j, "fine"));
  OutcomeRange coarse = range_from_json(field(j, "coarse"));
  const Json& pj = field(j, "projection");
  if (!pj.is_array()) throw Error(ErrorCode::ParseError, "projection must be an array");
  std::vector<std::size_t> proj;
  for (const auto& e : pj) {
    if (e.is_number_unsigned() || (e.is_number_integer() && e.get<std::int64_t>() >= 0)) {
      proj.push_back(e.get<std::size_t>());
    } else if (e.is_string()) {
      auto idx = coarse.index_of(e.get<std::string>());
      if (!idx) throw Error(ErrorCode::LabelOutOfRange, "unknown coarse label in projection");
      proj.push_back(*idx);
    } else {
      throw Error(ErrorCode::ParseError, "projection entries must be indices or coarse labels");
    }
  }
  return Refinement(std::move(fine), std::move(coarse), std::move(proj));
}

Parameterization parameterization_from_json(const Json& j) {
  const Json& kind = field(j, "kind");
  OutcomeRange range = range_from_json(field(j, "range"));
  if (kind == "sigmoid-bernoulli") return Parameterization::sigmoid_bernoulli(std::move(range));
  if (kind == "softmax-logits") return Parameterization::softmax_logits(std::move(range));
  throw Error(ErrorCode::ParseError, "unknown parameterization kind");
}

EventModel event_model_from_json(const Json& j) {
  if (j.contains("params")) {
    return EventModel(parameterization_from_json(field(j, "parameterization")),
                      real_array(j.at("params"), "params"));
  }
  return EventModel(distribution_from_json(field(j, "conditional")));
}

Json read_json_file(const std::string& path) {
  std::string text;
  if (path == "-") {
    std::ostringstream ss;
    ss << std::cin.rdbuf();
    text = ss.str();
  } else {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::FileNotFound, "cannot open '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    text = ss.str();
  }
  try {
    return Json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorCode::ParseError, path + ": " + e.what());
  }
}

}  // namespace maxprob
