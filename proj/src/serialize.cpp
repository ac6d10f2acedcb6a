#include "keyclip/serialize.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>

#include <json.hpp>

namespace keyclip {

std::string format_real(double v) {
  if (!std::isfinite(v)) return "null";
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  std::string s(buf, res.ptr);
  if (s.find_first_of(".e") == std::string::npos) s += ".0";
  return s;
}

namespace {

std::string json_quote(std::string_view s) { return nlohmann::json(std::string(s)).dump(); }

std::string fixed6(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6f", v);
  return buf;
}

}  // namespace

std::string plan_to_json(const ClipPlan& plan) {
  const auto& c = plan.config;
  std::string out = "{";
  out += "\"label\":" + json_quote(plan.label);
  out += ",\"config\":{";
  out += "\"k\":" + std::to_string(c.k);
  out += ",\"k_anchor\":" + std::to_string(c.k_anchor);
  out += ",\"s_max\":" + format_real(c.s_max);
  out += ",\"lambda_r\":" + format_real(c.lambda_r);
  out += ",\"lambda_l\":" + format_real(c.lambda_l);
  out += ",\"z\":" + format_real(c.z);
  out += ",\"grid\":" + std::to_string(c.grid);
  out += ",\"seed\":" + std::to_string(c.seed);
  out += std::string(",\"merge\":") + (c.merge ? "true" : "false");
  out += "},\"clips\":[";
  for (std::size_t i = 0; i < plan.clips.size(); ++i) {
    const auto& k = plan.clips[i];
    if (i) out += ",";
    out += "{\"anchor\":" + std::to_string(k.anchor);
    out += ",\"start\":" + std::to_string(k.start);
    out += ",\"end\":" + std::to_string(k.end);
    out += ",\"length\":" + std::to_string(k.length());
    out += ",\"scale\":" + fixed6(k.scale);
    out += ",\"out_width\":" + std::to_string(k.out_width);
    out += ",\"out_height\":" + std::to_string(k.out_height);
    out += ",\"tokens\":" + std::to_string(k.tokens) + "}";
  }
  out += "],\"total_tokens\":" + std::to_string(plan.total_tokens);
  out += ",\"budget_tokens\":" + std::to_string(plan.budget_tokens);
  out += "}\n";
  return out;
}

ClipPlan plan_from_json(std::string_view text) {
  try {
    const auto j = nlohmann::json::parse(text);
    ClipPlan p;
    p.label = j.value("label", std::string());
    const auto& c = j.at("config");
    p.config.k = c.at("k").get<std::uint32_t>();
    p.config.k_anchor = c.at("k_anchor").get<std::uint32_t>();
    p.config.s_max = c.at("s_max").get<double>();
    p.config.lambda_r = c.at("lambda_r").get<double>();
    p.config.lambda_l = c.at("lambda_l").get<double>();
    p.config.z = c.at("z").get<double>();
    p.config.grid = c.at("grid").get<std::uint32_t>();
    p.config.seed = c.at("seed").get<std::uint64_t>();
    p.config.merge = c.at("merge").get<bool>();
    for (const auto& k : j.at("clips")) {
      KeyClip clip;
      clip.anchor = k.at("anchor").get<std::size_t>();
      clip.start = k.at("start").get<std::size_t>();
      clip.end = k.at("end").get<std::size_t>();
      clip.scale = k.at("scale").get<double>();
      clip.out_width = k.at("out_width").get<std::uint32_t>();
      clip.out_height = k.at("out_height").get<std::uint32_t>();
      clip.tokens = k.at("tokens").get<std::uint64_t>();
      if (clip.end < clip.start || k.at("length").get<std::size_t>() != clip.length()) {
        throw Error(ErrorCode::kMalformed, "clip span and length disagree");
      }
      p.clips.push_back(clip);
    }
    p.total_tokens = j.at("total_tokens").get<std::uint64_t>();
    p.budget_tokens = j.at("budget_tokens").get<std::uint64_t>();
    return p;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kMalformed, std::string("plan JSON: ") + e.what());
  }
}

std::string selection_to_json(std::string_view method, const FrameSelection& selection) {
  std::string out = "{\"method\":" + json_quote(method) + ",\"indices\":[";
  for (std::size_t i = 0; i < selection.size(); ++i) {
    if (i) out += ",";
    out += std::to_string(selection.indices[i]);
  }
  out += "]}\n";
  return out;
}

FrameSelection selection_from_json(std::string_view text, std::string* method) {
  try {
    const auto j = nlohmann::json::parse(text);
    FrameSelection sel;
    sel.indices = j.at("indices").get<std::vector<std::size_t>>();
    for (std::size_t i = 1; i < sel.size(); ++i) {
      if (sel.indices[i] <= sel.indices[i - 1]) {
        throw Error(ErrorCode::kMalformed, "selection indices must be strictly increasing");
      }
    }
    if (method) *method = j.value("method", std::string());
    return sel;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kMalformed, std::string("selection JSON: ") + e.what());
  }
}

}  // namespace keyclip
