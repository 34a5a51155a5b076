#include "rdalloc/instance_io.h"

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "rdalloc/errors.h"

namespace rdalloc {

namespace {

using nlohmann::json;

json number(double x) {
  if (std::isnan(x)) return nullptr;
  // 2^53: every integer below this is exactly representable.
  if (std::trunc(x) == x && std::fabs(x) < 9007199254740992.0) {
    return static_cast<std::int64_t>(x);
  }
  return x;
}

double to_double(const json& j, const char* what) {
  if (j.is_null()) return std::numeric_limits<double>::quiet_NaN();
  if (!j.is_number()) {
    throw ParseError(std::string(what) + ": expected a number");
  }
  return j.get<double>();
}

int to_int(const json& rec, const char* key) {
  auto it = rec.find(key);
  if (it == rec.end() || !it->is_number_integer()) {
    throw ParseError(std::string("record field '") + key +
                     "' missing or not an integer");
  }
  return it->get<int>();
}

const json& field(const json& obj, const char* key) {
  auto it = obj.find(key);
  if (it == obj.end()) {
    throw ParseError(std::string("missing field '") + key + "'");
  }
  return *it;
}

const json& at(const json& arr, std::size_t i, const char* what) {
  if (!arr.is_array() || i >= arr.size()) {
    throw ParseError(std::string(what) + ": dense array too short");
  }
  return arr[i];
}

void read_pred(const json& pred, InstanceBuilder& b) {
  const int n = b.unit_count();
  const int nq = b.quantizer_count();
  if (pred.is_array()) {
    for (const json& rec : pred) {
      if (!rec.is_object()) throw ParseError("pred: expected record objects");
      b.set_pred(to_int(rec, "v"), to_int(rec, "v_prev"),
                 to_int(rec, "q_prev_idx"), to_int(rec, "q_idx"),
                 to_double(field(rec, "rate"), "pred.rate"),
                 to_double(field(rec, "dist"), "pred.dist"));
    }
    return;
  }
  if (!pred.is_object()) throw ParseError("pred: expected array or object");
  const json& rate = field(pred, "rate");
  const json& dist = field(pred, "dist");
  for (Unit v = 2; v <= n; ++v) {
    for (Unit vp = 1; vp < v; ++vp) {
      const auto iv = static_cast<std::size_t>(v - 2);
      const auto ip = static_cast<std::size_t>(vp - 1);
      for (QIndex qp = 0; qp < nq; ++qp) {
        for (QIndex q = 0; q < nq; ++q) {
          const auto iqp = static_cast<std::size_t>(qp);
          const auto iq = static_cast<std::size_t>(q);
          const json& r = at(at(at(at(rate, iv, "pred.rate"), ip, "pred.rate"),
                                iqp, "pred.rate"),
                             iq, "pred.rate");
          const json& d = at(at(at(at(dist, iv, "pred.dist"), ip, "pred.dist"),
                                iqp, "pred.dist"),
                             iq, "pred.dist");
          b.set_pred(v, vp, qp, q, to_double(r, "pred.rate"),
                     to_double(d, "pred.dist"));
        }
      }
    }
  }
}

void read_interp(const json& interp, InstanceBuilder& b) {
  const int n = b.unit_count();
  const int nq = b.quantizer_count();
  if (interp.is_array()) {
    for (const json& rec : interp) {
      if (!rec.is_object()) {
        throw ParseError("interp: expected record objects");
      }
      b.set_interp(to_int(rec, "u"), to_int(rec, "v_left"),
                   to_int(rec, "v_right"), to_int(rec, "q_left_idx"),
                   to_int(rec, "q_right_idx"),
                   to_double(field(rec, "dist"), "interp.dist"));
    }
    return;
  }
  if (!interp.is_object()) {
    throw ParseError("interp: expected array or object");
  }
  const json& dist = field(interp, "dist");
  for (Unit left = 1; left <= n; ++left) {
    for (Unit right = left + 2; right <= n; ++right) {
      const json& block =
          at(at(dist, static_cast<std::size_t>(left - 1), "interp.dist"),
             static_cast<std::size_t>(right - left - 2), "interp.dist");
      for (Unit u = left + 1; u < right; ++u) {
        const json& row =
            at(block, static_cast<std::size_t>(u - left - 1), "interp.dist");
        for (QIndex ql = 0; ql < nq; ++ql) {
          for (QIndex qr = 0; qr < nq; ++qr) {
            const json& d =
                at(at(row, static_cast<std::size_t>(ql), "interp.dist"),
                   static_cast<std::size_t>(qr), "interp.dist");
            b.set_interp(u, left, right, ql, qr,
                         to_double(d, "interp.dist"));
          }
        }
      }
    }
  }
}

json to_json(const RdInstance& inst, TableLayout layout) {
  const int n = inst.unit_count();
  const int nq = inst.quantizer_count();
  json doc = json::object();
  doc["unit_count"] = n;
  doc["quantizers"] = inst.quantizers();

  json intra_rate = json::array();
  json intra_dist = json::array();
  for (QIndex q = 0; q < nq; ++q) {
    intra_rate.push_back(number(inst.intra_rate(q)));
    intra_dist.push_back(number(inst.intra_dist(q)));
  }
  doc["intra"] = {{"rate", intra_rate}, {"dist", intra_dist}};

  if (layout == TableLayout::kRecords) {
    json pred = json::array();
    for (Unit v = 2; v <= n; ++v) {
      for (Unit vp = 1; vp < v; ++vp) {
        for (QIndex qp = 0; qp < nq; ++qp) {
          for (QIndex q = 0; q < nq; ++q) {
            const double r = inst.pred_rate(v, vp, qp, q);
            const double d = inst.coded_dist(v, vp, qp, q);
            if (std::isnan(r) && std::isnan(d)) continue;
            pred.push_back({{"v", v},
                            {"v_prev", vp},
                            {"q_prev_idx", qp},
                            {"q_idx", q},
                            {"rate", number(r)},
                            {"dist", number(d)}});
          }
        }
      }
    }
    json interp = json::array();
    for (Unit left = 1; left <= n; ++left) {
      for (Unit right = left + 2; right <= n; ++right) {
        for (Unit u = left + 1; u < right; ++u) {
          for (QIndex ql = 0; ql < nq; ++ql) {
            for (QIndex qr = 0; qr < nq; ++qr) {
              const double d = inst.interp_dist(u, left, right, ql, qr);
              if (std::isnan(d)) continue;
              interp.push_back({{"u", u},
                                {"v_left", left},
                                {"v_right", right},
                                {"q_left_idx", ql},
                                {"q_right_idx", qr},
                                {"dist", number(d)}});
            }
          }
        }
      }
    }
    doc["pred"] = std::move(pred);
    doc["interp"] = std::move(interp);
    return doc;
  }

  json rate = json::array();
  json dist = json::array();
  for (Unit v = 2; v <= n; ++v) {
    json rv = json::array();
    json dv = json::array();
    for (Unit vp = 1; vp < v; ++vp) {
      json rp = json::array();
      json dp = json::array();
      for (QIndex qp = 0; qp < nq; ++qp) {
        json rq = json::array();
        json dq = json::array();
        for (QIndex q = 0; q < nq; ++q) {
          rq.push_back(number(inst.pred_rate(v, vp, qp, q)));
          dq.push_back(number(inst.coded_dist(v, vp, qp, q)));
        }
        rp.push_back(std::move(rq));
        dp.push_back(std::move(dq));
      }
      rv.push_back(std::move(rp));
      dv.push_back(std::move(dp));
    }
    rate.push_back(std::move(rv));
    dist.push_back(std::move(dv));
  }
  doc["pred"] = {{"rate", std::move(rate)}, {"dist", std::move(dist)}};

  json idist = json::array();
  for (Unit left = 1; left <= n; ++left) {
    json by_right = json::array();
    for (Unit right = left + 2; right <= n; ++right) {
      json block = json::array();
      for (Unit u = left + 1; u < right; ++u) {
        json row = json::array();
        for (QIndex ql = 0; ql < nq; ++ql) {
          json cols = json::array();
          for (QIndex qr = 0; qr < nq; ++qr) {
            cols.push_back(number(inst.interp_dist(u, left, right, ql, qr)));
          }
          row.push_back(std::move(cols));
        }
        block.push_back(std::move(row));
      }
      by_right.push_back(std::move(block));
    }
    idist.push_back(std::move(by_right));
  }
  doc["interp"] = {{"dist", std::move(idist)}};
  return doc;
}

}  // namespace

RdInstance parse_instance(std::string_view json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("invalid JSON: ") + e.what());
  }
  if (!doc.is_object()) throw ParseError("instance must be a JSON object");

  try {
    const json& jn = field(doc, "unit_count");
    if (!jn.is_number_integer()) {
      throw ParseError("unit_count must be an integer");
    }
    const json& jq = field(doc, "quantizers");
    if (!jq.is_array()) throw ParseError("quantizers must be an array");
    std::vector<int> quantizers;
    for (const json& q : jq) {
      if (!q.is_number_integer()) {
        throw ParseError("quantizer labels must be integers");
      }
      quantizers.push_back(q.get<int>());
    }

    InstanceBuilder b(jn.get<int>(), std::move(quantizers));
    const int nq = b.quantizer_count();

    const json& intra = field(doc, "intra");
    const json& ir = field(intra, "rate");
    const json& id = field(intra, "dist");
    for (QIndex q = 0; q < nq; ++q) {
      const auto i = static_cast<std::size_t>(q);
      b.set_intra(q, to_double(at(ir, i, "intra.rate"), "intra.rate"),
                  to_double(at(id, i, "intra.dist"), "intra.dist"));
    }
    if (auto it = doc.find("pred"); it != doc.end()) read_pred(*it, b);
    if (auto it = doc.find("interp"); it != doc.end()) read_interp(*it, b);
    return std::move(b).build();
  } catch (const ParseError&) {
    throw;
  } catch (const IndexError& e) {
    throw ParseError(std::string("index out of range: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw ParseError(e.what());
  } catch (const json::exception& e) {
    throw ParseError(e.what());
  }
}

RdInstance load_instance(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_instance(buf.str());
}

std::string dump_instance(const RdInstance& inst, TableLayout layout) {
  const json doc = to_json(inst, layout);
  std::string out = "{\n";
  const char* keys[] = {"unit_count", "quantizers", "intra", "pred", "interp"};
  bool first = true;
  for (const char* key : keys) {
    if (!first) out += ",\n";
    first = false;
    out += " \"";
    out += key;
    out += "\": ";
    const json& value = doc[key];
    if (value.is_array() && !value.empty() && value.front().is_object()) {
      // One record per line.
      out += "[\n";
      for (std::size_t i = 0; i < value.size(); ++i) {
        out += "  " + value[i].dump();
        out += i + 1 < value.size() ? ",\n" : "\n";
      }
      out += " ]";
    } else {
      out += value.dump();
    }
  }
  out += "\n}\n";
  return out;
}

void save_instance(const RdInstance& inst, const std::filesystem::path& path,
                   TableLayout layout) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << dump_instance(inst, layout);
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

std::string instance_digest(const RdInstance& inst) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  auto mix = [&h](const void* data, std::size_t size) {
    const auto* bytes = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < size; ++i) {
      h ^= bytes[i];
      h *= 0x100000001b3ULL;
    }
  };
  auto mix_int = [&mix](std::int64_t x) { mix(&x, sizeof x); };
  auto mix_value = [&mix](double x) {
    // Missing entries hash identically regardless of NaN payload.
    std::uint64_t bits = 0x7ff8000000000000ULL;
    if (!std::isnan(x)) std::memcpy(&bits, &x, sizeof bits);
    mix(&bits, sizeof bits);
  };

  const int n = inst.unit_count();
  const int nq = inst.quantizer_count();
  mix_int(n);
  mix_int(nq);
  for (int q : inst.quantizers()) mix_int(q);
  for (QIndex q = 0; q < nq; ++q) {
    mix_value(inst.intra_rate(q));
    mix_value(inst.intra_dist(q));
  }
  for (Unit v = 2; v <= n; ++v) {
    for (Unit vp = 1; vp < v; ++vp) {
      for (QIndex qp = 0; qp < nq; ++qp) {
        for (QIndex q = 0; q < nq; ++q) {
          mix_value(inst.pred_rate(v, vp, qp, q));
          mix_value(inst.coded_dist(v, vp, qp, q));
        }
      }
    }
  }
  for (Unit left = 1; left <= n; ++left) {
    for (Unit right = left + 2; right <= n; ++right) {
      for (Unit u = left + 1; u < right; ++u) {
        for (QIndex ql = 0; ql < nq; ++ql) {
          for (QIndex qr = 0; qr < nq; ++qr) {
            mix_value(inst.interp_dist(u, left, right, ql, qr));
          }
        }
      }
    }
  }
  char hex[17];
  std::snprintf(hex, sizeof hex, "%016llx", static_cast<unsigned long long>(h));
  return hex;
}

}  // namespace rdalloc
