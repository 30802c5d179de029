#include "minkflow/io.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "minkflow/error.hpp"

namespace minkflow {

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::io, "cannot open '" + path + "' for writing");
  out << text;
  if (!out) throw Error(ErrorCode::io, "write to '" + path + "' failed");
}

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::io, "cannot read '" + path + "'");
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

std::string body_to_string(const SupportField& body, const std::string& provenance) {
  const SphereGrid& g = *body.grid;
  nlohmann::ordered_json h;
  h["format"] = "minkflow-body";
  h["n"] = g.dim();
  h["n_theta"] = g.n_theta();
  h["n_phi"] = g.dim() == 2 ? g.n_phi() : 0;
  h["symmetric"] = body.symmetric;
  h["provenance"] = provenance;
  std::string out = h.dump() + "\n";
  out.reserve(out.size() + body.size() * 25);
  for (double v : body.u) {
    out += fmt17(v);
    out += '\n';
  }
  return out;
}

SupportField body_from_string(const std::string& text, std::string* provenance) {
  const std::size_t eol = text.find('\n');
  if (eol == std::string::npos) throw Error(ErrorCode::io, "body file has no header line");
  nlohmann::json h;
  try {
    h = nlohmann::json::parse(text.substr(0, eol));
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::io, std::string("body header is not JSON: ") + e.what());
  }
  if (!h.is_object() || h.value("format", "") != "minkflow-body") {
    throw Error(ErrorCode::io, "body header lacks \"format\":\"minkflow-body\"");
  }
  SupportField body;
  try {
    body.grid = SphereGrid::build(h.at("n").get<int>(), h.at("n_theta").get<int>(), h.at("n_phi").get<int>());
    body.symmetric = h.at("symmetric").get<bool>();
    if (provenance) *provenance = h.value("provenance", "");
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::io, std::string("bad body header: ") + e.what());
  }
  body.u.reserve(body.grid->size());
  const char* p = text.data() + eol + 1;
  const char* end = text.data() + text.size();
  while (p < end) {
    while (p < end && (*p == '\n' || *p == '\r' || *p == ' ' || *p == '\t')) ++p;
    if (p >= end) break;
    double v = 0.0;
    const auto [next, ec] = std::from_chars(p, end, v);
    if (ec != std::errc()) {
      throw Error(ErrorCode::io, "bad sample at line " + std::to_string(body.u.size() + 2) + " of body file");
    }
    body.u.push_back(v);
    p = next;
  }
  if (body.u.size() != body.grid->size()) {
    throw Error(ErrorCode::size_mismatch, "body file holds " + std::to_string(body.u.size()) + " samples, grid has " +
                                              std::to_string(body.grid->size()));
  }
  return body;
}

void write_body(const SupportField& body, const std::string& path, const std::string& provenance) {
  write_text(path, body_to_string(body, provenance));
}

SupportField read_body(const std::string& path, std::string* provenance) {
  return body_from_string(read_text(path), provenance);
}

void write_trajectory_csv(const Trajectory& tr, const std::string& path) {
  std::string out = "t,dt,eta,J,Z0,residual,lambda_min,u_min,u_max\n";
  for (const TrajectoryRow& r : tr.rows) {
    for (double v : {r.t, r.dt, r.eta, r.J, r.Z0, r.residual, r.lambda_min, r.u_min}) {
      out += fmt17(v);
      out += ',';
    }
    out += fmt17(r.u_max);
    out += '\n';
  }
  write_text(path, out);
}

void export_obj(const SupportField& body, const std::string& path) {
  const SphereGrid& g = *body.grid;
  if (g.dim() != 2) throw Error(ErrorCode::invalid_dimension, "mesh export needs n = 2");
  const std::vector<Vec3> X = embedding(body);
  std::string out = "# minkflow boundary mesh\n";
  for (const Vec3& x : X) out += "v " + fmt17(x[0]) + " " + fmt17(x[1]) + " " + fmt17(x[2]) + "\n";
  const int nt = g.n_theta(), np = g.n_phi();
  auto id = [&](int j, int k) { return std::to_string(g.index(j, (k + np) % np) + 1); };
  for (int j = 0; j + 1 < nt; ++j) {
    for (int k = 0; k < np; ++k) {
      out += "f " + id(j, k) + " " + id(j + 1, k) + " " + id(j + 1, k + 1) + "\n";
      out += "f " + id(j, k) + " " + id(j + 1, k + 1) + " " + id(j, k + 1) + "\n";
    }
  }
  // caps: outward orientation, fanned from k = 0
  for (int k = 1; k + 1 < np; ++k) {
    out += "f " + id(0, 0) + " " + id(0, k) + " " + id(0, k + 1) + "\n";
    out += "f " + id(nt - 1, 0) + " " + id(nt - 1, k + 1) + " " + id(nt - 1, k) + "\n";
  }
  write_text(path, out);
}

}  // namespace minkflow
