#pragma once

#include <string>

#include "minkflow/flow.hpp"

namespace minkflow {

/**
 * Body file: one JSON header line
 *   {"format":"minkflow-body","n":2,"n_theta":32,"n_phi":64,"symmetric":true,"provenance":"..."}
 * followed by one sample per line in row-major node order, printed with 17 significant digits
 * so that reading the file back reproduces every double exactly.
 */
std::string body_to_string(const SupportField& body, const std::string& provenance);
SupportField body_from_string(const std::string& text, std::string* provenance = nullptr);

void write_body(const SupportField& body, const std::string& path, const std::string& provenance);
/// Throws Error(io) for unreadable or malformed files.
SupportField read_body(const std::string& path, std::string* provenance = nullptr);

/// Header: t,dt,eta,J,Z0,residual,lambda_min,u_min,u_max
void write_trajectory_csv(const Trajectory& tr, const std::string& path);

/// Triangulated OBJ of the embedded boundary X = u x + grad u; one vertex per node, quads split
/// along the structured grid with longitude wrap, polar caps fanned from the first node of the
/// extreme rows. Throws Error(invalid_dimension) for n != 2.
void export_obj(const SupportField& body, const std::string& path);

/// Writes `text` to `path`, throwing Error(io) on failure.
void write_text(const std::string& path, const std::string& text);
std::string read_text(const std::string& path);

/// printf-style "%.17g".
std::string fmt17(double v);

}  // namespace minkflow
