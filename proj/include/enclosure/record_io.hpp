#pragma once

#include "enclosure/fdtd.hpp"

#include <string>

namespace enclosure {

// Binary layout (host byte order): magic "ENCLREC1", spec, pulse, obstacle description,
// grid scalars, node coordinates and weights, row-major sample matrix, optional reference matrix.
void save_record(const std::string& path, const FieldRecord& record);
FieldRecord load_record(const std::string& path);

// Long-format CSV with columns t,node_id,aE (reference rows are not exported).
void export_record_csv(const std::string& path, const FieldRecord& record);

}  // namespace enclosure
