#ifndef ODEC_MODEL_IO_HPP
#define ODEC_MODEL_IO_HPP

#include <map>
#include <string>

#include "odec/layers.hpp"

namespace odec {

// Model file: one JSON document, schema "odec-model/1". Tensors are named
// row-major arrays with an explicit shape; field order is canonical. DEIM
// point lists are stored 0-based.
std::string encode_model(const ModelSpec& model);
ModelSpec decode_model(const std::string& json_text);

void save_model(const ModelSpec& model, const std::string& path);
ModelSpec load_model(const std::string& path);

// Run-configuration file: {"run": {<flag>: <value>}} in the same document
// family; values normalize to strings.
std::map<std::string, std::string> load_run_config(const std::string& path);

}  // namespace odec

#endif
