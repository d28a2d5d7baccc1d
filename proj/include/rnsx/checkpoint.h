/* Copyright 2026 The rnsx Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#ifndef RNSX_CHECKPOINT_H_
#define RNSX_CHECKPOINT_H_

#include <string>
#include <utility>
#include <vector>

#include "rnsx/autodiff.h"

namespace rnsx {

// Flat binary parameter container:
//   "RNSX1"
//   repeated until EOF:
//     u64 name length, name bytes, u64 rank, rank x u64 extents,
//     prod(extents) x f64 values
// All integers and floats little-endian.
inline constexpr char kCheckpointMagic[] = "RNSX1";

using NamedTensor = std::pair<std::string, Tensor>;

void WriteTensors(const std::string& path, const std::vector<NamedTensor>& tensors);
std::vector<NamedTensor> ReadTensors(const std::string& path);

void SaveParameters(const std::string& path, const ParameterStore& store);
// Every parameter in `store` must be present in the file with the same shape.
void LoadParameters(const std::string& path, ParameterStore& store);

}  // namespace rnsx

#endif  // RNSX_CHECKPOINT_H_
