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

#include "rnsx/checkpoint.h"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <unordered_map>

#include "rnsx/error.h"

namespace rnsx {
namespace {

static_assert(std::endian::native == std::endian::little ||
                  std::endian::native == std::endian::big,
              "mixed-endian platforms are not supported");

template <typename T>
void PutLe(std::ostream& os, T v) {
  unsigned char buf[sizeof(T)];
  std::memcpy(buf, &v, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) {
    for (std::size_t i = 0; i < sizeof(T) / 2; ++i) std::swap(buf[i], buf[sizeof(T) - 1 - i]);
  }
  os.write(reinterpret_cast<const char*>(buf), sizeof(T));
}

template <typename T>
bool GetLe(std::istream& is, T* v) {
  unsigned char buf[sizeof(T)];
  if (!is.read(reinterpret_cast<char*>(buf), sizeof(T))) return false;
  if constexpr (std::endian::native == std::endian::big) {
    for (std::size_t i = 0; i < sizeof(T) / 2; ++i) std::swap(buf[i], buf[sizeof(T) - 1 - i]);
  }
  std::memcpy(v, buf, sizeof(T));
  return true;
}

[[noreturn]] void Truncated(const std::string& path) {
  Fail(ErrorKind::kFormat, "truncated checkpoint " + path);
}

}  // namespace

void WriteTensors(const std::string& path, const std::vector<NamedTensor>& tensors) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) Fail(ErrorKind::kIo, "cannot write " + path);
  os.write(kCheckpointMagic, 5);
  for (const auto& [name, t] : tensors) {
    PutLe<std::uint64_t>(os, name.size());
    os.write(name.data(), static_cast<std::streamsize>(name.size()));
    PutLe<std::uint64_t>(os, t.rank());
    for (auto e : t.shape()) PutLe<std::uint64_t>(os, e);
    for (double v : t.data()) PutLe<double>(os, v);
  }
  if (!os) Fail(ErrorKind::kIo, "write failed for " + path);
}

std::vector<NamedTensor> ReadTensors(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) Fail(ErrorKind::kIo, "cannot open " + path);
  char magic[5];
  if (!is.read(magic, 5) || std::memcmp(magic, kCheckpointMagic, 5) != 0) {
    Fail(ErrorKind::kFormat, path + " is not an RNSX1 checkpoint");
  }
  std::vector<NamedTensor> out;
  while (true) {
    std::uint64_t len;
    if (!GetLe(is, &len)) break;
    if (len > (1u << 20)) Fail(ErrorKind::kFormat, "implausible name length in " + path);
    std::string name(len, '\0');
    if (!is.read(name.data(), static_cast<std::streamsize>(len))) Truncated(path);
    std::uint64_t rank;
    if (!GetLe(is, &rank)) Truncated(path);
    if (rank > 8) Fail(ErrorKind::kFormat, "implausible rank in " + path);
    Shape shape(rank);
    for (auto& e : shape) {
      std::uint64_t v;
      if (!GetLe(is, &v)) Truncated(path);
      e = v;
    }
    std::vector<double> data(ShapeSize(shape));
    for (auto& v : data)
      if (!GetLe(is, &v)) Truncated(path);
    out.emplace_back(std::move(name), Tensor(std::move(shape), std::move(data)));
  }
  return out;
}

void SaveParameters(const std::string& path, const ParameterStore& store) {
  std::vector<NamedTensor> tensors;
  for (const auto& p : store.all()) tensors.emplace_back(p->name, p->value);
  WriteTensors(path, tensors);
}

void LoadParameters(const std::string& path, ParameterStore& store) {
  std::unordered_map<std::string, Tensor> loaded;
  for (auto& [name, t] : ReadTensors(path)) loaded.emplace(std::move(name), std::move(t));
  for (const auto& p : store.all()) {
    auto it = loaded.find(p->name);
    if (it == loaded.end()) Fail(ErrorKind::kFormat, "checkpoint lacks parameter " + p->name);
    if (it->second.shape() != p->value.shape()) {
      Fail(ErrorKind::kFormat, "parameter " + p->name + " has shape " +
                                   ShapeString(it->second.shape()) + ", expected " +
                                   ShapeString(p->value.shape()));
    }
    p->value = it->second;
  }
}

}  // namespace rnsx
