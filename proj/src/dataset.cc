// Copyright 2026 The Watson Perceptual Loss Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//    http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>

#include "watson/errors.h"
#include "watson/png_io.h"
#include "watson/twoafc.h"

namespace watson {
namespace {

namespace fs = std::filesystem;

std::string Trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return "";
  const auto last = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(first, last - first + 1));
}

std::vector<std::string> SplitCommas(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string field;
  while (std::getline(ss, field, ',')) out.push_back(Trim(field));
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

double ParseJudgement(const std::string& text, const std::string& where) {
  const std::string t = Trim(text);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (ec != std::errc() || ptr != t.data() + t.size() || t.empty()) {
    throw DataError(where + ": judgement '" + t + "' is not a number");
  }
  if (!(v >= 0.0 && v <= 1.0)) {
    throw DataError(where + ": judgement " + t + " outside [0, 1]");
  }
  return v;
}

std::string ReadSmallFile(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void CheckRecord(const TwoAfcRecord& r, const std::string& where) {
  if (!SameShape(r.reference, r.first) || !SameShape(r.reference, r.second) ||
      r.reference.space() != r.first.space() ||
      r.reference.space() != r.second.space()) {
    throw DataError(where + ": images differ in size or colorspace (" +
                    r.reference.ShapeString() + ", " + r.first.ShapeString() +
                    ", " + r.second.ShapeString() + ")");
  }
}

// Runs `build` and either appends the record or handles the failure per
// the load options.
template <typename Build>
void AddRecord(std::vector<TwoAfcRecord>& out, const LoadOptions& options,
               std::vector<std::string>* warnings, Build build) {
  try {
    out.push_back(build());
  } catch (const DataError& e) {
    if (!options.skip_invalid) throw;
    if (warnings) warnings->push_back(e.what());
  }
}

std::vector<TwoAfcRecord> LoadCsv(const fs::path& manifest,
                                  const LoadOptions& options,
                                  std::vector<std::string>* warnings) {
  std::ifstream in(manifest);
  if (!in) throw DataError("cannot open manifest " + manifest.string());
  const fs::path base = manifest.parent_path();
  std::vector<TwoAfcRecord> out;
  std::string line;
  if (!std::getline(in, line)) return out;
  const auto header = SplitCommas(Trim(line));
  const bool tagged = header.size() == 6;
  const std::vector<std::string> want = {"ref", "p0", "p1", "judge",
                                         "family0", "family1"};
  if ((header.size() != 4 && !tagged) ||
      !std::equal(header.begin(), header.end(), want.begin())) {
    throw DataError(manifest.string() +
                    ": header must be ref,p0,p1,judge[,family0,family1]");
  }
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (Trim(line).empty()) continue;
    const std::string where = manifest.string() + ":" + std::to_string(line_no);
    AddRecord(out, options, warnings, [&] {
      const auto f = SplitCommas(Trim(line));
      if (f.size() != header.size()) {
        throw DataError(where + ": expected " + std::to_string(header.size()) +
                        " fields, got " + std::to_string(f.size()));
      }
      TwoAfcRecord r;
      r.id = fs::path(f[0]).stem().string();
      r.p = ParseJudgement(f[3], where);
      r.reference = ReadPng(base / f[0]);
      r.first = ReadPng(base / f[1]);
      r.second = ReadPng(base / f[2]);
      if (tagged) {
        r.family0 = f[4];
        r.family1 = f[5];
      }
      CheckRecord(r, where);
      return r;
    });
  }
  return out;
}

std::vector<TwoAfcRecord> LoadBapps(const fs::path& dir,
                                    const LoadOptions& options,
                                    std::vector<std::string>* warnings) {
  for (const char* sub : {"ref", "p0", "p1", "judge"}) {
    if (!fs::is_directory(dir / sub)) {
      throw DataError(dir.string() + ": missing '" + sub + "' directory");
    }
  }
  std::vector<std::string> ids;
  for (const auto& entry : fs::directory_iterator(dir / "ref")) {
    if (entry.path().extension() == ".png") {
      ids.push_back(entry.path().stem().string());
    }
  }
  std::sort(ids.begin(), ids.end());
  std::vector<TwoAfcRecord> out;
  for (const auto& id : ids) {
    const std::string where = (dir / "ref" / (id + ".png")).string();
    AddRecord(out, options, warnings, [&] {
      TwoAfcRecord r;
      r.id = id;
      const fs::path judge = dir / "judge" / (id + ".csv");
      r.p = ParseJudgement(ReadSmallFile(judge), judge.string());
      r.reference = ReadPng(dir / "ref" / (id + ".png"));
      r.first = ReadPng(dir / "p0" / (id + ".png"));
      r.second = ReadPng(dir / "p1" / (id + ".png"));
      const fs::path family = dir / "family" / (id + ".csv");
      if (fs::exists(family)) {
        const auto f = SplitCommas(Trim(ReadSmallFile(family)));
        if (f.size() != 2) throw DataError(family.string() + ": expected a,b");
        r.family0 = f[0];
        r.family1 = f[1];
      }
      CheckRecord(r, where);
      return r;
    });
  }
  return out;
}

}  // namespace

std::vector<TwoAfcRecord> LoadDataset(const std::filesystem::path& path,
                                      const LoadOptions& options,
                                      std::vector<std::string>* warnings) {
  if (fs::is_directory(path)) return LoadBapps(path, options, warnings);
  if (!fs::exists(path)) throw DataError("dataset not found: " + path.string());
  return LoadCsv(path, options, warnings);
}

}  // namespace watson
