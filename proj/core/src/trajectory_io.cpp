// Copyright 2026 The ddopt Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "ddopt/trajectory_io.hpp"

#include <fstream>
#include <sstream>

#include "ddopt/error.hpp"
#include "json.hpp"

namespace ddopt {

using nlohmann::json;

std::string TrajectoryToJson(const MsTrajectory& traj, int indent) {
  json j;
  const int m = traj.segments();
  j["h"] = kEffortOrder;
  j["M"] = m;
  j["durations"] = std::vector<double>(traj.durations().data(),
                                       traj.durations().data() + m);
  json coeffs = json::array();
  for (int i = 0; i < m; ++i) {
    json seg = json::array();
    for (int ch = 0; ch < 2; ++ch) {
      std::vector<double> c(kSegmentCoeffs);
      for (int p = 0; p < kSegmentCoeffs; ++p) {
        c[p] = traj.coeffs()(kSegmentCoeffs * i + p, ch);
      }
      seg.push_back(c);
    }
    coeffs.push_back(seg);
  }
  j["coeffs"] = coeffs;
  const Pose& sp = traj.start_pose();
  j["start_pose"] = {sp.x(), sp.y(), sp.z()};
  j["icr"] = {{"y_il", traj.icr().y_il},
              {"y_ir", traj.icr().y_ir},
              {"x_iv", traj.icr().x_iv}};
  return j.dump(indent);
}

MsTrajectory TrajectoryFromJson(const std::string& text) {
  try {
    const json j = json::parse(text);
    if (j.at("h").get<int>() != kEffortOrder) {
      throw Error(ErrorCode::kParseError, "only h = 3 trajectories are supported");
    }
    const int m = j.at("M").get<int>();
    const auto durations = j.at("durations").get<std::vector<double>>();
    const json& coeffs = j.at("coeffs");
    if (m < 1 || static_cast<int>(durations.size()) != m ||
        static_cast<int>(coeffs.size()) != m) {
      throw Error(ErrorCode::kParseError, "segment count mismatch");
    }
    Eigen::MatrixX2d c(kSegmentCoeffs * m, 2);
    for (int i = 0; i < m; ++i) {
      if (coeffs[i].size() != 2) {
        throw Error(ErrorCode::kParseError,
                    "coeffs[" + std::to_string(i) + "] must hold 2 channels");
      }
      for (int ch = 0; ch < 2; ++ch) {
        const auto v = coeffs[i][ch].get<std::vector<double>>();
        if (static_cast<int>(v.size()) != kSegmentCoeffs) {
          throw Error(ErrorCode::kParseError,
                      "coeffs[" + std::to_string(i) + "][" + std::to_string(ch) +
                          "] must hold 6 values");
        }
        for (int p = 0; p < kSegmentCoeffs; ++p) c(kSegmentCoeffs * i + p, ch) = v[p];
      }
    }
    const auto sp = j.at("start_pose").get<std::vector<double>>();
    if (sp.size() != 3) throw Error(ErrorCode::kParseError, "start_pose needs 3 values");
    IcrParams icr;
    icr.y_il = j.at("icr").at("y_il").get<double>();
    icr.y_ir = j.at("icr").at("y_ir").get<double>();
    icr.x_iv = j.at("icr").at("x_iv").get<double>();
    Eigen::VectorXd d = Eigen::Map<const Eigen::VectorXd>(durations.data(), m);
    return MsTrajectory(c, d, Pose(sp[0], sp[1], sp[2]), icr);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kParseError, std::string("trajectory JSON: ") + e.what());
  }
}

void SaveTrajectory(const MsTrajectory& traj, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::kIoError, "cannot write " + path);
  out << TrajectoryToJson(traj) << '\n';
}

MsTrajectory LoadTrajectory(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIoError, "cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return TrajectoryFromJson(ss.str());
}

}  // namespace ddopt
