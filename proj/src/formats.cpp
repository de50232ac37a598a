#include "twoview/formats.hpp"

#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <iostream>
#include <sstream>

namespace twoview {

namespace {

std::vector<std::string> tokenize(const std::string& line) {
  std::istringstream in(line);
  std::vector<std::string> tokens;
  std::string tok;
  while (in >> tok) tokens.push_back(tok);
  return tokens;
}

bool is_comment_or_blank(const std::string& line) {
  for (char c : line) {
    if (c == '#') return true;
    if (!std::isspace(static_cast<unsigned char>(c))) return false;
  }
  return true;
}

double parse_double(const std::string& tok, const std::string& path,
                    int line_no) {
  char* end = nullptr;
  const double v = std::strtod(tok.c_str(), &end);
  if (end != tok.c_str() + tok.size())
    fail(Errc::ParseError, path + ":" + std::to_string(line_no) +
                               ": bad number '" + tok + "'");
  return v;
}

std::ifstream open_input(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(Errc::IoError, "cannot open " + path);
  return in;
}

std::ofstream open_output(const std::string& path) {
  std::ofstream out(path);
  if (!out) fail(Errc::IoError, "cannot write " + path);
  return out;
}

template <typename LineFn>
void for_each_data_line(const std::string& path, LineFn&& fn) {
  std::ifstream in = open_input(path);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (is_comment_or_blank(line)) continue;
    fn(line, line_no);
  }
}

}  // namespace

std::string format_double(double value) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", value);
  return buf;
}

Mat3 quaternion_to_rotation(const std::array<double, 4>& q) {
  const double n =
      std::sqrt(q[0] * q[0] + q[1] * q[1] + q[2] * q[2] + q[3] * q[3]);
  const double x = q[0] / n, y = q[1] / n, z = q[2] / n, w = q[3] / n;
  return {1 - 2 * (y * y + z * z), 2 * (x * y - z * w), 2 * (x * z + y * w),
          2 * (x * y + z * w),     1 - 2 * (x * x + z * z),
          2 * (y * z - x * w),     2 * (x * z - y * w),
          2 * (y * z + x * w),     1 - 2 * (x * x + y * y)};
}

std::array<double, 4> rotation_to_quaternion(const Mat3& r) {
  // Shepperd's method, canonical w >= 0.
  std::array<double, 4> q{};
  const double trace = r[0] + r[4] + r[8];
  if (trace > 0.0) {
    const double s = std::sqrt(trace + 1.0) * 2.0;
    q[3] = 0.25 * s;
    q[0] = (r[7] - r[5]) / s;
    q[1] = (r[2] - r[6]) / s;
    q[2] = (r[3] - r[1]) / s;
  } else if (r[0] > r[4] && r[0] > r[8]) {
    const double s = std::sqrt(1.0 + r[0] - r[4] - r[8]) * 2.0;
    q[3] = (r[7] - r[5]) / s;
    q[0] = 0.25 * s;
    q[1] = (r[1] + r[3]) / s;
    q[2] = (r[2] + r[6]) / s;
  } else if (r[4] > r[8]) {
    const double s = std::sqrt(1.0 + r[4] - r[0] - r[8]) * 2.0;
    q[3] = (r[2] - r[6]) / s;
    q[0] = (r[1] + r[3]) / s;
    q[1] = 0.25 * s;
    q[2] = (r[5] + r[7]) / s;
  } else {
    const double s = std::sqrt(1.0 + r[8] - r[0] - r[4]) * 2.0;
    q[3] = (r[3] - r[1]) / s;
    q[0] = (r[2] + r[6]) / s;
    q[1] = (r[5] + r[7]) / s;
    q[2] = 0.25 * s;
  }
  if (q[3] < 0.0)
    for (double& c : q) c = -c;
  return q;
}

ProjectionMatrix pose_projection(const PoseRecord& pose,
                                 const CameraIntrinsics& k) {
  const Mat3 rt = mat3_transpose(pose.rotation);
  const Vec3 rc = mat3_mul_vec(rt, pose.translation);
  return ProjectionMatrix::from_krt(k, rt, {-rc[0], -rc[1], -rc[2]});
}

std::vector<PoseRecord> load_tum_trajectory(const std::string& path) {
  std::vector<PoseRecord> poses;
  for_each_data_line(path, [&](const std::string& line, int line_no) {
    const std::vector<std::string> tokens = tokenize(line);
    if (tokens.size() != 8)
      fail(Errc::ParseError, path + ":" + std::to_string(line_no) +
                                 ": expected 8 fields, got " +
                                 std::to_string(tokens.size()));
    double v[8];
    for (int i = 0; i < 8; ++i) v[i] = parse_double(tokens[i], path, line_no);

    PoseRecord rec;
    rec.time = v[0];
    rec.translation = {v[1], v[2], v[3]};
    rec.quaternion = {v[4], v[5], v[6], v[7]};
    const double qn = std::sqrt(v[4] * v[4] + v[5] * v[5] + v[6] * v[6] +
                                v[7] * v[7]);
    if (qn == 0.0)
      fail(Errc::ParseError,
           path + ":" + std::to_string(line_no) + ": zero quaternion");
    if (std::abs(qn - 1.0) > 1e-3) {
      std::cerr << path << ":" << line_no
                << ": warning: quaternion norm " << qn
                << " off unit, normalizing\n";
      for (double& c : rec.quaternion) c /= qn;
    }
    rec.rotation = quaternion_to_rotation(rec.quaternion);
    poses.push_back(rec);
  });
  return poses;
}

void save_tum_trajectory(const std::string& path,
                         std::span<const PoseRecord> poses) {
  std::ofstream out = open_output(path);
  for (const PoseRecord& p : poses) {
    out << format_double(p.time);
    for (double t : p.translation) out << ' ' << format_double(t);
    for (double q : p.quaternion) out << ' ' << format_double(q);
    out << '\n';
  }
}

std::vector<PoseRecord> load_kitti_poses(const std::string& path) {
  std::vector<PoseRecord> poses;
  for_each_data_line(path, [&](const std::string& line, int line_no) {
    const std::vector<std::string> tokens = tokenize(line);
    if (tokens.size() != 12)
      fail(Errc::ParseError, path + ":" + std::to_string(line_no) +
                                 ": expected 12 fields, got " +
                                 std::to_string(tokens.size()));
    double v[12];
    for (int i = 0; i < 12; ++i)
      v[i] = parse_double(tokens[i], path, line_no);

    PoseRecord rec;
    rec.rotation = {v[0], v[1], v[2], v[4], v[5], v[6], v[8], v[9], v[10]};
    rec.translation = {v[3], v[7], v[11]};

    const Mat3 rtr = mat3_mul(mat3_transpose(rec.rotation), rec.rotation);
    double worst = std::abs(mat3_det(rec.rotation) - 1.0);
    for (int i = 0; i < 9; ++i) {
      const double expected = (i % 4 == 0) ? 1.0 : 0.0;
      worst = std::max(worst, std::abs(rtr[i] - expected));
    }
    if (worst > 1e-3)
      fail(Errc::ParseError, path + ":" + std::to_string(line_no) +
                                 ": rotation not orthonormal (error " +
                                 format_double(worst) + ")");

    rec.time = 0.1 * static_cast<double>(poses.size());
    rec.quaternion = rotation_to_quaternion(rec.rotation);
    poses.push_back(rec);
  });
  return poses;
}

void save_kitti_poses(const std::string& path,
                      std::span<const PoseRecord> poses) {
  std::ofstream out = open_output(path);
  for (const PoseRecord& p : poses) {
    const double row[12] = {p.rotation[0], p.rotation[1], p.rotation[2],
                            p.translation[0], p.rotation[3], p.rotation[4],
                            p.rotation[5], p.translation[1], p.rotation[6],
                            p.rotation[7], p.rotation[8], p.translation[2]};
    for (int i = 0; i < 12; ++i) {
      if (i) out << ' ';
      out << format_double(row[i]);
    }
    out << '\n';
  }
}

namespace {

bool plausibly_inside(const Point2& p, const ImageDims& dims) {
  const double mu = 0.25 * dims.w;
  const double mv = 0.25 * dims.h;
  return std::isfinite(p.u) && std::isfinite(p.v) && p.u >= -mu &&
         p.u <= dims.w + mu && p.v >= -mv && p.v <= dims.h + mv;
}

MatchSet load_correspondences_impl(const std::string& path,
                                   const ImageDims* dims1,
                                   const ImageDims* dims2) {
  MatchSet ms;
  for_each_data_line(path, [&](const std::string& line, int line_no) {
    const std::vector<std::string> tokens = tokenize(line);
    if (tokens.size() != 4 && tokens.size() != 5)
      fail(Errc::ParseError, path + ":" + std::to_string(line_no) +
                                 ": expected 4 or 5 fields, got " +
                                 std::to_string(tokens.size()));
    Correspondence c;
    c.p1 = {parse_double(tokens[0], path, line_no),
            parse_double(tokens[1], path, line_no)};
    c.p2 = {parse_double(tokens[2], path, line_no),
            parse_double(tokens[3], path, line_no)};
    if (tokens.size() == 5)
      c.nn_ratio = parse_double(tokens[4], path, line_no);
    if ((dims1 && !plausibly_inside(c.p1, *dims1)) ||
        (dims2 && !plausibly_inside(c.p2, *dims2)))
      fail(Errc::ParseError, path + ":" + std::to_string(line_no) +
                                 ": point far outside the image bounds");
    ms.correspondences.push_back(c);
  });
  ms.keypoints1 = ms.keypoints2 = ms.correspondences.size();
  return ms;
}

}  // namespace

MatchSet load_correspondences(const std::string& path) {
  return load_correspondences_impl(path, nullptr, nullptr);
}

MatchSet load_correspondences(const std::string& path, const ImageDims& dims1,
                              const ImageDims& dims2) {
  return load_correspondences_impl(path, &dims1, &dims2);
}

void save_correspondences(const std::string& path, const MatchSet& ms) {
  std::ofstream out = open_output(path);
  for (const Correspondence& c : ms.correspondences) {
    out << format_double(c.p1.u) << ' ' << format_double(c.p1.v) << ' '
        << format_double(c.p2.u) << ' ' << format_double(c.p2.v);
    if (c.nn_ratio) out << ' ' << format_double(*c.nn_ratio);
    out << '\n';
  }
}

std::vector<Descriptor> load_descriptors(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(Errc::IoError, "cannot open " + path);
  std::uint32_t count = 0, dim = 0;
  in.read(reinterpret_cast<char*>(&count), 4);
  in.read(reinterpret_cast<char*>(&dim), 4);
  if (!in) fail(Errc::ParseError, path + ": truncated descriptor header");

  std::vector<Descriptor> out(count, Descriptor(dim));
  for (auto& d : out) {
    in.read(reinterpret_cast<char*>(d.data()),
            static_cast<std::streamsize>(dim) * 4);
    if (!in) fail(Errc::ParseError, path + ": truncated descriptor data");
  }
  char extra;
  if (in.read(&extra, 1))
    fail(Errc::ParseError, path + ": trailing bytes after descriptor data");
  return out;
}

void save_descriptors(const std::string& path,
                      std::span<const Descriptor> descriptors) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(Errc::IoError, "cannot write " + path);
  const std::uint32_t count = static_cast<std::uint32_t>(descriptors.size());
  const std::uint32_t dim =
      descriptors.empty() ? 0
                          : static_cast<std::uint32_t>(descriptors[0].size());
  for (const Descriptor& d : descriptors)
    if (d.size() != dim)
      fail(Errc::InvalidInput, "save_descriptors: ragged dimensions");
  out.write(reinterpret_cast<const char*>(&count), 4);
  out.write(reinterpret_cast<const char*>(&dim), 4);
  for (const Descriptor& d : descriptors)
    out.write(reinterpret_cast<const char*>(d.data()),
              static_cast<std::streamsize>(dim) * 4);
}

std::vector<Keypoint> load_keypoints(const std::string& points_path,
                                     const std::string& descriptors_path) {
  std::vector<Point2> locations;
  for_each_data_line(points_path, [&](const std::string& line, int line_no) {
    const std::vector<std::string> tokens = tokenize(line);
    if (tokens.size() != 2)
      fail(Errc::ParseError, points_path + ":" + std::to_string(line_no) +
                                 ": expected 2 fields");
    locations.push_back({parse_double(tokens[0], points_path, line_no),
                         parse_double(tokens[1], points_path, line_no)});
  });
  std::vector<Descriptor> descriptors = load_descriptors(descriptors_path);
  if (descriptors.size() != locations.size())
    fail(Errc::ParseError, points_path + ": " +
                               std::to_string(locations.size()) +
                               " keypoints but " +
                               std::to_string(descriptors.size()) +
                               " descriptors");
  std::vector<Keypoint> out(locations.size());
  for (size_t i = 0; i < out.size(); ++i)
    out[i] = {locations[i], std::move(descriptors[i])};
  return out;
}

void save_keypoints(const std::string& points_path,
                    const std::string& descriptors_path,
                    std::span<const Keypoint> keypoints) {
  std::ofstream out = open_output(points_path);
  std::vector<Descriptor> descriptors;
  descriptors.reserve(keypoints.size());
  for (const Keypoint& k : keypoints) {
    out << format_double(k.location.u) << ' ' << format_double(k.location.v)
        << '\n';
    descriptors.push_back(k.descriptor);
  }
  out.close();
  save_descriptors(descriptors_path, descriptors);
}

namespace {

bool is_canonical(const Mat3& m) {
  double norm_sq = 0.0;
  double max_abs = 0.0;
  int argmax = 0;
  for (int i = 0; i < 9; ++i) {
    if (!std::isfinite(m[i])) return false;
    norm_sq += m[i] * m[i];
    if (std::abs(m[i]) > max_abs) {
      max_abs = std::abs(m[i]);
      argmax = i;
    }
  }
  return std::abs(norm_sq - 1.0) <= 1e-9 && std::abs(mat3_det(m)) <= 1e-9 &&
         m[argmax] > 0.0;
}

}  // namespace

FundamentalMatrix load_fmatrix(const std::string& path) {
  std::ifstream in = open_input(path);
  Mat3 m{};
  std::string tok;
  for (int i = 0; i < 9; ++i) {
    if (!(in >> tok))
      fail(Errc::ParseError, path + ": expected 9 values, got " +
                                 std::to_string(i));
    m[i] = parse_double(tok, path, 1);
  }
  if (in >> tok)
    fail(Errc::ParseError, path + ": trailing values after 9 entries");
  if (is_canonical(m)) return {m};
  return canonicalize(m);
}

void save_fmatrix(const std::string& path, const FundamentalMatrix& f) {
  std::ofstream out = open_output(path);
  for (int i = 0; i < 9; ++i) {
    if (i) out << ' ';
    out << format_double(f.m[i]);
  }
  out << '\n';
}

}  // namespace twoview
